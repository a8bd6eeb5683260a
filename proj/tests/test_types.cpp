#include <doctest.h>

#include "cst/types.hpp"
#include "helpers.hpp"

using namespace cst;
using cst::testing::make_dataset;

namespace {
bool fails_with(errc code, const Dataset& ds) {
    try {
        validate_dataset(ds);
    } catch (const error& e) {
        return e.code() == code;
    }
    return false;
}
} // namespace

TEST_CASE("valid dataset passes through unchanged") {
    Dataset ds = make_dataset({{1, 0}, {0, 1}, {0, 0}});
    Dataset v = validate_dataset(ds);
    CHECK(v == ds);
    CHECK(validate_dataset(v) == v); // idempotent
}

TEST_CASE("delta length mismatch is rejected") {
    Dataset ds = make_dataset({{1, 0}});
    ds.records[0].deltas.push_back(0); // now length 3 against K=2
    CHECK(fails_with(errc::misaligned_deltas, ds));
}

TEST_CASE("nonmonotone endpoints are rejected") {
    Dataset ds = make_dataset({{1, 0}});
    ds.partitions.at("C1").endpoints = {0.0, 2.0, 2.0};
    CHECK(fails_with(errc::nonmonotone_endpoints, ds));
}

TEST_CASE("unknown class and empty class") {
    Dataset ds = make_dataset({{1, 0}});
    ds.records[0].class_id = "C9";
    CHECK(fails_with(errc::unknown_class, ds));

    Dataset ds2 = make_dataset({{1, 0}});
    ds2.partitions["C2"] = IntervalPartition{"C2", {0.0, 1.0}};
    CHECK(fails_with(errc::empty_class, ds2));
}

TEST_CASE("detected-only datasets may not contain all-zero rows") {
    Dataset ds = make_dataset({{1, 0}, {0, 0}}, /*includes_undetected=*/false);
    CHECK(fails_with(errc::roster_flag_violation, ds));
}

TEST_CASE("covariate paths are checked structurally") {
    Dataset ds = make_dataset({{1, 0}});
    ds.covariate_dim = 1;
    ds.records[0].covariates = CovariatePath{{0.0, 2.0}, {{0.5}, {0.7}}}; // levels != breaks-1
    CHECK(fails_with(errc::invalid_covariate_path, ds));

    ds.records[0].covariates = CovariatePath{{0.0, 1.0, 2.0}, {{0.5}, {0.7, 0.1}}};
    CHECK(fails_with(errc::dim_mismatch, ds));
}

TEST_CASE("transition target must match the record class") {
    Dataset ds = make_dataset({{1, 0}});
    ds.records[0].transition = ClassTransition{"C1", "C2"};
    CHECK(fails_with(errc::schema_mismatch, ds));
}

TEST_CASE("interval lookup uses half-open intervals") {
    IntervalPartition part{"C1", {0.0, 1.0, 2.0}};
    CHECK(part.interval_of(0.0) == 0);
    CHECK(part.interval_of(0.5) == 1);
    CHECK(part.interval_of(1.0) == 1);
    CHECK(part.interval_of(1.0000001) == 2);
    CHECK(part.interval_of(2.0) == 2);
    CHECK(part.interval_of(2.5) == 0);
}

TEST_CASE("covariate path lookup is left-continuous") {
    CovariatePath path{{0.0, 1.0, 2.0}, {{10.0}, {20.0}}};
    CHECK(path.value_at(0.5).front() == 10.0);
    CHECK(path.value_at(1.0).front() == 10.0); // level in force up to the breakpoint
    CHECK(path.value_at(1.5).front() == 20.0);
    CHECK(path.value_at(2.0).front() == 20.0);
    CHECK(path.constant_level() == std::nullopt);
    CovariatePath flat{{0.0, 2.0}, {{3.0}}};
    CHECK(flat.constant_level().value() == std::vector<double>{3.0});
}

TEST_CASE("level keys canonicalize to 12 significant digits") {
    CHECK(level_key({1.0}) == level_key({1.0 + 1e-14}));
    CHECK(level_key({1.0}) != level_key({1.0 + 1e-10}));
    CHECK(level_key({0.0}) == level_key({-0.0}));
}
