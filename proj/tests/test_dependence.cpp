#include <doctest.h>

#include <cmath>
#include <map>

#include "cst/dependence.hpp"
#include "cst/estimate.hpp"
#include "helpers.hpp"

using namespace cst;
using cst::testing::make_dataset;
using cst::testing::random_dataset;
using cst::testing::random_markov_dataset;

TEST_CASE("joint estimates") {
    Dataset ds = make_dataset({{1, 1}, {1, 0}, {0, 1}, {0, 0}});
    JointEstimates je = joint_estimates(ds, "C1");
    CHECK(je.p_joint[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(je.pi_hat[0] == doctest::Approx(0.5).epsilon(1e-15));

    Dataset none = make_dataset({{1, 0}, {0, 1}, {0, 0}});
    JointEstimates jn = joint_estimates(none, "C1");
    CHECK(jn.p_joint[0] == 0.0);

    Dataset all = make_dataset({{1, 1, 1}, {1, 1, 1}});
    JointEstimates ja = joint_estimates(all, "C1");
    CHECK(ja.pi_hat == std::vector<double>{1.0, 1.0});

    Dataset empty_col = make_dataset({{0, 1}, {0, 0}});
    JointEstimates je2 = joint_estimates(empty_col, "C1");
    CHECK(!je2.pi_defined[0]); // nobody detected in interval 1
}

TEST_CASE("joint identity p_joint = pi * p") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Dataset ds = random_dataset(seed, 35, 4);
        JointEstimates je = joint_estimates(ds, "C1");
        EstimateSet est = estimate_interval_probs(ds, "C1");
        for (std::size_t k = 0; k + 1 < 4; ++k) {
            if (!je.pi_defined[k]) continue;
            CHECK(je.p_joint[k] == doctest::Approx(je.pi_hat[k] * est.p_hat[k]).epsilon(1e-14));
        }
    }
}

TEST_CASE("consecutive independence test") {
    SUBCASE("exact in-sample factorization gives statistic 0") {
        // p1 = p2 = 1/2, joint = 1/4 over n=4
        Dataset ds = make_dataset({{1, 1}, {1, 0}, {0, 1}, {0, 0}});
        TestResult res = independence_test_consecutive(ds, "C1");
        CHECK(res.statistic == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(res.p_value == 1.0);
        CHECK(res.df == 0); // (K-2)^2 with K=2
        CHECK(res.df_anomaly);
    }
    SUBCASE("probability and count forms agree") {
        for (std::uint64_t seed = 1; seed <= 40; ++seed) {
            Dataset ds = random_dataset(seed, 30, 5);
            auto [prob, cnt] = consecutive_statistic_forms(ds, "C1");
            CHECK(std::abs(prob - cnt) <= 1e-12 * std::max(1.0, std::abs(prob)));
        }
    }
    SUBCASE("sample scaling multiplies by n") {
        Dataset ds = random_dataset(3, 25, 4);
        TestResult lit = independence_test_consecutive(ds, "C1", TestScaling::paper_literal);
        TestResult sc = independence_test_consecutive(ds, "C1", TestScaling::sample_scaled);
        CHECK(sc.statistic == doctest::Approx(25.0 * lit.statistic).epsilon(1e-12));
        CHECK(sc.df == lit.df);
    }
    SUBCASE("K=3 has df 1 and a p-value from the upper tail") {
        Dataset ds = random_dataset(8, 60, 3);
        TestResult res = independence_test_consecutive(ds, "C1");
        CHECK(res.df == 1);
        CHECK(res.p_value >= 0.0);
        CHECK(res.p_value <= 1.0);
    }
}

TEST_CASE("markov estimates") {
    SUBCASE("single origin collapses to the pooled estimate") {
        Dataset ds = make_dataset({{1, 0}, {0, 1}, {0, 0}});
        for (auto& rec : ds.records) rec.transition = ClassTransition{"O1", "C1"};
        MarkovEstimates me = markov_estimates(ds);
        CHECK(me.q_hat.at("O1") == 1.0);
        EstimateSet pooled = estimate_interval_probs(ds, "C1");
        CHECK(me.p_cond.at("O1") == pooled.p_hat);
        CHECK(me.p_joint_class.at("O1") == pooled.p_hat);
    }
    SUBCASE("six-record two-origin dataset matches stratified means") {
        Dataset ds = make_dataset({{1, 0}, {0, 1}, {0, 0}, {1, 1}, {0, 0}, {1, 0}});
        const char* origins[] = {"A", "A", "A", "B", "B", "B"};
        for (std::size_t i = 0; i < 6; ++i)
            ds.records[i].transition = ClassTransition{origins[i], "C1"};
        MarkovEstimates me = markov_estimates(ds);
        CHECK(me.q_hat.at("A") == doctest::Approx(0.5));
        CHECK(me.p_cond.at("A")[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
        CHECK(me.p_cond.at("A")[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
        CHECK(me.p_cond.at("B")[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
        CHECK(me.p_joint_class.at("B")[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
        // conditional survival from the conditional p
        CHECK(me.S_cond.at("A")[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    }
    SUBCASE("missing labels error") {
        Dataset ds = make_dataset({{1, 0}});
        try {
            markov_estimates(ds);
            CHECK(false);
        } catch (const error& e) {
            CHECK(e.code() == errc::no_transition_labels);
        }
    }
    SUBCASE("origins absent for a class are flagged as empty cells") {
        Dataset ds = make_dataset({{1, 0}, {0, 1}});
        ds.partitions["C2"] = IntervalPartition{"C2", {0.0, 1.0, 2.0}};
        ds.records[0].transition = ClassTransition{"O1", "C1"};
        ds.records[1].transition = ClassTransition{"O1", "C1"};
        DetectionRecord other;
        other.individual_id = "x";
        other.class_id = "C2";
        other.deltas = {1, 0};
        other.transition = ClassTransition{"O2", "C2"};
        ds.records.push_back(other);

        MarkovEstimates me = markov_estimates(ds, "C1");
        CHECK(me.origins == std::vector<std::string>{"O1"});
        CHECK(me.empty_origins == std::vector<std::string>{"O2"});
    }
}

TEST_CASE("degenerate inputs for the tests") {
    SUBCASE("K=1 is too small for joint estimates") {
        Dataset ds = make_dataset({{1}, {0}});
        try {
            joint_estimates(ds, "C1");
            CHECK(false);
        } catch (const error& e) {
            CHECK(e.code() == errc::k_too_small);
        }
    }
    SUBCASE("all-degenerate cells cannot be tested") {
        Dataset ds = make_dataset({{0, 0}, {0, 0}, {0, 0}});
        try {
            independence_test_consecutive(ds, "C1");
            CHECK(false);
        } catch (const error& e) {
            CHECK(e.code() == errc::no_nondegenerate_cells);
        }
    }
}

namespace {

// Independent Pearson oracle: individuals cross-classified by first-detection
// interval (row 0 = never) and origin class; statistic over detection rows
// with expected counts row_total * col_total / n.
double pearson_detection_by_origin(const Dataset& ds, const std::string& class_id) {
    std::map<std::string, std::size_t> col_of;
    std::size_t K = ds.partitions.at(class_id).interval_count();
    for (const auto& rec : ds.records)
        if (rec.class_id == class_id) col_of.emplace(rec.transition->from_class, col_of.size());

    std::vector<std::vector<double>> obs(K + 1, std::vector<double>(col_of.size(), 0.0));
    double n = 0.0;
    for (const auto& rec : ds.records) {
        if (rec.class_id != class_id) continue;
        n += 1.0;
        std::size_t col = col_of.at(rec.transition->from_class);
        std::size_t row = 0;
        for (std::size_t k = 0; k < K; ++k)
            if (rec.deltas[k]) row = k + 1;
        obs[row][col] += 1.0;
    }
    std::vector<double> row_tot(K + 1, 0.0), col_tot(col_of.size(), 0.0);
    for (std::size_t r = 0; r <= K; ++r)
        for (std::size_t c = 0; c < col_of.size(); ++c) {
            row_tot[r] += obs[r][c];
            col_tot[c] += obs[r][c];
        }
    double stat = 0.0;
    for (std::size_t r = 1; r <= K; ++r)
        for (std::size_t c = 0; c < col_of.size(); ++c) {
            double expected = row_tot[r] * col_tot[c] / n;
            if (expected <= 0.0) continue;
            double d = obs[r][c] - expected;
            stat += d * d / expected;
        }
    return stat;
}

} // namespace

TEST_CASE("markov independence test") {
    SUBCASE("exact factorization gives statistic 0") {
        // two origins with identical conditional detection patterns
        Dataset ds = make_dataset({{1, 0}, {0, 1}, {0, 0}, {0, 0},
                                   {1, 0}, {0, 1}, {0, 0}, {0, 0}});
        for (std::size_t i = 0; i < 8; ++i)
            ds.records[i].transition = ClassTransition{i < 4 ? "A" : "B", "C1"};
        TestResult res = markov_independence_test(ds, "C1");
        CHECK(res.statistic == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(res.df == 1); // (K-1)(L-1) = 1*1
    }
    SUBCASE("sample-scaled statistic equals the Pearson oracle") {
        for (std::uint64_t seed = 1; seed <= 25; ++seed) {
            Dataset ds = random_markov_dataset(seed, 60, 3, 3);
            TestResult res = markov_independence_test(ds, "C1");
            double oracle = pearson_detection_by_origin(ds, "C1");
            CHECK(std::abs(res.statistic - oracle) <= 1e-10 * std::max(1.0, oracle));
        }
    }
    SUBCASE("hand-built K=2, L=2 dataset with one excess joint cell") {
        // Origin A: 3 records, 2 detected in interval 1, 1 undetected.
        // Origin B: 3 records, 1 detected in interval 2, 2 undetected.
        Dataset ds = make_dataset({{1, 0}, {1, 0}, {0, 0}, {0, 1}, {0, 0}, {0, 0}});
        for (std::size_t i = 0; i < 6; ++i)
            ds.records[i].transition = ClassTransition{i < 3 ? "A" : "B", "C1"};
        TestResult res = markov_independence_test(ds, "C1", TestScaling::paper_literal);
        // by hand: p_hat = (1/3, 1/6), q = (1/2, 1/2)
        // joint: A: (1/3, 0); B: (0, 1/6)
        double expected = 0.0;
        {
            double cells[2][2] = {{2.0 / 6.0, 0.0 / 6.0}, {0.0 / 6.0, 1.0 / 6.0}};
            double p[2] = {1.0 / 3.0, 1.0 / 6.0};
            double q[2] = {0.5, 0.5};
            for (int k = 0; k < 2; ++k)
                for (int o = 0; o < 2; ++o) {
                    double e = p[k] * q[o];
                    double d = cells[o][k] - e;
                    expected += d * d / e;
                }
        }
        CHECK(res.statistic == doctest::Approx(expected).epsilon(1e-14));
        TestResult scaled = markov_independence_test(ds, "C1");
        CHECK(scaled.statistic == doctest::Approx(6.0 * expected).epsilon(1e-12));
    }
    SUBCASE("record permutation and relabeling leave the statistic unchanged") {
        Dataset ds = random_markov_dataset(4, 50, 3, 2);
        TestResult a = markov_independence_test(ds, "C1");
        std::reverse(ds.records.begin(), ds.records.end());
        TestResult b = markov_independence_test(ds, "C1");
        CHECK(a.statistic == b.statistic);
        for (auto& rec : ds.records) // rename origins
            rec.transition->from_class = "X" + rec.transition->from_class;
        TestResult c = markov_independence_test(ds, "C1");
        CHECK(a.statistic == c.statistic);
    }
}
