#include "cst/types.hpp"

#include <cmath>
#include <cstdio>
#include <set>

namespace cst {

std::size_t IntervalPartition::interval_of(double t) const {
    for (std::size_t k = 1; k < endpoints.size(); ++k)
        if (t > endpoints[k - 1] && t <= endpoints[k]) return k;
    return 0;
}

const std::vector<double>& CovariatePath::value_at(double t) const {
    // Left-continuous: on breakpoints the level of the closing sub-interval wins.
    for (std::size_t j = 1; j < breakpoints.size(); ++j)
        if (t > breakpoints[j - 1] && t <= breakpoints[j]) return levels[j - 1];
    if (!levels.empty() && t <= breakpoints.front()) return levels.front();
    return levels.back();
}

bool CovariatePath::subinterval_within(std::size_t j, double lo, double hi) const {
    double u0 = breakpoints[j];
    double u1 = breakpoints[j + 1];
    double tol = 1e-9 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    return u0 >= lo - tol && u1 <= hi + tol;
}

bool CovariatePath::subinterval_overlaps(std::size_t j, double lo, double hi) const {
    double u0 = breakpoints[j];
    double u1 = breakpoints[j + 1];
    double tol = 1e-9 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    return u0 < hi - tol && u1 > lo + tol;
}

std::optional<std::vector<double>> CovariatePath::constant_level() const {
    if (levels.empty()) return std::nullopt;
    const std::string key = level_key(levels.front());
    for (std::size_t j = 1; j < levels.size(); ++j)
        if (level_key(levels[j]) != key) return std::nullopt;
    return levels.front();
}

const IntervalPartition& Dataset::partition_of(const std::string& class_id) const {
    auto it = partitions.find(class_id);
    if (it == partitions.end()) fail(errc::unknown_class, "no partition for class '" + class_id + "'");
    return it->second;
}

std::size_t Dataset::class_size(const std::string& class_id) const {
    std::size_t n = 0;
    for (const auto& r : records)
        if (r.class_id == class_id) ++n;
    return n;
}

namespace {

void check_partition(const IntervalPartition& part) {
    if (part.endpoints.size() < 2)
        fail(errc::nonmonotone_endpoints, "class '" + part.class_id + "' needs K >= 1 intervals");
    if (part.endpoints.front() < 0.0)
        fail(errc::nonmonotone_endpoints, "class '" + part.class_id + "' starts before 0");
    for (std::size_t k = 1; k < part.endpoints.size(); ++k)
        if (!(part.endpoints[k] > part.endpoints[k - 1]))
            fail(errc::nonmonotone_endpoints,
                 "class '" + part.class_id + "' endpoints not strictly increasing at index " +
                     std::to_string(k));
}

void check_path(const CovariatePath& path, int covariate_dim, const std::string& who) {
    if (path.breakpoints.size() < 2)
        fail(errc::invalid_covariate_path, who + ": path needs at least one sub-interval");
    for (std::size_t j = 1; j < path.breakpoints.size(); ++j)
        if (!(path.breakpoints[j] > path.breakpoints[j - 1]))
            fail(errc::invalid_covariate_path, who + ": breakpoints not strictly increasing");
    if (path.levels.size() != path.breakpoints.size() - 1)
        fail(errc::invalid_covariate_path, who + ": levels count must equal breakpoints count - 1");
    for (const auto& z : path.levels)
        if (static_cast<int>(z.size()) != covariate_dim)
            fail(errc::dim_mismatch, who + ": covariate dimension mismatch (expected " +
                                         std::to_string(covariate_dim) + ")");
}

} // namespace

Dataset validate_dataset(Dataset raw) {
    for (const auto& [cid, part] : raw.partitions) {
        if (cid != part.class_id)
            fail(errc::unknown_class, "partition keyed '" + cid + "' declares class '" + part.class_id + "'");
        check_partition(part);
    }

    std::set<std::string> seen_classes;
    for (const auto& rec : raw.records) {
        const std::string who = "record '" + rec.individual_id + "'";
        auto it = raw.partitions.find(rec.class_id);
        if (it == raw.partitions.end())
            fail(errc::unknown_class, who + " references class '" + rec.class_id + "'");
        const auto& part = it->second;
        if (rec.deltas.size() != part.interval_count())
            fail(errc::misaligned_deltas, who + ": " + std::to_string(rec.deltas.size()) +
                                              " deltas against K=" + std::to_string(part.interval_count()));
        if (!raw.includes_undetected && rec.detection_count() == 0)
            fail(errc::roster_flag_violation,
                 who + " has no detections but the dataset is flagged detected-only");
        if (rec.covariates) check_path(*rec.covariates, raw.covariate_dim, who);
        if (rec.transition && rec.transition->to_class != rec.class_id)
            fail(errc::schema_mismatch,
                 who + ": transition target '" + rec.transition->to_class +
                     "' differs from record class '" + rec.class_id + "'");
        seen_classes.insert(rec.class_id);
    }

    for (const auto& [cid, part] : raw.partitions)
        if (!seen_classes.count(cid)) fail(errc::empty_class, "class '" + cid + "' has no records");

    return raw;
}

std::vector<std::size_t> class_record_indices(const Dataset& data, const std::string& class_id) {
    data.partition_of(class_id);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < data.records.size(); ++i)
        if (data.records[i].class_id == class_id) idx.push_back(i);
    if (idx.empty()) fail(errc::empty_class, "class '" + class_id + "' has no records");
    return idx;
}

std::string level_key(const std::vector<double>& z) {
    std::string key;
    char buf[40];
    for (double v : z) {
        // 12 significant digits; normalizes -0 so equal values share a key.
        double canon = (v == 0.0) ? 0.0 : v;
        std::snprintf(buf, sizeof buf, "%.12g", canon);
        key += buf;
        key += '|';
    }
    return key;
}

} // namespace cst
