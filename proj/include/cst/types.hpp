#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cst/errors.hpp"

namespace cst {

// Observation-interval grid for one class: endpoints tau_0 < ... < tau_K,
// interval k (1-based) is the half-open (tau_{k-1}, tau_k].
struct IntervalPartition {
    std::string class_id;
    std::vector<double> endpoints;

    std::size_t interval_count() const { return endpoints.empty() ? 0 : endpoints.size() - 1; }

    // 1-based interval index containing t, or 0 if t is outside (tau_0, tau_K].
    std::size_t interval_of(double t) const;

    bool operator==(const IntervalPartition&) const = default;
};

// Piece-wise constant covariate path: value levels[j] on [breakpoints[j], breakpoints[j+1]).
struct CovariatePath {
    std::vector<double> breakpoints;
    std::vector<std::vector<double>> levels;

    // Left-continuous lookup: the level in force on the sub-interval ending at t.
    const std::vector<double>& value_at(double t) const;

    // True if sub-interval j lies inside (lo, hi] up to a relative tolerance.
    bool subinterval_within(std::size_t j, double lo, double hi) const;

    // True if sub-interval j and (lo, hi] share positive length: the level is
    // in force somewhere on the interval. Equals subinterval_within whenever
    // the path refines the partition grid.
    bool subinterval_overlaps(std::size_t j, double lo, double hi) const;

    // The single level when the path never changes value, otherwise nullopt.
    std::optional<std::vector<double>> constant_level() const;

    bool operator==(const CovariatePath&) const = default;
};

struct ClassTransition {
    std::string from_class;
    std::string to_class;

    bool operator==(const ClassTransition&) const = default;
};

// One individual: per-interval detection indicators plus optional covariate
// path and class-transition label.
struct DetectionRecord {
    std::string individual_id;
    std::string class_id;
    std::vector<std::uint8_t> deltas;
    std::optional<CovariatePath> covariates;
    std::optional<ClassTransition> transition;

    std::size_t detection_count() const {
        std::size_t s = 0;
        for (auto d : deltas) s += d ? 1 : 0;
        return s;
    }

    bool operator==(const DetectionRecord&) const = default;
};

// includes_undetected distinguishes roster data (all-zero rows present) from
// detected-only samples; estimators that need the roster check it.
struct Dataset {
    std::map<std::string, IntervalPartition> partitions;
    std::vector<DetectionRecord> records;
    bool includes_undetected = false;
    int covariate_dim = 0;

    const IntervalPartition& partition_of(const std::string& class_id) const;
    std::size_t class_size(const std::string& class_id) const;

    bool operator==(const Dataset&) const = default;
};

// Checks every structural invariant and returns the dataset unchanged.
// Throws cst::error; never repairs silently. Idempotent.
Dataset validate_dataset(Dataset raw);

// Indices of the records belonging to one class (validates existence and
// non-emptiness). Shared by every estimator.
std::vector<std::size_t> class_record_indices(const Dataset& data, const std::string& class_id);

// Canonical key for covariate-level identity: components rounded to 12
// significant digits (levels are categorical in the finite-level models).
std::string level_key(const std::vector<double>& z);

} // namespace cst
