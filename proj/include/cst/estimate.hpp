#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cst/types.hpp"

namespace cst {

// Per-interval detection probability estimates for one class, together with
// the derived survival and cumulative-hazard step functions at the interval
// endpoints. S_hat has K+1 entries (starting at tau_0 with value 1);
// Lambda increments/cumulative have K entries and may be +inf past the point
// where the estimated mass reaches 1 (first_infinite_k flags it, 1-based).
struct EstimateSet {
    std::vector<double> p_hat;
    std::vector<double> p_hat_var;
    std::vector<std::size_t> n_used;
    std::vector<double> S_hat;
    std::vector<double> Lambda_increments;
    std::vector<double> Lambda_hat;
    std::optional<std::size_t> first_infinite_k;
};

// Delta-method variances from the limiting Gaussian process, divided by n
// (variance of the estimator itself). Lambda_var describes the per-interval
// log-ratio increment; zero_survivor_from flags +inf entries caused by an
// exhausted survivor estimate (1-based interval index).
struct VarianceReport {
    std::vector<double> S_var;
    std::vector<double> Lambda_var;
    std::vector<double> survivor_probs;
    std::optional<std::size_t> zero_survivor_from;
};

struct HazardEstimate {
    std::vector<double> increments;
    std::vector<double> cumulative;
    std::optional<std::size_t> first_infinite_k;
};

// p_hat_k = column mean of the detection indicators, p_hat_var_k = p(1-p)/n.
// Fills only the probability part of the EstimateSet.
EstimateSet estimate_interval_probs(const Dataset& data, const std::string& class_id);

// 1 - (total detections)/n. Requires roster data and at most one detection
// per record (the multinomial regime); refuses otherwise.
double estimate_never_observed(const Dataset& data, const std::string& class_id);

// S(tau_0)=1, S(tau_k) = 1 - sum_{k'<=k} p_hat_{k'}.
std::vector<double> survival_curve(const EstimateSet& est);

// Per-interval increments log[(1 - sum_{k'<k} p)/(1 - sum_{k'<=k} p)] and
// their cumulative sums; +inf from the first exhausted interval onward.
HazardEstimate cumulative_hazard(const EstimateSet& est);

// Variance formulas with the survivor probabilities plugged in as S_hat.
VarianceReport asymptotic_variances(const EstimateSet& est);

// Normal-approximation intervals p_hat +- z*sqrt(var), clipped to [0,1].
std::vector<std::pair<double, double>> confidence_intervals(const EstimateSet& est, double level);

// Convenience: probabilities plus survival/hazard in one call.
EstimateSet estimate_class(const Dataset& data, const std::string& class_id);

// Builds the survival/hazard parts onto an EstimateSet whose p_hat is set.
void attach_step_functions(EstimateSet& est);

} // namespace cst
