#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cst/estimate.hpp"
#include "cst/hazard.hpp"
#include "cst/types.hpp"

namespace cst {

// Cell normalization for finite-level estimators. paper_literal divides the
// level-cell detection sums by the full class count n_l (the displayed
// modification of the MLE); conditional divides by the cell member count and
// gives the detection probabilities given the level.
enum class Normalization { paper_literal, conditional };

// Per-level estimates over a finite covariate level set. Cells are indexed
// [k][j] (interval x level). Empty cells carry NaN and are listed in
// empty_cells (1-based interval index). Per-level step functions are NaN
// from the first undefined or mass-exhausted interval onward.
struct StratifiedEstimates {
    std::vector<std::vector<double>> levels;
    std::vector<std::vector<std::size_t>> detections; // [k][j] detection sums
    std::vector<std::vector<std::size_t>> counts;     // [k][j] cell members
    std::vector<std::vector<double>> p_by_level;      // [k][j] per `normalization`
    std::vector<std::vector<double>> S_by_level;      // [j][0..K]
    std::vector<std::vector<double>> Lambda_by_level; // [j][0..K-1]
    std::vector<std::pair<std::size_t, std::size_t>> empty_cells; // (k, j), k 1-based
    Normalization normalization = Normalization::paper_literal;
    std::size_t n_class = 0;

    std::size_t level_index(const std::vector<double>& z) const;
    // Conditional cell probability regardless of the stored normalization.
    double conditional_cell(std::size_t k, std::size_t j) const;
};

enum class KernelFamily { epanechnikov, gaussian, uniform };

// bandwidth empty = AUTO: per-dimension sigma_hat * n^(-s/(d+4s)) with the
// pooled sample standard deviation of the covariate values at the interval
// endpoints (product kernel for d > 1).
struct KernelConfig {
    KernelFamily kernel = KernelFamily::epanechnikov;
    std::optional<double> bandwidth;
    int smoothness_order = 2;
};

struct CovariateCdfEstimate {
    double value = 0.0;
    double raw = 0.0;
    bool clamped = false;
};

// Finite-level proportional-hazards decomposition: mu_hat[k] = log pooled
// p_hat_k, omega_hat[j] = log of the level-j-to-overall detection-rate ratio,
// plus per-level probabilities and step functions (conditional cells).
struct PHDecomposition {
    std::vector<std::vector<double>> levels;
    std::vector<double> mu_hat;                      // -inf when p_hat_k = 0
    std::vector<bool> mu_log_of_zero;
    std::vector<double> omega_hat;                   // [j]
    std::vector<bool> omega_log_of_zero;
    std::vector<std::vector<double>> p_by_level;     // [k][j] conditional
    std::vector<std::vector<double>> S_by_level;     // [j][0..K]
    std::vector<std::vector<double>> Lambda_by_level;
    std::vector<std::size_t> level_counts;
    std::size_t n_class = 0;

    // Coefficients solved from omega_hat when the level design has full
    // rank (derived convenience, not a displayed estimator).
    std::optional<std::vector<double>> beta_hat;
};

StratifiedEstimates stratified_estimates(const Dataset& data, const std::string& class_id,
                                         Normalization normalization = Normalization::paper_literal);

// Plug-in estimate of Pr(Z <= z) from detected-only information:
// ratio of sum_k Pr(Z<=z | delta_k=1) Pr(delta_k=1) to sum_k Pr(delta_k=1 | Z<=z).
CovariateCdfEstimate recover_covariate_distribution(const Dataset& data,
                                                    const std::string& class_id,
                                                    const std::vector<double>& z);

// Weighted mixture of conditional level cells: p_hat_k = sum_j p_hat_k(Z_j) w_j.
// Weights are keyed by level_key(); missing levels raise WEIGHT_MISMATCH.
std::pair<std::vector<double>, double> combine_marginal_probs(
    const StratifiedEstimates& strat, const std::map<std::string, double>& level_weights);

// Record-share weights of each level in strat (constant covariate paths).
std::map<std::string, double> empirical_level_weights(const Dataset& data,
                                                      const std::string& class_id);

// Nadaraya-Watson smoothing of the detection indicators against the
// covariate value at each interval endpoint; survival/hazard derived from
// the smoothed probabilities as in the unsmoothed case.
EstimateSet kernel_conditional_probs(const Dataset& data, const std::string& class_id,
                                     const KernelConfig& cfg, const std::vector<double>& z);

double auto_bandwidth(const Dataset& data, const std::string& class_id, int smoothness_order,
                      std::size_t dim_index);

PHDecomposition ph_decomposition(const Dataset& data, const std::string& class_id);

// Bernoulli log-likelihood of the proportional-hazards model, evaluated at
// per-interval coefficients beta [K][d] and per-record baseline hazard
// increments delta aligned to each record's covariate sub-intervals.
// Evaluation only; no maximization.
double ph_loglik(const Dataset& data, const std::string& class_id,
                 const std::vector<std::vector<double>>& beta,
                 const std::vector<std::vector<double>>& delta_by_record);

// Same with increments derived from a piece-wise linear baseline hazard.
double ph_loglik(const Dataset& data, const std::string& class_id,
                 const std::vector<std::vector<double>>& beta,
                 const PiecewiseLinearHazard& baseline);

} // namespace cst
