#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cst/types.hpp"

namespace cst {

enum class SizeMethod { plain, moving_average };

// Divisor of the moving-average window: the displayed formula divides the
// 2a+1 window terms by 2a; window_mean divides by the actual term count.
enum class WindowNormalization { window_mean, paper_literal };

struct SizeEstimate {
    std::map<std::string, double> nu_hat_by_class;
    double nu_hat_total = 0.0;
    SizeMethod method = SizeMethod::plain;
    std::size_t window = 0;
    WindowNormalization window_normalization = WindowNormalization::window_mean;
    std::map<std::string, double> se_boot;
};

// nu_hat_l = n_l / p_hat_l per class. The detection probability is supplied
// by the caller (roster-based, combined, or external); this module never
// derives it.
SizeEstimate estimate_size_plain(const std::map<std::string, std::size_t>& n_by_class,
                                 const std::map<std::string, double>& p_by_class);

// Moving-average variant for drifting per-interval probabilities: smooths
// p_hat over k-a..k+a and sums n_{l,k}/pbar_{l,k} over the interior
// intervals a < k <= K-a. Note the sum has K-2a terms, each of which tracks
// the class size; callers averaging to a single size divide by the term count.
SizeEstimate estimate_size_moving_average(
    const std::map<std::string, std::vector<std::size_t>>& counts_by_class,
    const std::map<std::string, std::vector<double>>& p_by_class, std::size_t window,
    WindowNormalization normalization = WindowNormalization::window_mean);

// Bootstrap configuration. Detection probabilities are held fixed across
// resamples (they are caller-supplied inputs, not resampled statistics);
// the moving-average method recomputes per-interval counts per resample.
struct BootstrapSpec {
    SizeMethod method = SizeMethod::plain;
    std::map<std::string, double> p_by_class;                     // plain
    std::map<std::string, std::vector<double>> p_intervals_by_class; // moving_average
    std::size_t window = 1;
    WindowNormalization window_normalization = WindowNormalization::window_mean;
    std::size_t replicates = 200;
    std::uint64_t seed = 0;
};

// Nonparametric bootstrap over records: per-class SE of nu_hat across
// resamples. Deterministic given the seed; replicate streams are derived
// per index so results do not depend on evaluation order.
std::map<std::string, double> bootstrap_size_se(const Dataset& data, const BootstrapSpec& spec);

} // namespace cst
