#include "cst/popsize.hpp"

#include <cmath>

#include "cst/rng.hpp"
#include "cst/stats.hpp"

namespace cst {

SizeEstimate estimate_size_plain(const std::map<std::string, std::size_t>& n_by_class,
                                 const std::map<std::string, double>& p_by_class) {
    SizeEstimate out;
    out.method = SizeMethod::plain;
    for (const auto& [cid, n] : n_by_class) {
        auto it = p_by_class.find(cid);
        if (it == p_by_class.end())
            fail(errc::zero_detection_prob, "no detection probability for class '" + cid + "'");
        double p = it->second;
        if (!(p > 0.0))
            fail(errc::zero_detection_prob, "class '" + cid + "' has p_hat <= 0");
        if (p > 1.0)
            fail(errc::infeasible_params, "class '" + cid + "' has p_hat > 1");
        double nu = static_cast<double>(n) / p;
        out.nu_hat_by_class[cid] = nu;
        out.nu_hat_total += nu;
    }
    return out;
}

SizeEstimate estimate_size_moving_average(
    const std::map<std::string, std::vector<std::size_t>>& counts_by_class,
    const std::map<std::string, std::vector<double>>& p_by_class, std::size_t window,
    WindowNormalization normalization) {
    if (window < 1) fail(errc::window_too_wide, "window a must be >= 1");

    SizeEstimate out;
    out.method = SizeMethod::moving_average;
    out.window = window;
    out.window_normalization = normalization;

    for (const auto& [cid, counts] : counts_by_class) {
        auto it = p_by_class.find(cid);
        if (it == p_by_class.end() || it->second.size() != counts.size())
            fail(errc::dim_mismatch, "per-interval p_hat misaligned for class '" + cid + "'");
        const auto& p = it->second;
        const std::size_t K = counts.size();
        if (K <= 2 * window)
            fail(errc::window_too_wide, "class '" + cid + "': K=" + std::to_string(K) +
                                            " leaves no interior intervals for a=" +
                                            std::to_string(window));
        double nu = 0.0;
        for (std::size_t k = window; k + window < K; ++k) { // 0-based interior: a < k+1 <= K-a
            double s = 0.0;
            std::size_t terms = 0;
            for (std::size_t k2 = k - window; k2 <= k + window; ++k2) {
                s += p[k2];
                ++terms;
            }
            double pbar = s / (normalization == WindowNormalization::paper_literal
                                   ? static_cast<double>(2 * window)
                                   : static_cast<double>(terms));
            if (!(pbar > 0.0))
                fail(errc::zero_window_mass,
                     "class '" + cid + "': window around interval " + std::to_string(k + 1) +
                         " has zero probability mass");
            nu += static_cast<double>(counts[k]) / pbar;
        }
        out.nu_hat_by_class[cid] = nu;
        out.nu_hat_total += nu;
    }
    return out;
}

std::map<std::string, double> bootstrap_size_se(const Dataset& data, const BootstrapSpec& spec) {
    if (spec.replicates < 2) fail(errc::infeasible_params, "bootstrap needs B >= 2");

    std::map<std::string, std::vector<const DetectionRecord*>> by_class;
    for (const auto& rec : data.records) by_class[rec.class_id].push_back(&rec);

    std::map<std::string, double> se;
    for (const auto& [cid, recs] : by_class) {
        const std::size_t n = recs.size();
        const std::size_t K = data.partition_of(cid).interval_count();

        std::vector<double> nu_rep(spec.replicates);
        for (std::size_t b = 0; b < spec.replicates; ++b) {
            rng gen(spec.seed, b);
            if (spec.method == SizeMethod::plain) {
                auto it = spec.p_by_class.find(cid);
                if (it == spec.p_by_class.end() || !(it->second > 0.0))
                    fail(errc::zero_detection_prob,
                         "bootstrap needs a positive detection probability for class '" + cid + "'");
                std::size_t det = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    const auto* pick = recs[gen.next_u64() % n];
                    if (pick->detection_count() > 0) ++det;
                }
                nu_rep[b] = static_cast<double>(det) / it->second;
            } else {
                auto it = spec.p_intervals_by_class.find(cid);
                if (it == spec.p_intervals_by_class.end())
                    fail(errc::dim_mismatch,
                         "bootstrap needs per-interval probabilities for class '" + cid + "'");
                std::vector<std::size_t> counts(K, 0);
                for (std::size_t i = 0; i < n; ++i) {
                    const auto* pick = recs[gen.next_u64() % n];
                    for (std::size_t k = 0; k < K; ++k)
                        if (pick->deltas[k]) ++counts[k];
                }
                auto est = estimate_size_moving_average({{cid, counts}}, {{cid, it->second}},
                                                        spec.window, spec.window_normalization);
                nu_rep[b] = est.nu_hat_by_class.at(cid);
            }
        }
        se[cid] = sd_of(nu_rep);
    }
    return se;
}

} // namespace cst
