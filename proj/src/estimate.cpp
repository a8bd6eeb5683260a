#include "cst/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cst/stats.hpp"

namespace cst {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMassTol = 1e-9;
} // namespace

EstimateSet estimate_interval_probs(const Dataset& data, const std::string& class_id) {
    const auto idx = class_record_indices(data, class_id);
    const auto& part = data.partition_of(class_id);
    const std::size_t K = part.interval_count();
    const double n = static_cast<double>(idx.size());

    // Integer counts first so results are invariant to record order.
    std::vector<std::size_t> counts(K, 0);
    for (auto i : idx)
        for (std::size_t k = 0; k < K; ++k)
            if (data.records[i].deltas[k]) ++counts[k];

    EstimateSet est;
    est.p_hat.resize(K);
    est.p_hat_var.resize(K);
    est.n_used.assign(K, idx.size());
    for (std::size_t k = 0; k < K; ++k) {
        double p = static_cast<double>(counts[k]) / n;
        est.p_hat[k] = p;
        est.p_hat_var[k] = p * (1.0 - p) / n;
    }
    return est;
}

double estimate_never_observed(const Dataset& data, const std::string& class_id) {
    if (!data.includes_undetected)
        fail(errc::requires_roster,
             "never-observed probability needs roster data (includes_undetected=true)");
    const auto idx = class_record_indices(data, class_id);
    std::size_t total = 0;
    for (auto i : idx) {
        std::size_t c = data.records[i].detection_count();
        if (c > 1)
            fail(errc::multiple_detections, "record '" + data.records[i].individual_id +
                                                "' detected " + std::to_string(c) +
                                                " times; the multinomial formula does not apply");
        total += c;
    }
    return 1.0 - static_cast<double>(total) / static_cast<double>(idx.size());
}

std::vector<double> survival_curve(const EstimateSet& est) {
    const std::size_t K = est.p_hat.size();
    std::vector<double> S(K + 1);
    S[0] = 1.0;
    double mass = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        mass += est.p_hat[k];
        if (mass > 1.0 + kMassTol)
            fail(errc::prob_mass_exceeds_one,
                 "cumulative p_hat mass " + std::to_string(mass) + " exceeds 1");
        S[k + 1] = std::max(0.0, 1.0 - mass);
    }
    return S;
}

HazardEstimate cumulative_hazard(const EstimateSet& est) {
    const std::size_t K = est.p_hat.size();
    const std::vector<double> S = survival_curve(est);

    HazardEstimate hz;
    hz.increments.resize(K);
    hz.cumulative.resize(K);
    double cum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        if (S[k] <= 0.0) {
            // Mass already exhausted: flat from here, but the hazard stays infinite.
            hz.increments[k] = (est.p_hat[k] > 0.0) ? kInf : 0.0;
            hz.cumulative[k] = kInf;
            continue;
        }
        if (S[k + 1] <= 0.0) {
            hz.increments[k] = kInf;
            hz.cumulative[k] = kInf;
            if (!hz.first_infinite_k) hz.first_infinite_k = k + 1;
            continue;
        }
        hz.increments[k] = std::log(S[k] / S[k + 1]);
        cum += hz.increments[k];
        hz.cumulative[k] = cum;
    }
    return hz;
}

VarianceReport asymptotic_variances(const EstimateSet& est) {
    const std::size_t K = est.p_hat.size();
    const std::vector<double> S = survival_curve(est);
    const double n = static_cast<double>(est.n_used.empty() ? 1 : est.n_used.front());

    VarianceReport rep;
    rep.S_var.resize(K);
    rep.Lambda_var.resize(K);
    rep.survivor_probs.assign(S.begin() + 1, S.end());

    double s_sum = 0.0;       // sum_{k'<=k} p(1-p)
    double s_sum_before = 0.0; // sum_{k'<k} p(1-p)
    for (std::size_t k = 0; k < K; ++k) {
        const double p = est.p_hat[k];
        s_sum_before = s_sum;
        s_sum += p * (1.0 - p);
        rep.S_var[k] = s_sum / n;

        if (S[k + 1] <= 0.0) {
            rep.Lambda_var[k] = kInf;
            if (!rep.zero_survivor_from) rep.zero_survivor_from = k + 1;
            continue;
        }
        const double ratio = p / (S[k] * S[k + 1]);
        rep.Lambda_var[k] =
            (s_sum_before * ratio * ratio + p * (1.0 - p) / (S[k + 1] * S[k + 1])) / n;
    }
    return rep;
}

std::vector<std::pair<double, double>> confidence_intervals(const EstimateSet& est, double level) {
    const double z = normal_quantile(0.5 + level / 2.0);
    std::vector<std::pair<double, double>> ci;
    ci.reserve(est.p_hat.size());
    for (std::size_t k = 0; k < est.p_hat.size(); ++k) {
        double half = z * std::sqrt(est.p_hat_var[k]);
        ci.emplace_back(std::max(0.0, est.p_hat[k] - half), std::min(1.0, est.p_hat[k] + half));
    }
    return ci;
}

void attach_step_functions(EstimateSet& est) {
    est.S_hat = survival_curve(est);
    HazardEstimate hz = cumulative_hazard(est);
    est.Lambda_increments = std::move(hz.increments);
    est.Lambda_hat = std::move(hz.cumulative);
    est.first_infinite_k = hz.first_infinite_k;
}

EstimateSet estimate_class(const Dataset& data, const std::string& class_id) {
    EstimateSet est = estimate_interval_probs(data, class_id);
    attach_step_functions(est);
    return est;
}

} // namespace cst
