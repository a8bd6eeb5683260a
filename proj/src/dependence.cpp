#include "cst/dependence.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <set>

#include "cst/estimate.hpp"
#include "cst/stats.hpp"

namespace cst {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

TestResult finish_test(double literal, std::size_t n, std::size_t df, std::size_t used,
                       std::size_t excluded, TestScaling scaling) {
    TestResult res;
    res.scaling = scaling;
    res.statistic =
        scaling == TestScaling::sample_scaled ? static_cast<double>(n) * literal : literal;
    res.df = df;
    res.df_anomaly = df == 0;
    res.cells_used = used;
    res.cells_excluded = excluded;
    res.p_value = chi2_sf(res.statistic, static_cast<double>(df));
    return res;
}
} // namespace

JointEstimates joint_estimates(const Dataset& data, const std::string& class_id) {
    const auto idx = class_record_indices(data, class_id);
    const auto& part = data.partition_of(class_id);
    const std::size_t K = part.interval_count();
    if (K < 2) fail(errc::k_too_small, "joint estimates need K >= 2");
    const double n = static_cast<double>(idx.size());

    JointEstimates out;
    out.n_class = idx.size();
    out.pi_hat.assign(K - 1, kNaN);
    out.pi_defined.assign(K - 1, false);
    out.p_joint.assign(K - 1, 0.0);

    for (std::size_t k = 0; k + 1 < K; ++k) {
        std::size_t n_k = 0, n_joint = 0;
        for (auto i : idx) {
            const auto& d = data.records[i].deltas;
            if (d[k]) {
                ++n_k;
                if (d[k + 1]) ++n_joint;
            }
        }
        out.p_joint[k] = static_cast<double>(n_joint) / n;
        if (n_k > 0) {
            out.pi_hat[k] = static_cast<double>(n_joint) / static_cast<double>(n_k);
            out.pi_defined[k] = true;
        }
    }
    return out;
}

std::pair<double, double> consecutive_statistic_forms(const Dataset& data,
                                                      const std::string& class_id) {
    const auto idx = class_record_indices(data, class_id);
    const auto& part = data.partition_of(class_id);
    const std::size_t K = part.interval_count();
    if (K < 2) fail(errc::k_too_small, "the consecutive test needs K >= 2");
    const double n = static_cast<double>(idx.size());

    std::vector<std::size_t> N(K, 0);
    std::vector<std::size_t> N_joint(K > 1 ? K - 1 : 0, 0);
    for (auto i : idx) {
        const auto& d = data.records[i].deltas;
        for (std::size_t k = 0; k < K; ++k)
            if (d[k]) ++N[k];
        for (std::size_t k = 0; k + 1 < K; ++k)
            if (d[k] && d[k + 1]) ++N_joint[k];
    }

    double prob_form = 0.0, count_form = 0.0;
    for (std::size_t k = 0; k + 1 < K; ++k) {
        double Nk = static_cast<double>(N[k]);
        double Nk1 = static_cast<double>(N[k + 1]);
        if (Nk == 0.0 || Nk1 == 0.0) continue;
        double pk = Nk / n, pk1 = Nk1 / n, pj = static_cast<double>(N_joint[k]) / n;
        double num = pk * pk1 - pj;
        prob_form += num * num / (pk * pk1);
        double cnum = static_cast<double>(N_joint[k]) - Nk * Nk1 / n;
        count_form += cnum * cnum / (Nk * Nk1);
    }
    return {prob_form, count_form};
}

TestResult independence_test_consecutive(const Dataset& data, const std::string& class_id,
                                         TestScaling scaling) {
    const auto idx = class_record_indices(data, class_id);
    const auto& part = data.partition_of(class_id);
    const std::size_t K = part.interval_count();
    const auto [prob_form, count_form] = consecutive_statistic_forms(data, class_id);
    assert(std::abs(prob_form - count_form) <= 1e-12 * std::max(1.0, std::abs(prob_form)));

    std::size_t used = 0, excluded = 0;
    {
        EstimateSet est = estimate_interval_probs(data, class_id);
        for (std::size_t k = 0; k + 1 < K; ++k)
            (est.p_hat[k] > 0.0 && est.p_hat[k + 1] > 0.0) ? ++used : ++excluded;
    }
    if (used == 0) fail(errc::no_nondegenerate_cells, "every consecutive cell is degenerate");

    std::size_t df = (K >= 2) ? (K - 2) * (K - 2) : 0;
    return finish_test(prob_form, idx.size(), df, used, excluded, scaling);
}

MarkovEstimates markov_estimates(const Dataset& data, const std::string& class_id) {
    const auto idx = class_record_indices(data, class_id);
    const auto& part = data.partition_of(class_id);
    const std::size_t K = part.interval_count();
    const double n = static_cast<double>(idx.size());

    MarkovEstimates out;
    out.class_id = class_id;
    out.n_class = idx.size();

    std::map<std::string, std::vector<std::size_t>> det;
    for (auto i : idx) {
        const auto& rec = data.records[i];
        if (!rec.transition)
            fail(errc::no_transition_labels,
                 "record '" + rec.individual_id + "' carries no class transition");
        auto& cell = det[rec.transition->from_class];
        if (cell.empty()) cell.assign(K, 0);
        ++out.origin_counts[rec.transition->from_class];
        for (std::size_t k = 0; k < K; ++k)
            if (rec.deltas[k]) ++cell[k];
    }

    // origins known to the dataset as a whole but absent for this class
    for (const auto& rec : data.records)
        if (rec.transition && !det.count(rec.transition->from_class))
            if (std::find(out.empty_origins.begin(), out.empty_origins.end(),
                          rec.transition->from_class) == out.empty_origins.end())
                out.empty_origins.push_back(rec.transition->from_class);
    std::sort(out.empty_origins.begin(), out.empty_origins.end());

    for (const auto& [origin, counts] : det) {
        const double m = static_cast<double>(out.origin_counts[origin]);
        out.origins.push_back(origin);
        out.q_hat[origin] = m / n;

        std::vector<double> p_cond(K), p_joint(K);
        for (std::size_t k = 0; k < K; ++k) {
            p_cond[k] = static_cast<double>(counts[k]) / m;
            p_joint[k] = p_cond[k] * out.q_hat[origin];
        }
        out.p_cond[origin] = p_cond;
        out.p_joint_class[origin] = p_joint;

        EstimateSet level;
        level.p_hat = p_cond;
        level.p_hat_var.assign(K, 0.0);
        level.n_used.assign(K, out.origin_counts[origin]);
        attach_step_functions(level);
        out.S_cond[origin] = level.S_hat;
        out.Lambda_cond[origin] = level.Lambda_hat;
    }
    return out;
}

MarkovEstimates markov_estimates(const Dataset& data) {
    // Single-class convenience: the dataset determines the (only) class.
    std::set<std::string> classes;
    for (const auto& rec : data.records) classes.insert(rec.class_id);
    if (classes.size() != 1)
        fail(errc::usage_error, "markov_estimates on a multi-class dataset needs a class id");
    return markov_estimates(data, *classes.begin());
}

TestResult markov_independence_test(const Dataset& data, const std::string& class_id,
                                    TestScaling scaling) {
    const auto idx = class_record_indices(data, class_id);
    const auto& part = data.partition_of(class_id);
    const std::size_t K = part.interval_count();
    if (K < 2) fail(errc::k_too_small, "the transition test needs K >= 2");

    MarkovEstimates est = markov_estimates(data, class_id);
    const std::size_t L = est.origins.size();
    if (L < 2) fail(errc::k_too_small, "the transition test needs at least two origin classes");

    // Pooled per-interval estimate under H0.
    EstimateSet pooled = estimate_interval_probs(data, class_id);

    double literal = 0.0;
    std::size_t used = 0, excluded = 0;
    for (std::size_t k = 0; k < K; ++k) {
        for (const auto& origin : est.origins) {
            double expected = pooled.p_hat[k] * est.q_hat[origin];
            if (!(expected > 0.0)) {
                ++excluded;
                continue;
            }
            double diff = est.p_joint_class[origin][k] - expected;
            literal += diff * diff / expected;
            ++used;
        }
    }
    if (used == 0) fail(errc::no_nondegenerate_cells, "every transition cell is degenerate");

    std::size_t df = (K - 1) * (L - 1);
    return finish_test(literal, idx.size(), df, used, excluded, scaling);
}

} // namespace cst
