#include "cst/covariates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cst {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

const CovariatePath& path_of(const DetectionRecord& rec) {
    if (!rec.covariates)
        fail(errc::no_covariates, "record '" + rec.individual_id + "' has no covariate path");
    return *rec.covariates;
}

// Distinct level values among the class records, ordered by canonical key.
struct LevelIndex {
    std::vector<std::vector<double>> values;
    std::map<std::string, std::size_t> by_key;

    std::size_t add(const std::vector<double>& z) {
        auto [it, inserted] = by_key.emplace(level_key(z), values.size());
        if (inserted) values.push_back(z);
        return it->second;
    }
};

// Levels in force somewhere on (lo, hi]; equals the displayed containment
// indicator whenever the path refines the observation grid.
std::vector<std::size_t> levels_on_interval(const CovariatePath& path, LevelIndex& index,
                                            double lo, double hi) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < path.levels.size(); ++j) {
        if (!path.subinterval_overlaps(j, lo, hi)) continue;
        std::size_t id = index.add(path.levels[j]);
        if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
    }
    return out;
}

// NaN-aware per-level step functions: S = 1 - cumsum(p), Lambda = log
// transform; NaN propagates from the first undefined or exhausted cell.
void level_step_functions(const std::vector<double>& p, std::vector<double>& S,
                          std::vector<double>& Lambda) {
    const std::size_t K = p.size();
    S.assign(K + 1, kNaN);
    Lambda.assign(K, kNaN);
    S[0] = 1.0;
    double mass = 0.0;
    bool dead = false;
    for (std::size_t k = 0; k < K; ++k) {
        if (dead || std::isnan(p[k])) { dead = true; continue; }
        mass += p[k];
        if (mass > 1.0 + 1e-9) { dead = true; continue; }
        S[k + 1] = std::max(0.0, 1.0 - mass);
        Lambda[k] = (S[k + 1] > 0.0) ? -std::log(S[k + 1]) : kInf;
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Solves A x = b in place by Gaussian elimination with partial pivoting;
// returns false when A is singular to tolerance.
bool solve_linear(std::vector<std::vector<double>> A, std::vector<double> b,
                  std::vector<double>& x) {
    const std::size_t n = A.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        if (std::abs(A[piv][col]) < 1e-12) return false;
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = A[r][col] / A[col][col];
            for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    x.resize(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / A[i][i];
    return true;
}

} // namespace

std::size_t StratifiedEstimates::level_index(const std::vector<double>& z) const {
    const std::string key = level_key(z);
    for (std::size_t j = 0; j < levels.size(); ++j)
        if (level_key(levels[j]) == key) return j;
    fail(errc::empty_level, "no such covariate level in the stratified estimates");
}

double StratifiedEstimates::conditional_cell(std::size_t k, std::size_t j) const {
    if (counts[k][j] == 0) return kNaN;
    return static_cast<double>(detections[k][j]) / static_cast<double>(counts[k][j]);
}

StratifiedEstimates stratified_estimates(const Dataset& data, const std::string& class_id,
                                         Normalization normalization) {
    const auto idx = class_record_indices(data, class_id);
    const auto& part = data.partition_of(class_id);
    const std::size_t K = part.interval_count();
    const double n = static_cast<double>(idx.size());

    LevelIndex index;
    // Pass 1: register every level so cell matrices have fixed width.
    for (auto i : idx) {
        const auto& path = path_of(data.records[i]);
        for (const auto& z : path.levels) index.add(z);
    }
    const std::size_t J = index.values.size();

    StratifiedEstimates out;
    out.levels = index.values;
    out.normalization = normalization;
    out.n_class = idx.size();
    out.detections.assign(K, std::vector<std::size_t>(J, 0));
    out.counts.assign(K, std::vector<std::size_t>(J, 0));

    for (auto i : idx) {
        const auto& rec = data.records[i];
        const auto& path = *rec.covariates;
        for (std::size_t k = 0; k < K; ++k) {
            auto lv = levels_on_interval(path, index, part.endpoints[k], part.endpoints[k + 1]);
            for (auto j : lv) {
                ++out.counts[k][j];
                if (rec.deltas[k]) ++out.detections[k][j];
            }
        }
    }

    out.p_by_level.assign(K, std::vector<double>(J, 0.0));
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t j = 0; j < J; ++j) {
            if (out.counts[k][j] == 0) {
                out.empty_cells.emplace_back(k + 1, j);
                out.p_by_level[k][j] =
                    normalization == Normalization::paper_literal ? 0.0 : kNaN;
                continue;
            }
            double num = static_cast<double>(out.detections[k][j]);
            out.p_by_level[k][j] = normalization == Normalization::paper_literal
                                       ? num / n
                                       : num / static_cast<double>(out.counts[k][j]);
        }
    }

    out.S_by_level.resize(J);
    out.Lambda_by_level.resize(J);
    std::vector<double> pj(K);
    for (std::size_t j = 0; j < J; ++j) {
        for (std::size_t k = 0; k < K; ++k) pj[k] = out.p_by_level[k][j];
        level_step_functions(pj, out.S_by_level[j], out.Lambda_by_level[j]);
    }
    return out;
}

CovariateCdfEstimate recover_covariate_distribution(const Dataset& data,
                                                    const std::string& class_id,
                                                    const std::vector<double>& z) {
    const auto idx = class_record_indices(data, class_id);
    const auto& part = data.partition_of(class_id);
    const std::size_t K = part.interval_count();
    const double n = static_cast<double>(idx.size());

    auto below = [&](const std::vector<double>& v) {
        for (std::size_t m = 0; m < z.size(); ++m)
            if (v[m] > z[m]) return false;
        return true;
    };

    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        std::size_t n_below = 0, n_det_below = 0;
        for (auto i : idx) {
            const auto& rec = data.records[i];
            const auto& zi = path_of(rec).value_at(part.endpoints[k + 1]);
            if (static_cast<int>(zi.size()) != static_cast<int>(z.size()))
                fail(errc::dim_mismatch, "query point dimension mismatch");
            if (!below(zi)) continue;
            ++n_below;
            if (rec.deltas[k]) ++n_det_below;
        }
        num += static_cast<double>(n_det_below) / n;
        if (n_below > 0) den += static_cast<double>(n_det_below) / static_cast<double>(n_below);
    }

    CovariateCdfEstimate est;
    if (num == 0.0) return est; // no detected individual at or below z
    if (den == 0.0) fail(errc::zero_denominator, "empirical denominator of the covariate CDF is 0");
    est.raw = num / den;
    est.value = std::clamp(est.raw, 0.0, 1.0);
    est.clamped = est.value != est.raw;
    return est;
}

std::pair<std::vector<double>, double> combine_marginal_probs(
    const StratifiedEstimates& strat, const std::map<std::string, double>& level_weights) {
    const std::size_t K = strat.p_by_level.size();
    const std::size_t J = strat.levels.size();

    std::vector<double> w(J);
    double wsum = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
        auto it = level_weights.find(level_key(strat.levels[j]));
        if (it == level_weights.end())
            fail(errc::weight_mismatch, "no weight supplied for a stratified level");
        if (it->second < 0.0) fail(errc::weight_mismatch, "level weights must be nonnegative");
        w[j] = it->second;
        wsum += w[j];
    }
    if (wsum > 1.0 + 1e-9) fail(errc::weight_mismatch, "level weights sum past 1");

    std::vector<double> combined(K, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t j = 0; j < J; ++j) {
            if (w[j] == 0.0) continue;
            combined[k] += w[j] * strat.conditional_cell(k, j); // NaN from empty cells propagates
        }
        total += combined[k];
    }
    return {combined, total};
}

std::map<std::string, double> empirical_level_weights(const Dataset& data,
                                                      const std::string& class_id) {
    const auto idx = class_record_indices(data, class_id);
    std::map<std::string, double> w;
    for (auto i : idx) {
        auto lvl = path_of(data.records[i]).constant_level();
        if (!lvl)
            fail(errc::nonconstant_covariate,
                 "empirical level weights need a constant covariate per record");
        w[level_key(*lvl)] += 1.0;
    }
    for (auto& [k, v] : w) v /= static_cast<double>(idx.size());
    return w;
}

namespace {

double kernel_value(KernelFamily fam, double x) {
    switch (fam) {
        case KernelFamily::epanechnikov:
            return std::abs(x) <= 1.0 ? 0.75 * (1.0 - x * x) : 0.0;
        case KernelFamily::uniform:
            return std::abs(x) <= 1.0 ? 0.5 : 0.0;
        case KernelFamily::gaussian:
            return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
    }
    return 0.0;
}

} // namespace

double auto_bandwidth(const Dataset& data, const std::string& class_id, int smoothness_order,
                      std::size_t dim_index) {
    const auto idx = class_record_indices(data, class_id);
    const auto& part = data.partition_of(class_id);
    const std::size_t K = part.interval_count();
    const int d = data.covariate_dim;
    const double s = static_cast<double>(smoothness_order);

    double sum = 0.0, sumsq = 0.0;
    std::size_t m = 0;
    for (auto i : idx) {
        const auto& path = path_of(data.records[i]);
        for (std::size_t k = 0; k < K; ++k) {
            double v = path.value_at(part.endpoints[k + 1])[dim_index];
            sum += v;
            sumsq += v * v;
            ++m;
        }
    }
    double mean = sum / static_cast<double>(m);
    double var = std::max(0.0, sumsq / static_cast<double>(m) - mean * mean);
    double sigma = std::sqrt(var);
    double rate = std::pow(static_cast<double>(idx.size()), -s / (d + 4.0 * s));
    return sigma > 0.0 ? sigma * rate : rate;
}

EstimateSet kernel_conditional_probs(const Dataset& data, const std::string& class_id,
                                     const KernelConfig& cfg, const std::vector<double>& z) {
    const auto idx = class_record_indices(data, class_id);
    const auto& part = data.partition_of(class_id);
    const std::size_t K = part.interval_count();
    const std::size_t d = static_cast<std::size_t>(data.covariate_dim);
    if (z.size() != d) fail(errc::dim_mismatch, "query point dimension mismatch");
    if (cfg.bandwidth && !(*cfg.bandwidth > 0.0))
        fail(errc::usage_error, "explicit bandwidth must be positive");

    std::vector<double> h(d);
    for (std::size_t m = 0; m < d; ++m)
        h[m] = cfg.bandwidth ? *cfg.bandwidth
                             : auto_bandwidth(data, class_id, cfg.smoothness_order, m);

    EstimateSet est;
    est.p_hat.resize(K);
    est.p_hat_var.resize(K);
    est.n_used.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        double wsum = 0.0, wdet = 0.0, wsq = 0.0;
        std::size_t supported = 0;
        for (auto i : idx) {
            const auto& rec = data.records[i];
            const auto& zi = path_of(rec).value_at(part.endpoints[k + 1]);
            double w = 1.0;
            for (std::size_t m = 0; m < d; ++m)
                w *= kernel_value(cfg.kernel, (z[m] - zi[m]) / h[m]) / h[m];
            if (w <= 0.0) continue;
            ++supported;
            wsum += w;
            wsq += w * w;
            if (rec.deltas[k]) wdet += w;
        }
        if (wsum <= 0.0)
            fail(errc::empty_neighborhood,
                 "zero kernel mass at the query point on interval " + std::to_string(k + 1));
        double p = wdet / wsum;
        est.p_hat[k] = p;
        // Effective-sample-size plug-in; smoothing bias is not accounted for.
        double n_eff = wsum * wsum / wsq;
        est.p_hat_var[k] = p * (1.0 - p) / n_eff;
        est.n_used[k] = supported;
    }
    // Smoothed masses can cumulate past 1 on multi-detection data; the step
    // functions go NaN there instead of erroring (the level-curve convention).
    level_step_functions(est.p_hat, est.S_hat, est.Lambda_hat);
    est.Lambda_increments.resize(K);
    double prev = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        est.Lambda_increments[k] = est.Lambda_hat[k] - prev;
        if (std::isfinite(est.Lambda_hat[k])) prev = est.Lambda_hat[k];
        if (std::isinf(est.Lambda_hat[k]) && !est.first_infinite_k) est.first_infinite_k = k + 1;
    }
    return est;
}

PHDecomposition ph_decomposition(const Dataset& data, const std::string& class_id) {
    const auto idx = class_record_indices(data, class_id);
    const auto& part = data.partition_of(class_id);
    const std::size_t K = part.interval_count();
    const double n = static_cast<double>(idx.size());

    LevelIndex index;
    std::vector<std::size_t> level_of(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const auto& rec = data.records[idx[r]];
        auto lvl = path_of(rec).constant_level();
        if (!lvl)
            fail(errc::nonconstant_covariate,
                 "finite-level decomposition needs one covariate value per record ('" +
                     rec.individual_id + "' varies)");
        level_of[r] = index.add(*lvl);
    }
    const std::size_t J = index.values.size();

    PHDecomposition out;
    out.levels = index.values;
    out.n_class = idx.size();
    out.level_counts.assign(J, 0);

    std::vector<std::vector<std::size_t>> det(K, std::vector<std::size_t>(J, 0));
    std::vector<std::size_t> det_k(K, 0);
    std::size_t det_total = 0;
    for (std::size_t r = 0; r < idx.size(); ++r) {
        ++out.level_counts[level_of[r]];
        const auto& rec = data.records[idx[r]];
        for (std::size_t k = 0; k < K; ++k) {
            if (!rec.deltas[k]) continue;
            ++det[k][level_of[r]];
            ++det_k[k];
            ++det_total;
        }
    }
    for (std::size_t j = 0; j < J; ++j)
        if (out.level_counts[j] == 0) fail(errc::empty_level, "covariate level with no members");

    out.mu_hat.resize(K);
    out.mu_log_of_zero.assign(K, false);
    for (std::size_t k = 0; k < K; ++k) {
        double p = static_cast<double>(det_k[k]) / n;
        out.mu_hat[k] = p > 0.0 ? std::log(p) : -kInf;
        out.mu_log_of_zero[k] = p <= 0.0;
    }

    out.omega_hat.resize(J);
    out.omega_log_of_zero.assign(J, false);
    for (std::size_t j = 0; j < J; ++j) {
        std::size_t det_j = 0;
        for (std::size_t k = 0; k < K; ++k) det_j += det[k][j];
        if (det_j == 0 || det_total == 0) {
            out.omega_hat[j] = -kInf;
            out.omega_log_of_zero[j] = true;
            continue;
        }
        out.omega_hat[j] = std::log(n * static_cast<double>(det_j) /
                                    (static_cast<double>(det_total) *
                                     static_cast<double>(out.level_counts[j])));
    }

    out.p_by_level.assign(K, std::vector<double>(J, 0.0));
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < J; ++j)
            out.p_by_level[k][j] =
                static_cast<double>(det[k][j]) / static_cast<double>(out.level_counts[j]);

    out.S_by_level.resize(J);
    out.Lambda_by_level.resize(J);
    std::vector<double> pj(K);
    for (std::size_t j = 0; j < J; ++j) {
        for (std::size_t k = 0; k < K; ++k) pj[k] = out.p_by_level[k][j];
        level_step_functions(pj, out.S_by_level[j], out.Lambda_by_level[j]);
    }

    // Convenience coefficients: solve omega_j = beta'Z_j + c when the design
    // [Z_j | 1] has full rank and every omega is finite.
    const std::size_t d = out.levels.empty() ? 0 : out.levels.front().size();
    bool omegas_finite = true;
    for (double w : out.omega_hat)
        if (!std::isfinite(w)) omegas_finite = false;
    if (omegas_finite && J >= d + 1 && d >= 1) {
        std::vector<std::vector<double>> ata(d + 1, std::vector<double>(d + 1, 0.0));
        std::vector<double> atb(d + 1, 0.0);
        for (std::size_t j = 0; j < J; ++j) {
            std::vector<double> row = out.levels[j];
            row.push_back(1.0);
            for (std::size_t a = 0; a <= d; ++a) {
                for (std::size_t b = 0; b <= d; ++b) ata[a][b] += row[a] * row[b];
                atb[a] += row[a] * out.omega_hat[j];
            }
        }
        std::vector<double> sol;
        if (solve_linear(ata, atb, sol)) {
            sol.pop_back(); // drop the intercept
            out.beta_hat = std::move(sol);
        }
    }
    return out;
}

namespace {

double ph_loglik_impl(const Dataset& data, const std::string& class_id,
                      const std::vector<std::vector<double>>& beta,
                      const std::vector<const std::vector<double>*>& delta_ptr,
                      const std::vector<std::size_t>& idx) {
    const auto& part = data.partition_of(class_id);
    const std::size_t K = part.interval_count();
    const std::size_t d = static_cast<std::size_t>(data.covariate_dim);
    if (beta.size() != K) fail(errc::dim_mismatch, "need one coefficient vector per interval");
    for (const auto& b : beta)
        if (b.size() != d) fail(errc::dim_mismatch, "coefficient dimension mismatch");

    double ll = 0.0;
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const auto& rec = data.records[idx[r]];
        const auto& path = path_of(rec);
        const auto& delta = *delta_ptr[r];
        if (delta.size() != path.levels.size())
            fail(errc::dim_mismatch, "record '" + rec.individual_id +
                                         "' needs one hazard increment per sub-interval");
        for (double dj : delta)
            if (!(dj > 0.0))
                fail(errc::nonpositive_delta,
                     "hazard increments must be positive ('" + rec.individual_id + "')");

        std::vector<double> cum_before(path.levels.size());
        double cum = 0.0;
        for (std::size_t j = 0; j < path.levels.size(); ++j) {
            cum_before[j] = cum;
            cum += delta[j];
        }

        for (std::size_t k = 0; k < K; ++k) {
            double logp = 0.0;
            bool covered = false;
            for (std::size_t j = 0; j < path.levels.size(); ++j) {
                if (!path.subinterval_within(j, part.endpoints[k], part.endpoints[k + 1])) continue;
                covered = true;
                double risk = std::exp(dot(beta[k], path.levels[j]));
                logp += risk * (-cum_before[j] + std::log1p(-std::exp(-risk * delta[j])));
            }
            if (!covered)
                fail(errc::invalid_covariate_path,
                     "record '" + rec.individual_id + "': no covariate sub-interval inside interval " +
                         std::to_string(k + 1));
            double p = std::exp(logp);
            ll += rec.deltas[k] ? logp : std::log1p(-p);
        }
    }
    return ll;
}

} // namespace

double ph_loglik(const Dataset& data, const std::string& class_id,
                 const std::vector<std::vector<double>>& beta,
                 const std::vector<std::vector<double>>& delta_by_record) {
    const auto idx = class_record_indices(data, class_id);
    if (delta_by_record.size() != idx.size())
        fail(errc::dim_mismatch, "need one increment vector per class record");
    std::vector<const std::vector<double>*> ptr(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) ptr[r] = &delta_by_record[r];
    return ph_loglik_impl(data, class_id, beta, ptr, idx);
}

double ph_loglik(const Dataset& data, const std::string& class_id,
                 const std::vector<std::vector<double>>& beta,
                 const PiecewiseLinearHazard& baseline) {
    baseline.validate();
    const auto idx = class_record_indices(data, class_id);
    std::vector<std::vector<double>> delta(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const auto& path = path_of(data.records[idx[r]]);
        delta[r].resize(path.levels.size());
        for (std::size_t j = 0; j < path.levels.size(); ++j)
            delta[r][j] = baseline.increment(path.breakpoints[j], path.breakpoints[j + 1]);
    }
    return ph_loglik(data, class_id, beta, delta);
}

} // namespace cst
