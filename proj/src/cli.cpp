#include "cst/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cst/covariates.hpp"
#include "cst/dependence.hpp"
#include "cst/estimate.hpp"
#include "cst/io.hpp"
#include "cst/popsize.hpp"
#include "cst/simulate.hpp"

namespace cst {

namespace {

using nlohmann::json;

// Human tables round to 6 decimals; the JSON output keeps full precision.
std::string fmt6(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void put_row(std::ostream& os, const std::vector<std::string>& cells,
             const std::vector<int>& widths) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        os << cells[i];
        if (i + 1 < cells.size()) {
            int pad = widths[i] - static_cast<int>(cells[i].size());
            for (int p = 0; p < std::max(1, pad + 2); ++p) os << ' ';
        }
    }
    os << '\n';
}

void print_table(std::ostream& os, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
    std::vector<int> widths(header.size(), 0);
    for (std::size_t i = 0; i < header.size(); ++i)
        widths[i] = static_cast<int>(header[i].size());
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.size(); ++i)
            widths[i] = std::max(widths[i], static_cast<int>(r[i].size()));
    put_row(os, header, widths);
    for (const auto& r : rows) put_row(os, r, widths);
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            fail(errc::usage_error, "bad number '" + tok + "' in list");
        }
    }
    if (out.empty()) fail(errc::usage_error, "empty number list");
    return out;
}

std::vector<std::vector<double>> parse_double_matrix(const std::string& s) {
    std::vector<std::vector<double>> out;
    std::stringstream ss(s);
    std::string row;
    while (std::getline(ss, row, ';')) out.push_back(parse_double_list(row));
    return out;
}

std::map<std::string, double> parse_class_map(const std::string& s) {
    std::map<std::string, double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) fail(errc::usage_error, "expected CLASS=VALUE in '" + tok + "'");
        try {
            out[tok.substr(0, eq)] = std::stod(tok.substr(eq + 1));
        } catch (const std::exception&) {
            fail(errc::usage_error, "bad number in '" + tok + "'");
        }
    }
    return out;
}

struct IoOptions {
    std::string data_path;
    std::string partitions_path;
    std::string format = "csv";
    std::string out_path;
    std::string json_path;
};

void add_io_options(CLI::App* cmd, IoOptions& io, bool wants_input = true) {
    if (wants_input) {
        cmd->add_option("--data", io.data_path, "input data file")->required();
        cmd->add_option("--partitions", io.partitions_path, "sidecar partition CSV (csv format)");
        cmd->add_option("--format", io.format, "csv | jsonl | wide")->default_val("csv");
    }
    cmd->add_option("--out", io.out_path, "write the human table here instead of stdout");
    cmd->add_option("--json", io.json_path, "write machine-readable output (full precision) here");
}

Dataset load_input(const IoOptions& io) {
    if (io.format == "jsonl") return load_dataset_jsonl(io.data_path);
    if (io.partitions_path.empty())
        fail(errc::usage_error, "--partitions is required for csv/wide input");
    if (io.format == "wide") return load_dataset_wide_csv(io.data_path, io.partitions_path);
    if (io.format == "csv") return load_dataset_csv(io.data_path, io.partitions_path);
    fail(errc::usage_error, "unknown format '" + io.format + "'");
}

void emit(const IoOptions& io, std::ostream& fallback, const std::string& table, const json& j) {
    if (!io.out_path.empty()) {
        std::ofstream f(io.out_path, std::ios::binary);
        if (!f) fail(errc::parse_error, "cannot open '" + io.out_path + "'");
        f << table;
    } else {
        fallback << table;
    }
    if (!io.json_path.empty()) {
        std::ofstream f(io.json_path, std::ios::binary);
        if (!f) fail(errc::parse_error, "cannot open '" + io.json_path + "'");
        f << j.dump(2) << '\n';
    }
}

std::vector<std::string> class_list(const Dataset& data, const std::string& chosen) {
    if (!chosen.empty()) {
        data.partition_of(chosen);
        return {chosen};
    }
    std::vector<std::string> out;
    for (const auto& [cid, part] : data.partitions) out.push_back(cid);
    return out;
}

std::string interval_label(const IntervalPartition& part, std::size_t k) {
    return "(" + format_double(part.endpoints[k - 1]) + "," + format_double(part.endpoints[k]) + "]";
}

// ---- estimate ------------------------------------------------------------

int cmd_estimate(const IoOptions& io, const std::string& class_id, double conf,
                 std::ostream& out) {
    Dataset data = load_input(io);
    std::ostringstream table;
    json jout;

    for (const auto& cid : class_list(data, class_id)) {
        const auto& part = data.partition_of(cid);
        EstimateSet est = estimate_class(data, cid);
        VarianceReport var = asymptotic_variances(est);
        auto ci = confidence_intervals(est, conf);

        table << "class " << cid << "  n=" << est.n_used.front()
              << "  K=" << part.interval_count() << '\n';
        std::vector<std::vector<std::string>> rows;
        for (std::size_t k = 0; k < est.p_hat.size(); ++k) {
            rows.push_back({std::to_string(k + 1), interval_label(part, k + 1),
                            fmt6(est.p_hat[k]), fmt6(std::sqrt(est.p_hat_var[k])),
                            fmt6(ci[k].first), fmt6(ci[k].second), fmt6(est.S_hat[k + 1]),
                            fmt6(est.Lambda_hat[k]), fmt6(est.Lambda_increments[k]),
                            fmt6(var.S_var[k]), fmt6(var.Lambda_var[k])});
        }
        print_table(table, {"k", "interval", "p_hat", "se", "ci_lo", "ci_hi", "S_hat",
                            "Lambda_hat", "Delta_hat", "S_var", "Lambda_var"}, rows);

        json jc;
        jc["n"] = est.n_used.front();
        jc["p_hat"] = est.p_hat;
        jc["p_hat_var"] = est.p_hat_var;
        jc["se"] = json::array();
        for (double v : est.p_hat_var) jc["se"].push_back(std::sqrt(v));
        jc["ci_level"] = conf;
        jc["ci_lo"] = json::array();
        jc["ci_hi"] = json::array();
        for (auto& [lo, hi] : ci) {
            jc["ci_lo"].push_back(lo);
            jc["ci_hi"].push_back(hi);
        }
        jc["S_hat"] = est.S_hat;
        jc["Lambda_hat"] = est.Lambda_hat;
        jc["Delta_hat"] = est.Lambda_increments;
        jc["S_var"] = var.S_var;
        jc["Lambda_var"] = var.Lambda_var;

        if (data.includes_undetected) {
            try {
                double never = estimate_never_observed(data, cid);
                table << "never-observed probability: " << fmt6(never) << '\n';
                jc["p_never"] = never;
            } catch (const error&) {
                // only defined in the multinomial regime; skip quietly
            }
        }
        table << '\n';
        jout[cid] = std::move(jc);
    }
    emit(io, out, table.str(), jout);
    return 0;
}

// ---- estimate-cov ---------------------------------------------------------

int cmd_estimate_cov(const IoOptions& io, const std::string& class_id,
                     const std::string& normalization, std::ostream& out) {
    Dataset data = load_input(io);
    Normalization norm = normalization == "conditional" ? Normalization::conditional
                                                        : Normalization::paper_literal;
    if (normalization != "conditional" && normalization != "paper_literal")
        fail(errc::usage_error, "--normalization must be paper_literal or conditional");

    std::ostringstream table;
    json jout;
    for (const auto& cid : class_list(data, class_id)) {
        StratifiedEstimates strat = stratified_estimates(data, cid, norm);
        table << "class " << cid << "  levels=" << strat.levels.size()
              << "  normalization=" << normalization << '\n';

        std::vector<std::vector<std::string>> rows;
        for (std::size_t j = 0; j < strat.levels.size(); ++j) {
            std::string zlab;
            for (double v : strat.levels[j]) zlab += (zlab.empty() ? "" : ",") + format_double(v);
            for (std::size_t k = 0; k < strat.p_by_level.size(); ++k)
                rows.push_back({zlab, std::to_string(k + 1),
                                std::to_string(strat.counts[k][j]),
                                std::to_string(strat.detections[k][j]),
                                fmt6(strat.p_by_level[k][j]), fmt6(strat.S_by_level[j][k + 1]),
                                fmt6(strat.Lambda_by_level[j][k])});
        }
        print_table(table, {"z", "k", "members", "detections", "p_hat", "S_hat", "Lambda_hat"},
                    rows);

        json jc;
        jc["normalization"] = normalization;
        jc["levels"] = strat.levels;
        jc["counts"] = strat.counts;
        jc["detections"] = strat.detections;
        jc["p_by_level"] = strat.p_by_level;
        jc["S_by_level"] = strat.S_by_level;
        jc["Lambda_by_level"] = strat.Lambda_by_level;

        try {
            auto weights = empirical_level_weights(data, cid);
            StratifiedEstimates cond =
                norm == Normalization::conditional ? strat
                                                   : stratified_estimates(data, cid,
                                                                          Normalization::conditional);
            auto [combined, total] = combine_marginal_probs(cond, weights);
            table << "combined (empirical weights): p_hat =";
            for (double v : combined) table << ' ' << fmt6(v);
            table << "  total=" << fmt6(total) << '\n';
            jc["combined_p_hat"] = combined;
            jc["combined_total"] = total;
        } catch (const error&) {
            // time-varying paths: no record-level weights, skip the mixture
        }
        table << '\n';
        jout[cid] = std::move(jc);
    }
    emit(io, out, table.str(), jout);
    return 0;
}

// ---- kernel ----------------------------------------------------------------

int cmd_kernel(const IoOptions& io, const std::string& class_id,
               const std::vector<std::string>& z_args, const std::string& kernel_name,
               const std::string& bandwidth_arg, int smoothness, std::ostream& out) {
    Dataset data = load_input(io);
    if (class_id.empty()) fail(errc::usage_error, "--class is required");

    KernelConfig cfg;
    if (kernel_name == "epanechnikov")
        cfg.kernel = KernelFamily::epanechnikov;
    else if (kernel_name == "gaussian")
        cfg.kernel = KernelFamily::gaussian;
    else if (kernel_name == "uniform")
        cfg.kernel = KernelFamily::uniform;
    else
        fail(errc::usage_error, "--kernel must be epanechnikov|gaussian|uniform");
    cfg.smoothness_order = smoothness;
    if (bandwidth_arg != "auto") {
        try {
            cfg.bandwidth = std::stod(bandwidth_arg);
        } catch (const std::exception&) {
            fail(errc::usage_error, "--bandwidth must be a number or 'auto'");
        }
    }

    std::ostringstream table;
    json jout;
    jout["kernel"] = kernel_name;
    jout["smoothness"] = smoothness;
    if (cfg.bandwidth) jout["bandwidth"] = *cfg.bandwidth;
    jout["queries"] = json::array();

    for (const auto& zs : z_args) {
        std::vector<double> z = parse_double_list(zs);
        EstimateSet est = kernel_conditional_probs(data, class_id, cfg, z);
        table << "z=" << zs << '\n';
        std::vector<std::vector<std::string>> rows;
        for (std::size_t k = 0; k < est.p_hat.size(); ++k)
            rows.push_back({std::to_string(k + 1), fmt6(est.p_hat[k]),
                            fmt6(std::sqrt(est.p_hat_var[k])), fmt6(est.S_hat[k + 1]),
                            fmt6(est.Lambda_hat[k])});
        print_table(table, {"k", "p_hat", "se", "S_hat", "Lambda_hat"}, rows);
        table << '\n';

        json jq;
        jq["z"] = z;
        jq["p_hat"] = est.p_hat;
        jq["p_hat_var"] = est.p_hat_var;
        jq["se"] = json::array();
        for (double v : est.p_hat_var) jq["se"].push_back(std::sqrt(v));
        jq["S_hat"] = est.S_hat;
        jq["Lambda_hat"] = est.Lambda_hat;
        jout["queries"].push_back(std::move(jq));
    }
    emit(io, out, table.str(), jout);
    return 0;
}

// ---- ph ---------------------------------------------------------------------

int cmd_ph(const IoOptions& io, const std::string& class_id, const std::string& beta_arg,
           const std::string& delta_arg, std::ostream& out) {
    Dataset data = load_input(io);
    if (class_id.empty()) fail(errc::usage_error, "--class is required");

    std::ostringstream table;
    json jout;

    PHDecomposition ph = ph_decomposition(data, class_id);
    table << "class " << class_id << "  levels=" << ph.levels.size() << '\n';
    std::vector<std::vector<std::string>> rows;
    for (std::size_t j = 0; j < ph.levels.size(); ++j) {
        std::string zlab;
        for (double v : ph.levels[j]) zlab += (zlab.empty() ? "" : ",") + format_double(v);
        rows.push_back({zlab, std::to_string(ph.level_counts[j]), fmt6(ph.omega_hat[j])});
    }
    print_table(table, {"z", "members", "omega_hat"}, rows);
    table << "mu_hat:";
    for (double m : ph.mu_hat) table << ' ' << fmt6(m);
    table << '\n';
    if (ph.beta_hat) {
        table << "beta_hat (derived):";
        for (double b : *ph.beta_hat) table << ' ' << fmt6(b);
        table << '\n';
    }

    jout["levels"] = ph.levels;
    jout["level_counts"] = ph.level_counts;
    jout["omega_hat"] = ph.omega_hat;
    jout["mu_hat"] = ph.mu_hat;
    jout["p_by_level"] = ph.p_by_level;
    jout["S_by_level"] = ph.S_by_level;
    jout["Lambda_by_level"] = ph.Lambda_by_level;
    if (ph.beta_hat) jout["beta_hat"] = *ph.beta_hat;

    if (!delta_arg.empty()) {
        if (beta_arg.empty()) fail(errc::usage_error, "--loglik-delta needs --loglik-beta");
        auto beta = parse_double_matrix(beta_arg);
        auto delta_shared = parse_double_list(delta_arg);
        const auto idx = class_record_indices(data, class_id);
        std::vector<std::vector<double>> delta(idx.size(), delta_shared);
        double ll = ph_loglik(data, class_id, beta, delta);
        table << "log-likelihood: " << fmt6(ll) << '\n';
        jout["loglik"] = ll;
    }
    table << '\n';
    emit(io, out, table.str(), jout);
    return 0;
}

// ---- size --------------------------------------------------------------------

int cmd_size(const IoOptions& io, const std::string& p_arg, bool from_roster,
             std::size_t window, const std::string& window_norm, std::size_t bootstrap_B,
             std::optional<std::uint64_t> seed, std::ostream& out) {
    Dataset data = load_input(io);
    std::ostringstream table;
    json jout;

    std::map<std::string, std::size_t> detected;
    std::map<std::string, std::size_t> n_rows;
    std::map<std::string, std::vector<std::size_t>> counts;
    for (const auto& [cid, part] : data.partitions) counts[cid].assign(part.interval_count(), 0);
    for (const auto& rec : data.records) {
        ++n_rows[rec.class_id];
        if (rec.detection_count() > 0) ++detected[rec.class_id];
        for (std::size_t k = 0; k < rec.deltas.size(); ++k)
            if (rec.deltas[k]) ++counts[rec.class_id][k];
    }

    std::map<std::string, double> p_by_class;
    if (from_roster) {
        for (const auto& [cid, part] : data.partitions)
            p_by_class[cid] = 1.0 - estimate_never_observed(data, cid);
    } else if (!p_arg.empty()) {
        p_by_class = parse_class_map(p_arg);
    } else {
        fail(errc::usage_error, "supply --p CLASS=VALUE,... or --from-roster");
    }

    SizeEstimate est;
    if (window > 0) {
        WindowNormalization wn = window_norm == "paper_literal"
                                     ? WindowNormalization::paper_literal
                                     : WindowNormalization::window_mean;
        std::map<std::string, std::vector<double>> p_int;
        for (const auto& [cid, cnt] : counts) {
            auto& v = p_int[cid];
            double n = static_cast<double>(n_rows[cid]);
            for (auto c : cnt) v.push_back(static_cast<double>(c) / n);
        }
        est = estimate_size_moving_average(counts, p_int, window, wn);
    } else {
        std::map<std::string, std::size_t> n_detected;
        for (const auto& [cid, part] : data.partitions) n_detected[cid] = detected[cid];
        est = estimate_size_plain(n_detected, p_by_class);
    }

    if (bootstrap_B > 0) {
        if (!seed) fail(errc::usage_error, "--bootstrap needs --seed");
        BootstrapSpec spec;
        spec.method = window > 0 ? SizeMethod::moving_average : SizeMethod::plain;
        spec.p_by_class = p_by_class;
        if (window > 0) {
            spec.window = window;
            spec.window_normalization = est.window_normalization;
            for (const auto& [cid, cnt] : counts) {
                auto& v = spec.p_intervals_by_class[cid];
                double n = static_cast<double>(n_rows[cid]);
                for (auto c : cnt) v.push_back(static_cast<double>(c) / n);
            }
        }
        spec.replicates = bootstrap_B;
        spec.seed = *seed;
        est.se_boot = bootstrap_size_se(data, spec);
    }

    std::vector<std::vector<std::string>> rows;
    for (const auto& [cid, nu] : est.nu_hat_by_class) {
        std::string se = est.se_boot.count(cid) ? fmt6(est.se_boot.at(cid)) : "-";
        rows.push_back({cid, std::to_string(n_rows[cid]), std::to_string(detected[cid]),
                        fmt6(nu), se});
        json jc;
        jc["n_rows"] = n_rows[cid];
        jc["n_detected"] = detected[cid];
        jc["nu_hat"] = nu;
        if (est.se_boot.count(cid)) jc["se_boot"] = est.se_boot.at(cid);
        jout["classes"][cid] = std::move(jc);
    }
    print_table(table, {"class", "rows", "detected", "nu_hat", "se_boot"}, rows);
    table << "total: " << fmt6(est.nu_hat_total) << '\n';
    jout["nu_hat_total"] = est.nu_hat_total;
    jout["method"] = window > 0 ? "moving_average" : "plain";
    if (window > 0) jout["window"] = window;

    emit(io, out, table.str(), jout);
    return 0;
}

// ---- tests --------------------------------------------------------------------

json test_to_json(const TestResult& res) {
    json j;
    j["statistic"] = res.statistic;
    j["scaling"] = res.scaling == TestScaling::sample_scaled ? "sample_scaled" : "paper_literal";
    j["df"] = res.df;
    j["p_value"] = res.p_value;
    j["cells_used"] = res.cells_used;
    j["cells_excluded"] = res.cells_excluded;
    j["df_anomaly"] = res.df_anomaly;
    return j;
}

int cmd_test(const IoOptions& io, const std::string& class_id, const std::string& scaling_arg,
             bool markov, std::ostream& out) {
    Dataset data = load_input(io);
    if (class_id.empty()) fail(errc::usage_error, "--class is required");
    TestScaling scaling;
    if (scaling_arg == "sample_scaled")
        scaling = TestScaling::sample_scaled;
    else if (scaling_arg == "paper_literal")
        scaling = TestScaling::paper_literal;
    else
        fail(errc::usage_error, "--scaling must be sample_scaled or paper_literal");

    TestResult res = markov ? markov_independence_test(data, class_id, scaling)
                            : independence_test_consecutive(data, class_id, scaling);

    std::ostringstream table;
    std::vector<std::vector<std::string>> rows{{fmt6(res.statistic), std::to_string(res.df),
                                                fmt6(res.p_value), std::to_string(res.cells_used),
                                                std::to_string(res.cells_excluded), scaling_arg}};
    print_table(table, {"statistic", "df", "p_value", "cells_used", "cells_excluded", "scaling"},
                rows);
    if (res.df_anomaly) table << "note: stated df is 0 for this design\n";
    emit(io, out, table.str(), test_to_json(res));
    return 0;
}

// ---- simulate / monte-carlo / calibrate-df ---------------------------------------

int cmd_simulate(const std::string& config_path, std::uint64_t seed, const std::string& out_path,
                 const std::string& partitions_out, const std::string& format, std::ostream&) {
    SimConfig cfg = load_sim_config(config_path);
    cfg.seed = seed;
    Dataset data = generate(cfg);
    if (format == "jsonl") {
        save_dataset_jsonl(data, out_path);
    } else if (format == "csv") {
        if (partitions_out.empty())
            fail(errc::usage_error, "--partitions-out is required for csv output");
        save_dataset_csv(data, out_path, partitions_out);
    } else {
        fail(errc::usage_error, "unknown format '" + format + "'");
    }
    return 0;
}

int cmd_monte_carlo(const IoOptions& io, const std::string& config_path,
                    const std::string& target_arg, std::size_t B, std::uint64_t seed,
                    std::ostream& out) {
    SimConfig cfg = load_sim_config(config_path);
    cfg.seed = seed;
    if (B > 0) cfg.replicates = B;

    MCTarget target;
    if (target_arg == "p")
        target = MCTarget::interval_probs;
    else if (target_arg == "survival")
        target = MCTarget::survival;
    else if (target_arg == "hazard")
        target = MCTarget::hazard_increments;
    else if (target_arg == "never")
        target = MCTarget::never_observed;
    else if (target_arg == "size")
        target = MCTarget::population_size;
    else if (target_arg == "test-indep")
        target = MCTarget::test_consecutive;
    else if (target_arg == "test-markov")
        target = MCTarget::test_markov;
    else
        fail(errc::usage_error,
             "--target must be p|survival|hazard|never|size|test-indep|test-markov");

    MonteCarloReport rep = run_monte_carlo(cfg, target);

    std::ostringstream table;
    table << "replicates=" << rep.replicates << "  failed=" << rep.failed << '\n';
    std::vector<std::vector<std::string>> rows;
    for (std::size_t c = 0; c < rep.component_names.size(); ++c) {
        std::vector<std::string> row{rep.component_names[c], fmt6(rep.mean[c]),
                                     fmt6(rep.sd_emp[c])};
        row.push_back(rep.truth.empty() ? "-" : fmt6(rep.truth[c]));
        row.push_back(rep.bias.empty() ? "-" : fmt6(rep.bias[c]));
        row.push_back(rep.sd_formula.empty() ? "-" : fmt6(rep.sd_formula[c]));
        rows.push_back(std::move(row));
    }
    print_table(table, {"component", "mean", "sd_emp", "truth", "bias", "sd_formula"}, rows);
    if (rep.paper_df) {
        table << "paper df=" << *rep.paper_df;
        if (rep.ks_vs_paper_df) table << "  KS(paper df)=" << fmt6(*rep.ks_vs_paper_df);
        if (rep.best_fit_df)
            table << "  best-fit df=" << *rep.best_fit_df << "  KS(best)="
                  << fmt6(*rep.ks_vs_best_fit);
        table << '\n';
    }

    json jout;
    jout["target"] = target_arg;
    jout["replicates"] = rep.replicates;
    jout["failed"] = rep.failed;
    jout["component_names"] = rep.component_names;
    jout["mean"] = rep.mean;
    jout["sd_emp"] = rep.sd_emp;
    if (!rep.truth.empty()) jout["truth"] = rep.truth;
    if (!rep.bias.empty()) jout["bias"] = rep.bias;
    if (!rep.sd_formula.empty()) jout["sd_formula"] = rep.sd_formula;
    if (rep.paper_df) jout["paper_df"] = *rep.paper_df;
    if (rep.ks_vs_paper_df) jout["ks_vs_paper_df"] = *rep.ks_vs_paper_df;
    if (rep.best_fit_df) jout["best_fit_df"] = *rep.best_fit_df;
    if (rep.ks_vs_best_fit) jout["ks_vs_best_fit"] = *rep.ks_vs_best_fit;
    jout["values"] = rep.values;

    emit(io, out, table.str(), jout);
    return 0;
}

int cmd_calibrate_df(const IoOptions& io, const std::string& config_path, const std::string& test,
                     std::size_t B, std::uint64_t seed, std::ostream& out) {
    if (test != "Z" && test != "X") fail(errc::usage_error, "--test must be Z or X");
    SimConfig cfg = load_sim_config(config_path);
    cfg.seed = seed;
    CalibrationReport rep = calibrate_df(cfg, test[0], B);

    std::ostringstream table;
    table << "test=" << test << "  B=" << rep.replicates << '\n'
          << "paper df=" << rep.paper_df << (rep.df_anomaly ? " (df=0 anomaly)" : "") << '\n'
          << "empirical mean=" << fmt6(rep.empirical_mean) << '\n'
          << "KS vs paper df=" << fmt6(rep.ks_vs_paper) << '\n'
          << "best-fit df=" << rep.best_fit_df << "  KS=" << fmt6(rep.ks_vs_best) << '\n';

    json jout;
    jout["test"] = test;
    jout["replicates"] = rep.replicates;
    jout["paper_df"] = rep.paper_df;
    jout["df_anomaly"] = rep.df_anomaly;
    jout["empirical_mean"] = rep.empirical_mean;
    jout["ks_vs_paper"] = rep.ks_vs_paper;
    jout["best_fit_df"] = rep.best_fit_df;
    jout["ks_vs_best"] = rep.ks_vs_best;
    jout["statistics"] = rep.statistics;

    emit(io, out, table.str(), jout);
    return 0;
}

} // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"current-status estimation toolkit"};
    app.require_subcommand(1);

    // estimate
    IoOptions est_io;
    std::string est_class;
    double est_conf = 0.95;
    auto* c_est = app.add_subcommand("estimate", "per-interval probabilities, survival, hazard");
    add_io_options(c_est, est_io);
    c_est->add_option("--class", est_class, "restrict to one class");
    c_est->add_option("--conf", est_conf, "confidence level")->default_val(0.95);

    // estimate-cov
    IoOptions cov_io;
    std::string cov_class, cov_norm = "paper_literal";
    auto* c_cov = app.add_subcommand("estimate-cov", "covariate-stratified estimates");
    add_io_options(c_cov, cov_io);
    c_cov->add_option("--class", cov_class, "restrict to one class");
    c_cov->add_option("--normalization", cov_norm, "paper_literal | conditional")
        ->default_val("paper_literal");

    // kernel
    IoOptions ker_io;
    std::string ker_class, ker_kernel = "epanechnikov", ker_bw = "auto";
    int ker_s = 2;
    std::vector<std::string> ker_z;
    auto* c_ker = app.add_subcommand("kernel", "kernel-smoothed conditional estimates");
    add_io_options(c_ker, ker_io);
    c_ker->add_option("--class", ker_class, "class id")->required();
    c_ker->add_option("--z", ker_z, "query covariate value (comma-separated components)")
        ->required();
    c_ker->add_option("--kernel", ker_kernel, "epanechnikov | gaussian | uniform")
        ->default_val("epanechnikov");
    c_ker->add_option("--bandwidth", ker_bw, "positive number or 'auto'")->default_val("auto");
    c_ker->add_option("--smoothness", ker_s, "smoothness order s for the AUTO rate")
        ->default_val(2);

    // ph
    IoOptions ph_io;
    std::string ph_class, ph_beta, ph_delta;
    auto* c_ph = app.add_subcommand("ph", "finite-level proportional-hazards decomposition");
    add_io_options(c_ph, ph_io);
    c_ph->add_option("--class", ph_class, "class id")->required();
    c_ph->add_option("--loglik-beta", ph_beta,
                     "per-interval coefficients 'b11,..,b1d;b21,..' for log-likelihood evaluation");
    c_ph->add_option("--loglik-delta", ph_delta,
                     "shared per-sub-interval hazard increments 'd1,d2,..'");

    // size
    IoOptions size_io;
    std::string size_p, size_wnorm = "window_mean";
    bool size_roster = false;
    std::size_t size_window = 0, size_boot = 0;
    std::optional<std::uint64_t> size_seed;
    auto* c_size = app.add_subcommand("size", "population-size estimates");
    add_io_options(c_size, size_io);
    c_size->add_option("--p", size_p, "detection probability per class: C1=0.5,C2=0.4");
    c_size->add_flag("--from-roster", size_roster, "derive p from roster data");
    c_size->add_option("--moving-average", size_window, "window half-width a (enables the variant)");
    c_size->add_option("--window-normalization", size_wnorm, "window_mean | paper_literal")
        ->default_val("window_mean");
    c_size->add_option("--bootstrap", size_boot, "bootstrap replicates for SEs");
    c_size->add_option("--seed", size_seed, "bootstrap seed (required with --bootstrap)");

    // test-indep / test-markov
    IoOptions ti_io, tm_io;
    std::string ti_class, tm_class, ti_scaling = "sample_scaled", tm_scaling = "sample_scaled";
    auto* c_ti = app.add_subcommand("test-indep", "consecutive-interval independence test");
    add_io_options(c_ti, ti_io);
    c_ti->add_option("--class", ti_class, "class id")->required();
    c_ti->add_option("--scaling", ti_scaling, "sample_scaled | paper_literal")
        ->default_val("sample_scaled");
    auto* c_tm = app.add_subcommand("test-markov", "detection vs class-transition test");
    add_io_options(c_tm, tm_io);
    c_tm->add_option("--class", tm_class, "class id")->required();
    c_tm->add_option("--scaling", tm_scaling, "sample_scaled | paper_literal")
        ->default_val("sample_scaled");

    // simulate
    std::string sim_config, sim_out, sim_parts, sim_format = "csv";
    std::uint64_t sim_seed = 0;
    auto* c_sim = app.add_subcommand("simulate", "generate a synthetic dataset");
    c_sim->add_option("--config", sim_config, "generator config JSON")->required();
    c_sim->add_option("--seed", sim_seed, "master seed")->required();
    c_sim->add_option("--out", sim_out, "output data file")->required();
    c_sim->add_option("--partitions-out", sim_parts, "output partition CSV (csv format)");
    c_sim->add_option("--format", sim_format, "csv | jsonl")->default_val("csv");

    // monte-carlo
    IoOptions mc_io;
    std::string mc_config, mc_target;
    std::size_t mc_B = 0;
    std::uint64_t mc_seed = 0;
    auto* c_mc = app.add_subcommand("monte-carlo", "replicate an estimator or test");
    c_mc->add_option("--config", mc_config, "generator config JSON")->required();
    c_mc->add_option("--target", mc_target, "p|survival|hazard|never|size|test-indep|test-markov")
        ->required();
    c_mc->add_option("--B", mc_B, "replicates (overrides config)");
    c_mc->add_option("--seed", mc_seed, "master seed")->required();
    add_io_options(c_mc, mc_io, false);

    // calibrate-df
    IoOptions cal_io;
    std::string cal_config, cal_test;
    std::size_t cal_B = 2000;
    std::uint64_t cal_seed = 0;
    auto* c_cal = app.add_subcommand("calibrate-df", "empirical df of a test under H0");
    c_cal->add_option("--config", cal_config, "generator config JSON (H0 parameters)")->required();
    c_cal->add_option("--test", cal_test, "Z | X")->required();
    c_cal->add_option("--B", cal_B, "replicates")->default_val(2000);
    c_cal->add_option("--seed", cal_seed, "master seed")->required();
    add_io_options(c_cal, cal_io, false);

    try {
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));

        if (c_est->parsed()) return cmd_estimate(est_io, est_class, est_conf, out);
        if (c_cov->parsed()) return cmd_estimate_cov(cov_io, cov_class, cov_norm, out);
        if (c_ker->parsed())
            return cmd_kernel(ker_io, ker_class, ker_z, ker_kernel, ker_bw, ker_s, out);
        if (c_ph->parsed()) return cmd_ph(ph_io, ph_class, ph_beta, ph_delta, out);
        if (c_size->parsed())
            return cmd_size(size_io, size_p, size_roster, size_window, size_wnorm, size_boot,
                            size_seed, out);
        if (c_ti->parsed()) return cmd_test(ti_io, ti_class, ti_scaling, false, out);
        if (c_tm->parsed()) return cmd_test(tm_io, tm_class, tm_scaling, true, out);
        if (c_sim->parsed())
            return cmd_simulate(sim_config, sim_seed, sim_out, sim_parts, sim_format, out);
        if (c_mc->parsed()) return cmd_monte_carlo(mc_io, mc_config, mc_target, mc_B, mc_seed, out);
        if (c_cal->parsed()) return cmd_calibrate_df(cal_io, cal_config, cal_test, cal_B, cal_seed, out);
        err << "USAGE_ERROR: no subcommand\n";
        return 2;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) { // --help
            out << app.help();
            return 0;
        }
        err << "USAGE_ERROR: " << e.what() << '\n';
        return 2;
    } catch (const error& e) {
        err << e.what() << '\n';
        return errc_exit_code(e.code());
    } catch (const std::exception& e) {
        err << "INTERNAL_ERROR: " << e.what() << '\n';
        return 1;
    }
}

} // namespace cst
