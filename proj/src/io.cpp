#include "cst/io.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

namespace cst {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        fail(errc::parse_error, "line " + std::to_string(line_no) + ": bad number '" + s + "'");
    return v;
}

long parse_long(const std::string& s, std::size_t line_no) {
    long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        fail(errc::parse_error, "line " + std::to_string(line_no) + ": bad integer '" + s + "'");
    return v;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(errc::parse_error, "cannot open '" + path + "'");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary); // no platform newline translation
    if (!out) fail(errc::parse_error, "cannot open '" + path + "' for writing");
    return out;
}

std::map<std::string, IntervalPartition> load_partitions(const std::string& path) {
    std::ifstream in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    std::map<std::string, IntervalPartition> parts;
    std::map<std::string, long> last_k;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto cells = split_csv(line);
        if (line_no == 1 || (cells.size() == 4 && cells[0] == "class_id")) {
            if (cells != std::vector<std::string>{"class_id", "k", "tau_lower", "tau_upper"})
                fail(errc::schema_mismatch, "partition file needs header class_id,k,tau_lower,tau_upper");
            continue;
        }
        if (cells.size() != 4)
            fail(errc::parse_error, "line " + std::to_string(line_no) + ": expected 4 columns");
        const std::string& cid = cells[0];
        long k = parse_long(cells[1], line_no);
        double lo = parse_double(cells[2], line_no);
        double hi = parse_double(cells[3], line_no);

        auto& part = parts[cid];
        auto& prev = last_k[cid];
        if (part.endpoints.empty()) {
            part.class_id = cid;
            if (k != 1)
                fail(errc::schema_mismatch, "class '" + cid + "': intervals must start at k=1");
            part.endpoints.push_back(lo);
        } else {
            if (k != prev + 1)
                fail(errc::schema_mismatch, "class '" + cid + "': interval k=" + std::to_string(k) +
                                                " out of sequence");
            if (lo != part.endpoints.back())
                fail(errc::schema_mismatch, "class '" + cid + "': tau_lower of k=" +
                                                std::to_string(k) + " must equal previous tau_upper");
        }
        part.endpoints.push_back(hi);
        prev = k;
    }
    if (parts.empty()) fail(errc::schema_mismatch, "partition file is empty");
    return parts;
}

void save_partitions(const Dataset& data, const std::string& path) {
    std::ofstream out = open_output(path);
    out << "class_id,k,tau_lower,tau_upper\n";
    for (const auto& [cid, part] : data.partitions)
        for (std::size_t k = 1; k < part.endpoints.size(); ++k)
            out << cid << ',' << k << ',' << format_double(part.endpoints[k - 1]) << ','
                << format_double(part.endpoints[k]) << '\n';
}

struct LongHeader {
    int covariate_dim = 0;
    bool has_transitions = false;
};

LongHeader parse_long_header(const std::vector<std::string>& cells) {
    static const std::vector<std::string> base = {"class_id", "individual_id", "interval_index",
                                                  "delta"};
    if (cells.size() < base.size())
        fail(errc::schema_mismatch, "data header too short");
    for (std::size_t i = 0; i < base.size(); ++i)
        if (cells[i] != base[i])
            fail(errc::schema_mismatch, "data header must start class_id,individual_id,interval_index,delta");

    LongHeader h;
    std::size_t i = base.size();
    while (i < cells.size() && cells[i] == "z" + std::to_string(h.covariate_dim + 1)) {
        ++h.covariate_dim;
        ++i;
    }
    if (i < cells.size()) {
        if (cells[i] == "from_class" && i + 1 < cells.size() && cells[i + 1] == "to_class") {
            h.has_transitions = true;
            i += 2;
        }
    }
    if (i != cells.size()) fail(errc::schema_mismatch, "unrecognized data column '" + cells[i] + "'");
    return h;
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Dataset load_dataset_csv(const std::string& data_path, const std::string& partitions_path) {
    Dataset ds;
    ds.partitions = load_partitions(partitions_path);

    std::ifstream in = open_input(data_path);
    std::string line;
    std::size_t line_no = 0;
    bool saw_flag = false;
    bool saw_header = false;
    LongHeader header;

    struct Row {
        std::size_t order;
        std::string class_id;
        std::vector<std::uint8_t> deltas;
        std::vector<bool> filled;
        std::vector<std::vector<double>> z; // per interval
        std::optional<ClassTransition> transition;
    };
    std::map<std::string, Row> rows; // by individual_id
    std::size_t next_order = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto eq = line.find('=');
            std::string key = line.substr(1, eq == std::string::npos ? std::string::npos : eq - 1);
            std::string val = eq == std::string::npos ? "" : line.substr(eq + 1);
            if (!val.empty() && val.back() == '\r') val.pop_back();
            if (key == "includes_undetected") {
                if (val != "true" && val != "false")
                    fail(errc::parse_error, "line " + std::to_string(line_no) +
                                                ": includes_undetected must be true|false");
                ds.includes_undetected = val == "true";
                saw_flag = true;
            } else if (key == "covariate_dim") {
                ds.covariate_dim = static_cast<int>(parse_long(val, line_no));
            }
            continue;
        }
        auto cells = split_csv(line);
        if (!saw_header) {
            header = parse_long_header(cells);
            if (ds.covariate_dim == 0) ds.covariate_dim = header.covariate_dim;
            if (ds.covariate_dim != header.covariate_dim)
                fail(errc::schema_mismatch, "covariate_dim directive disagrees with z columns");
            saw_header = true;
            continue;
        }

        std::size_t expected = 4 + header.covariate_dim + (header.has_transitions ? 2 : 0);
        if (cells.size() != expected)
            fail(errc::parse_error, "line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(expected) + " columns, got " +
                                        std::to_string(cells.size()));

        const std::string& cid = cells[0];
        const std::string& iid = cells[1];
        auto pit = ds.partitions.find(cid);
        if (pit == ds.partitions.end())
            fail(errc::schema_mismatch,
                 "line " + std::to_string(line_no) + ": class '" + cid + "' has no partition");
        const std::size_t K = pit->second.interval_count();

        long k = parse_long(cells[2], line_no);
        if (k < 1 || static_cast<std::size_t>(k) > K)
            fail(errc::schema_mismatch, "line " + std::to_string(line_no) + ": interval_index " +
                                            std::to_string(k) + " outside 1.." + std::to_string(K));
        long delta = parse_long(cells[3], line_no);
        if (delta != 0 && delta != 1)
            fail(errc::parse_error, "line " + std::to_string(line_no) + ": delta must be 0 or 1");

        auto [it, inserted] = rows.try_emplace(iid);
        Row& row = it->second;
        if (inserted) {
            row.order = next_order++;
            row.class_id = cid;
            row.deltas.assign(K, 0);
            row.filled.assign(K, false);
            row.z.assign(K, {});
        } else if (row.class_id != cid) {
            fail(errc::schema_mismatch,
                 "line " + std::to_string(line_no) + ": individual '" + iid + "' changes class");
        }
        if (row.filled[k - 1])
            fail(errc::duplicate_cell, "line " + std::to_string(line_no) + ": individual '" + iid +
                                           "' interval " + std::to_string(k) + " repeated");
        row.filled[k - 1] = true;
        row.deltas[k - 1] = static_cast<std::uint8_t>(delta);

        if (header.covariate_dim > 0) {
            bool all_empty = true;
            for (int m = 0; m < header.covariate_dim; ++m)
                if (!cells[4 + m].empty()) all_empty = false;
            if (!all_empty) {
                std::vector<double> z(header.covariate_dim);
                for (int m = 0; m < header.covariate_dim; ++m)
                    z[m] = parse_double(cells[4 + m], line_no);
                row.z[k - 1] = std::move(z);
            }
        }
        if (header.has_transitions) {
            const std::string& from = cells[4 + header.covariate_dim];
            const std::string& to = cells[5 + header.covariate_dim];
            if (!from.empty() || !to.empty()) {
                ClassTransition tr{from, to};
                if (row.transition && !(*row.transition == tr))
                    fail(errc::schema_mismatch, "line " + std::to_string(line_no) +
                                                    ": conflicting transitions for '" + iid + "'");
                row.transition = tr;
            }
        }
    }
    if (!saw_header) fail(errc::schema_mismatch, "data file has no header row");
    if (!saw_flag) fail(errc::schema_mismatch, "missing #includes_undetected directive");

    std::vector<const std::pair<const std::string, Row>*> ordered;
    ordered.reserve(rows.size());
    for (const auto& kv : rows) ordered.push_back(&kv);
    std::sort(ordered.begin(), ordered.end(),
              [](auto* a, auto* b) { return a->second.order < b->second.order; });

    for (const auto* kv : ordered) {
        const Row& row = kv->second;
        const auto& part = ds.partitions.at(row.class_id);
        const std::size_t K = part.interval_count();
        for (std::size_t k = 0; k < K; ++k)
            if (!row.filled[k])
                fail(errc::schema_mismatch, "individual '" + kv->first + "' missing interval " +
                                                std::to_string(k + 1) + " (cells may not be imputed)");

        DetectionRecord rec;
        rec.individual_id = kv->first;
        rec.class_id = row.class_id;
        rec.deltas = row.deltas;
        bool any_z = false, all_z = true;
        for (std::size_t k = 0; k < K; ++k) {
            if (row.z[k].empty())
                all_z = false;
            else
                any_z = true;
        }
        if (any_z && !all_z)
            fail(errc::schema_mismatch,
                 "individual '" + kv->first + "' has covariates on some intervals only");
        if (any_z) {
            CovariatePath path;
            path.breakpoints = part.endpoints;
            for (std::size_t k = 0; k < K; ++k) path.levels.push_back(row.z[k]);
            rec.covariates = std::move(path);
        }
        rec.transition = row.transition;
        ds.records.push_back(std::move(rec));
    }
    return validate_dataset(std::move(ds));
}

void save_dataset_csv(const Dataset& data, const std::string& data_path,
                      const std::string& partitions_path) {
    save_partitions(data, partitions_path);

    bool any_transition = false;
    for (const auto& rec : data.records)
        if (rec.transition) any_transition = true;

    std::ofstream out = open_output(data_path);
    out << "#includes_undetected=" << (data.includes_undetected ? "true" : "false") << '\n';
    if (data.covariate_dim > 0) out << "#covariate_dim=" << data.covariate_dim << '\n';
    out << "class_id,individual_id,interval_index,delta";
    for (int m = 1; m <= data.covariate_dim; ++m) out << ",z" << m;
    if (any_transition) out << ",from_class,to_class";
    out << '\n';

    for (const auto& rec : data.records) {
        const auto& part = data.partitions.at(rec.class_id);
        for (std::size_t k = 0; k < rec.deltas.size(); ++k) {
            out << rec.class_id << ',' << rec.individual_id << ',' << (k + 1) << ','
                << (rec.deltas[k] ? 1 : 0);
            if (data.covariate_dim > 0) {
                if (rec.covariates) {
                    const auto& z = rec.covariates->value_at(part.endpoints[k + 1]);
                    for (double v : z) out << ',' << format_double(v);
                } else {
                    for (int m = 0; m < data.covariate_dim; ++m) out << ',';
                }
            }
            if (any_transition) {
                if (rec.transition)
                    out << ',' << rec.transition->from_class << ',' << rec.transition->to_class;
                else
                    out << ",,";
            }
            out << '\n';
        }
    }
}

Dataset load_dataset_jsonl(const std::string& path) {
    std::ifstream in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    Dataset ds;
    bool saw_meta = false;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            fail(errc::parse_error, "line " + std::to_string(line_no) + ": " + e.what());
        }
        try {
            if (!saw_meta) {
                for (const auto& p : j.at("partitions")) {
                    IntervalPartition part;
                    part.class_id = p.at("class_id").get<std::string>();
                    part.endpoints = p.at("endpoints").get<std::vector<double>>();
                    ds.partitions[part.class_id] = std::move(part);
                }
                ds.includes_undetected = j.at("includes_undetected").get<bool>();
                ds.covariate_dim = j.value("covariate_dim", 0);
                saw_meta = true;
                continue;
            }
            DetectionRecord rec;
            rec.individual_id = j.at("individual_id").get<std::string>();
            rec.class_id = j.at("class_id").get<std::string>();
            for (const auto& d : j.at("deltas"))
                rec.deltas.push_back(d.get<int>() ? 1 : 0);
            if (j.contains("covariates")) {
                CovariatePath path;
                path.breakpoints = j["covariates"].at("breakpoints").get<std::vector<double>>();
                path.levels =
                    j["covariates"].at("levels").get<std::vector<std::vector<double>>>();
                rec.covariates = std::move(path);
            }
            if (j.contains("transition")) {
                rec.transition = ClassTransition{j["transition"].at("from").get<std::string>(),
                                                 j["transition"].at("to").get<std::string>()};
            }
            ds.records.push_back(std::move(rec));
        } catch (const json::exception& e) {
            fail(errc::schema_mismatch, "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!saw_meta) fail(errc::schema_mismatch, "JSONL file has no meta line");
    return validate_dataset(std::move(ds));
}

void save_dataset_jsonl(const Dataset& data, const std::string& path) {
    std::ofstream out = open_output(path);
    json meta;
    meta["partitions"] = json::array();
    for (const auto& [cid, part] : data.partitions)
        meta["partitions"].push_back({{"class_id", cid}, {"endpoints", part.endpoints}});
    meta["includes_undetected"] = data.includes_undetected;
    meta["covariate_dim"] = data.covariate_dim;
    out << meta.dump() << '\n';

    for (const auto& rec : data.records) {
        json j;
        j["individual_id"] = rec.individual_id;
        j["class_id"] = rec.class_id;
        j["deltas"] = json::array();
        for (auto d : rec.deltas) j["deltas"].push_back(d ? 1 : 0);
        if (rec.covariates) {
            j["covariates"] = {{"breakpoints", rec.covariates->breakpoints},
                               {"levels", rec.covariates->levels}};
        }
        if (rec.transition)
            j["transition"] = {{"from", rec.transition->from_class},
                               {"to", rec.transition->to_class}};
        out << j.dump() << '\n';
    }
}

SimConfig load_sim_config(const std::string& path) {
    std::ifstream in = open_input(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail(errc::parse_error, std::string("sim config: ") + e.what());
    }

    SimConfig cfg;
    try {
        const std::string gen = j.at("generator").get<std::string>();
        if (gen == "multinomial_first_presence")
            cfg.generator = GeneratorFamily::multinomial_first_presence;
        else if (gen == "bernoulli_per_interval")
            cfg.generator = GeneratorFamily::bernoulli_per_interval;
        else if (gen == "ph_covariate")
            cfg.generator = GeneratorFamily::ph_covariate;
        else if (gen == "markov_transition")
            cfg.generator = GeneratorFamily::markov_transition;
        else if (gen == "dependent_consecutive")
            cfg.generator = GeneratorFamily::dependent_consecutive;
        else
            fail(errc::schema_mismatch, "unknown generator '" + gen + "'");

        cfg.class_id = j.value("class_id", std::string("C1"));
        cfg.endpoints = j.at("endpoints").get<std::vector<double>>();
        if (j.contains("p0")) cfg.p0 = j["p0"].get<std::vector<double>>();
        if (j.contains("pi0")) cfg.pi0 = j["pi0"].get<std::vector<double>>();
        if (j.contains("lambda0")) {
            cfg.lambda0.times = j["lambda0"].at("times").get<std::vector<double>>();
            cfg.lambda0.values = j["lambda0"].at("values").get<std::vector<double>>();
        }
        if (j.contains("beta0")) cfg.beta0 = j["beta0"].get<std::vector<std::vector<double>>>();
        if (j.contains("levels")) cfg.levels = j["levels"].get<std::vector<std::vector<double>>>();
        if (j.contains("level_probs")) cfg.level_probs = j["level_probs"].get<std::vector<double>>();
        cfg.uniform_covariate = j.value("uniform_covariate", false);
        if (j.contains("class_ids")) cfg.class_ids = j["class_ids"].get<std::vector<std::string>>();
        if (j.contains("origin_ids")) cfg.origin_ids = j["origin_ids"].get<std::vector<std::string>>();
        if (j.contains("q0")) cfg.q0 = j["q0"].get<std::vector<std::vector<double>>>();
        if (j.contains("p0_cond"))
            cfg.p0_cond = j["p0_cond"].get<std::vector<std::vector<std::vector<double>>>>();
        cfg.nu = j.at("nu").get<std::uint64_t>();
        cfg.replicates = j.value("replicates", std::size_t{0});
        cfg.seed = j.value("seed", std::uint64_t{0});
        cfg.includes_undetected = j.value("includes_undetected", true);
    } catch (const json::exception& e) {
        fail(errc::schema_mismatch, std::string("sim config: ") + e.what());
    }
    return cfg;
}

Dataset load_dataset_wide_csv(const std::string& data_path, const std::string& partitions_path) {
    Dataset ds;
    ds.partitions = load_partitions(partitions_path);
    ds.includes_undetected = true; // roster convention for wide imports

    std::ifstream in = open_input(data_path);
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    std::size_t K_header = 0;
    std::set<std::string> seen;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("#includes_undetected=", 0) == 0)
                ds.includes_undetected = line.substr(21) == "true";
            continue;
        }
        auto cells = split_csv(line);
        if (!saw_header) {
            if (cells.size() < 3 || cells[0] != "class_id" || cells[1] != "individual_id")
                fail(errc::schema_mismatch, "wide header must start class_id,individual_id,delta_1..");
            for (std::size_t i = 2; i < cells.size(); ++i)
                if (cells[i] != "delta_" + std::to_string(i - 1))
                    fail(errc::schema_mismatch, "wide header column '" + cells[i] + "' unexpected");
            K_header = cells.size() - 2;
            saw_header = true;
            continue;
        }
        if (cells.size() != K_header + 2)
            fail(errc::parse_error, "line " + std::to_string(line_no) + ": column count mismatch");
        DetectionRecord rec;
        rec.class_id = cells[0];
        rec.individual_id = cells[1];
        if (!seen.insert(rec.individual_id).second)
            fail(errc::duplicate_cell,
                 "line " + std::to_string(line_no) + ": individual '" + rec.individual_id + "' repeated");
        for (std::size_t k = 0; k < K_header; ++k) {
            long d = parse_long(cells[2 + k], line_no);
            if (d != 0 && d != 1)
                fail(errc::parse_error, "line " + std::to_string(line_no) + ": delta must be 0 or 1");
            rec.deltas.push_back(static_cast<std::uint8_t>(d));
        }
        ds.records.push_back(std::move(rec));
    }
    if (!saw_header) fail(errc::schema_mismatch, "wide data file has no header row");
    return validate_dataset(std::move(ds));
}

} // namespace cst
