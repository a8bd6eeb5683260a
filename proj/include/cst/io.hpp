#pragma once

#include <string>

#include "cst/simulate.hpp"
#include "cst/types.hpp"

namespace cst {

// Long-format CSV: one row per individual x interval with a sidecar
// partition file. Directive lines (#key=value) carry includes_undetected
// and covariate_dim. Covariate values are stored per interval, so paths
// load back aligned to the partition; sub-interval changes need JSONL.
Dataset load_dataset_csv(const std::string& data_path, const std::string& partitions_path);
void save_dataset_csv(const Dataset& data, const std::string& data_path,
                      const std::string& partitions_path);

// JSONL: meta header line then one record per line; full fidelity.
Dataset load_dataset_jsonl(const std::string& path);
void save_dataset_jsonl(const Dataset& data, const std::string& path);

// Wide-format convenience importer: class_id,individual_id,delta_1..delta_K.
Dataset load_dataset_wide_csv(const std::string& data_path, const std::string& partitions_path);

// Generator configuration from a JSON file (see README for the schema).
SimConfig load_sim_config(const std::string& path);

// Shortest round-trip decimal representation (to_chars).
std::string format_double(double v);

} // namespace cst
