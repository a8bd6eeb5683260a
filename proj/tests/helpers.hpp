#pragma once

#include <string>
#include <vector>

#include "cst/rng.hpp"
#include "cst/types.hpp"

namespace cst::testing {

// Dataset with one class, unit-length intervals, deltas given row-wise.
inline Dataset make_dataset(const std::vector<std::vector<int>>& deltas,
                            bool includes_undetected = true,
                            const std::string& class_id = "C1") {
    Dataset ds;
    ds.includes_undetected = includes_undetected;
    std::size_t K = deltas.empty() ? 1 : deltas.front().size();
    IntervalPartition part;
    part.class_id = class_id;
    for (std::size_t k = 0; k <= K; ++k) part.endpoints.push_back(static_cast<double>(k));
    ds.partitions[class_id] = part;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        DetectionRecord rec;
        rec.individual_id = "i" + std::to_string(i + 1);
        rec.class_id = class_id;
        for (int d : deltas[i]) rec.deltas.push_back(d ? 1 : 0);
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

// Attaches a constant scalar covariate path to each record.
inline void attach_levels(Dataset& ds, const std::vector<double>& level_per_record) {
    ds.covariate_dim = 1;
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        auto& rec = ds.records[i];
        const auto& part = ds.partitions.at(rec.class_id);
        rec.covariates =
            CovariatePath{{part.endpoints.front(), part.endpoints.back()}, {{level_per_record[i]}}};
    }
}

// Random dataset in the Bernoulli regime (independent per-interval deltas).
inline Dataset random_dataset(std::uint64_t seed, std::size_t n, std::size_t K,
                              bool includes_undetected = true) {
    rng gen(seed);
    std::vector<double> p(K);
    for (auto& v : p) v = 0.05 + 0.6 * gen.uniform01();
    std::vector<std::vector<int>> deltas(n, std::vector<int>(K, 0));
    for (auto& row : deltas)
        for (std::size_t k = 0; k < K; ++k) row[k] = gen.bernoulli(p[k]) ? 1 : 0;
    return make_dataset(deltas, includes_undetected);
}

// Random dataset in the multinomial regime with class-transition labels.
inline Dataset random_markov_dataset(std::uint64_t seed, std::size_t n, std::size_t K,
                                     std::size_t n_origins) {
    rng gen(seed);
    std::vector<std::vector<int>> deltas(n, std::vector<int>(K, 0));
    std::vector<double> p(K, 0.8 / static_cast<double>(K));
    for (auto& row : deltas) {
        double u = gen.uniform01();
        double cum = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            cum += p[k];
            if (u < cum) {
                row[k] = 1;
                break;
            }
        }
    }
    Dataset ds = make_dataset(deltas, true);
    for (auto& rec : ds.records) {
        std::size_t o = gen.next_u64() % n_origins;
        rec.transition = ClassTransition{"O" + std::to_string(o + 1), rec.class_id};
    }
    return ds;
}

} // namespace cst::testing
