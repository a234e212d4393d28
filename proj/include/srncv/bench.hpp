// Repeated-estimation benchmark: empirical estimator variances across
// repetitions and the cost-weighted efficiency of the control-variate
// pipeline against the crude sample mean.
#pragma once

#include <cstdint>
#include <vector>

#include "srncv/selection.hpp"

namespace srncv {

struct BenchEstimate {
    double estimate = 0.0;
    double cost_seconds = 0.0;  // thread time actually spent simulating
    size_t d_selected = 0;      // 0 for crude repetitions
};

struct BenchSummary {
    std::vector<BenchEstimate> crude;
    std::vector<BenchEstimate> cv;

    double var_crude = 0.0;  // across repetitions
    double var_cv = 0.0;
    double reduction = 0.0;  // var_crude / var_cv
    double c0 = 0.0;         // mean cost per crude estimation
    double c1 = 0.0;         // mean cost per CV estimation (search included)
    double slowdown = 0.0;
    double efficiency = 0.0;
    double mean_selected = 0.0;
    double mean_estimate_crude = 0.0;
    double mean_estimate_cv = 0.0;
};

/// Runs R crude and R pipeline estimations with per-repetition derived
/// seeds. Requires R >= 2.
BenchSummary run_bench(const Model& model, const TargetQuery& query, const SelectionConfig& config,
                       int repetitions, uint64_t seed);

/// Seed derivation for independent repetitions.
uint64_t derive_seed(uint64_t master, uint64_t salt);

}  // namespace srncv
