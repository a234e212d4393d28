#include "srncv/bench.hpp"

#include <cmath>
#include <stdexcept>

namespace srncv {

uint64_t derive_seed(uint64_t master, uint64_t salt) {
    uint64_t x = master ^ (salt * 0x9E3779B97F4A7C15ull);
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

namespace {

double sample_variance(const std::vector<BenchEstimate>& xs) {
    const size_t n = xs.size();
    double mean = 0.0;
    for (const BenchEstimate& x : xs) mean += x.estimate;
    mean /= static_cast<double>(n);
    double s = 0.0;
    for (const BenchEstimate& x : xs) s += (x.estimate - mean) * (x.estimate - mean);
    return s / static_cast<double>(n - 1);
}

double mean_cost(const std::vector<BenchEstimate>& xs) {
    double s = 0.0;
    for (const BenchEstimate& x : xs) s += x.cost_seconds;
    return s / static_cast<double>(xs.size());
}

}  // namespace

BenchSummary run_bench(const Model& model, const TargetQuery& query, const SelectionConfig& config,
                       int repetitions, uint64_t seed) {
    if (repetitions < 2) throw std::invalid_argument("run_bench: need at least 2 repetitions");
    config.validate();
    const CompiledModel cm(model);

    BenchSummary summary;
    for (int r = 0; r < repetitions; ++r) {
        BatchOptions opt;
        opt.n = config.n;
        opt.seed = derive_seed(seed, 2 * static_cast<uint64_t>(r));
        opt.stage = RngStage::FinalBatch;
        opt.workers = config.workers;
        opt.max_events = config.max_events;
        const BatchResult batch = run_batch(cm, query, {}, opt);
        summary.crude.push_back({batch.stats.mean_v(), batch.sum_trajectory_seconds, 0});
    }
    for (int r = 0; r < repetitions; ++r) {
        const PipelineResult res =
            run_pipeline(model, query, config, derive_seed(seed, 2 * static_cast<uint64_t>(r) + 1));
        const double cost = res.pilot_seconds + res.covariance_seconds + res.final_seconds;
        summary.cv.push_back({res.estimate.point, cost, res.selected_ids.size()});
        summary.mean_selected += static_cast<double>(res.selected_ids.size());
    }
    summary.mean_selected /= static_cast<double>(repetitions);

    summary.var_crude = sample_variance(summary.crude);
    summary.var_cv = sample_variance(summary.cv);
    summary.c0 = mean_cost(summary.crude);
    summary.c1 = mean_cost(summary.cv);
    summary.reduction = summary.var_cv > 0.0 ? summary.var_crude / summary.var_cv : kImprovementCap;
    summary.slowdown = summary.c0 > 0.0 ? summary.c1 / summary.c0 : 0.0;
    summary.efficiency = (summary.c0 > 0.0 && summary.var_cv > 0.0 && summary.c1 > 0.0 &&
                          summary.var_crude > 0.0)
                             ? efficiency(summary.c0, summary.var_crude, summary.c1, summary.var_cv)
                             : summary.reduction / (summary.slowdown > 0.0 ? summary.slowdown : 1.0);
    for (const BenchEstimate& x : summary.crude)
        summary.mean_estimate_crude += x.estimate / static_cast<double>(repetitions);
    for (const BenchEstimate& x : summary.cv)
        summary.mean_estimate_cv += x.estimate / static_cast<double>(repetitions);
    return summary;
}

}  // namespace srncv
