// Candidate-pool construction, lambda resampling driven by improvement
// ratios, redundancy-aware greedy subset selection, and the end-to-end
// estimation pipeline built on them.
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "srncv/moments.hpp"
#include "srncv/sim.hpp"
#include "srncv/stats.hpp"

namespace srncv {

struct SelectionConfig {
    int64_t n = 10'000;      // final estimation trajectories
    int64_t d = 10;          // pilot trajectories per evaluation
    uint32_t n_max = 1;      // maximum constraint moment order
    uint32_t n_lambda = 10;  // initial lambda samples (0 is always added)
    uint32_t n_c = 2;        // candidates resampled per round
    uint32_t n_s = 2;        // descendants per resampled candidate
    uint32_t n_r = 3;        // resampling rounds
    double epsilon = 1.05;   // greedy stop threshold on the net improvement score
    double step_sd = 0.5;    // resampling step standard deviation
    double prior_mean = 0.0;  // lambda prior (normal)
    double prior_sd = 1.0;
    int workers = 0;
    uint64_t max_events = 100'000'000;

    void validate() const;
};

struct Candidate {
    ControlVariateId id;
    ConstraintExpansion expansion;
    double rho_v = 0.0;    // pilot correlation with the target
    double gamma_v = 1.0;  // improvement ratio from the pilot estimate
    uint32_t round_added = 0;
};

struct CandidatePool {
    std::vector<Candidate> items;
    std::set<ControlVariateId> ids;  // duplicates are merged on insert
    std::vector<std::string> warnings;

    bool add(Candidate candidate);
    size_t size() const { return items.size(); }
};

/// All (m, lambda) candidates with 1 <= |m| <= n_max over the sampled
/// lambda set plus 0. Multi-indices whose constraints need a non-polynomial
/// rate are skipped with a warning; none at all leaves the pool empty.
CandidatePool init_pool(const Model& model, double horizon, const SelectionConfig& config,
                        Philox4x32& rng);

/// Draws n_c parents with probability proportional to gamma_v, then n_s
/// descendants each with a normal step on lambda; descendants already in the
/// pool are dropped. New candidates still need pilot evaluation.
std::vector<Candidate> resample_round(const CandidatePool& pool, const Model& model, double horizon,
                                      const SelectionConfig& config, Philox4x32& rng,
                                      uint32_t round);

struct SelectionPick {
    size_t pool_index = 0;
    ControlVariateId id;
    double gamma_v = 0.0;  // improvement ratio at selection time (full-pool stats)
    double score = 0.0;    // redundancy-discounted score when picked
};

struct SelectionOutcome {
    std::vector<SelectionPick> picks;
    std::vector<double> gamma_v;        // per pool item, from the full-pool stats
    std::vector<double> exit_scores;    // per pool item when the loop stopped
};

/// Greedy loop: repeatedly picks the candidate maximising
///   gamma_iv * prod_{j selected} (1 - rho_ij^2)
/// while that score exceeds epsilon. cov_stats must cover the whole pool.
SelectionOutcome greedy_select(const CandidatePool& pool, const RunningStats& cov_stats,
                               double epsilon);

struct RoundAudit {
    uint32_t round = 0;  // 0 is the initial pool
    std::vector<ControlVariateId> added;
    std::vector<double> pilot_rho;
};

struct PipelineResult {
    LcvEstimate estimate;
    SelectionOutcome selection;
    EfficiencyReport efficiency;
    std::vector<ControlVariateId> selected_ids;
    std::vector<ControlVariateId> dropped_ids;  // singular in the final regression

    std::vector<RoundAudit> audit;
    std::vector<std::string> warnings;

    double crude_mean = 0.0;  // plain sample mean over the final batch
    double crude_se = 0.0;

    int64_t final_n = 0;
    double pilot_seconds = 0.0;
    double covariance_seconds = 0.0;
    double final_seconds = 0.0;
    double calibration_seconds = 0.0;
    double total_seconds = 0.0;
    uint64_t total_events = 0;
};

/// Initialization, n_r resampling rounds (d pilot trajectories each, new
/// candidates only), full-pool covariance estimation with 5 d trajectories,
/// greedy selection, and a fresh final batch of n trajectories carrying only
/// the selected accumulators. Fully determined by (model, query, config, seed).
PipelineResult run_pipeline(const Model& model, const TargetQuery& query,
                            const SelectionConfig& config, uint64_t seed);

/// Weighted index draw: probability of i proportional to weights[i].
/// Exposed for direct testing; u must be in [0, 1).
size_t weighted_index(std::span<const double> weights, double u);

}  // namespace srncv
