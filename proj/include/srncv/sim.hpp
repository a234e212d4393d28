// Exact SSA with in-loop trajectory-integral accumulators and a
// deterministic batch runner. run_batch is the OpenMP kernel; per-trajectory
// results are merged in index order so the output is bit-identical for any
// worker count, and run_batch_serial is the plain loop kept as the
// reference the tests compare against.
#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "srncv/model.hpp"
#include "srncv/moments.hpp"
#include "srncv/rng.hpp"
#include "srncv/stats.hpp"

namespace srncv {

struct SimulationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SimConfig {
    double horizon = 0.0;
    uint64_t seed = 0;
    uint64_t max_events = 100'000'000;  // guards against rate blow-ups
};

/// Model with propensity evaluation baked down: mass-action laws use a
/// sparse falling-factorial product, expression laws their stack program.
class CompiledModel {
public:
    explicit CompiledModel(Model model);

    const Model& model() const { return model_; }
    size_t n_species() const { return model_.n_species(); }
    size_t n_reactions() const { return model_.n_reactions(); }

    double propensity(size_t j, const State& x) const;
    /// Fills per-reaction propensities, returns their sum.
    double total_propensity(const State& x, std::span<double> out) const;
    std::span<const int64_t> change(size_t j) const { return changes_[j]; }

private:
    struct MassActionEval {
        double scaled_c;  // c / prod k!
        std::vector<std::pair<uint32_t, uint32_t>> reactants;  // (species, multiplicity)
    };
    Model model_;
    std::vector<MassActionEval> mass_action_;  // index parallel to reactions
    std::vector<StackProgram> programs_;       // empty for mass-action laws
    std::vector<bool> is_mass_action_;
    std::vector<std::vector<int64_t>> changes_;
};

/// Running values of int_0^T e^{lambda t} X_t^m dt, grouped by lambda so each
/// SSA step costs one exp() per distinct weight. Segments must be fed in
/// increasing-time order starting at 0.
class AccumulatorSet {
public:
    AccumulatorSet() = default;
    explicit AccumulatorSet(const std::set<AccumulatorKey>& keys);

    size_t size() const { return keys_.size(); }
    bool empty() const { return keys_.empty(); }
    void reset();
    void add_segment(double t0, double t1, const State& x);

    /// Value by key; throws std::logic_error for a key that was not registered.
    double value(const AccumulatorKey& key) const;
    /// Index lookup for pre-bound fast access; throws if missing.
    size_t index_of(const AccumulatorKey& key) const;
    double value_at(size_t index) const { return values_[index]; }
    const std::vector<AccumulatorKey>& keys() const { return keys_; }

private:
    struct Group {
        double lambda;
        uint32_t begin, end;  // key range
        double prev_exp;      // e^{lambda * t0} of the upcoming segment
    };
    std::vector<AccumulatorKey> keys_;  // sorted by (lambda, m)
    std::vector<std::vector<std::pair<uint32_t, uint32_t>>> powers_;  // sparse (species, exp)
    std::vector<Group> groups_;
    std::vector<double> values_;
};

/// Exact SSA sample path; the terminal segment extends to the horizon.
Trajectory simulate(const CompiledModel& model, const SimConfig& config, Philox4x32& rng);

/// SSA accumulating Eq.-style path integrals in-loop, without storing the
/// trajectory. Returns the terminal state; acc carries the integrals.
State simulate_with_accumulators(const CompiledModel& model, const SimConfig& config,
                                 AccumulatorSet& acc, Philox4x32& rng,
                                 uint64_t* event_count = nullptr);

/// Z = e^{lambda T} x_T^m - x_0^m - (closed-form constant part) - sum c_k A[(m_k, lambda)].
double z_realization(const State& terminal, const AccumulatorSet& acc,
                     const ConstraintExpansion& expansion);

struct BatchOptions {
    int64_t n = 0;
    uint64_t seed = 0;
    RngStage stage = RngStage::FinalBatch;
    uint64_t stream_base = 0;  // added to the trajectory index
    bool keep_samples = false;
    int workers = 0;  // 0 = OpenMP default
    uint64_t max_events = 100'000'000;
};

struct BatchResult {
    RunningStats stats;
    // populated when keep_samples is set; z is row-major n x d
    std::vector<double> v;
    std::vector<double> z;
    size_t d = 0;

    uint64_t total_events = 0;
    double sum_trajectory_seconds = 0.0;  // thread time, schedule independent
    double wall_seconds = 0.0;

    double mean_cost_per_trajectory() const;
    double z_at(size_t traj, size_t k) const { return z[traj * d + k]; }
};

BatchResult run_batch(const CompiledModel& model, const TargetQuery& query,
                      const std::vector<ConstraintExpansion>& expansions, const BatchOptions& options);

/// Reference implementation: identical contract, plain sequential loop.
BatchResult run_batch_serial(const CompiledModel& model, const TargetQuery& query,
                             const std::vector<ConstraintExpansion>& expansions,
                             const BatchOptions& options);

}  // namespace srncv
