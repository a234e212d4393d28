#include "srncv/sim.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>

namespace srncv {

CompiledModel::CompiledModel(Model model) : model_(std::move(model)) {
    model_.validate();
    const size_t n_r = model_.n_reactions();
    mass_action_.resize(n_r);
    programs_.resize(n_r);
    is_mass_action_.resize(n_r);
    changes_.resize(n_r);
    for (size_t j = 0; j < n_r; ++j) {
        const Reaction& r = model_.reactions[j];
        changes_[j] = stoich_change(r);
        is_mass_action_[j] = r.is_mass_action();
        if (is_mass_action_[j]) {
            MassActionEval ev;
            ev.scaled_c = std::get<MassAction>(r.rate_law).c;
            for (uint32_t i = 0; i < r.reactants.size(); ++i) {
                const uint32_t k = r.reactants[i];
                if (k == 0) continue;
                ev.reactants.emplace_back(i, k);
                for (uint32_t f = 2; f <= k; ++f) ev.scaled_c /= static_cast<double>(f);
            }
            mass_action_[j] = std::move(ev);
        } else {
            programs_[j] = compile_propensity(r, model_);
        }
    }
}

double CompiledModel::propensity(size_t j, const State& x) const {
    if (is_mass_action_[j]) {
        const MassActionEval& ev = mass_action_[j];
        double a = ev.scaled_c;
        for (const auto& [i, k] : ev.reactants) {
            const int64_t xi = x[i];
            if (xi < static_cast<int64_t>(k)) return 0.0;
            for (uint32_t p = 0; p < k; ++p) a *= static_cast<double>(xi - p);
        }
        return a;
    }
    // expression rates are clamped to zero when reactants are insufficient,
    // so a firing can never drive a count negative
    const Reaction& r = model_.reactions[j];
    for (size_t i = 0; i < r.reactants.size(); ++i)
        if (x[i] < static_cast<int64_t>(r.reactants[i])) return 0.0;
    const double a = evaluate(programs_[j], x, model_.parameter_values);
    return a > 0.0 ? a : 0.0;
}

double CompiledModel::total_propensity(const State& x, std::span<double> out) const {
    double total = 0.0;
    for (size_t j = 0; j < out.size(); ++j) {
        out[j] = propensity(j, x);
        total += out[j];
    }
    return total;
}

AccumulatorSet::AccumulatorSet(const std::set<AccumulatorKey>& keys) {
    keys_.assign(keys.begin(), keys.end());
    std::sort(keys_.begin(), keys_.end(), [](const AccumulatorKey& a, const AccumulatorKey& b) {
        if (a.lambda != b.lambda) return a.lambda < b.lambda;
        return a.m < b.m;
    });
    powers_.resize(keys_.size());
    values_.assign(keys_.size(), 0.0);
    for (size_t k = 0; k < keys_.size(); ++k)
        for (uint32_t i = 0; i < keys_[k].m.size(); ++i)
            if (keys_[k].m[i] > 0) powers_[k].emplace_back(i, keys_[k].m[i]);
    size_t begin = 0;
    while (begin < keys_.size()) {
        size_t end = begin;
        while (end < keys_.size() && keys_[end].lambda == keys_[begin].lambda) ++end;
        groups_.push_back({keys_[begin].lambda, static_cast<uint32_t>(begin), static_cast<uint32_t>(end), 1.0});
        begin = end;
    }
}

void AccumulatorSet::reset() {
    std::fill(values_.begin(), values_.end(), 0.0);
    for (Group& g : groups_) g.prev_exp = 1.0;  // e^{lambda * 0}
}

void AccumulatorSet::add_segment(double t0, double t1, const State& x) {
    for (Group& g : groups_) {
        double w;
        if (g.lambda == 0.0) {
            w = t1 - t0;
        } else {
            const double e1 = std::exp(g.lambda * t1);
            w = (e1 - g.prev_exp) / g.lambda;
            g.prev_exp = e1;
        }
        for (uint32_t k = g.begin; k < g.end; ++k) {
            double xm = 1.0;
            for (const auto& [i, e] : powers_[k]) {
                const double xi = static_cast<double>(x[i]);
                for (uint32_t p = 0; p < e; ++p) xm *= xi;
            }
            values_[k] += w * xm;
        }
    }
}

size_t AccumulatorSet::index_of(const AccumulatorKey& key) const {
    const double lambda = std::abs(key.lambda) < kLambdaZeroTolerance ? 0.0 : key.lambda;
    for (size_t k = 0; k < keys_.size(); ++k)
        if (keys_[k].lambda == lambda && keys_[k].m == key.m) return k;
    throw std::logic_error("AccumulatorSet: key not registered: " + key.to_string());
}

double AccumulatorSet::value(const AccumulatorKey& key) const { return values_[index_of(key)]; }

namespace {

// One SSA pass; sink(t0, t1, x) receives every constant segment including the
// final one clamped to the horizon. Draw order follows the accumulator
// algorithm: reaction index first, waiting time second.
template <typename SegmentSink>
State ssa_run(const CompiledModel& cm, const SimConfig& cfg, Philox4x32& rng, SegmentSink&& sink,
              uint64_t* event_count) {
    const size_t n_r = cm.n_reactions();
    State x = cm.model().initial_state;
    std::vector<double> props(n_r);
    double t = 0.0;
    uint64_t events = 0;
    while (t < cfg.horizon) {
        const double total = cm.total_propensity(x, props);
        if (!(total > 0.0)) {
            sink(t, cfg.horizon, x);  // absorbing state holds to the horizon
            break;
        }
        size_t k = n_r;
        {
            const double u = rng.uniform() * total;
            double acc = 0.0;
            for (size_t j = 0; j < n_r; ++j) {
                acc += props[j];
                if (u < acc) {
                    k = j;
                    break;
                }
            }
            // u can round up onto the total; fall back to the last live reaction
            if (k == n_r) {
                k = n_r - 1;
                while (k > 0 && !(props[k] > 0.0)) --k;
            }
        }
        const double dt = rng.exponential(total);
        const double t_next = t + dt;
        if (t_next >= cfg.horizon) {
            sink(t, cfg.horizon, x);
            break;
        }
        sink(t, t_next, x);
        const auto change = cm.change(k);
        for (size_t i = 0; i < x.size(); ++i) x[i] += change[i];
        t = t_next;
        if (++events > cfg.max_events)
            throw SimulationError("event cap exceeded (" + std::to_string(cfg.max_events) +
                                  " events); runaway model?");
    }
    if (event_count) *event_count = events;
    return x;
}

}  // namespace

Trajectory simulate(const CompiledModel& model, const SimConfig& config, Philox4x32& rng) {
    if (!(config.horizon > 0.0)) throw std::invalid_argument("simulate: horizon must be positive");
    Trajectory traj;
    traj.horizon = config.horizon;
    bool first = true;
    ssa_run(
        model, config, rng,
        [&](double t0, double t1, const State& x) {
            if (first) {
                traj.states.push_back(x);
                first = false;
            } else {
                traj.jump_times.push_back(t0);
                traj.states.push_back(x);
            }
            (void)t1;
        },
        nullptr);
    return traj;
}

State simulate_with_accumulators(const CompiledModel& model, const SimConfig& config,
                                 AccumulatorSet& acc, Philox4x32& rng, uint64_t* event_count) {
    if (!(config.horizon > 0.0)) throw std::invalid_argument("simulate: horizon must be positive");
    acc.reset();
    return ssa_run(
        model, config, rng, [&](double t0, double t1, const State& x) { acc.add_segment(t0, t1, x); },
        event_count);
}

double z_realization(const State& terminal, const AccumulatorSet& acc,
                     const ConstraintExpansion& e) {
    double z = e.terminal_weight * eval_monomial(terminal, e.id.m) - e.initial_value -
               e.constant_coeff * e.constant_integral;
    for (const auto& [mk, ck] : e.integral_terms) z -= ck * acc.value({mk, e.id.lambda});
    return z;
}

double BatchResult::mean_cost_per_trajectory() const {
    const int64_t n = stats.count();
    return n > 0 ? sum_trajectory_seconds / static_cast<double>(n) : 0.0;
}

namespace {

// Expansion with accumulator lookups resolved to indices.
struct BoundExpansion {
    double terminal_weight;
    double initial_value;
    double constant_part;  // constant_coeff * constant_integral
    std::vector<std::pair<uint32_t, uint32_t>> terminal_powers;
    std::vector<std::pair<size_t, double>> terms;  // (accumulator index, coefficient)
};

BatchResult run_batch_impl(const CompiledModel& model, const TargetQuery& query,
                           const std::vector<ConstraintExpansion>& expansions,
                           const BatchOptions& options, bool parallel) {
    if (options.n < 1) throw std::invalid_argument("run_batch: need at least one trajectory");
    query.validate(model.model());

    const size_t d = expansions.size();
    AccumulatorSet acc_proto(accumulator_keys(expansions));
    std::vector<BoundExpansion> bound(d);
    for (size_t c = 0; c < d; ++c) {
        const ConstraintExpansion& e = expansions[c];
        BoundExpansion b;
        b.terminal_weight = e.terminal_weight;
        b.initial_value = e.initial_value;
        b.constant_part = e.constant_coeff * e.constant_integral;
        for (uint32_t i = 0; i < e.id.m.size(); ++i)
            if (e.id.m[i] > 0) b.terminal_powers.emplace_back(i, e.id.m[i]);
        for (const auto& [mk, ck] : e.integral_terms)
            b.terms.emplace_back(acc_proto.index_of({mk, e.id.lambda}), ck);
        bound[c] = std::move(b);
    }

    SimConfig cfg;
    cfg.horizon = query.horizon;
    cfg.max_events = options.max_events;

    const int64_t n = options.n;
    std::vector<double> v(static_cast<size_t>(n));
    std::vector<double> z(static_cast<size_t>(n) * d);
    std::vector<double> cost(static_cast<size_t>(n));
    std::vector<uint64_t> events(static_cast<size_t>(n));
    std::atomic<bool> failed{false};
    std::string error_message;

    const auto body = [&](int64_t i, AccumulatorSet& acc) {
        const auto t_start = std::chrono::steady_clock::now();
        Philox4x32 rng(options.seed, options.stage, options.stream_base + static_cast<uint64_t>(i));
        uint64_t ev = 0;
        const State terminal = simulate_with_accumulators(model, cfg, acc, rng, &ev);
        v[static_cast<size_t>(i)] = target_value(terminal, query);
        for (size_t c = 0; c < d; ++c) {
            const BoundExpansion& b = bound[c];
            double xm = 1.0;
            for (const auto& [s, e] : b.terminal_powers) {
                const double xs = static_cast<double>(terminal[s]);
                for (uint32_t p = 0; p < e; ++p) xm *= xs;
            }
            double zi = b.terminal_weight * xm - b.initial_value - b.constant_part;
            for (const auto& [idx, ck] : b.terms) zi -= ck * acc.value_at(idx);
            z[static_cast<size_t>(i) * d + c] = zi;
        }
        events[static_cast<size_t>(i)] = ev;
        cost[static_cast<size_t>(i)] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };

    const double wall_start = omp_get_wtime();
    if (parallel) {
#pragma omp parallel num_threads(options.workers > 0 ? options.workers : omp_get_max_threads())
        {
            AccumulatorSet acc = acc_proto;
#pragma omp for schedule(dynamic, 16)
            for (int64_t i = 0; i < n; ++i) {
                if (failed.load(std::memory_order_relaxed)) continue;
                try {
                    body(i, acc);
                } catch (const std::exception& ex) {
#pragma omp critical
                    {
                        if (!failed.exchange(true)) error_message = ex.what();
                    }
                }
            }
        }
        if (failed.load()) throw SimulationError(error_message);
    } else {
        AccumulatorSet acc = acc_proto;
        for (int64_t i = 0; i < n; ++i) body(i, acc);
    }

    BatchResult result;
    result.d = d;
    result.wall_seconds = omp_get_wtime() - wall_start;
    result.stats = RunningStats(d);
    for (int64_t i = 0; i < n; ++i) {
        result.stats.push(v[static_cast<size_t>(i)],
                          std::span<const double>(z.data() + static_cast<size_t>(i) * d, d));
        result.sum_trajectory_seconds += cost[static_cast<size_t>(i)];
        result.total_events += events[static_cast<size_t>(i)];
    }
    if (options.keep_samples) {
        result.v = std::move(v);
        result.z = std::move(z);
    }
    return result;
}

}  // namespace

BatchResult run_batch(const CompiledModel& model, const TargetQuery& query,
                      const std::vector<ConstraintExpansion>& expansions,
                      const BatchOptions& options) {
    return run_batch_impl(model, query, expansions, options, true);
}

BatchResult run_batch_serial(const CompiledModel& model, const TargetQuery& query,
                             const std::vector<ConstraintExpansion>& expansions,
                             const BatchOptions& options) {
    return run_batch_impl(model, query, expansions, options, false);
}

}  // namespace srncv
