#include "srncv/selection.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

namespace srncv {

void SelectionConfig::validate() const {
    if (n < 2) throw std::invalid_argument("SelectionConfig: n must be at least 2");
    if (d < 2) throw std::invalid_argument("SelectionConfig: d must be at least 2");
    if (n_max < 1) throw std::invalid_argument("SelectionConfig: n_max must be at least 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("SelectionConfig: epsilon must be positive");
    if (!(step_sd > 0.0)) throw std::invalid_argument("SelectionConfig: step_sd must be positive");
    if (!(prior_sd > 0.0)) throw std::invalid_argument("SelectionConfig: prior_sd must be positive");
}

bool CandidatePool::add(Candidate candidate) {
    if (!ids.insert(candidate.id).second) return false;
    items.push_back(std::move(candidate));
    return true;
}

namespace {

// all multi-indices with 1 <= |m| <= n_max, in lexicographic-ish order
std::vector<MultiIndex> enumerate_moments(size_t n_species, uint32_t n_max) {
    std::vector<MultiIndex> out;
    MultiIndex m(n_species, 0);
    const auto recurse = [&](auto&& self, size_t i, uint32_t remaining) -> void {
        if (i == n_species) {
            if (order(m) >= 1) out.push_back(m);
            return;
        }
        for (uint32_t e = 0; e <= remaining; ++e) {
            m[i] = e;
            self(self, i + 1, remaining - e);
        }
        m[i] = 0;
    };
    recurse(recurse, 0, n_max);
    std::sort(out.begin(), out.end());
    return out;
}

double normalize_lambda(double lambda) {
    return std::abs(lambda) < kLambdaZeroTolerance ? 0.0 : lambda;
}

}  // namespace

CandidatePool init_pool(const Model& model, double horizon, const SelectionConfig& config,
                        Philox4x32& rng) {
    CandidatePool pool;
    std::vector<double> lambdas;
    lambdas.push_back(0.0);  // the neutral weighting is always included
    for (uint32_t i = 0; i < config.n_lambda; ++i)
        lambdas.push_back(normalize_lambda(config.prior_mean + config.prior_sd * rng.normal()));

    for (const MultiIndex& m : enumerate_moments(model.n_species(), config.n_max)) {
        bool usable = true;
        try {
            moment_drift(model, m);
        } catch (const PolynomialityError& err) {
            pool.warnings.push_back("skipping constraints for moment " +
                                    Polynomial::monomial(m, 1.0).to_string(model.species) + ": " +
                                    err.what());
            usable = false;
        }
        if (!usable) continue;
        for (double lambda : lambdas) {
            Candidate c;
            c.id = ControlVariateId{m, lambda};
            c.expansion = constraint_expansion(model, c.id, horizon);
            c.round_added = 0;
            pool.add(std::move(c));
        }
    }
    return pool;
}

size_t weighted_index(std::span<const double> weights, double u) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("weighted_index: weights must have positive sum");
    const double target = u * total;
    double acc = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (target < acc) return i;
    }
    return weights.size() - 1;
}

std::vector<Candidate> resample_round(const CandidatePool& pool, const Model& model, double horizon,
                                      const SelectionConfig& config, Philox4x32& rng,
                                      uint32_t round) {
    std::vector<double> weights(pool.size());
    for (size_t i = 0; i < pool.size(); ++i) weights[i] = pool.items[i].gamma_v;

    std::vector<Candidate> fresh;
    std::set<ControlVariateId> seen = pool.ids;
    for (uint32_t c = 0; c < config.n_c; ++c) {
        const size_t parent_idx = weighted_index(weights, rng.uniform());
        const Candidate& parent = pool.items[parent_idx];
        for (uint32_t s = 0; s < config.n_s; ++s) {
            const double lambda = normalize_lambda(parent.id.lambda + config.step_sd * rng.normal());
            ControlVariateId id{parent.id.m, lambda};
            if (!seen.insert(id).second) continue;  // merged with an existing candidate
            Candidate child;
            child.id = id;
            child.expansion = constraint_expansion(model, id, horizon);
            child.round_added = round;
            fresh.push_back(std::move(child));
        }
    }
    return fresh;
}

SelectionOutcome greedy_select(const CandidatePool& pool, const RunningStats& cov_stats,
                               double epsilon) {
    const size_t p = pool.size();
    if (cov_stats.dim() != p)
        throw std::invalid_argument("greedy_select: covariance stats do not cover the pool");

    SelectionOutcome out;
    out.gamma_v.resize(p);
    std::vector<double> score(p);
    for (size_t i = 0; i < p; ++i) {
        out.gamma_v[i] = improvement_ratio(cov_stats.corr_zv(i));
        score[i] = out.gamma_v[i];
    }
    std::vector<bool> selected(p, false);

    while (true) {
        size_t best = p;
        for (size_t i = 0; i < p; ++i) {
            if (selected[i]) continue;
            if (best == p || score[i] > score[best]) best = i;
        }
        if (best == p || !(score[best] > epsilon)) break;

        selected[best] = true;
        out.picks.push_back({best, pool.items[best].id, out.gamma_v[best], score[best]});
        // discount every remaining candidate by its unexplained fraction
        // against the newly selected one
        for (size_t i = 0; i < p; ++i) {
            if (selected[i]) continue;
            score[i] *= 1.0 / improvement_ratio(cov_stats.corr_zz(i, best));
        }
    }
    out.exit_scores = std::move(score);
    return out;
}

namespace {

constexpr uint64_t kRoundStreamStride = 1ull << 40;

struct PilotOutcome {
    double seconds = 0.0;
    uint64_t events = 0;
};

// evaluates candidates [begin, end) of the pool with d fresh trajectories
PilotOutcome pilot_evaluate(CandidatePool& pool, size_t begin, size_t end,
                            const CompiledModel& cm, const TargetQuery& query,
                            const SelectionConfig& config, uint64_t seed, uint32_t round,
                            std::vector<RoundAudit>& audit) {
    RoundAudit entry;
    entry.round = round;
    PilotOutcome outcome;
    if (begin == end) {
        audit.push_back(std::move(entry));
        return outcome;
    }
    std::vector<ConstraintExpansion> expansions;
    for (size_t i = begin; i < end; ++i) expansions.push_back(pool.items[i].expansion);

    BatchOptions opt;
    opt.n = config.d;
    opt.seed = seed;
    opt.stage = RngStage::PilotBatch;
    opt.stream_base = kRoundStreamStride * round;
    opt.workers = config.workers;
    opt.max_events = config.max_events;
    const BatchResult batch = run_batch(cm, query, expansions, opt);
    outcome.seconds = batch.sum_trajectory_seconds;
    outcome.events = batch.total_events;

    for (size_t i = begin; i < end; ++i) {
        Candidate& c = pool.items[i];
        c.rho_v = batch.stats.corr_zv(i - begin);
        c.gamma_v = improvement_ratio(c.rho_v);
        entry.added.push_back(c.id);
        entry.pilot_rho.push_back(c.rho_v);
    }
    audit.push_back(std::move(entry));
    return outcome;
}

}  // namespace

PipelineResult run_pipeline(const Model& model, const TargetQuery& query,
                            const SelectionConfig& config, uint64_t seed) {
    config.validate();
    const double wall_start = omp_get_wtime();
    const CompiledModel cm(model);
    query.validate(cm.model());

    PipelineResult result;

    // initialization: lambda draws and the base candidate pool
    Philox4x32 init_rng(seed, RngStage::LambdaInit, 0);
    CandidatePool pool = init_pool(model, query.horizon, config, init_rng);
    result.warnings = pool.warnings;

    // pilot stats for the initial pool, then the resampling rounds; each
    // round only evaluates the candidates it added
    {
        const PilotOutcome p0 =
            pilot_evaluate(pool, 0, pool.size(), cm, query, config, seed, 0, result.audit);
        result.pilot_seconds += p0.seconds;
        result.total_events += p0.events;
    }
    for (uint32_t round = 1; round <= config.n_r; ++round) {
        if (pool.size() == 0) break;
        Philox4x32 rng(seed, RngStage::ResampleDraw, round);
        std::vector<Candidate> fresh = resample_round(pool, model, query.horizon, config, rng, round);
        const size_t begin = pool.size();
        for (Candidate& c : fresh) pool.add(std::move(c));
        const PilotOutcome pr =
            pilot_evaluate(pool, begin, pool.size(), cm, query, config, seed, round, result.audit);
        result.pilot_seconds += pr.seconds;
        result.total_events += pr.events;
    }

    // covariance estimation across the whole pool, then greedy selection
    if (pool.size() > 0) {
        std::vector<ConstraintExpansion> expansions;
        for (const Candidate& c : pool.items) expansions.push_back(c.expansion);
        BatchOptions opt;
        opt.n = 5 * config.d;
        opt.seed = seed;
        opt.stage = RngStage::CovarianceBatch;
        opt.workers = config.workers;
        opt.max_events = config.max_events;
        const BatchResult cov_batch = run_batch(cm, query, expansions, opt);
        result.covariance_seconds = cov_batch.sum_trajectory_seconds;
        result.total_events += cov_batch.total_events;
        result.selection = greedy_select(pool, cov_batch.stats, config.epsilon);
    }

    // final estimation with only the selected accumulators
    std::vector<ConstraintExpansion> final_expansions;
    for (const SelectionPick& pick : result.selection.picks) {
        final_expansions.push_back(pool.items[pick.pool_index].expansion);
        result.selected_ids.push_back(pick.id);
    }
    BatchOptions opt;
    opt.n = config.n;
    opt.seed = seed;
    opt.stage = RngStage::FinalBatch;
    opt.workers = config.workers;
    opt.max_events = config.max_events;
    const BatchResult final_batch = run_batch(cm, query, final_expansions, opt);
    result.final_seconds = final_batch.sum_trajectory_seconds;
    result.total_events += final_batch.total_events;
    result.final_n = config.n;

    result.estimate = lcv_estimate(final_batch.stats);
    for (size_t idx : result.estimate.dropped)
        result.dropped_ids.push_back(result.selected_ids[idx]);
    result.crude_mean = final_batch.stats.mean_v();
    result.crude_se = std::sqrt(result.estimate.variance_crude);

    // baseline cost calibration: a small accumulator-free batch
    {
        BatchOptions cal;
        cal.n = std::min<int64_t>(config.n, 1000);
        cal.seed = seed;
        cal.stage = RngStage::Calibration;
        cal.workers = config.workers;
        cal.max_events = config.max_events;
        const BatchResult cal_batch = run_batch(cm, query, {}, cal);
        result.calibration_seconds = cal_batch.sum_trajectory_seconds;
        result.total_events += cal_batch.total_events;

        const double c0 = cal_batch.mean_cost_per_trajectory();
        // CV cost per sample amortizes the whole search over the final batch
        const double search_seconds =
            result.pilot_seconds + result.covariance_seconds + result.final_seconds;
        const double c1 = search_seconds / static_cast<double>(config.n);
        result.efficiency.c0 = c0;
        result.efficiency.c1 = c1;
        const double var_ratio = result.estimate.variance_lcv > 0.0
                                     ? result.estimate.variance_crude / result.estimate.variance_lcv
                                     : kImprovementCap;
        result.efficiency.variance_ratio = var_ratio;
        result.efficiency.efficiency_value =
            (c0 > 0.0 && c1 > 0.0) ? (c0 / c1) * var_ratio : 0.0;
    }

    result.total_seconds = omp_get_wtime() - wall_start;
    return result;
}

}  // namespace srncv
