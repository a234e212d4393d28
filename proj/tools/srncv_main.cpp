// Command-line front end: estimation with control variates, benchmarking
// against the crude estimator, oracle validation, and a couple of debugging
// commands. JSON goes to stdout for single estimates, CSV for benchmark
// sweeps; exit code 1 flags input/parse problems, 2 runtime failures.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "srncv/bench.hpp"
#include "srncv/builtin_models.hpp"
#include "srncv/fsp.hpp"
#include "srncv/parser.hpp"
#include "srncv/selection.hpp"

using nlohmann::json;
using namespace srncv;

namespace {

constexpr const char* kResultSchema = "srncv/result-v1";
constexpr const char* kValidateSchema = "srncv/validate-v1";

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelArgs {
    std::string file;
    std::string builtin;
};

struct QueryArgs {
    std::string mean_species;
    std::vector<std::string> prob_le;  // species, level
    double horizon = 0.0;
};

struct LoadedModel {
    Model model;
    std::string name;
};

LoadedModel load_model(const ModelArgs& args) {
    if (!args.builtin.empty() && !args.file.empty())
        throw InputError("use either --model or --builtin, not both");
    if (!args.builtin.empty()) {
        if (!is_builtin_model(args.builtin)) throw InputError("unknown built-in model '" + args.builtin + "'");
        return {builtin_model(args.builtin), args.builtin};
    }
    if (args.file.empty()) throw InputError("one of --model or --builtin is required");
    std::ifstream in(args.file);
    if (!in) throw InputError("cannot open model file '" + args.file + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return {parse_model(buf.str()), args.file};
}

TargetQuery make_query(const Model& model, const QueryArgs& args) {
    if (args.mean_species.empty() == args.prob_le.empty())
        throw InputError("exactly one of --mean or --prob-le is required");
    if (!(args.horizon > 0.0)) throw InputError("--horizon must be positive");
    if (!args.mean_species.empty()) {
        auto idx = model.species_index(args.mean_species);
        if (!idx) throw InputError("unknown species '" + args.mean_species + "'");
        return TargetQuery::mean(*idx, args.horizon);
    }
    auto idx = model.species_index(args.prob_le[0]);
    if (!idx) throw InputError("unknown species '" + args.prob_le[0] + "'");
    int64_t level = 0;
    try {
        level = std::stoll(args.prob_le[1]);
    } catch (const std::exception&) {
        throw InputError("--prob-le level must be an integer");
    }
    if (level < 0) throw InputError("--prob-le level must be non-negative");
    return TargetQuery::threshold_probability(*idx, level, args.horizon);
}

json query_json(const Model& model, const TargetQuery& q) {
    json j;
    j["species"] = model.species[q.species];
    j["horizon"] = q.horizon;
    if (q.kind == TargetQuery::Kind::Mean) {
        j["kind"] = "mean";
    } else {
        j["kind"] = "prob_le";
        j["level"] = q.level;
    }
    return j;
}

json config_json(const SelectionConfig& c) {
    return json{{"n", c.n},           {"d", c.d},           {"n_max", c.n_max},
                {"n_lambda", c.n_lambda}, {"n_c", c.n_c},   {"n_s", c.n_s},
                {"n_r", c.n_r},       {"epsilon", c.epsilon}, {"step_sd", c.step_sd},
                {"prior_mean", c.prior_mean}, {"prior_sd", c.prior_sd}};
}

json id_json(const ControlVariateId& id) {
    return json{{"m", id.m}, {"lambda", id.lambda}};
}

void add_selection_flags(CLI::App* cmd, SelectionConfig& config) {
    cmd->add_option("--n", config.n, "final estimation trajectories");
    cmd->add_option("--pilot-d", config.d, "pilot trajectories per evaluation");
    cmd->add_option("--n-max", config.n_max, "maximum constraint moment order");
    cmd->add_option("--n-lambda", config.n_lambda, "initial lambda samples");
    cmd->add_option("--n-c", config.n_c, "candidates resampled per round");
    cmd->add_option("--n-s", config.n_s, "descendants per resampled candidate");
    cmd->add_option("--n-r", config.n_r, "resampling rounds");
    cmd->add_option("--epsilon", config.epsilon, "greedy stop threshold");
    cmd->add_option("--step-sd", config.step_sd, "resampling step standard deviation");
    cmd->add_option("--max-events", config.max_events, "per-trajectory event cap");
}

int default_workers() {
    if (const char* env = std::getenv("CV_SSA_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    return 0;
}

json pipeline_json(const LoadedModel& lm, const TargetQuery& query, const SelectionConfig& config,
                   uint64_t seed, const PipelineResult& res, bool audit) {
    json j;
    j["schema"] = kResultSchema;
    j["model"] = lm.name;
    j["query"] = query_json(lm.model, query);
    j["seed"] = seed;
    j["config"] = config_json(config);
    j["crude"] = {{"estimate", res.crude_mean}, {"se", res.crude_se}};
    j["lcv"] = {{"estimate", res.estimate.point},
                {"se", res.estimate.se()},
                {"r_squared", res.estimate.r_squared},
                {"beta", res.estimate.beta},
                {"d", res.estimate.d},
                {"n", res.estimate.n}};
    j["selected"] = json::array();
    for (size_t i = 0; i < res.selected_ids.size(); ++i) {
        json s = id_json(res.selected_ids[i]);
        s["gamma_v"] = res.selection.picks[i].gamma_v;
        s["score"] = res.selection.picks[i].score;
        j["selected"].push_back(s);
    }
    j["dropped"] = json::array();
    for (const auto& id : res.dropped_ids) j["dropped"].push_back(id_json(id));
    j["variance_reduction"] = res.estimate.variance_reduction();
    j["slowdown"] = res.efficiency.slowdown();
    j["efficiency"] = res.efficiency.efficiency_value;
    j["timing"] = {{"total_s", res.total_seconds},
                   {"pilot_s", res.pilot_seconds},
                   {"covariance_s", res.covariance_seconds},
                   {"final_s", res.final_seconds},
                   {"calibration_s", res.calibration_seconds},
                   {"c0_per_trajectory_s", res.efficiency.c0},
                   {"c1_per_trajectory_s", res.efficiency.c1}};
    j["total_events"] = res.total_events;
    if (!res.warnings.empty()) j["warnings"] = res.warnings;
    if (audit) {
        json rounds = json::array();
        for (const RoundAudit& r : res.audit) {
            json added = json::array();
            for (size_t i = 0; i < r.added.size(); ++i) {
                json a = id_json(r.added[i]);
                a["pilot_rho"] = r.pilot_rho[i];
                added.push_back(a);
            }
            rounds.push_back({{"round", r.round}, {"added", added}});
        }
        json exit_scores = json::array();
        for (double s : res.selection.exit_scores) exit_scores.push_back(s);
        j["audit"] = {{"rounds", rounds}, {"exit_scores", exit_scores}};
    }
    return j;
}

int cmd_estimate(const ModelArgs& margs, const QueryArgs& qargs, SelectionConfig config,
                 uint64_t seed, bool audit) {
    const LoadedModel lm = load_model(margs);
    const TargetQuery query = make_query(lm.model, qargs);
    const PipelineResult res = run_pipeline(lm.model, query, config, seed);
    std::cout << pipeline_json(lm, query, config, seed, res, audit).dump(2) << "\n";
    return 0;
}

int cmd_bench(const ModelArgs& margs, const QueryArgs& qargs, SelectionConfig config, uint64_t seed,
              int repetitions, const std::vector<int64_t>& sweep_levels) {
    const LoadedModel lm = load_model(margs);
    std::vector<TargetQuery> queries;
    if (sweep_levels.empty()) {
        queries.push_back(make_query(lm.model, qargs));
    } else {
        QueryArgs base = qargs;
        if (base.prob_le.empty())
            throw InputError("--sweep-le requires --prob-le to name the species");
        for (int64_t level : sweep_levels) {
            base.prob_le[1] = std::to_string(level);
            queries.push_back(make_query(lm.model, base));
        }
    }

    std::cout << "model,kind,species,level,horizon,estimator,rep,estimate,cost_seconds,d_selected,n\n";
    json summaries = json::array();
    for (const TargetQuery& query : queries) {
        const BenchSummary s = run_bench(lm.model, query, config, repetitions, seed);
        const std::string kind = query.kind == TargetQuery::Kind::Mean ? "mean" : "prob_le";
        const std::string species = lm.model.species[query.species];
        const std::string level =
            query.kind == TargetQuery::Kind::Mean ? "" : std::to_string(query.level);
        for (size_t r = 0; r < s.crude.size(); ++r)
            std::cout << lm.name << "," << kind << "," << species << "," << level << ","
                      << query.horizon << ",crude," << r << "," << s.crude[r].estimate << ","
                      << s.crude[r].cost_seconds << ",0," << config.n << "\n";
        for (size_t r = 0; r < s.cv.size(); ++r)
            std::cout << lm.name << "," << kind << "," << species << "," << level << ","
                      << query.horizon << ",cv," << r << "," << s.cv[r].estimate << ","
                      << s.cv[r].cost_seconds << "," << s.cv[r].d_selected << "," << config.n << "\n";
        json sj;
        sj["model"] = lm.name;
        sj["query"] = query_json(lm.model, query);
        sj["repetitions"] = repetitions;
        sj["n"] = config.n;
        sj["mean_estimate_crude"] = s.mean_estimate_crude;
        sj["mean_estimate_cv"] = s.mean_estimate_cv;
        sj["var_crude"] = s.var_crude;
        sj["var_cv"] = s.var_cv;
        sj["reduction"] = s.reduction;
        sj["c0"] = s.c0;
        sj["c1"] = s.c1;
        sj["slowdown"] = s.slowdown;
        sj["efficiency"] = s.efficiency;
        sj["mean_selected"] = s.mean_selected;
        summaries.push_back(sj);
    }
    std::cerr << summaries.dump(2) << "\n";
    return 0;
}

int cmd_validate(const ModelArgs& margs, const QueryArgs& qargs,
                 const std::vector<std::string>& bounds, double mass_tol, int64_t ssa_n,
                 uint64_t seed, int workers) {
    const LoadedModel lm = load_model(margs);
    const TargetQuery query = make_query(lm.model, qargs);

    TruncationBox box;
    box.mass_tolerance = mass_tol;
    box.upper.assign(lm.model.n_species(), 0);
    for (size_t i = 0; i < lm.model.n_species(); ++i)
        box.upper[i] = std::max<int64_t>(2 * lm.model.initial_state[i], 100);
    if (lm.name == "birthdeath") box.upper = {200};
    if (lm.name == "dimerization") box.upper = {400, 200};
    for (const std::string& b : bounds) {
        const auto eq = b.find('=');
        if (eq == std::string::npos) throw InputError("--bound expects SPECIES=N");
        const auto idx = lm.model.species_index(b.substr(0, eq));
        if (!idx) throw InputError("unknown species in --bound: " + b.substr(0, eq));
        box.upper[*idx] = std::stoll(b.substr(eq + 1));
    }

    const FspResult oracle = fsp_transient(lm.model, box, query.horizon);
    double oracle_value = query.kind == TargetQuery::Kind::Mean
                              ? [&] {
                                    MultiIndex m(lm.model.n_species(), 0);
                                    m[query.species] = 1;
                                    return oracle.moment(m);
                                }()
                              : oracle.prob_le(query.species, query.level);

    const CompiledModel cm(lm.model);
    BatchOptions opt;
    opt.n = ssa_n;
    opt.seed = seed;
    opt.stage = RngStage::Validation;
    opt.workers = workers;
    const BatchResult batch = run_batch(cm, query, {}, opt);
    const double ssa_mean = batch.stats.mean_v();
    const double ssa_se = std::sqrt(batch.stats.var_v() / static_cast<double>(ssa_n));

    json j;
    j["schema"] = kValidateSchema;
    j["model"] = lm.name;
    j["query"] = query_json(lm.model, query);
    j["oracle_value"] = oracle_value;
    j["lost_mass"] = oracle.lost_mass;
    j["ssa_estimate"] = ssa_mean;
    j["ssa_se"] = ssa_se;
    j["gap"] = ssa_mean - oracle_value;
    j["gap_in_se"] = ssa_se > 0.0 ? (ssa_mean - oracle_value) / ssa_se : 0.0;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_trajectory(const ModelArgs& margs, double horizon, uint64_t seed, std::ostream& out) {
    const LoadedModel lm = load_model(margs);
    if (!(horizon > 0.0)) throw InputError("--horizon must be positive");
    const CompiledModel cm(lm.model);
    SimConfig cfg;
    cfg.horizon = horizon;
    Philox4x32 rng(seed, RngStage::Validation, 0);
    const Trajectory traj = simulate(cm, cfg, rng);

    out << "time";
    for (const std::string& s : lm.model.species) out << "," << s;
    out << "\n";
    for (size_t i = 0; i < traj.states.size(); ++i) {
        out << (i == 0 ? 0.0 : traj.jump_times[i - 1]);
        for (int64_t c : traj.states[i]) out << "," << c;
        out << "\n";
    }
    return 0;
}

int cmd_constraints(const ModelArgs& margs, double horizon, const std::vector<double>& lambdas,
                    uint32_t n_max) {
    const LoadedModel lm = load_model(margs);
    if (!(horizon > 0.0)) throw InputError("--horizon must be positive");
    SelectionConfig config;
    config.n_max = n_max;
    config.n_lambda = 0;
    Philox4x32 rng(0, RngStage::LambdaInit, 0);
    CandidatePool pool = init_pool(lm.model, horizon, config, rng);
    std::vector<ConstraintExpansion> expansions;
    for (const Candidate& c : pool.items)
        if (c.id.lambda == 0.0) expansions.push_back(c.expansion);
    for (double lambda : lambdas)
        for (const Candidate& c : pool.items)
            if (c.id.lambda == 0.0)
                expansions.push_back(constraint_expansion(lm.model, {c.id.m, lambda}, horizon));
    for (const std::string& w : pool.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << describe_expansions(lm.model, expansions);
    return 0;
}

int cmd_models() {
    for (const BuiltinModel& b : builtin_models())
        std::cout << b.name << "\t" << b.description << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic reaction network estimation with moment-constraint control variates"};
    app.require_subcommand(1);

    ModelArgs margs;
    QueryArgs qargs;
    SelectionConfig config;
    config.workers = default_workers();
    uint64_t seed = 0;
    bool audit = false;
    int repetitions = 10;
    std::vector<int64_t> sweep_levels;
    std::vector<std::string> bounds;
    double mass_tol = 1e-4;
    int64_t ssa_n = 2000;
    double horizon = 0.0;
    std::vector<double> lambdas;
    uint32_t n_max = 1;
    std::string out_file;

    const auto add_model_flags = [&](CLI::App* cmd) {
        cmd->add_option("--model", margs.file, "model file (.srn)");
        cmd->add_option("--builtin", margs.builtin, "built-in model name (see `models`)");
    };
    const auto add_query_flags = [&](CLI::App* cmd) {
        cmd->add_option("--mean", qargs.mean_species, "estimate the mean of this species");
        cmd->add_option("--prob-le", qargs.prob_le, "estimate P(count <= LEVEL): SPECIES LEVEL")
            ->expected(2);
        cmd->add_option("--horizon", qargs.horizon, "time horizon T")->required();
    };

    CLI::App* est = app.add_subcommand("estimate", "control-variate estimate of a target quantity");
    add_model_flags(est);
    add_query_flags(est);
    add_selection_flags(est, config);
    est->add_option("--seed", seed, "master seed");
    est->add_option("--workers", config.workers, "parallel trajectory workers");
    est->add_flag("--audit", audit, "include the selection audit trail in the output");

    CLI::App* bench = app.add_subcommand("bench", "repeated estimations; CSV rows + JSON summary");
    add_model_flags(bench);
    add_query_flags(bench);
    add_selection_flags(bench, config);
    bench->add_option("--seed", seed, "master seed");
    bench->add_option("--workers", config.workers, "parallel trajectory workers");
    bench->add_option("--repetitions", repetitions, "estimations per estimator")
        ->check(CLI::Range(2, 1000000));
    bench->add_option("--sweep-le", sweep_levels, "threshold sweep levels (with --prob-le)");

    CLI::App* val = app.add_subcommand("validate", "compare a quick SSA estimate with the oracle");
    add_model_flags(val);
    add_query_flags(val);
    val->add_option("--bound", bounds, "window bound SPECIES=N (repeatable)");
    val->add_option("--mass-tol", mass_tol, "acceptable lost probability mass");
    val->add_option("--ssa-n", ssa_n, "trajectories for the SSA cross-check");
    val->add_option("--seed", seed, "master seed");
    int val_workers = default_workers();
    val->add_option("--workers", val_workers, "parallel trajectory workers");

    CLI::App* traj = app.add_subcommand("trajectory", "simulate one path and dump it as CSV");
    add_model_flags(traj);
    traj->add_option("--horizon", horizon, "time horizon T")->required();
    traj->add_option("--seed", seed, "master seed");
    traj->add_option("--out", out_file, "output file (default stdout)");

    CLI::App* cons = app.add_subcommand("constraints", "dump constraint expansions");
    add_model_flags(cons);
    cons->add_option("--horizon", horizon, "time horizon T")->required();
    cons->add_option("--lambda", lambdas, "extra time-weighting values (0 always shown)");
    cons->add_option("--n-max", n_max, "maximum moment order");

    app.add_subcommand("models", "list built-in models");

    CLI11_PARSE(app, argc, argv);

    try {
        if (est->parsed()) return cmd_estimate(margs, qargs, config, seed, audit);
        if (bench->parsed()) return cmd_bench(margs, qargs, config, seed, repetitions, sweep_levels);
        if (val->parsed())
            return cmd_validate(margs, qargs, bounds, mass_tol, ssa_n, seed, val_workers);
        if (traj->parsed()) {
            if (out_file.empty()) return cmd_trajectory(margs, horizon, seed, std::cout);
            std::ofstream out(out_file);
            if (!out) throw InputError("cannot open output file '" + out_file + "'");
            return cmd_trajectory(margs, horizon, seed, out);
        }
        if (cons->parsed()) return cmd_constraints(margs, horizon, lambdas, n_max);
        return cmd_models();
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
}
