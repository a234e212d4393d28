#include "srncv/fsp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

#include "srncv/sim.hpp"

namespace srncv {

namespace {

struct StateHash {
    size_t operator()(const State& s) const {
        size_t h = 0xcbf29ce484222325ull;
        for (int64_t v : s) {
            h ^= static_cast<size_t>(v);
            h *= 0x100000001b3ull;
        }
        return h;
    }
};

}  // namespace

FspSolver::FspSolver(const Model& model, const TruncationBox& box) {
    model.validate();
    if (box.upper.size() != model.n_species())
        throw std::invalid_argument("TruncationBox: bound arity mismatch");
    for (size_t i = 0; i < box.upper.size(); ++i)
        if (box.upper[i] < model.initial_state[i])
            throw std::invalid_argument("TruncationBox: bound below the initial state");
    build(model, box);
}

void FspSolver::build(const Model& model, const TruncationBox& box) {
    const CompiledModel cm(model);
    const size_t n_r = model.n_reactions();

    std::unordered_map<State, uint32_t, StateHash> index;
    std::deque<uint32_t> frontier;
    states_.push_back(model.initial_state);
    index.emplace(model.initial_state, 0);
    frontier.push_back(0);

    // (source, rate, target) with target == UINT32_MAX meaning the sink
    std::vector<std::tuple<uint32_t, double, uint32_t>> edges;
    while (!frontier.empty()) {
        const uint32_t si = frontier.front();
        frontier.pop_front();
        const State x = states_[si];
        for (size_t j = 0; j < n_r; ++j) {
            const double a = cm.propensity(j, x);
            if (!(a > 0.0)) {
                if (a < 0.0) throw std::invalid_argument("FSP: negative propensity encountered");
                continue;
            }
            State y = x;
            const auto change = cm.change(j);
            bool inside = true;
            for (size_t i = 0; i < y.size(); ++i) {
                y[i] += change[i];
                if (y[i] < 0 || y[i] > box.upper[i]) inside = false;
            }
            if (!inside) {
                edges.emplace_back(si, a, UINT32_MAX);
                continue;
            }
            auto [it, fresh] = index.emplace(y, static_cast<uint32_t>(states_.size()));
            if (fresh) {
                states_.push_back(std::move(y));
                if (states_.size() > box.max_states)
                    throw FspWindowError("FSP: reachable window exceeds " +
                                         std::to_string(box.max_states) +
                                         " states; model out of FSP scope");
                frontier.push_back(it->second);
            }
            edges.emplace_back(si, a, it->second);
        }
    }

    const size_t n = states_.size();
    total_out_.assign(n, 0.0);
    std::vector<size_t> counts(n, 0);
    for (const auto& [s, a, t] : edges) {
        total_out_[s] += a;
        if (t == UINT32_MAX)
            sink_edges_.emplace_back(s, a);
        else
            ++counts[t];
    }
    in_offsets_.assign(n + 1, 0);
    for (size_t i = 0; i < n; ++i) in_offsets_[i + 1] = in_offsets_[i] + counts[i];
    in_edges_.resize(in_offsets_[n]);
    std::vector<size_t> cursor(in_offsets_.begin(), in_offsets_.end() - 1);
    for (const auto& [s, a, t] : edges)
        if (t != UINT32_MAX) in_edges_[cursor[t]++] = {s, a};

    y_.assign(n + 1, 0.0);
    y_[0] = 1.0;  // Dirac initial condition at the BFS root
    double max_rate = 0.0;
    for (double r : total_out_) max_rate = std::max(max_rate, r);
    h_ = max_rate > 0.0 ? 0.1 / max_rate : 1.0;
    for (auto& k : k_) k.assign(n + 1, 0.0);
    y_tmp_.assign(n + 1, 0.0);
    y_err_.assign(n + 1, 0.0);
}

void FspSolver::derivative(const std::vector<double>& y, std::vector<double>& dy) const {
    const int64_t n = static_cast<int64_t>(states_.size());
#pragma omp parallel for schedule(static)
    for (int64_t t = 0; t < n; ++t) {
        double acc = -total_out_[static_cast<size_t>(t)] * y[static_cast<size_t>(t)];
        const size_t begin = in_offsets_[static_cast<size_t>(t)], end = in_offsets_[static_cast<size_t>(t) + 1];
        for (size_t e = begin; e < end; ++e) acc += in_edges_[e].second * y[in_edges_[e].first];
        dy[static_cast<size_t>(t)] = acc;
    }
    double lost = 0.0;
    for (const auto& [s, a] : sink_edges_) lost += a * y[s];
    dy[static_cast<size_t>(n)] = lost;
}

void FspSolver::integrate_to(double t_target) {
    if (t_target < t_) throw std::invalid_argument("FspSolver: cannot integrate backwards");

    // Dormand-Prince 5(4) pair
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double d1 = 71.0 / 57600, d3 = -71.0 / 16695, d4 = 71.0 / 1920,
                            d5 = -17253.0 / 339200, d6 = 22.0 / 525, d7 = -1.0 / 40;
    constexpr double tol = 1e-8;

    const size_t len = y_.size();
    const auto axpy_eval = [&](const std::vector<std::pair<const std::vector<double>*, double>>& sum,
                               double h, std::vector<double>& k_out) {
        const int64_t n = static_cast<int64_t>(len);
#pragma omp parallel for schedule(static)
        for (int64_t i = 0; i < n; ++i) {
            double acc = y_[static_cast<size_t>(i)];
            for (const auto& [vec, coeff] : sum) acc += h * coeff * (*vec)[static_cast<size_t>(i)];
            y_tmp_[static_cast<size_t>(i)] = acc;
        }
        derivative(y_tmp_, k_out);
    };

    while (t_ < t_target) {
        if (!have_k1_) {
            derivative(y_, k_[0]);
            have_k1_ = true;
        }
        const double h = std::min(h_, t_target - t_);
        axpy_eval({{&k_[0], a21}}, h, k_[1]);
        axpy_eval({{&k_[0], a31}, {&k_[1], a32}}, h, k_[2]);
        axpy_eval({{&k_[0], a41}, {&k_[1], a42}, {&k_[2], a43}}, h, k_[3]);
        axpy_eval({{&k_[0], a51}, {&k_[1], a52}, {&k_[2], a53}, {&k_[3], a54}}, h, k_[4]);
        axpy_eval({{&k_[0], a61}, {&k_[1], a62}, {&k_[2], a63}, {&k_[3], a64}, {&k_[4], a65}}, h, k_[5]);

        // 5th-order solution into y_tmp_, then k7 = f(y_tmp_)
        {
            const int64_t n = static_cast<int64_t>(len);
#pragma omp parallel for schedule(static)
            for (int64_t i = 0; i < n; ++i) {
                const size_t s = static_cast<size_t>(i);
                y_tmp_[s] = y_[s] + h * (b1 * k_[0][s] + b3 * k_[2][s] + b4 * k_[3][s] +
                                         b5 * k_[4][s] + b6 * k_[5][s]);
            }
        }
        derivative(y_tmp_, k_[6]);

        double err = 0.0;
        {
            const int64_t n = static_cast<int64_t>(len);
#pragma omp parallel for schedule(static) reduction(max : err)
            for (int64_t i = 0; i < n; ++i) {
                const size_t s = static_cast<size_t>(i);
                const double e = h * (d1 * k_[0][s] + d3 * k_[2][s] + d4 * k_[3][s] +
                                      d5 * k_[4][s] + d6 * k_[5][s] + d7 * k_[6][s]);
                const double sc = tol * (1.0 + std::abs(y_tmp_[s]));
                err = std::max(err, std::abs(e) / sc);
            }
        }

        if (err <= 1.0) {
            std::swap(y_, y_tmp_);
            std::swap(k_[0], k_[6]);  // first-same-as-last
            t_ += h;
        }
        // on rejection y_ is unchanged, so the cached k1 stays valid
        const double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h_ = h * std::clamp(factor, 0.2, 5.0);
        if (!(h_ > 0.0) || !std::isfinite(h_))
            throw std::runtime_error("FSP: step size collapsed");
    }
}

double FspSolver::tracked_mass() const {
    double m = 0.0;
    for (size_t i = 0; i + 1 < y_.size(); ++i) m += y_[i];
    return m;
}

double FspSolver::moment(const MultiIndex& m) const {
    double r = 0.0;
    for (size_t i = 0; i < states_.size(); ++i) r += y_[i] * eval_monomial(states_[i], m);
    return r;
}

double FspSolver::expectation(const Polynomial& p) const {
    double r = 0.0;
    for (size_t i = 0; i < states_.size(); ++i) r += y_[i] * p.evaluate(states_[i]);
    return r;
}

double FspSolver::prob_le(uint32_t species, int64_t level) const {
    double r = 0.0;
    for (size_t i = 0; i < states_.size(); ++i)
        if (states_[i][species] <= level) r += y_[i];
    return r;
}

std::vector<double> FspSolver::distribution() const {
    std::vector<double> p(y_.begin(), y_.end() - 1);
    for (double& v : p) v = std::clamp(v, 0.0, 1.0);
    return p;
}

double FspSolver::min_raw_probability() const {
    double m = 1.0;
    for (size_t i = 0; i + 1 < y_.size(); ++i) m = std::min(m, y_[i]);
    return m;
}

double FspResult::moment(const MultiIndex& m) const {
    double r = 0.0;
    for (size_t i = 0; i < states.size(); ++i) r += probabilities[i] * eval_monomial(states[i], m);
    return r;
}

double FspResult::prob_le(uint32_t species, int64_t level) const {
    double r = 0.0;
    for (size_t i = 0; i < states.size(); ++i)
        if (states[i][species] <= level) r += probabilities[i];
    return r;
}

FspResult fsp_transient(const Model& model, const TruncationBox& box, double T) {
    if (!(T >= 0.0)) throw std::invalid_argument("fsp_transient: horizon must be non-negative");
    FspSolver solver(model, box);
    solver.integrate_to(T);
    if (solver.lost_mass() > box.mass_tolerance)
        throw FspWindowError("FSP: lost mass " + std::to_string(solver.lost_mass()) +
                             " exceeds tolerance; window too small");
    FspResult r;
    r.states = solver.states();
    r.probabilities = solver.distribution();
    r.lost_mass = solver.lost_mass();
    return r;
}

double bd_mean_closed_form(double gamma, double delta, double T) {
    if (!(delta > 0.0)) throw std::invalid_argument("bd_mean_closed_form: delta must be positive");
    if (T < 0.0) throw std::invalid_argument("bd_mean_closed_form: T must be non-negative");
    return gamma / delta * -std::expm1(-delta * T);
}

}  // namespace srncv
