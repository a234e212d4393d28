#include <doctest.h>

#include <cmath>

#include "srncv/builtin_models.hpp"
#include "srncv/fsp.hpp"
#include "srncv/moments.hpp"
#include "srncv/parser.hpp"

using namespace srncv;

TEST_CASE("birth-death closed form") {
    CHECK(bd_mean_closed_form(10.0, 1.0, 0.0) == 0.0);
    CHECK(bd_mean_closed_form(10.0, 1.0, 1e9) == doctest::Approx(10.0));
    CHECK(bd_mean_closed_form(10.0, 1.0, 2.0) == doctest::Approx(8.646647167633873));
}

TEST_CASE("zero-reaction model keeps the Dirac distribution") {
    Model m = parse_model("init A = 4\n");
    TruncationBox box;
    box.upper = {10};
    FspResult r = fsp_transient(m, box, 3.0);
    REQUIRE(r.states.size() == 1);
    CHECK(r.states[0] == State{4});
    CHECK(r.probabilities[0] == doctest::Approx(1.0));
    CHECK(r.lost_mass == 0.0);
}

TEST_CASE("birth-death transient mean matches the closed form to 1e-6") {
    Model bd = builtin_model("birthdeath");
    TruncationBox box;
    box.upper = {200};
    FspSolver solver(bd, box);
    solver.integrate_to(2.0);
    const double want = bd_mean_closed_form(10.0, 1.0, 2.0);
    CHECK(solver.moment({1}) == doctest::Approx(want).epsilon(1e-6));
    CHECK(solver.lost_mass() < 1e-9);

    // probability bookkeeping
    CHECK(solver.tracked_mass() + solver.lost_mass() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(solver.min_raw_probability() >= -1e-12);
}

TEST_CASE("tighter windows converge to the closed form as the box grows") {
    Model bd = builtin_model("birthdeath");
    const double want = bd_mean_closed_form(10.0, 1.0, 2.0);
    TruncationBox small;
    small.upper = {12};
    small.mass_tolerance = 0.5;
    FspSolver s_small(bd, small);
    s_small.integrate_to(2.0);
    CHECK(s_small.lost_mass() > 1e-4);  // the window actually bites

    TruncationBox big;
    big.upper = {200};
    FspSolver s_big(bd, big);
    s_big.integrate_to(2.0);
    CHECK(std::abs(s_big.moment({1}) - want) < std::abs(s_small.moment({1}) - want));
    CHECK(std::abs(s_big.moment({1}) - want) < 1e-6 * want);
}

TEST_CASE("dimerization reference value is reproduced (pinned fixture)") {
    // pinned once from this solver and cross-checked against an independent
    // integrator; see also the validate CLI command
    Model dim = builtin_model("dimerization");
    TruncationBox box;
    box.upper = {400, 200};
    FspSolver solver(dim, box);
    solver.integrate_to(2.0);
    CHECK(solver.moment({1, 0}) == doctest::Approx(9.7406128032).epsilon(1e-4));
    CHECK(solver.lost_mass() < 1e-8);
    CHECK(solver.tracked_mass() + solver.lost_mass() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(solver.min_raw_probability() >= -1e-12);
    CHECK(solver.prob_le(0, 8) == doctest::Approx(0.334507).epsilon(1e-3));
}

TEST_CASE("moment drift expectation equals the finite-difference derivative (FSP)") {
    const double h = 1e-4;
    SUBCASE("birth-death") {
        Model bd = builtin_model("birthdeath");
        TruncationBox box;
        box.upper = {200};
        FspSolver solver(bd, box);
        solver.integrate_to(1.0);
        const double f1 = solver.moment({1});
        const double drift_expect = solver.expectation(moment_drift(bd, {1}));
        solver.integrate_to(1.0 + h);
        const double f2 = solver.moment({1});
        CHECK((f2 - f1) / h == doctest::Approx(drift_expect).epsilon(1e-3));
    }
    SUBCASE("dimerization") {
        Model dim = builtin_model("dimerization");
        TruncationBox box;
        box.upper = {100, 80};
        FspSolver solver(dim, box);
        solver.integrate_to(1.0);
        const double f1 = solver.moment({1, 0});
        const double drift_expect = solver.expectation(moment_drift(dim, {1, 0}));
        solver.integrate_to(1.0 + h);
        const double f2 = solver.moment({1, 0});
        CHECK((f2 - f1) / h == doctest::Approx(drift_expect).epsilon(1e-3));
    }
}

TEST_CASE("window too small raises, window too large refuses") {
    Model bd = builtin_model("birthdeath");
    TruncationBox tiny;
    tiny.upper = {5};
    tiny.mass_tolerance = 1e-4;
    CHECK_THROWS_AS(fsp_transient(bd, tiny, 2.0), FspWindowError);

    Model lac = builtin_model("lacoperon");
    TruncationBox box;
    box.upper.assign(lac.n_species(), 0);
    for (size_t i = 0; i < lac.n_species(); ++i)
        box.upper[i] = std::max<int64_t>(2 * lac.initial_state[i], 100);
    box.max_states = 100000;
    CHECK_THROWS_AS(fsp_transient(lac, box, 1.0), FspWindowError);
}

TEST_CASE("distributive modification window reduces to the conservation simplex") {
    Model dm = builtin_model("distmod");
    TruncationBox box;
    box.upper = {300, 300, 300};
    FspSolver solver(dm, box);
    // X + Y + B = 300 holds on every reachable state
    CHECK(solver.n_states() == 45451);  // (301*302)/2 pairs (X, Y) with X+Y <= 300
    for (const State& s : solver.states()) CHECK(s[0] + s[1] + s[2] == 300);
}
