#include <doctest.h>

#include <cmath>

#include "srncv/builtin_models.hpp"
#include "srncv/moments.hpp"
#include "srncv/parser.hpp"

using namespace srncv;

TEST_CASE("moment drift of the birth-death mean is gamma - delta x") {
    Model bd = builtin_model("birthdeath");
    Polynomial drift = moment_drift(bd, {1});
    CHECK(drift.term_count() == 2);
    CHECK(drift.terms().at(MultiIndex{0}) == doctest::Approx(10.0));
    CHECK(drift.terms().at(MultiIndex{1}) == doctest::Approx(-1.0));
}

TEST_CASE("moment drift of the dimerization monomer mean") {
    Model dim = builtin_model("dimerization");
    Polynomial drift = moment_drift(dim, {1, 0});
    // 10 + 0.1 x - 0.1 x^2
    CHECK(drift.terms().at(MultiIndex{0, 0}) == doctest::Approx(10.0));
    CHECK(drift.terms().at(MultiIndex{1, 0}) == doctest::Approx(0.1));
    CHECK(drift.terms().at(MultiIndex{2, 0}) == doctest::Approx(-0.1));
    CHECK(drift.term_count() == 3);
}

TEST_CASE("constant f has zero drift") {
    Model dim = builtin_model("dimerization");
    CHECK(moment_drift(dim, {0, 0}).is_zero());
}

TEST_CASE("non-polynomial rates only fail constraints they actually touch") {
    Model m = parse_model(
        "0 -> A @ mass_action(2)\nA -> 0 @ mass_action(1)\n"
        "0 -> B @ expr(3 / (1 + B))\n");
    CHECK_NOTHROW(moment_drift(m, {1, 0}));  // B's weird rate does not move A
    CHECK_THROWS_AS(moment_drift(m, {0, 1}), PolynomialityError);
    CHECK_THROWS_AS(moment_drift(m, {1, 1}), PolynomialityError);
}

TEST_CASE("exp time integral closed form") {
    CHECK(exp_time_integral(0.0, 2.5) == 2.5);
    CHECK(exp_time_integral(1e-15, 2.5) == 2.5);  // inside the zero tolerance
    CHECK(exp_time_integral(1.0, 1.0) == doctest::Approx(std::exp(1.0) - 1.0));
    CHECK(exp_time_integral(-2.0, 1.0) == doctest::Approx((std::exp(-2.0) - 1.0) / -2.0));
}

TEST_CASE("birth-death expansion at lambda = delta collapses to a constant integrand") {
    Model bd = builtin_model("birthdeath");
    ConstraintExpansion e = constraint_expansion(bd, {{1}, 1.0}, 2.0);
    // integrand = 1*x + (10 - x) = 10
    CHECK(e.integral_terms.empty());
    CHECK(e.constant_coeff == doctest::Approx(10.0));
    CHECK(e.terminal_weight == doctest::Approx(std::exp(2.0)));
    CHECK(e.initial_value == 0.0);
    CHECK(e.constant_integral == doctest::Approx((std::exp(2.0) - 1.0) / 1.0));
    // E[Z] = 0 forces E[X_T] = (gamma/delta)(1 - e^{-delta T})
    const double implied_mean = e.constant_coeff * e.constant_integral / e.terminal_weight;
    CHECK(implied_mean == doctest::Approx(10.0 * (1.0 - std::exp(-2.0))).epsilon(1e-12));
}

TEST_CASE("birth-death expansion at lambda = 0 matches the unweighted constraint") {
    Model bd = builtin_model("birthdeath");
    ConstraintExpansion e = constraint_expansion(bd, {{1}, 0.0}, 2.0);
    // Z = X_T - x0 - (10 T - int X dt)
    CHECK(e.terminal_weight == 1.0);
    CHECK(e.constant_coeff == doctest::Approx(10.0));
    CHECK(e.constant_integral == 2.0);
    REQUIRE(e.integral_terms.size() == 1);
    CHECK(e.integral_terms[0].first == MultiIndex{1});
    CHECK(e.integral_terms[0].second == doctest::Approx(-1.0));
}

TEST_CASE("accumulator keys deduplicate across expansions") {
    Model dim = builtin_model("dimerization");
    ConstraintExpansion a = constraint_expansion(dim, {{1, 0}, 2.5}, 2.0);
    // integrand = 2.5 x + 10 + 0.1 x - 0.1 x^2 -> keys x and x^2 at lambda 2.5
    std::set<AccumulatorKey> keys = accumulator_keys({a});
    REQUIRE(keys.size() == 2);
    CHECK(keys.count({{1, 0}, 2.5}) == 1);
    CHECK(keys.count({{2, 0}, 2.5}) == 1);

    ConstraintExpansion b = constraint_expansion(dim, {{0, 1}, 2.5}, 2.0);
    // D drift: +0.05 x^2 - 0.05 x (from 2M->D) plus weight 2.5 * D
    std::set<AccumulatorKey> both = accumulator_keys({a, b});
    CHECK(both.size() == 3);  // x, x^2 shared; D added

    CHECK(accumulator_keys({}).empty());
}

TEST_CASE("near-zero lambda is normalized to zero") {
    Model bd = builtin_model("birthdeath");
    ConstraintExpansion e = constraint_expansion(bd, {{1}, 1e-13}, 2.0);
    CHECK(e.id.lambda == 0.0);
    CHECK(e.terminal_weight == 1.0);
}

TEST_CASE("expansion dump is human readable") {
    Model dim = builtin_model("dimerization");
    ConstraintExpansion e = constraint_expansion(dim, {{1, 0}, 2.5}, 2.0);
    const std::string text = describe_expansions(dim, {e});
    CHECK(text.find("lambda=2.5") != std::string::npos);
    CHECK(text.find("M^2") != std::string::npos);
}
