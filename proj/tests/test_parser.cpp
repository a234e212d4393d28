#include <doctest.h>

#include "srncv/builtin_models.hpp"
#include "srncv/parser.hpp"

using namespace srncv;

namespace {

bool models_equal(const Model& a, const Model& b) {
    if (a.species != b.species) return false;
    if (a.parameter_names != b.parameter_names) return false;
    if (a.parameter_values != b.parameter_values) return false;
    if (a.initial_state != b.initial_state) return false;
    if (a.reactions.size() != b.reactions.size()) return false;
    for (size_t i = 0; i < a.reactions.size(); ++i) {
        const Reaction& ra = a.reactions[i];
        const Reaction& rb = b.reactions[i];
        if (ra.reactants != rb.reactants || ra.products != rb.products) return false;
        if (ra.is_mass_action() != rb.is_mass_action()) return false;
        if (ra.is_mass_action()) {
            if (std::get<MassAction>(ra.rate_law).c != std::get<MassAction>(rb.rate_law).c)
                return false;
        } else if (std::get<RateExpr>(ra.rate_law).to_string() !=
                   std::get<RateExpr>(rb.rate_law).to_string()) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("birth-death source parses") {
    Model m = parse_model(
        "parameter g = 10\nparameter d = 1\n0 -> A @ mass_action(g)\nA -> 0 @ mass_action(d)\n"
        "init A = 0\n");
    CHECK(m.species == std::vector<std::string>{"A"});
    REQUIRE(m.reactions.size() == 2);
    CHECK(std::get<MassAction>(m.reactions[0].rate_law).c == 10.0);
    CHECK(std::get<MassAction>(m.reactions[1].rate_law).c == 1.0);
    CHECK(m.reactions[0].products == std::vector<uint32_t>{1});
    CHECK(m.reactions[1].reactants == std::vector<uint32_t>{1});
    CHECK(m.initial_state == State{0});
}

TEST_CASE("dimerization source parses with species in appearance order") {
    Model m = parse_model(
        "0 -> M @ mass_action(10)\n2 M -> D @ mass_action(0.1)\ninit M = 0\ninit D = 0\n");
    CHECK(m.species == std::vector<std::string>{"M", "D"});
    REQUIRE(m.reactions.size() == 2);
    CHECK(m.reactions[1].reactants == std::vector<uint32_t>{2, 0});
    CHECK(m.reactions[1].products == std::vector<uint32_t>{0, 1});
}

TEST_CASE("dangling plus is a parse error with position") {
    try {
        parse_model("A + -> B @ mass_action(1)\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 1);
        CHECK(e.column >= 4);
        CHECK(std::string(e.what()).find("species") != std::string::npos);
    }
}

TEST_CASE("parse errors carry meaning") {
    CHECK_THROWS_AS(parse_model("0 -> A @ mass_action(g)\n"), ParseError);  // unknown parameter
    CHECK_THROWS_AS(parse_model("parameter a = 1\nparameter a = 2\n"), ParseError);  // duplicate
    CHECK_THROWS_AS(parse_model("1.5 M -> D @ mass_action(1)\n"), ParseError);  // non-integer k
    CHECK_THROWS_AS(parse_model("A - > B @ mass_action(1)\n"), ParseError);  // malformed arrow
    CHECK_THROWS_AS(parse_model("A -> B\n"), ParseError);                    // missing rate
    CHECK_THROWS_AS(parse_model("init A = -2\n"), ParseError);
    CHECK_THROWS_AS(parse_model("init A = 1\ninit A = 2\n"), ParseError);
    CHECK_THROWS_AS(parse_model("parameter k = 1\nk -> B @ mass_action(1)\n"), ParseError);
    CHECK_THROWS_AS(parse_model("0 -> A @ mass_action(0)\n"), ParseError);  // non-positive constant
    CHECK_THROWS_AS(parse_model("0 -> 0 @ mass_action(1)\n"), ParseError);  // both sides empty
}

TEST_CASE("comments, blank lines and missing init default to zero") {
    Model m = parse_model("# a comment\n\n0 -> A @ mass_action(3) # trailing\n");
    CHECK(m.species == std::vector<std::string>{"A"});
    CHECK(m.initial_state == State{0});
}

TEST_CASE("expression rates parse with precedence and powers") {
    Model m = parse_model(
        "parameter k = 2\n0 -> A @ expr(k * (1 + 3) - 2)\nA -> 0 @ expr(k * A^2 / 4)\n");
    REQUIRE(m.reactions.size() == 2);
    const RateExpr& e0 = std::get<RateExpr>(m.reactions[0].rate_law);
    State x = {5};
    CHECK(evaluate_tree(e0, x, m.parameter_values) == doctest::Approx(6.0));
    const RateExpr& e1 = std::get<RateExpr>(m.reactions[1].rate_law);
    CHECK(evaluate_tree(e1, x, m.parameter_values) == doctest::Approx(12.5));
}

TEST_CASE("mass_action constant may be a parameter expression but not species") {
    Model m = parse_model("parameter a = 3\nparameter b = 2\n0 -> A @ mass_action(a * b)\n");
    CHECK(std::get<MassAction>(m.reactions[0].rate_law).c == doctest::Approx(6.0));
    CHECK_THROWS_AS(parse_model("0 -> A @ mass_action(1 + A)\n"), ParseError);
}

TEST_CASE("round trip through to_source is exact") {
    const char* sources[] = {
        "parameter g = 10\nparameter d = 1\n0 -> A @ mass_action(g)\nA -> 0 @ mass_action(d)\n"
        "init A = 0\n",
        "0 -> M @ mass_action(10)\n2 M -> D @ mass_action(0.1)\n",
        "parameter k = 0.25\nX + Y -> B + Y @ expr(k * X * Y)\ninit X = 7\ninit Y = 5\ninit B = 1\n",
    };
    for (const char* src : sources) {
        Model m = parse_model(src);
        Model again = parse_model(to_source(m));
        CHECK(models_equal(m, again));
        CHECK(to_source(m) == to_source(again));
    }
    for (const BuiltinModel& b : builtin_models()) {
        Model m = parse_model(b.source);
        Model again = parse_model(to_source(m));
        CHECK(models_equal(m, again));
    }
}

TEST_CASE("every built-in model parses and validates") {
    for (const BuiltinModel& b : builtin_models()) {
        Model m = builtin_model(b.name);
        CHECK_NOTHROW(m.validate());
    }
    Model bd = builtin_model("birthdeath");
    CHECK(bd.species.size() == 1);
    CHECK(bd.reactions.size() == 2);

    Model dim = builtin_model("dimerization");
    CHECK(dim.species == std::vector<std::string>{"M", "D"});
    CHECK(std::get<MassAction>(dim.reactions[0].rate_law).c == 10.0);
    CHECK(std::get<MassAction>(dim.reactions[1].rate_law).c == 0.1);
    CHECK(dim.initial_state == State{0, 0});

    Model dm = builtin_model("distmod");
    CHECK(dm.reactions.size() == 4);
    for (const Reaction& r : dm.reactions)
        CHECK(std::get<MassAction>(r.rate_law).c == 0.001);
    CHECK(dm.initial_state == State{100, 100, 100});

    Model lac = builtin_model("lacoperon");
    CHECK(lac.species.size() == 11);
    CHECK(lac.reactions.size() == 25);
    CHECK(lac.initial_state[*lac.species_index("O")] == 1);
    CHECK(lac.initial_state[*lac.species_index("Iex")] == 48177);
    int64_t others = 0;
    for (size_t i = 0; i < lac.species.size(); ++i)
        if (lac.species[i] != "O" && lac.species[i] != "Iex") others += lac.initial_state[i];
    CHECK(others == 0);
    CHECK(builtin_models().size() == 4);
    CHECK_THROWS_AS(builtin_model("nope"), std::invalid_argument);
}
