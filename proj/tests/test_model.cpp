#include <doctest.h>

#include "srncv/model.hpp"
#include "srncv/parser.hpp"

using namespace srncv;

namespace {

Reaction make_reaction(std::vector<uint32_t> reactants, std::vector<uint32_t> products, double c) {
    Reaction r;
    r.reactants = std::move(reactants);
    r.products = std::move(products);
    r.rate_law = MassAction{c};
    return r;
}

}  // namespace

TEST_CASE("stoich_change") {
    CHECK(stoich_change(make_reaction({2, 0}, {0, 1}, 0.1)) == std::vector<int64_t>{-2, 1});
    CHECK(stoich_change(make_reaction({0, 0}, {1, 0}, 10.0)) == std::vector<int64_t>{1, 0});
    // X + Y -> B + Y: the catalyst cancels
    CHECK(stoich_change(make_reaction({1, 1, 0}, {0, 1, 1}, 0.001)) ==
          std::vector<int64_t>{-1, 0, 1});
}

TEST_CASE("mass_action_propensity") {
    Reaction dimer = make_reaction({2, 0}, {0, 1}, 0.1);
    CHECK(mass_action_propensity(dimer, {5, 0}) == doctest::Approx(1.0));
    CHECK(mass_action_propensity(dimer, {1, 0}) == 0.0);
    Reaction birth = make_reaction({0, 0}, {1, 0}, 10.0);
    CHECK(mass_action_propensity(birth, {123, 4}) == 10.0);
}

TEST_CASE("propensity is zero exactly when reactants are insufficient") {
    Reaction r = make_reaction({2, 1}, {0, 0}, 3.0);
    for (int64_t a = 0; a <= 4; ++a)
        for (int64_t b = 0; b <= 3; ++b) {
            const double alpha = mass_action_propensity(r, {a, b});
            if (a >= 2 && b >= 1)
                CHECK(alpha > 0.0);
            else
                CHECK(alpha == 0.0);
        }
}

TEST_CASE("target_value") {
    State terminal = {7, 3};
    CHECK(target_value(terminal, TargetQuery::mean(0, 1.0)) == 7.0);
    CHECK(target_value(terminal, TargetQuery::threshold_probability(0, 7, 1.0)) == 1.0);
    CHECK(target_value(terminal, TargetQuery::threshold_probability(0, 6, 1.0)) == 0.0);
    CHECK_THROWS_AS(target_value(terminal, TargetQuery::mean(5, 1.0)), std::out_of_range);
}

TEST_CASE("model validation catches broken invariants") {
    Model m = parse_model("0 -> A @ mass_action(1)\n");
    CHECK_NOTHROW(m.validate());

    Model bad = m;
    bad.initial_state = {-1};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = m;
    bad.reactions[0].rate_law = MassAction{0.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = m;
    bad.reactions[0].reactants = {0};
    bad.reactions[0].products = {0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = m;
    bad.species = {"A", "A"};
    bad.initial_state = {0, 0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("query validation") {
    Model m = parse_model("0 -> A @ mass_action(1)\n");
    CHECK_NOTHROW(TargetQuery::mean(0, 2.0).validate(m));
    CHECK_THROWS_AS(TargetQuery::mean(0, 0.0).validate(m), std::invalid_argument);
    CHECK_THROWS_AS(TargetQuery::mean(3, 2.0).validate(m), std::invalid_argument);
    CHECK_THROWS_AS(TargetQuery::threshold_probability(0, -1, 2.0).validate(m),
                    std::invalid_argument);
}
