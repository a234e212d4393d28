#include "srncv/builtin_models.hpp"

#include <stdexcept>

#include "srncv/parser.hpp"

namespace srncv {

namespace {

const char* kBirthDeath = R"(# birth-death process: constant production, linear decay
parameter gamma = 10
parameter delta = 1
0 -> A @ mass_action(gamma)
A -> 0 @ mass_action(delta)
init A = 0
)";

const char* kDimerization = R"(# dimerization on an unbounded state space
0 -> M @ mass_action(10)
2 M -> D @ mass_action(0.1)
init M = 0
init D = 0
)";

const char* kDistributiveModification = R"(# distributive modification, a bimodal switch
X + Y -> B + Y @ mass_action(0.001)
B + Y -> 2 Y @ mass_action(0.001)
Y + X -> B + X @ mass_action(0.001)
B + X -> 2 X @ mass_action(0.001)
init X = 100
init Y = 100
init B = 100
)";

const char* kLacOperon = R"(# lac operon regulation with positive feedback
parameter k1 = 0.111
parameter k2 = 15.0
parameter k3 = 103.8
parameter k4 = 0.001
parameter k5 = 1992.7
parameter k6 = 2.4
parameter k7 = 1.293e-7
parameter k8 = 12
parameter k9 = 1.293e-7
parameter k10 = 9963.2
parameter k11 = 0.5
parameter k12 = 0.01
parameter k13 = 30.0
parameter k14 = 0.249
parameter k15 = 0.1
parameter k16 = 6.0e4
parameter k17 = 0.92
parameter k18 = 0.92
parameter k19 = 0.462
parameter k20 = 0.462
parameter k21 = 0.2
parameter k22 = 0.2
parameter k23 = 0.2
parameter k24 = 0.2
parameter k25 = 0.2
0 -> MR @ mass_action(k1)
MR -> 0 @ mass_action(k19)
MR -> MR + R @ mass_action(k2)
2 R -> R2 @ mass_action(k3)
R2 -> 2 R @ mass_action(k4)
R2 + O -> R2O @ mass_action(k5)
R2O -> R2 + O @ mass_action(k6)
2 I + R2 -> I2R2 @ mass_action(k7)
I2R2 -> 2 I + R2 @ mass_action(k8)
2 I + R2O -> I2R2 + O @ mass_action(k9)
I2R2 + O -> 2 I + R2O @ mass_action(k10)
O -> O + MY @ mass_action(k11)
R2O -> R2O + MY @ mass_action(k12)
MY -> MY + Y @ mass_action(k13)
Y + Iex -> YIex @ mass_action(k14)
YIex -> Y + Iex @ mass_action(k15)
YIex -> Y + I @ mass_action(k16)
Iex -> I @ mass_action(k17)
I -> Iex @ mass_action(k18)
MY -> 0 @ mass_action(k20)
R -> 0 @ mass_action(k21)
R2 -> 0 @ mass_action(k22)
Y -> 0 @ mass_action(k23)
YIex -> I @ mass_action(k24)
I2R2 -> 2 I @ mass_action(k25)
init O = 1
init Iex = 48177
)";

}  // namespace

const std::vector<BuiltinModel>& builtin_models() {
    static const std::vector<BuiltinModel> models = {
        {"birthdeath", "birth-death process (gamma=10, delta=1)", kBirthDeath},
        {"dimerization", "production plus dimerization, unbounded state space", kDimerization},
        {"distmod", "distributive modification switch, X+Y+B conserved at 300", kDistributiveModification},
        {"lacoperon", "lac operon regulation, 11 species / 25 reactions", kLacOperon},
    };
    return models;
}

Model builtin_model(const std::string& name) {
    for (const BuiltinModel& b : builtin_models())
        if (b.name == name) return parse_model(b.source);
    throw std::invalid_argument("unknown built-in model '" + name + "'");
}

bool is_builtin_model(const std::string& name) {
    for (const BuiltinModel& b : builtin_models())
        if (b.name == name) return true;
    return false;
}

}  // namespace srncv
