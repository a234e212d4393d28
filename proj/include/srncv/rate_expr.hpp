// Rate expressions and their compiled stack-program form. Expressions come
// out of the model parser with identifier references already resolved to
// species/parameter indices; compilation is a post-order lowering.
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "srncv/polynomial.hpp"

namespace srncv {

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a rate expression cannot be lowered to a polynomial in the
/// species counts (division by a species-dependent term, negative power).
/// The reaction can still be simulated; it just cannot contribute to
/// constraint generation.
struct PolynomialityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RateExpr {
    enum class Kind { Const, Param, Species, Add, Sub, Mul, Div, Neg, PowInt };

    Kind kind = Kind::Const;
    double value = 0.0;       // Const
    uint32_t index = 0;       // Param / Species
    std::string name;         // Param / Species, for printing
    int exponent = 0;         // PowInt
    std::vector<RateExpr> children;

    static RateExpr constant(double v);
    static RateExpr parameter(uint32_t idx, std::string name);
    static RateExpr species(uint32_t idx, std::string name);
    static RateExpr binary(Kind op, RateExpr lhs, RateExpr rhs);
    static RateExpr negate(RateExpr child);
    static RateExpr pow_int(RateExpr base, int exponent);

    std::string to_string() const;
};

struct Instr {
    enum class Op : uint8_t { PushConst, PushSpecies, PushParam, Add, Sub, Mul, Div, PowInt };
    Op op;
    double value = 0.0;  // PushConst
    int32_t index = 0;   // PushSpecies / PushParam / PowInt exponent
};

/// Flat post-order program. Stack balance is established at compile time:
/// evaluation of a valid program ends with exactly one value and never
/// underflows.
struct StackProgram {
    std::vector<Instr> code;
    uint32_t max_stack = 0;

    bool empty() const { return code.empty(); }
};

/// Post-order lowering; evaluate(compile(e), x, p) equals the tree-walk
/// evaluation of e exactly.
StackProgram compile(const RateExpr& expr, size_t n_species, size_t n_params);

double evaluate(const StackProgram& program, std::span<const int64_t> state,
                std::span<const double> params);

/// Reference tree-walk evaluation (kept independent of the stack path).
double evaluate_tree(const RateExpr& expr, std::span<const int64_t> state,
                     std::span<const double> params);

/// The expression as a polynomial in the species counts with parameters
/// substituted numerically. Throws PolynomialityError when the expression
/// divides by a species-dependent term or raises one to a negative power.
Polynomial to_polynomial(const RateExpr& expr, size_t n_species, std::span<const double> params);

}  // namespace srncv
