#include "srncv/rate_expr.hpp"

#include <cmath>
#include <sstream>

namespace srncv {

RateExpr RateExpr::constant(double v) {
    RateExpr e;
    e.kind = Kind::Const;
    e.value = v;
    return e;
}

RateExpr RateExpr::parameter(uint32_t idx, std::string name) {
    RateExpr e;
    e.kind = Kind::Param;
    e.index = idx;
    e.name = std::move(name);
    return e;
}

RateExpr RateExpr::species(uint32_t idx, std::string name) {
    RateExpr e;
    e.kind = Kind::Species;
    e.index = idx;
    e.name = std::move(name);
    return e;
}

RateExpr RateExpr::binary(Kind op, RateExpr lhs, RateExpr rhs) {
    RateExpr e;
    e.kind = op;
    e.children.push_back(std::move(lhs));
    e.children.push_back(std::move(rhs));
    return e;
}

RateExpr RateExpr::negate(RateExpr child) {
    RateExpr e;
    e.kind = Kind::Neg;
    e.children.push_back(std::move(child));
    return e;
}

RateExpr RateExpr::pow_int(RateExpr base, int exponent) {
    RateExpr e;
    e.kind = Kind::PowInt;
    e.exponent = exponent;
    e.children.push_back(std::move(base));
    return e;
}

std::string RateExpr::to_string() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Const: os << value; break;
        case Kind::Param:
        case Kind::Species: os << name; break;
        case Kind::Add: os << "(" << children[0].to_string() << " + " << children[1].to_string() << ")"; break;
        case Kind::Sub: os << "(" << children[0].to_string() << " - " << children[1].to_string() << ")"; break;
        case Kind::Mul: os << "(" << children[0].to_string() << " * " << children[1].to_string() << ")"; break;
        case Kind::Div: os << "(" << children[0].to_string() << " / " << children[1].to_string() << ")"; break;
        case Kind::Neg: os << "(-" << children[0].to_string() << ")"; break;
        case Kind::PowInt: os << children[0].to_string() << "^" << exponent; break;
    }
    return os.str();
}

namespace {

void emit(const RateExpr& e, size_t n_species, size_t n_params, std::vector<Instr>& code,
          uint32_t& depth, uint32_t& max_depth) {
    auto push = [&](Instr in) {
        code.push_back(in);
        ++depth;
        max_depth = std::max(max_depth, depth);
    };
    auto binop = [&](Instr::Op op) {
        if (depth < 2) throw std::logic_error("compile: stack underflow");
        code.push_back({op});
        --depth;
    };
    switch (e.kind) {
        case RateExpr::Kind::Const:
            push({Instr::Op::PushConst, e.value, 0});
            break;
        case RateExpr::Kind::Param:
            if (e.index >= n_params) throw std::invalid_argument("compile: unresolved parameter " + e.name);
            push({Instr::Op::PushParam, 0.0, static_cast<int32_t>(e.index)});
            break;
        case RateExpr::Kind::Species:
            if (e.index >= n_species) throw std::invalid_argument("compile: unresolved species " + e.name);
            push({Instr::Op::PushSpecies, 0.0, static_cast<int32_t>(e.index)});
            break;
        case RateExpr::Kind::Add:
        case RateExpr::Kind::Sub:
        case RateExpr::Kind::Mul:
        case RateExpr::Kind::Div: {
            emit(e.children.at(0), n_species, n_params, code, depth, max_depth);
            emit(e.children.at(1), n_species, n_params, code, depth, max_depth);
            Instr::Op op = e.kind == RateExpr::Kind::Add   ? Instr::Op::Add
                           : e.kind == RateExpr::Kind::Sub ? Instr::Op::Sub
                           : e.kind == RateExpr::Kind::Mul ? Instr::Op::Mul
                                                           : Instr::Op::Div;
            binop(op);
            break;
        }
        case RateExpr::Kind::Neg:
            // lowered as 0 - e to stay within the instruction set
            push({Instr::Op::PushConst, 0.0, 0});
            emit(e.children.at(0), n_species, n_params, code, depth, max_depth);
            binop(Instr::Op::Sub);
            break;
        case RateExpr::Kind::PowInt:
            emit(e.children.at(0), n_species, n_params, code, depth, max_depth);
            if (depth < 1) throw std::logic_error("compile: stack underflow");
            code.push_back({Instr::Op::PowInt, 0.0, e.exponent});
            break;
    }
}

double pow_int_value(double base, int k) {
    if (k < 0) {
        if (base == 0.0) throw EvalError("evaluate: zero raised to a negative power");
        return 1.0 / pow_int_value(base, -k);
    }
    double r = 1.0;
    while (k-- > 0) r *= base;
    return r;
}

}  // namespace

StackProgram compile(const RateExpr& expr, size_t n_species, size_t n_params) {
    StackProgram p;
    uint32_t depth = 0;
    emit(expr, n_species, n_params, p.code, depth, p.max_stack);
    if (depth != 1) throw std::logic_error("compile: program is not stack-balanced");
    return p;
}

double evaluate(const StackProgram& program, std::span<const int64_t> state,
                std::span<const double> params) {
    double local[16];
    std::vector<double> heap;
    double* stack = local;
    if (program.max_stack > 16) {
        heap.resize(program.max_stack);
        stack = heap.data();
    }
    size_t top = 0;
    for (const Instr& in : program.code) {
        switch (in.op) {
            case Instr::Op::PushConst: stack[top++] = in.value; break;
            case Instr::Op::PushSpecies: stack[top++] = static_cast<double>(state[in.index]); break;
            case Instr::Op::PushParam: stack[top++] = params[in.index]; break;
            case Instr::Op::Add: stack[top - 2] += stack[top - 1]; --top; break;
            case Instr::Op::Sub: stack[top - 2] -= stack[top - 1]; --top; break;
            case Instr::Op::Mul: stack[top - 2] *= stack[top - 1]; --top; break;
            case Instr::Op::Div:
                if (stack[top - 1] == 0.0) throw EvalError("evaluate: division by zero");
                stack[top - 2] /= stack[top - 1];
                --top;
                break;
            case Instr::Op::PowInt: stack[top - 1] = pow_int_value(stack[top - 1], in.index); break;
        }
    }
    if (top != 1) throw std::logic_error("evaluate: program is not stack-balanced");
    return stack[0];
}

double evaluate_tree(const RateExpr& e, std::span<const int64_t> state,
                     std::span<const double> params) {
    switch (e.kind) {
        case RateExpr::Kind::Const: return e.value;
        case RateExpr::Kind::Param: return params[e.index];
        case RateExpr::Kind::Species: return static_cast<double>(state[e.index]);
        case RateExpr::Kind::Add: return evaluate_tree(e.children[0], state, params) + evaluate_tree(e.children[1], state, params);
        case RateExpr::Kind::Sub: return evaluate_tree(e.children[0], state, params) - evaluate_tree(e.children[1], state, params);
        case RateExpr::Kind::Mul: return evaluate_tree(e.children[0], state, params) * evaluate_tree(e.children[1], state, params);
        case RateExpr::Kind::Div: {
            double denom = evaluate_tree(e.children[1], state, params);
            if (denom == 0.0) throw EvalError("evaluate: division by zero");
            return evaluate_tree(e.children[0], state, params) / denom;
        }
        case RateExpr::Kind::Neg: return 0.0 - evaluate_tree(e.children[0], state, params);
        case RateExpr::Kind::PowInt: return pow_int_value(evaluate_tree(e.children[0], state, params), e.exponent);
    }
    throw std::logic_error("evaluate_tree: bad node");
}

Polynomial to_polynomial(const RateExpr& e, size_t n_species, std::span<const double> params) {
    switch (e.kind) {
        case RateExpr::Kind::Const: return Polynomial::constant(n_species, e.value);
        case RateExpr::Kind::Param: return Polynomial::constant(n_species, params[e.index]);
        case RateExpr::Kind::Species: return Polynomial::variable(n_species, e.index);
        case RateExpr::Kind::Add:
            return to_polynomial(e.children[0], n_species, params) + to_polynomial(e.children[1], n_species, params);
        case RateExpr::Kind::Sub:
            return to_polynomial(e.children[0], n_species, params) - to_polynomial(e.children[1], n_species, params);
        case RateExpr::Kind::Mul:
            return to_polynomial(e.children[0], n_species, params) * to_polynomial(e.children[1], n_species, params);
        case RateExpr::Kind::Div: {
            Polynomial denom = to_polynomial(e.children[1], n_species, params);
            if (!denom.is_constant())
                throw PolynomialityError("rate divides by a species-dependent term: " + e.children[1].to_string());
            double c = denom.constant_term();
            if (c == 0.0) throw EvalError("to_polynomial: division by zero constant");
            return to_polynomial(e.children[0], n_species, params) * (1.0 / c);
        }
        case RateExpr::Kind::Neg: return to_polynomial(e.children[0], n_species, params) * -1.0;
        case RateExpr::Kind::PowInt: {
            Polynomial base = to_polynomial(e.children[0], n_species, params);
            if (e.exponent < 0) {
                if (!base.is_constant())
                    throw PolynomialityError("rate raises a species-dependent term to a negative power");
                double c = base.constant_term();
                if (c == 0.0) throw EvalError("to_polynomial: zero raised to a negative power");
                return Polynomial::constant(n_species, std::pow(c, e.exponent));
            }
            Polynomial r = Polynomial::constant(n_species, 1.0);
            for (int k = 0; k < e.exponent; ++k) r = r * base;
            return r;
        }
    }
    throw std::logic_error("to_polynomial: bad node");
}

}  // namespace srncv
