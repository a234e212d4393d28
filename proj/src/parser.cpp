#include "srncv/parser.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

namespace srncv {

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error("parse error at " + std::to_string(line) + ":" + std::to_string(column) +
                         ": " + message),
      line(line),
      column(column) {}

namespace {

// Single-line cursor with 1-based column reporting.
class Cursor {
public:
    Cursor(const std::string& text, int line) : text_(text), line_(line) {}

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }
    bool at_end() {
        skip_ws();
        return pos_ >= text_.size();
    }
    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }
    bool consume(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    bool consume_arrow() {
        skip_ws();
        if (text_.compare(pos_, 2, "->") == 0) {
            pos_ += 2;
            return true;
        }
        return false;
    }
    void expect(char c, const std::string& what) {
        if (!consume(c)) fail("expected '" + std::string(1, c) + "' " + what);
    }

    std::string identifier() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        if (pos_ == start) fail("expected identifier");
        return text_.substr(start, pos_ - start);
    }

    bool peek_identifier() {
        skip_ws();
        return pos_ < text_.size() &&
               (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_');
    }

    bool peek_digit() {
        skip_ws();
        return pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]));
    }

    double number() {
        skip_ws();
        const char* begin = text_.c_str() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) fail("expected number");
        pos_ += static_cast<size_t>(end - begin);
        return v;
    }

    long long integer() {
        skip_ws();
        size_t start = pos_;
        if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E'))
            fail("expected integer");
        if (pos_ == start || (pos_ == start + 1 && !std::isdigit(static_cast<unsigned char>(text_[start]))))
            fail("expected integer");
        return std::stoll(text_.substr(start, pos_ - start));
    }

    [[noreturn]] void fail(const std::string& message) const {
        throw ParseError(line_, static_cast<int>(pos_) + 1, message);
    }

    int line() const { return line_; }
    int column() const { return static_cast<int>(pos_) + 1; }

private:
    const std::string& text_;
    size_t pos_ = 0;
    int line_;
};

struct Builder {
    Model model;
    std::map<std::string, uint32_t> species_idx;
    std::map<std::string, uint32_t> param_idx;
    std::map<std::string, int64_t> inits;

    uint32_t declare_species(const std::string& name) {
        auto it = species_idx.find(name);
        if (it != species_idx.end()) return it->second;
        uint32_t idx = static_cast<uint32_t>(model.species.size());
        model.species.push_back(name);
        species_idx.emplace(name, idx);
        return idx;
    }
};

// Arithmetic grammar: expr := term (('+'|'-') term)*; term := factor (('*'|'/') factor)*;
// factor := ('-')? primary ('^' int)?; primary := number | identifier | '(' expr ')'.
// Identifiers resolve to parameters first, then to already-declared species.
RateExpr parse_arith(Cursor& c, const Builder& b);

RateExpr parse_primary(Cursor& c, const Builder& b) {
    if (c.consume('(')) {
        RateExpr e = parse_arith(c, b);
        c.expect(')', "to close parenthesis");
        return e;
    }
    if (c.peek_identifier()) {
        std::string name = c.identifier();
        if (auto it = b.param_idx.find(name); it != b.param_idx.end())
            return RateExpr::parameter(it->second, name);
        if (auto it = b.species_idx.find(name); it != b.species_idx.end())
            return RateExpr::species(it->second, name);
        c.fail("unknown parameter or species '" + name + "'");
    }
    return RateExpr::constant(c.number());
}

RateExpr parse_factor(Cursor& c, const Builder& b) {
    bool neg = false;
    while (c.consume('-')) neg = !neg;
    RateExpr e = parse_primary(c, b);
    if (c.consume('^')) {
        long long k = c.integer();
        e = RateExpr::pow_int(std::move(e), static_cast<int>(k));
    }
    return neg ? RateExpr::negate(std::move(e)) : e;
}

RateExpr parse_term(Cursor& c, const Builder& b) {
    RateExpr e = parse_factor(c, b);
    while (true) {
        if (c.consume('*'))
            e = RateExpr::binary(RateExpr::Kind::Mul, std::move(e), parse_factor(c, b));
        else if (c.consume('/'))
            e = RateExpr::binary(RateExpr::Kind::Div, std::move(e), parse_factor(c, b));
        else
            return e;
    }
}

RateExpr parse_arith(Cursor& c, const Builder& b) {
    RateExpr e = parse_term(c, b);
    while (true) {
        if (c.consume('+'))
            e = RateExpr::binary(RateExpr::Kind::Add, std::move(e), parse_term(c, b));
        else if (c.consume('-'))
            e = RateExpr::binary(RateExpr::Kind::Sub, std::move(e), parse_term(c, b));
        else
            return e;
    }
}

// side := '0' | [k] name ('+' [k] name)*
std::vector<std::pair<std::string, uint32_t>> parse_side(Cursor& c) {
    std::vector<std::pair<std::string, uint32_t>> entries;
    if (c.peek() == '0') {
        c.consume('0');
        return entries;
    }
    while (true) {
        uint32_t mult = 1;
        if (c.peek_digit()) {
            long long k = c.integer();
            if (k <= 0) c.fail("stoichiometric multiplicity must be a positive integer");
            mult = static_cast<uint32_t>(k);
        }
        if (!c.peek_identifier()) c.fail("expected species name");
        entries.emplace_back(c.identifier(), mult);
        if (!c.consume('+')) break;
    }
    return entries;
}

double eval_const_expr(const RateExpr& e, const Builder& b, Cursor& c) {
    try {
        Polynomial p = to_polynomial(e, b.model.species.size(), b.model.parameter_values);
        if (!p.is_constant()) c.fail("mass_action rate constant must not depend on species counts");
        return p.constant_term();
    } catch (const PolynomialityError&) {
        c.fail("mass_action rate constant must not depend on species counts");
    } catch (const EvalError& err) {
        c.fail(err.what());
    }
}

void parse_reaction_line(Cursor& c, Builder& b) {
    auto lhs = parse_side(c);
    if (!c.consume_arrow()) c.fail("malformed reaction arrow");
    auto rhs = parse_side(c);
    c.expect('@', "before rate law");
    std::string rate_kind = c.identifier();

    Reaction r;
    // declare species left-to-right before parsing the rate expression
    for (auto& [name, mult] : lhs) {
        if (b.param_idx.count(name)) c.fail("'" + name + "' names a parameter, not a species");
        b.declare_species(name);
    }
    for (auto& [name, mult] : rhs) {
        if (b.param_idx.count(name)) c.fail("'" + name + "' names a parameter, not a species");
        b.declare_species(name);
    }

    if (rate_kind == "mass_action") {
        c.expect('(', "after mass_action");
        RateExpr e = parse_arith(c, b);
        c.expect(')', "to close mass_action");
        double value = eval_const_expr(e, b, c);
        if (!(value > 0.0)) c.fail("mass-action rate constant must be positive");
        r.rate_law = MassAction{value};
    } else if (rate_kind == "expr") {
        c.expect('(', "after expr");
        RateExpr e = parse_arith(c, b);
        c.expect(')', "to close expr");
        r.rate_law = std::move(e);
    } else {
        c.fail("unknown rate law '" + rate_kind + "' (expected mass_action or expr)");
    }
    if (!c.at_end()) c.fail("trailing input after reaction");

    r.reactants.assign(b.model.species.size(), 0);
    r.products.assign(b.model.species.size(), 0);
    for (auto& [name, mult] : lhs) r.reactants[b.species_idx.at(name)] += mult;
    for (auto& [name, mult] : rhs) r.products[b.species_idx.at(name)] += mult;
    if (lhs.empty() && rhs.empty()) c.fail("reaction with empty reactant and product sides");
    b.model.reactions.push_back(std::move(r));
}

std::string format_number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

Model parse_model(const std::string& source) {
    Builder b;
    std::istringstream in(source);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        Cursor c(raw, line_no);
        if (c.at_end()) continue;
        if (!c.peek_identifier() && !c.peek_digit()) c.fail("expected declaration or reaction");

        // reaction lines may start with a digit ('0 ->', '2 M ->'); keyword
        // lines start with an identifier that is not a species usage
        if (c.peek_identifier()) {
            // lookahead on a copy to distinguish keywords from reactions
            Cursor probe = c;
            std::string word = probe.identifier();
            if (word == "parameter") {
                c.identifier();
                std::string name = c.identifier();
                c.expect('=', "in parameter definition");
                double v = c.number();
                if (!c.at_end()) c.fail("trailing input after parameter definition");
                if (b.param_idx.count(name)) c.fail("duplicate parameter '" + name + "'");
                if (b.species_idx.count(name)) c.fail("'" + name + "' already names a species");
                b.param_idx.emplace(name, static_cast<uint32_t>(b.model.parameter_names.size()));
                b.model.parameter_names.push_back(name);
                b.model.parameter_values.push_back(v);
                continue;
            }
            if (word == "init") {
                c.identifier();
                std::string name = c.identifier();
                c.expect('=', "in init declaration");
                long long v = c.integer();
                if (v < 0) c.fail("initial count must be non-negative");
                if (!c.at_end()) c.fail("trailing input after init declaration");
                if (b.param_idx.count(name)) c.fail("'" + name + "' names a parameter, not a species");
                if (b.inits.count(name)) c.fail("duplicate init for species '" + name + "'");
                b.declare_species(name);
                b.inits.emplace(name, v);
                continue;
            }
        }
        parse_reaction_line(c, b);
    }

    b.model.initial_state.assign(b.model.species.size(), 0);
    for (auto& [name, v] : b.inits) b.model.initial_state[b.species_idx.at(name)] = v;
    b.model.validate();
    return b.model;
}

std::string to_source(const Model& model) {
    std::ostringstream os;
    for (size_t i = 0; i < model.parameter_names.size(); ++i)
        os << "parameter " << model.parameter_names[i] << " = " << format_number(model.parameter_values[i])
           << "\n";
    // init lines come first so re-parsing reproduces the species order
    for (size_t i = 0; i < model.species.size(); ++i)
        os << "init " << model.species[i] << " = " << model.initial_state[i] << "\n";
    for (const Reaction& r : model.reactions) {
        auto side = [&](const std::vector<uint32_t>& v) {
            std::string s;
            for (size_t i = 0; i < v.size(); ++i) {
                if (v[i] == 0) continue;
                if (!s.empty()) s += " + ";
                if (v[i] > 1) s += std::to_string(v[i]) + " ";
                s += model.species[i];
            }
            return s.empty() ? std::string("0") : s;
        };
        os << side(r.reactants) << " -> " << side(r.products) << " @ ";
        if (const auto* ma = std::get_if<MassAction>(&r.rate_law))
            os << "mass_action(" << format_number(ma->c) << ")";
        else
            os << "expr(" << std::get<RateExpr>(r.rate_law).to_string() << ")";
        os << "\n";
    }
    return os.str();
}

}  // namespace srncv
