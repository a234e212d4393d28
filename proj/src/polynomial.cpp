#include "srncv/polynomial.hpp"

#include <cassert>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace srncv {

Polynomial Polynomial::constant(size_t n_vars, double c) {
    Polynomial p(n_vars);
    p.add_term(MultiIndex(n_vars, 0), c);
    return p;
}

Polynomial Polynomial::variable(size_t n_vars, size_t i) {
    assert(i < n_vars);
    Polynomial p(n_vars);
    MultiIndex m(n_vars, 0);
    m[i] = 1;
    p.add_term(m, 1.0);
    return p;
}

Polynomial Polynomial::monomial(MultiIndex m, double c) {
    Polynomial p(m.size());
    p.add_term(m, c);
    return p;
}

bool Polynomial::is_constant() const {
    if (terms_.empty()) return true;
    return terms_.size() == 1 && order(terms_.begin()->first) == 0;
}

double Polynomial::constant_term() const {
    auto it = terms_.find(MultiIndex(n_vars_, 0));
    return it == terms_.end() ? 0.0 : it->second;
}

uint32_t Polynomial::degree() const {
    uint32_t d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, order(m));
    return d;
}

void Polynomial::add_term(const MultiIndex& m, double c) {
    if (m.size() != n_vars_) throw std::invalid_argument("Polynomial: multi-index arity mismatch");
    if (c == 0.0) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0.0) terms_.erase(it);
    }
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
    if (n_vars_ != o.n_vars_) throw std::invalid_argument("Polynomial: arity mismatch");
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
    if (n_vars_ != o.n_vars_) throw std::invalid_argument("Polynomial: arity mismatch");
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
}

Polynomial& Polynomial::operator*=(double s) {
    if (s == 0.0) {
        terms_.clear();
        return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.n_vars_ != b.n_vars_) throw std::invalid_argument("Polynomial: arity mismatch");
    Polynomial r(a.n_vars_);
    MultiIndex m(a.n_vars_);
    for (const auto& [ma, ca] : a.terms_) {
        for (const auto& [mb, cb] : b.terms_) {
            for (size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
            r.add_term(m, ca * cb);
        }
    }
    return r;
}

double Polynomial::evaluate(std::span<const int64_t> x) const {
    double r = 0.0;
    for (const auto& [m, c] : terms_) r += c * eval_monomial(x, m);
    return r;
}

std::string Polynomial::to_string(std::span<const std::string> var_names) const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        double coeff = c;
        if (first) {
            if (coeff < 0) {
                os << "-";
                coeff = -coeff;
            }
        } else {
            os << (coeff < 0 ? " - " : " + ");
            coeff = std::abs(coeff);
        }
        first = false;
        bool printed_coeff = false;
        if (coeff != 1.0 || order(m) == 0) {
            os << coeff;
            printed_coeff = true;
        }
        for (size_t i = 0; i < m.size(); ++i) {
            if (m[i] == 0) continue;
            if (printed_coeff) os << "*";
            if (i < var_names.size())
                os << var_names[i];
            else
                os << "x" << i;
            if (m[i] > 1) os << "^" << m[i];
            printed_coeff = true;
        }
    }
    return os.str();
}

namespace {

double binom_coeff(uint32_t n, uint32_t k) {
    double r = 1.0;
    for (uint32_t j = 1; j <= k; ++j) r = r * (n - k + j) / j;
    return r;
}

}  // namespace

Polynomial shift_polynomial(const Polynomial& p, std::span<const int64_t> v) {
    if (v.size() != p.n_vars()) throw std::invalid_argument("shift_polynomial: arity mismatch");
    Polynomial result(p.n_vars());
    for (const auto& [m, c] : p.terms()) {
        // expand c * prod_i (x_i + v_i)^{m_i} one coordinate at a time
        Polynomial term = Polynomial::constant(p.n_vars(), c);
        for (size_t i = 0; i < m.size(); ++i) {
            if (m[i] == 0) continue;
            if (v[i] == 0) {
                MultiIndex mi(p.n_vars(), 0);
                mi[i] = m[i];
                term = term * Polynomial::monomial(mi, 1.0);
                continue;
            }
            Polynomial factor(p.n_vars());
            for (uint32_t k = 0; k <= m[i]; ++k) {
                MultiIndex mi(p.n_vars(), 0);
                mi[i] = k;
                factor.add_term(mi, binom_coeff(m[i], k) * std::pow(static_cast<double>(v[i]),
                                                                    static_cast<double>(m[i] - k)));
            }
            term = term * factor;
        }
        result += term;
    }
    return result;
}

Polynomial falling_factorial_polynomial(size_t n_vars, size_t i, uint32_t k) {
    Polynomial p = Polynomial::constant(n_vars, 1.0);
    Polynomial xi = Polynomial::variable(n_vars, i);
    for (uint32_t j = 0; j < k; ++j) p = p * (xi - Polynomial::constant(n_vars, static_cast<double>(j)));
    return p;
}

}  // namespace srncv
