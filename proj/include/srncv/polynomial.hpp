// Multivariate polynomials over species counts, used for propensity
// expansion and moment drift. Keys are exponent multi-indices, one entry
// per species; the representation is canonical (no zero coefficients).
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace srncv {

using MultiIndex = std::vector<uint32_t>;

inline uint32_t order(const MultiIndex& m) {
    uint32_t s = 0;
    for (uint32_t e : m) s += e;
    return s;
}

/// x^m with x integer-valued species counts.
inline double eval_monomial(std::span<const int64_t> x, const MultiIndex& m) {
    double r = 1.0;
    for (size_t i = 0; i < m.size(); ++i) {
        const double xi = static_cast<double>(x[i]);
        for (uint32_t k = 0; k < m[i]; ++k) r *= xi;
    }
    return r;
}

class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(size_t n_vars) : n_vars_(n_vars) {}

    static Polynomial constant(size_t n_vars, double c);
    static Polynomial variable(size_t n_vars, size_t i);
    static Polynomial monomial(MultiIndex m, double c);

    size_t n_vars() const { return n_vars_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    double constant_term() const;
    size_t term_count() const { return terms_.size(); }
    uint32_t degree() const;

    const std::map<MultiIndex, double>& terms() const { return terms_; }

    void add_term(const MultiIndex& m, double c);

    Polynomial& operator+=(const Polynomial& o);
    Polynomial& operator-=(const Polynomial& o);
    Polynomial& operator*=(double s);
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
    friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    bool operator==(const Polynomial& o) const { return n_vars_ == o.n_vars_ && terms_ == o.terms_; }

    double evaluate(std::span<const int64_t> x) const;

    /// Human-readable form, e.g. "10 + 2.6*x0 - 0.1*x0^2".
    std::string to_string(std::span<const std::string> var_names = {}) const;

private:
    size_t n_vars_ = 0;
    std::map<MultiIndex, double> terms_;
};

/// q with q(x) = p(x + v), by per-coordinate binomial expansion.
Polynomial shift_polynomial(const Polynomial& p, std::span<const int64_t> v);

/// Falling factorial x*(x-1)*...*(x-k+1) of variable i as a polynomial.
Polynomial falling_factorial_polynomial(size_t n_vars, size_t i, uint32_t k);

}  // namespace srncv
