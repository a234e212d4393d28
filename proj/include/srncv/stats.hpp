// Online joint statistics of (Z, V), the linear control-variate estimator
// with its finite-sample variance, and the cost-weighted efficiency metric.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace srncv {

/// Single-pass mean/comoment accumulator for a target V and a d-vector of
/// control variates Z. Supports an order-independent-in-exact-arithmetic
/// merge for parallel reduction; covariances use the n-1 divisor.
class RunningStats {
public:
    RunningStats() = default;
    explicit RunningStats(size_t d);

    size_t dim() const { return d_; }
    int64_t count() const { return n_; }

    void push(double v, std::span<const double> z);
    void merge(const RunningStats& other);

    double mean_v() const;
    double var_v() const;  // requires n >= 2
    const std::vector<double>& mean_z() const { return mean_z_; }

    double cov_zv(size_t i) const;
    double cov_zz(size_t i, size_t j) const;
    std::vector<double> cov_z_matrix() const;   // d*d row-major
    std::vector<double> cov_zv_vector() const;  // d

    /// Correlations clamped to [-1, 1]; 0 when either variance degenerates.
    double corr_zv(size_t i) const;
    double corr_zz(size_t i, size_t j) const;

private:
    void require_two() const;
    size_t tri(size_t i, size_t j) const {  // lower-triangle index, i >= j
        return i * (i + 1) / 2 + j;
    }

    size_t d_ = 0;
    int64_t n_ = 0;
    double mean_v_ = 0.0;
    double m2_v_ = 0.0;
    std::vector<double> mean_z_;
    std::vector<double> c_zv_;  // comoments with V
    std::vector<double> c_zz_;  // lower triangle of Z comoments
};

struct BetaFit {
    std::vector<double> beta;     // full length d, zeros at dropped entries
    std::vector<size_t> kept;     // retained variate indices
    std::vector<size_t> dropped;  // dropped as numerically singular
};

/// Solves Sigma_Z beta = Sigma_ZV by Cholesky on the retained set; a
/// non-positive pivot drops that variate and the factorization restarts.
BetaFit estimate_beta(const RunningStats& stats);

struct LcvEstimate {
    double point = 0.0;
    std::vector<double> beta;
    double variance_crude = 0.0;  // of the plain sample-mean estimator
    double variance_lcv = 0.0;    // finite-sample corrected
    double r_squared = 0.0;
    size_t d = 0;  // variates actually used (after dropping)
    int64_t n = 0;
    std::vector<size_t> dropped;

    double se() const;
    double se_crude() const;
    /// variance_crude / variance_lcv; capped when the residual vanishes.
    double variance_reduction() const;
};

LcvEstimate lcv_estimate(const RunningStats& stats);

inline constexpr double kRhoCapThreshold = 0.9999995;
inline constexpr double kImprovementCap = 1e6;

/// (1 - rho^2)^-1, capped at 1e6 when |rho| exceeds the cap threshold.
double improvement_ratio(double rho);

/// E = (c0 * var0) / (c1 * var1); all inputs must be positive.
double efficiency(double c0, double var0, double c1, double var1);

struct EfficiencyReport {
    double c0 = 0.0;  // mean per-sample cost, baseline
    double c1 = 0.0;  // mean per-sample cost, control variates (incl. search)
    double variance_ratio = 0.0;
    double efficiency_value = 0.0;
    double slowdown() const { return c0 > 0.0 ? c1 / c0 : 0.0; }
};

}  // namespace srncv
