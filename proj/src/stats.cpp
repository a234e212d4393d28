#include "srncv/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace srncv {

RunningStats::RunningStats(size_t d)
    : d_(d), mean_z_(d, 0.0), c_zv_(d, 0.0), c_zz_(d * (d + 1) / 2, 0.0) {}

void RunningStats::push(double v, std::span<const double> z) {
    if (z.size() != d_) throw std::invalid_argument("RunningStats::push: dimension mismatch");
    ++n_;
    const double inv_n = 1.0 / static_cast<double>(n_);
    const double dv = v - mean_v_;
    mean_v_ += dv * inv_n;
    const double dv_new = v - mean_v_;
    m2_v_ += dv * dv_new;

    // old deltas feed the comoment updates; means advance afterwards
    double stack_buf[16];
    std::vector<double> heap_buf;
    double* dz = stack_buf;
    if (d_ > 16) {
        heap_buf.resize(d_);
        dz = heap_buf.data();
    }
    for (size_t i = 0; i < d_; ++i) dz[i] = z[i] - mean_z_[i];
    for (size_t i = 0; i < d_; ++i) mean_z_[i] += dz[i] * inv_n;
    for (size_t i = 0; i < d_; ++i) {
        const double dzi_new = z[i] - mean_z_[i];
        c_zv_[i] += dv * dzi_new;
        for (size_t j = 0; j <= i; ++j) c_zz_[tri(i, j)] += dz[j] * dzi_new;
    }
}

void RunningStats::merge(const RunningStats& o) {
    if (o.d_ != d_) throw std::invalid_argument("RunningStats::merge: dimension mismatch");
    if (o.n_ == 0) return;
    if (n_ == 0) {
        *this = o;
        return;
    }
    const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
    const double n = na + nb;
    const double w = na * nb / n;
    const double dv = o.mean_v_ - mean_v_;
    m2_v_ += o.m2_v_ + dv * dv * w;
    for (size_t i = 0; i < d_; ++i) {
        const double dzi = o.mean_z_[i] - mean_z_[i];
        c_zv_[i] += o.c_zv_[i] + dzi * dv * w;
        for (size_t j = 0; j <= i; ++j)
            c_zz_[tri(i, j)] += o.c_zz_[tri(i, j)] + dzi * (o.mean_z_[j] - mean_z_[j]) * w;
    }
    mean_v_ += dv * nb / n;
    for (size_t i = 0; i < d_; ++i) mean_z_[i] += (o.mean_z_[i] - mean_z_[i]) * nb / n;
    n_ += o.n_;
}

void RunningStats::require_two() const {
    if (n_ < 2) throw std::logic_error("RunningStats: covariance undefined for fewer than 2 samples");
}

double RunningStats::mean_v() const {
    if (n_ < 1) throw std::logic_error("RunningStats: no samples");
    return mean_v_;
}

double RunningStats::var_v() const {
    require_two();
    return m2_v_ / static_cast<double>(n_ - 1);
}

double RunningStats::cov_zv(size_t i) const {
    require_two();
    return c_zv_.at(i) / static_cast<double>(n_ - 1);
}

double RunningStats::cov_zz(size_t i, size_t j) const {
    require_two();
    if (i < j) std::swap(i, j);
    return c_zz_.at(tri(i, j)) / static_cast<double>(n_ - 1);
}

std::vector<double> RunningStats::cov_z_matrix() const {
    require_two();
    std::vector<double> m(d_ * d_);
    for (size_t i = 0; i < d_; ++i)
        for (size_t j = 0; j < d_; ++j) m[i * d_ + j] = cov_zz(i, j);
    return m;
}

std::vector<double> RunningStats::cov_zv_vector() const {
    require_two();
    std::vector<double> v(d_);
    for (size_t i = 0; i < d_; ++i) v[i] = cov_zv(i);
    return v;
}

namespace {

double safe_corr(double cov, double var_a, double var_b) {
    if (!(var_a > 0.0) || !(var_b > 0.0)) return 0.0;
    const double r = cov / std::sqrt(var_a * var_b);
    if (!std::isfinite(r)) return 0.0;
    return std::clamp(r, -1.0, 1.0);
}

}  // namespace

double RunningStats::corr_zv(size_t i) const { return safe_corr(cov_zv(i), cov_zz(i, i), var_v()); }

double RunningStats::corr_zz(size_t i, size_t j) const {
    return safe_corr(cov_zz(i, j), cov_zz(i, i), cov_zz(j, j));
}

BetaFit estimate_beta(const RunningStats& stats) {
    const size_t d = stats.dim();
    const int64_t n = stats.count();
    if (n < static_cast<int64_t>(d) + 3)
        throw std::invalid_argument("estimate_beta: need at least d + 3 samples");

    BetaFit fit;
    fit.beta.assign(d, 0.0);
    std::vector<size_t> active(d);
    for (size_t i = 0; i < d; ++i) active[i] = i;

    // drop zero-variance variates up front
    {
        std::vector<size_t> keep;
        for (size_t i : active) {
            if (stats.cov_zz(i, i) > 0.0)
                keep.push_back(i);
            else
                fit.dropped.push_back(i);
        }
        active = std::move(keep);
    }

    constexpr double kPivotTol = 1e-12;
    while (!active.empty()) {
        const size_t k = active.size();
        std::vector<double> a(k * k);
        for (size_t i = 0; i < k; ++i)
            for (size_t j = 0; j < k; ++j) a[i * k + j] = stats.cov_zz(active[i], active[j]);

        // in-place lower Cholesky; bail out on the first bad pivot
        size_t bad = k;
        for (size_t i = 0; i < k && bad == k; ++i) {
            for (size_t j = 0; j <= i; ++j) {
                double s = a[i * k + j];
                for (size_t p = 0; p < j; ++p) s -= a[i * k + p] * a[j * k + p];
                if (i == j) {
                    if (s <= kPivotTol * stats.cov_zz(active[i], active[i])) {
                        bad = i;
                        break;
                    }
                    a[i * k + i] = std::sqrt(s);
                } else {
                    a[i * k + j] = s / a[j * k + j];
                }
            }
        }
        if (bad != k) {
            fit.dropped.push_back(active[bad]);
            active.erase(active.begin() + static_cast<std::ptrdiff_t>(bad));
            continue;
        }

        std::vector<double> y(k);
        for (size_t i = 0; i < k; ++i) {
            double s = stats.cov_zv(active[i]);
            for (size_t p = 0; p < i; ++p) s -= a[i * k + p] * y[p];
            y[i] = s / a[i * k + i];
        }
        for (size_t ii = k; ii-- > 0;) {
            double s = y[ii];
            for (size_t p = ii + 1; p < k; ++p) s -= a[p * k + ii] * fit.beta[active[p]];
            fit.beta[active[ii]] = s / a[ii * k + ii];
        }
        fit.kept = active;
        break;
    }
    std::sort(fit.dropped.begin(), fit.dropped.end());
    return fit;
}

LcvEstimate lcv_estimate(const RunningStats& stats) {
    LcvEstimate e;
    e.n = stats.count();
    if (e.n < 2) throw std::invalid_argument("lcv_estimate: need at least 2 samples");
    const double var_v = stats.var_v();
    e.variance_crude = var_v / static_cast<double>(e.n);

    if (stats.dim() == 0) {
        e.point = stats.mean_v();
        e.variance_lcv = e.variance_crude;
        e.beta.clear();
        return e;
    }

    BetaFit fit = estimate_beta(stats);
    e.beta = fit.beta;
    e.dropped = fit.dropped;
    e.d = fit.kept.size();

    double point = stats.mean_v();
    double explained = 0.0;
    for (size_t i : fit.kept) {
        point -= fit.beta[i] * stats.mean_z()[i];
        explained += fit.beta[i] * stats.cov_zv(i);
    }
    e.point = point;
    e.r_squared = var_v > 0.0 ? std::clamp(explained / var_v, 0.0, 1.0) : 0.0;

    const double n = static_cast<double>(e.n);
    const double dd = static_cast<double>(e.d);
    if (n - 2.0 - dd <= 0.0) throw std::invalid_argument("lcv_estimate: need n > d + 2");
    const double factor = (n - 2.0) / (n - 2.0 - dd);
    e.variance_lcv = factor * (1.0 - e.r_squared) * var_v / n;
    return e;
}

double LcvEstimate::se() const { return std::sqrt(variance_lcv); }
double LcvEstimate::se_crude() const { return std::sqrt(variance_crude); }

double LcvEstimate::variance_reduction() const {
    if (variance_lcv <= 0.0) return kImprovementCap;
    const double r = variance_crude / variance_lcv;
    return std::min(r, kImprovementCap);
}

double improvement_ratio(double rho) {
    double a = std::abs(rho);
    if (a > 1.0) a = 1.0;
    if (a > kRhoCapThreshold) return kImprovementCap;
    return 1.0 / (1.0 - a * a);
}

double efficiency(double c0, double var0, double c1, double var1) {
    if (!(c0 > 0.0) || !(var0 > 0.0) || !(c1 > 0.0) || !(var1 > 0.0))
        throw std::invalid_argument("efficiency: all inputs must be positive");
    return (c0 * var0) / (c1 * var1);
}

}  // namespace srncv
