#include <doctest.h>

#include <cmath>
#include <vector>

#include "srncv/rng.hpp"
#include "srncv/stats.hpp"

using namespace srncv;

namespace {

struct Samples {
    std::vector<double> v;
    std::vector<std::vector<double>> z;

    RunningStats stream() const {
        RunningStats s(z.empty() ? 0 : z[0].size());
        for (size_t i = 0; i < v.size(); ++i) s.push(v[i], z[i]);
        return s;
    }
};

Samples random_samples(Philox4x32& rng, size_t n, size_t d) {
    Samples s;
    for (size_t i = 0; i < n; ++i) {
        std::vector<double> z(d);
        double common = rng.normal();
        for (auto& zi : z) zi = common + 0.7 * rng.normal();
        s.v.push_back(2.0 * common + rng.normal() + 5.0);
        s.z.push_back(std::move(z));
    }
    return s;
}

// plain two-pass covariance, the reference the online path is checked against
double two_pass_cov(const std::vector<double>& a, const std::vector<double>& b) {
    const size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double c = 0.0;
    for (size_t i = 0; i < n; ++i) c += (a[i] - ma) * (b[i] - mb);
    return c / (n - 1);
}

}  // namespace

TEST_CASE("two pushes give the textbook mean and variance") {
    RunningStats s(0);
    s.push(1.0, {});
    s.push(3.0, {});
    CHECK(s.mean_v() == 2.0);
    CHECK(s.var_v() == 2.0);
}

TEST_CASE("covariance queries error below two samples") {
    RunningStats s(1);
    std::vector<double> z = {1.0};
    s.push(1.0, z);
    CHECK_THROWS_AS(s.var_v(), std::logic_error);
    CHECK_THROWS_AS(s.cov_zv(0), std::logic_error);
}

TEST_CASE("identically zero variates give a zero covariance block") {
    RunningStats s(2);
    std::vector<double> z = {0.0, 0.0};
    for (double v : {1.0, 4.0, 2.0}) s.push(v, z);
    CHECK(s.cov_zz(0, 0) == 0.0);
    CHECK(s.cov_zz(1, 0) == 0.0);
    CHECK(s.cov_zv(1) == 0.0);
}

TEST_CASE("scalar beta is cov over variance") {
    const double sz = std::sqrt(2.0 / 3.0), tv = std::sqrt(3.0 / 2.0);
    RunningStats s(1);
    for (double u : {-1.0, 0.0, 1.0}) {
        std::vector<double> z = {sz * u};
        s.push(tv * u, z);
    }
    CHECK(s.cov_zv(0) == doctest::Approx(1.0));
    CHECK(s.cov_zz(0, 0) == doctest::Approx(2.0 / 3.0));
    BetaFit fit = estimate_beta(s);
    REQUIRE(fit.kept.size() == 1);
    CHECK(fit.beta[0] == doctest::Approx(1.5));
}

TEST_CASE("a perfectly collinear variate zeroes the residual and recovers the exact value") {
    RunningStats s(1);
    const double mu = 3.0;
    for (double v : {1.0, 2.0, 4.0, 8.0, 5.0, 0.5}) {
        std::vector<double> z = {2.0 * (v - mu)};
        s.push(v, z);
    }
    LcvEstimate e = lcv_estimate(s);
    CHECK(e.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.point == doctest::Approx(mu).epsilon(1e-12));
    CHECK(e.variance_lcv <= 1e-12 * e.variance_crude * static_cast<double>(e.n));
    CHECK(e.beta[0] == doctest::Approx(0.5));
}

TEST_CASE("duplicated variates: one is dropped, beta fits on the survivor") {
    Philox4x32 rng(5, 0u, 0);
    RunningStats s(2);
    for (int i = 0; i < 50; ++i) {
        const double z = rng.normal();
        std::vector<double> zz = {z, z};
        s.push(z + 0.3 * rng.normal(), zz);
    }
    BetaFit fit = estimate_beta(s);
    REQUIRE(fit.dropped.size() == 1);
    CHECK(fit.dropped[0] == 1);
    REQUIRE(fit.kept.size() == 1);
    CHECK(fit.kept[0] == 0);
    CHECK(fit.beta[1] == 0.0);
    CHECK(fit.beta[0] != 0.0);
}

TEST_CASE("lcv with no variates reduces to the crude mean") {
    RunningStats s(0);
    for (double v : {1.0, 2.0, 3.0, 4.0}) s.push(v, {});
    LcvEstimate e = lcv_estimate(s);
    CHECK(e.point == doctest::Approx(2.5));
    CHECK(e.variance_lcv == doctest::Approx(e.variance_crude));
    CHECK(e.d == 0);
}

TEST_CASE("finite-sample factor at R^2 = 0.75, n = 1002, d = 1") {
    // blocks of four samples with exactly orthogonal z and e parts:
    // z explains exactly 3/4 of the sample variance of v = z + e
    RunningStats s(1);
    const double root3 = std::sqrt(3.0);
    for (int k = 0; k < 250; ++k) {
        const double zs[4] = {root3, root3, -root3, -root3};
        const double es[4] = {1.0, -1.0, 1.0, -1.0};
        for (int i = 0; i < 4; ++i) {
            std::vector<double> z = {zs[i]};
            s.push(zs[i] + es[i], z);
        }
    }
    std::vector<double> z0 = {0.0};
    s.push(0.0, z0);
    s.push(0.0, z0);
    REQUIRE(s.count() == 1002);
    LcvEstimate e = lcv_estimate(s);
    CHECK(e.r_squared == doctest::Approx(0.75).epsilon(1e-12));
    const double factor = e.variance_lcv / e.variance_crude;
    CHECK(factor == doctest::Approx((1000.0 / 999.0) * 0.25).epsilon(1e-12));
}

TEST_CASE("improvement ratio") {
    CHECK(improvement_ratio(0.0) == 1.0);
    CHECK(improvement_ratio(0.9) == doctest::Approx(1.0 / 0.19));
    CHECK(improvement_ratio(1.0) == kImprovementCap);
    CHECK(improvement_ratio(-1.0) == kImprovementCap);
    CHECK(improvement_ratio(0.99999951) == kImprovementCap);
    CHECK(improvement_ratio(1.5) == kImprovementCap);  // clamped defensively
}

TEST_CASE("efficiency") {
    CHECK(efficiency(1.0, 4.0, 1.0, 1.0) == doctest::Approx(4.0));
    CHECK(efficiency(2.0, 3.0, 4.0, 1.5) == doctest::Approx(1.0));
    CHECK_THROWS_AS(efficiency(0.0, 1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(efficiency(1.0, -1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("online covariance matches two-pass within 1e-9") {
    Philox4x32 rng(11, 0u, 0);
    Samples s = random_samples(rng, 5000, 3);
    RunningStats stats = s.stream();
    for (size_t i = 0; i < 3; ++i) {
        std::vector<double> zi(s.v.size());
        for (size_t k = 0; k < s.v.size(); ++k) zi[k] = s.z[k][i];
        CHECK(stats.cov_zv(i) == doctest::Approx(two_pass_cov(zi, s.v)).epsilon(1e-9));
        for (size_t j = 0; j <= i; ++j) {
            std::vector<double> zj(s.v.size());
            for (size_t k = 0; k < s.v.size(); ++k) zj[k] = s.z[k][j];
            CHECK(stats.cov_zz(i, j) == doctest::Approx(two_pass_cov(zi, zj)).epsilon(1e-9));
        }
    }
}

TEST_CASE("merging partitions equals the single stream") {
    Philox4x32 rng(13, 0u, 0);
    Samples s = random_samples(rng, 3000, 2);
    RunningStats whole = s.stream();

    for (size_t cut1 : {1ul, 77ul, 1500ul, 2999ul}) {
        RunningStats a(2), b(2), c(2);
        for (size_t i = 0; i < cut1; ++i) a.push(s.v[i], s.z[i]);
        const size_t cut2 = cut1 + (3000 - cut1) / 2;
        for (size_t i = cut1; i < cut2; ++i) b.push(s.v[i], s.z[i]);
        for (size_t i = cut2; i < 3000; ++i) c.push(s.v[i], s.z[i]);
        RunningStats merged = a;
        merged.merge(b);
        merged.merge(c);
        CHECK(merged.count() == whole.count());
        CHECK(merged.mean_v() == doctest::Approx(whole.mean_v()).epsilon(1e-12));
        CHECK(merged.var_v() == doctest::Approx(whole.var_v()).epsilon(1e-9));
        for (size_t i = 0; i < 2; ++i) {
            CHECK(merged.mean_z()[i] == doctest::Approx(whole.mean_z()[i]).epsilon(1e-12));
            CHECK(merged.cov_zv(i) == doctest::Approx(whole.cov_zv(i)).epsilon(1e-9));
            for (size_t j = 0; j <= i; ++j)
                CHECK(merged.cov_zz(i, j) == doctest::Approx(whole.cov_zz(i, j)).epsilon(1e-9));
        }
    }

    RunningStats empty(2);
    RunningStats onto = whole;
    onto.merge(empty);
    CHECK(onto.mean_v() == whole.mean_v());
    RunningStats from(2);
    from.merge(whole);
    CHECK(from.mean_v() == whole.mean_v());
}

TEST_CASE("fitted residuals are empirically orthogonal to retained variates") {
    Philox4x32 rng(17, 0u, 0);
    Samples s = random_samples(rng, 4000, 3);
    RunningStats stats = s.stream();
    BetaFit fit = estimate_beta(stats);
    REQUIRE(fit.kept.size() == 3);

    std::vector<double> resid(s.v.size());
    for (size_t k = 0; k < s.v.size(); ++k) {
        double r = s.v[k];
        for (size_t i = 0; i < 3; ++i) r -= fit.beta[i] * s.z[k][i];
        resid[k] = r;
    }
    const double sd_v = std::sqrt(stats.var_v());
    for (size_t i = 0; i < 3; ++i) {
        std::vector<double> zi(s.v.size());
        for (size_t k = 0; k < s.v.size(); ++k) zi[k] = s.z[k][i];
        const double c = std::abs(two_pass_cov(resid, zi));
        const double scale = sd_v * std::sqrt(stats.cov_zz(i, i));
        CHECK(c <= 1e-8 * scale);
    }
}

TEST_CASE("estimate_beta insists on n >= d + 3") {
    RunningStats s(2);
    std::vector<double> z = {1.0, 2.0};
    for (int i = 0; i < 4; ++i) s.push(static_cast<double>(i), z);
    CHECK_THROWS_AS(estimate_beta(s), std::invalid_argument);
}
