#include "bwn/errors.hpp"
#include "bwn/noise.hpp"
#include "bwn/numerics.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace bwn;

namespace {

// closed-form Bessel potential transform, used only as an oracle
double bessel_oracle(int m, double kappa, double r) {
    double nu = std::abs(0.5 * (m - kappa));
    return std::pow(2 * M_PI, 0.5 * m) * std::pow(2.0, 1 - 0.5 * kappa) / std::tgamma(0.5 * kappa) *
           std::pow(r, 0.5 * (kappa - m)) * boost::math::cyl_bessel_k(nu, r);
}

double k_alpha_oracle(double r, double a) {
    return 2 * std::pow(r, a + 1) * boost::math::cyl_bessel_k(a + 1, 2 * r);
}

}  // namespace

TEST(Seeds, DistinctAndStable) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 50; ++s)
        for (std::uint64_t c = 0; c < 20; ++c) seen.insert(derive_seed(7, s, c));
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_EQ(derive_seed(7, 3, 1), derive_seed(7, 3, 1));
    EXPECT_NE(derive_seed(7, 3, 1), derive_seed(8, 3, 1));
}

TEST(Increments, VarianceAndIndependence) {
    const double dt = 0.01;
    const std::size_t n = 100000;
    auto inc = sample_increments(BoundaryNoiseSpec::endpoint_atoms({{0.0}, {1.0}}), dt, n, 42);
    double m0 = 0, v0 = 0, c01 = 0;
    for (const auto& i : inc) {
        m0 += i.dW[0];
        v0 += i.dW[0] * i.dW[0];
        c01 += i.dW[0] * i.dW[1];
    }
    m0 /= n;
    v0 /= n;
    c01 /= n;
    EXPECT_LT(std::abs(m0), 3 * std::sqrt(dt / n));
    EXPECT_LT(std::abs(v0 - dt), 3 * dt * std::sqrt(2.0 / n));
    EXPECT_LT(std::abs(c01), 3 * dt / std::sqrt(double(n)));
}

TEST(Increments, Replay) {
    auto spec = BoundaryNoiseSpec::circle_white(3);
    auto a = sample_increments(spec, 0.1, 50, 9), b = sample_increments(spec, 0.1, 50, 9);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].dW, b[i].dW);
    auto c = sample_increments(spec, 0.1, 50, 10);
    EXPECT_NE(a[0].dW, c[0].dW);
    EXPECT_THROW(sample_increments(spec, 0, 1, 1), ParameterError);
}

TEST(Increments, VarianceAdditivity) {
    const double dt = 0.02;
    const std::size_t n = 100000;
    auto whole = sample_increments(BoundaryNoiseSpec::endpoint_atoms({{0.0}}), dt, n, 1);
    auto half = sample_increments(BoundaryNoiseSpec::endpoint_atoms({{0.0}}), dt / 2, 2 * n, 2);
    double vw = 0, vh = 0;
    for (std::size_t i = 0; i < n; ++i) {
        vw += whole[i].dW[0] * whole[i].dW[0];
        double s = half[2 * i].dW[0] + half[2 * i + 1].dW[0];
        vh += s * s;
    }
    vw /= n;
    vh /= n;
    EXPECT_LT(std::abs(vw - vh), 3 * std::sqrt(2.0) * dt * std::sqrt(2.0 / n));
}

TEST(SpectralCorrelation, CauchyDensity) {
    auto mu = SpectralMeasure::bessel(1, 2);
    EXPECT_NEAR(spectral_correlation(mu, {1.0}), M_PI * std::exp(-1.0), 1e-9);
    EXPECT_NEAR(spectral_correlation(mu, {1.0}), 1.155727, 1e-6);
    for (double y : {0.01, 0.3, 3.0, 10.0})
        EXPECT_NEAR(spectral_correlation(mu, {y}), M_PI * std::exp(-y), 1e-9 * M_PI);
}

TEST(SpectralCorrelation, MatchesBesselClosedForm) {
    for (auto [m, kappa] : std::vector<std::pair<int, double>>{{1, 0.5}, {1, 3}, {2, 1}, {2, 3}, {3, 2}, {3, 4.5}})
        for (double r : {0.05, 0.5, 2.0, 6.0}) {
            Point y(m, 0.0);
            y[0] = r;
            double want = bessel_oracle(m, kappa, r);
            EXPECT_NEAR(spectral_correlation(SpectralMeasure::bessel(m, kappa), y), want, 1e-6 * want)
                << "m=" << m << " kappa=" << kappa << " r=" << r;
        }
}

TEST(SpectralCorrelation, SmallScaleSlope) {
    auto mu = SpectralMeasure::bessel(1, 0.5);
    std::vector<double> y = logspace(-4, -2, 5), g;
    for (double v : y) g.push_back(spectral_correlation(mu, {v}));
    EXPECT_NEAR(loglog_slope(y, g), -0.5, 0.05);
}

TEST(SpectralCorrelation, BoundedAboveDimension) {
    auto mu = SpectralMeasure::bessel(1, 3);
    double g0 = spectral_correlation(mu, {0.0});
    EXPECT_NEAR(g0, 2.0, 1e-9);
    for (double y : {1e-4, 1e-3, 1e-2}) {
        double g = spectral_correlation(mu, {y});
        EXPECT_LE(g, g0 * (1 + 1e-9));
        EXPECT_GT(g, 0.99 * g0);
    }
    EXPECT_TRUE(std::isinf(spectral_correlation(SpectralMeasure::bessel(1, 0.5), {0.0})));
}

TEST(SpectralCorrelation, LargeScaleDecay) {
    auto mu = SpectralMeasure::bessel(1, 0.5);
    double a = spectral_correlation(mu, {10.0}), b = spectral_correlation(mu, {12.0});
    EXPECT_NEAR(std::log(a / b), 2.0, 0.2);
}

TEST(SpectralCorrelation, SymmetryAndErrors) {
    auto mu = SpectralMeasure::bessel(2, 1.5);
    EXPECT_EQ(spectral_correlation(mu, {0.3, -0.7}), spectral_correlation(mu, {-0.3, 0.7}));
    auto at = SpectralMeasure::finite_atoms(1, {{2.0}, {5.0}}, {0.5, 0.25});
    EXPECT_EQ(spectral_correlation(at, {0.4}), spectral_correlation(at, {-0.4}));
    EXPECT_NEAR(spectral_correlation(at, {0.4}), 0.5 * std::cos(0.8) + 0.25 * std::cos(2.0), 1e-15);
    EXPECT_THROW(spectral_correlation(SpectralMeasure::lebesgue(1), {1.0}), UnsupportedError);
}

TEST(SpectralCorrelation, FiniteDensity) {
    // Gaussian density e^{-s^2} on R transforms to sqrt(pi) e^{-y^2/4}
    auto mu = SpectralMeasure::finite_density(1, [](double s) { return std::exp(-s * s); });
    for (double y : {0.0, 0.5, 2.0})
        EXPECT_NEAR(spectral_correlation(mu, {y}), std::sqrt(M_PI) * std::exp(-y * y / 4), 1e-9);
}

TEST(KAlpha, AtZero) {
    EXPECT_NEAR(k_alpha(0, 0), 1.0, 1e-10);
    EXPECT_NEAR(k_alpha(0, 1), 1.0, 1e-10);
    for (double a : {0.5, 2.3}) EXPECT_NEAR(k_alpha(0, a), std::tgamma(a + 1), 1e-10 * std::tgamma(a + 1));
    EXPECT_THROW(k_alpha(-1, 0), ParameterError);
}

TEST(KAlpha, MatchesBesselForm) {
    for (double a : {0.0, 0.25, 1.0})
        for (double r : {0.01, 0.3, 1.0, 4.0, 20.0}) {
            double want = k_alpha_oracle(r, a);
            EXPECT_NEAR(k_alpha(r, a), want, 1e-8 * want) << a << " " << r;
        }
}

TEST(KAlpha, DecreasingWithGrowingDecayRate) {
    double prev = INFINITY, prev_rate = 0;
    for (double r : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        double k = k_alpha(r, 0.5);
        EXPECT_LT(k, prev);
        prev = k;
        double h = 1e-4 * r;
        double rate = r * r * -(std::log(k_alpha(r + h, 0.5)) - std::log(k_alpha(r - h, 0.5))) / (2 * h);
        EXPECT_GT(rate, prev_rate);
        prev_rate = rate;
    }
}

TEST(Basis, CircleOrthonormal) {
    auto b = rkhs_basis(BoundaryNoiseSpec::circle_white(8));
    ASSERT_EQ(b.size(), 17u);
    auto G = gram_matrix(b, boundary_quadrature(Domain::unit_ball(2), 6));
    EXPECT_LT((G - Eigen::MatrixXd::Identity(17, 17)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Basis, EndpointAtoms) {
    auto b = rkhs_basis(BoundaryNoiseSpec::endpoint_atoms({{0.0}, {1.0}}));
    ASSERT_EQ(b.size(), 2u);
    EXPECT_TRUE(b.atomic());
    EXPECT_EQ(b.labels[0], "chi{0}");
    EXPECT_EQ(b.labels[1], "chi{1}");
    EXPECT_EQ(b.e[0]({0.0}), 1.0);
    EXPECT_EQ(b.e[0]({1.0}), 0.0);
    EXPECT_EQ(b.e[1]({1.0}), 1.0);
}

TEST(Basis, SingleFunction) {
    auto e = [](const Point& y) { return std::cos(y[1]) / std::sqrt(M_PI); };
    auto b = rkhs_basis(BoundaryNoiseSpec::finite_series({e}));
    ASSERT_EQ(b.size(), 1u);
    for (double y : {-1.0, 0.3, 2.0}) EXPECT_EQ(b.e[0]({0.0, y}), e({0.0, y}));
    EXPECT_EQ(rkhs_basis(BoundaryNoiseSpec::zero()).size(), 0u);
}

TEST(Basis, LebesgueCellsOrthonormal) {
    auto spec = BoundaryNoiseSpec::homogeneous(SpectralMeasure::lebesgue(1), 16, 4.0);
    auto b = rkhs_basis(spec);
    ASSERT_EQ(b.size(), 16u);
    QuadratureGrid q;
    q.dim = 2;
    const int n = 1600;
    for (int i = 0; i < n; ++i) {
        q.coords.insert(q.coords.end(), {0.0, -4.0 + (i + 0.5) * 8.0 / n});
        q.weights.push_back(8.0 / n);
    }
    auto G = gram_matrix(b, q);
    EXPECT_LT((G - Eigen::MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Basis, BesselModesReproduceCorrelation) {
    auto mu = SpectralMeasure::bessel(1, 3);
    auto b = rkhs_basis(BoundaryNoiseSpec::homogeneous(mu, 8001, 400.0));
    for (double d : {0.0, 0.5, 2.0}) {
        double s = 0;
        for (std::size_t k = 0; k < b.size(); ++k) s += b.e[k]({0.0, 0.3}) * b.e[k]({0.0, 0.3 + d});
        EXPECT_NEAR(s, spectral_correlation(mu, {d}), 1e-3);
    }
}

TEST(Homogeneous, StationaryCovariance) {
    // rotational example: covariance sum a_k^2 cos<b_k, y - z> t
    auto mu = SpectralMeasure::finite_atoms(1, {{1.0}, {3.0}}, {1.0, 0.5});
    auto spec = BoundaryNoiseSpec::homogeneous(mu, 1, 0);
    auto b = rkhs_basis(spec);
    const std::size_t n = 40000;
    const double t = 0.5;
    auto inc = sample_increments(spec, t, n, 77);
    auto cov = [&](double y, double z) {
        double s = 0;
        for (const auto& i : inc) s += evaluate_increment(b, i, {y}) * evaluate_increment(b, i, {z});
        return s / n;
    };
    auto exact = [&](double d) { return (1.0 * std::cos(d) + 0.5 * std::cos(3 * d)) * t; };
    const double var0 = exact(0);
    const double se = var0 * std::sqrt(2.0 / n);
    for (double y : {0.0, 0.4})
        for (double z : {0.0, 0.7}) EXPECT_NEAR(cov(y, z), exact(y - z), 4 * se);
    EXPECT_NEAR(cov(0.1, 0.6), cov(1.1, 1.6), 6 * se);
}
