#include "bwn/errors.hpp"
#include "bwn/kernels.hpp"
#include "bwn/numerics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace bwn;

namespace {

const Domain I01 = Domain::interval01();
const Domain HL = Domain::half_line();

double i0e(double x) {
    if (x < 500) return std::exp(-x) * std::cyl_bessel_i(0.0, x);
    // large-argument expansion
    double s = 1 + 1 / (8 * x) + 9 / (128 * x * x) + 225 / (3072 * x * x * x) + 11025 / (98304 * x * x * x * x);
    return s / std::sqrt(2 * M_PI * x);
}

}  // namespace

TEST(Gaussian, SpotValues) {
    EXPECT_NEAR(gaussian_density(1.0, {0.0}), 0.398942280401433, 1e-14);
    EXPECT_NEAR(gaussian_density(4.0, {0.0}), 0.199471140200716, 1e-14);
    EXPECT_NEAR(gaussian_density(4.0, {1.3}), gaussian_density(1.0, {0.65}) / 2, 1e-15);
    EXPECT_THROW(gaussian_density(0.0, {0.0}), ParameterError);
}

TEST(Gaussian, IntegratesToOne2d) {
    double s = integrate([](double x) {
        return integrate([&](double y) { return gaussian_density(0.5, {x, y}); }, -12, 12, 1e-13);
    }, -12, 12, 1e-13);
    EXPECT_NEAR(s, 1.0, 1e-8);
}

TEST(Barrier, Definition) {
    EXPECT_NEAR(barrier_factor(I01, 0.25, {0.1}), 0.2, 1e-15);
    EXPECT_EQ(barrier_factor(HL, 1.0, {2.0}), 1.0);
    EXPECT_EQ(barrier_factor(I01, 1e-8, {0.3}), 1.0);
}

TEST(Green, HalfLineClosedForm) {
    auto h = KernelHandle::image(HL);
    // g_{1/2}(0) - g_{1/2}(2)
    EXPECT_NEAR(green_kernel(h, 0.25, {1.0}, {1.0}), (1 - std::exp(-4.0)) / std::sqrt(M_PI), 1e-14);
    EXPECT_NEAR(green_kernel(h, 0.25, {1.0}, {1.0}), 0.553856, 5e-7);
    EXPECT_EQ(green_kernel(h, 0.7, {1.3}, {0.0}), 0.0);
}

TEST(Green, ImageVsSine) {
    auto im = KernelHandle::image(I01);
    auto si = KernelHandle::sine();
    EXPECT_NEAR(green_kernel(im, 0.1, {0.5}, {0.5}), green_kernel(si, 0.1, {0.5}, {0.5}), 1e-10);
    double worst = 0;
    for (double t : logspace(-3, 0.5, 15))
        for (double x : linspace(0.0, 1.0, 21))
            for (double y : linspace(0.0, 1.0, 21))
                worst = std::max(worst, std::abs(green_kernel(im, t, {x}, {y}) - green_kernel(si, t, {x}, {y})));
    EXPECT_LT(worst, 1e-10);
}

TEST(Green, SymmetryAndPositivity) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0, 1);
    auto im = KernelHandle::image(I01);
    auto hs = KernelHandle::image(Domain::half_space(2));
    for (int i = 0; i < 500; ++i) {
        double t = std::pow(10.0, -3 * u(gen)), x = u(gen), y = u(gen);
        double a = green_kernel(im, t, {x}, {y});
        EXPECT_GE(a, 0);
        EXPECT_EQ(a, green_kernel(im, t, {y}, {x}));
        Point p{x, 4 * u(gen) - 2}, q{y, 4 * u(gen) - 2};
        EXPECT_NEAR(green_kernel(hs, t, p, q), green_kernel(hs, t, q, p), 1e-15 * (1 + green_kernel(hs, t, p, q)));
    }
}

TEST(Green, UnsupportedDomains) {
    auto h = KernelHandle::image(Domain::unit_ball(2));
    EXPECT_THROW(green_kernel(h, 0.1, {0.0, 0.0}, {0.1, 0.0}), UnsupportedError);
}

TEST(Green, ChapmanKolmogorov) {
    for (const Domain& d : {I01, HL}) {
        auto h = KernelHandle::image(d);
        double top = d.kind == DomainKind::Interval01 ? 1.0 : 12.0;
        for (double t : {0.05, 0.1})
            for (double s : {0.05, 0.1})
                for (auto [x, y] : {std::pair{0.3, 0.6}, std::pair{0.1, 0.1}, std::pair{0.8, 0.25}}) {
                    double lhs = integrate([&](double z) { return green_kernel(h, t, {x}, {z}) * green_kernel(h, s, {z}, {y}); },
                                           0.0, top, 1e-12);
                    EXPECT_NEAR(lhs, green_kernel(h, t + s, {x}, {y}), 1e-6);
                }
    }
}

TEST(Green, VanishesLinearlyAtBoundary) {
    auto h = KernelHandle::image(I01);
    double r1 = green_kernel(h, 0.05, {0.4}, {1e-3}) / 1e-3;
    double r2 = green_kernel(h, 0.05, {0.4}, {1e-5}) / 1e-5;
    EXPECT_NEAR(r1 / r2, 1.0, 1e-4);
}

TEST(NormalDerivative, HalfLineClosedForm) {
    auto h = KernelHandle::image(HL);
    EXPECT_NEAR(boundary_normal_derivative(h, 1.0, {2.0}, {0.0}), -std::exp(-1.0) / std::sqrt(M_PI), 1e-14);
    EXPECT_NEAR(boundary_normal_derivative(h, 1.0, {2.0}, {0.0}), -0.207554, 5e-7);
    EXPECT_NEAR(boundary_normal_derivative(h, 0.3, {1e-12}, {0.0}), 0.0, 1e-10);
    EXPECT_THROW(boundary_normal_derivative(h, 1.0, {2.0}, {1.0}), DomainMembershipError);
}

TEST(NormalDerivative, IntervalFiniteDifference) {
    auto h = KernelHandle::image(I01);
    for (double t : {0.01, 0.1, 0.5})
        for (double x : {0.1, 0.5, 0.83}) {
            double y = 1e-4, e = 1e-6;
            double fd = (green_kernel(h, t, {x}, {y + e}) - green_kernel(h, t, {x}, {y - e})) / (2 * e);
            double dn = boundary_normal_derivative(h, t, {x}, {0.0});
            EXPECT_NEAR(-fd / dn, 1.0, 1e-5);
            double fd1 = (green_kernel(h, t, {x}, {1 - y + e}) - green_kernel(h, t, {x}, {1 - y - e})) / (2 * e);
            EXPECT_NEAR(fd1 / boundary_normal_derivative(h, t, {x}, {1.0}), 1.0, 1e-5);
        }
}

TEST(Derivatives, MatchFiniteDifferences) {
    auto h = KernelHandle::image(I01);
    auto s = KernelHandle::sine();
    double e = 1e-5;
    for (double x : {0.2, 0.55}) {
        double fd = (green_kernel(h, 0.05, {x + e}, {0.4}) - green_kernel(h, 0.05, {x - e}, {0.4})) / (2 * e);
        EXPECT_NEAR(green_gradient(h, 0.05, {x}, {0.4})[0], fd, 1e-6);
        EXPECT_NEAR(green_gradient(s, 0.05, {x}, {0.4})[0], fd, 1e-6);
        double fd2 = (green_kernel(h, 0.05, {x + 1e-4}, {0.4}) - 2 * green_kernel(h, 0.05, {x}, {0.4}) +
                      green_kernel(h, 0.05, {x - 1e-4}, {0.4})) / 1e-8;
        EXPECT_NEAR(green_second_derivative(h, 0.05, {x}, {0.4}), fd2, 1e-4);
    }
}

TEST(Resolvent, HalfLineOracle) {
    auto h = KernelHandle::image(HL);
    EXPECT_NEAR(resolvent_half_line_closed(1, 1, 2), 0.159046, 5e-7);
    EXPECT_NEAR(resolvent_half_line_closed(1, 1, 1), 0.432332, 5e-7);
    for (auto [l, x, y] : {std::tuple{1.0, 1.0, 2.0}, std::tuple{1.0, 1.0, 1.0}, std::tuple{4.0, 0.2, 0.7},
                           std::tuple{0.3, 2.0, 0.05}})
        EXPECT_NEAR(resolvent_kernel(h, l, {x}, {y}), resolvent_half_line_closed(l, x, y), 1e-8);
    EXPECT_EQ(resolvent_kernel(h, 1.0, {1.0}, {0.0}), 0.0);
    EXPECT_THROW(resolvent_kernel(h, 0.0, {1.0}, {1.0}), ParameterError);
}

TEST(Bracketing, OneMinusSqrt) {
    for (double r : linspace(0, 1, 10001)) {
        double v = 1 - std::sqrt(1 - r * r);
        EXPECT_LE(r * r / 2, v + 1e-16);
        EXPECT_LE(v, r * r + 1e-16);
    }
}

TEST(UpperBounds, HalfLineBounded) {
    auto chk = verify_kernel_upper_bounds(KernelHandle::image(HL), 4.0);
    EXPECT_EQ(chk.value.verdict, Verdict::Bounded);
    EXPECT_EQ(chk.gradient.verdict, Verdict::Bounded);
    EXPECT_TRUE(std::isfinite(chk.value.constant("C")));
}

TEST(UpperBounds, TightGaussianDiverges) {
    auto chk = verify_kernel_upper_bounds(KernelHandle::image(I01), 0.5);
    EXPECT_EQ(chk.value.verdict, Verdict::Diverging);
}

TEST(UpperBounds, Etr) {
    auto r = certify_etr(200, 200);
    EXPECT_EQ(r.verdict, Verdict::Bounded);
    EXPECT_LT(r.constant("C"), 10);
}

TEST(BoundaryMass, CentreClosedForm) {
    for (double t : {0.05, 0.3, 1.0})
        EXPECT_NEAR(gaussian_boundary_mass(Domain::unit_ball(2), t, {0, 0}, 1.0) / (2 * M_PI * std::exp(-1 / t)), 1.0, 1e-8);
}

TEST(BoundaryMass, OffCentreBesselOracle) {
    for (double t : {1e-3, 0.01, 0.5})
        for (double r : {0.3, 0.9, 0.999}) {
            double ct = 2 * t;
            double d2 = 2 * M_PI * std::exp(-(1 - r) * (1 - r) / ct) * i0e(2 * r / ct);
            EXPECT_NEAR(gaussian_boundary_mass(Domain::unit_ball(2), t, {r, 0}, 2.0) / d2, 1.0, 1e-8);
            double d3 = 2 * M_PI * ct / (2 * r) * (std::exp(-(1 - r) * (1 - r) / ct) - std::exp(-(1 + r) * (1 + r) / ct));
            EXPECT_NEAR(gaussian_boundary_mass(Domain::unit_ball(3), t, {0, 0, r}, 2.0) / d3, 1.0, 1e-8);
        }
}

TEST(BoundaryMass, SmallTimeDecay) {
    double prev = INFINITY;
    for (double t : {1e-1, 1e-2, 1e-3}) {
        double v = gaussian_boundary_mass(Domain::unit_ball(2), t, {0.5, 0}, 1.0) / std::pow(t, 3);
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(BoundaryMass, FittedConstantStable) {
    for (int d : {2, 3}) {
        auto fit = fit_boundary_mass_constant(d);
        EXPECT_TRUE(fit.stable) << "d=" << d << " spread " << fit.spread;
        EXPECT_GT(fit.c1_refined, 1.0);
    }
}

TEST(Axx, HalfLineExponent) {
    auto f = fit_axx_exponent(HL, -0.5, 1.0);
    EXPECT_NEAR(f.slope, -0.25, 0.03);
}

TEST(Axx, IntervalExponent) {
    auto f = fit_axx_exponent(I01, -0.5, 1.0);
    EXPECT_NEAR(f.slope, -0.25, 0.03);
}

TEST(Axx, NearZeroAlphaFlat) {
    auto f = fit_axx_exponent(HL, -0.01, 1.0);
    EXPECT_NEAR(f.slope, -0.005, 0.003);
    EXPECT_THROW(axx_integral(HL, -1.0, 1.0, 0.1), ParameterError);
    EXPECT_THROW(axx_integral(HL, 0.0, 1.0, 0.1), ParameterError);
}

TEST(ExtensionConstants, SumBelowN) {
    auto r = appendix_b_constants(HL, 0.0, 1.0);
    EXPECT_NEAR(r.constant("N"), 2 * std::sqrt(M_PI), 1e-9);
    EXPECT_NEAR(r.constant("N"), 3.544908, 5e-7);
    EXPECT_LE(r.constant("A1") + r.constant("A2"), r.constant("N"));
    EXPECT_LE(r.constant("A1"), r.constant("N") / 2 + 1e-9);
    EXPECT_EQ(r.verdict, Verdict::Bounded);
    auto q = appendix_b_constants(I01, 1.5, 1.0);
    EXPECT_LE(q.constant("A1") + q.constant("A2"), q.constant("N"));
}
