#include "bwn/errors.hpp"
#include "bwn/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace bwn;

TEST(Distance, ClosedForms) {
    EXPECT_DOUBLE_EQ(distance_to_boundary(Domain::interval01(), {0.1}), 0.1);
    EXPECT_DOUBLE_EQ(distance_to_boundary(Domain::interval01(), {0.9}), 1 - 0.9);
    EXPECT_NEAR(distance_to_boundary(Domain::unit_ball(2), {0.6, 0.0}), 0.4, 1e-15);
    EXPECT_DOUBLE_EQ(distance_to_boundary(Domain::half_space(3), {0.25, 7, -2}), 0.25);
    EXPECT_DOUBLE_EQ(distance_to_boundary(Domain::half_line(), {0.0}), 0.0);
}

TEST(Distance, OutsideThrows) {
    EXPECT_THROW(distance_to_boundary(Domain::interval01(), {1.5}), DomainMembershipError);
    EXPECT_THROW(distance_to_boundary(Domain::half_line(), {-0.1}), DomainMembershipError);
    EXPECT_THROW(distance_to_boundary(Domain::unit_ball(3), {1.0, 1.0, 0.0}), DomainMembershipError);
    EXPECT_THROW(distance_to_boundary(Domain::unit_ball(2), {0.1}), ParameterError);
}

TEST(Distance, OneLipschitz) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-1, 1);
    for (const Domain& d : {Domain::interval01(), Domain::half_line(), Domain::half_space(2), Domain::unit_ball(2),
                            Domain::unit_ball(3)}) {
        for (int i = 0; i < 2000; ++i) {
            Point a(d.dim), b(d.dim);
            for (int k = 0; k < d.dim; ++k) {
                a[k] = u(gen);
                b[k] = u(gen);
            }
            if (d.kind != DomainKind::UnitBall) {
                a[0] = std::abs(a[0]);
                b[0] = std::abs(b[0]);
            }
            if (!in_closure(d, a) || !in_closure(d, b)) continue;
            double dist = 0;
            for (int k = 0; k < d.dim; ++k) dist += (a[k] - b[k]) * (a[k] - b[k]);
            EXPECT_LE(std::abs(distance_to_boundary(d, a) - distance_to_boundary(d, b)), std::sqrt(dist) + 1e-14);
        }
    }
}

TEST(Weight, Examples) {
    EXPECT_DOUBLE_EQ(weight(Domain::interval01(), {0.1}, {2, 2, 0}), 0.01);
    EXPECT_DOUBLE_EQ(weight(Domain::half_line(), {3.0}, {2, 0, 1}), 0.1);
    EXPECT_DOUBLE_EQ(weight(Domain::half_line(), {0.5}, {2, 1, 1}), 0.5);
}

TEST(Weight, RangeAndMinSplice) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(1e-6, 30);
    WeightedSpaceParams both(2, 1.3, 0.7), w1(2, 1.3, 0), w2(2, 0, 0.7);
    for (int i = 0; i < 1000; ++i) {
        Point x{u(gen)};
        double w = weight(Domain::half_line(), x, both);
        EXPECT_GT(w, 0);
        EXPECT_LE(w, 1);
        EXPECT_DOUBLE_EQ(w, std::min(weight(Domain::half_line(), x, w1), weight(Domain::half_line(), x, w2)));
    }
}

TEST(Weight, ExtensionFlag) {
    EXPECT_TRUE(WeightedSpaceParams(2, 2.9, 0).extension_ok);
    EXPECT_FALSE(WeightedSpaceParams(2, 3.0, 0).extension_ok);
    EXPECT_THROW(WeightedSpaceParams(1.0, 0, 0), ParameterError);
    EXPECT_THROW(WeightedSpaceParams(2, -1, 0), ParameterError);
}

TEST(BoundaryQuadrature, Interval) {
    auto g = boundary_quadrature(Domain::interval01(), 5);
    ASSERT_EQ(g.size(), 2u);
    EXPECT_EQ(g.x(0), 0.0);
    EXPECT_EQ(g.x(1), 1.0);
    EXPECT_EQ(g.weights[0], 1.0);
    EXPECT_EQ(g.weights[1], 1.0);
}

TEST(BoundaryQuadrature, CircleAndSphere) {
    for (int L = 2; L <= 8; ++L) {
        auto g = boundary_quadrature(Domain::unit_ball(2), L);
        EXPECT_EQ(g.size(), std::size_t(1) << L);
        EXPECT_NEAR(g.sum_weights(), 2 * M_PI, 1e-12);
        EXPECT_NEAR(g.weights[0], 2 * M_PI / (1 << L), 1e-15);
    }
    auto s = boundary_quadrature(Domain::unit_ball(3), 5);
    EXPECT_NEAR(s.sum_weights(), 4 * M_PI, 1e-12);
}

TEST(BoundaryQuadrature, HalfSpaceTruncation) {
    BoundaryQuadratureOptions opt;
    opt.c = 1;
    opt.t_max = 1;
    auto g = boundary_quadrature(Domain::half_space(2), 6, opt);
    double R = gaussian_cutoff(1, 1);
    EXPECT_NEAR(std::exp(-R * R / 2), 1e-12, 1e-15);
    EXPECT_NEAR(g.sum_weights(), 2 * R, 1e-11);
    EXPECT_LT(g.tolerance, 1e-11);
}

TEST(BoundaryQuadrature, GenericWithoutPatches) {
    auto d = Domain::generic(2, [](const Point& x) { return 1 - std::hypot(x[0], x[1]); }, {-1, -1}, {1, 1});
    EXPECT_THROW(boundary_quadrature(d, 3), UnsupportedError);
}

TEST(InteriorGrid, UniformMidpoint) {
    GridRequest req;
    req.n = 4;
    auto g = interior_grid(Domain::interval01(), req);
    ASSERT_EQ(g.size(), 4u);
    for (int i = 0; i < 4; ++i) {
        EXPECT_DOUBLE_EQ(g.x(i), (2 * i + 1) / 8.0);
        EXPECT_DOUBLE_EQ(g.weights[i], 0.25);
    }
}

TEST(InteriorGrid, GradedIntervalIntegratesOne) {
    std::size_t prev_n = 0;
    double prev_tol = 1;
    for (double md : {1e-3, 1e-5, 1e-8, 1e-12}) {
        GridRequest req;
        req.graded = true;
        req.min_distance = md;
        auto g = interior_grid(Domain::interval01(), req);
        EXPECT_NEAR(g.sum_weights(), 1.0, g.tolerance + 1e-14);
        EXPECT_GT(g.size(), prev_n);
        EXPECT_LE(g.tolerance, prev_tol);
        prev_n = g.size();
        prev_tol = g.tolerance;
        EXPECT_LT(g.x(0), 2 * md);
        EXPECT_GT(g.x(g.size() - 1), 1 - 2 * md);
    }
}

TEST(InteriorGrid, HalfLineArctan) {
    GridRequest req;
    req.graded = true;
    req.cutoff = 20;
    req.panel = 0.25;
    auto g = interior_grid(Domain::half_line(), req);
    double s = 0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g.weights[i] / (1 + g.x(i) * g.x(i));
    EXPECT_NEAR(s, 1.520837931, 1e-7);
}

TEST(InteriorGrid, BallVolume) {
    GridRequest req;
    req.graded = true;
    req.angular = 32;
    EXPECT_NEAR(interior_grid(Domain::unit_ball(2), req).sum_weights(), M_PI, 1e-6);
    EXPECT_NEAR(interior_grid(Domain::unit_ball(3), req).sum_weights(), 4 * M_PI / 3, 1e-6);
}

TEST(InteriorGrid, GenericDisc) {
    auto d = Domain::generic(2, [](const Point& x) { return 1 - std::hypot(x[0], x[1]); }, {-1, -1}, {1, 1});
    GridRequest req;
    req.n = 200;
    auto g = interior_grid(d, req);
    EXPECT_NEAR(g.sum_weights(), M_PI, 4 * g.tolerance);
}

TEST(GridIo, RoundTrip) {
    GridRequest req;
    req.graded = true;
    auto g = interior_grid(Domain::interval01(), req);
    std::stringstream ss;
    write_grid(ss, g);
    auto h = read_grid(ss);
    EXPECT_EQ(h.dim, g.dim);
    EXPECT_EQ(h.level, g.level);
    EXPECT_EQ(h.tolerance, g.tolerance);
    EXPECT_EQ(h.coords, g.coords);
    EXPECT_EQ(h.weights, g.weights);
}

TEST(ParseDomain, Names) {
    EXPECT_EQ(parse_domain("halfspace:3").dim, 3);
    EXPECT_EQ(parse_domain("unitball:2").kind, DomainKind::UnitBall);
    EXPECT_THROW(parse_domain("torus"), ConfigError);
}
