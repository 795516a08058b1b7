#include "bwn/convolution.hpp"
#include "bwn/errors.hpp"
#include "bwn/numerics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace bwn;

namespace {

// frozen oracles: adaptive quadrature in scipy / mpmath, image series for s < 0.2, sine series above
constexpr double kHalfLineVar11 = 0.28959705789016172;     // sigma^2(1, 1), = 6 e^{-1/2} / (4 pi)
constexpr double kIntervalVar = 3.8144629888536014;        // sigma^2(0.5, 0.3), both endpoints
constexpr double kIntervalVarInf = 2.1884396152264766;     // sigma^2(inf, 0.5)
constexpr double kJInterval2 = 0.36031779935937713;        // p=2 theta=2 T=1
constexpr double kJInterval125 = 2.2237946620994182;       // p=2 theta=1.25 T=1
constexpr double kJHalfLine = 0.3396633740869892;          // p=2 theta=2 delta=1 T=1

ConvolutionSetup half_line(double theta, double delta) {
    ConvolutionSetup s;
    s.domain = Domain::half_line();
    s.noise = BoundaryNoiseSpec::endpoint_atoms({{0.0}});
    s.params = {2, theta, delta};
    return s;
}

ConvolutionSetup circle(double theta) {
    ConvolutionSetup s;
    s.domain = Domain::unit_ball(2);
    s.mode = KernelMode::Majorant;
    s.noise = BoundaryNoiseSpec::circle_white(0);
    s.params = {2, theta, 0};
    return s;
}

ConvolutionSetup bessel_half_plane(double kappa, double theta) {
    ConvolutionSetup s;
    s.domain = Domain::half_space(2);
    s.noise = BoundaryNoiseSpec::homogeneous(SpectralMeasure::bessel(1, kappa), 64, 8);
    s.params = {2, theta, 50};
    return s;
}

QuadratureGrid uniform_interval(int n) {
    GridRequest gr;
    gr.n = n;
    return interior_grid(Domain::interval01(), gr);
}

}  // namespace

TEST(Prediction, IntervalRange) {
    ConvolutionSetup s;
    s.params = {2, 2, 0};
    auto p = predict_wellposedness(s);
    EXPECT_EQ(p.id, "P71");
    EXPECT_DOUBLE_EQ(p.theta_lo, 1);
    EXPECT_DOUBLE_EQ(p.theta_hi, 3);
    EXPECT_EQ(p.expected, JVerdict::Finite);
    s.params = {2, 3.2, 0};
    EXPECT_EQ(predict_wellposedness(s).expected, JVerdict::Divergent);
}

TEST(Prediction, CircleWhiteAndBessel) {
    auto p = predict_wellposedness(circle(2.5));
    EXPECT_EQ(p.id, "P78");
    EXPECT_DOUBLE_EQ(p.theta_lo, 2);
    EXPECT_DOUBLE_EQ(p.theta_hi, 3);
    auto b = predict_wellposedness(bessel_half_plane(0.5, 2));
    EXPECT_EQ(b.id, "P718(ii)");
    EXPECT_DOUBLE_EQ(b.theta_lo, 1.5);
    EXPECT_DOUBLE_EQ(b.theta_hi, 3);
    EXPECT_EQ(predict_wellposedness(bessel_half_plane(1, 2)).id, "P718(i)");
    EXPECT_EQ(predict_wellposedness(bessel_half_plane(2, 2)).id, "P713");
}

TEST(Prediction, HalfLineNeedsDelta) {
    EXPECT_EQ(predict_wellposedness(half_line(2, 1)).expected, JVerdict::Finite);
    auto p = predict_wellposedness(half_line(2, 0.25));
    EXPECT_EQ(p.id, "P72");
    EXPECT_EQ(p.expected, JVerdict::Inconclusive);
}

TEST(Prediction, UncataloguedSaysSo) {
    ConvolutionSetup s;
    s.domain = Domain::half_space(4);
    s.noise = BoundaryNoiseSpec::homogeneous(SpectralMeasure::bessel(3, 0.5), 4, 4);
    auto p = predict_wellposedness(s);
    EXPECT_FALSE(p.catalogued);
    EXPECT_EQ(p.id, "no prediction");
    EXPECT_EQ(p.expected, JVerdict::Inconclusive);
}

TEST(Catalog, Entries) {
    const auto& c = scenario_catalog();
    EXPECT_GE(c.size(), 10u);
    auto has = [&](const std::string& line) {
        return std::any_of(c.begin(), c.end(), [&](const CatalogEntry& e) { return e.text == line; });
    };
    EXPECT_TRUE(has("P78: white noise on S¹, θ∈(3p/2−1, 2p−1)"));
    EXPECT_TRUE(has("R88: rejected — Dirac boundary noise not treatable"));
}

TEST(Validate, Inconsistent) {
    ConvolutionSetup s = circle(2.5);
    s.mode = KernelMode::Exact;
    EXPECT_THROW(validate(s), ConfigError);
    ConvolutionSetup a;
    a.mode = KernelMode::Majorant;
    EXPECT_THROW(validate(a), ConfigError);
    ConvolutionSetup r = circle(2.5);
    r.noise = BoundaryNoiseSpec::endpoint_atoms({{1.0, 0.0}});
    EXPECT_THROW(validate(r), UnsupportedError);
    EXPECT_THROW(j_integral(r), UnsupportedError);
}

TEST(Variance, HalfLineClosedForm) {
    ConvolutionSetup s = half_line(2, 1);
    EXPECT_NEAR(variance_at(s, 1, {1.0}), kHalfLineVar11, 1e-10 * kHalfLineVar11);
}

TEST(Variance, IntervalOracle) {
    ConvolutionSetup s;
    EXPECT_NEAR(variance_at(s, 0.5, {0.3}), kIntervalVar, 1e-8 * kIntervalVar);
}

TEST(Variance, ZeroNoiseAndMonotone) {
    ConvolutionSetup s;
    auto grid = uniform_interval(8);
    s.noise = BoundaryNoiseSpec::zero();
    for (double v : variance_field(s, 0.5, grid).values) EXPECT_EQ(v, 0.0);
    ConvolutionSetup e;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double prev = 0;
        for (double t : {0.01, 0.05, 0.1, 0.3, 1.0, 3.0}) {
            double v = variance_at(e, t, grid.node(i));
            EXPECT_GE(v, prev);
            prev = v;
        }
    }
}

TEST(JIntegral, IntervalOracle) {
    ConvolutionSetup s;
    JOptions o;
    o.extension = false;
    s.params = {2, 2, 0};
    EXPECT_NEAR(j_integral(s, o).J(), kJInterval2, 1e-6 * kJInterval2);
    s.params = {2, 1.25, 0};
    EXPECT_NEAR(j_integral(s, o).J(), kJInterval125, 1e-4 * kJInterval125);
}

TEST(JIntegral, HalfLineOracle) {
    JOptions o;
    o.extension = false;
    EXPECT_NEAR(j_integral(half_line(2, 1), o).J(), kJHalfLine, 1e-6 * kJHalfLine);
}

TEST(JIntegral, IntervalVerdicts) {
    ConvolutionSetup s;
    s.params = {2, 2, 0};
    auto r = j_integral(s);
    EXPECT_EQ(r.verdict, JVerdict::Finite);
    EXPECT_TRUE(r.agreement);
    EXPECT_LT(r.space_change, 0.01);
    s.params = {2, 0.5, 0};
    r = j_integral(s);
    EXPECT_EQ(r.verdict, JVerdict::Divergent);
    EXPECT_TRUE(r.agreement);
    s.params = {2, 3.2, 0};
    r = j_integral(s);
    EXPECT_EQ(r.verdict, JVerdict::Divergent);
    EXPECT_TRUE(r.agreement);
}

TEST(JIntegral, ZeroNoise) {
    ConvolutionSetup s;
    s.noise = BoundaryNoiseSpec::zero();
    JOptions o;
    o.extension = false;
    auto r = j_integral(s, o);
    EXPECT_EQ(r.J(), 0.0);
    EXPECT_EQ(r.verdict, JVerdict::Finite);
}

TEST(JIntegral, CircleWhite) {
    auto r = j_integral(circle(2.5));
    EXPECT_EQ(r.verdict, JVerdict::Finite);
    EXPECT_TRUE(r.agreement);
    r = j_integral(circle(1.75));
    EXPECT_EQ(r.verdict, JVerdict::Divergent);
    EXPECT_TRUE(r.agreement);
}

TEST(JIntegral, HolderExponentFinite) {
    // alpha = (theta - lower end) / (2p) at mid-interval
    ConvolutionSetup s;
    s.params = {2, 2, 0};
    s.alpha = 0.25;
    JOptions o;
    o.extension = false;
    auto r = j_integral(s, o);
    EXPECT_EQ(r.j_verdict, JVerdict::Finite);
    EXPECT_GT(r.J(), j_integral(ConvolutionSetup{}, o).J());
    ConvolutionSetup h = half_line(2, 1);
    h.alpha = 0.25;
    EXPECT_EQ(j_integral(h, o).j_verdict, JVerdict::Finite);
}

TEST(JIntegral, InfiniteHorizonInterval) {
    ConvolutionSetup s;
    s.T = std::numeric_limits<double>::infinity();
    JOptions o;
    o.extension = false;
    auto r = j_integral(s, o);
    EXPECT_EQ(r.j_verdict, JVerdict::Finite);
    EXPECT_GT(r.J(), kJInterval2);
    EXPECT_LT(r.J(), kJInterval2 * 1.001);
}

TEST(Simulation, ReplayAndStreams) {
    ConvolutionSetup s;
    SimulationOptions o;
    o.times = {0.1, 0.3};
    o.points = {{0.2}, {0.6}};
    o.n_paths = 300;
    o.seed = 5;
    auto a = simulate_convolution(s, o), b = simulate_convolution(s, o);
    EXPECT_EQ(a.values, b.values);
    o.batch = 7;
    EXPECT_EQ(simulate_convolution(s, o).values, a.values);
    o.stream = 1;
    EXPECT_NE(simulate_convolution(s, o).values, a.values);
}

TEST(Simulation, MomentsSmallEnsemble) {
    ConvolutionSetup s;
    SimulationOptions o;
    o.times = {0.2};
    o.points = {{0.1}, {0.4}};
    o.n_paths = 4000;
    auto e = simulate_convolution(s, o);
    for (std::size_t j = 0; j < 2; ++j) {
        auto m = moments(e.values.row(static_cast<Eigen::Index>(j)));
        double v = variance_at(s, 0.2, o.points[j]);
        EXPECT_LT(std::abs(m.mean), 4 * m.mean_se);
        EXPECT_LT(std::abs(m.var - v), 4 * m.var_se);
        EXPECT_LT(std::abs(m.kurtosis - 3), 4 * m.kurtosis_se);
        EXPECT_NEAR(e.discrete_variance[static_cast<Eigen::Index>(j)], v, 2e-3 * v);
    }
}

TEST(Simulation, RefusesCoarseGrid) {
    ConvolutionSetup s;
    SimulationOptions o;
    o.times = {0.5};
    o.points = {{0.05}};
    o.n_paths = 10;
    o.uniform_step = 0.05;
    EXPECT_THROW(simulate_convolution(s, o), NumericalRefusal);
}

TEST(Simulation, MildDeterministic) {
    ConvolutionSetup s;
    auto grid = uniform_interval(32);
    Field X0 = make_field(s.domain, grid, [](const Point& x) { return std::sin(M_PI * x[0]); });
    SimulationOptions o;
    o.times = {0.05, 0.2};
    o.points = {{0.25}, {0.5}};
    o.n_paths = 3;
    s.noise = BoundaryNoiseSpec::zero();
    auto e = simulate_mild(s, X0, o);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            EXPECT_NEAR(e.value(1, i, j), std::exp(-M_PI * M_PI * o.times[i]) * std::sin(M_PI * o.points[j][0]), 1e-6);
    Field zero = make_field(s.domain, grid, [](const Point&) { return 0.0; });
    EXPECT_EQ(simulate_mild(s, zero, o).values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Simulation, IncrementSlope) {
    // E||M(t+h) - M(t)||^2 in the weighted space against h
    ConvolutionSetup s;
    const double t = 0.2, alpha = 0.25;
    GridRequest gr;
    gr.graded = true;
    gr.n = 6;
    gr.panel = 0.125;
    gr.min_distance = 1e-3;
    auto grid = interior_grid(s.domain, gr);
    auto w = weight_vector(s.domain, grid, s.params);
    std::vector<double> hs{0.0025, 0.005, 0.01, 0.02, 0.04};
    SimulationOptions o;
    o.times = {t};
    for (double h : hs) o.times.push_back(t + h);
    for (std::size_t i = 0; i < grid.size(); ++i) o.points.push_back(grid.node(i));
    o.n_paths = 2000;
    auto e = simulate_convolution(s, o);
    const Eigen::Index nx = static_cast<Eigen::Index>(grid.size());
    std::vector<double> lh, lv;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        double acc = 0;
        for (Eigen::Index j = 0; j < nx; ++j) {
            Eigen::RowVectorXd d = e.values.row((static_cast<Eigen::Index>(i) + 1) * nx + j) - e.values.row(j);
            acc += grid.weights[j] * w[j] * d.squaredNorm();
        }
        lh.push_back(std::log(hs[i]));
        lv.push_back(std::log(acc / static_cast<double>(o.n_paths)));
    }
    EXPECT_GE(linear_fit(lh, lv).second, alpha * 0.9);
}

TEST(Semilinear, ZeroDriftIsMild) {
    ConvolutionSetup s;
    auto grid = uniform_interval(16);
    Field X0 = make_field(s.domain, grid, [](const Point& x) { return std::sin(M_PI * x[0]); });
    SemilinearOptions so;
    so.n_paths = 50;
    so.steps = 50;
    auto r = simulate_semilinear(s, X0, [](double) { return 0.0; }, 0.0, so);
    auto m = simulate_mild(s, X0, semilinear_grid(X0, so));
    EXPECT_EQ(r.ensemble.values, m.values);
    EXPECT_TRUE(r.converged);
}

TEST(Semilinear, LinearDriftShiftsSemigroup) {
    ConvolutionSetup s;
    s.noise = BoundaryNoiseSpec::zero();
    auto grid = uniform_interval(16);
    Field X0 = make_field(s.domain, grid, [](const Point& x) { return std::sin(M_PI * x[0]); });
    SemilinearOptions so;
    so.n_paths = 2;
    auto r = simulate_semilinear(s, X0, [](double u) { return -u; }, 1.0, so);
    ASSERT_TRUE(r.converged);
    const std::size_t nx = grid.size();
    double worst = 0;
    for (int n = 0; n < so.steps; ++n)
        for (std::size_t j = 0; j < nx; ++j) {
            double t = (n + 1) * so.dt;
            double want = std::exp(-t - M_PI * M_PI * t) * std::sin(M_PI * grid.x(j));
            worst = std::max(worst, std::abs(r.ensemble.values(static_cast<Eigen::Index>(n * nx + j), 0) - want));
        }
    EXPECT_LT(worst, 1e-3);
}

TEST(Semilinear, LinearDriftMeansWithNoise) {
    ConvolutionSetup s;
    auto grid = uniform_interval(16);
    Field X0 = make_field(s.domain, grid, [](const Point& x) { return std::sin(M_PI * x[0]); });
    SemilinearOptions so;
    so.n_paths = 400;
    auto r = simulate_semilinear(s, X0, [](double u) { return -u; }, 1.0, so);
    const std::size_t nx = grid.size();
    for (int n : {19, 99}) {
        double t = (n + 1) * so.dt;
        for (std::size_t j = 2; j < nx; j += 4) {
            auto m = moments(r.ensemble.values.row(static_cast<Eigen::Index>(n * nx + j)));
            double want = std::exp(-t - M_PI * M_PI * t) * std::sin(M_PI * grid.x(j));
            EXPECT_LT(std::abs(m.mean - want), 4 * m.mean_se + 1e-3);
        }
    }
}

TEST(Semilinear, ClampConvergesFast) {
    ConvolutionSetup s;
    auto grid = uniform_interval(16);
    Field X0 = make_field(s.domain, grid, [](const Point& x) { return std::sin(M_PI * x[0]); });
    SemilinearOptions so;
    so.n_paths = 50;
    auto r = simulate_semilinear(s, X0, [](double u) { return 0.5 * std::clamp(u, -1.0, 1.0); }, 0.5, so);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(*std::max_element(r.iterations.begin(), r.iterations.end()), 20);
    so.max_iterations = 1;
    auto bad = simulate_semilinear(s, X0, [](double u) { return -3 * u; }, 3.0, so);
    EXPECT_FALSE(bad.converged);
    EXPECT_EQ(bad.iterations[0], -1);
}

TEST(Flow, TwoStageMatchesOneShot) {
    ConvolutionSetup s;
    GridRequest gr;
    gr.graded = true;
    gr.min_distance = 1e-3;
    auto stage = interior_grid(s.domain, gr);
    Field X0 = make_field(s.domain, stage, [](const Point& x) { return std::sin(M_PI * x[0]); });
    SimulationOptions o;
    o.n_paths = 10000;
    o.seed = 3;
    auto r = flow_consistency(s, X0, 0.1, 0.2, {{0.1}, {0.3}, {0.5}, {0.8}}, stage, o);
    EXPECT_LT(r.max_cov_z, 3.5);
    EXPECT_LT(r.max_mean_z, 3.5);
}

TEST(Invariant, IntervalLimit) {
    ConvolutionSetup s;
    auto r = invariant_diagnostics(s, 2.0, {{0.1}, {0.5}, {0.9}}, 0);
    EXPECT_EQ(r.j_inf.j_verdict, JVerdict::Finite);
    EXPECT_NEAR(r.sigma_inf[1], kIntervalVarInf, 1e-6 * kIntervalVarInf);
    EXPECT_NEAR(r.sigma_inf[0], r.sigma_inf[2], 1e-8 * r.sigma_inf[0]);
    EXPECT_LT(r.max_probe_gap, 0.02);
    EXPECT_TRUE(r.monotone);
    ConvolutionSetup z;
    z.noise = BoundaryNoiseSpec::zero();
    auto rz = invariant_diagnostics(z, 2.0, {{0.5}}, 0);
    EXPECT_EQ(rz.sigma_inf[0], 0.0);
}

TEST(Tail, GaussianEnsemble) {
    ConvolutionSetup s;
    auto grid = uniform_interval(16);
    SimulationOptions o;
    o.n_paths = 100000;
    o.times = {0.5};
    for (std::size_t i = 0; i < grid.size(); ++i) o.points.push_back(grid.node(i));
    auto e = simulate_convolution(s, o);
    auto r = gaussian_tail_diagnostic(ensemble_norms(e, 0, s.domain, grid, s.params));
    EXPECT_EQ(r.verdict, JVerdict::Finite);
    EXPECT_GE(r.exponent, 1.8);
    EXPECT_GT(r.beta, 0);
}

TEST(Tail, StudentControl) {
    std::mt19937_64 gen(17);
    std::normal_distribution<double> z;
    std::chi_squared_distribution<double> chi(3);
    std::vector<double> norms;
    for (int i = 0; i < 100000; ++i) {
        double sq = 0;
        for (int k = 0; k < 10; ++k) {
            double u = z(gen);
            sq += u * u;
        }
        norms.push_back(std::sqrt(sq) / std::sqrt(chi(gen) / 3));
    }
    auto r = gaussian_tail_diagnostic(norms);
    EXPECT_LT(r.exponent, 1.8);
    EXPECT_EQ(r.verdict, JVerdict::Divergent);
}

TEST(Tail, DegenerateAndShort) {
    EXPECT_TRUE(gaussian_tail_diagnostic(std::vector<double>(1000, 2.5)).degenerate);
    std::vector<double> few{1, 2, 3, 4, 5};
    EXPECT_EQ(gaussian_tail_diagnostic(few).verdict, JVerdict::Inconclusive);
}

TEST(Bdg, GaussianMoments) {
    EXPECT_NEAR(gaussian_abs_moment(2), 1.0, 1e-14);
    EXPECT_NEAR(gaussian_abs_moment(4), 3.0, 1e-13);
    ConvolutionSetup s;
    GridRequest gr;
    gr.graded = true;
    gr.n = 6;
    gr.panel = 0.125;
    gr.min_distance = 1e-2;
    auto grid = interior_grid(s.domain, gr);
    for (double p : {2.0, 4.0}) {
        SimulationOptions o;
        o.n_paths = 10000;
        auto r = bdg_check(s, 0.5, grid, p, o);
        EXPECT_LT(std::abs(r.simulated - r.predicted), 3.5 * r.se) << "p=" << p;
    }
}
