#include "bwn/dirichlet.hpp"
#include "bwn/errors.hpp"
#include "bwn/lab.hpp"
#include "bwn/numerics.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <cmath>
#include <ostream>
#include <sstream>

namespace bwn {

namespace {

// pinned acceptance tolerances
constexpr double kIsometryZ = 3.0;
constexpr std::size_t kIsometryPaths = 10000;
constexpr std::size_t kMinProbes = 20;
constexpr double kScenarioSeconds = 120;
constexpr int kMinAgreements = 8;
constexpr double kImageSine = 1e-10;
constexpr double kChapman = 1e-6;
constexpr double kEigenDecay = 1e-6;
constexpr double kResolvent = 1e-8;
constexpr double kAxxSlope = 0.03;
constexpr double kBoundaryMassSpread = 0.10;
constexpr double kAppendixQuad = 1e-9;
constexpr double kGradientSlope = 0.05;
constexpr double kStabilityRel = 0.01;
constexpr double kCrossSlope = 0.1;
constexpr int kSpliceSamples = 100;
constexpr double kLinearInterp = 1e-6;
constexpr double kHalfLineMap = 1e-6;
constexpr double kHalvingRatio = 4.0, kHalvingTol = 0.6;
constexpr double kCrossSeries = 1e-8;
constexpr double kFlowZ = 3.5;
constexpr double kKurtosisZ = 3.5;
constexpr double kInvariantGap = 0.02;
constexpr double kInvariantZ = 3.5;
constexpr double kSemilinearDrift = 1e-3;
constexpr int kClampIterations = 20;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(4) << v;
    return os.str();
}

struct Collector {
    int criterion;
    std::ostream* progress;
    std::vector<SuiteLine> lines;

    void add(const std::string& check, bool pass, const std::string& detail) {
        lines.push_back({criterion, check, pass, detail});
        if (progress) *progress << "  [" << (pass ? "pass" : "FAIL") << "] " << check << ": " << detail << std::endl;
    }
    // a check that throws is a failed check, not a crashed suite
    template <class F>
    void guard(const std::string& check, F&& f) {
        try {
            f();
        } catch (const std::exception& e) {
            add(check, false, std::string("error: ") + e.what());
        }
    }
};

QuadratureGrid graded(const Domain& d, double md) {
    GridRequest req;
    req.graded = true;
    req.min_distance = md;
    req.panel = 1.0 / 64;
    return interior_grid(d, req);
}

std::vector<Point> probes1(std::initializer_list<double> xs) {
    std::vector<Point> out;
    for (double x : xs) out.push_back({x});
    return out;
}

// ---- criterion 1

void isometry_case(Collector& col, const std::string& name, const ConvolutionSetup& s, const std::vector<Point>& pts,
                   const std::vector<double>& ts) {
    col.guard(name, [&] {
        auto t0 = Clock::now();
        SimulationOptions o;
        o.times = ts;
        o.points = pts;
        o.n_paths = kIsometryPaths;
        o.seed = 11;
        PathEnsemble e = simulate_convolution(s, o);
        double zvar = 0, zmean = 0, zkurt = 0;
        std::size_t probes = 0;
        for (std::size_t i = 0; i < ts.size(); ++i)
            for (std::size_t j = 0; j < pts.size(); ++j) {
                MomentStats m = moments(e.values.row(static_cast<Eigen::Index>(e.row(i, j))));
                double q = variance_at(s, ts[i], pts[j]);
                zvar = std::max(zvar, std::abs(m.var - q) / m.var_se);
                zmean = std::max(zmean, std::abs(m.mean) / m.mean_se);
                zkurt = std::max(zkurt, std::abs(m.kurtosis - 3) / m.kurtosis_se);
                ++probes;
            }
        double secs = seconds_since(t0);
        bool pass = probes >= kMinProbes && zvar <= kIsometryZ && zmean <= kIsometryZ && secs < kScenarioSeconds;
        col.add(name, pass,
                std::to_string(probes) + " probes, max variance z " + fmt(zvar) + ", max mean z " + fmt(zmean) +
                    ", max kurtosis z " + fmt(zkurt) + ", " + std::to_string(e.time_grid.size() - 1) + " steps, " +
                    fmt(secs) + " s");
    });
}

void suite_isometry(Collector& col) {
    ConvolutionSetup a;
    isometry_case(col, "P71 interval", a, probes1({0.05, 0.1, 0.25, 0.5, 0.8}), {0.05, 0.1, 0.5, 1.0});
    ConvolutionSetup b;
    b.domain = Domain::half_line();
    b.noise = BoundaryNoiseSpec::endpoint_atoms({{0.0}});
    b.params = {2, 2, 1};
    isometry_case(col, "P72 half-line", b, probes1({0.05, 0.2, 0.5, 1.0, 2.0}), {0.05, 0.1, 0.5, 1.0});
    ConvolutionSetup c;
    c.domain = Domain::half_space(2);
    c.noise = BoundaryNoiseSpec::homogeneous(SpectralMeasure::lebesgue(1), 64, 8);
    c.params = {2, 2.5, 50};
    std::vector<Point> sp;
    for (double x0 : {0.1, 0.25, 0.5, 1.0, 1.5})
        for (double x1 : {0.0, 0.3}) sp.push_back({x0, x1});
    isometry_case(col, "P717 half-plane", c, sp, {0.1, 0.5});
}

// ---- criterion 2

struct Family {
    std::string name;
    ConvolutionSetup setup;
    std::vector<double> thetas;
};

std::vector<Family> threshold_families() {
    std::vector<Family> f;
    auto plus_minus = [](double lo, double hi) { return std::vector<double>{lo - 0.25, lo + 0.25, hi - 0.25, hi + 0.25}; };
    ConvolutionSetup i;
    f.push_back({"P71 interval", i, plus_minus(1, 3)});
    ConvolutionSetup h;
    h.domain = Domain::half_line();
    h.noise = BoundaryNoiseSpec::endpoint_atoms({{0.0}});
    h.params.delta = 1;
    f.push_back({"P72 half-line delta=1", h, plus_minus(1, 3)});
    ConvolutionSetup a;
    a.domain = Domain::unit_ball(2);
    a.mode = KernelMode::Majorant;
    a.noise = BoundaryNoiseSpec::circle_harmonics(8, 2);
    f.push_back({"P74 disc, harmonics k^-2", a, plus_minus(1, 3)});
    ConvolutionSetup w = a;
    w.noise = BoundaryNoiseSpec::circle_white(0);
    f.push_back({"P78 disc, white noise on the circle", w, plus_minus(2, 3)});
    auto plane = [](const SpectralMeasure& mu) {
        ConvolutionSetup s;
        s.domain = Domain::half_space(2);
        s.noise = BoundaryNoiseSpec::homogeneous(mu, 64, 8);
        s.params.delta = 50;
        return s;
    };
    f.push_back({"P717 half-plane, space-time white", plane(SpectralMeasure::lebesgue(1)), plus_minus(2, 3)});
    f.push_back({"P718(ii) half-plane, Bessel kappa=0.5", plane(SpectralMeasure::bessel(1, 0.5)), plus_minus(1.5, 3)});
    f.push_back({"P718(i) half-plane, Bessel kappa=1", plane(SpectralMeasure::bessel(1, 1)), plus_minus(1, 3)});
    f.push_back({"P713 half-plane, Bessel kappa=2", plane(SpectralMeasure::bessel(1, 2)), plus_minus(1, 3)});
    return f;
}

void suite_thresholds(Collector& col) {
    int agree = 0, disagree = 0, other = 0;
    for (auto& fam : threshold_families()) {
        col.guard(fam.name, [&] {
            std::string detail;
            bool ok = true;
            for (double th : fam.thetas) {
                ConvolutionSetup s = fam.setup;
                s.params = {2, th, s.params.delta};
                JReport r = j_integral(s);
                const char* mark = "?";
                if (r.prediction.expected == JVerdict::Inconclusive || r.verdict == JVerdict::Inconclusive) {
                    ++other;
                    ok = false;
                } else if (r.agreement) {
                    ++agree;
                    mark = "ok";
                } else {
                    ++disagree;
                    ok = false;
                    mark = "DISAGREE";
                }
                detail += (detail.empty() ? "" : ", ") + std::string("theta ") + fmt(th) + " " + to_string(r.verdict) + " " + mark;
            }
            col.add(fam.name, ok, detail);
        });
    }
    col.add("total", agree >= kMinAgreements && disagree == 0,
            std::to_string(agree) + " agreements, " + std::to_string(disagree) + " disagreements, " + std::to_string(other) +
                " inconclusive");
}

// ---- criterion 3

void suite_kernels(Collector& col) {
    const Domain I = Domain::interval01(), H = Domain::half_line();
    col.guard("image vs sine series", [&] {
        auto im = KernelHandle::image(I);
        auto si = KernelHandle::sine();
        double worst = 0;
        for (double t : logspace(-3, 0.5, 15))
            for (double x : linspace(0.0, 1.0, 21))
                for (double y : linspace(0.0, 1.0, 21))
                    worst = std::max(worst, std::abs(green_kernel(im, t, {x}, {y}) - green_kernel(si, t, {x}, {y})));
        col.add("image vs sine series", worst < kImageSine, "max difference " + fmt(worst) + " for t in [1e-3, 3.2]");
    });
    col.guard("Chapman-Kolmogorov", [&] {
        double worst = 0;
        for (const Domain& d : {I, H}) {
            auto h = KernelHandle::image(d);
            double top = d.kind == DomainKind::Interval01 ? 1.0 : 12.0;
            for (double t : {0.05, 0.1})
                for (double s : {0.05, 0.1})
                    for (auto [x, y] : {std::pair{0.3, 0.6}, std::pair{0.1, 0.1}, std::pair{0.8, 0.25}}) {
                        double lhs = integrate(
                            [&](double z) { return green_kernel(h, t, {x}, {z}) * green_kernel(h, s, {z}, {y}); }, 0.0, top,
                            1e-12);
                        worst = std::max(worst, std::abs(lhs - green_kernel(h, t + s, {x}, {y})));
                    }
        }
        col.add("Chapman-Kolmogorov", worst < kChapman, "max residual " + fmt(worst));
    });
    col.guard("eigenfunction decay", [&] {
        auto g = graded(I, 1e-10);
        auto psi = make_field(I, g, [](const Point& x) { return std::sin(M_PI * x[0]); });
        double worst = 0;
        for (auto h : {KernelHandle::image(I), KernelHandle::sine()})
            for (double t : {0.01, 0.1, 1.0}) {
                auto out = apply_semigroup(h, t, psi);
                for (std::size_t i = 0; i < g.size(); ++i)
                    worst = std::max(worst, std::abs(out.values[i] - std::exp(-M_PI * M_PI * t) * std::sin(M_PI * g.x(i))));
            }
        col.add("eigenfunction decay", worst < kEigenDecay, "max error " + fmt(worst));
    });
    col.guard("half-line resolvent", [&] {
        auto h = KernelHandle::image(H);
        double worst = 0;
        for (auto [l, x, y] : {std::tuple{1.0, 1.0, 2.0}, std::tuple{1.0, 1.0, 1.0}, std::tuple{4.0, 0.2, 0.7},
                               std::tuple{0.3, 2.0, 0.05}, std::tuple{2.0, 0.5, 3.0}})
            worst = std::max(worst, std::abs(resolvent_kernel(h, l, {x}, {y}) - resolvent_half_line_closed(l, x, y)));
        col.add("half-line resolvent", worst < kResolvent, "max difference " + fmt(worst));
    });
}

// ---- criterion 4

void suite_estimates(Collector& col) {
    col.guard("Etr certificate", [&] {
        auto r = certify_etr(200, 200);
        col.add("Etr certificate", r.verdict == Verdict::Bounded,
                "200x200 grid, " + to_string(r.verdict) + ", C " + fmt(r.constant("C")));
    });
    for (const Domain& d : {Domain::half_line(), Domain::interval01()})
        col.guard("Axx exponent " + d.name(), [&] {
            auto f = fit_axx_exponent(d, -0.5, 1.0);
            col.add("Axx exponent " + d.name(), std::abs(f.slope + 0.25) <= kAxxSlope,
                    "alpha -1/2, slope " + fmt(f.slope) + " (target -0.25)");
        });
    for (int dim : {2, 3})
        col.guard("boundary mass constant d=" + std::to_string(dim), [&] {
            auto fit = fit_boundary_mass_constant(dim);
            col.add("boundary mass constant d=" + std::to_string(dim), fit.spread <= kBoundaryMassSpread,
                    "C1 " + fmt(fit.c1_refined) + ", spread " + fmt(fit.spread) + " over t in [1e-3, 1]");
        });
    col.guard("appendix A1+A2 <= N", [&] {
        auto r = appendix_b_constants(Domain::half_line(), 0.0, 1.0);
        double N = r.constant("N"), A = r.constant("A1") + r.constant("A2");
        bool pass = std::abs(N - 2 * std::sqrt(M_PI)) < kAppendixQuad && A <= N * (1 + kAppendixQuad);
        col.add("appendix A1+A2 <= N", pass, "A1+A2 " + fmt(A) + ", N " + fmt(N) + " (2 sqrt(pi) = 3.545)");
    });
}

// ---- criterion 5

void suite_operators(Collector& col) {
    const Domain I = Domain::interval01();
    auto h = KernelHandle::image(I);
    col.guard("Schur k1..k8", [&] {
        auto r = schur_constants(I, 2, 2);
        std::string d;
        for (int i = 0; i < 8; ++i) d += (i ? " " : "") + std::string("k") + std::to_string(i + 1) + "=" + fmt(r.k[i]);
        col.add("Schur k1..k8", r.all_bounded(), d);
    });
    col.guard("gradient smoothing", [&] {
        auto r = gradient_smoothing_ratio(h, {2, 1.5, 0}, logspace(-4, -2, 5), random_smooth_samples(I, 3, 2));
        col.add("gradient smoothing", std::abs(r.slope + 0.5) <= kGradientSlope, "slope " + fmt(r.slope));
    });
    col.guard("stability rate", [&] {
        auto f = stability_rate(h, {2, 2, 0}, [](const Point& x) { return x[0] * (1 - x[0]) * std::exp(x[0]); });
        col.add("stability rate", std::abs(f.rate - M_PI * M_PI) <= kStabilityRel * M_PI * M_PI,
                "rate " + fmt(f.rate) + " (pi^2 = 9.870)");
    });
    col.guard("cross-space slope", [&] {
        auto r = cross_space_smoothing(h, {2, 2, 0}, logspace(-4, -2, 5));
        bool pass = std::abs(r.slope + 0.5) <= kCrossSlope && r.witness_slope < 0;
        col.add("cross-space slope", pass, "slope " + fmt(r.slope) + " (target -0.5), witness slope " + fmt(r.witness_slope));
    });
    col.guard("splice inequality", [&] {
        auto g = graded(I, 1e-8);
        Eigen::MatrixXd T = semigroup_matrix(h, 0.1, g, g);
        auto w1 = weight_vector(I, g, {2, 2, 0});
        auto w2 = weight_vector(I, g, {2, 0, 1.5});
        auto r = min_weight_splice_check(T, g, w1, w2, 2, kSpliceSamples, 9);
        col.add("splice inequality", r.holds && r.samples == kSpliceSamples,
                std::to_string(r.samples) + " random fields, worst ratio " + fmt(r.worst_ratio) + " <= bound " + fmt(r.bound));
    });
}

// ---- criterion 6

void suite_dirichlet(Collector& col) {
    const Domain I = Domain::interval01(), H = Domain::half_line();
    col.guard("linear interpolant", [&] {
        auto out = uniform_nodes(0.05, 0.95, 0.05);
        auto u = dirichlet_map(I, 0, BoundaryData::interval(0.3, 2.5), out);
        double worst = 0;
        for (std::size_t i = 0; i < out.size(); ++i) worst = std::max(worst, std::abs(u.values[i] - (0.3 + 2.2 * out.x(i))));
        col.add("linear interpolant", worst < kLinearInterp, "max error " + fmt(worst));
    });
    col.guard("half-line exponential", [&] {
        auto out = uniform_nodes(0.1, 4, 0.3);
        auto u = dirichlet_map(H, 1, BoundaryData::atoms({{0.0}}, {1.0}), out);
        double worst = 0;
        for (std::size_t i = 0; i < out.size(); ++i) worst = std::max(worst, std::abs(u.values[i] - std::exp(-out.x(i))));
        col.add("half-line exponential", worst < kHalfLineMap, "max error " + fmt(worst));
    });
    col.guard("harmonicity O(h^2)", [&] {
        auto g = BoundaryData::atoms({{0.0}}, {1.0});
        auto r1 = verify_harmonicity(dirichlet_map(H, 1, g, uniform_nodes(0.5, 0.7, 1e-2)), 1);
        auto r2 = verify_harmonicity(dirichlet_map(H, 1, g, uniform_nodes(0.5, 0.6, 5e-3)), 1);
        double ratio = r1.residual / r2.residual;
        col.add("harmonicity O(h^2)", std::abs(ratio - kHalvingRatio) <= kHalvingTol,
                "residual " + fmt(r1.residual) + " -> " + fmt(r2.residual) + " on halving h, ratio " + fmt(ratio));
    });
    col.guard("propagator cross-series", [&] {
        auto out = uniform_nodes(0.01, 0.99, 0.01);
        auto e = BoundaryData::interval(1, 0.5);
        double worst = 0;
        for (double t : {0.05, 0.2, 1.0}) {
            auto a = boundary_propagator(KernelHandle::image(I), t, e, out);
            auto b = boundary_propagator(KernelHandle::sine(), t, e, out);
            for (std::size_t i = 0; i < out.size(); ++i)
                worst = std::max(worst, std::abs(a.field.values[i] - b.field.values[i]));
        }
        col.add("propagator cross-series", worst < kCrossSeries, "max difference " + fmt(worst));
    });
    col.guard("majorant dominates", [&] {
        auto f = fit_majorant_constant(4.0);
        auto e = BoundaryData::atoms({{0.0}}, {1.0});
        auto out = uniform_nodes(0.003, 3, 0.0137);
        double worst = 0;
        for (double t : {2e-3, 0.03, 0.3, 0.7}) {
            auto exact = boundary_propagator(KernelHandle::image(H), t, e, out);
            auto maj = propagator_majorant(H, t, e, f.C, 4.0, out);
            for (std::size_t i = 0; i < out.size(); ++i)
                if (maj.values[i] > 0) worst = std::max(worst, exact.field.values[i] / maj.values[i]);
        }
        col.add("majorant dominates", worst <= 1 + 1e-9, "fitted C " + fmt(f.C) + ", max exact/majorant " + fmt(worst));
    });
}

// ---- criterion 7

void suite_simulation(Collector& col) {
    ConvolutionSetup s;
    const Domain& I = s.domain;
    col.guard("flow two-stage vs one-shot", [&] {
        GridRequest gr;
        gr.graded = true;
        gr.min_distance = 1e-3;
        auto stage = interior_grid(I, gr);
        Field X0 = make_field(I, stage, [](const Point& x) { return std::sin(M_PI * x[0]); });
        SimulationOptions o;
        o.n_paths = 10000;
        o.seed = 3;
        auto r = flow_consistency(s, X0, 0.1, 0.2, probes1({0.1, 0.3, 0.5, 0.8}), stage, o);
        col.add("flow two-stage vs one-shot", r.max_cov_z <= kFlowZ && r.max_mean_z <= kFlowZ,
                "t=0.2 via s=0.1, n=10^4, max covariance z " + fmt(r.max_cov_z) + ", max mean z " + fmt(r.max_mean_z));
    });
    GridRequest ur;
    ur.n = 16;
    auto grid = interior_grid(I, ur);
    Field X0 = make_field(I, grid, [](const Point& x) { return std::sin(M_PI * x[0]); });
    col.guard("semilinear f=0 reduction", [&] {
        SemilinearOptions so;
        so.n_paths = 100;
        auto r = simulate_semilinear(s, X0, [](double) { return 0.0; }, 0.0, so);
        auto m = simulate_mild(s, X0, semilinear_grid(X0, so));
        double diff = (r.ensemble.values - m.values).cwiseAbs().maxCoeff();
        col.add("semilinear f=0 reduction", diff == 0.0, "max per-path difference " + fmt(diff) + ", 100 paths");
    });
    col.guard("semilinear f=-u drift", [&] {
        ConvolutionSetup z = s;
        z.noise = BoundaryNoiseSpec::zero();
        SemilinearOptions so;
        so.n_paths = 1;
        auto r = simulate_semilinear(z, X0, [](double u) { return -u; }, 1.0, so);
        const std::size_t nx = grid.size();
        double worst = 0;
        for (int n = 0; n < so.steps; ++n)
            for (std::size_t j = 0; j < nx; ++j) {
                double t = (n + 1) * so.dt;
                double want = std::exp(-t - M_PI * M_PI * t) * std::sin(M_PI * grid.x(j));
                worst = std::max(worst, std::abs(r.ensemble.values(static_cast<Eigen::Index>(n * nx + j), 0) - want));
            }
        col.add("semilinear f=-u drift", r.converged && worst < kSemilinearDrift,
                "max error vs e^{-t} S(t) X0 " + fmt(worst) + " at dt=1e-3");
    });
    col.guard("semilinear clamp", [&] {
        SemilinearOptions so;
        so.n_paths = 100;
        auto r = simulate_semilinear(s, X0, [](double u) { return 0.5 * std::clamp(u, -1.0, 1.0); }, 0.5, so);
        int worst = *std::max_element(r.iterations.begin(), r.iterations.end());
        col.add("semilinear clamp", r.converged && worst <= kClampIterations,
                "max Picard iterations " + std::to_string(worst) + " at dt=1e-3");
    });
    col.guard("fourth moment ratio", [&] {
        SimulationOptions o;
        o.times = {0.05, 0.1, 0.5, 1.0};
        o.points = probes1({0.05, 0.1, 0.25, 0.5, 0.8});
        o.n_paths = 10000;
        o.seed = 13;
        auto e = simulate_convolution(s, o);
        double worst = 0, kmin = 1e300, kmax = 0;
        for (Eigen::Index r = 0; r < e.values.rows(); ++r) {
            auto m = moments(e.values.row(r));
            worst = std::max(worst, std::abs(m.kurtosis - 3) / m.kurtosis_se);
            kmin = std::min(kmin, m.kurtosis);
            kmax = std::max(kmax, m.kurtosis);
        }
        col.add("fourth moment ratio", worst <= kKurtosisZ,
                "E M^4/(E M^2)^2 in [" + fmt(kmin) + ", " + fmt(kmax) + "], max z " + fmt(worst) + " over 20 probes");
    });
    col.guard("invariant variance", [&] {
        auto r = invariant_diagnostics(s, 2.0, probes1({0.05, 0.1, 0.25, 0.5, 0.75, 0.9}), 10000, 7);
        bool pass = r.max_probe_gap < kInvariantGap && r.monotone && r.j_inf.j_verdict == JVerdict::Finite &&
                    r.max_z <= kInvariantZ;
        col.add("invariant variance", pass,
                "gap at t=" + fmt(r.probe_time) + " " + fmt(r.max_probe_gap) + ", monotone " + (r.monotone ? "yes" : "no") +
                    ", simulated vs limit max z " + fmt(r.max_z));
    });
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> n{"isometry", "thresholds", "kernels", "estimates",
                                            "operators", "dirichlet",  "simulation"};
    return n;
}

int suite_criterion(const std::string& name) {
    const auto& n = suite_names();
    auto it = std::find(n.begin(), n.end(), name);
    if (it == n.end()) throw ConfigError("unknown suite " + name + " (known: isometry, thresholds, kernels, estimates, "
                                         "operators, dirichlet, simulation)");
    return static_cast<int>(it - n.begin()) + 1;
}

std::vector<SuiteLine> run_suite(const std::string& name, std::ostream* progress) {
    Collector col{suite_criterion(name), progress, {}};
    if (name == "isometry") suite_isometry(col);
    else if (name == "thresholds") suite_thresholds(col);
    else if (name == "kernels") suite_kernels(col);
    else if (name == "estimates") suite_estimates(col);
    else if (name == "operators") suite_operators(col);
    else if (name == "dirichlet") suite_dirichlet(col);
    else suite_simulation(col);
    return col.lines;
}

}  // namespace bwn
