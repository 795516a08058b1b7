#pragma once

#include "bwn/geometry.hpp"
#include "bwn/kernels.hpp"
#include "bwn/noise.hpp"
#include "bwn/semigroup.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace bwn {

enum class KernelMode { Exact, Majorant };

struct ConvolutionSetup {
    Domain domain = Domain::interval01();
    KernelMode mode = KernelMode::Exact;
    double C = 1.0;  // majorant (C / sqrt t) g_{ct}
    double c = 4.0;
    BoundaryNoiseSpec noise = BoundaryNoiseSpec::endpoint_atoms({{0.0}, {1.0}});
    WeightedSpaceParams params{2, 2, 0};
    double T = 1.0;  // may be +inf
    double alpha = 0.0;
    double lambda = 1.0;

    KernelHandle kernel() const { return KernelHandle::image(domain); }
};

// throws ConfigError / UnsupportedError / ParameterError on inconsistent setups
void validate(const ConvolutionSetup& s);

// sum_k psi_k(t, x)^2 with the truncated basis of the noise spec; exact mode only
double mode_energy(const ConvolutionSetup& s, double t, const Point& x);
// psi_k(t, x) for every mode
void mode_values(const ConvolutionSetup& s, double t, const Point& x, std::vector<double>& out);

enum class JVerdict { Finite, Divergent, Inconclusive };
std::string to_string(JVerdict v);

struct Prediction {
    bool catalogued = false;
    bool rejected = false;
    std::string id;           // "P71", "P718(ii)", ... or "no prediction"
    std::string description;
    double theta_lo = 0, theta_hi = 0;  // open interval
    double delta_min = 0;               // strict lower bound on delta, 0 if none
    JVerdict expected = JVerdict::Inconclusive;
};

Prediction predict_wellposedness(const ConvolutionSetup& s);

struct CatalogEntry {
    std::string id;
    std::string text;
};
const std::vector<CatalogEntry>& scenario_catalog();

struct JOptions {
    int levels = 5;          // innermost distance 10^{-2-4L}
    int gauss = 8;           // points per ratio-2 panel
    double time_tol_fine = 1e-10;
    double time_tol_coarse = 1e-7;
    bool extension = true;   // combine with the semigroup extension check
};

struct JReport {
    std::vector<double> distance;   // innermost distance per level
    std::vector<double> value;      // J per level, fine time tolerance
    double coarse_time_value = 0;   // finest level, coarse time tolerance
    std::vector<int> modes;         // mode counts compared (empty: mode sum in closed form)
    std::vector<double> mode_value;
    double space_change = 0, time_change = 0, mode_change = 0;  // relative
    JVerdict j_verdict = JVerdict::Inconclusive;
    Verdict extension = Verdict::Inconclusive;
    JVerdict verdict = JVerdict::Inconclusive;
    Prediction prediction;
    bool agreement = false;
    std::vector<std::string> notes;

    double J() const { return value.empty() ? 0.0 : value.back(); }
};

JReport j_integral(const ConvolutionSetup& s, const JOptions& opt = {});
void write_report(std::ostream& os, const JReport& r);

// sigma^2(t, x) = sum_k int_0^t psi_k(s, x)^2 ds
double variance_at(const ConvolutionSetup& s, double t, const Point& x);
Field variance_field(const ConvolutionSetup& s, double t, const QuadratureGrid& grid);

struct SimulationOptions {
    std::vector<double> times;
    std::vector<Point> points;
    std::size_t n_paths = 10000;
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;     // independent noise for the same seed
    double ratio = 1.03;          // geometric step growth away from each probe time
    double max_step = 0.01;
    double uniform_step = 0;      // > 0: uniform grid of this step instead of the graded one
    double tolerance = 2e-3;      // relative variance defect allowed before refusing
    std::size_t batch = 64;
};

struct PathEnsemble {
    std::vector<double> times;
    std::vector<Point> points;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::vector<double> time_grid;  // noise steps
    std::size_t modes = 0;
    Eigen::MatrixXd values;         // row i * points.size() + j, column = path
    Eigen::VectorXd discrete_variance;

    std::size_t n_paths() const { return static_cast<std::size_t>(values.cols()); }
    std::size_t row(std::size_t ti, std::size_t xj) const { return ti * points.size() + xj; }
    double value(std::size_t path, std::size_t ti, std::size_t xj) const { return values(row(ti, xj), path); }
};

PathEnsemble simulate_convolution(const ConvolutionSetup& s, const SimulationOptions& opt);
// X(t) = S(t) X0 + M(t)
PathEnsemble simulate_mild(const ConvolutionSetup& s, const Field& X0, const SimulationOptions& opt);

struct MomentStats {
    double mean = 0, mean_se = 0;
    double var = 0, var_se = 0;
    double kurtosis = 0, kurtosis_se = 0;  // E X^4 / (E X^2)^2 of the centred sample
};
MomentStats moments(const Eigen::RowVectorXd& samples);

struct SemilinearOptions {
    double dt = 1e-3;
    int steps = 100;
    double tolerance = 1e-10;  // discrete L^p_{theta,delta} norm, max over time
    int max_iterations = 50;
    std::size_t n_paths = 200;
    std::uint64_t seed = 1;
    double variance_tolerance = std::numeric_limits<double>::infinity();
};

struct SemilinearResult {
    PathEnsemble ensemble;        // times dt, 2dt, ..; points = X0 grid nodes
    std::vector<int> iterations;  // per path
    bool converged = true;
};

// Picard iteration of X = S(t)X0 + int S(t-s) f(X(s)) ds + M(t) on a uniform grid
SemilinearResult simulate_semilinear(const ConvolutionSetup& s, const Field& X0,
                                     const std::function<double(double)>& f, double lipschitz,
                                     const SemilinearOptions& opt = {});
// the same grid with f = 0 expressed as simulate_mild options
SimulationOptions semilinear_grid(const Field& X0, const SemilinearOptions& opt);

struct FlowReport {
    Eigen::MatrixXd cov_one, cov_two;
    Eigen::VectorXd mean_one, mean_two;
    double max_cov_z = 0;   // max |difference| / standard error over covariance entries
    double max_mean_z = 0;
};

// one-shot X(t) against X(t) = S(t-s) X(s) + fresh noise on [s, t]
FlowReport flow_consistency(const ConvolutionSetup& s, const Field& X0, double s_time, double t,
                            const std::vector<Point>& probes, const QuadratureGrid& stage_grid,
                            SimulationOptions opt);

struct InvariantReport {
    JReport j_inf;
    std::vector<Point> points;
    std::vector<double> sigma_inf;
    std::vector<double> sigma_probe;   // at probe_time
    double probe_time = 0;
    double max_probe_gap = 0;          // max relative gap at probe_time
    bool monotone = true;
    std::vector<double> simulated;     // ensemble variance at the horizon
    std::vector<double> simulated_se;
    double max_z = 0;
};

InvariantReport invariant_diagnostics(const ConvolutionSetup& s, double horizon, const std::vector<Point>& points,
                                      std::size_t n_paths = 10000, std::uint64_t seed = 7);

struct TailReport {
    bool degenerate = false;
    JVerdict verdict = JVerdict::Inconclusive;  // Finite: Gaussian-type tail
    double exponent = 0;   // slope of log(-log P(N > r)) against log r over the tail
    double beta = 0;       // empirical
    std::size_t tail_samples = 0;
};

struct TailOptions {
    double upper = 0.1;          // tail region P(N > r) <= upper
    std::size_t min_count = 20;  // survivors kept at the far end
    std::size_t min_tail = 100;
    double threshold = 1.8;
};

TailReport gaussian_tail_diagnostic(std::vector<double> norms, const TailOptions& opt = {});

// per-path ||X(t_i)||_{p,theta,delta}; the ensemble points must be the grid nodes
std::vector<double> ensemble_norms(const PathEnsemble& e, std::size_t ti, const Domain& d, const QuadratureGrid& grid,
                                   const WeightedSpaceParams& params);

struct BdgReport {
    double p = 2;
    double simulated = 0, se = 0;
    double predicted = 0;  // c(p) int sigma^p w
};

// E int |M(t,x)|^p w dx against the Gaussian moment of the variance field
BdgReport bdg_check(const ConvolutionSetup& s, double t, const QuadratureGrid& grid, double p,
                    SimulationOptions opt);

double gaussian_abs_moment(double p);

void write_ensemble(std::ostream& os, const PathEnsemble& e, std::size_t max_paths = 0);

}  // namespace bwn
