#pragma once

#include "bwn/geometry.hpp"
#include "bwn/kernels.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace bwn {

struct Field {
    Domain domain;
    QuadratureGrid grid;
    std::vector<double> values;
    double time = 0.0;
};

Field make_field(const Domain& domain, const QuadratureGrid& grid, const std::function<double(const Point&)>& f,
                 double time = 0.0);

enum class KernelPart { Value, Gradient, Second };

// M(i,j) = K(t, out_i, in_j) * w_j, so (M v)_i is the quadrature of K(t, out_i, .) v
Eigen::MatrixXd semigroup_matrix(const KernelHandle& h, double t, const QuadratureGrid& out,
                                 const QuadratureGrid& in, KernelPart part = KernelPart::Value);

Field apply_semigroup(const KernelHandle& h, double t, const Field& psi);
Field apply_semigroup(const KernelHandle& h, double t, const Field& psi, const QuadratureGrid& out);
// d/dx_1 S(t) psi by the differentiated kernel
Field semigroup_gradient(const KernelHandle& h, double t, const Field& psi);

double weighted_norm(const Field& f, const WeightedSpaceParams& params);
double weighted_norm(const QuadratureGrid& g, const std::vector<double>& w, const Eigen::VectorXd& v, double p);
std::vector<double> weight_vector(const Domain& d, const QuadratureGrid& g, const WeightedSpaceParams& params);

// largest singular value of diag(a) M diag(b) by power iteration on the normal equations
double spectral_norm(const Eigen::MatrixXd& M, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                     int max_iter = 500, double tol = 1e-11);

// exact p = 2 operator norm of the discrete operator M from L^2(w_in) to L^2(w_out)
double l2_operator_norm(const Eigen::MatrixXd& M, const QuadratureGrid& out, const std::vector<double>& w_out,
                        const QuadratureGrid& in, const std::vector<double>& w_in);

// upper bound on the L^p(w) norm of a nonnegative discrete kernel: exact for p = 2, Schur test otherwise
double operator_norm_bound(const Eigen::MatrixXd& M, const QuadratureGrid& g, const std::vector<double>& w, double p);

using Sample = std::function<double(const Point&)>;

// rho^{-s} near the boundary, s = (theta+1)/p - eta, times a smooth cutoff (interval: none needed)
std::vector<Sample> witness_family(const Domain& d, const WeightedSpaceParams& params,
                                   const std::vector<double>& etas = {0.4, 0.2, 0.1, 0.05, 0.02});
std::vector<Sample> random_smooth_samples(const Domain& d, int count, unsigned long long seed);

// graded grid used by the operator-level checks; level L has innermost distance 10^{-2-4L}
QuadratureGrid operator_grid(const Domain& d, int level, double t_min = 1e-4);
double level_distance(int level);

struct ExtensionTrace {
    EstimateReport samples;   // sup over psi samples and t of |S(t)psi| / |psi|
    EstimateReport witness;   // same over the boundary witness family
    EstimateReport operator_norm;  // p = 2 only: exact discrete norm
    Verdict verdict = Verdict::Inconclusive;
};

ExtensionTrace extension_bound(const KernelHandle& h, const WeightedSpaceParams& params,
                               const std::vector<double>& t_grid, const std::vector<Sample>& psi_samples,
                               int levels = 3);

struct SlopeReport {
    std::vector<double> t;
    std::vector<double> ratio;          // exact p = 2 norm, or sample sup otherwise
    std::vector<double> witness_ratio;  // sup over the witness family
    double slope = 0.0;
    double witness_slope = 0.0;
};

SlopeReport gradient_smoothing_ratio(const KernelHandle& h, const WeightedSpaceParams& params,
                                     const std::vector<double>& t_grid, const std::vector<Sample>& psi_samples,
                                     KernelPart part = KernelPart::Gradient);

// |S(t) psi| in theta = 0 (same delta) over |psi| in (theta, delta)
SlopeReport cross_space_smoothing(const KernelHandle& h, const WeightedSpaceParams& params,
                                  const std::vector<double>& t_grid);

struct SchurReport {
    double p = 2, theta = 0, c = 4;
    std::array<double, 8> k{};
    std::array<std::vector<double>, 8> trace;  // per refinement level
    std::array<Verdict, 8> verdict{};
    bool all_bounded() const;
};

SchurReport schur_constants(const Domain& d, double p, double theta, double c = 4.0, int levels = 3,
                            int t_points = 9);

struct SpliceReport {
    double norm1 = 0, norm2 = 0, bound = 0;  // |T| in L^p(w1), L^p(w2), and 2^{(p-1)/p} max
    double worst_ratio = 0;                  // sup over samples of |T psi|_min / |psi|_min
    int samples = 0;
    bool holds = false;
};

SpliceReport min_weight_splice_check(const Eigen::MatrixXd& T, const QuadratureGrid& g, const std::vector<double>& w1,
                                     const std::vector<double>& w2, double p, int n_samples, unsigned long long seed);

struct StabilityFit {
    std::vector<double> t, norms;
    double rate = 0;
};

// fit of log |S(t) psi| against t over [t0, horizon]
StabilityFit stability_rate(const KernelHandle& h, const WeightedSpaceParams& params, const Sample& psi,
                            double horizon = 2.0, double t0 = 0.5, int n = 16);

void write_field(std::ostream& os, const Field& f);

}  // namespace bwn
