#pragma once

#include "bwn/geometry.hpp"
#include "bwn/kernels.hpp"
#include "bwn/semigroup.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace bwn {

// Boundary datum gamma. Atoms are point masses (counting measure on {0,1} or {0});
// Sampled carries its own boundary quadrature; BasisCoeffs is sum_k c_k e_k sampled on a quadrature.
// The conormal n^a is taken with a = identity, so n^a = n.
struct BoundaryData {
    enum class Rep { Atoms, Sampled, BasisCoeffs };
    Rep rep = Rep::Atoms;
    std::vector<Point> points;   // atoms or quadrature nodes
    std::vector<double> weights; // 1 for atoms
    std::vector<double> values;  // gamma at points
    std::vector<double> coeffs;  // BasisCoeffs only
    std::function<double(int, const Point&)> basis;

    static BoundaryData atoms(std::vector<Point> pts, std::vector<double> vals);
    static BoundaryData sampled(const QuadratureGrid& quad, const std::function<double(const Point&)>& g);
    static BoundaryData from_basis(const QuadratureGrid& quad, std::vector<double> coeffs,
                                   std::function<double(int, const Point&)> basis);
    // Interval01 datum (gamma_0, gamma_1)
    static BoundaryData interval(double g0, double g1);

    std::size_t size() const { return points.size(); }
    // gamma at the datum point closest to b
    double value_near(const Point& b) const;
    BoundaryData scaled(double a) const;
};

BoundaryData operator+(const BoundaryData& a, const BoundaryData& b);

BoundaryData read_boundary_data(std::istream& is);
void write_boundary_data(std::ostream& os, const BoundaryData& g);

// D_lambda gamma(x) = -int gamma(y) d/dn_y G_lambda(x,y) ds(y) on the interior nodes of out
Field dirichlet_map(const Domain& domain, double lambda, const BoundaryData& gamma, const QuadratureGrid& out);
// sinh / exponential closed forms on Interval01 and HalfLine
double dirichlet_map_closed(const Domain& domain, double lambda, const BoundaryData& gamma, double x);

struct HarmonicityReport {
    double h = 0;
    double residual = 0;      // max |Delta_h u - lambda u| over nodes with all neighbours
    double boundary_gap = 0;  // max |u(x) - gamma(b(x))| at the node nearest each boundary point
    int checked = 0;
};

HarmonicityReport verify_harmonicity(const Field& u, double lambda, const BoundaryData* gamma = nullptr);

QuadratureGrid uniform_nodes(double a, double b, double h);

struct PropagatorField {
    Field field;
    BoundaryData datum;
    double t = 0;
};

// psi_e(t,x) = -int dG/dn(t,x,y) e(y) ds(y)
PropagatorField boundary_propagator(const KernelHandle& h, double t, const BoundaryData& e, const QuadratureGrid& out);

// (C / sqrt t) |int g_{ct}(x - y) e(y) ds(y)|, g normalized in the ambient dimension
Field propagator_majorant(const Domain& domain, double t, const BoundaryData& e, double C, double c,
                          const QuadratureGrid& out);

struct MajorantFit {
    double C = 0;
    double worst_ratio = 0;  // max |psi| / majorant with the fitted C on a finer check grid
    std::vector<double> t;
};

// fits C for e = atom at 0 on HalfLine over t in [t_lo, t_hi]
MajorantFit fit_majorant_constant(double c, double t_lo = 1e-3, double t_hi = 1.0, int t_points = 16,
                                  int x_points = 64);

}  // namespace bwn
