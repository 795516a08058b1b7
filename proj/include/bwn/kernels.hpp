#pragma once

#include "bwn/geometry.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace bwn {

struct GaussianParams {
    double c = 1.0;
    double t = 1.0;
    int d = 1;
};

// g_t(z) = (2 pi t)^{-d/2} exp(-|z|^2 / 2t), d = z.size()
double gaussian_density(double t, const Point& z);
double gaussian_density(const GaussianParams& params, const Point& z);
double gaussian_1d(double t, double z);

// m_t(z) = min(1, rho(z)/sqrt(t))
double barrier_factor(const Domain& domain, double t, const Point& z);

enum class KernelRep { ImageSeries, SineSeries, ClosedForm };

// Dirichlet heat kernel of du/dt = Laplacian u on a concrete domain
struct KernelHandle {
    Domain domain;
    KernelRep rep = KernelRep::ImageSeries;
    int truncation = 0;  // 0 => automatic (first omitted term below 1e-14)

    static KernelHandle image(const Domain& d) { return {d, d.kind == DomainKind::Interval01 ? KernelRep::ImageSeries : KernelRep::ClosedForm, 0}; }
    static KernelHandle sine() { return {Domain::interval01(), KernelRep::SineSeries, 0}; }
};

// scalar 1-d kernels; x, y in the domain, t > 0
namespace k1d {
double interval_image(double t, double x, double y, int n_terms = 0);
double interval_sine(double t, double x, double y, int k_terms = 0);
double interval_image_dx(double t, double x, double y);
double interval_sine_dx(double t, double x, double y);
double interval_image_dxx(double t, double x, double y);
double half_line(double t, double x, double y);
double half_line_dx(double t, double x, double y);
double half_line_dxx(double t, double x, double y);
// psi_0(t,x) = -dG/dn(t,x,0) on the interval (image series) and its sine-series twin
double interval_flux0(double t, double x);
double interval_flux0_sine(double t, double x);
double half_line_flux(double t, double x);  // (x/t) g_{2t}(x)
int image_terms(double t);
int sine_terms(double t);
}  // namespace k1d

double green_kernel(const KernelHandle& h, double t, const Point& x, const Point& y);
Point green_gradient(const KernelHandle& h, double t, const Point& x, const Point& y);
// d^2 G / dx_1^2
double green_second_derivative(const KernelHandle& h, double t, const Point& x, const Point& y);

// dG/dn_y(t, x, b), outward normal at boundary point b
double boundary_normal_derivative(const KernelHandle& h, double t, const Point& x, const Point& b);

// int_0^inf e^{-lambda t} G(t,x,y) dt
double resolvent_kernel(const KernelHandle& h, double lambda, const Point& x, const Point& y);
double resolvent_half_line_closed(double lambda, double x, double y);
// int_0^inf e^{-lambda t} dG/dn(t,x,b) dt
double resolvent_normal_derivative(const KernelHandle& h, double lambda, const Point& x, const Point& b);

enum class Verdict { Bounded, Diverging, Inconclusive };
std::string to_string(Verdict v);

struct EstimateReport {
    std::string quantity;
    std::string grid;
    std::vector<double> sup_per_level;
    std::vector<std::pair<std::string, double>> constants;
    Verdict verdict = Verdict::Inconclusive;
    std::vector<std::string> notes;

    double constant(const std::string& name) const;
};

// bounded: last <= 1.05 * previous; diverging: last > 2 * previous; else inconclusive
Verdict classify_trace(const std::vector<double>& sups);
void write_report(std::ostream& os, const EstimateReport& r);

struct KernelBoundCheck {
    EstimateReport value;     // sup G / (m_t(y) g_{ct}(x-y))
    EstimateReport gradient;  // sup |grad G| sqrt(t) / (m_t(y) g_{ct}(x-y))
};

// level L uses t in [10^{-1-L}, 1]
KernelBoundCheck verify_kernel_upper_bounds(const KernelHandle& h, double c, int levels = 3,
                                            int t_per_decade = 8, int xy_points = 48);

// sup over a (z, v) grid of |e^{-z^2} - e^{-(z+v)^2}| / ((v ^ 1) e^{-z^2/2});
// z in [-6,6], v in (0,6], restricted to z >= -v/2
EstimateReport certify_etr(int nz = 200, int nv = 200);

// I(t,x) = int_{boundary} exp(-|x-y|^2/(c t)) ds(y)
double gaussian_boundary_mass(const Domain& domain, double t, const Point& x, double c, int level = 10);

struct BoundaryMassFit {
    std::vector<double> t_lo;  // nested windows [t_lo, 1]
    std::vector<double> c1;    // minimal C1 on each window
    double c1_refined = 0;     // same fit on a refined grid over the widest window
    double spread = 0;         // max |c1/c1_ref - 1| over windows
    bool stable = false;       // spread <= 0.1
};

// minimal C1 with I(t,x) <= C1 t^{(d-1)/2} exp(-rho^2/(C1 t)) on the unit ball
BoundaryMassFit fit_boundary_mass_constant(int d, double c = 1.0, int t_points = 25, int r_points = 40);

// sup_x int_O rho^alpha(y) g_{ct}(x-y) dy; returns (sup, argmax rho)
std::pair<double, double> axx_integral(const Domain& domain, double alpha, double c, double t);

struct ExponentFit {
    std::vector<double> t;
    std::vector<double> values;
    double slope = 0;
};

ExponentFit fit_axx_exponent(const Domain& domain, double alpha, double c, double t_lo = 1e-3,
                             double t_hi = 1.0, int n = 13);

// A_1(D), A_2(D) and N of the theta < p extension argument; D = O/sqrt(t) for t in (0,1]
EstimateReport appendix_b_constants(const Domain& domain, double theta, double c, int levels = 3);

}  // namespace bwn
