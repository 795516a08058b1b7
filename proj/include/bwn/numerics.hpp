#pragma once

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace bwn {

inline constexpr double kPi = std::numbers::pi;

struct Rule {
    std::vector<double> x;  // on [-1, 1]
    std::vector<double> w;
};

// Gauss-Legendre rule; n in {2,3,4,5,6,8,10,12,16,20,30}
const Rule& gauss_legendre(int n);

// adaptive Gauss-Kronrod on [a, b]
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-10, unsigned depth = 12) {
    if (b <= a) return 0.0;
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, depth, rel_tol, &err);
}

// [a, inf)
template <class F>
double integrate_to_inf(F&& f, double a, double rel_tol = 1e-10) {
    boost::math::quadrature::exp_sinh<double> es;
    return es.integrate(f, a, std::numeric_limits<double>::infinity(), rel_tol);
}

// least squares y = a + b x; returns (a, b)
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// slope of log y against log x
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

std::vector<double> logspace(double lo_exp10, double hi_exp10, int n);
std::vector<double> linspace(double lo, double hi, int n);

// maximise a unimodal-ish f on [a, b]: coarse scan with n points, then golden refinement
template <class F>
std::pair<double, double> maximize_1d(F&& f, double a, double b, int n = 64, int iters = 60) {
    double best_x = a, best = f(a);
    double h = (b - a) / n;
    for (int i = 1; i <= n; ++i) {
        double x = a + i * h;
        double v = f(x);
        if (v > best) { best = v; best_x = x; }
    }
    double lo = std::max(a, best_x - h), hi = std::min(b, best_x + h);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters && hi - lo > 1e-14 * (1 + std::abs(lo)); ++i) {
        if (f1 < f2) { lo = x1; x1 = x2; f1 = f2; x2 = lo + g * (hi - lo); f2 = f(x2); }
        else { hi = x2; x2 = x1; f2 = f1; x1 = hi - g * (hi - lo); f1 = f(x1); }
    }
    if (f1 > best) { best = f1; best_x = x1; }
    if (f2 > best) { best = f2; best_x = x2; }
    return {best_x, best};
}

}  // namespace bwn
