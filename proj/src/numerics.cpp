#include "bwn/numerics.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <map>
#include <mutex>
#include <stdexcept>

namespace bwn {

namespace {

template <unsigned N>
Rule make_rule() {
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& a = G::abscissa();
    const auto& w = G::weights();
    Rule r;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) {
            r.x.push_back(0.0);
            r.w.push_back(w[i]);
        } else {
            r.x.push_back(-a[i]);
            r.w.push_back(w[i]);
            r.x.push_back(a[i]);
            r.w.push_back(w[i]);
        }
    }
    return r;
}

Rule build(int n) {
    switch (n) {
        case 2: return make_rule<2>();
        case 3: return make_rule<3>();
        case 4: return make_rule<4>();
        case 5: return make_rule<5>();
        case 6: return make_rule<6>();
        case 8: return make_rule<8>();
        case 10: return make_rule<10>();
        case 12: return make_rule<12>();
        case 16: return make_rule<16>();
        case 20: return make_rule<20>();
        case 30: return make_rule<30>();
        default: throw std::invalid_argument("gauss_legendre: unsupported order " + std::to_string(n));
    }
}

}  // namespace

const Rule& gauss_legendre(int n) {
    static std::map<int, Rule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build(n)).first;
    return it->second;
}

std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double a = (sy - b * sx) / n;
    return {a, b};
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return linear_fit(lx, ly).second;
}

std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(std::pow(10.0, lo + (hi - lo) * i / std::max(1, n - 1)));
    return v;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / std::max(1, n - 1));
    return v;
}

}  // namespace bwn
