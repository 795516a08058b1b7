#include "bwn/semigroup.hpp"

#include "bwn/errors.hpp"
#include "bwn/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

namespace bwn {

namespace {

void require_t(double t) {
    if (!(t > 0.0)) throw ParameterError("time must be positive");
}

Eigen::VectorXd to_vec(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }

Eigen::VectorXd sample_on(const QuadratureGrid& g, const Sample& f) {
    Eigen::VectorXd v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g.node(i));
    return v;
}

double rho1(const Domain& d, double x) { return d.kind == DomainKind::Interval01 ? std::min(x, 1 - x) : x; }

}  // namespace

Field make_field(const Domain& domain, const QuadratureGrid& grid, const std::function<double(const Point&)>& f,
                 double time) {
    Field out{domain, grid, std::vector<double>(grid.size()), time};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out.values[i] = f(grid.node(i));
        if (!std::isfinite(out.values[i])) throw ParameterError("field value not finite at node " + std::to_string(i));
    }
    return out;
}

Eigen::MatrixXd semigroup_matrix(const KernelHandle& h, double t, const QuadratureGrid& out, const QuadratureGrid& in,
                                 KernelPart part) {
    require_t(t);
    const auto kind = h.domain.kind;
    const bool sine = h.rep == KernelRep::SineSeries;
    Eigen::MatrixXd M(out.size(), in.size());
    const double reach = 40 * std::sqrt(t);
    if (kind == DomainKind::Interval01 || kind == DomainKind::HalfLine) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double x = out.coords[i];
            for (std::size_t j = 0; j < in.size(); ++j) {
                const double y = in.coords[j];
                double v = 0;
                if (kind == DomainKind::Interval01) {
                    if (!sine && std::abs(x - y) > reach && std::min(x + y, 2 - x - y) > reach) {
                        M(i, j) = 0;
                        continue;
                    }
                    switch (part) {
                        case KernelPart::Value: v = sine ? k1d::interval_sine(t, x, y) : k1d::interval_image(t, x, y); break;
                        case KernelPart::Gradient:
                            v = sine ? k1d::interval_sine_dx(t, x, y) : k1d::interval_image_dx(t, x, y);
                            break;
                        case KernelPart::Second: v = k1d::interval_image_dxx(t, x, y); break;
                    }
                } else {
                    if (std::abs(x - y) > reach) {
                        M(i, j) = 0;
                        continue;
                    }
                    switch (part) {
                        case KernelPart::Value: v = k1d::half_line(t, x, y); break;
                        case KernelPart::Gradient: v = k1d::half_line_dx(t, x, y); break;
                        case KernelPart::Second: v = k1d::half_line_dxx(t, x, y); break;
                    }
                }
                M(i, j) = v * in.weights[j];
            }
        }
        return M;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        Point x = out.node(i);
        for (std::size_t j = 0; j < in.size(); ++j) {
            Point y = in.node(j);
            double v = 0;
            switch (part) {
                case KernelPart::Value: v = green_kernel(h, t, x, y); break;
                case KernelPart::Gradient: v = green_gradient(h, t, x, y)[0]; break;
                case KernelPart::Second: v = green_second_derivative(h, t, x, y); break;
            }
            M(i, j) = v * in.weights[j];
        }
    }
    return M;
}

Field apply_semigroup(const KernelHandle& h, double t, const Field& psi, const QuadratureGrid& out) {
    Eigen::VectorXd v = semigroup_matrix(h, t, out, psi.grid) * to_vec(psi.values);
    return Field{psi.domain, out, std::vector<double>(v.data(), v.data() + v.size()), psi.time + t};
}

Field apply_semigroup(const KernelHandle& h, double t, const Field& psi) { return apply_semigroup(h, t, psi, psi.grid); }

Field semigroup_gradient(const KernelHandle& h, double t, const Field& psi) {
    Eigen::VectorXd v = semigroup_matrix(h, t, psi.grid, psi.grid, KernelPart::Gradient) * to_vec(psi.values);
    return Field{psi.domain, psi.grid, std::vector<double>(v.data(), v.data() + v.size()), psi.time + t};
}

std::vector<double> weight_vector(const Domain& d, const QuadratureGrid& g, const WeightedSpaceParams& params) {
    std::vector<double> w(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) w[i] = weight(d, g.node(i), params);
    return w;
}

double weighted_norm(const QuadratureGrid& g, const std::vector<double>& w, const Eigen::VectorXd& v, double p) {
    double s = 0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g.weights[i] * w[i] * std::pow(std::abs(v[i]), p);
    return std::pow(s, 1 / p);
}

double weighted_norm(const Field& f, const WeightedSpaceParams& params) {
    return weighted_norm(f.grid, weight_vector(f.domain, f.grid, params), to_vec(f.values), params.p);
}

double spectral_norm(const Eigen::MatrixXd& M, const Eigen::VectorXd& a, const Eigen::VectorXd& b, int max_iter,
                     double tol) {
    Eigen::MatrixXd B = a.asDiagonal() * M * b.asDiagonal();
    Eigen::VectorXd v = Eigen::VectorXd::Ones(B.cols()).normalized();
    double sigma = 0;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd u = B * v;
        Eigen::VectorXd w = B.transpose() * u;
        double nw = w.norm();
        if (nw == 0) return 0;
        double s = std::sqrt(nw);
        v = w / nw;
        if (std::abs(s - sigma) <= tol * s) return s;
        sigma = s;
    }
    return sigma;
}

double l2_operator_norm(const Eigen::MatrixXd& M, const QuadratureGrid& out, const std::vector<double>& w_out,
                        const QuadratureGrid& in, const std::vector<double>& w_in) {
    Eigen::VectorXd a(out.size()), b(in.size());
    for (std::size_t i = 0; i < out.size(); ++i) a[i] = std::sqrt(out.weights[i] * w_out[i]);
    for (std::size_t j = 0; j < in.size(); ++j) b[j] = 1 / std::sqrt(in.weights[j] * w_in[j]);
    return spectral_norm(M, a, b);
}

double operator_norm_bound(const Eigen::MatrixXd& M, const QuadratureGrid& g, const std::vector<double>& w, double p) {
    if (p == 2) return l2_operator_norm(M, g, w, g, w);
    // A = mu^{1/p} M mu^{-1/p}; Riesz-Thorin between l^1 and l^inf
    const std::size_t n = g.size();
    Eigen::VectorXd mu(n);
    for (std::size_t i = 0; i < n; ++i) mu[i] = std::pow(g.weights[i] * w[i], 1 / p);
    Eigen::MatrixXd A = mu.asDiagonal() * M.cwiseAbs() * mu.cwiseInverse().asDiagonal();
    double col = A.colwise().sum().maxCoeff();
    double row = A.rowwise().sum().maxCoeff();
    return std::pow(col, 1 / p) * std::pow(row, 1 - 1 / p);
}

double level_distance(int level) { return std::pow(10.0, -2.0 - 4.0 * level); }

QuadratureGrid operator_grid(const Domain& d, int level, double t_min) {
    GridRequest req;
    req.graded = true;
    req.n = 8;
    req.min_distance = level_distance(level);
    double h = std::min(1.0 / 16, std::sqrt(2 * t_min) / 2);
    req.panel = std::pow(2.0, std::floor(std::log2(h)));
    req.cutoff = 1.0;
    if (d.kind != DomainKind::Interval01 && d.kind != DomainKind::HalfLine)
        throw UnsupportedError("operator checks run on the interval and the half-line");
    return interior_grid(d, req);
}

std::vector<Sample> witness_family(const Domain& d, const WeightedSpaceParams& params, const std::vector<double>& etas) {
    std::vector<Sample> out;
    for (double eta : etas) {
        double s = (params.theta + 1) / params.p - eta;
        if (d.kind == DomainKind::Interval01)
            out.push_back([s](const Point& x) { return std::pow(x[0], -s); });
        else
            out.push_back([s](const Point& x) { return std::pow(x[0], -s) * std::exp(-x[0] * x[0]); });
    }
    return out;
}

std::vector<Sample> random_smooth_samples(const Domain& d, int count, unsigned long long seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n01;
    std::vector<Sample> out;
    for (int c = 0; c < count; ++c) {
        std::vector<double> a(6);
        for (int k = 0; k < 6; ++k) a[k] = n01(gen) / (k + 1);
        if (d.kind == DomainKind::Interval01)
            out.push_back([a](const Point& x) {
                double s = 0;
                for (int k = 0; k < 6; ++k) s += a[k] * std::sin((k + 1) * kPi * x[0]);
                return s;
            });
        else
            out.push_back([a](const Point& x) {
                double s = 0;
                for (int k = 0; k < 6; ++k) s += a[k] * std::cos(k * x[0]);
                return s * std::exp(-x[0] * x[0]);
            });
    }
    return out;
}

ExtensionTrace extension_bound(const KernelHandle& h, const WeightedSpaceParams& params,
                               const std::vector<double>& t_grid, const std::vector<Sample>& psi_samples, int levels) {
    const Domain& d = h.domain;
    const double t_min = *std::min_element(t_grid.begin(), t_grid.end());
    auto wit = witness_family(d, params);
    ExtensionTrace tr;
    tr.samples.quantity = "sup |S(t)psi|/|psi| over samples";
    tr.witness.quantity = "sup |S(t)psi|/|psi| over boundary witnesses";
    tr.operator_norm.quantity = "discrete operator norm of S(t)";
    for (int L = 0; L < levels; ++L) {
        QuadratureGrid g = operator_grid(d, L, t_min);
        auto w = weight_vector(d, g, params);
        double s_sup = 0, w_sup = 0, o_sup = 0;
        std::vector<Eigen::VectorXd> S, W;
        for (const auto& f : psi_samples) S.push_back(sample_on(g, f));
        for (const auto& f : wit) W.push_back(sample_on(g, f));
        for (double t : t_grid) {
            Eigen::MatrixXd M = semigroup_matrix(h, t, g, g);
            for (auto& v : S) s_sup = std::max(s_sup, weighted_norm(g, w, M * v, params.p) / weighted_norm(g, w, v, params.p));
            for (auto& v : W) w_sup = std::max(w_sup, weighted_norm(g, w, M * v, params.p) / weighted_norm(g, w, v, params.p));
            if (params.p == 2) o_sup = std::max(o_sup, l2_operator_norm(M, g, w, g, w));
        }
        tr.samples.sup_per_level.push_back(s_sup);
        tr.witness.sup_per_level.push_back(w_sup);
        if (params.p == 2) tr.operator_norm.sup_per_level.push_back(o_sup);
    }
    for (auto* r : {&tr.samples, &tr.witness, &tr.operator_norm}) {
        r->grid = "graded, innermost distance 10^{-2-4L}, " + std::to_string(t_grid.size()) + " times";
        r->verdict = classify_trace(r->sup_per_level);
        if (!r->sup_per_level.empty()) r->constants = {{"sup", r->sup_per_level.back()}};
    }
    std::vector<Verdict> vs{tr.witness.verdict, tr.samples.verdict};
    if (params.p == 2) vs.push_back(tr.operator_norm.verdict);
    if (std::any_of(vs.begin(), vs.end(), [](Verdict v) { return v == Verdict::Diverging; }))
        tr.verdict = Verdict::Diverging;
    else if (std::all_of(vs.begin(), vs.end(), [](Verdict v) { return v == Verdict::Bounded; }))
        tr.verdict = Verdict::Bounded;
    return tr;
}

SlopeReport gradient_smoothing_ratio(const KernelHandle& h, const WeightedSpaceParams& params,
                                     const std::vector<double>& t_grid, const std::vector<Sample>& psi_samples,
                                     KernelPart part) {
    const Domain& d = h.domain;
    const double t_min = *std::min_element(t_grid.begin(), t_grid.end());
    QuadratureGrid g = operator_grid(d, 2, t_min);
    auto w = weight_vector(d, g, params);
    auto wit = witness_family(d, params);
    std::vector<Eigen::VectorXd> S, W;
    for (const auto& f : psi_samples) S.push_back(sample_on(g, f));
    for (const auto& f : wit) W.push_back(sample_on(g, f));
    SlopeReport r;
    r.t = t_grid;
    for (double t : t_grid) {
        Eigen::MatrixXd M = semigroup_matrix(h, t, g, g, part);
        double ws = 0, ss = 0;
        for (auto& v : W) ws = std::max(ws, weighted_norm(g, w, M * v, params.p) / weighted_norm(g, w, v, params.p));
        for (auto& v : S) ss = std::max(ss, weighted_norm(g, w, M * v, params.p) / weighted_norm(g, w, v, params.p));
        r.witness_ratio.push_back(ws);
        r.ratio.push_back(params.p == 2 ? l2_operator_norm(M, g, w, g, w) : std::max(ss, ws));
    }
    r.slope = loglog_slope(r.t, r.ratio);
    r.witness_slope = loglog_slope(r.t, r.witness_ratio);
    return r;
}

SlopeReport cross_space_smoothing(const KernelHandle& h, const WeightedSpaceParams& params,
                                  const std::vector<double>& t_grid) {
    const Domain& d = h.domain;
    const double t_min = *std::min_element(t_grid.begin(), t_grid.end());
    QuadratureGrid g = operator_grid(d, 2, t_min);
    WeightedSpaceParams flat = params;
    flat.theta = 0;
    auto w_in = weight_vector(d, g, params);
    auto w_out = weight_vector(d, g, flat);
    std::vector<Eigen::VectorXd> W;
    for (double e : {0.2, 0.1, 0.05}) {
        double s = (1 - e) * (params.theta + 1) / params.p;
        W.push_back(sample_on(g, [&](const Point& x) {
            double r = rho1(d, x[0]);
            return std::pow(r, -s) * (d.kind == DomainKind::HalfLine ? std::exp(-x[0] * x[0]) : 1.0);
        }));
    }
    SlopeReport r;
    r.t = t_grid;
    for (double t : t_grid) {
        Eigen::MatrixXd M = semigroup_matrix(h, t, g, g);
        double ws = 0;
        for (auto& v : W) ws = std::max(ws, weighted_norm(g, w_out, M * v, params.p) / weighted_norm(g, w_in, v, params.p));
        r.witness_ratio.push_back(ws);
        r.ratio.push_back(params.p == 2 ? l2_operator_norm(M, g, w_out, g, w_in) : ws);
    }
    r.slope = loglog_slope(r.t, r.ratio);
    r.witness_slope = loglog_slope(r.t, r.witness_ratio);
    return r;
}

bool SchurReport::all_bounded() const {
    return std::all_of(verdict.begin(), verdict.end(), [](Verdict v) { return v == Verdict::Bounded; });
}

namespace {

struct Nodes {
    std::vector<double> x, w;
};

// composite Gauss on [a, b] in the distance variable, geometric toward a when a == 0
void add_panels(Nodes& n, double a, double b, double h, double eps) {
    if (b <= a) return;
    if (a == 0) {
        graded_rule(b, h, eps, 8, n.x, n.w);
        return;
    }
    const Rule& g = gauss_legendre(8);
    int m = std::max(1, static_cast<int>(std::ceil((b - a) / h)));
    double hw = (b - a) / m;
    for (int i = 0; i < m; ++i)
        for (std::size_t k = 0; k < g.x.size(); ++k) {
            n.x.push_back(a + (i + 0.5) * hw + 0.5 * hw * g.x[k]);
            n.w.push_back(0.5 * hw * g.w[k]);
        }
}

}  // namespace

SchurReport schur_constants(const Domain& d, double p, double theta, double c, int levels, int t_points) {
    if (d.kind != DomainKind::Interval01 && d.kind != DomainKind::HalfLine)
        throw UnsupportedError("Schur constants are computed on the interval and the half-line");
    const bool interval = d.kind == DomainKind::Interval01;
    const double a = (theta + 1) / p;
    SchurReport rep;
    rep.p = p;
    rep.theta = theta;
    rep.c = c;
    std::array<double, 8> k{};
    for (int L = 0; L < levels; ++L) {
        const double eps = level_distance(L);
        for (double t : logspace(-4, 0, t_points)) {
            const double st = std::sqrt(t), sct = std::sqrt(c * t);
            const double half = interval ? 0.5 : 1e300;
            const double h = std::min(sct / 4, 1.0 / 16);
            // points along the distance variable; interval points sit in the left half by symmetry
            std::vector<double> pts = logspace(std::log10(eps), std::log10(interval ? 0.5 : 2.0), 7 * (3 + 4 * L));
            pts.push_back(st);
            for (double s : pts) {
                if (s > half) continue;
                const double R = interval ? 0.5 : s + 15 * sct;
                Nodes in_t, out_t;  // distance-variable nodes in O_t and its complement
                add_panels(in_t, 0.0, std::min(st, R), h, eps);
                add_panels(out_t, std::min(st, R), R, h, eps);
                double rs = s;
                double row_in = 0, row_out = 0, col_in = 0, col_out = 0;
                auto accumulate = [&](const Nodes& n, double& row, double& col) {
                    for (std::size_t i = 0; i < n.x.size(); ++i) {
                        double r = n.x[i];
                        for (int side = 0; side < (interval ? 2 : 1); ++side) {
                            double y = side == 0 ? r : 1 - r;
                            double g = gaussian_1d(c * t, s - y);
                            // row: x = s, integrate y; k dy / rho(y)
                            row += n.w[i] * std::pow(rs / r, a) * std::min(1.0, r / st) * g;
                            // column: y = s, integrate x; k dx / rho(x)
                            col += n.w[i] * std::pow(r / rs, a) * std::min(1.0, rs / st) * g * rs / r;
                        }
                    }
                };
                accumulate(in_t, row_in, col_in);
                accumulate(out_t, row_out, col_out);
                if (s < st) {
                    k[0] = std::max(k[0], row_in);
                    k[4] = std::max(k[4], row_out);
                    k[1] = std::max(k[1], col_in);
                    k[3] = std::max(k[3], col_out);
                } else {
                    k[2] = std::max(k[2], row_in);
                    k[6] = std::max(k[6], row_out);
                    k[5] = std::max(k[5], col_in);
                    k[7] = std::max(k[7], col_out);
                }
            }
        }
        for (int j = 0; j < 8; ++j) rep.trace[j].push_back(k[j]);
    }
    rep.k = k;
    for (int j = 0; j < 8; ++j) rep.verdict[j] = classify_trace(rep.trace[j]);
    return rep;
}

SpliceReport min_weight_splice_check(const Eigen::MatrixXd& T, const QuadratureGrid& g, const std::vector<double>& w1,
                                     const std::vector<double>& w2, double p, int n_samples, unsigned long long seed) {
    SpliceReport r;
    std::vector<double> w(w1.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::min(w1[i], w2[i]);
    r.norm1 = operator_norm_bound(T, g, w1, p);
    r.norm2 = operator_norm_bound(T, g, w2, p);
    r.bound = std::pow(2.0, (p - 1) / p) * std::max(r.norm1, r.norm2);
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n01;
    const std::size_t n = g.size();
    for (int s = 0; s < n_samples; ++s) {
        Eigen::VectorXd v(n);
        // alternate smooth random series and rough node-wise noise
        if (s % 2 == 0) {
            std::vector<double> a(8);
            for (auto& c : a) c = n01(gen);
            for (std::size_t i = 0; i < n; ++i) {
                double x = g.x(i), acc = 0;
                for (int k = 0; k < 8; ++k) acc += a[k] * std::cos(k * kPi * x) / (k + 1);
                v[i] = acc;
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) v[i] = n01(gen);
        }
        double ratio = weighted_norm(g, w, T * v, p) / weighted_norm(g, w, v, p);
        r.worst_ratio = std::max(r.worst_ratio, ratio);
        ++r.samples;
    }
    r.holds = r.worst_ratio <= r.bound * (1 + 1e-12);
    return r;
}

StabilityFit stability_rate(const KernelHandle& h, const WeightedSpaceParams& params, const Sample& psi, double horizon,
                            double t0, int n) {
    if (h.domain.kind != DomainKind::Interval01) throw UnsupportedError("stability rate needs a bounded domain");
    QuadratureGrid g = operator_grid(h.domain, 1, t0);
    auto w = weight_vector(h.domain, g, params);
    Eigen::VectorXd v = sample_on(g, psi);
    StabilityFit f;
    f.t = linspace(t0, horizon, n);
    for (double t : f.t) f.norms.push_back(weighted_norm(g, w, semigroup_matrix(h, t, g, g) * v, params.p));
    std::vector<double> lg;
    for (double v2 : f.norms) lg.push_back(std::log(v2));
    f.rate = -linear_fit(f.t, lg).second;
    return f;
}

void write_field(std::ostream& os, const Field& f) {
    char buf[64];
    os << "# field domain=" << f.domain.name() << " time=" << f.time << " nodes=" << f.grid.size() << "\n";
    for (std::size_t i = 0; i < f.grid.size(); ++i) {
        for (int k = 0; k < f.grid.dim; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g ", f.grid.coords[i * f.grid.dim + k]);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", f.grid.weights[i], f.values[i]);
        os << buf;
    }
}

}  // namespace bwn
