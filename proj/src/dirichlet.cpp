#include "bwn/dirichlet.hpp"

#include "bwn/errors.hpp"
#include "bwn/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace bwn {

namespace {

double dist2(const Point& a, const Point& b) {
    double s = 0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return s;
}

void require_supported(const Domain& d) {
    if (d.kind == DomainKind::UnitBall || d.kind == DomainKind::GenericSigned)
        throw UnsupportedError("no exact kernel on " + d.name() + "; only the majorant path is available");
}

void check_datum(const Domain& d, const BoundaryData& g) {
    for (const auto& b : g.points) {
        if (static_cast<int>(b.size()) != d.dim) throw ParameterError("boundary point dimension mismatch");
        if (distance_to_boundary(d, b) > 1e-12) throw DomainMembershipError("datum point is not on the boundary");
    }
}

}  // namespace

BoundaryData BoundaryData::atoms(std::vector<Point> pts, std::vector<double> vals) {
    if (pts.size() != vals.size()) throw ParameterError("atoms: points and values differ in length");
    BoundaryData g;
    g.rep = Rep::Atoms;
    g.points = std::move(pts);
    g.values = std::move(vals);
    g.weights.assign(g.points.size(), 1.0);
    return g;
}

BoundaryData BoundaryData::sampled(const QuadratureGrid& quad, const std::function<double(const Point&)>& f) {
    BoundaryData g;
    g.rep = Rep::Sampled;
    for (std::size_t i = 0; i < quad.size(); ++i) {
        g.points.push_back(quad.node(i));
        g.weights.push_back(quad.weights[i]);
        g.values.push_back(f(g.points.back()));
    }
    return g;
}

BoundaryData BoundaryData::from_basis(const QuadratureGrid& quad, std::vector<double> coeffs,
                                      std::function<double(int, const Point&)> basis) {
    BoundaryData g = sampled(quad, [&](const Point& y) {
        double s = 0;
        for (std::size_t k = 0; k < coeffs.size(); ++k)
            if (coeffs[k] != 0) s += coeffs[k] * basis(static_cast<int>(k), y);
        return s;
    });
    g.rep = Rep::BasisCoeffs;
    g.coeffs = std::move(coeffs);
    g.basis = std::move(basis);
    return g;
}

BoundaryData BoundaryData::interval(double g0, double g1) { return atoms({{0.0}, {1.0}}, {g0, g1}); }

double BoundaryData::value_near(const Point& b) const {
    if (points.empty()) return 0.0;
    std::size_t best = 0;
    for (std::size_t i = 1; i < points.size(); ++i)
        if (dist2(points[i], b) < dist2(points[best], b)) best = i;
    return values[best];
}

BoundaryData BoundaryData::scaled(double a) const {
    BoundaryData g = *this;
    for (double& v : g.values) v *= a;
    for (double& c : g.coeffs) c *= a;
    return g;
}

BoundaryData operator+(const BoundaryData& a, const BoundaryData& b) {
    if (a.points.size() != b.points.size()) throw ParameterError("boundary data live on different supports");
    BoundaryData g = a;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (dist2(a.points[i], b.points[i]) > 0) throw ParameterError("boundary data live on different supports");
        g.values[i] += b.values[i];
    }
    if (a.coeffs.size() == b.coeffs.size())
        for (std::size_t k = 0; k < g.coeffs.size(); ++k) g.coeffs[k] += b.coeffs[k];
    return g;
}

// "# boundary atoms dim=D" then "coords value" lines, or
// "# boundary sampled dim=D" then "coords weight value" lines
BoundaryData read_boundary_data(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("empty boundary data");
    std::istringstream hs(line);
    std::string hash, tag, kind, dimtok;
    hs >> hash >> tag >> kind >> dimtok;
    if (hash != "#" || tag != "boundary" || dimtok.rfind("dim=", 0) != 0)
        throw ConfigError("bad boundary data header: " + line);
    int dim = std::stoi(dimtok.substr(4));
    bool sampled = kind == "sampled";
    if (!sampled && kind != "atoms") throw ConfigError("unknown boundary data kind: " + kind);
    BoundaryData g;
    g.rep = sampled ? BoundaryData::Rep::Sampled : BoundaryData::Rep::Atoms;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        Point p(dim);
        for (double& c : p) ls >> c;
        double w = 1, v = 0;
        if (sampled) ls >> w;
        ls >> v;
        if (!ls) throw ConfigError("bad boundary data line: " + line);
        g.points.push_back(p);
        g.weights.push_back(w);
        g.values.push_back(v);
    }
    return g;
}

void write_boundary_data(std::ostream& os, const BoundaryData& g) {
    int dim = g.points.empty() ? 1 : static_cast<int>(g.points[0].size());
    bool atoms = g.rep == BoundaryData::Rep::Atoms;
    os << "# boundary " << (atoms ? "atoms" : "sampled") << " dim=" << dim << "\n";
    char buf[40];
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (double c : g.points[i]) {
            std::snprintf(buf, sizeof buf, "%.17g ", c);
            os << buf;
        }
        if (!atoms) {
            std::snprintf(buf, sizeof buf, "%.17g ", g.weights[i]);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g\n", g.values[i]);
        os << buf;
    }
}

Field dirichlet_map(const Domain& domain, double lambda, const BoundaryData& gamma, const QuadratureGrid& out) {
    require_supported(domain);
    if (lambda < 0) throw ParameterError("lambda must be nonnegative");
    if (lambda == 0 && domain.kind != DomainKind::Interval01)
        throw ParameterError("lambda = 0 is not in the resolvent set on an unbounded domain");
    check_datum(domain, gamma);
    KernelHandle h = KernelHandle::image(domain);
    Field u{domain, out, std::vector<double>(out.size(), 0.0), 0.0};
    for (std::size_t i = 0; i < out.size(); ++i) {
        Point x = out.node(i);
        if (distance_to_boundary(domain, x) == 0) {
            u.values[i] = gamma.value_near(x);
            continue;
        }
        double s = 0;
        for (std::size_t j = 0; j < gamma.size(); ++j) {
            double m = gamma.weights[j] * gamma.values[j];
            if (m != 0) s -= m * resolvent_normal_derivative(h, lambda, x, gamma.points[j]);
        }
        u.values[i] = s;
    }
    return u;
}

double dirichlet_map_closed(const Domain& domain, double lambda, const BoundaryData& gamma, double x) {
    if (lambda < 0) throw ParameterError("lambda must be nonnegative");
    double s = std::sqrt(lambda);
    switch (domain.kind) {
        case DomainKind::Interval01: {
            double g0 = gamma.value_near({0.0}), g1 = gamma.value_near({1.0});
            if (lambda == 0) return g0 + (g1 - g0) * x;
            return (g0 * std::sinh(s * (1 - x)) + g1 * std::sinh(s * x)) / std::sinh(s);
        }
        case DomainKind::HalfLine:
            if (lambda == 0) throw ParameterError("lambda = 0 is not in the resolvent set on an unbounded domain");
            return gamma.value_near({0.0}) * std::exp(-s * x);
        default: throw UnsupportedError("no closed form on " + domain.name());
    }
}

QuadratureGrid uniform_nodes(double a, double b, double h) {
    QuadratureGrid g;
    g.dim = 1;
    int n = static_cast<int>(std::floor((b - a) / h + 1e-9));
    for (int i = 0; i <= n; ++i) {
        g.coords.push_back(a + i * h);
        g.weights.push_back(h);
    }
    g.tolerance = h * h;
    return g;
}

HarmonicityReport verify_harmonicity(const Field& u, double lambda, const BoundaryData* gamma) {
    HarmonicityReport r;
    const auto& g = u.grid;
    const int d = g.dim;
    if (g.size() < 3) return r;
    std::vector<double> c0;
    for (std::size_t i = 0; i < g.size(); ++i) c0.push_back(g.coords[i * d]);
    std::sort(c0.begin(), c0.end());
    double h = INFINITY;
    for (std::size_t i = 1; i < c0.size(); ++i)
        if (c0[i] - c0[i - 1] > 1e-12) h = std::min(h, c0[i] - c0[i - 1]);
    r.h = h;

    std::map<std::vector<long long>, std::size_t> index;
    auto key = [&](const Point& p) {
        std::vector<long long> k(d);
        for (int a = 0; a < d; ++a) k[a] = std::llround(p[a] / h);
        return k;
    };
    for (std::size_t i = 0; i < g.size(); ++i) index[key(g.node(i))] = i;

    for (std::size_t i = 0; i < g.size(); ++i) {
        auto k = key(g.node(i));
        double lap = 0;
        bool ok = true;
        for (int a = 0; a < d && ok; ++a)
            for (int s : {-1, 1}) {
                auto kk = k;
                kk[a] += s;
                auto it = index.find(kk);
                if (it == index.end()) { ok = false; break; }
                lap += u.values[it->second];
            }
        if (!ok) continue;
        lap = (lap - 2 * d * u.values[i]) / (h * h);
        r.residual = std::max(r.residual, std::abs(lap - lambda * u.values[i]));
        ++r.checked;
    }

    if (gamma)
        for (std::size_t j = 0; j < gamma->size(); ++j) {
            std::size_t best = 0;
            for (std::size_t i = 1; i < g.size(); ++i)
                if (dist2(g.node(i), gamma->points[j]) < dist2(g.node(best), gamma->points[j])) best = i;
            r.boundary_gap = std::max(r.boundary_gap, std::abs(u.values[best] - gamma->values[j]));
        }
    return r;
}

PropagatorField boundary_propagator(const KernelHandle& h, double t, const BoundaryData& e, const QuadratureGrid& out) {
    if (!(t > 0)) throw ParameterError("t must be positive");
    require_supported(h.domain);
    check_datum(h.domain, e);
    PropagatorField pf{{h.domain, out, std::vector<double>(out.size(), 0.0), t}, e, t};
    for (std::size_t i = 0; i < out.size(); ++i) {
        Point x = out.node(i);
        double s = 0;
        for (std::size_t j = 0; j < e.size(); ++j) {
            double m = e.weights[j] * e.values[j];
            if (m != 0) s -= m * boundary_normal_derivative(h, t, x, e.points[j]);
        }
        pf.field.values[i] = s;
    }
    return pf;
}

Field propagator_majorant(const Domain& domain, double t, const BoundaryData& e, double C, double c,
                          const QuadratureGrid& out) {
    if (!(t > 0) || !(c > 0)) throw ParameterError("t and c must be positive");
    Field f{domain, out, std::vector<double>(out.size(), 0.0), t};
    Point z(domain.dim);
    for (std::size_t i = 0; i < out.size(); ++i) {
        Point x = out.node(i);
        double s = 0;
        for (std::size_t j = 0; j < e.size(); ++j) {
            for (int a = 0; a < domain.dim; ++a) z[a] = x[a] - e.points[j][a];
            s += e.weights[j] * e.values[j] * gaussian_density(c * t, z);
        }
        f.values[i] = C / std::sqrt(t) * std::abs(s);
    }
    return f;
}

MajorantFit fit_majorant_constant(double c, double t_lo, double t_hi, int t_points, int x_points) {
    if (!(c > 0) || !(t_lo > 0) || !(t_hi > t_lo)) throw ParameterError("bad majorant fit window");
    auto ratio = [&](double t, double x) {
        double exact = k1d::half_line_flux(t, x);
        double maj = gaussian_1d(c * t, x) / std::sqrt(t);
        return maj > 0 ? exact / maj : (exact > 0 ? INFINITY : 0.0);
    };
    MajorantFit f;
    f.t = logspace(std::log10(t_lo), std::log10(t_hi), t_points);
    // x scanned in the similarity variable z = x / sqrt t
    const double z_max = 12.0;
    for (double t : f.t) {
        double st = std::sqrt(t);
        auto best = maximize_1d([&](double z) { return ratio(t, z * st); }, 0.0, z_max, x_points);
        f.C = std::max(f.C, best.second);
    }
    for (double t : logspace(std::log10(t_lo), std::log10(t_hi), 2 * t_points + 1))
        for (double z : linspace(0.0, z_max, 4 * x_points + 1))
            f.worst_ratio = std::max(f.worst_ratio, ratio(t, z * std::sqrt(t)) / f.C);
    return f;
}

}  // namespace bwn
