#include "bwn/geometry.hpp"

#include "bwn/errors.hpp"
#include "bwn/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace bwn {

namespace {

double norm2(const Point& x) {
    double s = 0;
    for (double v : x) s += v * v;
    return s;
}

void check_dim(const Domain& d, const Point& x) {
    if (static_cast<int>(x.size()) != d.dim)
        throw ParameterError("point has dimension " + std::to_string(x.size()) + ", domain " + d.name() +
                             " expects " + std::to_string(d.dim));
}

constexpr double kClosureTol = 1e-12;

}  // namespace

Domain Domain::interval01() { return Domain{DomainKind::Interval01, 1, {}, {}, {}, {}}; }
Domain Domain::half_line() { return Domain{DomainKind::HalfLine, 1, {}, {}, {}, {}}; }

Domain Domain::half_space(int d) {
    if (d < 1) throw ParameterError("half space dimension must be positive");
    return Domain{DomainKind::HalfSpace, d, {}, {}, {}, {}};
}

Domain Domain::unit_ball(int d) {
    if (d < 2) throw ParameterError("unit ball needs d >= 2");
    return Domain{DomainKind::UnitBall, d, {}, {}, {}, {}};
}

Domain Domain::generic(int d, std::function<double(const Point&)> sd, Point lo, Point hi,
                       std::vector<BoundaryPatch> patches) {
    if (!sd) throw ParameterError("generic domain needs a distance oracle");
    if (static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d)
        throw ParameterError("bounding box dimension mismatch");
    return Domain{DomainKind::GenericSigned, d, std::move(sd), std::move(lo), std::move(hi), std::move(patches)};
}

bool Domain::bounded() const {
    return kind == DomainKind::Interval01 || kind == DomainKind::UnitBall || kind == DomainKind::GenericSigned;
}

std::string Domain::name() const {
    switch (kind) {
        case DomainKind::Interval01: return "interval01";
        case DomainKind::HalfLine: return "halfline";
        case DomainKind::HalfSpace: return "halfspace:" + std::to_string(dim);
        case DomainKind::UnitBall: return "unitball:" + std::to_string(dim);
        case DomainKind::GenericSigned: return "generic:" + std::to_string(dim);
    }
    return "?";
}

Domain parse_domain(const std::string& s) {
    auto colon = s.find(':');
    std::string head = s.substr(0, colon);
    int d = 0;
    if (colon != std::string::npos) {
        try {
            d = std::stoi(s.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError("bad domain dimension in '" + s + "'");
        }
    }
    if (head == "interval01") return Domain::interval01();
    if (head == "halfline") return Domain::half_line();
    if (head == "halfspace") return Domain::half_space(d > 0 ? d : 2);
    if (head == "unitball") return Domain::unit_ball(d > 0 ? d : 2);
    throw ConfigError("unknown domain '" + s + "'");
}

bool in_closure(const Domain& domain, const Point& x) {
    check_dim(domain, x);
    switch (domain.kind) {
        case DomainKind::Interval01: return x[0] >= -kClosureTol && x[0] <= 1 + kClosureTol;
        case DomainKind::HalfLine:
        case DomainKind::HalfSpace: return x[0] >= -kClosureTol;
        case DomainKind::UnitBall: return std::sqrt(norm2(x)) <= 1 + kClosureTol;
        case DomainKind::GenericSigned: return domain.signed_distance(x) >= -kClosureTol;
    }
    return false;
}

double distance_to_boundary(const Domain& domain, const Point& x) {
    if (!in_closure(domain, x)) throw DomainMembershipError("point outside " + domain.name());
    double r = 0;
    switch (domain.kind) {
        case DomainKind::Interval01: r = std::min(x[0], 1.0 - x[0]); break;
        case DomainKind::HalfLine:
        case DomainKind::HalfSpace: r = x[0]; break;
        case DomainKind::UnitBall: r = 1.0 - std::sqrt(norm2(x)); break;
        case DomainKind::GenericSigned: r = domain.signed_distance(x); break;
    }
    return std::max(r, 0.0);
}

WeightedSpaceParams::WeightedSpaceParams(double p_, double theta_, double delta_)
    : p(p_), theta(theta_), delta(delta_) {
    if (!(p > 1.0)) throw ParameterError("p must exceed 1");
    if (theta < 0.0) throw ParameterError("theta must be nonnegative");
    if (delta < 0.0) throw ParameterError("delta must be nonnegative");
    extension_ok = theta < 2.0 * p - 1.0;
}

double weight_rho(double rho, double n2, const WeightedSpaceParams& params) {
    double a = params.theta == 0.0 ? 1.0 : std::pow(rho, params.theta);
    double b = params.delta == 0.0 ? 1.0 : std::pow(1.0 + n2, -params.delta);
    return std::min(a, b);
}

double weight(const Domain& domain, const Point& x, const WeightedSpaceParams& params) {
    return weight_rho(distance_to_boundary(domain, x), norm2(x), params);
}

Point QuadratureGrid::node(std::size_t i) const {
    return Point(coords.begin() + static_cast<std::ptrdiff_t>(i * dim),
                 coords.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
}

double QuadratureGrid::sum_weights() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

double gaussian_cutoff(double c, double t_max) { return std::sqrt(2.0 * c * t_max * std::log(1e12)); }

void graded_rule(double len, double h, double min_distance, int n, std::vector<double>& nodes,
                 std::vector<double>& weights) {
    const Rule& g = gauss_legendre(n);
    auto panel = [&](double a, double b) {
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            nodes.push_back(0.5 * (a + b) + 0.5 * (b - a) * g.x[i]);
            weights.push_back(0.5 * (b - a) * g.w[i]);
        }
    };
    h = std::min(h, len);
    std::vector<double> edges;
    for (double a = h; a > min_distance * (1 + 1e-12); a *= 0.5) edges.push_back(a);
    if (edges.empty()) edges.push_back(h);
    edges.push_back(std::min(min_distance, edges.back()));
    for (std::size_t i = edges.size() - 1; i > 0; --i) panel(edges[i], edges[i - 1]);
    if (len > h) {
        int rest = std::max(1, static_cast<int>(std::ceil((len - h) / h - 1e-9)));
        double ww = (len - h) / rest;
        for (int i = 0; i < rest; ++i) panel(h + i * ww, h + (i + 1) * ww);
    }
}

QuadratureGrid interior_grid(const Domain& domain, const GridRequest& req) {
    QuadratureGrid grid;
    grid.dim = domain.dim;
    const double R = req.cutoff > 0 ? req.cutoff : 20.0;
    auto graded_levels = [&](double top) {
        return static_cast<int>(std::ceil(std::log2(std::min(req.panel, top) / req.min_distance)));
    };
    auto radial = [&](double len, std::vector<double>& x, std::vector<double>& w) {
        if (req.graded) {
            graded_rule(len, req.panel, req.min_distance, req.n, x, w);
        } else {
            int m = std::max(1, static_cast<int>(std::lround(req.n * len)));
            for (int i = 0; i < m; ++i) {
                x.push_back((i + 0.5) * len / m);
                w.push_back(len / m);
            }
        }
    };

    switch (domain.kind) {
        case DomainKind::Interval01: {
            std::vector<double> x, w;
            if (req.graded) {
                radial(0.5, x, w);
                std::size_t m = x.size();
                for (std::size_t i = 0; i < m; ++i) {
                    grid.coords.push_back(x[i]);
                    grid.weights.push_back(w[i]);
                }
                for (std::size_t i = m; i-- > 0;) {
                    grid.coords.push_back(1.0 - x[i]);
                    grid.weights.push_back(w[i]);
                }
                grid.level = graded_levels(0.5);
                grid.tolerance = 2 * req.min_distance;
            } else {
                int m = std::max(1, req.n);
                for (int i = 0; i < m; ++i) {
                    grid.coords.push_back((i + 0.5) / m);
                    grid.weights.push_back(1.0 / m);
                }
                grid.level = m;
                grid.tolerance = 64 * std::numeric_limits<double>::epsilon();
            }
            break;
        }
        case DomainKind::HalfLine: {
            std::vector<double> x, w;
            radial(R, x, w);
            grid.coords = x;
            grid.weights = w;
            grid.level = req.graded ? graded_levels(R) : req.n;
            grid.tolerance = req.graded ? req.min_distance : 64 * std::numeric_limits<double>::epsilon() * R;
            break;
        }
        case DomainKind::HalfSpace: {
            std::vector<double> x0, w0;
            radial(R, x0, w0);
            // transverse directions: composite Gauss panels of width req.panel*4 on [-R, R]
            const Rule& g = gauss_legendre(4);
            std::vector<double> y, wy;
            int m = std::max(1, static_cast<int>(std::ceil(2 * R / std::max(req.panel * 4, 1e-3))));
            double h = 2 * R / m;
            for (int i = 0; i < m; ++i)
                for (std::size_t k = 0; k < g.x.size(); ++k) {
                    y.push_back(-R + (i + 0.5) * h + 0.5 * h * g.x[k]);
                    wy.push_back(0.5 * h * g.w[k]);
                }
            std::vector<std::size_t> idx(domain.dim - 1, 0);
            for (std::size_t a = 0; a < x0.size(); ++a) {
                std::fill(idx.begin(), idx.end(), 0);
                while (true) {
                    double wt = w0[a];
                    grid.coords.push_back(x0[a]);
                    for (int k = 0; k < domain.dim - 1; ++k) {
                        grid.coords.push_back(y[idx[k]]);
                        wt *= wy[idx[k]];
                    }
                    grid.weights.push_back(wt);
                    int k = 0;
                    while (k < domain.dim - 1 && ++idx[k] == y.size()) idx[k++] = 0;
                    if (k == domain.dim - 1) break;
                }
            }
            grid.level = req.graded ? graded_levels(R) : req.n;
            grid.tolerance = req.graded ? req.min_distance * std::pow(2 * R, domain.dim - 1) : 0.0;
            break;
        }
        case DomainKind::UnitBall: {
            std::vector<double> rho, wr;
            radial(1.0, rho, wr);
            const int na = std::max(4, req.angular);
            if (domain.dim == 2) {
                for (std::size_t i = 0; i < rho.size(); ++i) {
                    double r = 1.0 - rho[i];
                    for (int k = 0; k < na; ++k) {
                        double a = 2 * kPi * k / na;
                        grid.coords.push_back(r * std::cos(a));
                        grid.coords.push_back(r * std::sin(a));
                        grid.weights.push_back(wr[i] * r * 2 * kPi / na);
                    }
                }
            } else if (domain.dim == 3) {
                const Rule& g = gauss_legendre(8);
                int pu = std::max(1, na / 16);
                for (std::size_t i = 0; i < rho.size(); ++i) {
                    double r = 1.0 - rho[i];
                    for (int q = 0; q < pu; ++q)
                        for (std::size_t j = 0; j < g.x.size(); ++j) {
                            double u = -1 + (q + 0.5) * 2.0 / pu + g.x[j] / pu;
                            double wu = g.w[j] / pu;
                            double s = std::sqrt(std::max(0.0, 1 - u * u));
                            for (int k = 0; k < na; ++k) {
                                double a = 2 * kPi * k / na;
                                grid.coords.push_back(r * s * std::cos(a));
                                grid.coords.push_back(r * s * std::sin(a));
                                grid.coords.push_back(r * u);
                                grid.weights.push_back(wr[i] * r * r * wu * 2 * kPi / na);
                            }
                        }
                }
            } else {
                throw UnsupportedError("interior grid for unit ball only in d = 2, 3");
            }
            grid.level = req.graded ? graded_levels(1.0) : req.n;
            grid.tolerance = req.graded ? req.min_distance * 2 * kPi * (domain.dim - 1) : 1.0 / req.n;
            break;
        }
        case DomainKind::GenericSigned: {
            std::vector<int> cells(domain.dim);
            std::vector<double> h(domain.dim);
            double vol = 1;
            for (int k = 0; k < domain.dim; ++k) {
                cells[k] = std::max(1, static_cast<int>(std::ceil(req.n * (domain.box_hi[k] - domain.box_lo[k]))));
                h[k] = (domain.box_hi[k] - domain.box_lo[k]) / cells[k];
                vol *= h[k];
            }
            std::vector<int> idx(domain.dim, 0);
            Point p(domain.dim);
            while (true) {
                for (int k = 0; k < domain.dim; ++k) p[k] = domain.box_lo[k] + (idx[k] + 0.5) * h[k];
                if (domain.signed_distance(p) > 0) {
                    grid.coords.insert(grid.coords.end(), p.begin(), p.end());
                    grid.weights.push_back(vol);
                }
                int k = 0;
                while (k < domain.dim && ++idx[k] == cells[k]) idx[k++] = 0;
                if (k == domain.dim) break;
            }
            grid.level = req.n;
            grid.tolerance = *std::max_element(h.begin(), h.end());
            break;
        }
    }
    return grid;
}

QuadratureGrid boundary_quadrature(const Domain& domain, int level, const BoundaryQuadratureOptions& opt) {
    QuadratureGrid g;
    g.dim = domain.dim;
    g.level = level;
    switch (domain.kind) {
        case DomainKind::Interval01:
            g.coords = {0.0, 1.0};
            g.weights = {1.0, 1.0};
            break;
        case DomainKind::HalfLine:
            g.coords = {0.0};
            g.weights = {1.0};
            break;
        case DomainKind::UnitBall: {
            if (level < 2) throw ParameterError("boundary level must be >= 2 on the sphere");
            const int n = 1 << level;
            if (domain.dim == 2) {
                for (int k = 0; k < n; ++k) {
                    double a = 2 * kPi * k / n;
                    g.coords.push_back(std::cos(a));
                    g.coords.push_back(std::sin(a));
                    g.weights.push_back(2 * kPi / n);
                }
            } else if (domain.dim == 3) {
                const Rule& r = gauss_legendre(4);
                int pu = std::max(1, n / 8);
                for (int q = 0; q < pu; ++q)
                    for (std::size_t j = 0; j < r.x.size(); ++j) {
                        double u = -1 + (q + 0.5) * 2.0 / pu + r.x[j] / pu;
                        double wu = r.w[j] / pu;
                        double s = std::sqrt(std::max(0.0, 1 - u * u));
                        for (int k = 0; k < n; ++k) {
                            double a = 2 * kPi * k / n;
                            g.coords.push_back(s * std::cos(a));
                            g.coords.push_back(s * std::sin(a));
                            g.coords.push_back(u);
                            g.weights.push_back(wu * 2 * kPi / n);
                        }
                    }
            } else {
                throw UnsupportedError("sphere quadrature only for d = 2, 3");
            }
            break;
        }
        case DomainKind::HalfSpace: {
            const double R = opt.half_width > 0 ? opt.half_width : gaussian_cutoff(opt.c, opt.t_max);
            const Rule& r = gauss_legendre(4);
            const int n = 1 << level;
            std::vector<double> y, wy;
            for (int i = 0; i < n; ++i)
                for (std::size_t k = 0; k < r.x.size(); ++k) {
                    y.push_back(-R + (i + 0.5) * 2 * R / n + r.x[k] * R / n);
                    wy.push_back(r.w[k] * R / n);
                }
            const int m = domain.dim - 1;
            if (m == 0) {
                g.coords = {0.0};
                g.weights = {1.0};
                break;
            }
            std::vector<std::size_t> idx(m, 0);
            while (true) {
                double wt = 1;
                g.coords.push_back(0.0);
                for (int k = 0; k < m; ++k) {
                    g.coords.push_back(y[idx[k]]);
                    wt *= wy[idx[k]];
                }
                g.weights.push_back(wt);
                int k = 0;
                while (k < m && ++idx[k] == y.size()) idx[k++] = 0;
                if (k == m) break;
            }
            // mass outside [-R, R] of a unit Gaussian factor with variance c t_max
            g.tolerance = std::erfc(R / std::sqrt(2 * opt.c * opt.t_max));
            break;
        }
        case DomainKind::GenericSigned:
            if (domain.patches.empty()) throw UnsupportedError("generic domain has no boundary patches");
            for (const auto& p : domain.patches)
                for (std::size_t i = 0; i < p.nodes.size(); ++i) {
                    g.coords.insert(g.coords.end(), p.nodes[i].begin(), p.nodes[i].end());
                    g.weights.push_back(p.weights[i]);
                }
            break;
    }
    return g;
}

void write_grid(std::ostream& os, const QuadratureGrid& grid) {
    char buf[64];
    os << "# grid dim=" << grid.dim << " level=" << grid.level;
    std::snprintf(buf, sizeof buf, "%.17g", grid.tolerance);
    os << " tolerance=" << buf << " nodes=" << grid.size() << "\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (int k = 0; k < grid.dim; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g ", grid.coords[i * grid.dim + k]);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g", grid.weights[i]);
        os << buf << "\n";
    }
}

QuadratureGrid read_grid(std::istream& is) {
    QuadratureGrid g;
    std::string line;
    bool header = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string tok;
            while (hs >> tok) {
                auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
                if (k == "dim") g.dim = std::stoi(v);
                else if (k == "level") g.level = std::stoi(v);
                else if (k == "tolerance") g.tolerance = std::stod(v);
            }
            header = true;
            continue;
        }
        if (!header) throw ParameterError("grid file lacks header");
        std::istringstream ls(line);
        double v;
        std::vector<double> row;
        while (ls >> v) row.push_back(v);
        if (static_cast<int>(row.size()) != g.dim + 1) throw ParameterError("bad grid row: " + line);
        g.coords.insert(g.coords.end(), row.begin(), row.end() - 1);
        g.weights.push_back(row.back());
    }
    return g;
}

}  // namespace bwn
