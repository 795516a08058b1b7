#include "bwn/convolution.hpp"

#include "bwn/errors.hpp"
#include "bwn/numerics.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

namespace bwn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sq(double x) { return x * x; }

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

double sphere_area(int m) { return 2 * std::pow(kPi, 0.5 * m) / std::tgamma(0.5 * m); }

bool one_dimensional(const Domain& d) { return d.kind == DomainKind::Interval01 || d.kind == DomainKind::HalfLine; }

// e^{-b} I_k(b)
double scaled_bessel_i(int k, double b) {
    if (b < 600) return boost::math::cyl_bessel_i(k, b) * std::exp(-b);
    const double mu = 4.0 * k * k;
    if (b > 1e4 * (k * k + 1))
        return (1 - (mu - 1) / (8 * b) + (mu - 1) * (mu - 9) / (2 * sq(8 * b))) / std::sqrt(2 * kPi * b);
    // (1/pi) int_0^pi e^{-b(1 - cos phi)} cos(k phi) dphi, negligible beyond 12/sqrt(b)
    const Rule& r = gauss_legendre(20);
    const double top = std::min(kPi, 12 / std::sqrt(b));
    double s = 0;
    for (int panel = 0; panel < 2; ++panel) {
        double a = panel * top / 2, h = top / 4;
        for (std::size_t q = 0; q < r.x.size(); ++q) {
            double phi = a + h * (r.x[q] + 1);
            s += h * r.w[q] * std::exp(-b * (1 - std::cos(phi))) * std::cos(k * phi);
        }
    }
    return s / kPi;
}

// Phi(t) = int e^{-2t|z|^2} mu(dz) in the covariance convention of rkhs_basis
class TangentialFactor {
public:
    explicit TangentialFactor(const BoundaryNoiseSpec& spec) : mu_(spec.measure) {
        if (mu_.kind == SpectralKind::Lebesgue) return;
        if (mu_.kind == SpectralKind::Finite && !mu_.radial_density) return;
        for (int i = -180; i <= 32; ++i) {
            double t = std::pow(10.0, i / 4.0);
            logt_.push_back(std::log(t));
            logv_.push_back(std::log(density_integral(t)));
        }
    }

    double operator()(double t) const {
        const int m = mu_.m;
        if (mu_.kind == SpectralKind::Lebesgue) return std::pow(8 * kPi * t, -0.5 * m);
        if (mu_.kind == SpectralKind::Finite && !mu_.radial_density) {
            double s = 0;
            for (std::size_t j = 0; j < mu_.atoms.size(); ++j) {
                double z2 = 0;
                for (double z : mu_.atoms[j]) z2 += z * z;
                s += mu_.masses[j] * std::exp(-2 * t * z2);
            }
            return s;
        }
        double u = std::log(t);
        auto it = std::upper_bound(logt_.begin(), logt_.end(), u);
        std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - logt_.begin()), 1, logt_.size() - 1);
        double f = (u - logt_[i - 1]) / (logt_[i] - logt_[i - 1]);
        return std::exp(logv_[i - 1] + f * (logv_[i] - logv_[i - 1]));
    }

private:
    double density_integral(double t) const {
        const int m = mu_.m;
        auto f = [&](double r) {
            Point z(m, 0.0);
            z[0] = r;
            return mu_.density(z);
        };
        double lo = 1e-8, hi = 7 / std::sqrt(t);
        double head = f(0) * std::pow(lo, m) / m;
        double body = integrate([&](double u) {
            double r = std::exp(u);
            return std::pow(r, m) * std::exp(-2 * t * r * r) * f(r);
        }, std::log(lo), std::log(hi), 1e-12, 15);
        return sphere_area(m) * (head + body);
    }

    SpectralMeasure mu_;
    std::vector<double> logt_, logv_;
};

// exact psi_k on Interval01, HalfLine and HalfSpace
class ModeModel {
public:
    explicit ModeModel(const ConvolutionSetup& s) : kind_(s.domain.kind) {
        if (s.mode != KernelMode::Exact) throw ConfigError("per-mode values need exact kernel mode");
        basis_ = rkhs_basis(s.noise);
        if (one_dimensional(s.domain)) {
            for (const auto& e : basis_.e) {
                c0_.push_back(e(Point{0.0}));
                c1_.push_back(kind_ == DomainKind::Interval01 ? e(Point{1.0}) : 0.0);
            }
        } else if (kind_ == DomainKind::HalfSpace) {
            m_ = s.domain.dim - 1;
        } else {
            throw UnsupportedError("no exact boundary propagator on " + s.domain.name());
        }
    }

    std::size_t size() const { return basis_.size(); }

    void values(double t, const Point& x, double* out) const {
        if (kind_ == DomainKind::Interval01) {
            // the image series loses relative accuracy to cancellation once t is large
            auto flux = t > 0.1 ? k1d::interval_flux0_sine : k1d::interval_flux0;
            double f0 = flux(t, x[0]), f1 = flux(t, 1 - x[0]);
            for (std::size_t k = 0; k < c0_.size(); ++k) out[k] = c0_[k] * f0 + c1_[k] * f1;
            return;
        }
        if (kind_ == DomainKind::HalfLine) {
            double f0 = k1d::half_line_flux(t, x[0]);
            for (std::size_t k = 0; k < c0_.size(); ++k) out[k] = c0_[k] * f0;
            return;
        }
        double flux = k1d::half_line_flux(t, x[0]);
        const double s2 = 2 * std::sqrt(t);
        if (!basis_.cell_lo.empty()) {
            for (std::size_t k = 0; k < basis_.size(); ++k) {
                const Point& lo = basis_.cell_lo[k];
                const Point& hi = basis_.cell_hi[k];
                double v = 1;
                for (int i = 0; i < m_; ++i) {
                    double xi = x[i + 1];
                    double mass = xi > hi[i] ? 0.5 * (std::erfc((xi - hi[i]) / s2) - std::erfc((xi - lo[i]) / s2))
                                             : 0.5 * (std::erfc((lo[i] - xi) / s2) - std::erfc((hi[i] - xi) / s2));
                    v *= mass / std::sqrt(hi[i] - lo[i]);
                }
                out[k] = flux * v;
            }
            return;
        }
        for (std::size_t k = 0; k < basis_.size(); ++k) {
            const Point& z = basis_.freq[k];
            double z2 = 0, zx = 0;
            for (int i = 0; i < m_; ++i) { z2 += z[i] * z[i]; zx += z[i] * x[i + 1]; }
            double osc = basis_.odd[k] ? std::sin(zx) : std::cos(zx);
            out[k] = flux * basis_.amp[k] * std::exp(-t * z2) * osc;
        }
    }

    double energy(double t, const Point& x) const {
        buf_.resize(size());
        values(t, x, buf_.data());
        double s = 0;
        for (double v : buf_) s += v * v;
        return s;
    }

    // quadratic form of the endpoint coefficients (1-d domains)
    void end_form(double& a00, double& a01, double& a11) const {
        a00 = a01 = a11 = 0;
        for (std::size_t k = 0; k < c0_.size(); ++k) {
            a00 += c0_[k] * c0_[k];
            a01 += c0_[k] * c1_[k];
            a11 += c1_[k] * c1_[k];
        }
    }

private:
    DomainKind kind_;
    int m_ = 0;
    NoiseBasis basis_;
    std::vector<double> c0_, c1_;
    mutable std::vector<double> buf_;
};

double rho_of(const Domain& d, const Point& x) { return distance_to_boundary(d, x); }

// int_1^T t^{-alpha} sum_k psi_k^2 dt on Interval01 through the sine series
double interval_tail(double a00, double a01, double a11, double x, double alpha, double T) {
    if (T <= 1) return 0;
    double s = 0;
    for (int j = 1; j <= 8; ++j)
        for (int k = 1; k <= 8; ++k) {
            double sj = std::sin(j * kPi * x), sk = std::sin(k * kPi * x);
            double pj = (j % 2 ? 1.0 : -1.0), pk = (k % 2 ? 1.0 : -1.0);
            double form = a00 + a01 * (pj + pk) + a11 * pj * pk;
            if (form == 0) continue;
            double beta = (j * j + k * k) * kPi * kPi;
            double upper = std::isinf(T) ? 0.0 : boost::math::tgamma(1 - alpha, beta * T);
            double time = std::pow(beta, alpha - 1) * (boost::math::tgamma(1 - alpha, beta) - upper);
            s += 4 * kPi * kPi * j * k * sj * sk * form * time;
        }
    return s;
}

// int_0^T t^{-alpha} (x/t)^2 g_{2t}(x)^2 t^{-gamma} dt
double flux_time_integral(double x, double alpha, double gamma, double T) {
    double a = 0.5 * x * x;
    double order = 2 + alpha + gamma;
    double g = std::isinf(T) ? boost::math::tgamma(order) : boost::math::tgamma(order, a / T);
    return x * x / (4 * kPi) * std::pow(a, -order) * g;
}

// the integrand of J reduced to the distance variable
class JIntegrand {
public:
    JIntegrand(const ConvolutionSetup& s) : s_(s) {
        const auto& d = s.domain;
        if (one_dimensional(d) || d.kind == DomainKind::HalfSpace) {
            model_ = std::make_unique<ModeModel>(s);
            if (one_dimensional(d)) model_->end_form(a00_, a01_, a11_);
            if (d.kind == DomainKind::HalfSpace) {
                phi_ = std::make_unique<TangentialFactor>(s.noise);
                m_ = d.dim - 1;
            }
        }
    }

    double top() const { return s_.domain.kind == DomainKind::Interval01 ? 0.5 : 1.0; }
    bool unbounded() const { return !s_.domain.bounded(); }
    // normal distance where rho^theta meets (1 + rho^2)^-delta on the normal axis; 0 if none
    double kink() const {
        const auto& P = s_.params;
        if (!unbounded() || P.delta <= 0 || P.theta <= 0) return 0;
        auto f = [&](double r) { return P.theta * std::log(r) + P.delta * std::log1p(r * r); };
        boost::math::tools::eps_tolerance<double> tol(50);
        std::uintmax_t it = 200;
        auto [a, b] = boost::math::tools::bisect(f, 1e-12, 1.0, tol, it);
        return 0.5 * (a + b);
    }
    bool closed_form_time() const {
        const auto& d = s_.domain;
        return d.kind == DomainKind::HalfLine ||
               (d.kind == DomainKind::HalfSpace && s_.noise.measure.kind == SpectralKind::Lebesgue);
    }

    // contribution density at boundary distance rho
    double operator()(double rho, double tol) const {
        const auto& P = s_.params;
        switch (s_.domain.kind) {
            case DomainKind::Interval01: {
                // near end at distance rho from 0; the end near 1 by reflection (1 - rho rounds to 1)
                double v = 0;
                for (bool mirror : {false, true}) {
                    double F = time_integral(rho, rho, tol, mirror);
                    double x = mirror ? 1 - rho : rho;
                    if (F > 0) v += std::pow(F, 0.5 * P.p) * weight_rho(rho, x * x, P);
                    if (rho == 0.5) break;
                }
                return v;
            }
            case DomainKind::HalfLine: {
                double F = time_integral(rho, rho, tol);
                return F > 0 ? std::pow(F, 0.5 * P.p) * weight_rho(rho, rho * rho, P) : 0.0;
            }
            case DomainKind::HalfSpace: {
                double F = time_integral(rho, rho, tol);
                return F > 0 ? std::pow(F, 0.5 * P.p) * tangential_weight(rho) : 0.0;
            }
            case DomainKind::UnitBall: {
                double r = 1 - rho;
                double F = time_integral(r, rho, tol);
                return F > 0 ? std::pow(F, 0.5 * P.p) * weight_rho(rho, r * r, P) * 2 * kPi * r : 0.0;
            }
            default: throw UnsupportedError("J on " + s_.domain.name());
        }
    }

    // int_0^T t^{-alpha} sum_k psi_k^2(t, x) dt, x = coordinate along the normal ray
    double time_integral(double x, double rho, double tol, bool mirror = false) const {
        const auto& d = s_.domain;
        if (d.kind == DomainKind::HalfLine) return a00_ * flux_time_integral(x, s_.alpha, 0, s_.T);
        if (d.kind == DomainKind::HalfSpace && s_.noise.measure.kind == SpectralKind::Lebesgue)
            return flux_time_integral(x, s_.alpha, 0.5 * m_, s_.T);
        double c_eff = s_.mode == KernelMode::Exact ? 2.0 : s_.c;
        double t_lo = rho * rho / (80 * c_eff);
        double t_hi = d.kind == DomainKind::Interval01 ? std::min(s_.T, 1.0) : s_.T;
        double v = 0;
        if (t_lo < t_hi)
            v = integrate([&](double u) {
                double t = std::exp(u);
                return std::pow(t, 1 - s_.alpha) * energy(t, x, rho, mirror);
            }, std::log(t_lo), std::log(t_hi), tol, 18);
        if (d.kind == DomainKind::Interval01)
            v += mirror ? interval_tail(a11_, a01_, a00_, x, s_.alpha, s_.T) : interval_tail(a00_, a01_, a11_, x, s_.alpha, s_.T);
        return v;
    }

    double energy(double t, double x, double rho, bool mirror) const {
        switch (s_.domain.kind) {
            case DomainKind::Interval01: {
                auto flux = t > 0.1 ? k1d::interval_flux0_sine : k1d::interval_flux0;
                double fn = flux(t, x), ff = flux(t, 1 - x);
                double a = mirror ? a11_ : a00_, c = mirror ? a00_ : a11_;
                return a * fn * fn + 2 * a01_ * fn * ff + c * ff * ff;
            }
            case DomainKind::HalfLine: return model_->energy(t, Point{x});
            case DomainKind::HalfSpace: return sq(k1d::half_line_flux(t, x)) * (*phi_)(t);
            case DomainKind::UnitBall: return ball_energy(t, x, rho);
            default: return 0;
        }
    }

    // majorant (C/sqrt t) |int g_{ct}(x - y) e_k(y) ds| squared and summed, |x| = r
    double ball_energy(double t, double r, double rho) const {
        const double C = s_.C, c = s_.c, ct = c * t;
        if (s_.noise.kind == NoiseKind::CircleWhiteNoise)
            return C * C / t * std::pow(2 * kPi * ct, -2) * std::exp(-rho * rho / ct) * 2 * kPi *
                   scaled_bessel_i(0, 2 * r / ct);
        const int K = s_.noise.truncation / 2;
        const double b = r / ct;
        double s = 0;
        for (int k = 1; k <= K; ++k) s += std::pow(k, -2 * s_.noise.harmonic_decay) * sq(scaled_bessel_i(k, b));
        return C * C / t * std::pow(ct, -2) * std::exp(-rho * rho / ct) * s;
    }

    // int_{R^m} min(x0^theta, (1 + x0^2 + |x'|^2)^{-delta}) dx'
    double tangential_weight(double x0) const {
        const auto& P = s_.params;
        const int m = m_;
        double a = std::pow(x0, P.theta), b = 1 + x0 * x0;
        double r2 = std::pow(a, -1 / P.delta) - b;
        double rs = r2 > 0 ? std::sqrt(r2) : 0.0;
        double inner = a * std::pow(rs, m) / m;
        double v = 1 / (1 + rs * rs / b);
        double tail = std::pow(b, 0.5 * m - P.delta) * 0.5 * boost::math::beta(P.delta - 0.5 * m, 0.5 * m, v);
        return sphere_area(m) * (inner + tail);
    }

private:
    const ConvolutionSetup& s_;
    std::unique_ptr<ModeModel> model_;
    std::unique_ptr<TangentialFactor> phi_;
    double a00_ = 0, a01_ = 0, a11_ = 0;
    int m_ = 0;
};

struct Panel {
    double lo, hi;
};

// ratio-2 panels below the top, split at every level distance
std::vector<Panel> inner_panels(double top, const std::vector<double>& eps) {
    std::vector<double> edges{top};
    double floor_eps = *std::min_element(eps.begin(), eps.end());
    for (double e = top / 2; e > floor_eps; e /= 2) edges.push_back(e);
    for (double e : eps) edges.push_back(e);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12 * b; }),
                edges.end());
    std::vector<Panel> out;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) out.push_back({edges[i], edges[i + 1]});
    return out;
}

double panel_sum(const JIntegrand& H, const Panel& p, int n, double tol) {
    const Rule& r = gauss_legendre(n);
    double h = 0.5 * (p.hi - p.lo), s = 0;
    for (std::size_t q = 0; q < r.x.size(); ++q) s += r.w[q] * H(p.lo + h * (r.x[q] + 1), tol);
    return h * s;
}

struct LevelValues {
    std::vector<double> J;
};

LevelValues j_levels(const ConvolutionSetup& s, const std::vector<double>& eps, int n, double tol) {
    JIntegrand H(s);
    auto panels = inner_panels(H.top(), eps);
    if (double k = H.kink(); k > 0)
        for (std::size_t i = 0; i < panels.size(); ++i)
            if (k > panels[i].lo * (1 + 1e-9) && k < panels[i].hi * (1 - 1e-9)) {
                panels.insert(panels.begin() + static_cast<std::ptrdiff_t>(i) + 1, {k, panels[i].hi});
                panels[i].hi = k;
                break;
            }
    std::vector<double> contrib;
    for (const auto& p : panels) contrib.push_back(panel_sum(H, p, n, tol));
    double outer = 0;
    if (H.unbounded()) {
        int quiet = 0;
        for (double a = 1; a < 1e12 && quiet < 4; a *= 2) {
            double v = panel_sum(H, {a, 2 * a}, n, tol);
            outer += v;
            quiet = v <= 1e-15 * outer ? quiet + 1 : 0;
        }
    }
    LevelValues lv;
    for (double e : eps) {
        double J = outer;
        for (std::size_t i = 0; i < panels.size(); ++i)
            if (panels[i].lo >= e * (1 - 1e-12)) J += contrib[i];
        lv.J.push_back(J);
    }
    return lv;
}

double rel_change(double a, double b) {
    double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0 ? 0.0 : std::abs(a - b) / scale;
}

Verdict extension_verdict(const ConvolutionSetup& s) {
    Domain d = s.domain.kind == DomainKind::Interval01 ? Domain::interval01() : Domain::half_line();
    auto tr = extension_bound(KernelHandle::image(d), s.params, {1e-3, 1e-2, 0.1, 1.0}, random_smooth_samples(d, 5, 1), 3);
    return tr.verdict;
}

bool noise_is_zero(const ConvolutionSetup& s) {
    if (s.noise.kind == NoiseKind::FiniteSeries && s.noise.functions.empty()) return true;
    if (s.noise.kind == NoiseKind::EndpointAtoms && s.noise.atoms.empty()) return true;
    return false;
}

}  // namespace

std::string to_string(JVerdict v) {
    switch (v) {
        case JVerdict::Finite: return "finite";
        case JVerdict::Divergent: return "divergent";
        case JVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

void validate(const ConvolutionSetup& s) {
    const auto& d = s.domain;
    const auto& n = s.noise;
    if (!(s.params.p > 1)) throw ParameterError("p must exceed 1");
    if (s.params.theta < 0 || s.params.delta < 0) throw ParameterError("theta and delta must be nonnegative");
    if (!(s.alpha >= 0 && s.alpha < 1)) throw ParameterError("alpha must lie in [0, 1)");
    if (!(s.T > 0)) throw ParameterError("horizon T must be positive");
    if (!(s.C > 0 && s.c > 0)) throw ParameterError("majorant constants must be positive");
    if (d.kind == DomainKind::GenericSigned) throw UnsupportedError("no J or simulation on generic domains");
    if (d.kind == DomainKind::UnitBall && s.mode == KernelMode::Exact)
        throw ConfigError("UnitBall has no exact kernel; majorant mode is mandatory");
    if (d.kind != DomainKind::UnitBall && s.mode == KernelMode::Majorant)
        throw ConfigError("exact kernel mode is mandatory on " + d.name());
    switch (d.kind) {
        case DomainKind::Interval01:
        case DomainKind::HalfLine:
            if (n.kind == NoiseKind::EndpointAtoms)
                for (const auto& a : n.atoms) {
                    bool ok = a.size() == 1 && (a[0] == 0 || (d.kind == DomainKind::Interval01 && a[0] == 1));
                    if (!ok) throw ConfigError("boundary atom not on the boundary of " + d.name());
                }
            else if (n.kind != NoiseKind::FiniteSeries)
                throw ConfigError(n.name() + " noise does not live on the boundary of " + d.name());
            break;
        case DomainKind::HalfSpace:
            if (n.kind != NoiseKind::SpatiallyHomogeneous)
                throw UnsupportedError("half-space noise must be spatially homogeneous");
            if (n.measure.m != d.dim - 1) throw ConfigError("spectral measure dimension must be d - 1");
            break;
        case DomainKind::UnitBall:
            if (d.dim != 2) throw UnsupportedError("J on the ball is implemented for d = 2");
            if (n.kind == NoiseKind::EndpointAtoms) throw UnsupportedError("Dirac boundary noise is not treatable");
            if (n.kind == NoiseKind::FiniteSeries && !(n.harmonic_decay > 0) && !n.functions.empty())
                throw UnsupportedError("ball noise must be circle white noise or circle harmonics");
            if (n.kind == NoiseKind::SpatiallyHomogeneous) throw ConfigError("homogeneous noise needs a half-space");
            break;
        default: break;
    }
    if (std::isinf(s.T) && !one_dimensional(d) &&
        !(d.kind == DomainKind::HalfSpace && n.measure.kind == SpectralKind::Lebesgue))
        throw UnsupportedError("T = +inf needs Interval01, HalfLine or space-time white noise");
}

double mode_energy(const ConvolutionSetup& s, double t, const Point& x) {
    validate(s);
    if (noise_is_zero(s)) return 0;
    return ModeModel(s).energy(t, x);
}

void mode_values(const ConvolutionSetup& s, double t, const Point& x, std::vector<double>& out) {
    validate(s);
    ModeModel mm(s);
    out.assign(mm.size(), 0.0);
    if (!out.empty()) mm.values(t, x, out.data());
}

const std::vector<CatalogEntry>& scenario_catalog() {
    static const std::vector<CatalogEntry> cat{
        {"P71", "P71: interval (0,1), endpoint noise, θ∈(p−1, 2p−1)"},
        {"P72", "P72: half-line, endpoint noise, δ>1/2, θ∈(p−1, 2p−1)"},
        {"P74", "P74: unit ball, Σ sup e_k² < ∞, θ∈(p−1, 2p−1)"},
        {"P78", "P78: white noise on S¹, θ∈(3p/2−1, 2p−1)"},
        {"P711(i)", "P711(i): bounded C^{1,α} region, Σ sup e_k² < ∞, θ∈(p−1, 2p−1)"},
        {"P711(ii)", "P711(ii): bounded planar C^{1,α} region, boundary white noise, θ∈(3p/2−1, 2p−1)"},
        {"P713", "P713: half-space, finite spectral measure, δ>(m+1)/2, θ∈(p−1, 2p−1)"},
        {"P717", "P717: half-plane, space-time white noise (m=1), δ>1, θ∈(3p/2−1, 2p−1)"},
        {"P718(i)", "P718(i): half-space, Bessel potential κ=m, θ∈(p−1, 2p−1)"},
        {"P718(ii)", "P718(ii): half-space, Bessel potential m−2<κ<m, θ∈(p+p(m−κ)/2−1, 2p−1)"},
        {"R88", "R88: rejected — Dirac boundary noise not treatable"},
    };
    return cat;
}

Prediction predict_wellposedness(const ConvolutionSetup& s) {
    Prediction pr;
    const double p = s.params.p;
    const auto& d = s.domain;
    const auto& n = s.noise;
    auto set = [&](const std::string& id, double lo, double delta_min) {
        pr.catalogued = true;
        pr.id = id;
        pr.theta_lo = lo;
        pr.theta_hi = 2 * p - 1;
        pr.delta_min = delta_min;
        for (const auto& e : scenario_catalog())
            if (e.id == id) pr.description = e.text;
    };
    bool series = n.kind == NoiseKind::FiniteSeries || n.kind == NoiseKind::EndpointAtoms;
    if (d.kind == DomainKind::Interval01 && series) set("P71", p - 1, 0);
    else if (d.kind == DomainKind::HalfLine && series) set("P72", p - 1, 0.5);
    else if (d.kind == DomainKind::UnitBall && d.dim == 2 && n.kind == NoiseKind::EndpointAtoms) {
        set("R88", 2 * p - 1, 0);
        pr.rejected = true;
    } else if (d.kind == DomainKind::UnitBall && n.kind == NoiseKind::FiniteSeries) set("P74", p - 1, 0);
    else if (d.kind == DomainKind::UnitBall && d.dim == 2 && n.kind == NoiseKind::CircleWhiteNoise) set("P78", 1.5 * p - 1, 0);
    else if (d.kind == DomainKind::GenericSigned && series) set("P711(i)", p - 1, 0);
    else if (d.kind == DomainKind::GenericSigned && d.dim == 2 && n.kind == NoiseKind::CircleWhiteNoise)
        set("P711(ii)", 1.5 * p - 1, 0);
    else if (d.kind == DomainKind::HalfSpace && n.kind == NoiseKind::SpatiallyHomogeneous) {
        const auto& mu = n.measure;
        const int m = mu.m;
        if (mu.kind == SpectralKind::Finite) set("P713", p - 1, 0.5 * (m + 1));
        else if (mu.kind == SpectralKind::Lebesgue && m == 1) set("P717", 1.5 * p - 1, 1);
        else if (mu.kind == SpectralKind::Bessel && mu.kappa > m) set("P713", p - 1, 0.5 * (m + 1));
        else if (mu.kind == SpectralKind::Bessel && mu.kappa == m) set("P718(i)", p - 1, 0);
        else if (mu.kind == SpectralKind::Bessel && mu.kappa > m - 2 && mu.kappa < m)
            set("P718(ii)", p + 0.5 * p * (m - mu.kappa) - 1, 0);
    }
    if (!pr.catalogued) {
        pr.id = "no prediction";
        pr.description = "no prediction: setup is not a catalogued scenario";
        return pr;
    }
    if (pr.rejected) return pr;
    const double th = s.params.theta;
    if (th > pr.theta_lo && th < pr.theta_hi)
        pr.expected = pr.delta_min == 0 || s.params.delta > pr.delta_min ? JVerdict::Finite : JVerdict::Inconclusive;
    else if (th < pr.theta_lo || th > pr.theta_hi)
        pr.expected = JVerdict::Divergent;
    return pr;
}

JReport j_integral(const ConvolutionSetup& s, const JOptions& opt) {
    validate(s);
    JReport r;
    r.prediction = predict_wellposedness(s);
    for (int L = 0; L < opt.levels; ++L) r.distance.push_back(std::pow(10.0, -2 - 4 * L));
    auto finish = [&] {
        r.agreement = r.prediction.expected != JVerdict::Inconclusive && r.verdict == r.prediction.expected;
        if (!r.prediction.catalogued) r.notes.push_back("no prediction for this setup");
        return r;
    };
    if (noise_is_zero(s)) {
        r.value.assign(r.distance.size(), 0.0);
        r.j_verdict = JVerdict::Finite;
        r.extension = opt.extension ? extension_verdict(s) : Verdict::Bounded;
        r.verdict = r.extension == Verdict::Diverging ? JVerdict::Divergent
                    : r.extension == Verdict::Bounded ? JVerdict::Finite : JVerdict::Inconclusive;
        r.notes.push_back("zero noise");
        return finish();
    }
    if (s.domain.kind == DomainKind::HalfSpace && !(2 * s.params.delta > s.domain.dim - 1)) {
        r.value.assign(r.distance.size(), kInf);
        r.j_verdict = r.verdict = JVerdict::Divergent;
        r.notes.push_back("weight not integrable along the boundary: 2 delta <= m");
        return finish();
    }
    r.value = j_levels(s, r.distance, opt.gauss, opt.time_tol_fine).J;
    JIntegrand probe(s);
    if (probe.closed_form_time()) {
        r.coarse_time_value = r.value.back();
        r.notes.push_back("time integral in closed form");
    } else {
        r.coarse_time_value = j_levels(s, {r.distance.back()}, opt.gauss, opt.time_tol_coarse).J.back();
    }
    if (s.noise.kind == NoiseKind::FiniteSeries && s.noise.harmonic_decay > 0) {
        int K = s.noise.truncation / 2;
        ConvolutionSetup s2 = s;
        s2.noise = BoundaryNoiseSpec::circle_harmonics(2 * K, s.noise.harmonic_decay);
        r.modes = {K, 2 * K};
        r.mode_value = {r.value.back(), j_levels(s2, {r.distance.back()}, opt.gauss, opt.time_tol_fine).J.back()};
        r.mode_change = rel_change(r.mode_value[0], r.mode_value[1]);
    } else {
        r.notes.push_back("mode sum exact (fixed modes or closed form)");
    }
    const auto& v = r.value;
    std::size_t n = v.size();
    r.space_change = n > 1 ? rel_change(v[n - 1], v[n - 2]) : 0.0;
    r.time_change = rel_change(r.coarse_time_value, v.back());
    bool monotone = std::is_sorted(v.begin(), v.end());
    if (!std::isfinite(v.back()) || (n > 1 && monotone && v[n - 1] > 2 * v[n - 2]))
        r.j_verdict = JVerdict::Divergent;
    else if (r.space_change < 0.01 && r.time_change < 0.01 && r.mode_change < 0.01)
        r.j_verdict = JVerdict::Finite;
    r.extension = opt.extension ? extension_verdict(s) : Verdict::Bounded;
    if (!opt.extension) r.notes.push_back("extension check skipped");
    if (r.j_verdict == JVerdict::Divergent || r.extension == Verdict::Diverging) r.verdict = JVerdict::Divergent;
    else if (r.j_verdict == JVerdict::Finite && r.extension == Verdict::Bounded) r.verdict = JVerdict::Finite;
    return finish();
}

void write_report(std::ostream& os, const JReport& r) {
    os << "# J report\n";
    os << "prediction " << r.prediction.id << "\n";
    if (r.prediction.catalogued && !r.prediction.rejected)
        os << "predicted_theta " << fmt(r.prediction.theta_lo) << " " << fmt(r.prediction.theta_hi)
           << " delta_min " << fmt(r.prediction.delta_min) << " expected " << to_string(r.prediction.expected) << "\n";
    os << "# distance J\n";
    os << std::setprecision(12);
    for (std::size_t i = 0; i < r.value.size(); ++i) os << r.distance[i] << " " << r.value[i] << "\n";
    os << "coarse_time " << r.coarse_time_value << "\n";
    for (std::size_t i = 0; i < r.modes.size(); ++i) os << "modes " << r.modes[i] << " " << r.mode_value[i] << "\n";
    os << "space_change " << r.space_change << "\ntime_change " << r.time_change << "\nmode_change " << r.mode_change
       << "\n";
    os << "j_verdict " << to_string(r.j_verdict) << "\nextension " << to_string(r.extension) << "\nverdict "
       << to_string(r.verdict) << "\nagreement " << (r.agreement ? "true" : "false") << "\n";
    for (const auto& n : r.notes) os << "note " << n << "\n";
}

double variance_at(const ConvolutionSetup& s, double t, const Point& x) {
    validate(s);
    if (noise_is_zero(s)) return 0;
    if (s.mode != KernelMode::Exact) throw ConfigError("variance field needs exact kernel mode");
    double rho = rho_of(s.domain, x);
    if (rho <= 0) throw ParameterError("variance on the boundary is infinite");
    ModeModel mm(s);
    if (s.domain.kind == DomainKind::HalfLine) {
        double a00, a01, a11;
        mm.end_form(a00, a01, a11);
        return a00 * flux_time_integral(x[0], 0, 0, t);
    }
    double s_lo = rho * rho / 160;
    if (s_lo >= t) return 0;
    return integrate([&](double u) {
        double tau = std::exp(u);
        return tau * mm.energy(tau, x);
    }, std::log(s_lo), std::log(t), 1e-11, 18);
}

Field variance_field(const ConvolutionSetup& s, double t, const QuadratureGrid& grid) {
    Field f;
    f.domain = s.domain;
    f.grid = grid;
    f.time = t;
    for (std::size_t i = 0; i < grid.size(); ++i) f.values.push_back(variance_at(s, t, grid.node(i)));
    return f;
}

namespace {

std::vector<double> noise_grid(const std::vector<double>& times, double rho_min, const SimulationOptions& opt) {
    double tmax = *std::max_element(times.begin(), times.end());
    std::vector<double> nodes{0.0, tmax};
    if (opt.uniform_step > 0) {
        int n = static_cast<int>(std::ceil(tmax / opt.uniform_step - 1e-9));
        for (int k = 1; k < n; ++k) nodes.push_back(k * opt.uniform_step);
        for (double t : times) nodes.push_back(t);
    } else {
        int n = static_cast<int>(std::ceil(tmax / opt.max_step - 1e-9));
        for (int k = 1; k < n; ++k) nodes.push_back(k * tmax / n);
        double tau_lo = rho_min * rho_min / 160;
        for (double t : times) {
            nodes.push_back(t);
            for (double tau = tau_lo; tau < t; tau *= opt.ratio) nodes.push_back(t - tau);
        }
    }
    std::sort(nodes.begin(), nodes.end());
    const double eps = 8 * std::numeric_limits<double>::epsilon() * tmax;
    nodes.erase(std::unique(nodes.begin(), nodes.end(), [&](double a, double b) { return b - a <= eps; }), nodes.end());
    return nodes;
}

struct Plan {
    std::vector<double> grid;
    std::size_t modes = 0;
    Eigen::MatrixXd A;  // rows: probes, columns: step * modes + k, scaled by sqrt(step)
};

Plan build_plan(const ConvolutionSetup& s, const SimulationOptions& opt) {
    if (opt.times.empty() || opt.points.empty()) throw ParameterError("simulation needs probe times and points");
    for (double t : opt.times)
        if (!(t > 0)) throw ParameterError("probe times must be positive");
    double rho_min = kInf;
    for (const auto& x : opt.points) {
        double r = rho_of(s.domain, x);
        if (!(r > 0)) throw ParameterError("probe point on the boundary");
        rho_min = std::min(rho_min, r);
    }
    Plan plan;
    plan.grid = noise_grid(opt.times, rho_min, opt);
    const std::size_t nt = opt.times.size(), nx = opt.points.size(), steps = plan.grid.size() - 1;
    if (noise_is_zero(s)) {
        plan.A = Eigen::MatrixXd::Zero(nt * nx, 0);
        return plan;
    }
    ModeModel mm(s);
    const std::size_t K = mm.size();
    plan.modes = K;
    plan.A = Eigen::MatrixXd::Zero(nt * nx, steps * K);
    const Rule& r = gauss_legendre(4);
    std::vector<double> buf(K);
    const double eps = 8 * std::numeric_limits<double>::epsilon() * plan.grid.back();
    for (std::size_t i = 0; i < nt; ++i) {
        const double t = opt.times[i];
        for (std::size_t n = 0; n < steps; ++n) {
            double a = plan.grid[n], b = plan.grid[n + 1];
            if (b > t + eps) break;
            double h = 0.5 * (b - a), root = std::sqrt(b - a);
            for (std::size_t j = 0; j < nx; ++j) {
                auto row = plan.A.row(i * nx + j);
                for (std::size_t q = 0; q < r.x.size(); ++q) {
                    mm.values(t - (a + h * (r.x[q] + 1)), opt.points[j], buf.data());
                    for (std::size_t k = 0; k < K; ++k) row[n * K + k] += 0.5 * r.w[q] * buf[k] * root;
                }
            }
        }
    }
    return plan;
}

}  // namespace

PathEnsemble simulate_convolution(const ConvolutionSetup& s, const SimulationOptions& opt) {
    validate(s);
    if (s.mode != KernelMode::Exact) throw ConfigError("simulation needs exact kernel mode");
    if (opt.n_paths == 0) throw ParameterError("n_paths must be positive");
    Plan plan = build_plan(s, opt);
    PathEnsemble e;
    e.times = opt.times;
    e.points = opt.points;
    e.seed = opt.seed;
    e.stream = opt.stream;
    e.time_grid = plan.grid;
    e.modes = plan.modes;
    const Eigen::Index rows = plan.A.rows(), cols = plan.A.cols();
    e.discrete_variance = plan.A.rowwise().squaredNorm();
    if (cols > 0 && std::isfinite(opt.tolerance)) {
        const std::size_t nx = opt.points.size();
        std::vector<double> exact_var(static_cast<std::size_t>(rows));
        double top = 0;
        for (Eigen::Index row = 0; row < rows; ++row) {
            std::size_t i = static_cast<std::size_t>(row) / nx, j = static_cast<std::size_t>(row) % nx;
            exact_var[row] = variance_at(s, opt.times[i], opt.points[j]);
            top = std::max(top, exact_var[row]);
        }
        // probes far below the largest variance cannot be resolved by any sample size
        for (Eigen::Index row = 0; row < rows; ++row) {
            std::size_t i = static_cast<std::size_t>(row) / nx, j = static_cast<std::size_t>(row) % nx;
            double exact = exact_var[row];
            double got = e.discrete_variance[row];
            if (exact > 1e-12 * top && std::abs(got - exact) > opt.tolerance * exact) {
                std::ostringstream os;
                os << "time grid too coarse: at t=" << opt.times[i] << " rho=" << rho_of(s.domain, opt.points[j])
                   << " discrete variance " << got << " vs " << exact << " (relative defect "
                   << std::abs(got - exact) / exact << " > " << opt.tolerance << ", " << plan.grid.size() - 1
                   << " steps); refine the grid";
                throw NumericalRefusal(os.str());
            }
        }
    }
    e.values = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(opt.n_paths));
    if (cols == 0) return e;
    const std::size_t B = std::max<std::size_t>(1, opt.batch);
    Eigen::MatrixXd Z(cols, static_cast<Eigen::Index>(B));
    for (std::size_t start = 0; start < opt.n_paths; start += B) {
        std::size_t nb = std::min(B, opt.n_paths - start);
        for (std::size_t b = 0; b < nb; ++b) {
            NormalStream ns(derive_seed(opt.seed, opt.stream, start + b));
            double* z = Z.col(static_cast<Eigen::Index>(b)).data();
            for (Eigen::Index c = 0; c < cols; ++c) z[c] = ns.next();
        }
        e.values.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(nb)).noalias() =
            plan.A * Z.leftCols(static_cast<Eigen::Index>(nb));
    }
    return e;
}

namespace {

QuadratureGrid probe_grid(int dim, const std::vector<Point>& pts) {
    QuadratureGrid g;
    g.dim = dim;
    for (const auto& p : pts) {
        g.coords.insert(g.coords.end(), p.begin(), p.end());
        g.weights.push_back(1.0);
    }
    return g;
}

Eigen::VectorXd semigroup_mean(const ConvolutionSetup& s, const Field& X0, const SimulationOptions& opt) {
    const std::size_t nx = opt.points.size();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(opt.times.size() * nx));
    if (X0.values.empty() || std::all_of(X0.values.begin(), X0.values.end(), [](double v) { return v == 0; }))
        return mean;
    Eigen::Map<const Eigen::VectorXd> x0(X0.values.data(), static_cast<Eigen::Index>(X0.values.size()));
    QuadratureGrid out = probe_grid(s.domain.dim, opt.points);
    for (std::size_t i = 0; i < opt.times.size(); ++i)
        mean.segment(static_cast<Eigen::Index>(i * nx), static_cast<Eigen::Index>(nx)) =
            semigroup_matrix(s.kernel(), opt.times[i], out, X0.grid) * x0;
    return mean;
}

}  // namespace

PathEnsemble simulate_mild(const ConvolutionSetup& s, const Field& X0, const SimulationOptions& opt) {
    PathEnsemble e = simulate_convolution(s, opt);
    e.values.colwise() += semigroup_mean(s, X0, opt);
    return e;
}

MomentStats moments(const Eigen::RowVectorXd& x) {
    MomentStats m;
    const double n = static_cast<double>(x.size());
    if (n < 2) return m;
    m.mean = x.mean();
    Eigen::ArrayXd c = (x.array() - m.mean).transpose();
    double m2 = c.square().mean(), m4 = c.square().square().mean();
    m.var = m2 * n / (n - 1);
    m.mean_se = std::sqrt(m.var / n);
    m.var_se = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
    m.kurtosis = m2 > 0 ? m4 / (m2 * m2) : 0.0;
    m.kurtosis_se = std::sqrt(24.0 / n);
    return m;
}

SimulationOptions semilinear_grid(const Field& X0, const SemilinearOptions& opt) {
    SimulationOptions so;
    for (int n = 1; n <= opt.steps; ++n) so.times.push_back(n * opt.dt);
    for (std::size_t i = 0; i < X0.grid.size(); ++i) so.points.push_back(X0.grid.node(i));
    so.uniform_step = opt.dt;
    so.tolerance = opt.variance_tolerance;
    so.n_paths = opt.n_paths;
    so.seed = opt.seed;
    return so;
}

SemilinearResult simulate_semilinear(const ConvolutionSetup& s, const Field& X0, const std::function<double(double)>& f,
                                     double lipschitz, const SemilinearOptions& opt) {
    if (!(lipschitz >= 0) || !std::isfinite(lipschitz)) throw ParameterError("Lipschitz constant must be finite");
    if (!(opt.dt > 0) || opt.steps < 1) throw ParameterError("semilinear grid needs dt > 0 and steps >= 1");
    SimulationOptions so = semilinear_grid(X0, opt);
    SemilinearResult res;
    res.ensemble = simulate_mild(s, X0, so);
    Eigen::MatrixXd linear = res.ensemble.values;  // S(t)X0 + M(t)
    const auto& g = X0.grid;
    const Eigen::Index nx = static_cast<Eigen::Index>(g.size()), N = opt.steps;
    const Eigen::Index paths = static_cast<Eigen::Index>(opt.n_paths);
    Eigen::MatrixXd P = semigroup_matrix(s.kernel(), opt.dt, g, g);
    auto w = weight_vector(s.domain, g, s.params);
    Eigen::Map<const Eigen::VectorXd> x0(X0.values.data(), nx);
    auto F = [&](const Eigen::MatrixXd& X) { return X.unaryExpr([&](double u) { return f(u); }).eval(); };

    Eigen::MatrixXd X = linear;
    res.iterations.assign(opt.n_paths, 0);
    std::vector<char> done(opt.n_paths, 0);
    Eigen::MatrixXd start = x0.replicate(1, paths);
    for (int it = 1; it <= opt.max_iterations; ++it) {
        Eigen::MatrixXd next(X.rows(), X.cols());
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(nx, paths);
        Eigen::MatrixXd prev = start;
        for (Eigen::Index n = 0; n < N; ++n) {
            D = P * (D + opt.dt * F(prev));
            next.middleRows(n * nx, nx) = linear.middleRows(n * nx, nx) + D;
            prev = X.middleRows(n * nx, nx);
        }
        bool all = true;
        for (Eigen::Index c = 0; c < paths; ++c) {
            if (done[c]) continue;
            double diff = 0;
            for (Eigen::Index n = 0; n < N; ++n) {
                Eigen::VectorXd d = next.block(n * nx, c, nx, 1) - X.block(n * nx, c, nx, 1);
                diff = std::max(diff, weighted_norm(g, w, d, s.params.p));
            }
            if (diff < opt.tolerance) { done[c] = 1; res.iterations[c] = it; }
            else all = false;
        }
        X = std::move(next);
        if (all) break;
    }
    for (std::size_t c = 0; c < opt.n_paths; ++c)
        if (!done[c]) { res.converged = false; res.iterations[c] = -1; }
    res.ensemble.values = X;
    return res;
}

FlowReport flow_consistency(const ConvolutionSetup& s, const Field& X0, double s_time, double t,
                            const std::vector<Point>& probes, const QuadratureGrid& stage_grid, SimulationOptions opt) {
    if (!(s_time > 0 && s_time < t)) throw ParameterError("need 0 < s < t");
    const std::uint64_t base = opt.stream;
    SimulationOptions a = opt, b = opt, one = opt;
    a.times = {s_time};
    a.points.clear();
    for (std::size_t i = 0; i < stage_grid.size(); ++i) a.points.push_back(stage_grid.node(i));
    a.stream = base + 1;
    PathEnsemble Xs = simulate_mild(s, X0, a);
    b.times = {t - s_time};
    b.points = probes;
    b.stream = base + 2;
    PathEnsemble fresh = simulate_convolution(s, b);
    Eigen::MatrixXd S = semigroup_matrix(s.kernel(), t - s_time, probe_grid(s.domain.dim, probes), stage_grid);
    Eigen::MatrixXd two = S * Xs.values + fresh.values;
    one.times = {t};
    one.points = probes;
    one.stream = base + 3;
    Eigen::MatrixXd first = simulate_mild(s, X0, one).values;

    FlowReport r;
    auto stats = [](const Eigen::MatrixXd& Y, Eigen::VectorXd& mean, Eigen::MatrixXd& cov) {
        const double n = static_cast<double>(Y.cols());
        mean = Y.rowwise().mean();
        Eigen::MatrixXd c = Y.colwise() - mean;
        cov = c * c.transpose() / (n - 1);
    };
    stats(first, r.mean_one, r.cov_one);
    stats(two, r.mean_two, r.cov_two);
    const double n1 = static_cast<double>(first.cols()), n2 = static_cast<double>(two.cols());
    for (Eigen::Index i = 0; i < r.cov_one.rows(); ++i) {
        double se_m = std::sqrt(r.cov_one(i, i) / n1 + r.cov_two(i, i) / n2);
        if (se_m > 0) r.max_mean_z = std::max(r.max_mean_z, std::abs(r.mean_one[i] - r.mean_two[i]) / se_m);
        for (Eigen::Index j = 0; j <= i; ++j) {
            auto var_of = [&](const Eigen::MatrixXd& C, double n) {
                return (C(i, i) * C(j, j) + C(i, j) * C(i, j)) / n;
            };
            double se = std::sqrt(var_of(r.cov_one, n1) + var_of(r.cov_two, n2));
            if (se > 0) r.max_cov_z = std::max(r.max_cov_z, std::abs(r.cov_one(i, j) - r.cov_two(i, j)) / se);
        }
    }
    return r;
}

InvariantReport invariant_diagnostics(const ConvolutionSetup& s, double horizon, const std::vector<Point>& points,
                                      std::size_t n_paths, std::uint64_t seed) {
    if (!one_dimensional(s.domain)) throw UnsupportedError("invariant diagnostics need Interval01 or HalfLine");
    validate(s);
    InvariantReport r;
    ConvolutionSetup inf = s;
    inf.T = kInf;
    inf.alpha = 0;
    r.j_inf = j_integral(inf);
    r.points = points;
    r.probe_time = 5 / (kPi * kPi);
    JIntegrand H(inf);
    const auto ts = linspace(0.05, std::max(horizon, 0.1), 8);
    for (const auto& x : points) {
        double rho = rho_of(s.domain, x);
        bool far = s.domain.kind == DomainKind::Interval01 && x[0] > 0.5;
        double lim = noise_is_zero(s) ? 0.0 : H.time_integral(rho, rho, 1e-12, far);
        r.sigma_inf.push_back(lim);
        double at = variance_at(s, r.probe_time, x);
        r.sigma_probe.push_back(at);
        if (lim > 0) r.max_probe_gap = std::max(r.max_probe_gap, std::abs(lim - at) / lim);
        double prev = 0;
        for (double t : ts) {
            double v = variance_at(s, t, x);
            if (v < prev * (1 - 1e-12) || v > lim * (1 + 1e-9) + 1e-300) r.monotone = false;
            prev = v;
        }
    }
    if (n_paths > 0) {
        SimulationOptions so;
        so.times = {horizon};
        so.points = points;
        so.n_paths = n_paths;
        so.seed = seed;
        PathEnsemble e = simulate_convolution(s, so);
        for (std::size_t j = 0; j < points.size(); ++j) {
            MomentStats m = moments(e.values.row(static_cast<Eigen::Index>(j)));
            r.simulated.push_back(m.var);
            r.simulated_se.push_back(m.var_se);
            if (m.var_se > 0) r.max_z = std::max(r.max_z, std::abs(m.var - r.sigma_inf[j]) / m.var_se);
        }
    }
    return r;
}

TailReport gaussian_tail_diagnostic(std::vector<double> norms, const TailOptions& opt) {
    TailReport r;
    if (norms.empty()) return r;
    std::sort(norms.begin(), norms.end());
    const double lo = norms.front(), hi = norms.back();
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) {
        r.degenerate = true;
        return r;
    }
    const std::size_t n = norms.size();
    std::vector<double> lx, ly, r2, nl;
    for (std::size_t i = 0; i < n; ++i) {
        double surv = (static_cast<double>(n - i) - 0.5) / static_cast<double>(n);
        if (surv > opt.upper || n - i < opt.min_count || norms[i] <= 0) continue;
        if (i + 1 < n && norms[i + 1] == norms[i]) continue;
        lx.push_back(std::log(norms[i]));
        ly.push_back(std::log(-std::log(surv)));
        r2.push_back(norms[i] * norms[i]);
        nl.push_back(-std::log(surv));
    }
    r.tail_samples = lx.size();
    if (lx.size() < opt.min_tail) return r;
    r.exponent = linear_fit(lx, ly).second;
    r.beta = linear_fit(r2, nl).second;
    r.verdict = r.exponent >= opt.threshold ? JVerdict::Finite : JVerdict::Divergent;
    return r;
}

std::vector<double> ensemble_norms(const PathEnsemble& e, std::size_t ti, const Domain& d, const QuadratureGrid& grid,
                                   const WeightedSpaceParams& params) {
    if (e.points.size() != grid.size()) throw ParameterError("ensemble points must be the grid nodes");
    auto w = weight_vector(d, grid, params);
    std::vector<double> out;
    const Eigen::Index nx = static_cast<Eigen::Index>(grid.size());
    for (std::size_t c = 0; c < e.n_paths(); ++c) {
        Eigen::VectorXd v = e.values.block(static_cast<Eigen::Index>(ti) * nx, static_cast<Eigen::Index>(c), nx, 1);
        out.push_back(weighted_norm(grid, w, v, params.p));
    }
    return out;
}

double gaussian_abs_moment(double p) { return std::pow(2.0, 0.5 * p) * std::tgamma(0.5 * (p + 1)) / std::sqrt(kPi); }

BdgReport bdg_check(const ConvolutionSetup& s, double t, const QuadratureGrid& grid, double p, SimulationOptions opt) {
    opt.times = {t};
    opt.points.clear();
    for (std::size_t i = 0; i < grid.size(); ++i) opt.points.push_back(grid.node(i));
    PathEnsemble e = simulate_convolution(s, opt);
    auto w = weight_vector(s.domain, grid, s.params);
    Eigen::VectorXd q(static_cast<Eigen::Index>(grid.size()));
    BdgReport r;
    r.p = p;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        q[static_cast<Eigen::Index>(j)] = grid.weights[j] * w[j];
        r.predicted += q[static_cast<Eigen::Index>(j)] * std::pow(variance_at(s, t, grid.node(j)), 0.5 * p);
    }
    r.predicted *= gaussian_abs_moment(p);
    Eigen::RowVectorXd per_path = q.transpose() * e.values.array().abs().pow(p).matrix();
    MomentStats m = moments(per_path);
    r.simulated = m.mean;
    r.se = m.mean_se;
    return r;
}

void write_ensemble(std::ostream& os, const PathEnsemble& e, std::size_t max_paths) {
    std::size_t np = max_paths ? std::min(max_paths, e.n_paths()) : e.n_paths();
    os << "# ensemble seed=" << e.seed << " stream=" << e.stream << " paths=" << e.n_paths() << " modes=" << e.modes
       << " steps=" << (e.time_grid.empty() ? 0 : e.time_grid.size() - 1) << "\n";
    os << "# t x... discrete_variance path values\n";
    os << std::setprecision(12);
    for (std::size_t i = 0; i < e.times.size(); ++i)
        for (std::size_t j = 0; j < e.points.size(); ++j) {
            std::size_t row = e.row(i, j);
            os << e.times[i];
            for (double c : e.points[j]) os << " " << c;
            os << " " << (e.discrete_variance.size() ? e.discrete_variance[static_cast<Eigen::Index>(row)] : 0.0);
            for (std::size_t c = 0; c < np; ++c) os << " " << e.values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c));
            os << "\n";
        }
}

}  // namespace bwn
