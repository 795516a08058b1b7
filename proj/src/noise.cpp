#include "bwn/noise.hpp"

#include "bwn/errors.hpp"
#include "bwn/numerics.hpp"

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>

namespace bwn {

namespace {


// tangential coordinates: the last m entries of a boundary point
double tdot(const Point& b, const Point& y) {
    std::size_t off = y.size() - b.size();
    double s = 0;
    for (std::size_t k = 0; k < b.size(); ++k) s += b[k] * y[off + k];
    return s;
}

double sphere_area(int m) {  // |S^{m-1}|
    return 2 * std::pow(kPi, 0.5 * m) / std::tgamma(0.5 * m);
}

std::function<double(double)> radial(const SpectralMeasure& mu) {
    if (mu.kind == SpectralKind::Bessel) {
        double k = mu.kappa;
        return [k](double s) { return std::pow(1 + s * s, -0.5 * k); };
    }
    return mu.radial_density;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t counter) {
    return splitmix64(splitmix64(splitmix64(root) ^ stream) ^ (counter * 0xD1B54A32D192ED03ULL));
}

SpectralMeasure SpectralMeasure::finite_atoms(int m, std::vector<Point> atoms, std::vector<double> masses) {
    if (atoms.size() != masses.size()) throw ParameterError("atoms and masses differ in length");
    for (const auto& a : atoms)
        if (static_cast<int>(a.size()) != m) throw ParameterError("atom dimension mismatch");
    for (double w : masses)
        if (w < 0) throw ParameterError("spectral masses must be nonnegative");
    SpectralMeasure mu;
    mu.kind = SpectralKind::Finite;
    mu.m = m;
    mu.atoms = std::move(atoms);
    mu.masses = std::move(masses);
    return mu;
}

SpectralMeasure SpectralMeasure::finite_density(int m, std::function<double(double)> f) {
    SpectralMeasure mu;
    mu.kind = SpectralKind::Finite;
    mu.m = m;
    mu.radial_density = std::move(f);
    return mu;
}

SpectralMeasure SpectralMeasure::lebesgue(int m) {
    SpectralMeasure mu;
    mu.m = m;
    return mu;
}

SpectralMeasure SpectralMeasure::bessel(int m, double kappa) {
    if (!(kappa > 0)) throw ParameterError("Bessel potential needs kappa > 0");
    SpectralMeasure mu;
    mu.kind = SpectralKind::Bessel;
    mu.m = m;
    mu.kappa = kappa;
    return mu;
}

double SpectralMeasure::density(const Point& z) const {
    double r2 = 0;
    for (double v : z) r2 += v * v;
    switch (kind) {
        case SpectralKind::Lebesgue: return 1.0;
        case SpectralKind::Bessel: return std::pow(1 + r2, -0.5 * kappa);
        case SpectralKind::Finite:
            if (radial_density) return radial_density(std::sqrt(r2));
            throw UnsupportedError("atomic spectral measure has no density");
    }
    return 0;
}

std::string SpectralMeasure::name() const {
    switch (kind) {
        case SpectralKind::Lebesgue: return "lebesgue:m=" + std::to_string(m);
        case SpectralKind::Bessel: return "bessel:m=" + std::to_string(m) + ",kappa=" + fmt(kappa);
        case SpectralKind::Finite: return "finite:m=" + std::to_string(m);
    }
    return "?";
}

double spectral_correlation(const SpectralMeasure& mu, const Point& y) {
    if (static_cast<int>(y.size()) != mu.m) throw ParameterError("correlation argument dimension mismatch");
    if (mu.kind == SpectralKind::Lebesgue) throw UnsupportedError("Lebesgue spectral measure has no pointwise correlation");
    if (mu.kind == SpectralKind::Finite && !mu.radial_density) {
        double s = 0;
        for (std::size_t j = 0; j < mu.atoms.size(); ++j) {
            double d = 0;
            for (int k = 0; k < mu.m; ++k) d += y[k] * mu.atoms[j][k];
            s += mu.masses[j] * std::cos(d);
        }
        return s;
    }
    double r = 0;
    for (double v : y) r += v * v;
    r = std::sqrt(r);
    auto f = radial(mu);
    const int m = mu.m;
    if (r == 0) {
        if (mu.kind == SpectralKind::Bessel && mu.kappa <= m) return INFINITY;
        return sphere_area(m) * integrate_to_inf([&](double s) { return f(s) * std::pow(s, m - 1); }, 0.0, 1e-12);
    }
    using boost::math::quadrature::ooura_fourier_cos;
    using boost::math::quadrature::ooura_fourier_sin;
    if (m == 1) {
        static thread_local ooura_fourier_cos<double> cos_int(1e-12);
        return 2 * cos_int.integrate(f, r).first;
    }
    if (m == 3) {
        static thread_local ooura_fourier_sin<double> sin_int(1e-12);
        return 4 * kPi / r * sin_int.integrate([&](double s) { return s * f(s); }, r).first;
    }
    if (mu.kind == SpectralKind::Bessel) {
        // Gamma subordination: (1+s^2)^{-k/2} = int u^{k/2-1} e^{-u(1+s^2)} du / Gamma(k/2)
        double a = 0.5 * mu.kappa - 1 - 0.5 * m;
        auto g = [&](double u) { return u > 0 ? std::pow(u, a) * std::exp(-u - r * r / (4 * u)) : 0.0; };
        double split = std::max(r * 0.5, 1e-3);
        double v = integrate(g, 0.0, split, 1e-12, 15) + integrate_to_inf(g, split, 1e-12);
        return std::pow(kPi, 0.5 * m) / std::tgamma(0.5 * mu.kappa) * v;
    }
    throw UnsupportedError("radial spectral density transform needs m = 1 or m = 3");
}

double k_alpha(double r, double alpha) {
    if (r < 0 || alpha < 0) throw ParameterError("k_alpha needs r >= 0 and alpha >= 0");
    // s in (0,1] through u = 1/s: int_1^inf u^alpha e^{-u - r^2/u} du
    auto head = [&](double u) { return std::pow(u, alpha) * std::exp(-u - r * r / u); };
    double peak = std::max(1.0, r);
    double a = 0;
    if (peak > 1) a += integrate(head, 1.0, peak, 1e-12, 15);
    a += integrate_to_inf(head, peak, 1e-12);
    // s in [1, inf)
    auto tail = [&](double s) { return std::pow(s, -2 - alpha) * std::exp(-1 / s - r * r * s); };
    double b = integrate_to_inf(tail, 1.0, 1e-12);
    return a + b;
}

BoundaryNoiseSpec BoundaryNoiseSpec::finite_series(std::vector<std::function<double(const Point&)>> e) {
    BoundaryNoiseSpec s;
    s.kind = NoiseKind::FiniteSeries;
    s.truncation = static_cast<int>(e.size());
    s.functions = std::move(e);
    return s;
}

BoundaryNoiseSpec BoundaryNoiseSpec::endpoint_atoms(std::vector<Point> pts) {
    BoundaryNoiseSpec s;
    s.kind = NoiseKind::EndpointAtoms;
    s.truncation = static_cast<int>(pts.size());
    s.atoms = std::move(pts);
    return s;
}

BoundaryNoiseSpec BoundaryNoiseSpec::circle_white(int K) {
    if (K < 0) throw ParameterError("circle truncation must be nonnegative");
    BoundaryNoiseSpec s;
    s.kind = NoiseKind::CircleWhiteNoise;
    s.truncation = K;
    return s;
}

BoundaryNoiseSpec BoundaryNoiseSpec::circle_harmonics(int K, double decay) {
    if (K < 1 || !(decay > 0)) throw ParameterError("circle harmonics need K >= 1 and decay > 0");
    std::vector<std::function<double(const Point&)>> e;
    for (int k = 1; k <= K; ++k) {
        double a = std::pow(k, -decay);
        e.push_back([=](const Point& y) { return a * std::cos(k * std::atan2(y[1], y[0])); });
        e.push_back([=](const Point& y) { return a * std::sin(k * std::atan2(y[1], y[0])); });
    }
    BoundaryNoiseSpec s = finite_series(std::move(e));
    s.harmonic_decay = decay;
    return s;
}

BoundaryNoiseSpec BoundaryNoiseSpec::homogeneous(const SpectralMeasure& mu, int K, double extent) {
    if (K < 1) throw ParameterError("mode truncation must be positive");
    bool atomic = mu.kind == SpectralKind::Finite && !mu.radial_density;
    if (!atomic && !(extent > 0)) throw ParameterError("homogeneous noise needs a positive extent");
    BoundaryNoiseSpec s;
    s.kind = NoiseKind::SpatiallyHomogeneous;
    s.truncation = K;
    s.measure = mu;
    s.extent = extent;
    return s;
}

BoundaryNoiseSpec BoundaryNoiseSpec::zero() { return finite_series({}); }

std::size_t BoundaryNoiseSpec::modes() const { return rkhs_basis(*this).size(); }

std::string BoundaryNoiseSpec::name() const {
    switch (kind) {
        case NoiseKind::FiniteSeries:
            if (harmonic_decay > 0) return "circle-harmonics:K=" + std::to_string(truncation / 2) + ",decay=" + fmt(harmonic_decay);
            return "finite-series:K=" + std::to_string(truncation);
        case NoiseKind::EndpointAtoms: return "endpoint-atoms:m=" + std::to_string(atoms.size());
        case NoiseKind::CircleWhiteNoise: return "circle-white:K=" + std::to_string(truncation);
        case NoiseKind::SpatiallyHomogeneous:
            return "homogeneous:" + measure.name() + ",K=" + std::to_string(truncation) + ",extent=" + fmt(extent);
    }
    return "?";
}

NoiseBasis rkhs_basis(const BoundaryNoiseSpec& spec) {
    NoiseBasis b;
    switch (spec.kind) {
        case NoiseKind::FiniteSeries:
            b.e = spec.functions;
            for (std::size_t k = 0; k < b.e.size(); ++k) b.labels.push_back("e" + std::to_string(k));
            break;
        case NoiseKind::EndpointAtoms:
            b.atoms = spec.atoms;
            for (const auto& a : spec.atoms) {
                b.e.push_back([a](const Point& y) { return y == a ? 1.0 : 0.0; });
                std::string l = "chi{";
                for (std::size_t k = 0; k < a.size(); ++k) l += (k ? "," : "") + fmt(a[k]);
                b.labels.push_back(l + "}");
            }
            break;
        case NoiseKind::CircleWhiteNoise: {
            auto ang = [](const Point& y) { return std::atan2(y[1], y[0]); };
            b.e.push_back([](const Point&) { return 1 / std::sqrt(2 * kPi); });
            b.labels.push_back("1");
            for (int k = 1; k <= spec.truncation; ++k) {
                b.e.push_back([=](const Point& y) { return std::cos(k * ang(y)) / std::sqrt(kPi); });
                b.labels.push_back("cos" + std::to_string(k));
                b.e.push_back([=](const Point& y) { return std::sin(k * ang(y)) / std::sqrt(kPi); });
                b.labels.push_back("sin" + std::to_string(k));
            }
            break;
        }
        case NoiseKind::SpatiallyHomogeneous: {
            const auto& mu = spec.measure;
            const int m = mu.m, K = spec.truncation;
            auto add_pair = [&](const Point& freq, double amp2, bool zero) {
                double a = std::sqrt(amp2);
                b.e.push_back([=](const Point& y) { return a * std::cos(tdot(freq, y)); });
                b.labels.push_back("cos" + std::to_string(b.e.size()));
                b.freq.push_back(freq); b.amp.push_back(a); b.odd.push_back(0);
                if (!zero) {
                    b.e.push_back([=](const Point& y) { return a * std::sin(tdot(freq, y)); });
                    b.labels.push_back("sin" + std::to_string(b.e.size()));
                    b.freq.push_back(freq); b.amp.push_back(a); b.odd.push_back(1);
                }
            };
            if (mu.kind == SpectralKind::Finite && !mu.radial_density) {
                for (std::size_t j = 0; j < mu.atoms.size(); ++j) add_pair(mu.atoms[j], mu.masses[j], false);
                break;
            }
            const double h = 2 * spec.extent / K;
            std::vector<int> idx(m, 0);
            long total = 1;
            for (int k = 0; k < m; ++k) total *= K;
            for (long n = 0; n < total; ++n) {
                long r = n;
                Point c(m);
                for (int k = 0; k < m; ++k) {
                    c[k] = -spec.extent + (r % K + 0.5) * h;
                    r /= K;
                }
                if (mu.kind == SpectralKind::Lebesgue) {
                    Point lo(m), hi(m);
                    for (int k = 0; k < m; ++k) { lo[k] = c[k] - 0.5 * h; hi[k] = c[k] + 0.5 * h; }
                    double inv = std::pow(h, -0.5 * m);
                    b.cell_lo.push_back(lo);
                    b.cell_hi.push_back(hi);
                    b.e.push_back([=](const Point& y) {
                        std::size_t off = y.size() - lo.size();
                        for (std::size_t k = 0; k < lo.size(); ++k)
                            if (y[off + k] < lo[k] || y[off + k] >= hi[k]) return 0.0;
                        return inv;
                    });
                    b.labels.push_back("cell" + std::to_string(n));
                    continue;
                }
                // keep one of each +-c pair; the first nonzero coordinate decides
                int sign = 0;
                for (int k = 0; k < m && sign == 0; ++k)
                    if (std::abs(c[k]) > 1e-12 * h) sign = c[k] > 0 ? 1 : -1;
                if (sign < 0) continue;
                double mass = std::pow(h, m) * mu.density(c);
                add_pair(c, sign == 0 ? mass : 2 * mass, sign == 0);
            }
            break;
        }
    }
    return b;
}

Eigen::MatrixXd gram_matrix(const NoiseBasis& basis, const QuadratureGrid& quad) {
    const std::size_t n = basis.size();
    Eigen::MatrixXd E(quad.size(), n);
    for (std::size_t i = 0; i < quad.size(); ++i) {
        Point y = quad.node(i);
        for (std::size_t k = 0; k < n; ++k) E(i, k) = basis.e[k](y);
    }
    Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(quad.weights.data(), quad.size());
    return E.transpose() * w.asDiagonal() * E;
}

std::vector<NoiseIncrement> sample_increments(const BoundaryNoiseSpec& spec, double dt, std::size_t count,
                                              std::uint64_t seed) {
    if (!(dt > 0)) throw ParameterError("dt must be positive");
    const std::size_t K = spec.modes();
    std::vector<NoiseIncrement> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i].index = i;
        out[i].dW.resize(K);
    }
    const double s = std::sqrt(dt);
    for (std::size_t k = 0; k < K; ++k) {
        NormalStream ns(derive_seed(seed, k));
        for (std::size_t i = 0; i < count; ++i) out[i].dW[k] = s * ns.next();
    }
    return out;
}

double evaluate_increment(const NoiseBasis& basis, const NoiseIncrement& inc, const Point& y) {
    double s = 0;
    for (std::size_t k = 0; k < basis.size(); ++k) s += basis.e[k](y) * inc.dW[k];
    return s;
}

}  // namespace bwn
