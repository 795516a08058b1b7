#pragma once

#include "bwn/geometry.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace bwn {

std::uint64_t splitmix64(std::uint64_t x);
// substream seed for (root, stream, counter); distinct triples give unrelated seeds
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t counter = 0);

class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : seed_(seed), gen_(seed) {}
    double next() { return dist_(gen_); }
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
    std::normal_distribution<double> dist_;
};

enum class SpectralKind { Finite, Lebesgue, Bessel };

struct SpectralMeasure {
    SpectralKind kind = SpectralKind::Lebesgue;
    int m = 1;
    double kappa = 0;
    // Finite: atoms (taken symmetric) or a radial density f(|z|)
    std::vector<Point> atoms;
    std::vector<double> masses;
    std::function<double(double)> radial_density;

    static SpectralMeasure finite_atoms(int m, std::vector<Point> atoms, std::vector<double> masses);
    static SpectralMeasure finite_density(int m, std::function<double(double)> f);
    static SpectralMeasure lebesgue(int m);
    static SpectralMeasure bessel(int m, double kappa);

    double density(const Point& z) const;
    std::string name() const;
};

// Gamma(y) = int e^{i y.z} mu(dz)
double spectral_correlation(const SpectralMeasure& mu, const Point& y);

// K_alpha(r) = int_0^inf s^{-2-alpha} exp(-1/s - r^2 s) ds
double k_alpha(double r, double alpha);

enum class NoiseKind { FiniteSeries, EndpointAtoms, CircleWhiteNoise, SpatiallyHomogeneous };

struct BoundaryNoiseSpec {
    NoiseKind kind = NoiseKind::EndpointAtoms;
    int truncation = 0;
    std::vector<std::function<double(const Point&)>> functions;  // FiniteSeries
    std::vector<Point> atoms;                                     // EndpointAtoms
    SpectralMeasure measure;                                      // SpatiallyHomogeneous
    double harmonic_decay = 0;  // > 0 iff built by circle_harmonics
    double extent = 0;  // frequency cutoff (Finite density, Bessel) or half-width of the cell window (Lebesgue)

    static BoundaryNoiseSpec finite_series(std::vector<std::function<double(const Point&)>> e);
    static BoundaryNoiseSpec endpoint_atoms(std::vector<Point> pts);
    static BoundaryNoiseSpec circle_white(int K);
    // k^{-decay} cos(k phi), k^{-decay} sin(k phi), k = 1..K on the unit circle
    static BoundaryNoiseSpec circle_harmonics(int K, double decay);
    static BoundaryNoiseSpec homogeneous(const SpectralMeasure& mu, int K, double extent);
    static BoundaryNoiseSpec zero();

    std::size_t modes() const;
    std::string name() const;
};

// orthonormal family e_k of the RKHS, truncated
struct NoiseBasis {
    std::vector<std::function<double(const Point&)>> e;
    std::vector<std::string> labels;
    std::vector<Point> atoms;  // non-empty iff e_k = indicator of {atoms[k]}
    // Lebesgue cells: e_k = 1/sqrt|cell| on cell k
    std::vector<Point> cell_lo, cell_hi;
    // homogeneous trig modes: e_k(y) = amp[k] * cos or sin(<freq[k], y'>)
    std::vector<Point> freq;
    std::vector<double> amp;
    std::vector<int> odd;

    std::size_t size() const { return e.size(); }
    bool atomic() const { return !atoms.empty(); }
};

NoiseBasis rkhs_basis(const BoundaryNoiseSpec& spec);
Eigen::MatrixXd gram_matrix(const NoiseBasis& basis, const QuadratureGrid& quad);

struct NoiseIncrement {
    std::vector<double> dW;  // one per mode, variance dt
    std::size_t index = 0;
};

// mode k draws from derive_seed(seed, k)
std::vector<NoiseIncrement> sample_increments(const BoundaryNoiseSpec& spec, double dt, std::size_t count,
                                              std::uint64_t seed);

// W increment at boundary point y: sum_k e_k(y) dW_k
double evaluate_increment(const NoiseBasis& basis, const NoiseIncrement& inc, const Point& y);

}  // namespace bwn
