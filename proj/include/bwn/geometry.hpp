#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace bwn {

using Point = std::vector<double>;

enum class DomainKind { Interval01, HalfLine, HalfSpace, UnitBall, GenericSigned };

struct BoundaryPatch {
    std::vector<Point> nodes;
    std::vector<double> weights;
};

// A spatial region with exact distance to the boundary.
// HalfSpace(d) is {x : x[0] > 0}; the first coordinate is the normal one.
struct Domain {
    DomainKind kind = DomainKind::Interval01;
    int dim = 1;

    // GenericSigned only: signed distance (positive inside), bounding box, boundary patches
    std::function<double(const Point&)> signed_distance;
    Point box_lo, box_hi;
    std::vector<BoundaryPatch> patches;

    static Domain interval01();
    static Domain half_line();
    static Domain half_space(int d);
    static Domain unit_ball(int d);
    static Domain generic(int d, std::function<double(const Point&)> sd, Point lo, Point hi,
                          std::vector<BoundaryPatch> patches = {});

    bool bounded() const;
    std::string name() const;
};

Domain parse_domain(const std::string& s);  // "interval01", "halfline", "halfspace:2", "unitball:3"

// rho(x); throws DomainMembershipError outside the closure
double distance_to_boundary(const Domain& domain, const Point& x);
bool in_closure(const Domain& domain, const Point& x);

struct WeightedSpaceParams {
    double p = 2.0;
    double theta = 0.0;
    double delta = 0.0;
    bool extension_ok = true;  // theta < 2p - 1

    WeightedSpaceParams() = default;
    WeightedSpaceParams(double p_, double theta_, double delta_);
};

// w_{theta,delta}(x) = min(rho^theta, (1+|x|^2)^-delta)
double weight(const Domain& domain, const Point& x, const WeightedSpaceParams& params);
double weight_rho(double rho, double norm2, const WeightedSpaceParams& params);

struct QuadratureGrid {
    int dim = 1;
    std::vector<double> coords;  // node-major, dim entries per node
    std::vector<double> weights;
    int level = 0;
    double tolerance = 0.0;

    std::size_t size() const { return weights.size(); }
    Point node(std::size_t i) const;
    double x(std::size_t i) const { return coords[i * dim]; }
    double sum_weights() const;
};

struct BoundaryQuadratureOptions {
    double half_width = 0.0;  // HalfSpace truncation R; 0 => derived from c and t_max
    double c = 1.0;
    double t_max = 1.0;
};

QuadratureGrid boundary_quadrature(const Domain& domain, int level,
                                   const BoundaryQuadratureOptions& opt = {});

// truncation radius with exp(-R^2/(2 c t_max)) < 1e-12
double gaussian_cutoff(double c, double t_max);

struct GridRequest {
    bool graded = false;
    int n = 8;                   // uniform: cells per unit direction; graded: Gauss points per panel
    double panel = 1.0 / 16.0;   // graded: width of the interior panels
    double min_distance = 1e-8;  // graded: innermost panel edge
    double cutoff = 0.0;         // unbounded directions: truncation radius (0 => 20)
    int angular = 64;            // UnitBall: points per angular direction
};

QuadratureGrid interior_grid(const Domain& domain, const GridRequest& req);

// geometric panels [a/2, a] down to min_distance, then uniform panels of width h up to len;
// returns (nodes, weights) of a composite Gauss rule on (0, len) in the distance variable
void graded_rule(double len, double h, double min_distance, int n,
                 std::vector<double>& nodes, std::vector<double>& weights);

void write_grid(std::ostream& os, const QuadratureGrid& grid);
QuadratureGrid read_grid(std::istream& is);

}  // namespace bwn
