#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "heatenc/vecmath.hpp"

namespace heatenc {

// ---------------------------------------------------------------------------
// Spatial domain: an interval (dim=1) or an axis-aligned rectangle (dim=2),
// with boundary quadrature nodes carrying outward normals and arc-length
// weights.  Weights sum to the exact perimeter (dim=2) or to 2 (dim=1, both
// endpoints with weight 1).
// ---------------------------------------------------------------------------

struct BoundaryNode {
    Vec x;       // position, size dim
    Vec normal;  // outward unit normal, size dim
    double weight = 0.0;
};

struct SpatialDomain {
    int dim = 1;
    std::array<double, 2> xb{0.0, 1.0};
    std::array<double, 2> yb{0.0, 1.0};  // dim == 2 only
    std::vector<BoundaryNode> boundary_nodes;

    double x_extent() const { return xb[1] - xb[0]; }
    double y_extent() const { return yb[1] - yb[0]; }
    bool contains(const Vec& p, double tol = 0.0) const;
};

// dim=1 domain; boundary nodes are the two endpoints, weight 1, normals -1/+1.
SpatialDomain make_interval(double x_lo, double x_hi);

// dim=2 rectangle; boundary nodes are grid nodes on each edge with trapezoid
// arc-length weights (corners appear once per incident edge).
SpatialDomain make_rectangle(double x_lo, double x_hi, double y_lo, double y_hi,
                             int nx, int ny);

// ---------------------------------------------------------------------------
// Source specification: union of space-time prisms P_j x [T_j, T] carrying
// polynomial densities.
// ---------------------------------------------------------------------------

// Space-time polynomial: sum of coeff * x^px * y^py * t^pt (py unused in 1D).
struct Polynomial {
    struct Term {
        int px = 0, py = 0, pt = 0;
        double coeff = 0.0;
    };
    std::vector<Term> terms;

    static Polynomial constant(double c) { return {{{0, 0, 0, c}}}; }
    double eval(const Vec& x, double t) const;
    bool empty() const { return terms.empty(); }
};

struct SourceComponent {
    // dim=1: interval [region[0][0], region[1][0]];
    // dim=2: convex polygon vertex list, counter-clockwise.
    std::vector<Vec> region;
    double onset = 0.0;         // T_j
    double active_until = 1.0;  // T
    Polynomial density;         // rho_j(x, t)
    double holder_exponent = 1.0;
};

struct SourceSpec {
    std::vector<SourceComponent> components;
    double measure_exponent = 0.0;  // p, metadata for the lower-band check

    double onset_min() const;
    double horizon() const;  // common active_until
    // f(x, t): density of the component whose prism contains (x, t), else 0.
    double eval(const Vec& x, double t) const;
    // All prism vertices (region vertex, t in {T_j, T}) as space-time points.
    std::vector<Vec> prism_vertices() const;
};

// Validates the invariants (positive measure, disjoint closures, onset < T,
// nonvanishing density at region vertices at onset); throws ValidationError.
void validate(const SourceSpec& spec, int dim);

double polygon_area(const std::vector<Vec>& poly);

// ---------------------------------------------------------------------------
// Space-time probing directions omega(c) = (c*omega, -1)/sqrt(c^2+1).
// ---------------------------------------------------------------------------

struct SpaceTimeDirection {
    Vec omega;          // unit vector in R^n
    double c = 1.0;     // nonzero probing speed
    Vec vec;            // unit vector in R^{n+1}, time component < 0
    double normalizer = 0.0;  // sqrt(c^2+1)

    // Recover a direction from an arbitrary unit space-time vector with
    // strictly negative time component (used by property tests).
    static SpaceTimeDirection from_vec(const Vec& v);
};

// dim=1 allows c<0; dim=2 requires c>0.  Throws on zero c / non-unit omega.
SpaceTimeDirection omega_c(const Vec& omega, double c);

// h_D(dir) = max over prism vertices of (x,t)^T . dir.vec.
double support_function(const SourceSpec& spec, const SpaceTimeDirection& dir);

// h_D(omega(c)) - sup_{x in Omega} (x,T)^T . omega(c); positive iff the
// final-time slab lies strictly below the supporting hyperplane.
double condition_2_3_margin(const SpatialDomain& domain, double T,
                            const SourceSpec& spec, const SpaceTimeDirection& dir);

// ---------------------------------------------------------------------------
// Half-space intersection clipped to Omega x [0, T].
// ---------------------------------------------------------------------------

struct HalfSpace {
    Vec normal;  // unit, in R^{n+1}
    double offset = 0.0;  // constraint: x . normal <= offset
};

struct SpaceTimePolytope {
    std::vector<HalfSpace> halfspaces;
    std::vector<Vec> vertices;  // lexicographically sorted
    Vec box_lo, box_hi;         // clip region
    bool empty = false;

    bool contains(const Vec& p, double tol = 1e-9) const;
};

// Intersects the clip box with all half-spaces.  Empty result is reported via
// the `empty` flag.  dim of the box is n+1 (2 or 3).
SpaceTimePolytope intersect_halfspaces(
    const std::vector<std::pair<SpaceTimeDirection, double>>& samples,
    const Vec& box_lo, const Vec& box_hi);

// Hausdorff distance between two nonempty 2D polytopes (vertex-based; exact
// for convex polygons).
double hausdorff_distance_2d(const SpaceTimePolytope& a, const SpaceTimePolytope& b);

} // namespace heatenc
