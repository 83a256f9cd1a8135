#include "heatenc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "heatenc/errors.hpp"

namespace heatenc {

namespace {

constexpr double kPolytopeTol = 1e-9;

bool lex_less(const Vec& a, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i] - 1e-12) return true;
        if (a[i] > b[i] + 1e-12) return false;
    }
    return false;
}

// Point-in-convex-polygon (CCW vertex order), boundary counts as inside.
bool point_in_polygon(const std::vector<Vec>& poly, double x, double y, double tol) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec& a = poly[i];
        const Vec& b = poly[(i + 1) % n];
        const double crossv = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
        if (crossv < -tol) return false;
    }
    return true;
}

} // namespace

bool SpatialDomain::contains(const Vec& p, double tol) const {
    if (p[0] < xb[0] - tol || p[0] > xb[1] + tol) return false;
    if (dim == 2 && (p[1] < yb[0] - tol || p[1] > yb[1] + tol)) return false;
    return true;
}

SpatialDomain make_interval(double x_lo, double x_hi) {
    if (!(x_lo < x_hi)) throw ValidationError("interval requires x_lo < x_hi");
    SpatialDomain d;
    d.dim = 1;
    d.xb = {x_lo, x_hi};
    d.boundary_nodes = {
        {{x_lo}, {-1.0}, 1.0},
        {{x_hi}, {+1.0}, 1.0},
    };
    return d;
}

SpatialDomain make_rectangle(double x_lo, double x_hi, double y_lo, double y_hi,
                             int nx, int ny) {
    if (!(x_lo < x_hi) || !(y_lo < y_hi))
        throw ValidationError("rectangle requires x_lo < x_hi and y_lo < y_hi");
    if (nx < 1 || ny < 1) throw ValidationError("rectangle needs nx, ny >= 1");
    SpatialDomain d;
    d.dim = 2;
    d.xb = {x_lo, x_hi};
    d.yb = {y_lo, y_hi};
    const double hx = (x_hi - x_lo) / nx;
    const double hy = (y_hi - y_lo) / ny;
    auto edge_weight = [](int i, int n, double h) {
        return (i == 0 || i == n) ? h / 2 : h;
    };
    // bottom (nu = (0,-1)), top (0,+1): nodes along x including corners
    for (int i = 0; i <= nx; ++i) {
        const double x = x_lo + i * hx;
        d.boundary_nodes.push_back({{x, y_lo}, {0.0, -1.0}, edge_weight(i, nx, hx)});
        d.boundary_nodes.push_back({{x, y_hi}, {0.0, +1.0}, edge_weight(i, nx, hx)});
    }
    // left (-1,0), right (+1,0)
    for (int j = 0; j <= ny; ++j) {
        const double y = y_lo + j * hy;
        d.boundary_nodes.push_back({{x_lo, y}, {-1.0, 0.0}, edge_weight(j, ny, hy)});
        d.boundary_nodes.push_back({{x_hi, y}, {+1.0, 0.0}, edge_weight(j, ny, hy)});
    }
    return d;
}

double Polynomial::eval(const Vec& x, double t) const {
    double s = 0.0;
    for (const Term& term : terms) {
        double v = term.coeff;
        for (int k = 0; k < term.px; ++k) v *= x[0];
        if (term.py > 0)
            for (int k = 0; k < term.py; ++k) v *= x[1];
        for (int k = 0; k < term.pt; ++k) v *= t;
        s += v;
    }
    return s;
}

double SourceSpec::onset_min() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& c : components) m = std::min(m, c.onset);
    return m;
}

double SourceSpec::horizon() const {
    double m = 0.0;
    for (const auto& c : components) m = std::max(m, c.active_until);
    return m;
}

double SourceSpec::eval(const Vec& x, double t) const {
    for (const auto& comp : components) {
        if (t < comp.onset || t > comp.active_until) continue;
        if (comp.region.front().size() == 1) {
            if (x[0] < comp.region[0][0] || x[0] > comp.region[1][0]) continue;
        } else {
            if (!point_in_polygon(comp.region, x[0], x[1], 0.0)) continue;
        }
        return comp.density.eval(x, t);
    }
    return 0.0;
}

std::vector<Vec> SourceSpec::prism_vertices() const {
    std::vector<Vec> out;
    for (const auto& comp : components) {
        for (const Vec& v : comp.region) {
            for (double t : {comp.onset, comp.active_until}) {
                Vec p = v;
                p.push_back(t);
                out.push_back(p);
            }
        }
    }
    return out;
}

double polygon_area(const std::vector<Vec>& poly) {
    double a = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec& p = poly[i];
        const Vec& q = poly[(i + 1) % n];
        a += p[0] * q[1] - q[0] * p[1];
    }
    return a / 2;
}

void validate(const SourceSpec& spec, int dim) {
    for (const auto& comp : spec.components) {
        if (!(comp.onset < comp.active_until))
            throw ValidationError("source component onset must precede the horizon");
        if (comp.holder_exponent <= 0.0 || comp.holder_exponent > 1.0)
            throw ValidationError("holder exponent must lie in (0,1]");
        if (dim == 1) {
            if (comp.region.size() != 2 || comp.region[0].size() != 1)
                throw ValidationError("1D source region must be an interval");
            if (!(comp.region[0][0] < comp.region[1][0]))
                throw ValidationError("1D source region has nonpositive measure");
        } else {
            if (comp.region.size() < 3)
                throw ValidationError("2D source region needs >= 3 polygon vertices");
            if (polygon_area(comp.region) <= 0.0)
                throw ValidationError("2D source region must be CCW with positive area");
        }
        for (const Vec& v : comp.region) {
            if (comp.density.eval(v, comp.onset) == 0.0)
                throw ValidationError("density vanishes at a region vertex at onset");
        }
    }
    // disjoint closures across components
    for (std::size_t i = 0; i < spec.components.size(); ++i) {
        for (std::size_t j = i + 1; j < spec.components.size(); ++j) {
            const auto& a = spec.components[i];
            const auto& b = spec.components[j];
            if (dim == 1) {
                const bool apart = a.region[1][0] < b.region[0][0] ||
                                   b.region[1][0] < a.region[0][0];
                if (!apart)
                    throw ValidationError("source component closures must be disjoint");
            } else {
                // vertex-in-polygon screen; sufficient for the convex regions used here
                for (const Vec& v : a.region)
                    if (point_in_polygon(b.region, v[0], v[1], -1e-12))
                        throw ValidationError("source component closures must be disjoint");
                for (const Vec& v : b.region)
                    if (point_in_polygon(a.region, v[0], v[1], -1e-12))
                        throw ValidationError("source component closures must be disjoint");
            }
        }
    }
    if (spec.measure_exponent < 0.0)
        throw ValidationError("measure exponent p must be >= 0");
}

SpaceTimeDirection SpaceTimeDirection::from_vec(const Vec& v) {
    const std::size_t n = v.size() - 1;
    if (!(v[n] < 0.0))
        throw ValidationError("space-time direction must have negative time component");
    if (std::abs(norm(v) - 1.0) > 1e-9)
        throw ValidationError("space-time direction must be unit");
    SpaceTimeDirection d;
    d.vec = v;
    d.normalizer = -1.0 / v[n];
    Vec sp(v.begin(), v.end() - 1);
    const double spn = norm(sp);
    d.c = spn * d.normalizer;
    if (spn > 0) {
        for (double& e : sp) e /= spn;
        d.omega = sp;
    } else {
        d.omega = Vec(n, 0.0);
        d.omega[0] = 1.0;
        d.c = 0.0;
    }
    return d;
}

SpaceTimeDirection omega_c(const Vec& omega, double c) {
    if (c == 0.0) throw ValidationError("omega_c: c must be nonzero");
    if (std::abs(norm(omega) - 1.0) > 1e-12)
        throw ValidationError("omega_c: omega must be a unit vector");
    if (omega.size() >= 2 && c < 0.0)
        throw ValidationError("omega_c: c must be positive for dim >= 2");
    SpaceTimeDirection d;
    d.omega = omega;
    d.c = c;
    d.normalizer = std::sqrt(c * c + 1.0);
    d.vec.resize(omega.size() + 1);
    for (std::size_t i = 0; i < omega.size(); ++i) d.vec[i] = c * omega[i] / d.normalizer;
    d.vec[omega.size()] = -1.0 / d.normalizer;
    return d;
}

double support_function(const SourceSpec& spec, const SpaceTimeDirection& dir) {
    if (spec.components.empty())
        throw ValidationError("support_function: empty component list");
    double h = -std::numeric_limits<double>::infinity();
    for (const Vec& v : spec.prism_vertices()) h = std::max(h, dot(v, dir.vec));
    return h;
}

double condition_2_3_margin(const SpatialDomain& domain, double T,
                            const SourceSpec& spec, const SpaceTimeDirection& dir) {
    double sup = -std::numeric_limits<double>::infinity();
    if (domain.dim == 1) {
        for (double x : {domain.xb[0], domain.xb[1]})
            sup = std::max(sup, dot({x, T}, dir.vec));
    } else {
        for (double x : {domain.xb[0], domain.xb[1]})
            for (double y : {domain.yb[0], domain.yb[1]})
                sup = std::max(sup, dot({x, y, T}, dir.vec));
    }
    return support_function(spec, dir) - sup;
}

bool SpaceTimePolytope::contains(const Vec& p, double tol) const {
    if (empty) return false;
    for (std::size_t i = 0; i < box_lo.size(); ++i)
        if (p[i] < box_lo[i] - tol || p[i] > box_hi[i] + tol) return false;
    for (const HalfSpace& h : halfspaces)
        if (dot(p, h.normal) > h.offset + tol) return false;
    return true;
}

namespace {

// Sutherland-Hodgman clip of a convex polygon by n.x <= off.
std::vector<Vec> clip_polygon(const std::vector<Vec>& poly, const Vec& n, double off) {
    std::vector<Vec> out;
    const std::size_t m = poly.size();
    for (std::size_t i = 0; i < m; ++i) {
        const Vec& a = poly[i];
        const Vec& b = poly[(i + 1) % m];
        const double da = dot(a, n) - off;
        const double db = dot(b, n) - off;
        if (da <= kPolytopeTol) out.push_back(a);
        if ((da < -kPolytopeTol && db > kPolytopeTol) ||
            (da > kPolytopeTol && db < -kPolytopeTol)) {
            const double t = da / (da - db);
            out.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
        }
    }
    return out;
}

// Solve the 3x3 system n_i . x = o_i; false if near-singular.
bool solve3(const std::array<Vec, 3>& n, const std::array<double, 3>& o, Vec& x) {
    double a[3][4];
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) a[i][j] = n[i][j];
        a[i][3] = o[i];
    }
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-12) return false;
        std::swap(a[piv], a[col]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (int j = col; j < 4; ++j) a[r][j] -= f * a[col][j];
        }
    }
    x = {a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]};
    return true;
}

} // namespace

SpaceTimePolytope intersect_halfspaces(
    const std::vector<std::pair<SpaceTimeDirection, double>>& samples,
    const Vec& box_lo, const Vec& box_hi) {
    const std::size_t d = box_lo.size();
    for (std::size_t i = 0; i < d; ++i)
        if (!(box_lo[i] < box_hi[i]))
            throw ValidationError("intersect_halfspaces: degenerate clip box");

    SpaceTimePolytope poly;
    poly.box_lo = box_lo;
    poly.box_hi = box_hi;
    for (const auto& [dir, h] : samples) poly.halfspaces.push_back({dir.vec, h});

    if (d == 2) {
        std::vector<Vec> verts = {{box_lo[0], box_lo[1]},
                                  {box_hi[0], box_lo[1]},
                                  {box_hi[0], box_hi[1]},
                                  {box_lo[0], box_hi[1]}};
        for (const HalfSpace& h : poly.halfspaces) {
            verts = clip_polygon(verts, h.normal, h.offset);
            if (verts.empty()) break;
        }
        poly.vertices = verts;
    } else {
        // enumerate constraint triples (half-spaces plus 6 box faces)
        std::vector<HalfSpace> all = poly.halfspaces;
        for (std::size_t i = 0; i < 3; ++i) {
            Vec n(3, 0.0);
            n[i] = 1.0;
            all.push_back({n, box_hi[i]});
            n[i] = -1.0;
            all.push_back({n, -box_lo[i]});
        }
        std::vector<Vec> verts;
        for (std::size_t i = 0; i < all.size(); ++i)
            for (std::size_t j = i + 1; j < all.size(); ++j)
                for (std::size_t k = j + 1; k < all.size(); ++k) {
                    Vec x;
                    if (!solve3({all[i].normal, all[j].normal, all[k].normal},
                                {all[i].offset, all[j].offset, all[k].offset}, x))
                        continue;
                    bool feasible = true;
                    for (const HalfSpace& h : all)
                        if (dot(x, h.normal) > h.offset + kPolytopeTol) {
                            feasible = false;
                            break;
                        }
                    if (feasible) verts.push_back(x);
                }
        // dedupe
        std::sort(verts.begin(), verts.end(), lex_less);
        std::vector<Vec> unique;
        for (const Vec& v : verts) {
            if (!unique.empty()) {
                double dist = 0.0;
                for (std::size_t i = 0; i < 3; ++i)
                    dist = std::max(dist, std::abs(v[i] - unique.back()[i]));
                if (dist < 1e-8) continue;
            }
            unique.push_back(v);
        }
        poly.vertices = unique;
    }

    std::sort(poly.vertices.begin(), poly.vertices.end(), lex_less);
    poly.empty = poly.vertices.empty();
    return poly;
}

namespace {

double point_to_segment(const Vec& p, const Vec& a, const Vec& b) {
    const double vx = b[0] - a[0], vy = b[1] - a[1];
    const double wx = p[0] - a[0], wy = p[1] - a[1];
    const double L2 = vx * vx + vy * vy;
    double t = L2 > 0 ? (wx * vx + wy * vy) / L2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = wx - t * vx, dy = wy - t * vy;
    return std::sqrt(dx * dx + dy * dy);
}

// Boundary of a 2D polytope in CCW order (vertices are stored lexicographic).
std::vector<Vec> ccw_hull(const std::vector<Vec>& verts) {
    std::vector<Vec> v = verts;
    Vec cen(2, 0.0);
    for (const Vec& p : v) {
        cen[0] += p[0];
        cen[1] += p[1];
    }
    cen[0] /= v.size();
    cen[1] /= v.size();
    std::sort(v.begin(), v.end(), [&](const Vec& a, const Vec& b) {
        return std::atan2(a[1] - cen[1], a[0] - cen[0]) <
               std::atan2(b[1] - cen[1], b[0] - cen[0]);
    });
    return v;
}

double directed_hausdorff(const SpaceTimePolytope& a, const std::vector<Vec>& b_ring,
                          const SpaceTimePolytope& b) {
    double worst = 0.0;
    for (const Vec& p : a.vertices) {
        if (b.contains(p)) continue;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < b_ring.size(); ++i)
            best = std::min(best, point_to_segment(p, b_ring[i], b_ring[(i + 1) % b_ring.size()]));
        worst = std::max(worst, best);
    }
    return worst;
}

} // namespace

double hausdorff_distance_2d(const SpaceTimePolytope& a, const SpaceTimePolytope& b) {
    if (a.empty || b.empty)
        throw ValidationError("hausdorff_distance_2d: empty polytope");
    const auto ra = ccw_hull(a.vertices);
    const auto rb = ccw_hull(b.vertices);
    return std::max(directed_hausdorff(a, rb, b), directed_hausdorff(b, ra, a));
}

} // namespace heatenc
