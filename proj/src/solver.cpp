#include "heatenc/solver.hpp"

#include <algorithm>
#include <cmath>

#include "heatenc/errors.hpp"

namespace heatenc {

std::string to_string(BoundaryCondition bc) {
    return bc == BoundaryCondition::dirichlet0 ? "dirichlet0" : "neumann0";
}

BoundaryCondition parse_boundary_condition(const std::string& s) {
    if (s == "dirichlet0") return BoundaryCondition::dirichlet0;
    if (s == "neumann0") return BoundaryCondition::neumann0;
    throw ValidationError("unknown boundary condition: " + s);
}

Grid make_grid(const SpatialDomain& domain, int nx, int ny, int nt, double T) {
    if (nx < 16 || (domain.dim == 2 && ny < 16))
        throw ValidationError("grid needs >= 16 nodes per axis");
    if (nt < 1 || !(T > 0.0)) throw ValidationError("grid needs nt >= 1 and T > 0");
    Grid g;
    g.nx = nx;
    g.hx = domain.x_extent() / nx;
    if (domain.dim == 2) {
        g.ny = ny;
        g.hy = domain.y_extent() / ny;
    }
    g.nt = nt;
    g.T = T;
    g.dt = T / nt;
    return g;
}

namespace {

// Thomas algorithm; diag/rhs are overwritten.
void solve_tridiag(std::vector<double>& sub, std::vector<double>& diag,
                   std::vector<double>& sup, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = sub[i] / diag[i - 1];
        diag[i] -= m * sup[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

struct Axis {
    int n = 0;       // node count
    double h = 0.0;
    double lo = 0.0;
    std::vector<double> x, w;  // nodes and cell widths
    std::vector<double> cell_lo, cell_hi;
};

Axis make_axis(double lo, double hi, int cells) {
    Axis a;
    a.n = cells + 1;
    a.h = (hi - lo) / cells;
    a.lo = lo;
    a.x.resize(a.n);
    a.w.resize(a.n);
    a.cell_lo.resize(a.n);
    a.cell_hi.resize(a.n);
    for (int i = 0; i < a.n; ++i) {
        a.x[i] = lo + i * a.h;
        a.cell_lo[i] = std::max(lo, a.x[i] - a.h / 2);
        a.cell_hi[i] = std::min(hi, a.x[i] + a.h / 2);
        a.w[i] = a.cell_hi[i] - a.cell_lo[i];
    }
    return a;
}

double pow_int(double x, int p) {
    double r = 1.0;
    for (int k = 0; k < p; ++k) r *= x;
    return r;
}

// int_a^b x^p dx
double monomial_integral(double a, double b, int p) {
    return (pow_int(b, p + 1) - pow_int(a, p + 1)) / (p + 1);
}

// Exact monomial x^px y^py integral over a convex polygon, by fan
// triangulation and Gauss rules exact for the polynomial degree.
double polygon_monomial_integral(const std::vector<Vec>& poly, int px, int py) {
    if (poly.size() < 3) return 0.0;
    static const int kG = 6;  // exact through degree 10 with the Duffy factor
    static double gx[kG], gw[kG];
    static bool init = false;
    if (!init) {
        // Gauss-Legendre on [0,1], 6 points
        const double xs[kG] = {0.03376524289842399, 0.16939530676686776,
                               0.38069040695840155, 0.61930959304159845,
                               0.83060469323313224, 0.96623475710157601};
        const double ws[kG] = {0.08566224618958517, 0.18038078652406930,
                               0.23395696728634552, 0.23395696728634552,
                               0.18038078652406930, 0.08566224618958517};
        for (int i = 0; i < kG; ++i) {
            gx[i] = xs[i];
            gw[i] = ws[i];
        }
        init = true;
    }
    double total = 0.0;
    const Vec& v0 = poly[0];
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        const Vec& v1 = poly[k];
        const Vec& v2 = poly[k + 1];
        const double jac = (v1[0] - v0[0]) * (v2[1] - v0[1]) -
                           (v2[0] - v0[0]) * (v1[1] - v0[1]);
        double s = 0.0;
        for (int i = 0; i < kG; ++i)
            for (int j = 0; j < kG; ++j) {
                const double u = gx[i];
                const double v = gx[j] * (1.0 - u);
                const double x = v0[0] + u * (v1[0] - v0[0]) + v * (v2[0] - v0[0]);
                const double y = v0[1] + u * (v1[1] - v0[1]) + v * (v2[1] - v0[1]);
                s += gw[i] * gw[j] * (1.0 - u) * pow_int(x, px) * pow_int(y, py);
            }
        total += jac * s;
    }
    return total;
}

std::vector<Vec> clip_to_rect(std::vector<Vec> poly, double xlo, double xhi,
                              double ylo, double yhi) {
    auto clip = [](const std::vector<Vec>& in, auto inside, auto intersect) {
        std::vector<Vec> out;
        const std::size_t m = in.size();
        for (std::size_t i = 0; i < m; ++i) {
            const Vec& a = in[i];
            const Vec& b = in[(i + 1) % m];
            const bool ia = inside(a), ib = inside(b);
            if (ia) out.push_back(a);
            if (ia != ib) out.push_back(intersect(a, b));
        }
        return out;
    };
    auto lerp = [](const Vec& a, const Vec& b, double t) -> Vec {
        return {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
    };
    poly = clip(poly, [&](const Vec& p) { return p[0] >= xlo; },
                [&](const Vec& a, const Vec& b) { return lerp(a, b, (xlo - a[0]) / (b[0] - a[0])); });
    if (poly.empty()) return poly;
    poly = clip(poly, [&](const Vec& p) { return p[0] <= xhi; },
                [&](const Vec& a, const Vec& b) { return lerp(a, b, (xhi - a[0]) / (b[0] - a[0])); });
    if (poly.empty()) return poly;
    poly = clip(poly, [&](const Vec& p) { return p[1] >= ylo; },
                [&](const Vec& a, const Vec& b) { return lerp(a, b, (ylo - a[1]) / (b[1] - a[1])); });
    if (poly.empty()) return poly;
    poly = clip(poly, [&](const Vec& p) { return p[1] <= yhi; },
                [&](const Vec& a, const Vec& b) { return lerp(a, b, (yhi - a[1]) / (b[1] - a[1])); });
    return poly;
}

double min_region_extent(const SourceSpec& spec, int dim) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& comp : spec.components) {
        if (dim == 1) {
            m = std::min(m, comp.region[1][0] - comp.region[0][0]);
        } else {
            double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
            for (const Vec& v : comp.region) {
                xlo = std::min(xlo, v[0]);
                xhi = std::max(xhi, v[0]);
                ylo = std::min(ylo, v[1]);
                yhi = std::max(yhi, v[1]);
            }
            m = std::min({m, xhi - xlo, yhi - ylo});
        }
    }
    return m;
}

// Per-node, per-(px[,py]) spatial integrals of the source region overlap.
struct RasterTables {
    // key: (component, term) -> flattened per-node integral of the spatial
    // monomial over cell ∩ region
    std::vector<std::vector<std::vector<double>>> spatial;  // [comp][term][node]
};

RasterTables build_raster(const SourceSpec& spec, const Axis& ax, const Axis* ay) {
    RasterTables rt;
    rt.spatial.resize(spec.components.size());
    for (std::size_t ci = 0; ci < spec.components.size(); ++ci) {
        const auto& comp = spec.components[ci];
        rt.spatial[ci].resize(comp.density.terms.size());
        for (std::size_t ti = 0; ti < comp.density.terms.size(); ++ti) {
            const auto& term = comp.density.terms[ti];
            if (ay == nullptr) {
                const double a = comp.region[0][0], b = comp.region[1][0];
                auto& tab = rt.spatial[ci][ti];
                tab.assign(ax.n, 0.0);
                for (int i = 0; i < ax.n; ++i) {
                    const double lo = std::max(ax.cell_lo[i], a);
                    const double hi = std::min(ax.cell_hi[i], b);
                    if (hi > lo) tab[i] = monomial_integral(lo, hi, term.px);
                }
            } else {
                auto& tab = rt.spatial[ci][ti];
                tab.assign(static_cast<std::size_t>(ax.n) * ay->n, 0.0);
                for (int j = 0; j < ay->n; ++j)
                    for (int i = 0; i < ax.n; ++i) {
                        auto cell = clip_to_rect(comp.region, ax.cell_lo[i], ax.cell_hi[i],
                                                 ay->cell_lo[j], ay->cell_hi[j]);
                        if (cell.size() >= 3)
                            tab[static_cast<std::size_t>(j) * ax.n + i] =
                                polygon_monomial_integral(cell, term.px, term.py);
                    }
            }
        }
    }
    return rt;
}

// Step-averaged source at every node for [t0, t1].
void fill_source_step(const SourceSpec& spec, const RasterTables& rt,
                      const std::vector<double>& node_weight, double t0, double t1,
                      std::vector<double>& f) {
    std::fill(f.begin(), f.end(), 0.0);
    const double dt = t1 - t0;
    for (std::size_t ci = 0; ci < spec.components.size(); ++ci) {
        const auto& comp = spec.components[ci];
        const double a = std::max(t0, comp.onset);
        const double b = std::min(t1, comp.active_until);
        if (b <= a) continue;
        for (std::size_t ti = 0; ti < comp.density.terms.size(); ++ti) {
            const auto& term = comp.density.terms[ti];
            const double tint = term.coeff * monomial_integral(a, b, term.pt);
            const auto& tab = rt.spatial[ci][ti];
            for (std::size_t n = 0; n < f.size(); ++n)
                if (tab[n] != 0.0) f[n] += tab[n] * tint / (node_weight[n] * dt);
        }
    }
}

struct Operator1D {
    // Crank-Nicolson matrices for one axis: M1 = I - dt/2 L, M2 = I + dt/2 L.
    std::vector<double> m1_sub, m1_diag, m1_sup;
    std::vector<double> l_sub, l_diag, l_sup;  // the Laplacian rows themselves
    bool dirichlet = false;
};

Operator1D make_operator(int n, double h, double half_dt, BoundaryCondition bc) {
    Operator1D op;
    op.dirichlet = bc == BoundaryCondition::dirichlet0;
    op.l_sub.assign(n, 1.0 / (h * h));
    op.l_sup.assign(n, 1.0 / (h * h));
    op.l_diag.assign(n, -2.0 / (h * h));
    if (op.dirichlet) {
        op.l_diag[0] = op.l_diag[n - 1] = 0.0;
        op.l_sup[0] = 0.0;
        op.l_sub[n - 1] = 0.0;
    } else {
        op.l_sup[0] = 2.0 / (h * h);
        op.l_sub[n - 1] = 2.0 / (h * h);
    }
    op.m1_sub.resize(n);
    op.m1_diag.resize(n);
    op.m1_sup.resize(n);
    for (int i = 0; i < n; ++i) {
        op.m1_sub[i] = -half_dt * op.l_sub[i];
        op.m1_diag[i] = 1.0 - half_dt * op.l_diag[i];
        op.m1_sup[i] = -half_dt * op.l_sup[i];
    }
    return op;
}

// y = L u along a contiguous stride-1 line.
void apply_l(const Operator1D& op, const double* u, double* y, int n) {
    y[0] = op.l_diag[0] * u[0] + op.l_sup[0] * u[1];
    for (int i = 1; i < n - 1; ++i)
        y[i] = op.l_sub[i] * u[i - 1] + op.l_diag[i] * u[i] + op.l_sup[i] * u[i + 1];
    y[n - 1] = op.l_sub[n - 1] * u[n - 2] + op.l_diag[n - 1] * u[n - 1];
}

double one_sided_normal_derivative(const std::vector<double>& u, std::size_t i0,
                                   std::ptrdiff_t stride, double h) {
    // second-order 3-point stencil into the interior; already signed as d/dnu
    return (3.0 * u[i0] - 4.0 * u[i0 + stride] + u[i0 + 2 * stride]) / (2.0 * h);
}

} // namespace

double FieldSnapshot::integral_u_final() const {
    double s = 0.0;
    for (std::size_t i = 0; i < u_final.size(); ++i) s += weights[i] * u_final[i];
    return s;
}

namespace {

using SourceFiller = std::function<void(double, double, std::vector<double>&)>;

SolveResult run_solve(const SpatialDomain& domain, const Grid& grid,
                      BoundaryCondition bc, double T, const SolveOptions& opts,
                      const SourceFiller& fill_step) {
    const Axis ax = make_axis(domain.xb[0], domain.xb[1], grid.nx);
    const bool two_d = domain.dim == 2;
    const Axis ay = two_d ? make_axis(domain.yb[0], domain.yb[1], grid.ny)
                          : Axis{};
    const int X = ax.n;
    const int Y = two_d ? ay.n : 1;
    const std::size_t N = static_cast<std::size_t>(X) * Y;
    const double dt = grid.dt;

    std::vector<double> u(N, 0.0), f(N, 0.0), rhs(N), tmp(N);

    SolveResult res;
    res.boundary.dim = domain.dim;
    res.boundary.T = T;
    res.boundary.nt = grid.nt;
    res.boundary.bc = bc;
    res.boundary.times.resize(grid.nt + 1);
    for (int k = 0; k <= grid.nt; ++k) res.boundary.times[k] = k * dt;
    if (two_d) {
        res.boundary.nodes =
            make_rectangle(domain.xb[0], domain.xb[1], domain.yb[0], domain.yb[1],
                           grid.nx, grid.ny)
                .boundary_nodes;
    } else {
        res.boundary.nodes = make_interval(domain.xb[0], domain.xb[1]).boundary_nodes;
    }
    const std::size_t nb = res.boundary.nodes.size();
    res.boundary.dirichlet.assign(nb, std::vector<double>(grid.nt + 1, 0.0));
    res.boundary.neumann.assign(nb, std::vector<double>(grid.nt + 1, 0.0));

    // node -> flat index for trace extraction
    std::vector<std::size_t> node_index(nb);
    for (std::size_t bn = 0; bn < nb; ++bn) {
        const Vec& p = res.boundary.nodes[bn].x;
        const int i = static_cast<int>(std::lround((p[0] - ax.lo) / ax.h));
        const int j = two_d ? static_cast<int>(std::lround((p[1] - ay.lo) / ay.h)) : 0;
        node_index[bn] = static_cast<std::size_t>(j) * X + i;
    }

    auto record_traces = [&](int k) {
        for (std::size_t bn = 0; bn < nb; ++bn) {
            const std::size_t id = node_index[bn];
            res.boundary.dirichlet[bn][k] = u[id];
            if (bc == BoundaryCondition::neumann0) continue;  // trace 0 by construction
            const Vec& nu = res.boundary.nodes[bn].normal;
            double d = 0.0;
            if (!two_d) {
                d = nu[0] < 0 ? one_sided_normal_derivative(u, 0, +1, ax.h)
                              : one_sided_normal_derivative(u, N - 1, -1, ax.h);
            } else {
                if (nu[0] < -0.5) d = one_sided_normal_derivative(u, id, +1, ax.h);
                else if (nu[0] > 0.5) d = one_sided_normal_derivative(u, id, -1, ax.h);
                else if (nu[1] < -0.5) d = one_sided_normal_derivative(u, id, +X, ay.h);
                else d = one_sided_normal_derivative(u, id, -X, ay.h);
            }
            res.boundary.neumann[bn][k] = d;
        }
    };

    auto pin_dirichlet = [&](std::vector<double>& v) {
        if (bc != BoundaryCondition::dirichlet0) return;
        if (!two_d) {
            v[0] = v[N - 1] = 0.0;
        } else {
            for (int i = 0; i < X; ++i) {
                v[i] = 0.0;
                v[static_cast<std::size_t>(Y - 1) * X + i] = 0.0;
            }
            for (int j = 0; j < Y; ++j) {
                v[static_cast<std::size_t>(j) * X] = 0.0;
                v[static_cast<std::size_t>(j) * X + (X - 1)] = 0.0;
            }
        }
    };

    record_traces(0);
    if (opts.store_history) res.snapshot.history.push_back(u);

    if (!two_d) {
        Operator1D op = make_operator(X, ax.h, dt / 2, bc);
        std::vector<double> lu(N);
        for (int k = 0; k < grid.nt; ++k) {
            fill_step(k * dt, (k + 1) * dt, f);
            pin_dirichlet(f);
            apply_l(op, u.data(), lu.data(), X);
            for (std::size_t i = 0; i < N; ++i)
                rhs[i] = u[i] + dt / 2 * lu[i] + dt * f[i];
            pin_dirichlet(rhs);
            std::vector<double> sub = op.m1_sub, diag = op.m1_diag, sup = op.m1_sup;
            solve_tridiag(sub, diag, sup, rhs);
            u = rhs;
            pin_dirichlet(u);
            record_traces(k + 1);
            if (opts.store_history) res.snapshot.history.push_back(u);
        }
    } else {
        // Peaceman-Rachford ADI
        Operator1D opx = make_operator(X, ax.h, dt / 2, bc);
        Operator1D opy = make_operator(Y, ay.h, dt / 2, bc);
        std::vector<double> line_u(std::max(X, Y)), line_l(std::max(X, Y));
        for (int k = 0; k < grid.nt; ++k) {
            fill_step(k * dt, (k + 1) * dt, f);
            pin_dirichlet(f);
            // half step 1: implicit in x
            for (int j = 0; j < Y; ++j) {
                for (int i = 0; i < X; ++i) line_u[i] = u[static_cast<std::size_t>(j) * X + i];
                // no direct column access: apply Ly via neighbors
                for (int i = 0; i < X; ++i) {
                    const std::size_t id = static_cast<std::size_t>(j) * X + i;
                    double ly;
                    if (j == 0)
                        ly = opy.l_diag[0] * u[id] + opy.l_sup[0] * u[id + X];
                    else if (j == Y - 1)
                        ly = opy.l_sub[Y - 1] * u[id - X] + opy.l_diag[Y - 1] * u[id];
                    else
                        ly = (u[id - X] - 2.0 * u[id] + u[id + X]) / (ay.h * ay.h);
                    rhs[id] = u[id] + dt / 2 * ly + dt / 2 * f[id];
                }
            }
            pin_dirichlet(rhs);
            for (int j = 0; j < Y; ++j) {
                std::vector<double> sub = opx.m1_sub, diag = opx.m1_diag, sup = opx.m1_sup;
                std::vector<double> r(X);
                for (int i = 0; i < X; ++i) r[i] = rhs[static_cast<std::size_t>(j) * X + i];
                solve_tridiag(sub, diag, sup, r);
                for (int i = 0; i < X; ++i) tmp[static_cast<std::size_t>(j) * X + i] = r[i];
            }
            pin_dirichlet(tmp);
            // half step 2: implicit in y
            for (int j = 0; j < Y; ++j) {
                for (int i = 0; i < X; ++i) line_u[i] = tmp[static_cast<std::size_t>(j) * X + i];
                apply_l(opx, line_u.data(), line_l.data(), X);
                for (int i = 0; i < X; ++i) {
                    const std::size_t id = static_cast<std::size_t>(j) * X + i;
                    rhs[id] = tmp[id] + dt / 2 * line_l[i] + dt / 2 * f[id];
                }
            }
            pin_dirichlet(rhs);
            for (int i = 0; i < X; ++i) {
                std::vector<double> sub = opy.m1_sub, diag = opy.m1_diag, sup = opy.m1_sup;
                std::vector<double> r(Y);
                for (int j = 0; j < Y; ++j) r[j] = rhs[static_cast<std::size_t>(j) * X + i];
                solve_tridiag(sub, diag, sup, r);
                for (int j = 0; j < Y; ++j) u[static_cast<std::size_t>(j) * X + i] = r[j];
            }
            pin_dirichlet(u);
            record_traces(k + 1);
            if (opts.store_history) res.snapshot.history.push_back(u);
        }
    }

    res.snapshot.dim = domain.dim;
    res.snapshot.T = T;
    res.snapshot.xs = ax.x;
    if (two_d) res.snapshot.ys = ay.x;
    res.snapshot.u_final = u;
    res.snapshot.weights.resize(N);
    for (int j = 0; j < Y; ++j)
        for (int i = 0; i < X; ++i)
            res.snapshot.weights[static_cast<std::size_t>(j) * X + i] =
                ax.w[i] * (two_d ? ay.w[j] : 1.0);
    return res;
}

} // namespace

SolveResult solve_forward(const SpatialDomain& domain, const SourceSpec& spec,
                          const Grid& grid, BoundaryCondition bc, double T,
                          const SolveOptions& opts) {
    validate(spec, domain.dim);
    if (!spec.components.empty()) {
        const double ext = min_region_extent(spec, domain.dim);
        const double hmax = std::max(grid.hx, domain.dim == 2 ? grid.hy : 0.0);
        if (hmax > ext / 8 + 1e-12)
            throw GateError("grid does not resolve the source: need h <= " +
                            std::to_string(ext / 8));
    }

    const Axis ax = make_axis(domain.xb[0], domain.xb[1], grid.nx);
    const Axis ay = domain.dim == 2 ? make_axis(domain.yb[0], domain.yb[1], grid.ny)
                                    : Axis{};
    const RasterTables rt = build_raster(spec, ax, domain.dim == 2 ? &ay : nullptr);
    std::vector<double> node_weight;
    const int X = ax.n, Y = domain.dim == 2 ? ay.n : 1;
    node_weight.resize(static_cast<std::size_t>(X) * Y);
    for (int j = 0; j < Y; ++j)
        for (int i = 0; i < X; ++i)
            node_weight[static_cast<std::size_t>(j) * X + i] =
                ax.w[i] * (domain.dim == 2 ? ay.w[j] : 1.0);

    auto filler = [&](double t0, double t1, std::vector<double>& f) {
        fill_source_step(spec, rt, node_weight, t0, t1, f);
    };
    return run_solve(domain, grid, bc, T, opts, filler);
}

SolveResult solve_forward_custom(const SpatialDomain& domain,
                                 const std::function<double(const Vec&, double)>& f_fn,
                                 const Grid& grid, BoundaryCondition bc, double T,
                                 const SolveOptions& opts) {
    const Axis ax = make_axis(domain.xb[0], domain.xb[1], grid.nx);
    const Axis ay = domain.dim == 2 ? make_axis(domain.yb[0], domain.yb[1], grid.ny)
                                    : Axis{};
    const int X = ax.n, Y = domain.dim == 2 ? ay.n : 1;
    auto filler = [&, X, Y](double t0, double t1, std::vector<double>& f) {
        const double tm = (t0 + t1) / 2;
        for (int j = 0; j < Y; ++j)
            for (int i = 0; i < X; ++i) {
                Vec p = domain.dim == 2 ? Vec{ax.x[i], ay.x[j]} : Vec{ax.x[i]};
                f[static_cast<std::size_t>(j) * X + i] = f_fn(p, tm);
            }
    };
    return run_solve(domain, grid, bc, T, opts, filler);
}

double manufactured_solution_check(const Grid& grid, int dim) {
    const double pi = M_PI;
    SpatialDomain domain = dim == 2 ? make_rectangle(0, 1, 0, 1, grid.nx, grid.ny)
                                    : make_interval(0, 1);
    auto f = [&](const Vec& x, double t) {
        const double sx = dim == 2 ? std::sin(pi * x[0]) * std::sin(pi * x[1])
                                   : std::sin(pi * x[0]);
        const double lam = dim == 2 ? 2 * pi * pi : pi * pi;
        return sx * (std::exp(-t) + lam * (1.0 - std::exp(-t)));
    };
    auto res = solve_forward_custom(domain, f, grid, BoundaryCondition::dirichlet0, grid.T);
    double err = 0.0;
    const int X = grid.nx + 1, Y = dim == 2 ? grid.ny + 1 : 1;
    for (int j = 0; j < Y; ++j)
        for (int i = 0; i < X; ++i) {
            const double sx = dim == 2
                                  ? std::sin(pi * res.snapshot.xs[i]) *
                                        std::sin(pi * res.snapshot.ys[j])
                                  : std::sin(pi * res.snapshot.xs[i]);
            const double exact = sx * (1.0 - std::exp(-grid.T));
            err = std::max(err, std::abs(res.snapshot.u_final[static_cast<std::size_t>(j) * X + i] - exact));
        }
    return err;
}

} // namespace heatenc
