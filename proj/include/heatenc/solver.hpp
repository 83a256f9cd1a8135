#pragma once

#include <functional>
#include <string>
#include <vector>

#include "heatenc/geometry.hpp"

namespace heatenc {

enum class BoundaryCondition { dirichlet0, neumann0 };

std::string to_string(BoundaryCondition bc);
BoundaryCondition parse_boundary_condition(const std::string& s);

struct Grid {
    int nx = 0, ny = 0;       // cell counts per axis (ny = 0 for dim=1)
    double hx = 0.0, hy = 0.0;
    int nt = 0;
    double dt = 0.0;
    double T = 0.0;
};

Grid make_grid(const SpatialDomain& domain, int nx, int ny, int nt, double T);

// Lateral Cauchy data: Dirichlet and Neumann traces on the domain's boundary
// nodes at every time level t_k = k dt.
struct BoundaryData {
    int dim = 1;
    double T = 0.0;
    int nt = 0;
    std::vector<double> times;                  // size nt+1
    std::vector<BoundaryNode> nodes;
    std::vector<std::vector<double>> dirichlet;  // [node][k]
    std::vector<std::vector<double>> neumann;    // [node][k]
    BoundaryCondition bc = BoundaryCondition::neumann0;
};

// Interior field retained at t = T (and optionally at all times).
struct FieldSnapshot {
    int dim = 1;
    double T = 0.0;
    std::vector<double> xs, ys;      // node coordinates per axis
    std::vector<double> weights;     // quadrature weight per node (flattened)
    std::vector<double> u_final;     // u(., T), flattened row-major (iy*X+ix)
    std::vector<std::vector<double>> history;  // optional, one entry per time level

    double integral_u_final() const;
};

struct SolveOptions {
    bool store_history = false;
};

struct SolveResult {
    BoundaryData boundary;
    FieldSnapshot snapshot;
};

// Crank-Nicolson forward solve of u_t = laplacian u + f with u(.,0)=0.
// dim=1 tridiagonal direct solve; dim=2 Peaceman-Rachford ADI.
// The source is rasterized with exact cell-overlap fractions in space and
// exact sub-step overlap in time at each onset.
SolveResult solve_forward(const SpatialDomain& domain, const SourceSpec& spec,
                          const Grid& grid, BoundaryCondition bc, double T,
                          const SolveOptions& opts = {});

// Same scheme driven by a pointwise source (midpoint-in-time sampling); used
// by the manufactured-solution verification.
SolveResult solve_forward_custom(const SpatialDomain& domain,
                                 const std::function<double(const Vec&, double)>& f,
                                 const Grid& grid, BoundaryCondition bc, double T,
                                 const SolveOptions& opts = {});

// L-inf error at t = T against u* = sin(pi x)(1 - e^{-t}) (dim=1) or
// sin(pi x) sin(pi y)(1 - e^{-t}) (dim=2) on the unit domain, dirichlet0.
double manufactured_solution_check(const Grid& grid, int dim);

} // namespace heatenc
