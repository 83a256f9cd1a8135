#pragma once

// Independent cross-check helpers shared by the test binaries.  Everything
// here is deliberately dumb and slow: brute-force maxima, plain stencils,
// dense rasterization.

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include "heatenc/geometry.hpp"
#include "heatenc/probes.hpp"

namespace testing_oracles {

using heatenc::Vec;

// Relative PDE residual |v_t + laplacian v| / (sqrt(tau) |v|) of a probe at
// (x, t), via 5-point stencils on the log-magnitude L and phase P:
// residual / v = L_t + i P_t + lap L + i lap P + (grad L + i grad P)^2.
inline double probe_pde_residual(const heatenc::ProbeField& probe, const Vec& x,
                                 double t, double h_space, double h_time = 1e-4) {
    auto d1 = [](const std::function<double(double)>& f, double h) {
        return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
    };
    auto d2 = [](const std::function<double(double)>& f, double h) {
        return (-f(2 * h) + 16 * f(h) - 30 * f(0) + 16 * f(-h) - f(-2 * h)) /
               (12 * h * h);
    };

    std::complex<double> res(0.0, 0.0);
    // time derivative
    res += std::complex<double>(
        d1([&](double dt) { return probe.log_magnitude(x, t + dt); }, h_time),
        d1([&](double dt) { return probe.phase(x, t + dt); }, h_time));
    // spatial part
    std::complex<double> grad2(0.0, 0.0);
    for (int axis = 0; axis < probe.dim; ++axis) {
        auto shift = [&](double dx) {
            Vec y = x;
            y[axis] += dx;
            return y;
        };
        res += std::complex<double>(
            d2([&](double dx) { return probe.log_magnitude(shift(dx), t); }, h_space),
            d2([&](double dx) { return probe.phase(shift(dx), t); }, h_space));
        const std::complex<double> g(
            d1([&](double dx) { return probe.log_magnitude(shift(dx), t); }, h_space),
            d1([&](double dx) { return probe.phase(shift(dx), t); }, h_space));
        grad2 += g * g;
    }
    res += grad2;
    return std::abs(res) / std::sqrt(probe.tau);
}

// Dense rasterization of the source prisms as space-time points.
inline std::vector<Vec> rasterize_source(const heatenc::SourceSpec& spec, int per_axis) {
    std::vector<Vec> pts;
    for (const auto& comp : spec.components) {
        const int dim = static_cast<int>(comp.region[0].size());
        Vec lo(dim, 1e300), hi(dim, -1e300);
        for (const Vec& v : comp.region)
            for (int d = 0; d < dim; ++d) {
                lo[d] = std::min(lo[d], v[d]);
                hi[d] = std::max(hi[d], v[d]);
            }
        auto inside = [&](const Vec& x) {
            if (dim == 1) return x[0] >= lo[0] && x[0] <= hi[0];
            // convex polygon, ccw
            const std::size_t m = comp.region.size();
            for (std::size_t i = 0; i < m; ++i) {
                const Vec& a = comp.region[i];
                const Vec& b = comp.region[(i + 1) % m];
                if ((b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0]) < -1e-12)
                    return false;
            }
            return true;
        };
        for (int i = 0; i <= per_axis; ++i)
            for (int j = 0; j <= (dim == 2 ? per_axis : 0); ++j)
                for (int k = 0; k <= per_axis; ++k) {
                    Vec x(dim);
                    x[0] = lo[0] + (hi[0] - lo[0]) * i / per_axis;
                    if (dim == 2) x[1] = lo[1] + (hi[1] - lo[1]) * j / per_axis;
                    if (!inside(x)) continue;
                    Vec pt = x;
                    pt.push_back(comp.onset +
                                 (comp.active_until - comp.onset) * k / per_axis);
                    pts.push_back(std::move(pt));
                }
    }
    return pts;
}

inline double containment_fraction(const heatenc::SpaceTimePolytope& poly,
                                   const std::vector<Vec>& pts, double tol = 1e-9) {
    if (pts.empty()) return 0.0;
    std::size_t in = 0;
    for (const auto& p : pts)
        if (poly.contains(p, tol)) ++in;
    return static_cast<double>(in) / pts.size();
}

// Brute-force support function over the rasterized prism.
inline double brute_support(const heatenc::SourceSpec& spec,
                            const heatenc::SpaceTimeDirection& dir, int per_axis = 40) {
    double best = -1e300;
    for (const auto& pt : rasterize_source(spec, per_axis))
        best = std::max(best, heatenc::dot(pt, dir.vec));
    return best;
}

// The reference scenario: 1D, Omega = [0,1], D = [0.4, 0.6] x [0.25, 1].
inline heatenc::SourceSpec reference_source(double onset = 0.25, double T = 1.0) {
    heatenc::SourceSpec spec;
    heatenc::SourceComponent comp;
    comp.region = {{0.4}, {0.6}};
    comp.onset = onset;
    comp.active_until = T;
    comp.density = heatenc::Polynomial::constant(1.0);
    spec.components.push_back(comp);
    return spec;
}

inline std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(n);
    for (int k = 0; k < n; ++k)
        g[k] = lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
    return g;
}

} // namespace testing_oracles
