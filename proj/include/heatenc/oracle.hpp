#pragma once

#include <complex>
#include <string>
#include <vector>

#include "heatenc/geometry.hpp"
#include "heatenc/indicator.hpp"
#include "heatenc/probes.hpp"
#include "heatenc/solver.hpp"

namespace heatenc {

// ---------------------------------------------------------------------------
// Volume-integral representation of the indicator (independent ground truth
// for the boundary quadrature): e^{tau s}(iint f v - int u(.,T) v(.,T)).
// ---------------------------------------------------------------------------

IndicatorSample volume_indicator(const SourceSpec& spec, const FieldSnapshot& snapshot,
                                 const ProbeField& probe, double s);

// First term alone: e^{tau s} iint f v by exact-prism Gauss quadrature.
LogComplex volume_source_term(const SourceSpec& spec, const ProbeField& probe, double s);

// ---------------------------------------------------------------------------
// Closed-form cone/segment asymptotics.
// ---------------------------------------------------------------------------

// Finite cone with vertex p and base Q on the plane y.omega(c) = p.omega(c) - delta.
// Base is a segment (n=1, two base points) or a triangle (n=2, three).
struct ConeSpec {
    Vec vertex;                 // p in R^{n+1}
    std::vector<Vec> base;      // base vertices on the offset plane
    double delta = 0.0;
    SpaceTimeDirection dir;     // omega(c)
};

// Throws ValidationError unless every base vertex sits on the offset plane
// (1e-10) and the base has positive measure.
void validate(const ConeSpec& cone);

struct KDValue {
    std::complex<double> value;
    std::string method;       // "quadrature" | "closed_form"
    double residual = 0.0;    // closed form: projection residual of K_D * theta
};

// int_0^inf xi^n e^{-xi} e^{i a xi} dxi = n!/(1 - i a)^{n+1},  n <= 20.
std::complex<double> cone_moment(int n, double a);
// Adaptive-quadrature realization of the same integral (cross-check path).
std::complex<double> cone_moment_quadrature(int n, double a);

// K_D = 2 delta int_Q dS / (delta sqrt(c^2+1)/c - i (y-p).(omega_perp,0))^{n+1},
// triangle base (n=2), Gauss quadrature with subdivision refinement.
KDValue kd_quadrature(const ConeSpec& cone, const Vec& omega_perp);

// K_D from the lateral-face normal identity (n=2 tetrahedra): the vertex
// ordering is searched so the three cross-product sign conditions hold, the
// resulting 3-vector identity K_D * theta = rhs is solved by complex least
// squares, and the projection residual is reported.
KDValue kd_closed_form(const ConeSpec& cone, const Vec& omega_perp);

// Scaled cone integral (2/n!)(c tau)^{n+1} e^{-sqrt(c^2+1) tau p.omega(c)}
// e^{-i c tau b p.(omega_perp,0)} int_D v -> K_D as tau -> inf (n=2).
std::complex<double> scaled_cone_integral(const ConeSpec& cone, const Vec& omega_perp,
                                          double tau);

// Segment formulas for the n=1 case, B(y,tau) = (c/delta)(y-p).(1,-2 c tau) b.
struct SegmentIntegrals {
    std::complex<double> j1;  // int_Q dS / (sqrt(c^2+1) - i B(y))^2
    std::complex<double> j2;  // int_Q 2 grad_rho.(y-p) / (sqrt(c^2+1) - i B(y))^3
};

SegmentIntegrals segment_integrals(const Vec& y0, const Vec& y1, const Vec& p,
                                   const Vec& grad_rho, double c, double delta,
                                   double tau);
double segment_b_factor(const Vec& y, const Vec& p, double c, double delta, double tau);

// ---------------------------------------------------------------------------
// Lower/upper band of the onset-window volume integral.
// ---------------------------------------------------------------------------

struct BandReport {
    double k1 = 0.0, k2 = 0.0, k3 = 0.0, k4 = 0.0;
    bool holds = false;
    double lower_residual_spread = 0.0;  // spread of the sqrt(tau)-model residuals
    double upper_residual_spread = 0.0;
    double delta = 0.0;
    double p = 0.0;
    std::vector<double> tau_grid;
    std::vector<double> log_values;  // log of e^{tau T0} |integral| per tau
};

// Computes e^{tau T0} |int_{D cap [T0, T0+delta]} rho v| over the tau grid and
// fits the envelope K1 e^{sqrt(tau) K2} tau^{-(p+1)} <= . <= K3 e^{sqrt(tau) K4}.
// Throws ValidationError if the density changes sign near onset.
BandReport lemma31_band(const SourceSpec& spec, const Vec& omega,
                        const std::vector<double>& tau_grid);

} // namespace heatenc
