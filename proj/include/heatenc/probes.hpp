#pragma once

#include <optional>
#include <string>

#include "heatenc/geometry.hpp"
#include "heatenc/logcomplex.hpp"

namespace heatenc {

enum class ProbeKind { real, complex2d, complex1d, radial };

std::string to_string(ProbeKind k);

// Closed-form backward-heat probe v (v_t + laplacian v = 0), evaluated in
// log-polar form (log-magnitude, phase) so tau*T exponents up to ~1e3 never
// leave the log domain.
struct ProbeField {
    ProbeKind kind = ProbeKind::real;
    int dim = 1;
    double tau = 1.0;
    Vec omega;        // unit, R^n (real / complex2d)
    Vec omega_perp;   // unit, orthogonal to omega (complex2d)
    double c = 0.0;   // complex kinds
    Vec p;            // radial kind: center outside the domain closure
    int sign = +1;    // radial kind
    bool asymptotic = false;  // radial dim=2: leading order only

    double log_magnitude(const Vec& x, double t) const;
    double phase(const Vec& x, double t) const;
    // Spatial gradients of log-magnitude and phase.
    void gradients(const Vec& x, Vec& grad_log, Vec& grad_phase) const;

    LogComplex value(const Vec& x, double t) const {
        return {log_magnitude(x, t), phase(x, t)};
    }

    // sqrt(1 - 1/(c^2 tau)) for complex kinds.
    double b_factor() const;
    // z . z as a complex number (complex kinds).
    std::complex<double> z_dot_z() const;
};

// v = exp(sqrt(tau) x.omega - tau t).
ProbeField real_probe(const Vec& omega, double tau);

// dim=2: z = c tau (omega + i b omega_perp); v = exp(-(z.z) t) exp(x.z).
// omega_perp defaults to the counter-clockwise rotation of omega.
ProbeField complex_probe(const Vec& omega, std::optional<Vec> omega_perp,
                         double c, double tau);

// dim=1: z = c tau (1 + i b).
ProbeField complex_probe_1d(double c, double tau);

// Leading-order radial probe v_± = e^{-tau t} e^{±sqrt(tau)|x-p|} |x-p|^{-(n-1)/2}.
// Exact for dim=1; asymptotic (flagged) for dim=2.
ProbeField radial_probe(const Vec& p, int sign, double tau, const SpatialDomain& domain);

} // namespace heatenc
