#include "heatenc/probes.hpp"

#include <cmath>

#include "heatenc/errors.hpp"

namespace heatenc {

std::string to_string(ProbeKind k) {
    switch (k) {
        case ProbeKind::real: return "real";
        case ProbeKind::complex2d: return "complex2d";
        case ProbeKind::complex1d: return "complex1d";
        case ProbeKind::radial: return "radial";
    }
    return "?";
}

double ProbeField::b_factor() const {
    return std::sqrt(1.0 - 1.0 / (c * c * tau));
}

std::complex<double> ProbeField::z_dot_z() const {
    if (kind == ProbeKind::complex2d) return {tau, 0.0};
    // n=1: z.z = tau + i 2 c^2 tau^2 b
    return {tau, 2.0 * c * c * tau * tau * b_factor()};
}

double ProbeField::log_magnitude(const Vec& x, double t) const {
    switch (kind) {
        case ProbeKind::real:
            return std::sqrt(tau) * dot(x, omega) - tau * t;
        case ProbeKind::complex2d:
            // Re(z.z) = tau exactly
            return c * tau * dot(x, omega) - tau * t;
        case ProbeKind::complex1d:
            return c * tau * x[0] - tau * t;
        case ProbeKind::radial: {
            double r2 = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i)
                r2 += (x[i] - p[i]) * (x[i] - p[i]);
            const double r = std::sqrt(r2);
            return -tau * t + sign * std::sqrt(tau) * r -
                   0.5 * (dim - 1) * std::log(r);
        }
    }
    return 0.0;
}

double ProbeField::phase(const Vec& x, double t) const {
    switch (kind) {
        case ProbeKind::real:
        case ProbeKind::radial:
            return 0.0;
        case ProbeKind::complex2d:
            return c * tau * b_factor() * dot(x, omega_perp);
        case ProbeKind::complex1d:
            return c * tau * b_factor() * (x[0] - 2.0 * c * tau * t);
    }
    return 0.0;
}

void ProbeField::gradients(const Vec& x, Vec& grad_log, Vec& grad_phase) const {
    grad_log.assign(dim, 0.0);
    grad_phase.assign(dim, 0.0);
    switch (kind) {
        case ProbeKind::real:
            for (int i = 0; i < dim; ++i) grad_log[i] = std::sqrt(tau) * omega[i];
            break;
        case ProbeKind::complex2d: {
            const double b = b_factor();
            for (int i = 0; i < dim; ++i) {
                grad_log[i] = c * tau * omega[i];
                grad_phase[i] = c * tau * b * omega_perp[i];
            }
            break;
        }
        case ProbeKind::complex1d:
            grad_log[0] = c * tau;
            grad_phase[0] = c * tau * b_factor();
            break;
        case ProbeKind::radial: {
            double r2 = 0.0;
            for (int i = 0; i < dim; ++i) r2 += (x[i] - p[i]) * (x[i] - p[i]);
            const double r = std::sqrt(r2);
            const double radial = sign * std::sqrt(tau) - 0.5 * (dim - 1) / r;
            for (int i = 0; i < dim; ++i) grad_log[i] = radial * (x[i] - p[i]) / r;
            break;
        }
    }
}

ProbeField real_probe(const Vec& omega, double tau) {
    if (!(tau > 0.0)) throw ValidationError("real_probe: tau must be positive");
    if (std::abs(norm(omega) - 1.0) > 1e-12)
        throw ValidationError("real_probe: omega must be a unit vector");
    ProbeField f;
    f.kind = ProbeKind::real;
    f.dim = static_cast<int>(omega.size());
    f.tau = tau;
    f.omega = omega;
    return f;
}

ProbeField complex_probe(const Vec& omega, std::optional<Vec> omega_perp,
                         double c, double tau) {
    if (omega.size() != 2) throw ValidationError("complex_probe: dim must be 2");
    if (!(c > 0.0)) throw ValidationError("complex_probe: c must be positive");
    if (!(tau > 1.0 / (c * c)))
        throw ValidationError("complex_probe: tau must exceed 1/c^2");
    if (std::abs(norm(omega) - 1.0) > 1e-12)
        throw ValidationError("complex_probe: omega must be a unit vector");
    Vec perp = omega_perp ? *omega_perp : Vec{-omega[1], omega[0]};
    if (std::abs(norm(perp) - 1.0) > 1e-12 || std::abs(dot(omega, perp)) > 1e-12)
        throw ValidationError("complex_probe: omega_perp must be unit and orthogonal");
    ProbeField f;
    f.kind = ProbeKind::complex2d;
    f.dim = 2;
    f.tau = tau;
    f.omega = omega;
    f.omega_perp = perp;
    f.c = c;
    return f;
}

ProbeField complex_probe_1d(double c, double tau) {
    if (c == 0.0) throw ValidationError("complex_probe_1d: c must be nonzero");
    if (!(tau > 1.0 / (c * c)))
        throw ValidationError("complex_probe_1d: tau must exceed 1/c^2");
    ProbeField f;
    f.kind = ProbeKind::complex1d;
    f.dim = 1;
    f.tau = tau;
    f.omega = {1.0};
    f.c = c;
    return f;
}

ProbeField radial_probe(const Vec& p, int sign, double tau, const SpatialDomain& domain) {
    if (!(tau > 0.0)) throw ValidationError("radial_probe: tau must be positive");
    if (domain.contains(p))
        throw ValidationError("radial_probe: center must lie outside the domain closure");
    ProbeField f;
    f.kind = ProbeKind::radial;
    f.dim = domain.dim;
    f.tau = tau;
    f.p = p;
    f.sign = sign >= 0 ? +1 : -1;
    f.asymptotic = true;  // leading transport order only; exact when dim == 1
    return f;
}

} // namespace heatenc
