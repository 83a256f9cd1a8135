#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "heatenc/geometry.hpp"
#include "heatenc/probes.hpp"
#include "heatenc/solver.hpp"

namespace heatenc {

// One indicator evaluation (tau, s) -> (log|I|, arg I).
struct IndicatorSample {
    double tau = 0.0;
    double s = 0.0;
    double log_abs = 0.0;
    double phase = 0.0;
    bool floor_hit = false;
};

// Boundary-integral indicator: e^{tau s} iint (dv/dnu u - du/dnu v) dS dt,
// trapezoidal in time, weighted-node in space, max-shifted log-complex
// accumulation.  For floor hits log_abs is pinned to log(floor) + tau*s so
// the exact shift law holds on every sample.
IndicatorSample indicator(const BoundaryData& data, const ProbeField& probe, double s);

// Minimum N_t for a complex1d probe: 8 time samples per phase period of the
// e^{-i 2 c^2 tau^2 b t} factor over [0, T].  Violations are hard errors.
int oscillation_gate_min_nt(double c, double tau, double T);

// ---------------------------------------------------------------------------
// Slope extraction
// ---------------------------------------------------------------------------

enum class FitModel {
    real_probe,     // log|I| ~ a*tau + b*sqrt(tau) + g*log(tau) + d
    complex_probe,  // log|I| ~ a*tau + g*log(tau) + d
};

struct SlopeFit {
    FitModel model = FitModel::real_probe;
    std::vector<double> coeffs;   // in basis order (tau, [sqrt tau,] log tau, 1)
    double slope = 0.0;           // the tau coefficient
    double residual_norm = 0.0;   // RMS residual
    double condition = 0.0;       // condition number of the design matrix
    std::vector<double> tau_grid;
};

// Least-squares fit of log|I(tau;0)| over a tau grid.  Throws GateError if
// the design matrix condition number exceeds 1e10.
SlopeFit fit_slope(const std::vector<double>& taus,
                   const std::vector<double>& log_abs, FitModel model);

struct T0Estimate {
    double t0 = 0.0;
    SlopeFit fit;
};

// Onset extraction: t0 = -slope of log|I_omega(tau;0)|.
T0Estimate estimate_T0(const BoundaryData& data, const Vec& omega,
                       const std::vector<double>& tau_grid);
// Same fit from precomputed samples (floor hits excluded; needs >= 6 left).
T0Estimate estimate_T0_from_samples(const std::vector<IndicatorSample>& samples);

enum class Dichotomy { decaying, growing, indeterminate };
std::string to_string(Dichotomy d);

struct DichotomyScan {
    std::vector<std::pair<double, Dichotomy>> classes;  // per s, sorted by s
    // Bracketing interval (largest decaying s, smallest growing s) when the
    // scan is consistent.
    std::optional<std::pair<double, double>> crossover;
};

// Classifies each s by the sign of d log|I(tau;s)|/dtau over the top half of
// the tau grid, with a dead band of +-0.01.
DichotomyScan dichotomy_scan(const BoundaryData& data,
                             const std::function<ProbeField(double)>& probe_family,
                             const std::vector<double>& s_grid,
                             const std::vector<double>& tau_grid);
DichotomyScan dichotomy_scan_from_samples(
    const std::vector<std::vector<IndicatorSample>>& samples_per_s,
    const std::vector<double>& s_grid);

struct SupportEstimate {
    double h = 0.0;  // slope / sqrt(c^2+1)
    SlopeFit fit;
};

// Support extraction: h = slope of log|I_c(tau;0)| / sqrt(c^2+1).
// omega ignored for dim=1 (pass {1}); omega_perp optional for dim=2.
SupportEstimate estimate_support(const BoundaryData& data, const Vec& omega,
                                 std::optional<Vec> omega_perp, double c,
                                 const std::vector<double>& tau_grid);
SupportEstimate estimate_support_from_samples(
    const std::vector<IndicatorSample>& samples, double c);

// ---------------------------------------------------------------------------
// Enclosure assembly
// ---------------------------------------------------------------------------

struct DirectionRequest {
    Vec omega;  // {1} for dim=1
    double c = 1.0;
    std::vector<double> tau_grid;
};

struct DirectionRecord {
    Vec omega;
    double c = 1.0;
    double h_estimate = 0.0;
    SlopeFit fit;
    std::optional<double> condition_margin;  // filled by known-truth harnesses
    bool rejected = false;
};

struct EnclosureResult {
    std::vector<DirectionRecord> records;
    SpaceTimePolytope polytope;
    std::optional<double> t0_estimate;
};

struct EnclosureOptions {
    double residual_gate = 0.5;  // max RMS fit residual accepted
    std::optional<std::vector<double>> t0_tau_grid;  // run a real-probe T0 pass
    Vec t0_omega;  // omega for the T0 pass (defaults to +e1)
};

// Runs estimate_support per direction, gates on fit residual, intersects the
// accepted half-spaces (x,t).omega(c) <= h with the clip box.  Throws
// GateError if every direction is rejected.
EnclosureResult build_enclosure(const BoundaryData& data,
                                const std::vector<DirectionRequest>& directions,
                                const Vec& clip_lo, const Vec& clip_hi,
                                const EnclosureOptions& opts = {});

// Adds seeded Gaussian noise to both traces, sigma relative to max|u|.
// Harness-only hook for exercising fit gates; not part of the method.
void add_trace_noise(BoundaryData& data, double sigma_rel, unsigned long long seed);

} // namespace heatenc
