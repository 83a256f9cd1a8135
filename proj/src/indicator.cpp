#include "heatenc/indicator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "heatenc/errors.hpp"
#include "heatenc/logcomplex.hpp"

namespace heatenc {

int oscillation_gate_min_nt(double c, double tau, double T) {
    // 8 samples per period of e^{-i 2 c^2 tau^2 b t}; b < 1 so this bounds it.
    return static_cast<int>(std::ceil(8.0 * c * c * tau * tau * T / M_PI));
}

IndicatorSample indicator(const BoundaryData& data, const ProbeField& probe, double s) {
    if (probe.dim != data.dim)
        throw ValidationError("indicator: probe/data dimension mismatch");
    if (data.nodes.empty() || data.times.size() != static_cast<std::size_t>(data.nt) + 1)
        throw ValidationError("indicator: malformed boundary data");
    if (probe.kind == ProbeKind::complex1d) {
        const int need = oscillation_gate_min_nt(probe.c, probe.tau, data.T);
        if (data.nt < need)
            throw GateError("indicator: oscillation gate needs nt >= " +
                            std::to_string(need) + ", have " + std::to_string(data.nt));
    }

    LogComplexAccumulator acc;
    Vec grad_log, grad_phase;
    for (std::size_t bn = 0; bn < data.nodes.size(); ++bn) {
        const BoundaryNode& node = data.nodes[bn];
        probe.gradients(node.x, grad_log, grad_phase);
        const std::complex<double> dlog_dnu(dot(grad_log, node.normal),
                                            dot(grad_phase, node.normal));
        for (int k = 0; k <= data.nt; ++k) {
            const double t = data.times[k];
            double wt;
            if (k == 0) wt = (data.times[1] - data.times[0]) / 2;
            else if (k == data.nt) wt = (data.times[k] - data.times[k - 1]) / 2;
            else wt = (data.times[k + 1] - data.times[k - 1]) / 2;
            // dv/dnu u - du/dnu v = v (dlog_dnu * u - du/dnu)
            const std::complex<double> factor =
                dlog_dnu * data.dirichlet[bn][k] - data.neumann[bn][k];
            if (factor == std::complex<double>(0.0, 0.0)) continue;
            LogComplex term{probe.log_magnitude(node.x, t) + std::log(std::abs(factor)),
                            probe.phase(node.x, t) + std::arg(factor)};
            acc.add(term, std::log(node.weight * wt));
        }
    }

    const LogComplex res = acc.result();
    IndicatorSample out;
    out.tau = probe.tau;
    out.s = s;
    if (res.is_zero() || res.log_abs < kLogIndicatorFloor) {
        out.log_abs = kLogIndicatorFloor + probe.tau * s;
        out.phase = 0.0;
        out.floor_hit = true;
    } else {
        out.log_abs = res.log_abs + probe.tau * s;
        out.phase = std::remainder(res.phase, 2 * M_PI);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Slope fitting
// ---------------------------------------------------------------------------

namespace {

// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
std::vector<double> symmetric_eigenvalues(std::vector<std::vector<double>> m) {
    const std::size_t n = m.size();
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += m[i][j] * m[i][j];
        if (off < 1e-300) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(m[p][q]) < 1e-300) continue;
                const double theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double cth = 1.0 / std::sqrt(t * t + 1.0);
                const double sth = t * cth;
                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = m[k][p], mkq = m[k][q];
                    m[k][p] = cth * mkp - sth * mkq;
                    m[k][q] = sth * mkp + cth * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = m[p][k], mqk = m[q][k];
                    m[p][k] = cth * mpk - sth * mqk;
                    m[q][k] = sth * mpk + cth * mqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = m[i][i];
    return ev;
}

std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = a.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        if (std::abs(a[col][col]) < 1e-300)
            throw GateError("fit_slope: singular normal equations");
        for (std::size_t r = col + 1; r < n; ++r) {
            const double m = a[r][col] / a[col][col];
            for (std::size_t cc = col; cc < n; ++cc) a[r][cc] -= m * a[col][cc];
            b[r] -= m * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

std::vector<double> basis_row(double tau, FitModel model) {
    if (model == FitModel::real_probe)
        return {tau, std::sqrt(tau), std::log(tau), 1.0};
    return {tau, std::log(tau), 1.0};
}

} // namespace

SlopeFit fit_slope(const std::vector<double>& taus, const std::vector<double>& log_abs,
                   FitModel model) {
    if (taus.size() != log_abs.size())
        throw ValidationError("fit_slope: size mismatch");
    const std::size_t ncoef = model == FitModel::real_probe ? 4 : 3;
    if (taus.size() < ncoef + 2)
        throw ValidationError("fit_slope: need at least " + std::to_string(ncoef + 2) +
                              " samples");
    for (double t : taus)
        if (!(t > 0.0)) throw ValidationError("fit_slope: tau must be positive");

    std::vector<std::vector<double>> m(ncoef, std::vector<double>(ncoef, 0.0));
    std::vector<double> rhs(ncoef, 0.0);
    for (std::size_t k = 0; k < taus.size(); ++k) {
        const auto row = basis_row(taus[k], model);
        for (std::size_t i = 0; i < ncoef; ++i) {
            rhs[i] += row[i] * log_abs[k];
            for (std::size_t j = 0; j < ncoef; ++j) m[i][j] += row[i] * row[j];
        }
    }

    const auto ev = symmetric_eigenvalues(m);
    const double lmax = *std::max_element(ev.begin(), ev.end());
    const double lmin = *std::min_element(ev.begin(), ev.end());
    const double condition = lmin > 0.0 ? std::sqrt(lmax / lmin)
                                        : std::numeric_limits<double>::infinity();
    if (!(condition < 1e10))
        throw GateError("fit_slope: design condition number " + std::to_string(condition) +
                        " exceeds 1e10");

    SlopeFit fit;
    fit.model = model;
    fit.coeffs = solve_dense(m, rhs);
    fit.slope = fit.coeffs[0];
    fit.condition = condition;
    fit.tau_grid = taus;
    double ss = 0.0;
    for (std::size_t k = 0; k < taus.size(); ++k) {
        const auto row = basis_row(taus[k], model);
        double pred = 0.0;
        for (std::size_t i = 0; i < ncoef; ++i) pred += fit.coeffs[i] * row[i];
        ss += (pred - log_abs[k]) * (pred - log_abs[k]);
    }
    fit.residual_norm = std::sqrt(ss / taus.size());
    return fit;
}

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

namespace {

// Keep non-floor samples; require enough for the fit.
void split_samples(const std::vector<IndicatorSample>& samples, std::size_t min_count,
                   std::vector<double>& taus, std::vector<double>& logs) {
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (!(samples[i].tau > samples[i - 1].tau))
            throw ValidationError("slope extraction: tau grid must be strictly increasing");
    for (const auto& smp : samples) {
        if (smp.floor_hit) continue;
        taus.push_back(smp.tau);
        logs.push_back(smp.log_abs - smp.tau * smp.s);  // fit at s = 0
    }
    if (taus.size() < min_count)
        throw GateError("slope extraction: only " + std::to_string(taus.size()) +
                        " usable samples after floor filtering");
}

} // namespace

T0Estimate estimate_T0_from_samples(const std::vector<IndicatorSample>& samples) {
    for (const auto& smp : samples)
        if (smp.tau < 10.0)
            throw ValidationError("estimate_T0: tau grid must start at 10 or above");
    std::vector<double> taus, logs;
    split_samples(samples, 6, taus, logs);
    T0Estimate est;
    est.fit = fit_slope(taus, logs, FitModel::real_probe);
    est.t0 = -est.fit.slope;
    return est;
}

T0Estimate estimate_T0(const BoundaryData& data, const Vec& omega,
                       const std::vector<double>& tau_grid) {
    std::vector<IndicatorSample> samples;
    samples.reserve(tau_grid.size());
    for (double tau : tau_grid)
        samples.push_back(indicator(data, real_probe(omega, tau), 0.0));
    return estimate_T0_from_samples(samples);
}

std::string to_string(Dichotomy d) {
    switch (d) {
        case Dichotomy::decaying: return "decaying";
        case Dichotomy::growing: return "growing";
        case Dichotomy::indeterminate: return "indeterminate";
    }
    return "?";
}

DichotomyScan dichotomy_scan_from_samples(
    const std::vector<std::vector<IndicatorSample>>& samples_per_s,
    const std::vector<double>& s_grid) {
    if (samples_per_s.size() != s_grid.size())
        throw ValidationError("dichotomy_scan: size mismatch");
    DichotomyScan scan;
    for (std::size_t si = 0; si < s_grid.size(); ++si) {
        const auto& samples = samples_per_s[si];
        if (samples.size() < 4)
            throw ValidationError("dichotomy_scan: need >= 4 tau samples per s");
        // top half of the tau grid
        std::vector<IndicatorSample> top(samples.begin() + samples.size() / 2,
                                         samples.end());
        Dichotomy cls;
        bool any_floor = false;
        for (const auto& smp : top) any_floor |= smp.floor_hit;
        if (any_floor) {
            cls = Dichotomy::indeterminate;  // below the floor: no usable slope
        } else {
            double st = 0, sl = 0, stt = 0, stl = 0;
            const double n = static_cast<double>(top.size());
            for (const auto& smp : top) {
                st += smp.tau;
                sl += smp.log_abs;
                stt += smp.tau * smp.tau;
                stl += smp.tau * smp.log_abs;
            }
            const double slope = (n * stl - st * sl) / (n * stt - st * st);
            if (slope > 0.01) cls = Dichotomy::growing;
            else if (slope < -0.01) cls = Dichotomy::decaying;
            else cls = Dichotomy::indeterminate;
        }
        scan.classes.emplace_back(s_grid[si], cls);
    }
    std::sort(scan.classes.begin(), scan.classes.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    // consistent = decaying block, optional indeterminate block, growing block
    auto rank = [](Dichotomy d) {
        return d == Dichotomy::decaying ? 0 : d == Dichotomy::indeterminate ? 1 : 2;
    };
    bool consistent = true;
    for (std::size_t i = 1; i < scan.classes.size(); ++i)
        if (rank(scan.classes[i].second) < rank(scan.classes[i - 1].second))
            consistent = false;
    if (consistent) {
        std::optional<double> last_decay, first_grow;
        for (const auto& [s, cls] : scan.classes) {
            if (cls == Dichotomy::decaying) last_decay = s;
            if (cls == Dichotomy::growing && !first_grow) first_grow = s;
        }
        if (last_decay && first_grow) scan.crossover = {{*last_decay, *first_grow}};
    }
    return scan;
}

DichotomyScan dichotomy_scan(const BoundaryData& data,
                             const std::function<ProbeField(double)>& probe_family,
                             const std::vector<double>& s_grid,
                             const std::vector<double>& tau_grid) {
    std::vector<std::vector<IndicatorSample>> samples(s_grid.size());
    for (std::size_t si = 0; si < s_grid.size(); ++si)
        for (double tau : tau_grid)
            samples[si].push_back(indicator(data, probe_family(tau), s_grid[si]));
    return dichotomy_scan_from_samples(samples, s_grid);
}

SupportEstimate estimate_support_from_samples(const std::vector<IndicatorSample>& samples,
                                              double c) {
    for (const auto& smp : samples)
        if (!(smp.tau > 1.0 / (c * c)))
            throw ValidationError("estimate_support: tau must exceed 1/c^2");
    std::vector<double> taus, logs;
    split_samples(samples, 5, taus, logs);
    SupportEstimate est;
    est.fit = fit_slope(taus, logs, FitModel::complex_probe);
    est.h = est.fit.slope / std::sqrt(c * c + 1.0);
    return est;
}

SupportEstimate estimate_support(const BoundaryData& data, const Vec& omega,
                                 std::optional<Vec> omega_perp, double c,
                                 const std::vector<double>& tau_grid) {
    std::vector<IndicatorSample> samples;
    samples.reserve(tau_grid.size());
    for (double tau : tau_grid) {
        const ProbeField probe = data.dim == 1
                                     ? complex_probe_1d(c, tau)
                                     : complex_probe(omega, omega_perp, c, tau);
        samples.push_back(indicator(data, probe, 0.0));
    }
    return estimate_support_from_samples(samples, c);
}

// ---------------------------------------------------------------------------
// Enclosure assembly
// ---------------------------------------------------------------------------

EnclosureResult build_enclosure(const BoundaryData& data,
                                const std::vector<DirectionRequest>& directions,
                                const Vec& clip_lo, const Vec& clip_hi,
                                const EnclosureOptions& opts) {
    if (directions.empty()) throw ValidationError("build_enclosure: no directions");
    EnclosureResult res;
    std::vector<std::pair<SpaceTimeDirection, double>> accepted;
    for (const auto& req : directions) {
        DirectionRecord rec;
        rec.omega = req.omega;
        rec.c = req.c;
        try {
            const SupportEstimate est =
                estimate_support(data, req.omega, std::nullopt, req.c, req.tau_grid);
            rec.h_estimate = est.h;
            rec.fit = est.fit;
            rec.rejected = est.fit.residual_norm > opts.residual_gate;
        } catch (const GateError&) {
            rec.rejected = true;
        }
        if (!rec.rejected)
            accepted.emplace_back(omega_c(req.omega, req.c), rec.h_estimate);
        res.records.push_back(std::move(rec));
    }
    if (accepted.empty())
        throw GateError("build_enclosure: every direction was rejected");
    res.polytope = intersect_halfspaces(accepted, clip_lo, clip_hi);

    if (opts.t0_tau_grid) {
        Vec omega = opts.t0_omega;
        if (omega.empty()) {
            omega.assign(data.dim, 0.0);
            omega[0] = 1.0;
        }
        res.t0_estimate = estimate_T0(data, omega, *opts.t0_tau_grid).t0;
    }
    return res;
}

void add_trace_noise(BoundaryData& data, double sigma_rel, unsigned long long seed) {
    if (sigma_rel < 0.0) throw ValidationError("add_trace_noise: sigma must be >= 0");
    if (sigma_rel == 0.0) return;
    double umax = 0.0;
    for (const auto& row : data.dirichlet)
        for (double v : row) umax = std::max(umax, std::abs(v));
    const double sigma = sigma_rel * umax;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    for (auto& row : data.dirichlet)
        for (double& v : row) v += noise(rng);
    for (auto& row : data.neumann)
        for (double& v : row) v += noise(rng);
}

} // namespace heatenc
