// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on any
// failure.  Criteria exercise the full stack end to end on the reference
// scenario 1D, Omega=[0,1], T=1, D=[0.4,0.6]x[0.25,1], rho=1.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "heatenc/geometry.hpp"
#include "heatenc/indicator.hpp"
#include "heatenc/oracle.hpp"
#include "heatenc/probes.hpp"
#include "heatenc/solver.hpp"
#include "oracles.hpp"

using namespace heatenc;
using namespace testing_oracles;

namespace {

int failures = 0;

void report(int num, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s criterion %2d (%s): %s\n", pass ? "PASS" : "FAIL", num,
                name.c_str(), detail.c_str());
    if (!pass) ++failures;
}

void run(int num, const std::string& name,
         const std::function<std::pair<bool, std::string>()>& body) {
    try {
        const auto [pass, detail] = body();
        report(num, name, pass, detail);
    } catch (const std::exception& e) {
        report(num, name, false, std::string("exception: ") + e.what());
    }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

SolveResult solve_reference(int nx, int nt) {
    const SpatialDomain dom = make_interval(0.0, 1.0);
    const Grid grid = make_grid(dom, nx, 0, nt, 1.0);
    return solve_forward(dom, reference_source(0.25), grid,
                         BoundaryCondition::neumann0, 1.0);
}

// tau grids chosen so the complex1d oscillation gate admits nt = 4000:
// tau_max^2 <= nt * pi / (8 c^2).
std::vector<double> tau_grid_for_c(double c) {
    const double cap = std::abs(c) == 0.5 ? 79.0 : (std::abs(c) == 1.0 ? 39.0 : 19.5);
    const double lo = std::abs(c) == 0.5 ? 20.0 : (std::abs(c) == 1.0 ? 10.0 : 6.0);
    return log_grid(lo, cap, 12);
}

ConeSpec random_cone(std::mt19937_64& rng, double c) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (;;) {
        Vec omega{uni(rng), uni(rng)};
        const double nw = norm(omega);
        if (nw < 0.2) continue;
        omega = {omega[0] / nw, omega[1] / nw};
        const SpaceTimeDirection dir = omega_c(omega, c);
        ConeSpec cone;
        cone.dir = dir;
        cone.vertex = {uni(rng), uni(rng), uni(rng)};
        cone.delta = 0.3 + 0.2 * (uni(rng) + 1.0);
        Vec t1{-dir.vec[1], dir.vec[0], 0.0};
        const double n1 = norm(t1);
        t1 = {t1[0] / n1, t1[1] / n1, 0.0};
        const Vec3 t2c = cross(Vec3{dir.vec[0], dir.vec[1], dir.vec[2]},
                               Vec3{t1[0], t1[1], t1[2]});
        std::vector<std::pair<double, double>> ab;
        for (int k = 0; k < 3; ++k) ab.emplace_back(uni(rng), uni(rng));
        const double area2 =
            std::abs((ab[1].first - ab[0].first) * (ab[2].second - ab[0].second) -
                     (ab[2].first - ab[0].first) * (ab[1].second - ab[0].second));
        if (area2 < 0.1) continue;
        for (int k = 0; k < 3; ++k) {
            Vec y(3);
            for (int d = 0; d < 3; ++d)
                y[d] = cone.vertex[d] - cone.delta * dir.vec[d] +
                       ab[k].first * t1[d] + ab[k].second * t2c[d];
            cone.base.push_back(std::move(y));
        }
        return cone;
    }
}

ConeSpec fixed_cone() {
    ConeSpec cone;
    cone.dir = omega_c({1.0, 0.0}, 1.0);
    cone.vertex = {0.3, 0.2, 0.8};
    cone.delta = 0.5;
    Vec foot = cone.vertex;
    for (int d = 0; d < 3; ++d) foot[d] -= cone.delta * cone.dir.vec[d];
    const Vec t1{0.0, 1.0, 0.0};
    const Vec t2{1.0 / std::sqrt(2.0), 0.0, 1.0 / std::sqrt(2.0)};
    auto base_pt = [&](double a, double b) {
        Vec y = foot;
        for (int d = 0; d < 3; ++d) y[d] += a * t1[d] + b * t2[d];
        return y;
    };
    cone.base = {base_pt(0.45, 0.1), base_pt(-0.35, 0.4), base_pt(-0.1, -0.45)};
    return cone;
}

} // namespace

int main() {
    const SourceSpec src = reference_source(0.25);
    const std::vector<double> t0_taus = log_grid(20.0, 120.0, 12);

    // shared reference solve, timed as part of criterion 1
    const auto t_solve = std::chrono::steady_clock::now();
    const SolveResult ref = solve_reference(400, 4000);
    const double solve_seconds = seconds_since(t_solve);
    const BoundaryData& bd = ref.boundary;

    run(1, "onset recovery", [&]() -> std::pair<bool, std::string> {
        const auto t0 = std::chrono::steady_clock::now();
        const T0Estimate plus = estimate_T0(bd, {1.0}, t0_taus);
        const T0Estimate minus = estimate_T0(bd, {-1.0}, t0_taus);
        const double elapsed = solve_seconds + seconds_since(t0);
        const bool pass = std::abs(plus.t0 - 0.25) <= 0.03 &&
                          std::abs(plus.t0 - minus.t0) <= 0.01 && elapsed <= 60.0;
        return {pass, fmt("t0=%+.4f (omega=-1: %+.4f), |err|=%.4f, %.1fs", plus.t0,
                          minus.t0, std::abs(plus.t0 - 0.25), elapsed)};
    });

    run(2, "dichotomy", [&]() -> std::pair<bool, std::string> {
        auto family = [](double tau) { return real_probe({1.0}, tau); };
        const std::vector<double> s_grid{0.1, 0.15, 0.35, 0.4};
        const DichotomyScan scan = dichotomy_scan(bd, family, s_grid, t0_taus);
        const std::vector<Dichotomy> want{Dichotomy::decaying, Dichotomy::decaying,
                                          Dichotomy::growing, Dichotomy::growing};
        bool pass = scan.crossover.has_value();
        std::string classes;
        for (std::size_t i = 0; i < s_grid.size(); ++i) {
            pass = pass && scan.classes[i].second == want[i];
            classes += (i ? "," : "") + to_string(scan.classes[i].second);
        }
        if (scan.crossover)
            pass = pass && scan.crossover->first < 0.25 && 0.25 < scan.crossover->second;
        return {pass, fmt("classes=[%s], bracket=[%.2f,%.2f]", classes.c_str(),
                          scan.crossover ? scan.crossover->first : -1.0,
                          scan.crossover ? scan.crossover->second : -1.0)};
    });

    run(3, "support recovery", [&]() -> std::pair<bool, std::string> {
        const SpatialDomain dom = make_interval(0.0, 1.0);
        bool pass = true;
        std::string detail;
        for (double c : {1.0, -1.0}) {
            const SupportEstimate est =
                estimate_support(bd, {1.0}, std::nullopt, c, tau_grid_for_c(c));
            const SpaceTimeDirection dir = omega_c({1.0}, c);
            const double exact = support_function(src, dir);
            pass = pass && std::abs(est.h - exact) <= 0.05 &&
                   condition_2_3_margin(dom, 1.0, src, dir) > 0.0;
            detail += fmt("%sc=%+.0f: h=%+.4f (exact %+.4f)", detail.empty() ? "" : "; ",
                          c, est.h, exact);
        }
        return {pass, detail};
    });

    run(4, "enclosure soundness", [&]() -> std::pair<bool, std::string> {
        std::vector<DirectionRequest> dirs;
        std::vector<std::pair<SpaceTimeDirection, double>> exact_samples;
        for (double c : {0.5, -0.5, 1.0, -1.0, 2.0, -2.0}) {
            dirs.push_back({{1.0}, c, tau_grid_for_c(c)});
            const SpaceTimeDirection dir = omega_c({1.0}, c);
            exact_samples.emplace_back(dir, support_function(src, dir));
        }
        const Vec lo{0.0, 0.0}, hi{1.0, 1.0};
        const EnclosureResult enc = build_enclosure(bd, dirs, lo, hi);
        const auto pts = rasterize_source(src, 40);
        const double est_frac = containment_fraction(enc.polytope, pts);
        const double exact_frac =
            containment_fraction(intersect_halfspaces(exact_samples, lo, hi), pts);
        const bool pass = est_frac >= 0.95 && exact_frac == 1.0;
        return {pass, fmt("estimated-h containment %.1f%%, exact-h %.1f%%",
                          100 * est_frac, 100 * exact_frac)};
    });

    run(5, "boundary vs volume identity", [&]() -> std::pair<bool, std::string> {
        const SolveResult fine = solve_reference(800, 8000);
        bool pass = true;
        std::string detail;
        for (double tau : {20.0, 40.0, 80.0}) {
            const ProbeField v = real_probe({1.0}, tau);
            auto gap = [&](const SolveResult& r) {
                const IndicatorSample b = indicator(r.boundary, v, 0.0);
                const IndicatorSample w = volume_indicator(src, r.snapshot, v, 0.0);
                return std::abs(std::expm1(b.log_abs - w.log_abs));
            };
            const double coarse = gap(ref), refined = gap(fine);
            const double order = std::log2(coarse / refined);
            pass = pass && coarse <= 0.05 && refined < coarse && order >= 1.5;
            detail += fmt("%stau=%g: %.2e->%.2e (order %.2f)",
                          detail.empty() ? "" : "; ", tau, coarse, refined, order);
        }
        return {pass, detail};
    });

    run(6, "K_D closed form vs quadrature", [&]() -> std::pair<bool, std::string> {
        const auto t0 = std::chrono::steady_clock::now();
        std::mt19937_64 rng(2024);
        double worst = 0.0, min_abs = 1e300;
        for (double c : {0.5, 1.0, 2.0, 4.0})
            for (int rep = 0; rep < 50; ++rep) {
                const ConeSpec cone = random_cone(rng, c);
                const Vec perp{-cone.dir.omega[1], cone.dir.omega[0]};
                const KDValue q = kd_quadrature(cone, perp);
                const KDValue cf = kd_closed_form(cone, perp);
                worst = std::max(worst, std::abs(q.value - cf.value) / std::abs(q.value));
                min_abs = std::min(min_abs, std::abs(cf.value));
            }
        const double elapsed = seconds_since(t0);
        const bool pass = worst <= 1e-6 && min_abs > 0.0 && elapsed <= 10.0;
        return {pass, fmt("200 cones, worst rel err %.2e, min |K_D| %.2e, %.1fs",
                          worst, min_abs, elapsed)};
    });

    run(7, "scaled cone integral limit", [&]() -> std::pair<bool, std::string> {
        const ConeSpec cone = fixed_cone();
        const Vec perp{0.0, 1.0};
        const std::complex<double> kd = kd_quadrature(cone, perp).value;
        double prev = 1e300, last = 0.0;
        bool monotone = true;
        std::string detail;
        for (double tau : {50.0, 100.0, 200.0, 400.0}) {
            last = std::abs(scaled_cone_integral(cone, perp, tau) - kd) / std::abs(kd);
            monotone = monotone && last < prev;
            prev = last;
            detail += fmt("%s%.4f", detail.empty() ? "errors " : ", ", last);
        }
        return {monotone && last <= 0.02, detail};
    });

    run(8, "segment closed forms", [&]() -> std::pair<bool, std::string> {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        const double tau = 50.0;
        double worst = 0.0;
        int done = 0;
        while (done < 100) {
            const double c = 0.5 + (uni(rng) + 1.0);
            const double delta = 0.4 + 0.2 * (uni(rng) + 1.0);
            const Vec p{uni(rng), uni(rng)};
            const Vec y0{uni(rng), uni(rng)};
            const Vec y1{uni(rng), uni(rng)};
            const Vec gr{uni(rng), uni(rng)};
            if (norm(sub(y1, y0)) < 0.1) continue;
            ++done;
            const SegmentIntegrals seg = segment_integrals(y0, y1, p, gr, c, delta, tau);
            const double root = std::sqrt(c * c + 1.0);
            const double len = norm(sub(y1, y0));
            const int m = 20000;
            std::complex<double> q1(0, 0), q2(0, 0);
            for (int k = 0; k <= m; ++k) {
                const double t = static_cast<double>(k) / m;
                const Vec y = add(y0, scale(sub(y1, y0), t));
                const std::complex<double> den(root,
                                               -segment_b_factor(y, p, c, delta, tau));
                const double w = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
                q1 += w / (den * den);
                q2 += w * 2.0 * dot(gr, sub(y, p)) / (den * den * den);
            }
            q1 *= len / (3.0 * m);
            q2 *= len / (3.0 * m);
            worst = std::max(worst, std::abs(seg.j1 - q1) / (1.0 + std::abs(q1)));
            worst = std::max(worst, std::abs(seg.j2 - q2) / (1.0 + std::abs(q2)));
        }
        return {worst <= 1e-9, fmt("100 segments, worst rel err %.2e", worst)};
    });

    run(9, "cone moment formula", [&]() -> std::pair<bool, std::string> {
        double worst = 0.0;
        for (int n = 0; n <= 5; ++n)
            for (double a : {0.0, 1.0, -1.0, 3.0, -3.0}) {
                const std::complex<double> cf = cone_moment(n, a);
                const std::complex<double> q = cone_moment_quadrature(n, a);
                worst = std::max(worst, std::abs(cf - q) / std::abs(cf));
            }
        return {worst <= 1e-8, fmt("worst rel err %.2e", worst)};
    });

    run(10, "probe PDE residuals", [&]() -> std::pair<bool, std::string> {
        std::mt19937_64 rng(41);
        std::uniform_real_distribution<double> uni(0.2, 0.8);
        const SpatialDomain dom1 = make_interval(0.0, 1.0);
        double worst = 0.0;
        for (double tau : {10.0, 100.0, 1000.0}) {
            std::vector<ProbeField> probes;
            probes.push_back(real_probe({1.0}, tau));
            probes.push_back(real_probe({0.6, 0.8}, tau));
            probes.push_back(complex_probe({1.0, 0.0}, std::nullopt, 1.0, tau));
            probes.push_back(complex_probe_1d(1.0, tau));
            probes.push_back(radial_probe({-0.3}, +1, tau, dom1));
            for (const auto& pr : probes)
                for (int rep = 0; rep < 70; ++rep) {
                    Vec x(pr.dim);
                    for (int d = 0; d < pr.dim; ++d) x[d] = uni(rng);
                    worst = std::max(worst,
                                     probe_pde_residual(pr, x, uni(rng), 1e-3, 1e-4));
                }
        }
        // radial dim=2 obeys the 1/sqrt(tau) law instead
        const SpatialDomain dom2 = make_rectangle(0.0, 1.0, 0.0, 1.0, 8, 8);
        auto radial_worst = [&](double tau) {
            const ProbeField pr = radial_probe({-0.5, 0.5}, +1, tau, dom2);
            std::mt19937_64 r2(43);
            std::uniform_real_distribution<double> u2(0.2, 0.8);
            double w = 0.0;
            for (int rep = 0; rep < 100; ++rep)
                w = std::max(w, probe_pde_residual(pr, {u2(r2), u2(r2)}, u2(r2), 1e-4));
            return w;
        };
        const double ratio = radial_worst(400.0) / radial_worst(100.0);
        const bool pass = worst <= 1e-4 && ratio >= 0.4 && ratio <= 0.6;
        return {pass, fmt("exact kinds worst %.2e, radial-2D tau ratio %.3f",
                          worst, ratio)};
    });

    run(11, "exact shift law", [&]() -> std::pair<bool, std::string> {
        const std::vector<double> s_grid{0.0, 0.1, 0.15, 0.35, 0.4};
        double worst = 0.0;
        int rows = 0;
        auto check_family = [&](const std::function<ProbeField(double)>& make,
                                const std::vector<double>& taus) {
            for (double tau : taus) {
                const ProbeField v = make(tau);
                const IndicatorSample base = indicator(bd, v, 0.0);
                for (double s : s_grid) {
                    const IndicatorSample smp = indicator(bd, v, s);
                    worst = std::max(worst, std::abs(smp.log_abs -
                                                     (base.log_abs + tau * s)));
                    ++rows;
                }
            }
        };
        check_family([](double tau) { return real_probe({1.0}, tau); }, t0_taus);
        for (double c : {1.0, -1.0, 2.0, -2.0})
            check_family([c](double tau) { return complex_probe_1d(c, tau); },
                         tau_grid_for_c(c));
        return {worst <= 1e-9, fmt("%d rows, worst |defect| %.2e", rows, worst)};
    });

    run(12, "onset-window band", [&]() -> std::pair<bool, std::string> {
        const BandReport rep = lemma31_band(src, {1.0}, log_grid(20.0, 200.0, 14));
        return {rep.holds && rep.p == 0.0,
                fmt("holds=%d, K2=%.3f <= K4=%.3f, spreads %.2f/%.2f", rep.holds,
                    rep.k2, rep.k4, rep.lower_residual_spread,
                    rep.upper_residual_spread)};
    });

    if (failures) std::printf("%d criterion(s) FAILED\n", failures);
    else std::printf("all 12 criteria PASSED\n");
    return failures ? 1 : 0;
}
