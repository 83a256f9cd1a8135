#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "heatenc/errors.hpp"
#include "heatenc/indicator.hpp"
#include "heatenc/logcomplex.hpp"
#include "oracles.hpp"

using namespace heatenc;
using namespace testing_oracles;

namespace {

BoundaryData reference_boundary(int nx, int nt, double onset = 0.25) {
    const SpatialDomain dom = make_interval(0.0, 1.0);
    const Grid grid = make_grid(dom, nx, 0, nt, 1.0);
    return solve_forward(dom, reference_source(onset), grid,
                         BoundaryCondition::neumann0, 1.0)
        .boundary;
}

std::vector<IndicatorSample> sample_complex1d(const BoundaryData& bd, double c,
                                              const std::vector<double>& taus,
                                              double s = 0.0) {
    std::vector<IndicatorSample> out;
    for (double tau : taus) out.push_back(indicator(bd, complex_probe_1d(c, tau), s));
    return out;
}

} // namespace

TEST_CASE("log-polar accumulation survives huge exponents") {
    LogComplexAccumulator acc;
    acc.add({1000.0, 0.0});
    acc.add({1000.0, M_PI});  // cancels
    acc.add({990.0, 0.0});
    const LogComplex r = acc.result();
    CHECK(r.log_abs == doctest::Approx(990.0).epsilon(1e-9));
    CHECK(std::abs(r.phase) < 1e-9);

    LogComplexAccumulator empty;
    CHECK(empty.result().is_zero());

    LogComplex prod = LogComplex{700.0, 0.5} * LogComplex{700.0, 0.25};
    CHECK(prod.log_abs == 1400.0);
    CHECK(prod.phase == 0.75);
}

TEST_CASE("exact shift law in s") {
    const BoundaryData bd = reference_boundary(100, 400);
    const ProbeField v = real_probe({1.0}, 30.0);
    const IndicatorSample base = indicator(bd, v, 0.0);
    for (double s : {0.1, 0.5, 2.0}) {
        const IndicatorSample shifted = indicator(bd, v, s);
        CHECK(shifted.log_abs == doctest::Approx(base.log_abs + 30.0 * s).epsilon(1e-12));
        CHECK(shifted.phase == doctest::Approx(base.phase).epsilon(1e-12));
    }
}

TEST_CASE("zero data floors the indicator, shift law included") {
    BoundaryData bd = reference_boundary(100, 400);
    for (auto& tr : bd.dirichlet) std::fill(tr.begin(), tr.end(), 0.0);
    for (auto& tr : bd.neumann) std::fill(tr.begin(), tr.end(), 0.0);
    const ProbeField v = real_probe({1.0}, 30.0);
    const IndicatorSample a = indicator(bd, v, 0.0);
    CHECK(a.floor_hit);
    CHECK(a.log_abs == doctest::Approx(kLogIndicatorFloor).epsilon(1e-12));
    const IndicatorSample b = indicator(bd, v, 0.4);
    CHECK(b.floor_hit);
    CHECK(b.log_abs == doctest::Approx(kLogIndicatorFloor + 30.0 * 0.4).epsilon(1e-12));
}

TEST_CASE("oscillation gate") {
    // min_nt = ceil(8 c^2 tau^2 T / pi)
    CHECK(oscillation_gate_min_nt(1.0, 10.0, 1.0) ==
          static_cast<int>(std::ceil(800.0 / M_PI)));
    const BoundaryData bd = reference_boundary(100, 200);
    CHECK_THROWS_AS(indicator(bd, complex_probe_1d(1.0, 30.0), 0.0), GateError);
    CHECK_NOTHROW(indicator(bd, complex_probe_1d(1.0, 8.0), 0.0));
}

TEST_CASE("slope fit on synthetic data") {
    const std::vector<double> taus = log_grid(10.0, 100.0, 14);

    SUBCASE("real model recovery") {
        std::vector<double> ys;
        for (double t : taus) ys.push_back(-0.25 * t + 1.3 * std::sqrt(t) - 2.0 * std::log(t) + 0.7);
        const SlopeFit f = fit_slope(taus, ys, FitModel::real_probe);
        CHECK(f.slope == doctest::Approx(-0.25).epsilon(1e-8));
        CHECK(f.residual_norm < 1e-9);
        CHECK(f.condition < 1e10);
    }

    SUBCASE("complex model recovery") {
        std::vector<double> ys;
        for (double t : taus) ys.push_back(0.35 * t + 3.0 * std::log(t) - 1.0);
        const SlopeFit f = fit_slope(taus, ys, FitModel::complex_probe);
        CHECK(f.slope == doctest::Approx(0.35).epsilon(1e-8));
        CHECK(f.residual_norm < 1e-9);
    }

    SUBCASE("degenerate grid trips the condition gate") {
        std::vector<double> same(8, 50.0), ys(8, 1.0);
        CHECK_THROWS_AS(fit_slope(same, ys, FitModel::real_probe), GateError);
    }

    SUBCASE("too few samples") {
        CHECK_THROWS_AS(fit_slope({10.0, 20.0}, {1.0, 2.0}, FitModel::complex_probe),
                        ValidationError);
    }
}

TEST_CASE("T0 estimation preconditions") {
    auto mk = [](const std::vector<double>& taus) {
        std::vector<IndicatorSample> s;
        for (double t : taus) s.push_back({t, 0.0, -0.25 * t + std::sqrt(t), 0.0, false});
        return s;
    };
    // tau below 10 is rejected
    CHECK_THROWS_AS(estimate_T0_from_samples(mk(log_grid(5.0, 100.0, 10))),
                    ValidationError);
    // fewer than 6 usable samples
    CHECK_THROWS_AS(estimate_T0_from_samples(mk({10, 20, 30, 40, 50})), GateError);
    // synthetic recovery: t0 = -slope
    const T0Estimate e = estimate_T0_from_samples(mk(log_grid(10.0, 100.0, 12)));
    CHECK(e.t0 == doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("support estimation preconditions") {
    auto mk = [](const std::vector<double>& taus, double slope) {
        std::vector<IndicatorSample> s;
        for (double t : taus) s.push_back({t, 0.0, slope * t + 2.0 * std::log(t), 0.0, false});
        return s;
    };
    // tau must exceed 1/c^2
    CHECK_THROWS_AS(estimate_support_from_samples(mk(log_grid(0.5, 50.0, 10), 0.3), 1.0),
                    ValidationError);
    const SupportEstimate e =
        estimate_support_from_samples(mk(log_grid(10.0, 40.0, 10), 0.35), 1.0);
    CHECK(e.h == doctest::Approx(0.35 / std::sqrt(2.0)).epsilon(1e-8));
    // floor hits are dropped; dropping below the minimum is a gate error
    auto s = mk(log_grid(10.0, 40.0, 10), 0.35);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) s[i].floor_hit = true;
    CHECK_THROWS_AS(estimate_support_from_samples(s, 1.0), GateError);
}

TEST_CASE("dichotomy classification on synthetic samples") {
    const std::vector<double> taus = log_grid(10.0, 80.0, 12);
    auto series = [&](double slope, bool floored = false) {
        std::vector<IndicatorSample> s;
        for (double t : taus) {
            IndicatorSample smp{t, 0.0, slope * t, 0.0, floored};
            if (floored) smp.log_abs = kLogIndicatorFloor;
            s.push_back(smp);
        }
        return s;
    };

    SUBCASE("clean crossover") {
        const std::vector<double> s_grid{0.1, 0.2, 0.3, 0.4};
        const DichotomyScan scan = dichotomy_scan_from_samples(
            {series(-0.5), series(-0.2), series(0.2), series(0.5)}, s_grid);
        CHECK(scan.classes[0].second == Dichotomy::decaying);
        CHECK(scan.classes[1].second == Dichotomy::decaying);
        CHECK(scan.classes[2].second == Dichotomy::growing);
        CHECK(scan.classes[3].second == Dichotomy::growing);
        REQUIRE(scan.crossover.has_value());
        CHECK(scan.crossover->first == 0.2);
        CHECK(scan.crossover->second == 0.3);
    }

    SUBCASE("dead band is indeterminate") {
        const DichotomyScan scan =
            dichotomy_scan_from_samples({series(0.005)}, {0.1});
        CHECK(scan.classes[0].second == Dichotomy::indeterminate);
    }

    SUBCASE("floor-only series is indeterminate") {
        const DichotomyScan scan = dichotomy_scan_from_samples(
            {series(0.0, true), series(0.0, true)}, {0.1, 0.2});
        CHECK(scan.classes[0].second == Dichotomy::indeterminate);
        CHECK(scan.classes[1].second == Dichotomy::indeterminate);
        CHECK(!scan.crossover.has_value());
    }

    SUBCASE("inconsistent ordering yields no crossover") {
        const DichotomyScan scan = dichotomy_scan_from_samples(
            {series(0.5), series(-0.5)}, {0.1, 0.2});
        CHECK(!scan.crossover.has_value());
    }
}

TEST_CASE("end-to-end estimates on a moderate grid") {
    const BoundaryData bd = reference_boundary(300, 3000, 0.25);

    SUBCASE("onset recovery") {
        const T0Estimate e = estimate_T0(bd, {1.0}, log_grid(20.0, 120.0, 12));
        CHECK(std::abs(e.t0 - 0.25) < 0.05);
    }

    SUBCASE("support recovery, both faces") {
        const SupportEstimate right =
            estimate_support(bd, {1.0}, std::nullopt, 1.0, log_grid(10.0, 34.0, 12));
        CHECK(std::abs(right.h - (0.6 - 0.25) / std::sqrt(2.0)) < 0.05);
        const SupportEstimate left =
            estimate_support(bd, {1.0}, std::nullopt, -1.0, log_grid(10.0, 34.0, 12));
        CHECK(std::abs(left.h - (-0.4 - 0.25) / std::sqrt(2.0)) < 0.05);
    }

    SUBCASE("dichotomy around the onset") {
        auto family = [](double tau) { return real_probe({1.0}, tau); };
        const DichotomyScan scan = dichotomy_scan(
            bd, family, {0.1, 0.4}, log_grid(20.0, 120.0, 12));
        CHECK(scan.classes[0].second == Dichotomy::decaying);
        CHECK(scan.classes[1].second == Dichotomy::growing);
    }
}

TEST_CASE("earliest onset wins with two components") {
    const SpatialDomain dom = make_interval(0.0, 1.0);
    SourceSpec spec = reference_source(0.25);
    SourceComponent late;
    late.region = {{0.7}, {0.85}};
    late.onset = 0.5;
    late.active_until = 1.0;
    late.density = Polynomial::constant(1.0);
    spec.components.push_back(late);
    const Grid grid = make_grid(dom, 300, 0, 3000, 1.0);
    const BoundaryData bd =
        solve_forward(dom, spec, grid, BoundaryCondition::neumann0, 1.0).boundary;
    const T0Estimate e = estimate_T0(bd, {1.0}, log_grid(20.0, 120.0, 12));
    CHECK(std::abs(e.t0 - 0.25) < 0.05);
}

TEST_CASE("immediate onset is recovered as zero") {
    const BoundaryData bd = reference_boundary(300, 3000, 0.0);
    const T0Estimate e = estimate_T0(bd, {1.0}, log_grid(20.0, 120.0, 12));
    CHECK(std::abs(e.t0) <= 0.02);
}

TEST_CASE("enclosure assembly with residual gating") {
    const BoundaryData bd = reference_boundary(400, 4000, 0.25);
    std::vector<DirectionRequest> dirs;
    dirs.push_back({{1.0}, 1.0, log_grid(10.0, 39.0, 12)});
    dirs.push_back({{1.0}, -1.0, log_grid(10.0, 39.0, 12)});
    dirs.push_back({{1.0}, 2.0, log_grid(6.0, 19.5, 12)});
    dirs.push_back({{1.0}, -2.0, log_grid(6.0, 19.5, 12)});
    const Vec lo{0.0, 0.0}, hi{1.0, 1.0};

    SUBCASE("permissive gate keeps every direction") {
        EnclosureOptions opts;
        opts.residual_gate = 0.5;
        const EnclosureResult r = build_enclosure(bd, dirs, lo, hi, opts);
        CHECK(r.records.size() == 4);
        for (const auto& rec : r.records) CHECK(!rec.rejected);
        REQUIRE(!r.polytope.empty);
        // every rasterized source point stays inside up to fit error
        CHECK(containment_fraction(r.polytope, rasterize_source(reference_source(), 30),
                                   0.08) > 0.95);
    }

    SUBCASE("tight gate rejects the high-residual c = +-1 fits only") {
        EnclosureOptions opts;
        opts.residual_gate = 0.05;
        const EnclosureResult r = build_enclosure(bd, dirs, lo, hi, opts);
        int kept = 0;
        for (const auto& rec : r.records)
            if (!rec.rejected) ++kept;
        CHECK(kept == 2);
        for (const auto& rec : r.records)
            if (std::abs(rec.c) == 1.0) CHECK(rec.rejected);
    }

    SUBCASE("rejecting everything is a gate error") {
        EnclosureOptions opts;
        opts.residual_gate = 1e-12;
        CHECK_THROWS_AS(build_enclosure(bd, dirs, lo, hi, opts), GateError);
    }

    SUBCASE("optional T0 pass") {
        EnclosureOptions opts;
        opts.t0_tau_grid = log_grid(20.0, 120.0, 12);
        const EnclosureResult r = build_enclosure(bd, dirs, lo, hi, opts);
        REQUIRE(r.t0_estimate.has_value());
        CHECK(std::abs(*r.t0_estimate - 0.25) <= 0.03);
    }
}

TEST_CASE("trace noise is deterministic in the seed") {
    BoundaryData a = reference_boundary(100, 400);
    BoundaryData b = reference_boundary(100, 400);
    BoundaryData c = reference_boundary(100, 400);
    add_trace_noise(a, 1e-3, 7);
    add_trace_noise(b, 1e-3, 7);
    add_trace_noise(c, 1e-3, 8);
    CHECK(a.dirichlet == b.dirichlet);
    CHECK(a.neumann == b.neumann);
    CHECK(a.dirichlet != c.dirichlet);
    // noise actually changed something
    const BoundaryData clean = reference_boundary(100, 400);
    CHECK(a.dirichlet != clean.dirichlet);
}
