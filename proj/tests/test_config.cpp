#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "heatenc/config.hpp"
#include "heatenc/errors.hpp"
#include "heatenc/pipeline.hpp"

using namespace heatenc;

namespace {

// Small, fast scenario used throughout the IO tests.
const char* kSmallConfig = R"json({
  "schema_version": 1,
  "domain": {"dim": 1, "x": [0.0, 1.0], "grid": [80], "nt": 2000, "T": 1.0, "bc": "neumann0"},
  "source": {
    "components": [
      {"region": [[0.4], [0.6]], "onset": 0.25, "density": [{"coeff": 1.0}]}
    ]
  },
  "probes": [
    {"kind": "real", "omegas": [[1.0]], "tau": {"min": 10, "max": 40, "count": 6, "spacing": "log"}, "s": [0.0, 0.1]},
    {"kind": "complex1d", "c": [1.0, -1.0], "tau": [8.0, 10.0, 13.0, 16.0, 20.0, 26.0]}
  ],
  "estimators": {
    "residual_gate": 0.5,
    "directions": [
      {"c": 1.0, "tau": [8.0, 10.0, 13.0, 16.0, 20.0, 26.0]},
      {"c": -1.0, "tau": [8.0, 10.0, 13.0, 16.0, 20.0, 26.0]}
    ]
  },
  "output": {"dir": "OUTDIR"},
  "noise": {"sigma": 0.0, "seed": 42}
})json";

std::string small_config(const std::string& out_dir) {
    std::string s = kSmallConfig;
    s.replace(s.find("OUTDIR"), 6, out_dir);
    return s;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string fresh_dir(const std::string& tag) {
    const std::string d = "/tmp/heatenc_test_" + tag;
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
}

} // namespace

TEST_CASE("config parsing and defaults") {
    const ScenarioConfig cfg = parse_config(small_config("/tmp/x"));
    CHECK(cfg.dim == 1);
    CHECK(cfg.nx == 80);
    CHECK(cfg.nt == 2000);
    CHECK(cfg.bc == BoundaryCondition::neumann0);
    CHECK(cfg.source.components.size() == 1);
    CHECK(cfg.probes.size() == 2);
    REQUIRE(cfg.probes[0].tau_grid.size() == 6);
    CHECK(cfg.probes[0].tau_grid.front() == doctest::Approx(10.0));
    CHECK(cfg.probes[0].tau_grid.back() == doctest::Approx(40.0));
    CHECK(cfg.probes[1].s_grid == std::vector<double>{0.0});  // default s grid
    CHECK(cfg.residual_gate == 0.5);
    CHECK(!cfg.t0_tau_grid.has_value());
    CHECK(cfg.hash.size() == 16);
}

TEST_CASE("config validation errors") {
    auto patched = [](const std::string& from, const std::string& to) {
        std::string s = small_config("/tmp/x");
        const auto pos = s.find(from);
        REQUIRE(pos != std::string::npos);
        s.replace(pos, from.size(), to);
        return s;
    };

    CHECK_THROWS_AS(parse_config(patched("\"schema_version\": 1", "\"schema_version\": 2")),
                    ValidationError);
    CHECK_THROWS_AS(parse_config(patched("\"dim\": 1", "\"dim\": 3")), ValidationError);
    // resolution gate: region extent 0.2 spans < 8 cells at nx = 20
    CHECK_THROWS_AS(parse_config(patched("\"grid\": [80]", "\"grid\": [20]")),
                    ValidationError);
    // oscillation gate: c=1 tau=26 needs nt >= 8*676/pi ~ 1722 > 300
    CHECK_THROWS_AS(parse_config(patched("\"nt\": 2000", "\"nt\": 300")), ValidationError);
    // onset past the horizon
    CHECK_THROWS_AS(parse_config(patched("\"onset\": 0.25", "\"onset\": 1.5")),
                    ValidationError);
    // complex1d probes are 1D-only
    CHECK_THROWS_AS(
        parse_config(patched("\"dim\": 1, \"x\": [0.0, 1.0], \"grid\": [80]",
                             "\"dim\": 2, \"x\": [0.0, 1.0], \"y\": [0.0, 1.0], "
                             "\"grid\": [80, 80]")),
        ValidationError);
    // malformed JSON
    CHECK_THROWS_AS(parse_config("{nope"), ValidationError);
    // tau grid must increase
    CHECK_THROWS_AS(parse_config(patched("[8.0, 10.0, 13.0, 16.0, 20.0, 26.0]",
                                         "[16.0, 12.0, 14.0, 10.0]")),
                    ValidationError);
}

TEST_CASE("config hash is content-based") {
    const ScenarioConfig a = parse_config(small_config("/tmp/x"));
    std::string spaced = small_config("/tmp/x");
    spaced.insert(1, "\n   \n");
    const ScenarioConfig b = parse_config(spaced);
    CHECK(a.hash == b.hash);

    std::string changed = small_config("/tmp/x");
    changed.replace(changed.find("0.25"), 4, "0.30");
    CHECK(parse_config(changed).hash != a.hash);
}

TEST_CASE("boundary CSV roundtrip") {
    const std::string dir = fresh_dir("boundary");
    const ScenarioConfig cfg = parse_config(small_config(dir));
    const SolveResult r = solve_forward(cfg.make_domain(), cfg.source,
                                        cfg.make_solver_grid(), cfg.bc, cfg.T);
    const std::string path = dir + "/boundary.csv";
    write_boundary_csv(path, r.boundary, cfg);

    const BoundaryData back = read_boundary_csv(path, cfg);
    REQUIRE(back.nodes.size() == r.boundary.nodes.size());
    REQUIRE(back.nt == r.boundary.nt);
    for (std::size_t n = 0; n < back.nodes.size(); ++n)
        for (int k = 0; k <= back.nt; ++k) {
            CHECK(back.dirichlet[n][k] == r.boundary.dirichlet[n][k]);
            CHECK(back.neumann[n][k] == r.boundary.neumann[n][k]);
        }

    // header carries version and hash; 1D has 2 nodes x (nt+1) rows
    const std::string text = read_file(path);
    CHECK(text.find(kToolVersion) != std::string::npos);
    CHECK(text.find(cfg.hash) != std::string::npos);
    std::size_t rows = 0;
    for (char ch : text)
        if (ch == '\n') ++rows;
    CHECK(rows == 2 + 1 + 2 * (cfg.nt + 1));  // comments + header + data

    // rewriting is byte-identical
    write_boundary_csv(dir + "/boundary2.csv", r.boundary, cfg);
    CHECK(read_file(dir + "/boundary2.csv") == text);
}

TEST_CASE("sweep determinism and roundtrip") {
    const std::string dir = fresh_dir("sweep");
    const ScenarioConfig cfg = parse_config(small_config(dir));
    const SolveResult r = solve_forward(cfg.make_domain(), cfg.source,
                                        cfg.make_solver_grid(), cfg.bc, cfg.T);

    const std::vector<SweepRow> one = run_sweep(cfg, r.boundary, 1);
    const std::vector<SweepRow> four = run_sweep(cfg, r.boundary, 4);
    REQUIRE(one.size() == four.size());
    // 6 taus x 2 s  +  2 c's x 6 taus
    CHECK(one.size() == 6 * 2 + 2 * 6);
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].kind == four[i].kind);
        CHECK(one[i].sample.tau == four[i].sample.tau);
        CHECK(one[i].sample.log_abs == four[i].sample.log_abs);
        CHECK(one[i].sample.phase == four[i].sample.phase);
    }

    const std::string path = dir + "/sweep.csv";
    write_sweep_csv(path, one, cfg);
    const std::vector<SweepRow> back = read_sweep_csv(path);
    REQUIRE(back.size() == one.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(back[i].kind == one[i].kind);
        CHECK(back[i].c == one[i].c);
        CHECK(back[i].sample.tau == one[i].sample.tau);
        CHECK(back[i].sample.s == one[i].sample.s);
        CHECK(back[i].sample.log_abs == one[i].sample.log_abs);
        CHECK(back[i].sample.phase == one[i].sample.phase);
        CHECK(back[i].sample.floor_hit == one[i].sample.floor_hit);
    }
}

TEST_CASE("estimate requires sweep coverage") {
    const std::string dir = fresh_dir("coverage");
    ScenarioConfig cfg = parse_config(small_config(dir));
    const SolveResult r = solve_forward(cfg.make_domain(), cfg.source,
                                        cfg.make_solver_grid(), cfg.bc, cfg.T);
    // sweep only the real block, then ask for complex1d directions
    ScenarioConfig sweep_cfg = cfg;
    sweep_cfg.probes.resize(1);
    const std::vector<SweepRow> rows = run_sweep(sweep_cfg, r.boundary, 1);
    const std::string path = dir + "/sweep.csv";
    write_sweep_csv(path, rows, cfg);
    CHECK_THROWS_AS(cmd_estimate(cfg, path), ValidationError);
}

TEST_CASE("fnv1a hash fixed points") {
    // standard FNV-1a 64-bit test vectors
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}
