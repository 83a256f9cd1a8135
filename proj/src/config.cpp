#include "heatenc/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "heatenc/errors.hpp"
#include "heatenc/probes.hpp"
#include "json.hpp"

namespace heatenc {

using nlohmann::json;

std::string fnv1a_hex(const std::string& text) {
    unsigned long long h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", h);
    return buf;
}

SpatialDomain ScenarioConfig::make_domain() const {
    if (dim == 1) return make_interval(x_lo, x_hi);
    return make_rectangle(x_lo, x_hi, y_lo, y_hi, nx, ny);
}

Grid ScenarioConfig::make_solver_grid() const {
    return make_grid(make_domain(), nx, ny, nt, T);
}

namespace {

Vec parse_vec(const json& j, std::size_t dim, const std::string& what) {
    if (!j.is_array() || j.size() != dim)
        throw ValidationError("config: " + what + " must be an array of length " +
                              std::to_string(dim));
    Vec v;
    for (const auto& e : j) v.push_back(e.get<double>());
    return v;
}

std::vector<double> parse_grid_spec(const json& j, const std::string& what) {
    std::vector<double> out;
    if (j.is_array()) {
        for (const auto& e : j) out.push_back(e.get<double>());
    } else if (j.is_object()) {
        const double lo = j.at("min").get<double>();
        const double hi = j.at("max").get<double>();
        const int n = j.at("count").get<int>();
        const std::string spacing = j.value("spacing", "log");
        if (n < 1 || !(hi > lo) || (spacing == "log" && !(lo > 0.0)))
            throw ValidationError("config: bad grid spec for " + what);
        for (int k = 0; k < n; ++k) {
            const double f = n == 1 ? 0.0 : static_cast<double>(k) / (n - 1);
            out.push_back(spacing == "log" ? lo * std::pow(hi / lo, f)
                                           : lo + (hi - lo) * f);
        }
    } else {
        throw ValidationError("config: " + what + " must be an array or {min,max,count}");
    }
    if (out.empty()) throw ValidationError("config: empty grid for " + what);
    for (std::size_t i = 1; i < out.size(); ++i)
        if (!(out[i] > out[i - 1]))
            throw ValidationError("config: " + what + " must be strictly increasing");
    return out;
}

Polynomial parse_density(const json& j) {
    Polynomial p;
    for (const auto& t : j) {
        Polynomial::Term term;
        term.px = t.value("px", 0);
        term.py = t.value("py", 0);
        term.pt = t.value("pt", 0);
        term.coeff = t.at("coeff").get<double>();
        if (term.px < 0 || term.py < 0 || term.pt < 0)
            throw ValidationError("config: density exponents must be nonnegative");
        p.terms.push_back(term);
    }
    return p;
}

void check_gates(const ScenarioConfig& cfg) {
    // resolution gate: every source region spans >= 8 cells per axis
    if (!cfg.source.components.empty()) {
        const double hx = (cfg.x_hi - cfg.x_lo) / cfg.nx;
        const double hy = cfg.dim == 2 ? (cfg.y_hi - cfg.y_lo) / cfg.ny : 0.0;
        for (const auto& comp : cfg.source.components) {
            Vec lo(cfg.dim, 1e300), hi(cfg.dim, -1e300);
            for (const Vec& v : comp.region)
                for (int d = 0; d < cfg.dim; ++d) {
                    lo[d] = std::min(lo[d], v[d]);
                    hi[d] = std::max(hi[d], v[d]);
                }
            if (hx > (hi[0] - lo[0]) / 8 + 1e-12 ||
                (cfg.dim == 2 && hy > (hi[1] - lo[1]) / 8 + 1e-12))
                throw ValidationError(
                    "config: resolution gate: source region must span >= 8 cells per axis");
        }
    }
    // oscillation gate for every complex1d (tau, c) pair in probes and directions
    auto check_osc = [&](double c, double tau) {
        const int need = oscillation_gate_min_nt(c, tau, cfg.T);
        if (cfg.nt < need)
            throw ValidationError("config: oscillation gate: nt=" + std::to_string(cfg.nt) +
                                  " < required " + std::to_string(need) + " at c=" +
                                  std::to_string(c) + ", tau=" + std::to_string(tau));
    };
    for (const auto& pb : cfg.probes)
        if (pb.kind == "complex1d")
            for (double c : pb.cs)
                for (double tau : pb.tau_grid) check_osc(c, tau);
    if (cfg.dim == 1)
        for (const auto& dr : cfg.directions)
            for (double tau : dr.tau_grid) check_osc(dr.c, tau);
}

} // namespace

ScenarioConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: parse failure: ") + e.what());
    }

    ScenarioConfig cfg;
    try {
        cfg.schema_version = j.at("schema_version").get<int>();
        if (cfg.schema_version != kSchemaVersion)
            throw ValidationError("config: unsupported schema_version");

        const json& dom = j.at("domain");
        cfg.dim = dom.at("dim").get<int>();
        if (cfg.dim != 1 && cfg.dim != 2)
            throw ValidationError("config: dim must be 1 or 2");
        const Vec xb = parse_vec(dom.at("x"), 2, "domain.x");
        cfg.x_lo = xb[0];
        cfg.x_hi = xb[1];
        if (cfg.dim == 2) {
            const Vec yb = parse_vec(dom.at("y"), 2, "domain.y");
            cfg.y_lo = yb[0];
            cfg.y_hi = yb[1];
        }
        const json& grid = dom.at("grid");
        cfg.nx = grid.at(0).get<int>();
        if (cfg.dim == 2) cfg.ny = grid.at(1).get<int>();
        cfg.nt = dom.at("nt").get<int>();
        cfg.T = dom.at("T").get<double>();
        cfg.bc = parse_boundary_condition(dom.value("bc", "neumann0"));
        if (!(cfg.x_hi > cfg.x_lo) || (cfg.dim == 2 && !(cfg.y_hi > cfg.y_lo)))
            throw ValidationError("config: degenerate domain bounds");
        if (!(cfg.T > 0.0) || cfg.nt < 1) throw ValidationError("config: bad T/nt");

        if (j.contains("source")) {
            const json& src = j.at("source");
            cfg.source.measure_exponent = src.value("measure_exponent", 0.0);
            for (const auto& c : src.value("components", json::array())) {
                SourceComponent comp;
                for (const auto& v : c.at("region"))
                    comp.region.push_back(parse_vec(v, cfg.dim, "source region vertex"));
                comp.onset = c.at("onset").get<double>();
                comp.active_until = c.value("active_until", cfg.T);
                comp.density = parse_density(c.at("density"));
                comp.holder_exponent = c.value("holder_exponent", 1.0);
                cfg.source.components.push_back(std::move(comp));
            }
            validate(cfg.source, cfg.dim);
            if (!cfg.source.components.empty() && cfg.source.horizon() > cfg.T + 1e-12)
                throw ValidationError("config: source active beyond T");
        }

        for (const auto& pj : j.value("probes", json::array())) {
            ProbeBlock pb;
            pb.kind = pj.at("kind").get<std::string>();
            if (pb.kind != "real" && pb.kind != "complex1d" && pb.kind != "complex2d")
                throw ValidationError("config: unknown probe kind " + pb.kind);
            if (pb.kind == "complex1d" && cfg.dim != 1)
                throw ValidationError("config: complex1d probes need dim=1");
            if (pb.kind == "complex2d" && cfg.dim != 2)
                throw ValidationError("config: complex2d probes need dim=2");
            for (const auto& o : pj.value("omegas", json::array()))
                pb.omegas.push_back(parse_vec(o, cfg.dim, "probe omega"));
            if (pb.kind != "complex1d" && pb.omegas.empty())
                throw ValidationError("config: probe block needs omegas");
            for (const auto& c : pj.value("c", json::array()))
                pb.cs.push_back(c.get<double>());
            if (pb.kind != "real" && pb.cs.empty())
                throw ValidationError("config: complex probe block needs c values");
            pb.tau_grid = parse_grid_spec(pj.at("tau"), "probe tau");
            if (pj.contains("s")) {
                for (const auto& s : pj.at("s")) pb.s_grid.push_back(s.get<double>());
            }
            if (pb.s_grid.empty()) pb.s_grid = {0.0};
            cfg.probes.push_back(std::move(pb));
        }

        if (j.contains("estimators")) {
            const json& est = j.at("estimators");
            cfg.residual_gate = est.value("residual_gate", 0.5);
            if (!(cfg.residual_gate > 0.0))
                throw ValidationError("config: residual_gate must be positive");
            for (const auto& dj : est.value("directions", json::array())) {
                DirectionRequest dr;
                dr.omega = cfg.dim == 1 ? Vec{1.0}
                                        : parse_vec(dj.at("omega"), 2, "direction omega");
                dr.c = dj.at("c").get<double>();
                dr.tau_grid = parse_grid_spec(dj.at("tau"), "direction tau");
                cfg.directions.push_back(std::move(dr));
            }
            if (est.contains("t0")) {
                cfg.t0_tau_grid = parse_grid_spec(est.at("t0").at("tau"), "t0 tau");
                cfg.t0_omega = est.at("t0").contains("omega")
                                   ? parse_vec(est.at("t0").at("omega"), cfg.dim, "t0 omega")
                                   : Vec{};
            }
        }

        if (j.contains("output")) cfg.out_dir = j.at("output").value("dir", ".");
        if (j.contains("noise")) {
            cfg.noise_sigma = j.at("noise").value("sigma", 0.0);
            cfg.seed = j.at("noise").value("seed", 0ull);
            if (cfg.noise_sigma < 0.0)
                throw ValidationError("config: noise sigma must be >= 0");
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: schema: ") + e.what());
    }

    // probe parameter sanity via the constructors themselves
    for (const auto& pb : cfg.probes) {
        if (pb.kind == "real")
            for (const auto& o : pb.omegas) real_probe(o, pb.tau_grid.front());
        if (pb.kind == "complex1d")
            for (double c : pb.cs) complex_probe_1d(c, pb.tau_grid.front());
        if (pb.kind == "complex2d")
            for (const auto& o : pb.omegas)
                for (double c : pb.cs) complex_probe(o, std::nullopt, c, pb.tau_grid.front());
    }
    check_gates(cfg);

    cfg.hash = fnv1a_hex(json::parse(json_text).dump());
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace heatenc
