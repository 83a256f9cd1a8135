#include "heatenc/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "heatenc/errors.hpp"
#include "heatenc/oracle.hpp"
#include "heatenc/probes.hpp"
#include "json.hpp"

namespace heatenc {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_preamble(std::ostream& out, const ScenarioConfig& cfg) {
    out << "# " << kToolVersion << "\n# config " << cfg.hash << "\n";
}

std::ofstream open_out(const std::string& path) {
    const auto dir = std::filesystem::path(path).parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

// probe instances to evaluate, one per (block, omega/c, tau)
struct SweepTask {
    std::string kind;
    Vec omega;
    double c = 0.0;
    double tau = 0.0;
    std::vector<double> s_grid;
};

std::vector<SweepTask> build_tasks(const ScenarioConfig& cfg) {
    std::vector<SweepTask> tasks;
    for (const auto& pb : cfg.probes) {
        if (pb.kind == "real") {
            for (const auto& omega : pb.omegas)
                for (double tau : pb.tau_grid)
                    tasks.push_back({pb.kind, omega, 0.0, tau, pb.s_grid});
        } else if (pb.kind == "complex1d") {
            for (double c : pb.cs)
                for (double tau : pb.tau_grid)
                    tasks.push_back({pb.kind, Vec{1.0}, c, tau, pb.s_grid});
        } else {
            for (const auto& omega : pb.omegas)
                for (double c : pb.cs)
                    for (double tau : pb.tau_grid)
                        tasks.push_back({pb.kind, omega, c, tau, pb.s_grid});
        }
    }
    return tasks;
}

ProbeField make_probe(const SweepTask& task) {
    if (task.kind == "real") return real_probe(task.omega, task.tau);
    if (task.kind == "complex1d") return complex_probe_1d(task.c, task.tau);
    return complex_probe(task.omega, std::nullopt, task.c, task.tau);
}

} // namespace

void write_boundary_csv(const std::string& path, const BoundaryData& data,
                        const ScenarioConfig& cfg) {
    auto out = open_out(path);
    write_preamble(out, cfg);
    out << (data.dim == 1 ? "node_index,x,nu_x,t,u,dudnu"
                          : "node_index,x,y,nu_x,nu_y,t,u,dudnu")
        << "\n";
    for (std::size_t bn = 0; bn < data.nodes.size(); ++bn) {
        const BoundaryNode& node = data.nodes[bn];
        for (int k = 0; k <= data.nt; ++k) {
            out << bn << ',' << fmt(node.x[0]);
            if (data.dim == 2) out << ',' << fmt(node.x[1]);
            out << ',' << fmt(node.normal[0]);
            if (data.dim == 2) out << ',' << fmt(node.normal[1]);
            out << ',' << fmt(data.times[k]) << ',' << fmt(data.dirichlet[bn][k]) << ','
                << fmt(data.neumann[bn][k]) << "\n";
        }
    }
}

BoundaryData read_boundary_csv(const std::string& path, const ScenarioConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open boundary data: " + path);

    // skeleton rebuilt from the config: node set, weights, times
    BoundaryData data;
    data.dim = cfg.dim;
    data.T = cfg.T;
    data.nt = cfg.nt;
    data.bc = cfg.bc;
    data.nodes = cfg.make_domain().boundary_nodes;
    data.times.resize(cfg.nt + 1);
    for (int k = 0; k <= cfg.nt; ++k) data.times[k] = cfg.T * k / cfg.nt;
    data.dirichlet.assign(data.nodes.size(), std::vector<double>(cfg.nt + 1, 0.0));
    data.neumann.assign(data.nodes.size(), std::vector<double>(cfg.nt + 1, 0.0));

    std::string line;
    std::size_t bn = 0;
    int k = 0;
    bool seen_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!seen_header) {
            seen_header = true;  // column header
            continue;
        }
        const auto f = split_csv(line);
        const std::size_t expect = cfg.dim == 1 ? 6 : 8;
        if (f.size() != expect)
            throw ValidationError("boundary csv: bad column count in: " + line);
        if (bn >= data.nodes.size())
            throw ValidationError("boundary csv: more rows than expected");
        const std::size_t idx = std::stoul(f[0]);
        if (idx != bn) throw ValidationError("boundary csv: node order mismatch");
        const double x = std::stod(f[1]);
        if (std::abs(x - data.nodes[bn].x[0]) > 1e-9)
            throw ValidationError("boundary csv: node position mismatch with config");
        if (cfg.dim == 2 && std::abs(std::stod(f[2]) - data.nodes[bn].x[1]) > 1e-9)
            throw ValidationError("boundary csv: node position mismatch with config");
        const int toff = cfg.dim == 1 ? 3 : 5;
        if (std::abs(std::stod(f[toff]) - data.times[k]) > 1e-9)
            throw ValidationError("boundary csv: time grid mismatch with config");
        data.dirichlet[bn][k] = std::stod(f[toff + 1]);
        data.neumann[bn][k] = std::stod(f[toff + 2]);
        if (++k > cfg.nt) {
            k = 0;
            ++bn;
        }
    }
    if (bn != data.nodes.size() || k != 0)
        throw ValidationError("boundary csv: truncated data");
    return data;
}

void write_snapshot_csv(const std::string& path, const FieldSnapshot& snapshot,
                        const ScenarioConfig& cfg) {
    auto out = open_out(path);
    write_preamble(out, cfg);
    out << (snapshot.dim == 1 ? "x,weight,u" : "x,y,weight,u") << "\n";
    const std::size_t X = snapshot.xs.size();
    const std::size_t Y = snapshot.dim == 2 ? snapshot.ys.size() : 1;
    for (std::size_t j = 0; j < Y; ++j)
        for (std::size_t i = 0; i < X; ++i) {
            out << fmt(snapshot.xs[i]);
            if (snapshot.dim == 2) out << ',' << fmt(snapshot.ys[j]);
            out << ',' << fmt(snapshot.weights[j * X + i]) << ','
                << fmt(snapshot.u_final[j * X + i]) << "\n";
        }
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows,
                     const ScenarioConfig& cfg) {
    auto out = open_out(path);
    write_preamble(out, cfg);
    const int dim = cfg.dim;
    out << (dim == 1 ? "kind,omega_x,c,tau,s,log_abs,phase,floor_hit"
                     : "kind,omega_x,omega_y,c,tau,s,log_abs,phase,floor_hit")
        << "\n";
    for (const auto& row : rows) {
        out << row.kind << ',' << fmt(row.omega[0]);
        if (dim == 2) out << ',' << fmt(row.omega.size() > 1 ? row.omega[1] : 0.0);
        out << ',' << fmt(row.c) << ',' << fmt(row.sample.tau) << ','
            << fmt(row.sample.s) << ',' << fmt(row.sample.log_abs) << ','
            << fmt(row.sample.phase) << ',' << (row.sample.floor_hit ? 1 : 0) << "\n";
    }
}

std::vector<SweepRow> read_sweep_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open sweep: " + path);
    std::vector<SweepRow> rows;
    std::string line;
    bool seen_header = false;
    std::size_t ncols = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!seen_header) {
            seen_header = true;
            ncols = split_csv(line).size();
            if (ncols != 8 && ncols != 9)
                throw ValidationError("sweep csv: unexpected header: " + line);
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != ncols) throw ValidationError("sweep csv: bad row: " + line);
        SweepRow row;
        row.kind = f[0];
        row.omega = {std::stod(f[1])};
        std::size_t i = 2;
        if (ncols == 9) row.omega.push_back(std::stod(f[i++]));
        row.c = std::stod(f[i++]);
        row.sample.tau = std::stod(f[i++]);
        row.sample.s = std::stod(f[i++]);
        row.sample.log_abs = std::stod(f[i++]);
        row.sample.phase = std::stod(f[i++]);
        row.sample.floor_hit = f[i] == "1";
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<SweepRow> run_sweep(const ScenarioConfig& cfg, const BoundaryData& data,
                                int jobs) {
    const auto tasks = build_tasks(cfg);
    if (tasks.empty()) throw ValidationError("sweep: no probe blocks configured");
    std::vector<IndicatorSample> base(tasks.size());
    std::vector<std::string> failures(tasks.size());

    jobs = std::max(1, jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                base[i] = indicator(data, make_probe(tasks[i]), 0.0);
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& msg : failures)
        if (!msg.empty()) throw GateError("sweep: " + msg);

    // expand per-s rows in deterministic task order via the exact shift law
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < tasks.size(); ++i)
        for (double s : tasks[i].s_grid) {
            SweepRow row;
            row.kind = tasks[i].kind;
            row.omega = tasks[i].omega;
            row.c = tasks[i].c;
            row.sample = base[i];
            row.sample.s = s;
            row.sample.log_abs = base[i].log_abs + tasks[i].tau * s;
            rows.push_back(std::move(row));
        }
    return rows;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_simulate(const ScenarioConfig& cfg) {
    const SpatialDomain domain = cfg.make_domain();
    const Grid grid = cfg.make_solver_grid();
    SolveResult res = solve_forward(domain, cfg.source, grid, cfg.bc, cfg.T);
    if (cfg.noise_sigma > 0.0) add_trace_noise(res.boundary, cfg.noise_sigma, cfg.seed);
    write_boundary_csv(cfg.out_dir + "/boundary.csv", res.boundary, cfg);
    write_snapshot_csv(cfg.out_dir + "/snapshot.csv", res.snapshot, cfg);
    return 0;
}

int cmd_sweep(const ScenarioConfig& cfg, const std::string& data_path, int jobs) {
    const BoundaryData data = read_boundary_csv(data_path, cfg);
    const auto rows = run_sweep(cfg, data, jobs);
    write_sweep_csv(cfg.out_dir + "/sweep.csv", rows, cfg);
    return 0;
}

namespace {

// rows for one (kind, omega, c) family at s = 0, sorted by tau, coverage-checked
std::vector<IndicatorSample> match_rows(const std::vector<SweepRow>& rows,
                                        const std::string& kind, const Vec& omega,
                                        double c, const std::vector<double>& tau_grid) {
    std::vector<IndicatorSample> out;
    for (double tau : tau_grid) {
        bool found = false;
        for (const auto& row : rows) {
            if (row.kind != kind || row.sample.s != 0.0) continue;
            if (std::abs(row.c - c) > 1e-12) continue;
            if (std::abs(row.sample.tau - tau) > 1e-9 * std::max(1.0, tau)) continue;
            bool same_omega = row.omega.size() >= omega.size();
            for (std::size_t d = 0; d < omega.size() && same_omega; ++d)
                same_omega = std::abs(row.omega[d] - omega[d]) < 1e-12;
            if (!same_omega) continue;
            out.push_back(row.sample);
            found = true;
            break;
        }
        if (!found)
            throw ValidationError("estimate: sweep is missing kind=" + kind +
                                  " c=" + fmt(c) + " tau=" + fmt(tau) + " at s=0");
    }
    return out;
}

json fit_to_json(const SlopeFit& fit) {
    return json{{"slope", fit.slope},
                {"coeffs", fit.coeffs},
                {"residual_norm", fit.residual_norm},
                {"condition", fit.condition},
                {"tau_grid", fit.tau_grid}};
}

} // namespace

int cmd_estimate(const ScenarioConfig& cfg, const std::string& sweep_path) {
    if (cfg.directions.empty())
        throw ValidationError("estimate: no directions configured");
    const auto rows = read_sweep_csv(sweep_path);

    json out;
    out["version"] = kToolVersion;
    out["config_hash"] = cfg.hash;

    std::vector<std::pair<SpaceTimeDirection, double>> accepted;
    json records = json::array();
    const std::string kind = cfg.dim == 1 ? "complex1d" : "complex2d";
    for (const auto& dr : cfg.directions) {
        const auto samples = match_rows(rows, kind, dr.omega, dr.c, dr.tau_grid);
        json rec{{"omega", dr.omega}, {"c", dr.c}};
        bool rejected = false;
        try {
            const SupportEstimate est = estimate_support_from_samples(samples, dr.c);
            rec["h"] = est.h;
            rec["fit"] = fit_to_json(est.fit);
            rejected = est.fit.residual_norm > cfg.residual_gate;
            if (!rejected) accepted.emplace_back(omega_c(dr.omega, dr.c), est.h);
        } catch (const GateError& e) {
            rejected = true;
            rec["gate_error"] = e.what();
        }
        rec["rejected"] = rejected;
        records.push_back(std::move(rec));
    }
    out["records"] = std::move(records);
    if (accepted.empty()) throw GateError("estimate: every direction was rejected");

    Vec clip_lo{cfg.x_lo}, clip_hi{cfg.x_hi};
    if (cfg.dim == 2) {
        clip_lo.push_back(cfg.y_lo);
        clip_hi.push_back(cfg.y_hi);
    }
    clip_lo.push_back(0.0);
    clip_hi.push_back(cfg.T);
    const SpaceTimePolytope poly = intersect_halfspaces(accepted, clip_lo, clip_hi);
    json pj;
    pj["empty"] = poly.empty;
    pj["halfspaces"] = json::array();
    for (const auto& hs : poly.halfspaces)
        pj["halfspaces"].push_back({{"normal", hs.normal}, {"offset", hs.offset}});
    pj["vertices"] = poly.vertices;
    out["polytope"] = std::move(pj);

    if (cfg.t0_tau_grid) {
        Vec omega = cfg.t0_omega;
        if (omega.empty()) {
            omega.assign(cfg.dim, 0.0);
            omega[0] = 1.0;
        }
        const auto samples = match_rows(rows, "real", omega, 0.0, *cfg.t0_tau_grid);
        const T0Estimate est = estimate_T0_from_samples(samples);
        out["t0"] = est.t0;
        out["t0_fit"] = fit_to_json(est.fit);
    }

    auto os = open_out(cfg.out_dir + "/enclosure.json");
    os << out.dump(2) << "\n";
    return 0;
}

namespace {

// fixed-resolution composite Simpson used for the oracle spot checks
std::complex<double> simpson_01(const std::function<std::complex<double>(double)>& f,
                                int n) {
    std::complex<double> s = f(0.0) + f(1.0);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(k / static_cast<double>(n));
    return s / (3.0 * n);
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
        // orthonormal tangents of the base plane
        Vec t1{-dir.vec[1], dir.vec[0], 0.0};
        double n1 = norm(t1);
        if (n1 < 1e-6) t1 = {1.0, 0.0, 0.0};
        else t1 = {t1[0] / n1, t1[1] / n1, 0.0};
        const Vec3 t2c = cross(Vec3{dir.vec[0], dir.vec[1], dir.vec[2]},
                               Vec3{t1[0], t1[1], t1[2]});
        const Vec t2{t2c[0], t2c[1], t2c[2]};
        Vec foot(3);
        for (int d = 0; d < 3; ++d) foot[d] = cone.vertex[d] - cone.delta * dir.vec[d];
        double area2 = 0.0;
        std::vector<Vec> base;
        std::vector<std::pair<double, double>> ab;
        for (int k = 0; k < 3; ++k) ab.emplace_back(uni(rng), uni(rng));
        area2 = std::abs((ab[1].first - ab[0].first) * (ab[2].second - ab[0].second) -
                         (ab[2].first - ab[0].first) * (ab[1].second - ab[0].second));
        if (area2 < 0.1) continue;
        for (int k = 0; k < 3; ++k) {
            Vec y(3);
            for (int d = 0; d < 3; ++d)
                y[d] = foot[d] + ab[k].first * t1[d] + ab[k].second * t2[d];
            base.push_back(std::move(y));
        }
        cone.base = std::move(base);
        return cone;
    }
}

} // namespace

int cmd_oracle(const ScenarioConfig& cfg, const OracleOptions& opts) {
    json checks = json::array();
    bool all_pass = true;
    auto enabled = [&](const std::string& name) {
        return opts.only.empty() || name.rfind(opts.only, 0) == 0;
    };
    auto record = [&](const std::string& name, bool pass, double max_err) {
        checks.push_back({{"name", name}, {"pass", pass}, {"max_err", max_err}});
        all_pass = all_pass && pass;
    };

    std::mt19937_64 rng(cfg.seed + 1);

    if (enabled("moment")) {
        double worst = 0.0;
        for (int n = 0; n <= 5; ++n)
            for (double a : {0.0, 1.0, -1.0, 3.0, -3.0}) {
                const auto exact = cone_moment(n, a);
                const auto quad = cone_moment_quadrature(n, a);
                worst = std::max(worst, std::abs(exact - quad) / std::abs(exact));
            }
        record("moment", worst <= 1e-8, worst);
    }

    if (enabled("kd")) {
        double worst = 0.0;
        double min_abs = 1e300;
        for (double c : {0.5, 1.0, 2.0, 4.0})
            for (int rep = 0; rep < 10; ++rep) {
                const ConeSpec cone = random_cone(rng, c);
                const Vec perp{-cone.dir.omega[1], cone.dir.omega[0]};
                const KDValue q = kd_quadrature(cone, perp);
                const KDValue cf = kd_closed_form(cone, perp);
                worst = std::max(worst,
                                 std::abs(q.value - cf.value) / std::abs(q.value));
                min_abs = std::min(min_abs, std::abs(cf.value));
            }
        record("kd", worst <= opts.kd_tol && min_abs > 0.0, worst);
    }

    if (enabled("segment")) {
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        const double tau = 50.0;
        double worst = 0.0;
        for (int rep = 0; rep < 20; ++rep) {
            const double c = 0.5 + (uni(rng) + 1.0);
            const double delta = 0.4 + 0.2 * (uni(rng) + 1.0);
            const Vec p{uni(rng), uni(rng)};
            const Vec y0{uni(rng), uni(rng)};
            const Vec y1{uni(rng), uni(rng)};
            const Vec gr{uni(rng), uni(rng)};
            if (norm(sub(y1, y0)) < 0.1) continue;
            const auto seg = segment_integrals(y0, y1, p, gr, c, delta, tau);
            const double root = std::sqrt(c * c + 1.0);
            const double len = norm(sub(y1, y0));
            auto at = [&](double eta) {
                Vec y(2);
                for (int d = 0; d < 2; ++d) y[d] = y0[d] + eta * (y1[d] - y0[d]);
                return y;
            };
            const auto q1 = simpson_01(
                [&](double eta) {
                    const double B = segment_b_factor(at(eta), p, c, delta, tau);
                    return len / std::pow(std::complex<double>(root, -B), 2);
                },
                20000);
            const auto q2 = simpson_01(
                [&](double eta) {
                    const Vec y = at(eta);
                    const double B = segment_b_factor(y, p, c, delta, tau);
                    return 2.0 * dot(gr, sub(y, p)) * len /
                           std::pow(std::complex<double>(root, -B), 3);
                },
                20000);
            worst = std::max(worst, std::abs(seg.j1 - q1) / std::abs(q1));
            worst = std::max(worst, std::abs(seg.j2 - q2) / std::abs(q2));
        }
        record("segment", worst <= 1e-9, worst);
    }

    if (enabled("volume") && !cfg.source.components.empty() && !cfg.probes.empty()) {
        const SpatialDomain domain = cfg.make_domain();
        const Grid grid = cfg.make_solver_grid();
        const SolveResult res = solve_forward(domain, cfg.source, grid, cfg.bc, cfg.T);
        const auto& pb = cfg.probes.front();
        SweepTask task{pb.kind,
                       pb.kind == "complex1d" ? Vec{1.0} : pb.omegas.front(),
                       pb.kind == "real" ? 0.0 : pb.cs.front(),
                       pb.tau_grid.front(),
                       {0.0}};
        const ProbeField probe = make_probe(task);
        const IndicatorSample bdry = indicator(res.boundary, probe, 0.0);
        const IndicatorSample vol = volume_indicator(cfg.source, res.snapshot, probe, 0.0);
        const double gap = std::abs(std::expm1(bdry.log_abs - vol.log_abs));
        record("volume", gap <= 0.10, gap);
    }

    json out{{"version", kToolVersion}, {"config_hash", cfg.hash},
             {"all_pass", all_pass}, {"checks", checks}};
    auto os = open_out(cfg.out_dir + "/oracle.json");
    os << out.dump(2) << "\n";
    if (!all_pass) throw ToleranceError("oracle: a cross-check exceeded its tolerance");
    return 0;
}

int cmd_all(const ScenarioConfig& cfg, int jobs, const OracleOptions& opts) {
    cmd_simulate(cfg);
    cmd_sweep(cfg, cfg.out_dir + "/boundary.csv", jobs);
    if (!cfg.directions.empty()) cmd_estimate(cfg, cfg.out_dir + "/sweep.csv");
    cmd_oracle(cfg, opts);
    return 0;
}

} // namespace heatenc
