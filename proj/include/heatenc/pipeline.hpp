#pragma once

#include <string>
#include <vector>

#include "heatenc/config.hpp"
#include "heatenc/indicator.hpp"
#include "heatenc/solver.hpp"

namespace heatenc {

// One sweep CSV row: (kind, omega..., c, tau, s, log_abs, phase, floor_hit).
struct SweepRow {
    std::string kind;
    Vec omega;     // {1} for complex1d
    double c = 0.0;  // 0 for real probes
    IndicatorSample sample;
};

// Artifact IO.  Every writer embeds the tool version and config hash as
// leading comment lines; float formatting is fixed so reruns are
// byte-identical.
void write_boundary_csv(const std::string& path, const BoundaryData& data,
                        const ScenarioConfig& cfg);
BoundaryData read_boundary_csv(const std::string& path, const ScenarioConfig& cfg);
void write_snapshot_csv(const std::string& path, const FieldSnapshot& snapshot,
                        const ScenarioConfig& cfg);
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows,
                     const ScenarioConfig& cfg);
std::vector<SweepRow> read_sweep_csv(const std::string& path);

// Full indicator sweep over the configured probe blocks; `jobs` threads over
// (probe, tau) tasks, merged in deterministic task order.
std::vector<SweepRow> run_sweep(const ScenarioConfig& cfg, const BoundaryData& data,
                                int jobs);

struct OracleOptions {
    double kd_tol = 1e-6;
    std::string only;  // run only checks whose name starts with this
};

// Subcommands; each writes its artifacts under cfg.out_dir and returns 0.
// Failures throw ValidationError / ToleranceError / GateError.
int cmd_simulate(const ScenarioConfig& cfg);
int cmd_sweep(const ScenarioConfig& cfg, const std::string& data_path, int jobs);
int cmd_estimate(const ScenarioConfig& cfg, const std::string& sweep_path);
int cmd_oracle(const ScenarioConfig& cfg, const OracleOptions& opts);
int cmd_all(const ScenarioConfig& cfg, int jobs, const OracleOptions& opts);

} // namespace heatenc
