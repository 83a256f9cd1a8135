#pragma once

#include <optional>
#include <string>
#include <vector>

#include "heatenc/geometry.hpp"
#include "heatenc/indicator.hpp"
#include "heatenc/solver.hpp"

namespace heatenc {

inline constexpr const char* kToolVersion = "heatenc 0.1.0";
inline constexpr int kSchemaVersion = 1;

// One probe family to sweep: a kind plus its (omega, c, tau, s) grids.
struct ProbeBlock {
    std::string kind;            // real | complex1d | complex2d
    std::vector<Vec> omegas;     // unused for complex1d
    std::vector<double> cs;      // unused for real
    std::vector<double> tau_grid;
    std::vector<double> s_grid;  // defaults to {0}
};

struct ScenarioConfig {
    int schema_version = kSchemaVersion;

    // domain block
    int dim = 1;
    double x_lo = 0.0, x_hi = 1.0;
    double y_lo = 0.0, y_hi = 1.0;
    int nx = 0, ny = 0, nt = 0;
    double T = 1.0;
    BoundaryCondition bc = BoundaryCondition::neumann0;

    // source block
    SourceSpec source;

    // probes block
    std::vector<ProbeBlock> probes;

    // estimators block
    double residual_gate = 0.5;
    std::vector<DirectionRequest> directions;
    std::optional<std::vector<double>> t0_tau_grid;
    Vec t0_omega;

    // output / noise
    std::string out_dir = ".";
    double noise_sigma = 0.0;
    unsigned long long seed = 0;

    // canonical-content hash, filled by load_config
    std::string hash;

    SpatialDomain make_domain() const;
    Grid make_solver_grid() const;
};

// Parses and schema-validates the config; checks every cross-field gate
// (resolution, oscillation) so failures surface at load.  Throws
// ValidationError on any problem.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& json_text);

// FNV-1a 64-bit over a canonical serialization, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

} // namespace heatenc
