#pragma once

// Scenario files, deterministic runs, sweeps and golden verification.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermolab/fields.hpp"

namespace thermolab {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kExitOk = 0, kExitMismatch = 1, kExitSchema = 2, kExitUncertified = 3, kExitFault = 4 };

struct Numerics {
    double dt = 1e-2;
    double orbit_T = 100.0;
    double lyapunov_T = 1e4;
    double entropy_T = 1e4;
    double slope_T = 20.0;
    double slope_dt = 0.1;
    double gap_tol = 1e-6;
    int cert_samples = 64;
    double cert_margin = 1e-3;
    int n_base = 1000;
    int N_theta = 64;
    bool richardson = true;
    double drift_tol = 1e-2;
    int word_length = 10;
    double prune_radius = 11.0;
    int mesh_n = 16;
    double pde_tol = 1e-10;
    int profile_bases = 2;
};

struct Scenario {
    std::string family;  // geodesic | magnetic | theoremB | theoremC | custom
    json params;
    Numerics num;
    std::uint64_t seed = 1;
    UnitTangentState initial{Complex(0.1, 0.05), 0.3};
    std::vector<std::string> measurements;
    /// Normalized document with every default filled in; the inputs hash is
    /// taken over its canonical dump.
    json normalized;
};

/// Throws SchemaError naming the offending field.
Scenario parse_scenario(const json& doc);
/// Reads and parses a file; JSON syntax errors are reported with line and column.
Scenario load_scenario(const std::filesystem::path& path);
json read_json_file(const std::filesystem::path& path);

/// 64-bit FNV-1a as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);
std::string inputs_hash(const Scenario& s);

/// The spec the scenario describes (theoremC runs the construction).
ThermostatSpec build_spec(const Scenario& s, json* construction = nullptr);
ThermostatSpec parse_custom_spec(const json& j);
FieldPtr parse_field(const json& j, const std::string& path);

struct RunResult {
    json manifest;
    int exit_code = kExitOk;
    std::string message;
};
/// Executes the requested measurements. CSV artifacts are written to out_dir
/// when it is non-empty, together with manifest.json.
RunResult run_scenario(const Scenario& s, const std::filesystem::path& out_dir = {});

struct SweepResult {
    std::vector<RunResult> rows;
    std::vector<std::string> columns;
    std::string csv;
};
/// Sets the dotted path `axis` of the template to each value and runs it.
SweepResult sweep_scenarios(const json& templ, const std::string& axis, const std::vector<double>& values,
                            const std::filesystem::path& out_dir = {});

struct VerifyResult {
    bool pass = true;
    std::vector<std::string> mismatches;
    int exit_code = kExitOk;
};
/// Re-runs the scenario embedded in a golden manifest and compares numeric
/// leaves of "measurements" and "invariant_report" within the tolerances in
/// its "tolerances" object ({"default": rel, "fields": {name: abs}}).
VerifyResult verify_golden(const json& golden);

/// Numeric and boolean leaves as dotted paths.
std::vector<std::pair<std::string, json>> flatten_leaves(const json& j, const std::string& prefix = {});

}  // namespace thermolab
