#pragma once

#include "pnsim/experiments.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace pnsim {

enum class ExperimentKind {
    Rabi,
    PiScanRabi,
    PiScanRpsd,
    Pumping,
    PumpingScan,
    Heating,
    MsGate,
    NoiseOnly,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_from_name(const std::string& name);

/// Fully resolved run description: experiment + noise + drive + ensemble +
/// experiment-specific knobs. parse_config validates everything before any
/// computation starts.
struct RunConfig {
    ExperimentKind experiment = ExperimentKind::NoiseOnly;
    NoiseScenario noise;
    DriveSpec drive;
    EnsembleConfig ensemble;

    double duration = 0.0;             ///< s (rabi, pumping, pumping-scan, noise-only)
    std::vector<double> amplitudes;    ///< rms sweep (pi-scan-rpsd, pumping-scan, ms-gate)
    std::vector<double> rabi_list;     ///< Hz (pi-scan-rabi)
    std::vector<int> n_cycles;         ///< (heating)

    std::string output_dir;
    bool paper_scale = false;
    bool dry_run = false;
    std::string dump_trace_path; ///< optional; first-seed trace CSV
    std::string dump_state_path; ///< optional; first-seed final state CSV

    void validate() const;
    /// Canonical JSON echo of the resolved config (byte-stable under
    /// re-serialization).
    nlohmann::json resolved() const;
};

/// Build a RunConfig from a JSON document. Unknown keys are errors naming the
/// exact key path; missing required fields name the field.
RunConfig parse_config(const nlohmann::json& doc);

/// Load JSON (default) or the TOML subset (*.toml) and parse_config it.
RunConfig parse_config_file(const std::string& path);

/// n_realizations = 1000, fock_cutoff = 30.
void apply_paper_scale(RunConfig& cfg);

/// Execute the experiment, writing <name>_series.csv, <name>_fit.json,
/// <name>_plotdata.json (as applicable) plus manifest.json under
/// cfg.output_dir. Returns the process exit status; on failure an error.json
/// record is written and partial outputs keep their .partial suffix.
int run(const RunConfig& cfg);

} // namespace pnsim
