#pragma once

#include "pnsim/fits.hpp"
#include "pnsim/noise.hpp"
#include "pnsim/quantum.hpp"
#include "pnsim/spectral.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pnsim {

/// Monte-Carlo ensemble bookkeeping. Realization k uses seed base_seed + k.
struct EnsembleConfig {
    std::size_t n_realizations = 200;
    std::uint64_t base_seed = 1;
    int max_parallel = 0; ///< 0 = hardware concurrency, 1 = sequential

    void validate() const;
};

/// Noise model + servo shaping driving one experiment.
/// params.n_samples is a minimum; experiments extend it when they need more
/// spectral resolution for the RPSD axes.
struct NoiseScenario {
    NoiseModelParams params;
    ServoShape shape;
};

struct RealizationFailure {
    std::uint64_t seed = 0;
    std::string message;
};

/// Ensemble-averaged observable vs time.
struct TimeSeriesResult {
    std::vector<double> times;
    std::vector<double> means;
    std::vector<double> stderrs;
    std::string observable_name;
    std::vector<std::uint64_t> seeds;
    std::vector<RealizationFailure> failures;
};

/// One ensemble point of a gate-fidelity scan.
struct GateResult {
    double fidelity = 0.0;
    double fidelity_stderr = 0.0;
    double gate_time = 0.0;          ///< s
    double rpsd_at_response = 0.0;   ///< Hz^2/Hz
    std::vector<double> per_seed_fidelities;
    std::vector<std::uint64_t> seeds;
    bool truncation_warning = false;
};

/// Generic x/y scan with a through-origin linear fit.
struct ScanResult {
    std::vector<double> x;
    std::vector<double> y;
    LinearFit fit;
};

struct PumpingResult {
    TimeSeriesResult series;
    PumpingFit fit;
};

struct HeatingResult {
    std::vector<double> cycles;
    std::vector<double> nbar_means;
    std::vector<double> nbar_stderrs;
    bool truncation_warning = false;
    std::vector<std::uint64_t> seeds;
};

struct MsGateResult {
    ScanResult scan;                   ///< x = T * RPSD(nu), y = 1 - F
    std::vector<GateResult> points;    ///< one per noise amplitude
    double gate_time = 0.0;
    double gate_detuning_hz = 0.0;     ///< calibrated delta_g
    double bell_phase = 0.0;           ///< calibrated target phase
    double noise_free_infidelity = 0.0;
};

/// Half-width of the smoothing band used for every scaling-law RPSD axis.
inline constexpr double kRpsdBandHz = 5e3;

/// Ensemble-averaged resonant Rabi oscillation P_e(t).
TimeSeriesResult run_rabi_decay(const NoiseScenario& noise, double rabi_hz,
                                double duration, const EnsembleConfig& ensemble);

/// pi-pulse infidelity 1 - mean P_e(t_pi) for each Rabi frequency,
/// t_pi = 1 / (2 Omega).
ScanResult scan_pi_error_vs_rabi(const NoiseScenario& noise,
                                 const std::vector<double>& rabi_list,
                                 const EnsembleConfig& ensemble);

/// pi-pulse infidelity vs RPSD(Omega) * t_pi over noise amplitudes
/// (rms_target values), with a through-origin fit of the scaling law.
ScanResult scan_pi_error_vs_rpsd(const NoiseScenario& noise,
                                 const std::vector<double>& amplitudes,
                                 double rabi_hz, const EnsembleConfig& ensemble);

/// Off-resonant carrier drive: ensemble P_e(t) plus the saturation fit.
/// Enforces |detuning| >= 5 * rabi so coherent excitation stays negligible.
PumpingResult run_pumping(const NoiseScenario& noise, double rabi_hz,
                          double detuning_hz, double duration,
                          const EnsembleConfig& ensemble);

/// Fitted pumping rate Gamma vs RPSD(detuning) over noise amplitudes.
ScanResult scan_pumping_rate(const NoiseScenario& noise,
                             const std::vector<double>& amplitudes,
                             double rabi_hz, double detuning_hz, double duration,
                             const EnsembleConfig& ensemble);

/// Blue-sideband drive from |g,0>: ensemble mean phonon number after each
/// integer number of sideband cycles (cycle time 1 / (eta Omega)).
HeatingResult run_heating(const NoiseScenario& noise, const DriveSpec& spec,
                          const std::vector<int>& n_cycles,
                          const EnsembleConfig& ensemble);

/// Molmer-Sorensen fidelity scan over noise amplitudes. The gate detuning is
/// calibrated around 2 eta Omega on the noise-free gate (the counter-rotating
/// carrier Stark-shifts the sideband resonance by a few percent), and the
/// Bell target phase is frozen from the calibrated noise-free final state.
MsGateResult run_ms_gate(const NoiseScenario& noise,
                         const std::vector<double>& amplitudes,
                         const DriveSpec& spec, const EnsembleConfig& ensemble,
                         bool calibrate_detuning = true);

/// Mean RPSD at a response frequency over the ensemble's traces
/// (+- kRpsdBandHz smoothing, both signed offsets averaged).
double ensemble_rpsd_at(const NoiseScenario& noise, double rabi_hz,
                        double response_hz, const EnsembleConfig& ensemble,
                        std::size_t min_trace_len = 1 << 15);

} // namespace pnsim
