#pragma once

#include "pnsim/noise.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace pnsim {

enum class DriveKind { Carrier, SidebandIon, MolmerSorensen };

std::string to_string(DriveKind kind);

/// Parameterized Hamiltonian description.
///
/// All frequencies are ordinary frequencies in Hz; the 2 pi conversion to
/// angular units happens inside build_hamiltonian. detuning_hz is the laser
/// offset above the carrier: detuning_hz = +trap_hz puts a SidebandIon drive
/// on the blue sideband |g,n> <-> |e,n+1>. For MolmerSorensen, detuning_hz is
/// the gate detuning delta_g of the symmetric tones from the sidebands.
struct DriveSpec {
    DriveKind kind = DriveKind::Carrier;
    double rabi_hz = 0.0;
    double detuning_hz = 0.0;
    double trap_hz = 0.0;     ///< nu; unused for Carrier
    double lamb_dicke = 0.0;  ///< eta; unused for Carrier
    int fock_cutoff = 0;      ///< N; unused for Carrier
    int n_qubits = 1;

    void validate() const;
    /// Hilbert-space dimension: 2 for Carrier, 2^n_qubits * N otherwise.
    int dim() const;
};

/// Pure state over qubit(s) x truncated oscillator.
/// Basis ordering: qubit indices slow, Fock index fast; for each qubit the
/// excited state |e> is index 0 and |g> is index 1.
struct StateVector {
    Eigen::VectorXcd amplitudes;
    int n_qubits = 1;
    int fock_dim = 0; ///< 0 for Carrier-kind states

    int dim() const { return static_cast<int>(amplitudes.size()); }
    double norm() const { return amplitudes.norm(); }
};

/// |g> (tensor |0>) for Carrier/SidebandIon; |up,up> tensor |0> for MS,
/// where "up" is the excited state.
StateVector initial_state(const DriveSpec& spec);

struct PropagationConfig {
    double dt = 0.0;               ///< s; 0 means "one step per trace sample"
    int norm_check_every = 64;     ///< steps between norm drift checks

    void validate() const;
};

enum class ObservableKind { ExcitedPopulation, MeanPhonons, BellFidelity };

struct Observable {
    ObservableKind kind = ObservableKind::ExcitedPopulation;
    int qubit = 0;       ///< for ExcitedPopulation
    double phase = 0.0;  ///< target phase for BellFidelity

    static Observable excited_population(int qubit = 0) { return {ObservableKind::ExcitedPopulation, qubit, 0.0}; }
    static Observable mean_phonons() { return {ObservableKind::MeanPhonons, 0, 0.0}; }
    static Observable bell_fidelity(double phase) { return {ObservableKind::BellFidelity, 0, phase}; }
};

struct PropagationResult {
    std::vector<double> times;                        ///< s, one per trace sample
    std::vector<std::vector<double>> observables;     ///< [observable][sample]
    StateVector final_state;
    int renormalizations = 0;
};

/// H(t) / hbar in angular units (rad/s), Hermitian, dim x dim.
Eigen::MatrixXcd build_hamiltonian(const DriveSpec& spec, double phase, double t);

/// Step the state with U = exp(-i H(t_mid, phi(t_mid)) dt) per step, phi
/// linearly interpolated inside each trace sample. Observables are recorded
/// at every trace sample boundary (including t = 0) and, when the duration
/// falls between grid points, at the exact final time via a partial step.
PropagationResult propagate(const StateVector& state, const DriveSpec& spec,
                            const PhaseTrace& trace, double duration,
                            const PropagationConfig& cfg,
                            const std::vector<Observable>& observables);

/// Overlap of the motion-traced two-qubit state with
/// (|up,up> + e^{i theta} |down,down>) / sqrt(2).
double bell_fidelity(const StateVector& state, double target_phase);

/// Target phase maximizing bell_fidelity for this state.
double calibrate_bell_phase(const StateVector& state);

/// <a^dagger a>.
double mean_phonons(const StateVector& state);

/// P(excited) of one qubit.
double excited_population(const StateVector& state, int qubit = 0);

} // namespace pnsim
