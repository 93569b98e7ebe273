#include "pnsim/quantum.hpp"

#include "pnsim/errors.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace pnsim {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
using Complex = std::complex<double>;
} // namespace

std::string to_string(DriveKind kind) {
    switch (kind) {
        case DriveKind::Carrier: return "carrier";
        case DriveKind::SidebandIon: return "sideband";
        case DriveKind::MolmerSorensen: return "ms";
    }
    return "?";
}

void DriveSpec::validate() const {
    if (!(rabi_hz > 0.0)) throw ParamError("drive.rabi_hz must be > 0");
    if (kind == DriveKind::Carrier) {
        if (n_qubits != 1) throw ParamError("Carrier drive requires n_qubits=1");
        return;
    }
    if (fock_cutoff < 2) throw ParamError("drive.fock_cutoff must be >= 2");
    if (!(lamb_dicke > 0.0 && lamb_dicke < 0.5))
        throw ParamError("drive.lamb_dicke must be in (0, 0.5)");
    if (!(trap_hz > 0.0)) throw ParamError("drive.trap_hz must be > 0");
    if (kind == DriveKind::MolmerSorensen && n_qubits != 2)
        throw ParamError("MolmerSorensen requires n_qubits=2");
    if (kind == DriveKind::SidebandIon && n_qubits != 1)
        throw ParamError("SidebandIon requires n_qubits=1");
}

int DriveSpec::dim() const {
    if (kind == DriveKind::Carrier) return 2;
    return (1 << n_qubits) * fock_cutoff;
}

StateVector initial_state(const DriveSpec& spec) {
    spec.validate();
    StateVector s;
    s.n_qubits = spec.n_qubits;
    s.fock_dim = spec.kind == DriveKind::Carrier ? 0 : spec.fock_cutoff;
    s.amplitudes = Eigen::VectorXcd::Zero(spec.dim());
    switch (spec.kind) {
        case DriveKind::Carrier:
            s.amplitudes(1) = 1.0; // |g>
            break;
        case DriveKind::SidebandIon:
            s.amplitudes(1 * spec.fock_cutoff + 0) = 1.0; // |g,0>
            break;
        case DriveKind::MolmerSorensen:
            s.amplitudes(0) = 1.0; // |up,up> x |0>, up = excited
            break;
    }
    return s;
}

void PropagationConfig::validate() const {
    if (dt < 0.0) throw ParamError("propagation dt must be >= 0");
    if (norm_check_every < 1) throw ParamError("norm_check_every must be >= 1");
}

namespace {

Eigen::MatrixXcd fock_lower(int n) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
    for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

// sigma+ = |e><g| in the [e, g] basis
Eigen::MatrixXcd sigma_plus() {
    Eigen::MatrixXcd sp = Eigen::MatrixXcd::Zero(2, 2);
    sp(0, 1) = 1.0;
    return sp;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Precomputed operator pieces; H(t, phi) = static_part
//   + drive(t) * (e^{i phi} coupling + h.c.)
struct OperatorSet {
    Eigen::MatrixXcd static_part;
    Eigen::MatrixXcd coupling; // multiplied by 2 pi already
    bool ms_modulated = false;
    double ms_tone_hz = 0.0; // nu + delta_g
};

OperatorSet build_operators(const DriveSpec& spec) {
    OperatorSet ops;
    const int dim = spec.dim();
    const Eigen::MatrixXcd sp = sigma_plus();
    const Eigen::MatrixXcd id2 = Eigen::MatrixXcd::Identity(2, 2);
    const Eigen::MatrixXcd sz = (Eigen::MatrixXcd(2, 2) << 1, 0, 0, -1).finished();

    switch (spec.kind) {
        case DriveKind::Carrier: {
            ops.static_part = -kTwoPi * 0.5 * spec.detuning_hz * sz;
            ops.coupling = kTwoPi * 0.5 * spec.rabi_hz * sp;
            break;
        }
        case DriveKind::SidebandIon: {
            const int nf = spec.fock_cutoff;
            const Eigen::MatrixXcd a = fock_lower(nf);
            const Eigen::MatrixXcd x = a + a.adjoint();
            const Eigen::MatrixXcd num = a.adjoint() * a;
            const Eigen::MatrixXcd idf = Eigen::MatrixXcd::Identity(nf, nf);
            ops.static_part = kTwoPi * spec.trap_hz * kron(id2, num) -
                              kTwoPi * 0.5 * spec.detuning_hz * kron(sz, idf);
            ops.coupling = kTwoPi * 0.5 * spec.rabi_hz *
                           kron(sp, idf + Complex(0.0, 1.0) * spec.lamb_dicke * x);
            break;
        }
        case DriveKind::MolmerSorensen: {
            const int nf = spec.fock_cutoff;
            const Eigen::MatrixXcd a = fock_lower(nf);
            const Eigen::MatrixXcd x = a + a.adjoint();
            const Eigen::MatrixXcd num = a.adjoint() * a;
            const Eigen::MatrixXcd idf = Eigen::MatrixXcd::Identity(nf, nf);
            const Eigen::MatrixXcd ld = idf + Complex(0.0, 1.0) * spec.lamb_dicke * x;
            ops.static_part = kTwoPi * spec.trap_hz * kron(id2, kron(id2, num));
            ops.coupling = kTwoPi * spec.rabi_hz *
                           (kron(sp, kron(id2, ld)) + kron(id2, kron(sp, ld)));
            ops.ms_modulated = true;
            ops.ms_tone_hz = spec.trap_hz + spec.detuning_hz;
            break;
        }
    }
    if (ops.static_part.rows() != dim) throw ContractError("operator dimension mismatch");
    return ops;
}

Eigen::MatrixXcd assemble(const OperatorSet& ops, double phase, double t) {
    const Complex rot = std::polar(1.0, phase);
    Eigen::MatrixXcd drive = rot * ops.coupling;
    drive += drive.adjoint().eval();
    if (ops.ms_modulated) drive *= std::cos(kTwoPi * ops.ms_tone_hz * t);
    return ops.static_part + drive;
}

} // namespace

Eigen::MatrixXcd build_hamiltonian(const DriveSpec& spec, double phase, double t) {
    spec.validate();
    return assemble(build_operators(spec), phase, t);
}

namespace {

double observe(const Observable& obs, const StateVector& s) {
    switch (obs.kind) {
        case ObservableKind::ExcitedPopulation: return excited_population(s, obs.qubit);
        case ObservableKind::MeanPhonons: return mean_phonons(s);
        case ObservableKind::BellFidelity: return bell_fidelity(s, obs.phase);
    }
    return 0.0;
}

// psi <- exp(-i H dt) psi for a 2x2 traceless Hermitian H = (hx, hy, hz).sigma
void step_two_level(Eigen::VectorXcd& psi, double hx, double hy, double hz, double dt) {
    const double a = std::sqrt(hx * hx + hy * hy + hz * hz);
    double c = 1.0, sn = dt;
    if (a > 0.0) {
        c = std::cos(a * dt);
        sn = std::sin(a * dt) / a;
    }
    const Complex e0 = psi(0), g0 = psi(1);
    psi(0) = (c - Complex(0, 1) * sn * hz) * e0 - Complex(0, 1) * sn * (hx - Complex(0, 1) * hy) * g0;
    psi(1) = -Complex(0, 1) * sn * (hx + Complex(0, 1) * hy) * e0 + (c + Complex(0, 1) * sn * hz) * g0;
}

} // namespace

PropagationResult propagate(const StateVector& state, const DriveSpec& spec,
                            const PhaseTrace& trace, double duration,
                            const PropagationConfig& cfg,
                            const std::vector<Observable>& observables) {
    spec.validate();
    cfg.validate();
    if (state.dim() != spec.dim())
        throw ContractError("state dimension does not match drive spec");
    if (!(duration > 0.0)) throw ParamError("duration must be > 0");

    const double trace_dt = trace.dt;
    auto n_samples = static_cast<std::size_t>(std::floor(duration / trace_dt + 1e-9));
    // Fractional remainder beyond the last whole trace sample; the pulse must
    // end exactly at `duration`, not at a grid point.
    double remainder = duration - static_cast<double>(n_samples) * trace_dt;
    if (remainder < 1e-9 * trace_dt) remainder = 0.0;
    if (n_samples + (remainder > 0.0 ? 2 : 1) > trace.samples.size())
        throw ParamError("duration exceeds trace span");

    int sub = 1;
    if (cfg.dt > 0.0) {
        if (cfg.dt > trace_dt * (1.0 + 1e-12))
            throw ParamError("propagation dt must not exceed the trace dt");
        sub = std::max(1, static_cast<int>(std::lround(trace_dt / cfg.dt)));
    }
    const double dt = trace_dt / sub;

    PropagationResult res;
    res.final_state = state;
    res.times.reserve(n_samples + 1);
    res.observables.assign(observables.size(), {});
    for (auto& v : res.observables) v.reserve(n_samples + 1);

    const bool two_level = spec.kind == DriveKind::Carrier;
    OperatorSet ops;
    if (!two_level) ops = build_operators(spec);

    Eigen::VectorXcd& psi = res.final_state.amplitudes;

    // Strang splitting H = A + c(t) M(phi): A (trap + detuning) is diagonal in
    // this basis, and M(phi) = R(phi) M(0) R(phi)^dagger with R(phi) the
    // diagonal phase e^{i phi n_exc} (n_exc = number of excited qubits), so a
    // single eigendecomposition of M(0) turns every step into two dense
    // matrix-vector products plus diagonal phase rotations.
    const int dim = spec.dim();
    Eigen::VectorXd a_diag, m_eigs, n_exc;
    Eigen::MatrixXcd m_vecs;
    Eigen::VectorXcd half_a;
    if (!two_level) {
        if ((ops.static_part - Eigen::MatrixXcd(
                                   ops.static_part.diagonal().asDiagonal()))
                .cwiseAbs()
                .maxCoeff() != 0.0)
            throw ContractError("static Hamiltonian part is not diagonal");
        a_diag = ops.static_part.diagonal().real();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
            ops.coupling + ops.coupling.adjoint());
        m_eigs = solver.eigenvalues();
        m_vecs = solver.eigenvectors();
        n_exc = Eigen::VectorXd(dim);
        const int nf = spec.fock_cutoff;
        for (int i = 0; i < dim; ++i) {
            const int s = i / nf;
            int exc = 0;
            for (int q = 0; q < spec.n_qubits; ++q)
                if (((s >> q) & 1) == 0) ++exc;
            n_exc(i) = static_cast<double>(exc);
        }
        half_a = Eigen::VectorXcd(dim);
        for (int i = 0; i < dim; ++i) half_a(i) = std::polar(1.0, -0.5 * dt * a_diag(i));
    }
    Eigen::VectorXcd tmp(dim);

    auto record = [&](std::size_t k) {
        res.times.push_back(static_cast<double>(k) * trace_dt);
        for (std::size_t o = 0; o < observables.size(); ++o)
            res.observables[o].push_back(observe(observables[o], res.final_state));
    };

    long steps_done = 0;
    auto advance = [&](double phi, double t_mid, double step_dt) {
        if (two_level) {
            const double hx = kPi * spec.rabi_hz * std::cos(phi);
            const double hy = -kPi * spec.rabi_hz * std::sin(phi);
            const double hz = -kPi * spec.detuning_hz;
            step_two_level(psi, hx, hy, hz, step_dt);
        } else {
            const double c =
                ops.ms_modulated ? std::cos(kTwoPi * ops.ms_tone_hz * t_mid) : 1.0;
            const bool std_dt = step_dt == dt;
            for (int i = 0; i < dim; ++i) {
                const Complex h = std_dt ? half_a(i)
                                         : std::polar(1.0, -0.5 * step_dt * a_diag(i));
                psi(i) *= h * std::polar(1.0, -phi * n_exc(i));
            }
            tmp.noalias() = m_vecs.adjoint() * psi;
            for (int i = 0; i < dim; ++i)
                tmp(i) *= std::polar(1.0, -c * step_dt * m_eigs(i));
            psi.noalias() = m_vecs * tmp;
            for (int i = 0; i < dim; ++i) {
                const Complex h = std_dt ? half_a(i)
                                         : std::polar(1.0, -0.5 * step_dt * a_diag(i));
                psi(i) *= h * std::polar(1.0, phi * n_exc(i));
            }
        }
        ++steps_done;
        if (steps_done % cfg.norm_check_every == 0) {
            const double nrm = psi.norm();
            if (!std::isfinite(nrm) || nrm == 0.0)
                throw NumericalError("non-finite state amplitudes", steps_done);
            if (std::abs(nrm - 1.0) > 1e-9) {
                psi /= nrm;
                ++res.renormalizations;
            }
        }
    };

    record(0);
    for (std::size_t k = 0; k < n_samples; ++k) {
        const double phi0 = trace.samples[k];
        const double phi1 = trace.samples[k + 1];
        for (int j = 0; j < sub; ++j) {
            const double frac = (static_cast<double>(j) + 0.5) / sub;
            advance(phi0 + (phi1 - phi0) * frac,
                    (static_cast<double>(k) + frac) * trace_dt, dt);
        }
        record(k + 1);
    }
    if (remainder > 0.0) {
        const double phi0 = trace.samples[n_samples];
        const double phi1 = trace.samples[n_samples + 1];
        const double frac = 0.5 * remainder / trace_dt;
        advance(phi0 + (phi1 - phi0) * frac,
                static_cast<double>(n_samples) * trace_dt + 0.5 * remainder, remainder);
        res.times.push_back(duration);
        for (std::size_t o = 0; o < observables.size(); ++o)
            res.observables[o].push_back(observe(observables[o], res.final_state));
    }
    return res;
}

double bell_fidelity(const StateVector& state, double target_phase) {
    if (state.n_qubits != 2 || state.fock_dim < 1)
        throw ContractError("bell_fidelity requires a two-qubit motional state");
    const int nf = state.fock_dim;
    const Complex rot = std::polar(1.0, -target_phase);
    double fid = 0.0;
    for (int n = 0; n < nf; ++n) {
        const Complex uu = state.amplitudes(0 * nf + n);
        const Complex dd = state.amplitudes(3 * nf + n);
        fid += std::norm((uu + rot * dd) / std::sqrt(2.0));
    }
    return fid;
}

double calibrate_bell_phase(const StateVector& state) {
    if (state.n_qubits != 2 || state.fock_dim < 1)
        throw ContractError("calibrate_bell_phase requires a two-qubit motional state");
    const int nf = state.fock_dim;
    Complex overlap = 0.0;
    for (int n = 0; n < nf; ++n)
        overlap += std::conj(state.amplitudes(0 * nf + n)) * state.amplitudes(3 * nf + n);
    return std::abs(overlap) > 0.0 ? std::arg(overlap) : 0.0;
}

double mean_phonons(const StateVector& state) {
    if (state.fock_dim < 1)
        throw ContractError("mean_phonons requires a motional-kind state");
    const int nf = state.fock_dim;
    const int spin_dim = 1 << state.n_qubits;
    double nbar = 0.0;
    for (int s = 0; s < spin_dim; ++s)
        for (int n = 0; n < nf; ++n)
            nbar += static_cast<double>(n) * std::norm(state.amplitudes(s * nf + n));
    return nbar;
}

double excited_population(const StateVector& state, int qubit) {
    if (qubit < 0 || qubit >= state.n_qubits)
        throw ContractError("qubit index out of range");
    const int nf = std::max(1, state.fock_dim);
    const int spin_dim = 1 << state.n_qubits;
    double pop = 0.0;
    for (int s = 0; s < spin_dim; ++s) {
        // qubit 0 is the slowest index; excited = bit value 0
        const int bit = (s >> (state.n_qubits - 1 - qubit)) & 1;
        if (bit != 0) continue;
        for (int n = 0; n < nf; ++n) pop += std::norm(state.amplitudes(s * nf + n));
    }
    return pop;
}

} // namespace pnsim
