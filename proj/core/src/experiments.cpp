#include "pnsim/experiments.hpp"

#include "pnsim/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace pnsim {

void EnsembleConfig::validate() const {
    if (n_realizations < 1) throw ParamError("ensemble.n_realizations must be >= 1");
    if (max_parallel < 0) throw ParamError("ensemble.max_parallel must be >= 0");
}

namespace {

void parallel_for(std::size_t n, int max_parallel, const std::function<void(std::size_t)>& body) {
    std::size_t workers = max_parallel <= 0 ? std::thread::hardware_concurrency()
                                            : static_cast<std::size_t>(max_parallel);
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<std::uint64_t> seed_list(const EnsembleConfig& ens) {
    std::vector<std::uint64_t> seeds(ens.n_realizations);
    for (std::size_t k = 0; k < seeds.size(); ++k) seeds[k] = ens.base_seed + k;
    return seeds;
}

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

// Fixed-order reduction so parallel and sequential runs agree.
MeanStderr reduce(const std::vector<double>& values) {
    MeanStderr out;
    const auto n = static_cast<double>(values.size());
    if (values.empty()) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return out;
}

NoiseModelParams with_min_samples(NoiseModelParams p, std::size_t n_min) {
    p.n_samples = std::max(p.n_samples, n_min);
    return p;
}

NoiseModelParams with_amplitude(NoiseModelParams p, double amplitude) {
    if (amplitude == 0.0) {
        p.h0 = 0.0;
        p.rms_target = 0.0;
    } else {
        if (p.h0 == 0.0) p.h0 = 1.0; // shape only; amplitude fixes the scale
        p.rms_target = amplitude;
    }
    return p;
}

std::size_t samples_for(double duration, double sample_rate) {
    return static_cast<std::size_t>(std::ceil(duration * sample_rate)) + 2;
}

} // namespace

double ensemble_rpsd_at(const NoiseScenario& noise, double rabi_hz,
                        double response_hz, const EnsembleConfig& ensemble,
                        std::size_t min_trace_len) {
    ensemble.validate();
    const auto params = with_min_samples(noise.params, min_trace_len);
    if (params.h0 == 0.0) return 0.0;
    const auto seeds = seed_list(ensemble);
    std::vector<double> values(seeds.size(), 0.0);
    parallel_for(seeds.size(), ensemble.max_parallel, [&](std::size_t k) {
        const PhaseTrace trace = synthesize(params, noise.shape, seeds[k]);
        const std::size_t seg = std::max<std::size_t>(64, trace.samples.size() / 8);
        const double df = params.sample_rate / static_cast<double>(seg);
        const RabiSpectrum spec = compute_rabi_psd(trace, rabi_hz, 5.0 * df, seg);
        values[k] = rpsd_at(spec, std::abs(response_hz), kRpsdBandHz);
    });
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

namespace {

/// Ensemble run of one carrier-drive configuration, recording P_e on a
/// thinned time grid. Used by the Rabi and pumping experiments.
TimeSeriesResult carrier_ensemble_series(const NoiseScenario& noise, double rabi_hz,
                                         double detuning_hz, double duration,
                                         const EnsembleConfig& ensemble,
                                         std::size_t max_points) {
    ensemble.validate();
    const auto params = with_min_samples(noise.params,
                                         samples_for(duration, noise.params.sample_rate));
    DriveSpec spec;
    spec.kind = DriveKind::Carrier;
    spec.rabi_hz = rabi_hz;
    spec.detuning_hz = detuning_hz;
    spec.validate();

    const auto seeds = seed_list(ensemble);
    std::vector<std::vector<double>> series(seeds.size());
    std::vector<std::vector<double>> times(seeds.size());
    std::vector<std::optional<RealizationFailure>> failures(seeds.size());

    parallel_for(seeds.size(), ensemble.max_parallel, [&](std::size_t k) {
        try {
            const PhaseTrace trace = synthesize(params, noise.shape, seeds[k]);
            const auto res = propagate(initial_state(spec), spec, trace, duration, {},
                                       {Observable::excited_population()});
            const std::size_t n = res.times.size();
            const std::size_t stride = std::max<std::size_t>(1, n / max_points);
            for (std::size_t i = 0; i < n; i += stride) {
                times[k].push_back(res.times[i]);
                series[k].push_back(res.observables[0][i]);
            }
            if ((n - 1) % stride != 0) {
                times[k].push_back(res.times.back());
                series[k].push_back(res.observables[0].back());
            }
        } catch (const std::exception& e) {
            failures[k] = RealizationFailure{seeds[k], e.what()};
        }
    });

    TimeSeriesResult out;
    out.observable_name = "P_e";
    out.seeds = seeds;
    for (const auto& f : failures)
        if (f) out.failures.push_back(*f);
    if (out.failures.size() == seeds.size())
        throw NumericalError("all realizations failed: " + out.failures.front().message, 0);

    std::size_t ref = 0;
    while (failures[ref]) ++ref;
    out.times = times[ref];
    const std::size_t n_points = out.times.size();
    out.means.resize(n_points);
    out.stderrs.resize(n_points);
    std::vector<double> column;
    for (std::size_t i = 0; i < n_points; ++i) {
        column.clear();
        for (std::size_t k = 0; k < seeds.size(); ++k)
            if (!failures[k]) column.push_back(series[k][i]);
        const auto ms = reduce(column);
        out.means[i] = ms.mean;
        out.stderrs[i] = ms.stderr_;
    }
    return out;
}

} // namespace

TimeSeriesResult run_rabi_decay(const NoiseScenario& noise, double rabi_hz,
                                double duration, const EnsembleConfig& ensemble) {
    return carrier_ensemble_series(noise, rabi_hz, 0.0, duration, ensemble, 1000);
}

namespace {

/// Mean final-time P_e of a resonant pi pulse over the ensemble.
double pi_pulse_mean_pe(const NoiseScenario& noise, double rabi_hz,
                        const EnsembleConfig& ensemble) {
    const double t_pi = 1.0 / (2.0 * rabi_hz);
    const auto params = with_min_samples(noise.params,
                                         samples_for(t_pi, noise.params.sample_rate));
    DriveSpec spec;
    spec.kind = DriveKind::Carrier;
    spec.rabi_hz = rabi_hz;

    const auto seeds = seed_list(ensemble);
    std::vector<double> pe(seeds.size(), 0.0);
    parallel_for(seeds.size(), ensemble.max_parallel, [&](std::size_t k) {
        const PhaseTrace trace = synthesize(params, noise.shape, seeds[k]);
        const auto res = propagate(initial_state(spec), spec, trace, t_pi, {},
                                   {Observable::excited_population()});
        pe[k] = res.observables[0].back();
    });
    return reduce(pe).mean;
}

} // namespace

ScanResult scan_pi_error_vs_rabi(const NoiseScenario& noise,
                                 const std::vector<double>& rabi_list,
                                 const EnsembleConfig& ensemble) {
    ensemble.validate();
    if (rabi_list.empty()) throw ParamError("rabi_list must not be empty");
    const double nyq4 = noise.params.sample_rate / 4.0;
    for (double r : rabi_list)
        if (!(r > 0.0) || r > nyq4)
            throw ParamError("Rabi frequencies must lie in (0, sample_rate/4]");

    ScanResult out;
    for (double rabi : rabi_list) {
        out.x.push_back(rabi);
        out.y.push_back(1.0 - pi_pulse_mean_pe(noise, rabi, ensemble));
    }
    return out;
}

ScanResult scan_pi_error_vs_rpsd(const NoiseScenario& noise,
                                 const std::vector<double>& amplitudes,
                                 double rabi_hz, const EnsembleConfig& ensemble) {
    ensemble.validate();
    if (amplitudes.size() < 3)
        throw ParamError("need at least 3 noise amplitudes");
    const double t_pi = 1.0 / (2.0 * rabi_hz);

    ScanResult out;
    for (double amp : amplitudes) {
        NoiseScenario scaled = noise;
        scaled.params = with_amplitude(noise.params, amp);
        const double rpsd = ensemble_rpsd_at(scaled, rabi_hz, rabi_hz, ensemble);
        out.x.push_back(rpsd * t_pi);
        out.y.push_back(1.0 - pi_pulse_mean_pe(scaled, rabi_hz, ensemble));
    }
    out.fit = fit_linear_through_origin(out.x, out.y);
    return out;
}

PumpingResult run_pumping(const NoiseScenario& noise, double rabi_hz,
                          double detuning_hz, double duration,
                          const EnsembleConfig& ensemble) {
    if (!(std::abs(detuning_hz) >= 5.0 * rabi_hz))
        throw ParamError("pumping requires |detuning| >= 5 * rabi");
    PumpingResult out;
    out.series = carrier_ensemble_series(noise, rabi_hz, detuning_hz, duration,
                                         ensemble, 400);
    out.fit = fit_exponential_saturation(out.series.times, out.series.means);
    return out;
}

ScanResult scan_pumping_rate(const NoiseScenario& noise,
                             const std::vector<double>& amplitudes,
                             double rabi_hz, double detuning_hz, double duration,
                             const EnsembleConfig& ensemble) {
    if (amplitudes.size() < 3)
        throw ParamError("need at least 3 noise amplitudes");
    ScanResult out;
    for (double amp : amplitudes) {
        NoiseScenario scaled = noise;
        scaled.params = with_amplitude(noise.params, amp);
        const double rpsd = ensemble_rpsd_at(scaled, rabi_hz, detuning_hz, ensemble);
        const auto pumped = run_pumping(scaled, rabi_hz, detuning_hz, duration, ensemble);
        out.x.push_back(rpsd);
        out.y.push_back(pumped.fit.gamma);
    }
    out.fit = fit_linear_through_origin(out.x, out.y);
    return out;
}

HeatingResult run_heating(const NoiseScenario& noise, const DriveSpec& spec,
                          const std::vector<int>& n_cycles,
                          const EnsembleConfig& ensemble) {
    ensemble.validate();
    spec.validate();
    if (spec.kind != DriveKind::SidebandIon)
        throw ParamError("heating requires a SidebandIon drive");
    if (std::abs(spec.detuning_hz - spec.trap_hz) > 1e-9 * spec.trap_hz)
        throw ParamError("heating requires the blue sideband (detuning = +trap)");
    if (n_cycles.empty()) throw ParamError("n_cycles must not be empty");

    const double cycle_time = 1.0 / (spec.lamb_dicke * spec.rabi_hz);
    const int k_max = *std::max_element(n_cycles.begin(), n_cycles.end());
    const double duration = cycle_time * k_max;
    const auto params = with_min_samples(noise.params,
                                         samples_for(duration, noise.params.sample_rate));

    const auto seeds = seed_list(ensemble);
    std::vector<std::vector<double>> nbar(seeds.size());
    parallel_for(seeds.size(), ensemble.max_parallel, [&](std::size_t k) {
        const PhaseTrace trace = synthesize(params, noise.shape, seeds[k]);
        const auto res = propagate(initial_state(spec), spec, trace, duration, {},
                                   {Observable::mean_phonons()});
        nbar[k].reserve(n_cycles.size());
        for (int cyc : n_cycles) {
            const double t = cycle_time * cyc;
            // nearest recorded sample
            const auto idx = static_cast<std::size_t>(
                std::min<double>(std::lround(t / trace.dt),
                                 static_cast<double>(res.times.size() - 1)));
            nbar[k].push_back(res.observables[0][idx]);
        }
    });

    HeatingResult out;
    out.seeds = seeds;
    std::vector<double> column;
    for (std::size_t i = 0; i < n_cycles.size(); ++i) {
        column.clear();
        for (std::size_t k = 0; k < seeds.size(); ++k) column.push_back(nbar[k][i]);
        const auto ms = reduce(column);
        out.cycles.push_back(static_cast<double>(n_cycles[i]));
        out.nbar_means.push_back(ms.mean);
        out.nbar_stderrs.push_back(ms.stderr_);
        if (ms.mean > 0.5 * spec.fock_cutoff) out.truncation_warning = true;
    }
    return out;
}

namespace {

double noise_free_ms_fidelity(const DriveSpec& spec, double gate_detuning,
                              double sample_rate, double* bell_phase_out) {
    DriveSpec cal = spec;
    cal.detuning_hz = gate_detuning;
    const double gate_time = 1.0 / gate_detuning;
    PhaseTrace quiet;
    quiet.dt = 1.0 / sample_rate;
    quiet.samples.assign(samples_for(gate_time, sample_rate), 0.0);
    const auto res = propagate(initial_state(cal), cal, quiet, gate_time, {}, {});
    const double theta = calibrate_bell_phase(res.final_state);
    if (bell_phase_out) *bell_phase_out = theta;
    return bell_fidelity(res.final_state, theta);
}

} // namespace

MsGateResult run_ms_gate(const NoiseScenario& noise,
                         const std::vector<double>& amplitudes,
                         const DriveSpec& spec, const EnsembleConfig& ensemble,
                         bool calibrate_detuning) {
    ensemble.validate();
    spec.validate();
    if (spec.kind != DriveKind::MolmerSorensen)
        throw ParamError("run_ms_gate requires a MolmerSorensen drive");
    if (amplitudes.size() < 3)
        throw ParamError("need at least 3 noise amplitudes");

    const double fs = noise.params.sample_rate;
    const double dg_nominal = spec.detuning_hz > 0.0
                                  ? spec.detuning_hz
                                  : 2.0 * spec.lamb_dicke * spec.rabi_hz;

    MsGateResult out;
    // The counter-rotating carrier shifts the effective sideband resonance;
    // pick the gate detuning maximizing the noise-free fidelity near nominal.
    double best_dg = dg_nominal;
    if (calibrate_detuning) {
        std::vector<double> candidates;
        for (double f = 0.95; f <= 1.015; f += 0.005)
            candidates.push_back(dg_nominal * f);
        std::vector<double> fids(candidates.size(), 0.0);
        parallel_for(candidates.size(), ensemble.max_parallel, [&](std::size_t i) {
            fids[i] = noise_free_ms_fidelity(spec, candidates[i], fs, nullptr);
        });
        best_dg = candidates[static_cast<std::size_t>(
            std::max_element(fids.begin(), fids.end()) - fids.begin())];
    }
    out.gate_detuning_hz = best_dg;
    out.gate_time = 1.0 / best_dg;
    const double f0 = noise_free_ms_fidelity(spec, best_dg, fs, &out.bell_phase);
    out.noise_free_infidelity = 1.0 - f0;

    DriveSpec gate = spec;
    gate.detuning_hz = best_dg;
    const auto params0 = with_min_samples(noise.params, samples_for(out.gate_time, fs));

    for (double amp : amplitudes) {
        NoiseScenario scaled = noise;
        scaled.params = with_amplitude(params0, amp);
        // The bichromatic envelope peaks at twice the per-tone coupling, so the
        // MS drive's carrier normalization uses 2 * rabi.
        const double rpsd =
            ensemble_rpsd_at(scaled, 2.0 * spec.rabi_hz, spec.trap_hz, ensemble);

        const auto seeds = seed_list(ensemble);
        GateResult point;
        point.gate_time = out.gate_time;
        point.rpsd_at_response = rpsd;
        point.seeds = seeds;
        point.per_seed_fidelities.assign(seeds.size(), 0.0);
        std::vector<char> truncated(seeds.size(), 0);
        parallel_for(seeds.size(), ensemble.max_parallel, [&](std::size_t k) {
            const PhaseTrace trace = synthesize(scaled.params, scaled.shape, seeds[k]);
            const auto res = propagate(initial_state(gate), gate, trace, out.gate_time,
                                       {}, {});
            point.per_seed_fidelities[k] = bell_fidelity(res.final_state, out.bell_phase);
            if (mean_phonons(res.final_state) > 0.5 * gate.fock_cutoff) truncated[k] = 1;
        });
        const auto ms = reduce(point.per_seed_fidelities);
        point.fidelity = ms.mean;
        point.fidelity_stderr = ms.stderr_;
        point.truncation_warning =
            std::any_of(truncated.begin(), truncated.end(), [](char c) { return c != 0; });

        out.scan.x.push_back(out.gate_time * rpsd);
        out.scan.y.push_back(1.0 - point.fidelity);
        out.points.push_back(std::move(point));
    }
    out.scan.fit = fit_linear_through_origin(out.scan.x, out.scan.y);
    return out;
}

} // namespace pnsim
