#include "pnsim/run.hpp"

#include "pnsim/errors.hpp"
#include "pnsim/io.hpp"
#include "pnsim/toml_lite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace pnsim {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Rabi: return "rabi";
        case ExperimentKind::PiScanRabi: return "pi-scan-rabi";
        case ExperimentKind::PiScanRpsd: return "pi-scan-rpsd";
        case ExperimentKind::Pumping: return "pumping";
        case ExperimentKind::PumpingScan: return "pumping-scan";
        case ExperimentKind::Heating: return "heating";
        case ExperimentKind::MsGate: return "ms-gate";
        case ExperimentKind::NoiseOnly: return "noise-only";
    }
    return "?";
}

ExperimentKind experiment_from_name(const std::string& name) {
    for (auto kind : {ExperimentKind::Rabi, ExperimentKind::PiScanRabi,
                      ExperimentKind::PiScanRpsd, ExperimentKind::Pumping,
                      ExperimentKind::PumpingScan, ExperimentKind::Heating,
                      ExperimentKind::MsGate, ExperimentKind::NoiseOnly})
        if (to_string(kind) == name) return kind;
    throw ParamError("unknown experiment: " + name);
}

namespace {

void check_keys(const json& obj, const std::string& prefix,
                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ParamError("unknown key: " + prefix + key);
    }
}

double num_or(const json& obj, const std::string& prefix, const char* key, double def) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ParamError(prefix + key + " must be a number");
    return v.get<double>();
}

std::uint64_t uint_or(const json& obj, const std::string& prefix, const char* key,
                      std::uint64_t def) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ParamError(prefix + key + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

bool bool_or(const json& obj, const std::string& prefix, const char* key, bool def) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_boolean()) throw ParamError(prefix + key + " must be a boolean");
    return v.get<bool>();
}

std::vector<double> num_list(const json& obj, const std::string& prefix, const char* key) {
    std::vector<double> out;
    if (!obj.contains(key)) return out;
    const json& v = obj.at(key);
    if (!v.is_array()) throw ParamError(prefix + key + " must be an array of numbers");
    for (const auto& e : v) {
        if (!e.is_number()) throw ParamError(prefix + key + " must be an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

DriveKind drive_kind_from_name(const std::string& name) {
    if (name == "carrier") return DriveKind::Carrier;
    if (name == "sideband") return DriveKind::SidebandIon;
    if (name == "ms") return DriveKind::MolmerSorensen;
    throw ParamError("drive.kind must be one of carrier|sideband|ms, got: " + name);
}

DriveKind default_drive_kind(ExperimentKind experiment) {
    switch (experiment) {
        case ExperimentKind::Heating: return DriveKind::SidebandIon;
        case ExperimentKind::MsGate: return DriveKind::MolmerSorensen;
        default: return DriveKind::Carrier;
    }
}

bool uses_drive(ExperimentKind e) { return e != ExperimentKind::NoiseOnly; }

} // namespace

RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ParamError("config must be a JSON object");
    check_keys(doc, "", {"experiment", "noise", "servo", "drive", "ensemble", "duration",
                         "amplitudes", "rabi_list", "n_cycles", "output_dir",
                         "paper_scale"});
    if (!doc.contains("experiment") || !doc.at("experiment").is_string())
        throw ParamError("missing required key: experiment");

    RunConfig cfg;
    cfg.experiment = experiment_from_name(doc.at("experiment").get<std::string>());

    const json noise = doc.value("noise", json::object());
    check_keys(noise, "noise.", {"h0", "leak", "sample_rate", "n_samples", "rms_target"});
    cfg.noise.params.h0 = num_or(noise, "noise.", "h0", 0.0);
    cfg.noise.params.leak = num_or(noise, "noise.", "leak", 1e-4);
    cfg.noise.params.sample_rate = num_or(noise, "noise.", "sample_rate", 1e7);
    cfg.noise.params.n_samples =
        static_cast<std::size_t>(uint_or(noise, "noise.", "n_samples", 2));
    cfg.noise.params.rms_target = num_or(noise, "noise.", "rms_target", 0.0);

    const json servo = doc.value("servo", json::object());
    check_keys(servo, "servo.", {"enabled", "unity_gain_freq", "gain_db", "poles",
                                 "zeros", "bump_quality"});
    cfg.noise.shape.enabled = bool_or(servo, "servo.", "enabled", !servo.empty());
    cfg.noise.shape.unity_gain_freq = num_or(servo, "servo.", "unity_gain_freq", 0.0);
    if (cfg.noise.shape.enabled && cfg.noise.shape.unity_gain_freq > 0.0 &&
        !servo.contains("poles") && !servo.contains("zeros") &&
        !servo.contains("gain_db") && !servo.contains("bump_quality")) {
        cfg.noise.shape = ServoShape::defaults(cfg.noise.shape.unity_gain_freq);
    } else {
        cfg.noise.shape.gain_db = num_or(servo, "servo.", "gain_db", 60.0);
        cfg.noise.shape.poles = num_list(servo, "servo.", "poles");
        cfg.noise.shape.zeros = num_list(servo, "servo.", "zeros");
        cfg.noise.shape.bump_quality = num_or(servo, "servo.", "bump_quality", 2.0);
    }

    const json drive = doc.value("drive", json::object());
    check_keys(drive, "drive.", {"kind", "rabi_hz", "detuning_hz", "trap_hz",
                                 "lamb_dicke", "fock_cutoff", "n_qubits"});
    cfg.drive.kind = drive.contains("kind")
                         ? drive_kind_from_name(drive.at("kind").get<std::string>())
                         : default_drive_kind(cfg.experiment);
    cfg.drive.rabi_hz = num_or(drive, "drive.", "rabi_hz", 0.0);
    cfg.drive.detuning_hz = num_or(drive, "drive.", "detuning_hz", 0.0);
    cfg.drive.trap_hz = num_or(drive, "drive.", "trap_hz", 0.0);
    cfg.drive.lamb_dicke = num_or(drive, "drive.", "lamb_dicke", 0.0);
    cfg.drive.fock_cutoff =
        static_cast<int>(uint_or(drive, "drive.", "fock_cutoff", 0));
    cfg.drive.n_qubits = static_cast<int>(uint_or(
        drive, "drive.", "n_qubits",
        cfg.drive.kind == DriveKind::MolmerSorensen ? 2 : 1));

    const json ens = doc.value("ensemble", json::object());
    check_keys(ens, "ensemble.", {"n_realizations", "base_seed", "max_parallel"});
    cfg.ensemble.n_realizations =
        static_cast<std::size_t>(uint_or(ens, "ensemble.", "n_realizations", 200));
    cfg.ensemble.base_seed = uint_or(ens, "ensemble.", "base_seed", 1);
    cfg.ensemble.max_parallel =
        static_cast<int>(uint_or(ens, "ensemble.", "max_parallel", 0));

    cfg.duration = num_or(doc, "", "duration", 0.0);
    cfg.amplitudes = num_list(doc, "", "amplitudes");
    cfg.rabi_list = num_list(doc, "", "rabi_list");
    for (double v : num_list(doc, "", "n_cycles")) {
        if (v < 1.0 || v != std::floor(v))
            throw ParamError("n_cycles must be positive integers");
        cfg.n_cycles.push_back(static_cast<int>(v));
    }
    if (doc.contains("output_dir")) {
        if (!doc.at("output_dir").is_string())
            throw ParamError("output_dir must be a string");
        cfg.output_dir = doc.at("output_dir").get<std::string>();
    }
    cfg.paper_scale = bool_or(doc, "", "paper_scale", false);
    if (cfg.paper_scale) apply_paper_scale(cfg);
    cfg.validate();
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParamError("cannot read config file: " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    const std::string text = buf.str();
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".toml")
        return parse_config(parse_toml_lite(text));
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParamError(std::string("config JSON parse error: ") + e.what());
    }
    return parse_config(doc);
}

void apply_paper_scale(RunConfig& cfg) {
    cfg.paper_scale = true;
    cfg.ensemble.n_realizations = 1000;
    if (cfg.drive.kind != DriveKind::Carrier) cfg.drive.fock_cutoff = 30;
}

void RunConfig::validate() const {
    noise.params.validate();
    noise.shape.validate(noise.params.sample_rate);
    ensemble.validate();
    if (uses_drive(experiment)) drive.validate();

    switch (experiment) {
        case ExperimentKind::Rabi:
        case ExperimentKind::Pumping:
            if (!(duration > 0.0)) throw ParamError("missing required key: duration");
            break;
        case ExperimentKind::PiScanRabi:
            if (rabi_list.empty()) throw ParamError("missing required key: rabi_list");
            break;
        case ExperimentKind::PiScanRpsd:
        case ExperimentKind::MsGate:
            if (amplitudes.size() < 3)
                throw ParamError("amplitudes must list at least 3 values");
            break;
        case ExperimentKind::PumpingScan:
            if (amplitudes.size() < 3)
                throw ParamError("amplitudes must list at least 3 values");
            if (!(duration > 0.0)) throw ParamError("missing required key: duration");
            break;
        case ExperimentKind::Heating:
            if (n_cycles.empty()) throw ParamError("missing required key: n_cycles");
            break;
        case ExperimentKind::NoiseOnly:
            if (!(duration > 0.0) && noise.params.n_samples < 64)
                throw ParamError("noise-only needs duration or noise.n_samples >= 64");
            break;
    }
    switch (experiment) {
        case ExperimentKind::Rabi:
        case ExperimentKind::PiScanRpsd:
        case ExperimentKind::Pumping:
        case ExperimentKind::PumpingScan:
            if (drive.kind != DriveKind::Carrier)
                throw ParamError("this experiment requires drive.kind = carrier");
            break;
        case ExperimentKind::Heating:
            if (drive.kind != DriveKind::SidebandIon)
                throw ParamError("heating requires drive.kind = sideband");
            break;
        case ExperimentKind::MsGate:
            if (drive.kind != DriveKind::MolmerSorensen)
                throw ParamError("ms-gate requires drive.kind = ms");
            break;
        default:
            break;
    }
}

json RunConfig::resolved() const {
    // Runtime-only fields (output_dir, dry_run, dump paths) are deliberately
    // excluded so identical configs produce identical echoes.
    json doc;
    doc["experiment"] = to_string(experiment);
    doc["noise"] = {{"h0", noise.params.h0},
                    {"leak", noise.params.leak},
                    {"sample_rate", noise.params.sample_rate},
                    {"n_samples", noise.params.n_samples},
                    {"rms_target", noise.params.rms_target}};
    doc["servo"] = {{"enabled", noise.shape.enabled},
                    {"unity_gain_freq", noise.shape.unity_gain_freq},
                    {"gain_db", noise.shape.gain_db},
                    {"poles", noise.shape.poles},
                    {"zeros", noise.shape.zeros},
                    {"bump_quality", noise.shape.bump_quality}};
    if (uses_drive(experiment))
        doc["drive"] = {{"kind", to_string(drive.kind)},
                        {"rabi_hz", drive.rabi_hz},
                        {"detuning_hz", drive.detuning_hz},
                        {"trap_hz", drive.trap_hz},
                        {"lamb_dicke", drive.lamb_dicke},
                        {"fock_cutoff", drive.fock_cutoff},
                        {"n_qubits", drive.n_qubits}};
    doc["ensemble"] = {{"n_realizations", ensemble.n_realizations},
                       {"base_seed", ensemble.base_seed},
                       {"max_parallel", ensemble.max_parallel}};
    if (duration > 0.0) doc["duration"] = duration;
    if (!amplitudes.empty()) doc["amplitudes"] = amplitudes;
    if (!rabi_list.empty()) doc["rabi_list"] = rabi_list;
    if (!n_cycles.empty()) doc["n_cycles"] = n_cycles;
    doc["paper_scale"] = paper_scale;
    return doc;
}

namespace {

std::string series_csv(const char* x_name, const std::vector<double>& x,
                       const std::vector<double>& mean,
                       const std::vector<double>& stderrs, std::size_t n) {
    std::vector<std::string> ns(x.size(), std::to_string(n));
    std::vector<double> se = stderrs;
    if (se.empty()) se.assign(x.size(), 0.0);
    return render_csv({{x_name, format_doubles(x)},
                       {"mean", format_doubles(mean)},
                       {"stderr", format_doubles(se)},
                       {"n", ns}});
}

json linear_fit_json(const LinearFit& fit) {
    return {{"model", "y = slope * x"},
            {"slope", fit.slope},
            {"slope_stderr", fit.slope_stderr},
            {"slope_ci95",
             {fit.slope - 1.96 * fit.slope_stderr, fit.slope + 1.96 * fit.slope_stderr}},
            {"r_squared", fit.r_squared}};
}

json plotdata_json(const char* x_name, const std::vector<double>& x,
                   const std::vector<double>& y, const std::vector<double>& se) {
    json doc;
    doc["x_name"] = x_name;
    doc["x"] = x;
    doc["y"] = y;
    if (!se.empty()) doc["stderr"] = se;
    return doc;
}

struct Artifact {
    std::string name;
    std::string content;
};

std::string state_csv(const StateVector& state) {
    std::vector<double> idx(static_cast<std::size_t>(state.dim()));
    std::vector<double> re(idx.size()), im(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        idx[i] = static_cast<double>(i);
        re[i] = state.amplitudes(static_cast<Eigen::Index>(i)).real();
        im[i] = state.amplitudes(static_cast<Eigen::Index>(i)).imag();
    }
    return render_csv({{"index", format_doubles(idx)},
                       {"re", format_doubles(re)},
                       {"im", format_doubles(im)}});
}

std::string trace_csv(const PhaseTrace& trace) {
    std::vector<double> t(trace.samples.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i) * trace.dt;
    return render_csv({{"t", format_doubles(t)}, {"phi", format_doubles(trace.samples)}});
}

} // namespace

int run(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    namespace fs = std::filesystem;

    try {
        cfg.validate();
        if (cfg.dry_run) {
            std::printf("%s\n", cfg.resolved().dump(2).c_str());
            return 0;
        }
        if (cfg.output_dir.empty()) throw ParamError("output_dir is required");
        fs::create_directories(cfg.output_dir);

        const std::string name = to_string(cfg.experiment);
        std::vector<Artifact> artifacts;
        json fit_doc;
        fit_doc["experiment"] = name;
        fit_doc["seed_range"] = {{"base_seed", cfg.ensemble.base_seed},
                                 {"count", cfg.ensemble.n_realizations}};
        fit_doc["config"] = cfg.resolved();
        fit_doc["fit"] = nullptr;

        // Populated when the experiment has a single canonical realization
        // (used for --dump-state).
        std::optional<StateVector> dump_state;

        auto first_seed_state = [&](const DriveSpec& drive, double duration,
                                    std::size_t n_min) {
            auto params = cfg.noise.params;
            params.n_samples = std::max(params.n_samples, n_min);
            const PhaseTrace trace = synthesize(params, cfg.noise.shape,
                                                cfg.ensemble.base_seed);
            return propagate(initial_state(drive), drive, trace, duration, {}, {})
                .final_state;
        };
        auto duration_samples = [&](double duration) {
            return static_cast<std::size_t>(
                       std::ceil(duration * cfg.noise.params.sample_rate)) + 2;
        };

        switch (cfg.experiment) {
            case ExperimentKind::Rabi: {
                const auto res = run_rabi_decay(cfg.noise, cfg.drive.rabi_hz,
                                                cfg.duration, cfg.ensemble);
                artifacts.push_back({name + "_series.csv",
                                     series_csv("t", res.times, res.means, res.stderrs,
                                                cfg.ensemble.n_realizations)});
                fit_doc["failures"] = res.failures.size();
                artifacts.push_back(
                    {name + "_plotdata.json",
                     plotdata_json("t", res.times, res.means, res.stderrs).dump(2) + "\n"});
                if (!cfg.dump_state_path.empty())
                    dump_state = first_seed_state(cfg.drive, cfg.duration,
                                                  duration_samples(cfg.duration));
                break;
            }
            case ExperimentKind::PiScanRabi: {
                const auto res =
                    scan_pi_error_vs_rabi(cfg.noise, cfg.rabi_list, cfg.ensemble);
                artifacts.push_back({name + "_series.csv",
                                     series_csv("rabi_hz", res.x, res.y, {},
                                                cfg.ensemble.n_realizations)});
                const auto arg = static_cast<std::size_t>(
                    std::max_element(res.y.begin(), res.y.end()) - res.y.begin());
                fit_doc["argmax_rabi_hz"] = res.x[arg];
                fit_doc["argmax_infidelity"] = res.y[arg];
                artifacts.push_back({name + "_plotdata.json",
                                     plotdata_json("rabi_hz", res.x, res.y, {}).dump(2) +
                                         "\n"});
                break;
            }
            case ExperimentKind::PiScanRpsd: {
                const auto res = scan_pi_error_vs_rpsd(cfg.noise, cfg.amplitudes,
                                                       cfg.drive.rabi_hz, cfg.ensemble);
                artifacts.push_back({name + "_series.csv",
                                     series_csv("rpsd_times_tpi", res.x, res.y, {},
                                                cfg.ensemble.n_realizations)});
                fit_doc["fit"] = linear_fit_json(res.fit);
                artifacts.push_back(
                    {name + "_plotdata.json",
                     plotdata_json("rpsd_times_tpi", res.x, res.y, {}).dump(2) + "\n"});
                break;
            }
            case ExperimentKind::Pumping: {
                const auto res = run_pumping(cfg.noise, cfg.drive.rabi_hz,
                                             cfg.drive.detuning_hz, cfg.duration,
                                             cfg.ensemble);
                artifacts.push_back({name + "_series.csv",
                                     series_csv("t", res.series.times, res.series.means,
                                                res.series.stderrs,
                                                cfg.ensemble.n_realizations)});
                fit_doc["fit"] = {{"model", "P_e = 0.5 (1 - exp(-gamma t))"},
                                  {"gamma", res.fit.gamma},
                                  {"gamma_stderr", res.fit.gamma_stderr},
                                  {"gamma_ci95",
                                   {res.fit.gamma - 1.96 * res.fit.gamma_stderr,
                                    res.fit.gamma + 1.96 * res.fit.gamma_stderr}},
                                  {"r_squared", res.fit.r_squared}};
                fit_doc["failures"] = res.series.failures.size();
                artifacts.push_back({name + "_plotdata.json",
                                     plotdata_json("t", res.series.times,
                                                   res.series.means, res.series.stderrs)
                                             .dump(2) +
                                         "\n"});
                if (!cfg.dump_state_path.empty())
                    dump_state = first_seed_state(cfg.drive, cfg.duration,
                                                  duration_samples(cfg.duration));
                break;
            }
            case ExperimentKind::PumpingScan: {
                const auto res =
                    scan_pumping_rate(cfg.noise, cfg.amplitudes, cfg.drive.rabi_hz,
                                      cfg.drive.detuning_hz, cfg.duration, cfg.ensemble);
                artifacts.push_back({name + "_series.csv",
                                     series_csv("rpsd", res.x, res.y, {},
                                                cfg.ensemble.n_realizations)});
                fit_doc["fit"] = linear_fit_json(res.fit);
                artifacts.push_back(
                    {name + "_plotdata.json",
                     plotdata_json("rpsd", res.x, res.y, {}).dump(2) + "\n"});
                break;
            }
            case ExperimentKind::Heating: {
                const auto res =
                    run_heating(cfg.noise, cfg.drive, cfg.n_cycles, cfg.ensemble);
                artifacts.push_back({name + "_series.csv",
                                     series_csv("cycles", res.cycles, res.nbar_means,
                                                res.nbar_stderrs,
                                                cfg.ensemble.n_realizations)});
                fit_doc["truncation_warning"] = res.truncation_warning;
                artifacts.push_back({name + "_plotdata.json",
                                     plotdata_json("cycles", res.cycles, res.nbar_means,
                                                   res.nbar_stderrs)
                                             .dump(2) +
                                         "\n"});
                if (!cfg.dump_state_path.empty()) {
                    const double cycle = 1.0 / (cfg.drive.lamb_dicke * cfg.drive.rabi_hz);
                    const double dur =
                        cycle * *std::max_element(cfg.n_cycles.begin(), cfg.n_cycles.end());
                    dump_state = first_seed_state(cfg.drive, dur, duration_samples(dur));
                }
                break;
            }
            case ExperimentKind::MsGate: {
                const auto res =
                    run_ms_gate(cfg.noise, cfg.amplitudes, cfg.drive, cfg.ensemble);
                std::vector<double> se;
                bool truncated = false;
                for (const auto& p : res.points) {
                    se.push_back(p.fidelity_stderr);
                    truncated = truncated || p.truncation_warning;
                }
                artifacts.push_back({name + "_series.csv",
                                     series_csv("t_times_rpsd", res.scan.x, res.scan.y,
                                                se, cfg.ensemble.n_realizations)});
                fit_doc["fit"] = linear_fit_json(res.scan.fit);
                fit_doc["gate_time"] = res.gate_time;
                fit_doc["gate_detuning_hz"] = res.gate_detuning_hz;
                fit_doc["bell_phase"] = res.bell_phase;
                fit_doc["noise_free_infidelity"] = res.noise_free_infidelity;
                fit_doc["truncation_warning"] = truncated;
                // error budget: predicted infidelity at T = 100 us under
                // RPSD(nu) = 1 Hz^2/Hz
                fit_doc["budget_infidelity_100us_1hz2hz"] = res.scan.fit.slope * 1e-4;
                artifacts.push_back(
                    {name + "_plotdata.json",
                     plotdata_json("t_times_rpsd", res.scan.x, res.scan.y, se).dump(2) +
                         "\n"});
                if (!cfg.dump_state_path.empty()) {
                    DriveSpec gate = cfg.drive;
                    gate.detuning_hz = res.gate_detuning_hz;
                    dump_state = first_seed_state(gate, res.gate_time,
                                                  duration_samples(res.gate_time));
                }
                break;
            }
            case ExperimentKind::NoiseOnly: {
                auto params = cfg.noise.params;
                if (cfg.duration > 0.0)
                    params.n_samples =
                        std::max(params.n_samples, duration_samples(cfg.duration));
                const PhaseTrace trace =
                    synthesize(params, cfg.noise.shape, cfg.ensemble.base_seed);
                artifacts.push_back({name + "_trace.csv", trace_csv(trace)});
                const auto psd = estimate_psd(
                    trace, std::max<std::size_t>(64, trace.samples.size() / 8), 0.5);
                artifacts.push_back(
                    {name + "_psd.csv",
                     render_csv({{"f", format_doubles(psd.freqs)},
                                 {"psd", format_doubles(psd.values)}})});
                fit_doc["trace_rms"] = std::sqrt(trace.variance());
                break;
            }
        }

        artifacts.push_back({name + "_fit.json", fit_doc.dump(2) + "\n"});

        if (!cfg.dump_trace_path.empty()) {
            auto params = cfg.noise.params;
            params.n_samples = std::max<std::size_t>(params.n_samples, 1024);
            if (cfg.duration > 0.0)
                params.n_samples =
                    std::max(params.n_samples, duration_samples(cfg.duration));
            const PhaseTrace trace =
                synthesize(params, cfg.noise.shape, cfg.ensemble.base_seed);
            artifacts.push_back({cfg.dump_trace_path, trace_csv(trace)});
        }
        if (!cfg.dump_state_path.empty() && dump_state)
            artifacts.push_back({cfg.dump_state_path, state_csv(*dump_state)});

        json manifest;
        manifest["experiment"] = name;
        manifest["base_seed"] = cfg.ensemble.base_seed;
        manifest["config"] = cfg.resolved();
        json files = json::array();
        for (const auto& art : artifacts) {
            const fs::path target = fs::path(art.name).is_absolute()
                                        ? fs::path(art.name)
                                        : fs::path(cfg.output_dir) / art.name;
            write_file_atomic(target.string(), art.content);
            files.push_back({{"name", art.name},
                             {"sha256", sha256_hex(art.content)},
                             {"bytes", art.content.size()}});
        }
        // Wall-clock timing lives in its own (volatile) file so manifest.json
        // is bit-identical across reruns of the same config + seed.
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const std::string timing =
            json{{"wall_time_s", wall}}.dump(2) + "\n";
        write_file_atomic((fs::path(cfg.output_dir) / "timing.json").string(), timing);
        files.push_back({{"name", "timing.json"}, {"sha256", nullptr}, {"bytes", nullptr}});
        manifest["files"] = files;
        write_file_atomic((fs::path(cfg.output_dir) / "manifest.json").string(),
                          manifest.dump(2) + "\n");
        return 0;
    } catch (const std::exception& e) {
        json err;
        err["error"] = {{"experiment", to_string(cfg.experiment)},
                        {"message", e.what()},
                        {"base_seed", cfg.ensemble.base_seed}};
        try {
            if (!cfg.output_dir.empty()) {
                fs::create_directories(cfg.output_dir);
                write_file_atomic((fs::path(cfg.output_dir) / "error.json").string(),
                                  err.dump(2) + "\n");
            }
        } catch (const std::exception&) {
            // fall through to stderr
        }
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

} // namespace pnsim
