#include "sdr/config.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include <json.hpp>

namespace sdr {

namespace {

using nlohmann::json;

constexpr double kMhzToRad = 2.0 * std::numbers::pi * 1e6;
constexpr double kNs = 1e-9;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path + ": " + msg);
}

void check(bool ok, const std::string& path, const std::string& msg) {
    if (!ok) fail(path, msg);
}

std::string join(const std::string& base, const char* key) {
    return base.empty() ? key : base + "." + key;
}

void require_keys(const json& j, const std::string& path,
                  const std::set<std::string>& allowed) {
    if (!j.is_object()) fail(path, "expected a JSON object");
    for (const auto& item : j.items())
        if (!allowed.count(item.key()))
            fail(join(path, item.key().c_str()), "unknown key");
}

double num_or(const json& j, const std::string& path, const char* key, double def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_number()) fail(join(path, key), "expected a number");
    return v.get<double>();
}

int int_or(const json& j, const std::string& path, const char* key, int def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
    return v.get<int>();
}

std::uint64_t u64_or(const json& j, const std::string& path, const char* key,
                     std::uint64_t def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_number_unsigned() && !v.is_number_integer())
        fail(join(path, key), "expected a non-negative integer");
    if (v.is_number_integer() && v.get<long long>() < 0)
        fail(join(path, key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

bool bool_or(const json& j, const std::string& path, const char* key, bool def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_boolean()) fail(join(path, key), "expected a boolean");
    return v.get<bool>();
}

std::string str_or(const json& j, const std::string& path, const char* key,
                   const std::string& def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_string()) fail(join(path, key), "expected a string");
    return v.get<std::string>();
}

void parse_rates(const json& j, const std::string& path, RatesConfig& r) {
    require_keys(j, path, {"r_s_per_s", "r_t_per_s", "d_per_s", "g_per_s"});
    r.r_s_per_s = num_or(j, path, "r_s_per_s", r.r_s_per_s);
    r.r_t_per_s = num_or(j, path, "r_t_per_s", r.r_t_per_s);
    r.d_per_s = num_or(j, path, "d_per_s", r.d_per_s);
    r.g_per_s = num_or(j, path, "g_per_s", r.g_per_s);
    check(r.r_s_per_s >= 0.0, join(path, "r_s_per_s"), "must be >= 0");
    check(r.r_t_per_s >= 0.0, join(path, "r_t_per_s"), "must be >= 0");
    check(r.d_per_s >= 0.0, join(path, "d_per_s"), "must be >= 0");
    check(r.g_per_s >= 0.0, join(path, "g_per_s"), "must be >= 0");
    check(r.r_s_per_s >= r.r_t_per_s, join(path, "r_s_per_s"),
          "must be >= r_t_per_s (singlet recombination dominates)");
}

}  // namespace

Config parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }

    Config c;
    require_keys(root, "",
                 {"run", "pair", "drive", "rates", "broadening", "echo", "rabi_scan",
                  "transient", "detector", "levels", "readout"});

    if (root.contains("run")) {
        const json& j = root["run"];
        require_keys(j, "run", {"seed", "output_dir"});
        c.run.seed = u64_or(j, "run", "seed", c.run.seed);
        c.run.output_dir = str_or(j, "run", "output_dir", c.run.output_dir);
        check(!c.run.output_dir.empty(), "run.output_dir", "must not be empty");
    }

    if (root.contains("pair")) {
        const json& j = root["pair"];
        require_keys(j, "pair", {"detuning_a_mhz", "detuning_b_mhz", "exchange_j_mhz"});
        c.pair.detuning_a_mhz = num_or(j, "pair", "detuning_a_mhz", c.pair.detuning_a_mhz);
        c.pair.detuning_b_mhz = num_or(j, "pair", "detuning_b_mhz", c.pair.detuning_b_mhz);
        c.pair.exchange_j_mhz = num_or(j, "pair", "exchange_j_mhz", c.pair.exchange_j_mhz);
        check(c.pair.exchange_j_mhz >= 0.0, "pair.exchange_j_mhz", "must be >= 0");
    }

    if (root.contains("drive")) {
        const json& j = root["drive"];
        require_keys(j, "drive", {"rabi_mhz", "phase_deg"});
        c.drive.rabi_mhz = num_or(j, "drive", "rabi_mhz", c.drive.rabi_mhz);
        c.drive.phase_deg = num_or(j, "drive", "phase_deg", c.drive.phase_deg);
        check(c.drive.rabi_mhz >= 0.0, "drive.rabi_mhz", "must be >= 0");
    }

    if (root.contains("rates")) parse_rates(root["rates"], "rates", c.rates);

    if (root.contains("broadening")) {
        const json& j = root["broadening"];
        require_keys(j, "broadening",
                     {"sigma_detuning_a_mhz", "sigma_detuning_b_mhz", "sigma_rabi_rel",
                      "n_nodes", "scheme", "seed"});
        c.broadening.sigma_detuning_a_mhz =
            num_or(j, "broadening", "sigma_detuning_a_mhz", c.broadening.sigma_detuning_a_mhz);
        c.broadening.sigma_detuning_b_mhz =
            num_or(j, "broadening", "sigma_detuning_b_mhz", c.broadening.sigma_detuning_b_mhz);
        c.broadening.sigma_rabi_rel =
            num_or(j, "broadening", "sigma_rabi_rel", c.broadening.sigma_rabi_rel);
        c.broadening.n_nodes = int_or(j, "broadening", "n_nodes", c.broadening.n_nodes);
        c.broadening.scheme = str_or(j, "broadening", "scheme", c.broadening.scheme);
        c.broadening.seed = u64_or(j, "broadening", "seed", c.broadening.seed);
        check(c.broadening.sigma_detuning_a_mhz >= 0.0, "broadening.sigma_detuning_a_mhz",
              "must be >= 0");
        check(c.broadening.sigma_detuning_b_mhz >= 0.0, "broadening.sigma_detuning_b_mhz",
              "must be >= 0");
        check(c.broadening.sigma_rabi_rel >= 0.0, "broadening.sigma_rabi_rel", "must be >= 0");
        check(c.broadening.n_nodes >= 1, "broadening.n_nodes", "must be >= 1");
        check(c.broadening.scheme == "gauss-hermite" || c.broadening.scheme == "monte-carlo",
              "broadening.scheme", "must be \"gauss-hermite\" or \"monte-carlo\"");
    }

    if (root.contains("echo")) {
        const json& j = root["echo"];
        require_keys(j, "echo",
                     {"tau_180_ns", "start_ns", "stop_ns", "step_ns", "axis", "initial",
                      "samples_per_segment"});
        c.echo.tau_180_ns = num_or(j, "echo", "tau_180_ns", c.echo.tau_180_ns);
        c.echo.start_ns = num_or(j, "echo", "start_ns", c.echo.start_ns);
        c.echo.stop_ns = num_or(j, "echo", "stop_ns", c.echo.stop_ns);
        c.echo.step_ns = num_or(j, "echo", "step_ns", c.echo.step_ns);
        c.echo.axis = str_or(j, "echo", "axis", c.echo.axis);
        c.echo.initial = str_or(j, "echo", "initial", c.echo.initial);
        c.echo.samples_per_segment =
            int_or(j, "echo", "samples_per_segment", c.echo.samples_per_segment);
        check(c.echo.tau_180_ns > 0.0, "echo.tau_180_ns", "must be > 0");
        check(c.echo.step_ns > 0.0, "echo.step_ns", "must be > 0");
        check(c.echo.stop_ns > c.echo.start_ns, "echo.stop_ns", "must be > start_ns");
        check(c.echo.start_ns >= 0.0, "echo.start_ns", "must be >= 0");
        check(c.echo.axis == "total" || c.echo.axis == "second", "echo.axis",
              "must be \"total\" or \"second\"");
        check(c.echo.initial == "steady" || c.echo.initial == "tminus", "echo.initial",
              "must be \"steady\" or \"tminus\"");
        check(c.echo.samples_per_segment >= 2, "echo.samples_per_segment", "must be >= 2");
    }

    if (root.contains("rabi_scan")) {
        const json& j = root["rabi_scan"];
        require_keys(j, "rabi_scan",
                     {"start_ns", "stop_ns", "step_ns", "initial", "samples_per_segment"});
        c.rabi.start_ns = num_or(j, "rabi_scan", "start_ns", c.rabi.start_ns);
        c.rabi.stop_ns = num_or(j, "rabi_scan", "stop_ns", c.rabi.stop_ns);
        c.rabi.step_ns = num_or(j, "rabi_scan", "step_ns", c.rabi.step_ns);
        c.rabi.initial = str_or(j, "rabi_scan", "initial", c.rabi.initial);
        c.rabi.samples_per_segment =
            int_or(j, "rabi_scan", "samples_per_segment", c.rabi.samples_per_segment);
        check(c.rabi.step_ns > 0.0, "rabi_scan.step_ns", "must be > 0");
        check(c.rabi.stop_ns > c.rabi.start_ns, "rabi_scan.stop_ns", "must be > start_ns");
        check(c.rabi.start_ns >= 0.0, "rabi_scan.start_ns", "must be >= 0");
        check(c.rabi.initial == "steady" || c.rabi.initial == "tminus", "rabi_scan.initial",
              "must be \"steady\" or \"tminus\"");
        check(c.rabi.samples_per_segment >= 2, "rabi_scan.samples_per_segment",
              "must be >= 2");
    }

    if (root.contains("transient")) {
        const json& j = root["transient"];
        require_keys(j, "transient",
                     {"coeff_singlet_pa", "coeff_triplet_pa", "tau_singlet_relax_ns",
                      "tau_triplet_relax_ns", "baseline_pa", "horizon_ns", "dt_ns",
                      "sample_time_ns"});
        c.transient.coeff_singlet_pa =
            num_or(j, "transient", "coeff_singlet_pa", c.transient.coeff_singlet_pa);
        c.transient.coeff_triplet_pa =
            num_or(j, "transient", "coeff_triplet_pa", c.transient.coeff_triplet_pa);
        c.transient.tau_singlet_relax_ns =
            num_or(j, "transient", "tau_singlet_relax_ns", c.transient.tau_singlet_relax_ns);
        c.transient.tau_triplet_relax_ns =
            num_or(j, "transient", "tau_triplet_relax_ns", c.transient.tau_triplet_relax_ns);
        c.transient.baseline_pa = num_or(j, "transient", "baseline_pa", c.transient.baseline_pa);
        c.transient.horizon_ns = num_or(j, "transient", "horizon_ns", c.transient.horizon_ns);
        c.transient.dt_ns = num_or(j, "transient", "dt_ns", c.transient.dt_ns);
        c.transient.sample_time_ns =
            num_or(j, "transient", "sample_time_ns", c.transient.sample_time_ns);
        check(c.transient.tau_singlet_relax_ns > 0.0, "transient.tau_singlet_relax_ns",
              "must be > 0");
        check(c.transient.tau_triplet_relax_ns > 0.0, "transient.tau_triplet_relax_ns",
              "must be > 0");
        check(c.transient.horizon_ns > 0.0, "transient.horizon_ns", "must be > 0");
        check(c.transient.dt_ns > 0.0, "transient.dt_ns", "must be > 0");
        check(c.transient.sample_time_ns >= 0.0 &&
                  c.transient.sample_time_ns <= c.transient.horizon_ns,
              "transient.sample_time_ns", "must lie within [0, horizon_ns]");
    }

    if (root.contains("detector")) {
        const json& j = root["detector"];
        require_keys(j, "detector", {"rise_time_ns", "sample_jitter_ns"});
        c.detector.rise_time_ns = num_or(j, "detector", "rise_time_ns", c.detector.rise_time_ns);
        c.detector.sample_jitter_ns =
            num_or(j, "detector", "sample_jitter_ns", c.detector.sample_jitter_ns);
        check(c.detector.rise_time_ns >= 0.0, "detector.rise_time_ns", "must be >= 0");
        check(c.detector.sample_jitter_ns >= 0.0, "detector.sample_jitter_ns", "must be >= 0");
    }

    if (root.contains("levels")) {
        const json& j = root["levels"];
        require_keys(j, "levels", {"j_start_mhz", "j_stop_mhz", "n_points"});
        c.levels.j_start_mhz = num_or(j, "levels", "j_start_mhz", c.levels.j_start_mhz);
        c.levels.j_stop_mhz = num_or(j, "levels", "j_stop_mhz", c.levels.j_stop_mhz);
        c.levels.n_points = int_or(j, "levels", "n_points", c.levels.n_points);
        check(c.levels.j_start_mhz >= 0.0, "levels.j_start_mhz", "must be >= 0");
        check(c.levels.j_stop_mhz > c.levels.j_start_mhz, "levels.j_stop_mhz",
              "must be > j_start_mhz");
        check(c.levels.n_points >= 2, "levels.n_points", "must be >= 2");
    }

    if (root.contains("readout")) {
        const json& j = root["readout"];
        require_keys(j, "readout",
                     {"spins", "ramp", "rates", "tau_life_ns", "temperature_k", "flash",
                      "classifier", "n_trials", "stochastic_flash", "pair_counts", "sweep"});
        if (j.contains("spins")) {
            const json& js = j["spins"];
            const std::string p = "readout.spins";
            require_keys(js, p, {"omega_p_mhz", "omega_db_mhz", "omega_n_mhz", "hyperfine_a_mhz"});
            auto& s = c.readout.spins;
            s.omega_p_mhz = num_or(js, p, "omega_p_mhz", s.omega_p_mhz);
            s.omega_db_mhz = num_or(js, p, "omega_db_mhz", s.omega_db_mhz);
            s.omega_n_mhz = num_or(js, p, "omega_n_mhz", s.omega_n_mhz);
            s.hyperfine_a_mhz = num_or(js, p, "hyperfine_a_mhz", s.hyperfine_a_mhz);
            check(s.omega_p_mhz > 0.0, p + ".omega_p_mhz", "must be > 0");
            check(s.omega_db_mhz > 0.0, p + ".omega_db_mhz", "must be > 0");
            check(s.omega_n_mhz >= 0.0, p + ".omega_n_mhz", "must be >= 0");
            check(s.hyperfine_a_mhz >= 0.0, p + ".hyperfine_a_mhz", "must be >= 0");
        }
        if (j.contains("ramp")) {
            const json& jr = j["ramp"];
            const std::string p = "readout.ramp";
            require_keys(jr, p, {"j_max_mhz", "tau_slope_ns", "shape", "hold_ns"});
            auto& r = c.readout.ramp;
            r.j_max_mhz = num_or(jr, p, "j_max_mhz", r.j_max_mhz);
            r.tau_slope_ns = num_or(jr, p, "tau_slope_ns", r.tau_slope_ns);
            r.shape = str_or(jr, p, "shape", r.shape);
            r.hold_ns = num_or(jr, p, "hold_ns", r.hold_ns);
            check(r.j_max_mhz >= 0.0, p + ".j_max_mhz", "must be >= 0");
            check(r.tau_slope_ns > 0.0, p + ".tau_slope_ns", "must be > 0");
            check(r.hold_ns >= 0.0, p + ".hold_ns", "must be >= 0");
            check(r.shape == "linear" || r.shape == "raised-cosine", p + ".shape",
                  "must be \"linear\" or \"raised-cosine\"");
        }
        if (j.contains("rates")) parse_rates(j["rates"], "readout.rates", c.readout.rates);
        c.readout.tau_life_ns = num_or(j, "readout", "tau_life_ns", c.readout.tau_life_ns);
        c.readout.temperature_k = num_or(j, "readout", "temperature_k", c.readout.temperature_k);
        check(c.readout.tau_life_ns > 0.0, "readout.tau_life_ns", "must be > 0");
        check(c.readout.temperature_k > 0.0, "readout.temperature_k", "must be > 0");
        check(c.readout.rates.d_per_s == 0.0, "readout.rates.d_per_s",
              "must be 0 in readout mode (dissociation conflates escape with readout)");
        check(c.readout.rates.g_per_s == 0.0, "readout.rates.g_per_s",
              "must be 0 during the readout window");
        if (j.contains("flash")) {
            const json& jf = j["flash"];
            const std::string p = "readout.flash";
            require_keys(jf, p,
                         {"photon_energy_ev", "power_nw", "duration_ns", "quantum_efficiency"});
            auto& f = c.readout.flash;
            f.photon_energy_ev = num_or(jf, p, "photon_energy_ev", f.photon_energy_ev);
            f.power_nw = num_or(jf, p, "power_nw", f.power_nw);
            f.duration_ns = num_or(jf, p, "duration_ns", f.duration_ns);
            f.quantum_efficiency = num_or(jf, p, "quantum_efficiency", f.quantum_efficiency);
            check(f.photon_energy_ev > 0.0, p + ".photon_energy_ev", "must be > 0");
            check(f.power_nw >= 0.0, p + ".power_nw", "must be >= 0");
            check(f.duration_ns >= 0.0, p + ".duration_ns", "must be >= 0");
            check(f.quantum_efficiency >= 0.0 && f.quantum_efficiency <= 1.0,
                  p + ".quantum_efficiency", "must be in [0, 1]");
        }
        if (j.contains("classifier")) {
            const json& jc = j["classifier"];
            const std::string p = "readout.classifier";
            require_keys(jc, p, {"k_slow_per_s", "k_trap_per_s", "tau_decay_ns", "threshold"});
            auto& cl = c.readout.classifier;
            cl.k_slow_per_s = num_or(jc, p, "k_slow_per_s", cl.k_slow_per_s);
            cl.k_trap_per_s = num_or(jc, p, "k_trap_per_s", cl.k_trap_per_s);
            cl.tau_decay_ns = num_or(jc, p, "tau_decay_ns", cl.tau_decay_ns);
            cl.threshold = num_or(jc, p, "threshold", cl.threshold);
            check(cl.k_trap_per_s > 0.0, p + ".k_trap_per_s", "must be > 0");
            check(cl.k_slow_per_s >= 0.0, p + ".k_slow_per_s", "must be >= 0");
            check(cl.tau_decay_ns > 0.0, p + ".tau_decay_ns", "must be > 0");
            check(cl.threshold >= 0.0 && cl.threshold < 1.0, p + ".threshold",
                  "must be in (0, 1), or 0 for auto-calibration");
        }
        c.readout.n_trials = int_or(j, "readout", "n_trials", c.readout.n_trials);
        c.readout.stochastic_flash =
            bool_or(j, "readout", "stochastic_flash", c.readout.stochastic_flash);
        check(c.readout.n_trials >= 1, "readout.n_trials", "must be >= 1");
        if (j.contains("pair_counts")) {
            const json& ja = j["pair_counts"];
            if (!ja.is_array()) fail("readout.pair_counts", "expected an array of integers");
            c.readout.pair_counts.clear();
            for (const auto& v : ja) {
                if (!v.is_number_integer())
                    fail("readout.pair_counts", "expected an array of integers");
                const long long n = v.get<long long>();
                check(n >= 0, "readout.pair_counts", "entries must be >= 0");
                c.readout.pair_counts.push_back(n);
            }
            check(!c.readout.pair_counts.empty(), "readout.pair_counts", "must not be empty");
        }
        if (j.contains("sweep")) {
            const json& jw = j["sweep"];
            const std::string p = "readout.sweep";
            require_keys(jw, p, {"phase_budget", "scheme", "diagnostics_grid"});
            auto& w = c.readout.sweep;
            w.phase_budget = num_or(jw, p, "phase_budget", w.phase_budget);
            w.scheme = str_or(jw, p, "scheme", w.scheme);
            w.diagnostics_grid = int_or(jw, p, "diagnostics_grid", w.diagnostics_grid);
            check(w.phase_budget > 0.0 && w.phase_budget <= 0.5, p + ".phase_budget",
                  "must be in (0, 0.5]");
            check(w.scheme == "cf4" || w.scheme == "midpoint", p + ".scheme",
                  "must be \"cf4\" or \"midpoint\"");
            check(w.diagnostics_grid >= 16, p + ".diagnostics_grid", "must be >= 16");
        }
    }

    // resolve the auto-calibrated classifier threshold so the echoed config
    // carries the concrete decision boundary
    if (c.readout.classifier.threshold == 0.0) {
        ClassifierParams cp;
        cp.k_slow = c.readout.classifier.k_slow_per_s;
        cp.k_trap = c.readout.classifier.k_trap_per_s;
        cp.tau_decay = c.readout.classifier.tau_decay_ns * kNs;
        c.readout.classifier.threshold = calibrated_threshold(cp);
    }
    check(c.readout.classifier.threshold > 0.0 && c.readout.classifier.threshold < 1.0,
          "readout.classifier.threshold", "auto-calibration left the threshold outside (0, 1)");

    // cross-checks that need several fields at once
    try {
        c.pair_params().validate();
        c.drive_params().validate();
        c.ksm_rates().validate();
        c.broadening_spec().validate();
        c.transient_model().validate();
        c.detector_model().validate();
        c.readout_params().validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

PairParams Config::pair_params() const {
    PairParams p;
    p.detuning_a = pair.detuning_a_mhz * kMhzToRad;
    p.detuning_b = pair.detuning_b_mhz * kMhzToRad;
    p.exchange_j = pair.exchange_j_mhz * kMhzToRad;
    return p;
}

DriveParams Config::drive_params() const {
    DriveParams d;
    d.rabi_omega1 = drive.rabi_mhz * kMhzToRad;
    d.phase_deg = drive.phase_deg;
    return d;
}

KsmRates Config::ksm_rates() const {
    return KsmRates{rates.r_s_per_s, rates.r_t_per_s, rates.d_per_s, rates.g_per_s};
}

BroadeningSpec Config::broadening_spec() const {
    BroadeningSpec b;
    b.sigma_detuning_a = broadening.sigma_detuning_a_mhz * kMhzToRad;
    b.sigma_detuning_b = broadening.sigma_detuning_b_mhz * kMhzToRad;
    b.sigma_rabi_rel = broadening.sigma_rabi_rel;
    b.n_nodes = broadening.n_nodes;
    b.scheme = broadening.scheme == "monte-carlo" ? BroadeningScheme::MonteCarlo
                                                  : BroadeningScheme::GaussHermite;
    b.seed = broadening.seed;
    return b;
}

TransientModel Config::transient_model() const {
    TransientModel m;
    m.coeff_singlet = transient.coeff_singlet_pa * 1e-12;
    m.coeff_triplet = transient.coeff_triplet_pa * 1e-12;
    m.tau_singlet_relax = transient.tau_singlet_relax_ns * kNs;
    m.tau_triplet_relax = transient.tau_triplet_relax_ns * kNs;
    m.baseline = transient.baseline_pa * 1e-12;
    return m;
}

DetectorModel Config::detector_model() const {
    DetectorModel d;
    d.rise_time = detector.rise_time_ns * kNs;
    d.sample_jitter = detector.sample_jitter_ns * kNs;
    return d;
}

ReadoutParams Config::readout_params() const {
    ReadoutParams p;
    p.spins.omega_p = readout.spins.omega_p_mhz * kMhzToRad;
    p.spins.omega_db = readout.spins.omega_db_mhz * kMhzToRad;
    p.spins.omega_n = readout.spins.omega_n_mhz * kMhzToRad;
    p.spins.hyperfine_a = readout.spins.hyperfine_a_mhz * kMhzToRad;
    p.ramp.j_max = readout.ramp.j_max_mhz * kMhzToRad;
    p.ramp.tau_slope = readout.ramp.tau_slope_ns * kNs;
    p.ramp.shape = readout.ramp.shape == "raised-cosine" ? RampShape::RaisedCosine
                                                         : RampShape::Linear;
    p.ramp.hold = readout.ramp.hold_ns * kNs;
    p.rates = KsmRates{readout.rates.r_s_per_s, readout.rates.r_t_per_s,
                       readout.rates.d_per_s, readout.rates.g_per_s};
    p.tau_life = readout.tau_life_ns * kNs;
    p.temperature = readout.temperature_k;
    p.flash.photon_energy_ev = readout.flash.photon_energy_ev;
    p.flash.power_w = readout.flash.power_nw * 1e-9;
    p.flash.duration = readout.flash.duration_ns * kNs;
    p.flash.quantum_efficiency = readout.flash.quantum_efficiency;
    p.classifier.k_slow = readout.classifier.k_slow_per_s;
    p.classifier.k_trap = readout.classifier.k_trap_per_s;
    p.classifier.tau_decay = readout.classifier.tau_decay_ns * kNs;
    p.classifier.threshold = readout.classifier.threshold;
    p.stochastic_flash = readout.stochastic_flash;
    p.sweep.phase_budget = readout.sweep.phase_budget;
    p.sweep.scheme.kind = readout.sweep.scheme == "midpoint"
                              ? SweepScheme::Kind::Midpoint
                              : SweepScheme::Kind::CommutatorFree4;
    p.sweep.diagnostics_grid = readout.sweep.diagnostics_grid;
    return p;
}

namespace {

std::vector<double> grid_from(double start_ns, double stop_ns, double step_ns) {
    std::vector<double> g;
    const long long n = static_cast<long long>(std::floor((stop_ns - start_ns) / step_ns + 0.5));
    for (long long k = 0; k <= n; ++k) {
        const double t = start_ns + k * step_ns;
        if (t > stop_ns + 1e-9 * step_ns) break;
        g.push_back(t * kNs);
    }
    return g;
}

}  // namespace

std::vector<double> Config::echo_grid_s() const {
    return grid_from(echo.start_ns, echo.stop_ns, echo.step_ns);
}

std::vector<double> Config::rabi_grid_s() const {
    return grid_from(rabi.start_ns, rabi.stop_ns, rabi.step_ns);
}

std::vector<double> Config::levels_grid_rad_s() const {
    std::vector<double> g;
    for (int k = 0; k < levels.n_points; ++k)
        g.push_back((levels.j_start_mhz +
                     (levels.j_stop_mhz - levels.j_start_mhz) * k / (levels.n_points - 1)) *
                    kMhzToRad);
    return g;
}

InitialState Config::echo_initial() const {
    return echo.initial == "tminus" ? InitialState::triplet_minus()
                                    : InitialState::member_steady_state();
}

InitialState Config::rabi_initial() const {
    return rabi.initial == "tminus" ? InitialState::triplet_minus()
                                    : InitialState::member_steady_state();
}

EchoScanAxis Config::echo_axis() const {
    return echo.axis == "second" ? EchoScanAxis::SecondSegment : EchoScanAxis::TotalLength;
}

std::string dump_config(const Config& c) {
    json j;
    j["run"] = {{"seed", c.run.seed}, {"output_dir", c.run.output_dir}};
    j["pair"] = {{"detuning_a_mhz", c.pair.detuning_a_mhz},
                 {"detuning_b_mhz", c.pair.detuning_b_mhz},
                 {"exchange_j_mhz", c.pair.exchange_j_mhz}};
    j["drive"] = {{"rabi_mhz", c.drive.rabi_mhz}, {"phase_deg", c.drive.phase_deg}};
    j["rates"] = {{"r_s_per_s", c.rates.r_s_per_s},
                  {"r_t_per_s", c.rates.r_t_per_s},
                  {"d_per_s", c.rates.d_per_s},
                  {"g_per_s", c.rates.g_per_s}};
    j["broadening"] = {{"sigma_detuning_a_mhz", c.broadening.sigma_detuning_a_mhz},
                       {"sigma_detuning_b_mhz", c.broadening.sigma_detuning_b_mhz},
                       {"sigma_rabi_rel", c.broadening.sigma_rabi_rel},
                       {"n_nodes", c.broadening.n_nodes},
                       {"scheme", c.broadening.scheme},
                       {"seed", c.broadening.seed}};
    j["echo"] = {{"tau_180_ns", c.echo.tau_180_ns},
                 {"start_ns", c.echo.start_ns},
                 {"stop_ns", c.echo.stop_ns},
                 {"step_ns", c.echo.step_ns},
                 {"axis", c.echo.axis},
                 {"initial", c.echo.initial},
                 {"samples_per_segment", c.echo.samples_per_segment}};
    j["rabi_scan"] = {{"start_ns", c.rabi.start_ns},
                      {"stop_ns", c.rabi.stop_ns},
                      {"step_ns", c.rabi.step_ns},
                      {"initial", c.rabi.initial},
                      {"samples_per_segment", c.rabi.samples_per_segment}};
    j["transient"] = {{"coeff_singlet_pa", c.transient.coeff_singlet_pa},
                      {"coeff_triplet_pa", c.transient.coeff_triplet_pa},
                      {"tau_singlet_relax_ns", c.transient.tau_singlet_relax_ns},
                      {"tau_triplet_relax_ns", c.transient.tau_triplet_relax_ns},
                      {"baseline_pa", c.transient.baseline_pa},
                      {"horizon_ns", c.transient.horizon_ns},
                      {"dt_ns", c.transient.dt_ns},
                      {"sample_time_ns", c.transient.sample_time_ns}};
    j["detector"] = {{"rise_time_ns", c.detector.rise_time_ns},
                     {"sample_jitter_ns", c.detector.sample_jitter_ns}};
    j["levels"] = {{"j_start_mhz", c.levels.j_start_mhz},
                   {"j_stop_mhz", c.levels.j_stop_mhz},
                   {"n_points", c.levels.n_points}};
    j["readout"] = {
        {"spins",
         {{"omega_p_mhz", c.readout.spins.omega_p_mhz},
          {"omega_db_mhz", c.readout.spins.omega_db_mhz},
          {"omega_n_mhz", c.readout.spins.omega_n_mhz},
          {"hyperfine_a_mhz", c.readout.spins.hyperfine_a_mhz}}},
        {"ramp",
         {{"j_max_mhz", c.readout.ramp.j_max_mhz},
          {"tau_slope_ns", c.readout.ramp.tau_slope_ns},
          {"shape", c.readout.ramp.shape},
          {"hold_ns", c.readout.ramp.hold_ns}}},
        {"rates",
         {{"r_s_per_s", c.readout.rates.r_s_per_s},
          {"r_t_per_s", c.readout.rates.r_t_per_s},
          {"d_per_s", c.readout.rates.d_per_s},
          {"g_per_s", c.readout.rates.g_per_s}}},
        {"tau_life_ns", c.readout.tau_life_ns},
        {"temperature_k", c.readout.temperature_k},
        {"flash",
         {{"photon_energy_ev", c.readout.flash.photon_energy_ev},
          {"power_nw", c.readout.flash.power_nw},
          {"duration_ns", c.readout.flash.duration_ns},
          {"quantum_efficiency", c.readout.flash.quantum_efficiency}}},
        {"classifier",
         {{"k_slow_per_s", c.readout.classifier.k_slow_per_s},
          {"k_trap_per_s", c.readout.classifier.k_trap_per_s},
          {"tau_decay_ns", c.readout.classifier.tau_decay_ns},
          {"threshold", c.readout.classifier.threshold}}},
        {"n_trials", c.readout.n_trials},
        {"stochastic_flash", c.readout.stochastic_flash},
        {"pair_counts", c.readout.pair_counts},
        {"sweep",
         {{"phase_budget", c.readout.sweep.phase_budget},
          {"scheme", c.readout.sweep.scheme},
          {"diagnostics_grid", c.readout.sweep.diagnostics_grid}}}};
    return j.dump(2) + "\n";
}

bool config_equal(const Config& a, const Config& b) {
    return dump_config(a) == dump_config(b);
}

}  // namespace sdr
