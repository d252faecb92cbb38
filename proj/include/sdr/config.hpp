#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdr/ensemble.hpp"
#include "sdr/errors.hpp"
#include "sdr/hamiltonians.hpp"
#include "sdr/photocurrent.hpp"
#include "sdr/propagator.hpp"
#include "sdr/readout.hpp"
#include "sdr/sequences.hpp"

// JSON configuration for all experiments. Frequencies are given in MHz and
// times in ns in the file and converted to rad/s and seconds internally.
// Unknown keys are rejected; every invariant is checked at parse time with
// the offending field path in the message.

namespace sdr {

struct RunConfig {
    std::uint64_t seed = 424242;
    std::string output_dir = "out";
};

struct PairConfig {
    double detuning_a_mhz = 30.0;  // CE offset from the db-resonant drive
    double detuning_b_mhz = 0.0;
    double exchange_j_mhz = 0.0;
};

struct DriveConfig {
    double rabi_mhz = 10.0;
    double phase_deg = 0.0;
};

struct RatesConfig {
    double r_s_per_s = 1e7;
    double r_t_per_s = 1e3;
    double d_per_s = 1e4;
    double g_per_s = 1e4;
};

struct BroadeningConfig {
    double sigma_detuning_a_mhz = 0.0;
    double sigma_detuning_b_mhz = 3.0;
    double sigma_rabi_rel = 0.2;
    int n_nodes = 21;
    std::string scheme = "gauss-hermite";  // or "monte-carlo"
    std::uint64_t seed = 12345;
};

struct EchoConfig {
    double tau_180_ns = 100.0;
    double start_ns = 0.0;
    double stop_ns = 400.0;
    double step_ns = 2.5;
    std::string axis = "total";     // or "second"
    std::string initial = "steady"; // or "tminus"
    int samples_per_segment = 17;
};

struct RabiScanConfig {
    double start_ns = 0.0;
    double stop_ns = 400.0;
    double step_ns = 2.0;
    std::string initial = "steady";
    int samples_per_segment = 17;
};

struct TransientConfig {
    double coeff_singlet_pa = -40.0;
    double coeff_triplet_pa = 5.0;
    double tau_singlet_relax_ns = 100000.0;
    double tau_triplet_relax_ns = 400000.0;
    double baseline_pa = 0.0;
    double horizon_ns = 100000.0;
    double dt_ns = 50.0;
    double sample_time_ns = 19500.0;
};

struct DetectorConfig {
    double rise_time_ns = 6800.0;
    double sample_jitter_ns = 0.0;
};

struct LevelsConfig {
    double j_start_mhz = 0.0;
    double j_stop_mhz = 12000.0;
    int n_points = 801;
};

struct ReadoutSpinsConfig {
    double omega_p_mhz = 9715.0;
    double omega_db_mhz = 9685.0;
    double omega_n_mhz = 60.0;
    double hyperfine_a_mhz = 117.0;
};

struct RampConfig {
    double j_max_mhz = 12000.0;
    double tau_slope_ns = 5000.0;
    std::string shape = "linear";  // or "raised-cosine"
    double hold_ns = 1000.0;
};

struct ClassifierConfig {
    double k_slow_per_s = 1e4;
    double k_trap_per_s = 2e6;
    double tau_decay_ns = 2000.0;
    double threshold = 0.0;  // 0 = auto-calibrate to the geometric mean
};

struct SweepConfig {
    double phase_budget = 0.2;
    std::string scheme = "cf4";  // or "midpoint"
    int diagnostics_grid = 2048;
};

// flash keeps paper-style units: eV, nW, ns
struct FlashConfig {
    double photon_energy_ev = 2.0;
    double power_nw = 3.2;
    double duration_ns = 1.0;
    double quantum_efficiency = 1.0;
};

struct ReadoutSectionConfig {
    ReadoutSpinsConfig spins;
    RampConfig ramp;
    RatesConfig rates{5e6, 0.0, 0.0, 0.0};
    double tau_life_ns = 1000.0;
    double temperature_k = 0.1;
    FlashConfig flash;
    ClassifierConfig classifier;
    int n_trials = 10000;
    bool stochastic_flash = true;
    std::vector<long long> pair_counts{5, 10, 20, 50};
    SweepConfig sweep;
};

struct Config {
    RunConfig run;
    PairConfig pair;
    DriveConfig drive;
    RatesConfig rates;
    BroadeningConfig broadening;
    EchoConfig echo;
    RabiScanConfig rabi;
    TransientConfig transient;
    DetectorConfig detector;
    LevelsConfig levels;
    ReadoutSectionConfig readout;

    // converted views (rad/s, seconds)
    PairParams pair_params() const;
    DriveParams drive_params() const;
    KsmRates ksm_rates() const;
    BroadeningSpec broadening_spec() const;
    TransientModel transient_model() const;
    DetectorModel detector_model() const;
    ReadoutParams readout_params() const;
    std::vector<double> echo_grid_s() const;
    std::vector<double> rabi_grid_s() const;
    std::vector<double> levels_grid_rad_s() const;
    InitialState echo_initial() const;
    InitialState rabi_initial() const;
    EchoScanAxis echo_axis() const;
};

// Parses and fully validates; defaults fill absent fields. Throws ConfigError
// naming the offending key path and the violated bound.
Config parse_config(const std::string& text);

// Canonical JSON echo of the resolved configuration; parse(dump(parse(x)))
// gives a configuration identical to parse(x).
std::string dump_config(const Config& c);

bool config_equal(const Config& a, const Config& b);

}  // namespace sdr
