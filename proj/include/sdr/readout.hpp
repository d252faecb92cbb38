#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdr/ensemble.hpp"
#include "sdr/hamiltonians.hpp"
#include "sdr/propagator.hpp"

// The nuclear-spin readout pipeline: thermal initialization, adiabatic
// exchange ramp conditioned on the 31P nuclear spin, recombination window,
// laser flash, photoconductivity decay and bit classification.
//
// Bit convention: "1" <=> charged <=> the nuclear orientation that opens the
// singlet transition; with -omega_n*I_z that is nucleus "up".

namespace sdr {

enum class NuclearBit { Up, Down };

struct FlashParams {
    double photon_energy_ev = 2.0;
    double power_w = 3.2e-9;
    double duration = 1e-9;  // seconds
    double quantum_efficiency = 1.0;

    void validate() const;
};

struct ClassifierParams {
    double k_slow = 0.0;     // band-band recombination, neutral case (1/s)
    double k_trap = 0.0;     // extra trapping rate with a charged P+/db- pair (1/s)
    double tau_decay = 0.0;  // evaluation delay (s)
    double threshold = 0.5;  // fraction of initial conductivity

    void validate() const;
};

struct SweepScheme {
    enum class Kind { CommutatorFree4, Midpoint };
    Kind kind = Kind::CommutatorFree4;
};

struct SweepControl {
    // (||H|| bound) * h <= phase_budget per exchange-ramp step
    double phase_budget = 0.2;
    double min_step = 0.0;
    SweepScheme scheme;
    bool self_check = false;  // re-run at h/2, require <= 1e-8 agreement
    int diagnostics_grid = 1024;
};

struct ReadoutParams {
    ReadoutSpinParams spins;
    ExchangeRamp ramp;
    KsmRates rates;           // readout mode: d = 0, G = 0, r_triplet ~ 0
    double tau_life = 0.0;    // recombination window (s)
    double temperature = 0.1; // kelvin
    FlashParams flash;
    ClassifierParams classifier;
    bool stochastic_flash = true;
    SweepControl sweep;

    void validate() const;
};

// Electron pair in the Boltzmann state of the uncoupled Zeeman Hamiltonian,
// nucleus set to the requested pure state.
DensityMatrix thermal_initial_state(const ReadoutSpinParams& spins, double temperature,
                                    NuclearBit bit);

struct SweepDiagnostics {
    // minimum instantaneous gap between the occupied branch and the other
    // levels of its total-m block (infinite for a one-dimensional block)
    double min_gap = 0.0;
    double t_min_gap = 0.0;
    // asymptotic slope |d(dE)/dt| of the branch energy difference at the
    // crossing (the Landau-Zener sweep rate v); 0 when no crossing exists
    double crossing_rate = 0.0;
    double final_singlet_content = 0.0;
    // population remaining on the adiabatic continuation of the initial branch
    double follow_probability = 0.0;
    int occupied_block = -1;
};

struct SweepResult {
    DensityMatrix state;
    SweepDiagnostics diag;
};

// Unitary evolution under readout_hamiltonian(spins, ramp_value(t)) over
// [0, tau_slope + hold]. Total-m conservation splits the evolution into
// {1,3,3,1} blocks which are accumulated independently.
SweepResult adiabatic_sweep(const DensityMatrix& rho0, const ReadoutSpinParams& spins,
                            const ExchangeRamp& ramp, const SweepControl& ctrl = {});

// Evolves under H(j_hold) with the KSM sink (G = 0, d = 0 enforced) and
// returns the recombined fraction p_charged = 1 - trace(rho(tau_life)).
double recombination_window(const DensityMatrix& rho, const KsmRates& rates,
                            double tau_life, const ReadoutSpinParams& spins, double j_hold);

// round(power * duration * QE / photon_energy)
long long photon_budget(const FlashParams& f);

struct DecayTrace {
    std::vector<double> times;  // seconds
    std::vector<double> sigma;  // conductivity normalized to sigma(0) = 1
};

// Normalized photoconductivity after the flash. Deterministic mode:
// sigma(t) = exp(-(k_slow + charged*k_trap) t). Stochastic mode draws one
// exponential lifetime per carrier pair and returns the surviving fraction.
DecayTrace flash_decay(bool charged, long long n_pairs, const ClassifierParams& c,
                       double horizon, bool stochastic = false, SplitMix64* rng = nullptr);

// 1 when sigma(tau_decay)/sigma(0) < threshold, else 0.
int classify_readout(const DecayTrace& trace, const ClassifierParams& c);

// Geometric mean of the two deterministic decay values at tau_decay; the
// maximally separated decision boundary.
double calibrated_threshold(const ClassifierParams& c);

struct ReadoutStages {
    DensityMatrix initial;
    DensityMatrix after_sweep;
    SweepDiagnostics sweep;
    double p_charged = 0.0;
    long long n_pairs = 0;
};

// The deterministic part of the pipeline for one nuclear bit.
ReadoutStages run_readout_stages(const ReadoutParams& p, NuclearBit bit);

struct FidelityResult {
    double p_read1_given_up = 0.0;
    double p_read1_given_down = 0.0;
    double contrast = 0.0;
};

// Full-pipeline Monte Carlo over both nuclear bits; counter-based seeding so
// results do not depend on evaluation order.
FidelityResult readout_fidelity(const ReadoutParams& p, int n_trials, std::uint64_t seed);

// Fidelity versus flash pair count, reusing the deterministic stages and
// nested per-carrier draws (common random numbers across counts).
std::vector<std::pair<long long, FidelityResult>> readout_fidelity_vs_pairs(
    const ReadoutParams& p, const std::vector<long long>& pair_counts, int n_trials,
    std::uint64_t seed);

void write_decay_trace_csv(const DecayTrace& trace, const std::string& path);

namespace detail {
// exp(-i m t) for Hermitian 3x3 m: closed-form eigenvalues plus Newton
// divided differences, stable through near-degeneracies.
Eigen::Matrix3cd unitary_exp3(const Eigen::Matrix3cd& m, double t);
}  // namespace detail

}  // namespace sdr
