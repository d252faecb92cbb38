#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sdr/ensemble.hpp"
#include "sdr/hamiltonians.hpp"
#include "sdr/propagator.hpp"

// Pulse programs and the pulsed experiments: Rabi nutation scans and the
// phase-reversal recombination-echo scan. Drive is always applied to both
// spins; db-selective excitation emerges from the CE detuning.

namespace sdr {

struct PulseSegment {
    double duration = 0.0;     // seconds
    double rabi_omega1 = 0.0;  // rad/s
    double phase_deg = 0.0;
    std::string label;

    void validate() const;
};

struct PulseSequence {
    std::vector<PulseSegment> segments;

    double total_duration() const;
    void validate() const;  // runnable sequences need total duration > 0
};

// Initial state of a pulse experiment: the triplet-rich steady state of each
// ensemble member, a pure |T-> shortcut for clean theory checks, or an
// explicit state shared by all members.
struct InitialState {
    enum class Kind { MemberSteadyState, TripletMinus, Explicit };
    Kind kind = Kind::MemberSteadyState;
    std::optional<DensityMatrix> rho;

    static InitialState member_steady_state() { return {Kind::MemberSteadyState, {}}; }
    static InitialState triplet_minus() { return {Kind::TripletMinus, {}}; }
    static InitialState explicit_state(DensityMatrix r) {
        return {Kind::Explicit, std::move(r)};
    }
};

struct ScanResult {
    std::string abscissa_name;       // e.g. "total_ns" or "pulse_ns"
    std::vector<double> abscissa_ns;
    std::vector<double> pop_tminus;  // terminal |T-> population
    std::vector<double> pop_singlet; // terminal singlet content
    std::vector<double> q_excess;    // integrated excess recombination vs t=0 rate
};

enum class EchoScanAxis { TotalLength, SecondSegment };

struct SequenceOptions {
    InitialState initial = InitialState::member_steady_state();
    int samples_per_segment = 17;  // trajectory resolution (and Q quadrature)
};

// Runs `seq` member by member (member detunings added to the pair centers,
// member rabi_scale multiplying each segment's omega_1) and returns the
// weighted-average trajectory on the common time grid.
Trajectory run_sequence(const InitialState& initial, const PulseSequence& seq,
                        const PairParams& pair, const KsmRates& rates,
                        const BroadeningSpec& ens, int samples_per_segment = 17);

// [pulse(tau_180, phase)], then [pulse(s, phase+180)]; the grid is the total
// length by default (points below tau_180 are a single truncated pulse).
ScanResult echo_scan(double tau_180, const std::vector<double>& grid_s,
                     const PairParams& pair, const KsmRates& rates,
                     const BroadeningSpec& ens, const DriveParams& drive,
                     EchoScanAxis axis = EchoScanAxis::TotalLength,
                     const SequenceOptions& opts = {});

// Terminal singlet content vs single-pulse duration.
ScanResult rabi_scan(const std::vector<double>& duration_grid_s, const PairParams& pair,
                     const KsmRates& rates, const BroadeningSpec& ens,
                     const DriveParams& drive, const SequenceOptions& opts = {});

// Echo feature shape on a ScanResult: peak near the expected echo position,
// half-depth width measured against the flanking minima.
struct EchoFeature {
    double peak_ns = 0.0;
    double peak_value = 0.0;
    double width_ns = 0.0;  // full width at half depth
};

EchoFeature measure_echo_feature(const ScanResult& scan, double expected_peak_ns);

void write_scan_csv(const ScanResult& scan, const std::string& path);

}  // namespace sdr
