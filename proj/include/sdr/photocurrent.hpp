#pragma once

#include <string>
#include <vector>

#include "sdr/ensemble.hpp"

// Phenomenological mapping from terminal spin-pair densities to real-time
// photocurrent transients: the quench amplitude is a linear functional of
// the pair-population deviations from the steady state, each channel
// relaxing exponentially; the detector is a first-order low-pass.

namespace sdr {

struct TransientModel {
    double coeff_singlet = 0.0;      // A per unit population deviation
    double coeff_triplet = 0.0;
    double tau_singlet_relax = 1.0;  // seconds
    double tau_triplet_relax = 1.0;
    double baseline = 0.0;           // A

    void validate() const;
};

struct DetectorModel {
    double rise_time = 0.0;      // first-order low-pass time constant, seconds
    double sample_jitter = 0.0;  // 0 = ideal sampling

    void validate() const;
};

struct CurrentTrace {
    std::vector<double> times;   // seconds, increasing
    std::vector<double> current; // amperes

    void validate() const;
};

// dI(t) = cS*dnS*exp(-t/tauS) + cT*dnT*exp(-t/tauT), baseline added.
CurrentTrace transient_from_state(double delta_pop_singlet, double delta_pop_triplet,
                                  const TransientModel& m, double horizon, double dt);

// Exact exponential-integrator discretization of the first-order low-pass for
// piecewise-linear input; the detector starts settled at zero deviation.
// rise_time = 0 returns the input unchanged.
CurrentTrace apply_detector(const CurrentTrace& trace, const DetectorModel& d);

// Linear interpolation; t outside the trace span throws std::out_of_range.
double sample_at(const CurrentTrace& trace, double t);

// Sampling-time jitter: draws the instant uniformly in [t - jitter, t + jitter].
double sample_with_jitter(const CurrentTrace& trace, double t, const DetectorModel& d,
                          SplitMix64& rng);

// Location/value of the extremum with the largest |value - baseline|.
struct TraceExtremum {
    double time = 0.0;
    double value = 0.0;
};
TraceExtremum trace_extremum(const CurrentTrace& trace, double baseline = 0.0);

// CSV schema: time_us, current_pA
void write_trace_csv(const CurrentTrace& trace, const std::string& path);

}  // namespace sdr
