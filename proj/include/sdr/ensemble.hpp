#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdr/spin_algebra.hpp"

// Static (quenched) inhomogeneous broadening of Larmor and Rabi frequencies
// across the pair ensemble. Every member carries fixed offsets for the whole
// pulse sequence; averages are accumulated in fixed member order so results
// are bit-identical across runs.

namespace sdr {

enum class BroadeningScheme { GaussHermite, MonteCarlo };

struct BroadeningSpec {
    double sigma_detuning_a = 0.0;  // rad/s
    double sigma_detuning_b = 0.0;  // rad/s
    double sigma_rabi_rel = 0.0;    // relative Gaussian spread of omega_1
    int n_nodes = 1;                // per broadened dimension (GH) or total (MC)
    BroadeningScheme scheme = BroadeningScheme::GaussHermite;
    std::uint64_t seed = 0;

    void validate() const;
};

struct EnsembleMember {
    double detuning_a = 0.0;  // additive offset, rad/s
    double detuning_b = 0.0;
    double rabi_scale = 1.0;  // multiplies omega_1
    double weight = 0.0;
};

// Deterministic member list; Gauss-Hermite tensor grid pruned to weights
// > 1e-12 and renormalized, or seeded Monte Carlo draws with equal weights.
std::vector<EnsembleMember> build_ensemble(const BroadeningSpec& spec);

// Physicists' Gauss-Hermite nodes/weights (weight function exp(-t^2)),
// via the Golub-Welsch tridiagonal eigenproblem.
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Weighted average of per-member series, fixed accumulation order. All
// members must share the same grid length.
std::vector<double> ensemble_average(const std::vector<EnsembleMember>& members,
                                     const std::vector<std::vector<double>>& series);

Eigen::MatrixXcd ensemble_average_states(const std::vector<EnsembleMember>& members,
                                         const std::vector<Eigen::MatrixXcd>& states);

void write_members_csv(const std::vector<EnsembleMember>& members, const std::string& path);

// SplitMix64: small counter-based generator used wherever reproducibility
// across platforms and thread counts matters.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next();
    double uniform01();          // in [0, 1)
    double uniform_open01();     // in (0, 1]
    double normal();             // Box-Muller, one value per call
    double exponential(double rate);

    // stream derived from (seed, tags...) so trial order never matters
    static SplitMix64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                             std::uint64_t c = 0);

private:
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace sdr
