#pragma once

#include <vector>

#include "sdr/spin_algebra.hpp"

// Rotating-frame pair Hamiltonians for the pulse experiments and the
// lab-frame three-spin Hamiltonian with gate-controlled exchange for the
// nuclear-spin readout. All coefficients are angular frequencies (rad/s).

namespace sdr {

struct PairParams {
    double detuning_a = 0.0;  // CE electron offset from the microwave frequency
    double detuning_b = 0.0;  // db electron offset
    double exchange_j = 0.0;

    void validate() const;
};

struct DriveParams {
    double rabi_omega1 = 0.0;  // omega_1 = gamma * B1
    double phase_deg = 0.0;

    void validate() const;
    double phase_rad() const;
    // Equal drive with the B1 field reversed (phase + 180, normalized to [0,360)).
    DriveParams reversed() const;
};

struct ReadoutSpinParams {
    double omega_p = 0.0;      // donor electron Zeeman
    double omega_db = 0.0;     // deep-level electron Zeeman
    double omega_n = 0.0;      // 31P nuclear Zeeman (enters as -omega_n * I_z)
    double hyperfine_a = 0.0;  // isotropic A * (S_P . I)

    void validate() const;
};

enum class RampShape { Linear, RaisedCosine };

struct ExchangeRamp {
    double j_max = 0.0;      // rad/s
    double tau_slope = 0.0;  // seconds, > 0
    RampShape shape = RampShape::Linear;
    double hold = 0.0;       // seconds the exchange stays at j_max

    void validate() const;
    double total_duration() const { return tau_slope + hold; }
};

// H = dwa*Sz_a + dwb*Sz_b + w1*[cos(phi)(Sx_a+Sx_b) + sin(phi)(Sy_a+Sy_b)] + J*(Sa.Sb)
// on the 4-dim CE-db pair space.
Operator rotating_pair_hamiltonian(const PairParams& p, const DriveParams& d);

// H = wP*Sz_P + wdb*Sz_db - wn*I_z + A*(S_P.I) + j*(S_P.S_db) on the 8-dim
// donor/deep-level/nucleus space. Commutes with the total z-projection.
Operator readout_hamiltonian(const ReadoutSpinParams& s, double j);

// Monotone non-decreasing exchange value: 0 at t=0, j_max from tau_slope on.
double ramp_value(const ExchangeRamp& r, double t);

// Instantaneous eigensystem along a j-grid with branches followed through
// (avoided) crossings by maximum-overlap continuity.
struct LevelDiagram {
    std::vector<double> j;                    // rad/s, strictly increasing
    Eigen::MatrixXd energy;                   // n_grid x 8, column = branch
    Eigen::MatrixXd singlet_character;        // <v| P_S |v> per branch
    std::vector<Eigen::MatrixXcd> vectors;    // per grid point, column = branch
    std::vector<bool> branch_flagged;         // overlap ambiguity seen on branch

    int num_branches() const { return static_cast<int>(energy.cols()); }
};

LevelDiagram instantaneous_spectrum(const ReadoutSpinParams& s,
                                    const std::vector<double>& j_grid);

// CSV schema: j, E_1..E_8, singlet_character_1..8
void write_level_diagram_csv(const LevelDiagram& d, const std::string& path);

}  // namespace sdr
