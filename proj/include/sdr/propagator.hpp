#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sdr/errors.hpp"
#include "sdr/spin_algebra.hpp"

// Time evolution of pair/triple density matrices under the KSM kinetics:
//
//   drho/dt = -i[H(t), rho] - (r_S/2){P_S, rho} - (r_T/2){P_T, rho}
//             - d*rho + (G/dim)*I
//
// Recombination and dissociation remove pairs from the ensemble, so the
// trace is the surviving-pair fraction; generation refills all product
// states uniformly.

namespace sdr {

struct KsmRates {
    double r_singlet = 0.0;  // 1/s
    double r_triplet = 0.0;  // 1/s, must satisfy r_singlet >= r_triplet
    double dissociation = 0.0;  // 1/s
    double generation = 0.0;    // pairs/s into the ensemble

    void validate() const;
    bool coherent_only() const {
        return r_singlet == 0.0 && r_triplet == 0.0 && dissociation == 0.0;
    }
    double total_decay_scale() const { return r_singlet + r_triplet + dissociation; }
};

struct StepControl {
    // (||H|| + r_S + r_T + d) * h <= phase_budget for time-dependent ramps.
    double phase_budget = 0.05;
    double min_step = 0.0;   // required h below this is a NumericalError
    int samples = 65;        // trajectory samples including both endpoints
    bool self_check = false; // re-run at h/2 and require <= 1e-8 agreement
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Operator> states;

    const Operator& final_state() const { return states.back(); }
    // continues with `next`, dropping its duplicated first sample
    void append(const Trajectory& next);
};

struct Observables {
    std::vector<double> time;
    std::vector<double> trace;
    std::vector<double> pop_singlet;
    std::vector<double> pop_tminus;
    std::vector<double> pop_tzero;
    std::vector<double> pop_tplus;
    std::vector<double> recombination;
};

// Exact propagator for one constant-Hamiltonian segment. The coherent part
// and the anticommutator sinks combine into the non-Hermitian generator
// K = H - i(r_S/2)P_S - i(r_T/2)P_T - i(d/2)I, so that with M = exp(-iKt)
//   rho(t) = M rho0 M^dag + (G/dim) * S(t),  S(t) = int_0^t M(u) M(u)^dag du,
// both evaluated in closed form from the spectral decomposition of K.
class SegmentPropagator {
public:
    SegmentPropagator(const SpinSystem& sys, const Operator& hamiltonian,
                      const KsmRates& rates);

    Operator propagate(const Operator& rho0, double t) const;

private:
    int dim_;
    double generation_per_state_;
    bool hermitian_;

    // hermitian path (rates all zero)
    Eigen::VectorXd h_evals_;
    Eigen::MatrixXcd h_evecs_;

    // spectral path for the non-Hermitian generator
    Eigen::VectorXcd k_evals_;
    Eigen::MatrixXcd k_evecs_;
    Eigen::MatrixXcd k_evecs_inv_;
    Eigen::MatrixXcd gram_;  // V^-1 V^-dag, reused by the source integral

    // fallback: vectorized affine generator, exponentiated by Pade
    bool use_fallback_ = false;
    Eigen::MatrixXcd augmented_;

    Operator propagate_spectral(const Operator& rho0, double t) const;
    Operator propagate_fallback(const Operator& rho0, double t) const;
};

// Constant Hamiltonian over [t0, t1], exact at every sample.
Trajectory evolve(const DensityMatrix& rho0, const SpinSystem& sys, const Operator& h,
                  const KsmRates& rates, double t0, double t1,
                  const StepControl& ctrl = {});

// Smooth time-dependent Hamiltonian, discretized at segment midpoints with
// (||H|| + r_S + r_T + d) * h <= ctrl.phase_budget.
Trajectory evolve(const DensityMatrix& rho0, const SpinSystem& sys,
                  const std::function<Operator(double)>& h_of_t, const KsmRates& rates,
                  double t0, double t1, const StepControl& ctrl = {});

// Solves 0 = -i[H,rho] - (r_S/2){P_S,rho} - (r_T/2){P_T,rho} - d rho + (G/dim) I
// as a linear system. Requires r_S + d > 0, r_T + d > 0, G > 0; the residual
// must come out <= 1e-10 * G.
DensityMatrix steady_state(const SpinSystem& sys, const Operator& h, const KsmRates& rates);

// r_S * Tr(P_S rho) + r_T * Tr(P_T rho)
double recombination_rate(const Operator& rho, const SpinSystem& sys, const KsmRates& rates);
double recombination_rate(const DensityMatrix& rho, const SpinSystem& sys,
                          const KsmRates& rates);

Observables compute_observables(const Trajectory& traj, const SpinSystem& sys,
                                const KsmRates& rates);

// CSV schema: time, trace, pop_S, pop_Tminus, pop_T0, pop_Tplus, recomb_rate
void write_trajectory_csv(const Observables& obs, const std::string& path);

double spectral_norm(const Operator& hermitian);

}  // namespace sdr
