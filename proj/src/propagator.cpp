#include "sdr/propagator.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace sdr {

namespace {

// phi(mu, t) = int_0^t exp(-i mu u) du, stable for decaying complex mu
complex phi_integral(complex mu, double t) {
    const complex imu = complex(0.0, 1.0) * mu;
    if (std::abs(mu) * t < 1e-6) {
        const complex x = imu * t;
        return t * (1.0 - x / 2.0 + x * x / 6.0);
    }
    return (1.0 - std::exp(-imu * t)) / imu;
}

Eigen::MatrixXcd vectorized_affine_generator(const Operator& h, const KsmRates& rates,
                                             const PairProjectors& proj) {
    const int n = static_cast<int>(h.rows());
    const int n2 = n * n;
    const Operator id = Operator::Identity(n, n);
    const Operator p_t = proj.triplet();
    auto left = [&](const Operator& a) { return kron(id, a); };
    auto right = [&](const Operator& a) { return kron(a.transpose(), id); };

    Eigen::MatrixXcd gen = complex(0.0, -1.0) * (left(h) - right(h));
    gen -= 0.5 * rates.r_singlet * (left(proj.singlet) + right(proj.singlet));
    gen -= 0.5 * rates.r_triplet * (left(p_t) + right(p_t));
    gen -= rates.dissociation * Eigen::MatrixXcd::Identity(n2, n2);

    Eigen::MatrixXcd aug = Eigen::MatrixXcd::Zero(n2 + 1, n2 + 1);
    aug.topLeftCorner(n2, n2) = gen;
    Eigen::VectorXcd source(n2);
    source.setZero();
    const double g = rates.generation / n;
    for (int i = 0; i < n; ++i) source(i * n + i) = g;
    aug.topRightCorner(n2, 1) = source;
    return aug;
}

}  // namespace

void KsmRates::validate() const {
    if (r_singlet < 0.0 || r_triplet < 0.0 || dissociation < 0.0 || generation < 0.0)
        throw std::invalid_argument("rates: all kinetic constants must be >= 0");
    if (r_singlet < r_triplet)
        throw std::invalid_argument("rates: r_singlet must be >= r_triplet");
}

double spectral_norm(const Operator& hermitian) {
    Eigen::SelfAdjointEigenSolver<Operator> es(hermitian, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

SegmentPropagator::SegmentPropagator(const SpinSystem& sys, const Operator& hamiltonian,
                                     const KsmRates& rates) {
    rates.validate();
    dim_ = sys.dim();
    if (hamiltonian.rows() != dim_ || hamiltonian.cols() != dim_)
        throw std::invalid_argument("SegmentPropagator: Hamiltonian dimension mismatch");
    generation_per_state_ = rates.generation / dim_;
    hermitian_ = rates.coherent_only();

    if (hermitian_) {
        Eigen::SelfAdjointEigenSolver<Operator> es(hamiltonian);
        h_evals_ = es.eigenvalues();
        h_evecs_ = es.eigenvectors();
        return;
    }

    const PairProjectors proj = electron_pair_projectors(sys);
    Operator k = hamiltonian;
    k -= complex(0.0, 0.5 * rates.r_singlet) * proj.singlet;
    k -= complex(0.0, 0.5 * rates.r_triplet) * proj.triplet();
    k -= complex(0.0, 0.5 * rates.dissociation) * Operator::Identity(dim_, dim_);

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(k);
    k_evals_ = es.eigenvalues();
    k_evecs_ = es.eigenvectors();
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(k_evecs_);
    k_evecs_inv_ = lu.solve(Eigen::MatrixXcd::Identity(dim_, dim_));

    const Eigen::MatrixXcd recon = k_evecs_ * k_evals_.asDiagonal() * k_evecs_inv_;
    const double scale = std::max(1.0, max_abs(k));
    if (max_abs(Operator(recon - k)) > 1e-9 * scale) {
        // defective or badly conditioned eigenbasis; fall back to exponentiating
        // the vectorized affine generator
        use_fallback_ = true;
        augmented_ = vectorized_affine_generator(hamiltonian, rates, proj);
        return;
    }
    gram_ = k_evecs_inv_ * k_evecs_inv_.adjoint();
}

Operator SegmentPropagator::propagate(const Operator& rho0, double t) const {
    if (t < 0.0) throw std::invalid_argument("SegmentPropagator: negative time");
    if (t == 0.0) return rho0;
    if (hermitian_) {
        Eigen::VectorXcd phases(dim_);
        for (int i = 0; i < dim_; ++i)
            phases(i) = std::exp(complex(0.0, -h_evals_(i) * t));
        const Eigen::MatrixXcd m = h_evecs_ * phases.asDiagonal() * h_evecs_.adjoint();
        Operator rho = m * rho0 * m.adjoint();
        if (generation_per_state_ != 0.0)
            rho += generation_per_state_ * t * Operator::Identity(dim_, dim_);
        return rho;
    }
    if (use_fallback_) return propagate_fallback(rho0, t);
    return propagate_spectral(rho0, t);
}

Operator SegmentPropagator::propagate_spectral(const Operator& rho0, double t) const {
    Eigen::VectorXcd decay(dim_);
    for (int i = 0; i < dim_; ++i)
        decay(i) = std::exp(complex(0.0, -1.0) * k_evals_(i) * t);
    const Eigen::MatrixXcd m = k_evecs_ * decay.asDiagonal() * k_evecs_inv_;
    Operator rho = m * rho0 * m.adjoint();

    if (generation_per_state_ != 0.0) {
        Eigen::MatrixXcd core(dim_, dim_);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j)
                core(i, j) = gram_(i, j) * phi_integral(k_evals_(i) - std::conj(k_evals_(j)), t);
        rho += generation_per_state_ * (k_evecs_ * core * k_evecs_.adjoint());
    }
    // the generator preserves Hermiticity exactly; strip rounding residue
    return 0.5 * (rho + Operator(rho.adjoint()));
}

Operator SegmentPropagator::propagate_fallback(const Operator& rho0, double t) const {
    const int n2 = dim_ * dim_;
    Eigen::VectorXcd v(n2 + 1);
    for (int col = 0; col < dim_; ++col)
        v.segment(col * dim_, dim_) = rho0.col(col);
    v(n2) = 1.0;
    const Eigen::MatrixXcd expm = (augmented_ * t).exp();
    const Eigen::VectorXcd w = expm * v;
    Operator rho(dim_, dim_);
    for (int col = 0; col < dim_; ++col) rho.col(col) = w.segment(col * dim_, dim_);
    return 0.5 * (rho + Operator(rho.adjoint()));
}

void Trajectory::append(const Trajectory& next) {
    if (times.empty()) {
        *this = next;
        return;
    }
    for (size_t i = 1; i < next.times.size(); ++i) {
        times.push_back(next.times[i]);
        states.push_back(next.states[i]);
    }
}

Trajectory evolve(const DensityMatrix& rho0, const SpinSystem& sys, const Operator& h,
                  const KsmRates& rates, double t0, double t1, const StepControl& ctrl) {
    if (!(t1 > t0)) throw std::invalid_argument("evolve: need t1 > t0");
    const SegmentPropagator prop(sys, h, rates);
    const int n = std::max(2, ctrl.samples);
    Trajectory traj;
    traj.times.reserve(n);
    traj.states.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double t = t0 + (t1 - t0) * k / (n - 1);
        traj.times.push_back(t);
        traj.states.push_back(prop.propagate(rho0.matrix(), t - t0));
    }
    return traj;
}

namespace {

Trajectory evolve_midpoint(const Operator& rho0, const SpinSystem& sys,
                           const std::function<Operator(double)>& h_of_t,
                           const KsmRates& rates, double t0, double t1, double h_max,
                           int samples) {
    const int n = std::max(2, samples);
    Trajectory traj;
    traj.times.reserve(n);
    traj.states.reserve(n);
    traj.times.push_back(t0);
    traj.states.push_back(rho0);

    Operator rho = rho0;
    for (int k = 1; k < n; ++k) {
        const double a = t0 + (t1 - t0) * (k - 1) / (n - 1);
        const double b = t0 + (t1 - t0) * k / (n - 1);
        const int substeps = std::max(1, static_cast<int>(std::ceil((b - a) / h_max)));
        const double h = (b - a) / substeps;
        for (int s = 0; s < substeps; ++s) {
            const double mid = a + (s + 0.5) * h;
            SegmentPropagator prop(sys, h_of_t(mid), rates);
            rho = prop.propagate(rho, h);
        }
        traj.times.push_back(b);
        traj.states.push_back(rho);
    }
    return traj;
}

}  // namespace

Trajectory evolve(const DensityMatrix& rho0, const SpinSystem& sys,
                  const std::function<Operator(double)>& h_of_t, const KsmRates& rates,
                  double t0, double t1, const StepControl& ctrl) {
    if (!(t1 > t0)) throw std::invalid_argument("evolve: need t1 > t0");
    rates.validate();

    // conservative norm bound from sampling the schedule
    double norm = 0.0;
    const int probes = 33;
    for (int k = 0; k < probes; ++k) {
        const double t = t0 + (t1 - t0) * k / (probes - 1);
        norm = std::max(norm, spectral_norm(h_of_t(t)));
    }
    const double scale = norm + rates.total_decay_scale();
    const double h_max = (scale > 0.0) ? ctrl.phase_budget / scale : (t1 - t0);
    if (h_max < ctrl.min_step)
        throw NumericalError("evolve: required step " + std::to_string(h_max) +
                                 " s below minimum " + std::to_string(ctrl.min_step) + " s",
                             t0);

    Trajectory traj =
        evolve_midpoint(rho0.matrix(), sys, h_of_t, rates, t0, t1, h_max, ctrl.samples);
    if (ctrl.self_check) {
        Trajectory fine =
            evolve_midpoint(rho0.matrix(), sys, h_of_t, rates, t0, t1, 0.5 * h_max, ctrl.samples);
        const double diff = max_abs(Operator(traj.final_state() - fine.final_state()));
        if (diff > 1e-8)
            throw NumericalError("evolve: step-halving self-check failed, change " +
                                     std::to_string(diff),
                                 t1);
        return fine;
    }
    return traj;
}

DensityMatrix steady_state(const SpinSystem& sys, const Operator& h, const KsmRates& rates) {
    rates.validate();
    if (!(rates.r_singlet + rates.dissociation > 0.0) ||
        !(rates.r_triplet + rates.dissociation > 0.0))
        throw std::invalid_argument(
            "steady_state: need r_singlet + d > 0 and r_triplet + d > 0");
    if (!(rates.generation > 0.0))
        throw std::invalid_argument("steady_state: need generation > 0");

    const PairProjectors proj = electron_pair_projectors(sys);
    const Eigen::MatrixXcd aug = vectorized_affine_generator(h, rates, proj);
    const int n = sys.dim();
    const int n2 = n * n;
    const Eigen::MatrixXcd gen = aug.topLeftCorner(n2, n2);
    const Eigen::VectorXcd source = aug.topRightCorner(n2, 1);

    Eigen::FullPivLU<Eigen::MatrixXcd> lu(gen);
    if (!lu.isInvertible())
        throw NumericalError("steady_state: singular generator");
    const Eigen::VectorXcd x = lu.solve(-source);
    const double residual = (gen * x + source).norm();
    if (!(residual <= 1e-10 * rates.generation))
        throw NumericalError("steady_state: residual " + std::to_string(residual) +
                             " exceeds 1e-10 * G");

    Operator rho(n, n);
    for (int col = 0; col < n; ++col) rho.col(col) = x.segment(col * n, n);
    rho = 0.5 * (rho + Operator(rho.adjoint()));
    return DensityMatrix(rho);
}

double recombination_rate(const Operator& rho, const SpinSystem& sys, const KsmRates& rates) {
    const PairProjectors proj = electron_pair_projectors(sys);
    return rates.r_singlet * (proj.singlet * rho).trace().real() +
           rates.r_triplet * (proj.triplet() * rho).trace().real();
}

double recombination_rate(const DensityMatrix& rho, const SpinSystem& sys,
                          const KsmRates& rates) {
    return recombination_rate(rho.matrix(), sys, rates);
}

Observables compute_observables(const Trajectory& traj, const SpinSystem& sys,
                                const KsmRates& rates) {
    const PairProjectors proj = electron_pair_projectors(sys);
    Observables obs;
    const size_t n = traj.times.size();
    obs.time = traj.times;
    obs.trace.reserve(n);
    obs.pop_singlet.reserve(n);
    obs.pop_tminus.reserve(n);
    obs.pop_tzero.reserve(n);
    obs.pop_tplus.reserve(n);
    obs.recombination.reserve(n);
    for (const Operator& rho : traj.states) {
        obs.trace.push_back(rho.trace().real());
        obs.pop_singlet.push_back((proj.singlet * rho).trace().real());
        obs.pop_tminus.push_back((proj.triplet_minus * rho).trace().real());
        obs.pop_tzero.push_back((proj.triplet_zero * rho).trace().real());
        obs.pop_tplus.push_back((proj.triplet_plus * rho).trace().real());
        obs.recombination.push_back(rates.r_singlet * obs.pop_singlet.back() +
                                    rates.r_triplet * (obs.pop_tplus.back() +
                                                       obs.pop_tzero.back() +
                                                       obs.pop_tminus.back()));
    }
    return obs;
}

void write_trajectory_csv(const Observables& obs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "time,trace,pop_S,pop_Tminus,pop_T0,pop_Tplus,recomb_rate\n";
    char buf[32];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf;
    };
    for (size_t k = 0; k < obs.time.size(); ++k) {
        emit(obs.time[k]);
        out << ",";
        emit(obs.trace[k]);
        out << ",";
        emit(obs.pop_singlet[k]);
        out << ",";
        emit(obs.pop_tminus[k]);
        out << ",";
        emit(obs.pop_tzero[k]);
        out << ",";
        emit(obs.pop_tplus[k]);
        out << ",";
        emit(obs.recombination[k]);
        out << "\n";
    }
}

}  // namespace sdr
