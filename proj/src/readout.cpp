#include "sdr/readout.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sdr {

namespace {

constexpr double kHbar = 1.054571817e-34;  // J s
constexpr double kBoltzmann = 1.380649e-23;  // J/K
constexpr double kElectronVolt = 1.602176634e-19;  // J

// total-m blocks of the product basis (site order P, db, nucleus):
// m = 3/2: {0}; m = 1/2: {1,2,4}; m = -1/2: {3,5,6}; m = -3/2: {7}
constexpr int kNumBlocks = 4;
const std::vector<std::vector<int>> kBlockIndex = {{0}, {1, 2, 4}, {3, 5, 6}, {7}};

Eigen::MatrixXcd extract_block(const Operator& op, int block) {
    const auto& idx = kBlockIndex[block];
    const int n = static_cast<int>(idx.size());
    Eigen::MatrixXcd b(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) b(r, c) = op(idx[r], idx[c]);
    return b;
}

}  // namespace

namespace detail {

Eigen::Matrix3cd unitary_exp3(const Eigen::Matrix3cd& m, double t) {
    using Eigen::Matrix3cd;
    const complex minus_i(0.0, -1.0);

    const double q = m.trace().real() / 3.0;
    Matrix3cd b = m;
    b(0, 0) -= q;
    b(1, 1) -= q;
    b(2, 2) -= q;
    const double p2 = b.squaredNorm();  // sum of |entries|^2 = sum of lambda^2
    if (p2 <= 0.0 || std::sqrt(p2) * std::abs(t) < 1e-14)
        return std::polar(1.0, -q * t) *
               (Matrix3cd::Identity() + minus_i * t * b - 0.5 * t * t * b * b);

    const double p = std::sqrt(p2 / 6.0);
    // real determinant of the traceless Hermitian part
    const complex detb = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) -
                         b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
                         b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    double r = detb.real() / (2.0 * p * p * p);
    r = std::max(-1.0, std::min(1.0, r));
    const double phi = std::acos(r) / 3.0;
    const double l1 = q + 2.0 * p * std::cos(phi);
    const double l3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
    const double l2 = 3.0 * q - l1 - l3;

    auto f = [&](double lam) { return std::polar(1.0, -lam * t); };
    auto divided = [&](double a2, double b2) {
        // (f(a) - f(b)) / (a - b), exact sinc form
        const double x = 0.5 * (a2 - b2) * t;
        const double sinc = (std::abs(x) < 1e-8) ? 1.0 - x * x / 6.0 : std::sin(x) / x;
        return minus_i * t * std::polar(1.0, -0.5 * (a2 + b2) * t) * sinc;
    };

    const complex d1 = f(l1);
    const complex d12 = divided(l1, l2);
    const complex d23 = divided(l2, l3);
    complex d123;
    if (std::abs((l1 - l3) * t) > 1e-4) {
        d123 = (d12 - d23) / (l1 - l3);
    } else {
        const double mean = (l1 + l2 + l3) / 3.0;
        d123 = -0.5 * t * t * std::polar(1.0, -mean * t);
    }

    Matrix3cd m1 = m;
    m1(0, 0) -= l1;
    m1(1, 1) -= l1;
    m1(2, 2) -= l1;
    Matrix3cd m2 = m;
    m2(0, 0) -= l2;
    m2(1, 1) -= l2;
    m2(2, 2) -= l2;
    return d1 * Matrix3cd::Identity() + d12 * m1 + d123 * (m1 * m2);
}

}  // namespace detail

void FlashParams::validate() const {
    if (photon_energy_ev <= 0.0) throw std::invalid_argument("flash.photon_energy must be > 0");
    if (power_w < 0.0 || duration < 0.0)
        throw std::invalid_argument("flash: power and duration must be >= 0");
    if (quantum_efficiency < 0.0 || quantum_efficiency > 1.0)
        throw std::invalid_argument("flash.quantum_efficiency must be in [0, 1]");
}

void ClassifierParams::validate() const {
    if (!(k_trap > 0.0)) throw std::invalid_argument("classifier.k_trap must be > 0");
    if (k_slow < 0.0) throw std::invalid_argument("classifier.k_slow must be >= 0");
    if (!(tau_decay > 0.0)) throw std::invalid_argument("classifier.tau_decay must be > 0");
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("classifier.threshold must be in (0, 1)");
}

void ReadoutParams::validate() const {
    spins.validate();
    ramp.validate();
    rates.validate();
    if (rates.dissociation != 0.0)
        throw std::invalid_argument(
            "readout.rates.d must be 0: dissociation would conflate escape with readout");
    if (rates.generation != 0.0)
        throw std::invalid_argument("readout.rates.g must be 0 during the readout window");
    if (!(tau_life > 0.0)) throw std::invalid_argument("readout.tau_life must be > 0");
    if (!(temperature > 0.0)) throw std::invalid_argument("readout.temperature must be > 0");
    flash.validate();
    classifier.validate();
}

DensityMatrix thermal_initial_state(const ReadoutSpinParams& spins, double temperature,
                                    NuclearBit bit) {
    spins.validate();
    if (!(temperature > 0.0))
        throw std::invalid_argument("thermal_initial_state: temperature must be > 0");

    // electron Zeeman energies of the four product states, hbar omitted in
    // rad/s and restored in the Boltzmann factor
    double energy[2][2];
    double e_min = std::numeric_limits<double>::infinity();
    for (int sp = 0; sp < 2; ++sp)
        for (int sdb = 0; sdb < 2; ++sdb) {
            const double e = (sp == 0 ? 0.5 : -0.5) * spins.omega_p +
                             (sdb == 0 ? 0.5 : -0.5) * spins.omega_db;
            energy[sp][sdb] = e;
            e_min = std::min(e_min, e);
        }

    const double beta = kHbar / (kBoltzmann * temperature);
    double z = 0.0;
    double pop[2][2];
    for (int sp = 0; sp < 2; ++sp)
        for (int sdb = 0; sdb < 2; ++sdb) {
            pop[sp][sdb] = std::exp(-beta * (energy[sp][sdb] - e_min));
            z += pop[sp][sdb];
        }

    const int nb = (bit == NuclearBit::Up) ? 0 : 1;
    Operator rho = Operator::Zero(8, 8);
    for (int sp = 0; sp < 2; ++sp)
        for (int sdb = 0; sdb < 2; ++sdb)
            rho(4 * sp + 2 * sdb + nb, 4 * sp + 2 * sdb + nb) = pop[sp][sdb] / z;
    return DensityMatrix(rho);
}

namespace {

struct TrackedBranch {
    double min_gap = std::numeric_limits<double>::infinity();
    double t_min = 0.0;
    double crossing_rate = 0.0;
    Eigen::VectorXcd end_vec;  // block coordinates at the end of the ramp
};

// follows the occupied branch of one total-m block along the ramp and
// measures the in-block gap structure
TrackedBranch track_occupied_branch(const Eigen::MatrixXcd& h0_block,
                                    const Eigen::MatrixXcd& x_block,
                                    const ExchangeRamp& ramp,
                                    const Eigen::VectorXcd& start_vec, int grid_points) {
    const int bs = static_cast<int>(h0_block.rows());
    TrackedBranch out;
    if (bs == 1) {
        out.end_vec = Eigen::VectorXcd::Ones(1);
        return out;  // nothing to cross inside a one-dimensional block
    }

    struct Snapshot {
        Eigen::VectorXd evals;
        Eigen::MatrixXcd evecs;
        int branch;
    };
    auto eig_at = [&](double t, const Eigen::VectorXcd& ref) {
        const double j = ramp_value(ramp, std::min(t, ramp.tau_slope));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h0_block + j * x_block);
        Snapshot s;
        s.evals = es.eigenvalues();
        s.evecs = es.eigenvectors();
        int best = 0;
        double best_ov = -1.0;
        for (int i = 0; i < bs; ++i) {
            const double ov = std::abs(ref.dot(s.evecs.col(i)));
            if (ov > best_ov) {
                best_ov = ov;
                best = i;
            }
        }
        s.branch = best;
        return s;
    };
    auto gap_of = [&](const Snapshot& s) {
        double g = std::numeric_limits<double>::infinity();
        for (int i = 0; i < bs; ++i)
            if (i != s.branch) g = std::min(g, std::abs(s.evals(i) - s.evals(s.branch)));
        return g;
    };

    const int n = std::max(16, grid_points);
    std::vector<double> tgrid(n), gaps(n);
    Eigen::VectorXcd ref = start_vec;
    std::vector<Eigen::VectorXcd> vecs(n);
    int k_min = 0;
    for (int k = 0; k < n; ++k) {
        tgrid[k] = ramp.tau_slope * k / (n - 1);
        const Snapshot s = eig_at(tgrid[k], ref);
        gaps[k] = gap_of(s);
        ref = s.evecs.col(s.branch);
        vecs[k] = ref;
        if (gaps[k] < gaps[k_min]) k_min = k;
    }
    out.end_vec = vecs[n - 1];

    // refine the minimum by golden-section inside the bracketing cells
    const double lo = tgrid[std::max(0, k_min - 1)];
    const double hi = tgrid[std::min(n - 1, k_min + 1)];
    const Eigen::VectorXcd ref_min = vecs[std::max(0, k_min - 1)];
    auto gap_at = [&](double t) { return gap_of(eig_at(t, ref_min)); };

    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = gap_at(x1), f2 = gap_at(x2);
    for (int it = 0; it < 80 && (b - a) > 1e-14 * ramp.tau_slope; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = gap_at(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = gap_at(x2);
        }
    }
    out.t_min = 0.5 * (a + b);
    out.min_gap = gap_at(out.t_min);

    const bool interior = k_min > 0 && k_min < n - 1;
    if (!interior || !(out.min_gap < gaps[0] && out.min_gap < gaps[n - 1])) {
        out.crossing_rate = 0.0;  // no avoided crossing inside the ramp
        return out;
    }

    // Landau-Zener slope: |d(gap)/dt| where gap = 3 * min_gap, corrected for
    // the hyperbolic shape sqrt(Delta^2 + (v t)^2)
    const double target = 3.0 * out.min_gap;
    auto slope_on_side = [&](int dir) -> double {
        int k = k_min;
        while (k > 0 && k < n - 1 && gaps[k] < target) k += dir;
        if (gaps[k] < target) return 0.0;  // never reached the target gap
        double t_in = out.t_min, t_out = tgrid[k];
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (t_in + t_out);
            if (gap_at(mid) < target)
                t_in = mid;
            else
                t_out = mid;
        }
        const double t_at = 0.5 * (t_in + t_out);
        const double dt = std::max(1e-6 * ramp.tau_slope, 1e-3 * std::abs(t_at - out.t_min));
        if (t_at - dt <= 0.0 || t_at + dt >= ramp.tau_slope) return 0.0;
        const double slope = (gap_at(t_at + dt) - gap_at(t_at - dt)) / (2.0 * dt);
        const double correction = std::sqrt(1.0 - 1.0 / 9.0);
        return std::abs(slope) / correction;
    };
    const double v_left = slope_on_side(-1);
    const double v_right = slope_on_side(+1);
    if (v_left > 0.0 && v_right > 0.0)
        out.crossing_rate = 0.5 * (v_left + v_right);
    else
        out.crossing_rate = std::max(v_left, v_right);
    return out;
}

struct BlockUnitaries {
    // identity on inactive blocks
    std::vector<Eigen::MatrixXcd> w;
};

BlockUnitaries integrate_blocks(const Operator& h0, const Operator& x,
                                const ExchangeRamp& ramp, const std::vector<bool>& active,
                                const SweepControl& ctrl, double h_max) {
    const double sqrt3_6 = std::sqrt(3.0) / 6.0;
    const double a1 = 0.25 + sqrt3_6, a2 = 0.25 - sqrt3_6;
    const double c1 = 0.5 - sqrt3_6, c2 = 0.5 + sqrt3_6;
    const bool cf4 = ctrl.scheme.kind == SweepScheme::Kind::CommutatorFree4;

    const long long steps =
        std::max<long long>(1, static_cast<long long>(std::ceil(ramp.tau_slope / h_max)));
    const double h = ramp.tau_slope / steps;

    BlockUnitaries result;
    result.w.resize(kNumBlocks);

    for (int blk = 0; blk < kNumBlocks; ++blk) {
        const int bs = static_cast<int>(kBlockIndex[blk].size());
        if (!active[blk]) {
            result.w[blk] = Eigen::MatrixXcd::Identity(bs, bs);
            continue;
        }
        const Eigen::MatrixXcd h0b = extract_block(h0, blk);
        const Eigen::MatrixXcd xb = extract_block(x, blk);

        if (bs == 1) {
            // scalar block: accumulate the phase directly
            const double h0s = h0b(0, 0).real();
            const double xs = xb(0, 0).real();
            double phase = 0.0;
            for (long long k = 0; k < steps; ++k) {
                const double t0 = k * h;
                const double jmid = cf4 ? 0.5 * (ramp_value(ramp, t0 + c1 * h) +
                                                 ramp_value(ramp, t0 + c2 * h))
                                        : ramp_value(ramp, t0 + 0.5 * h);
                phase += h * (h0s + jmid * xs);
            }
            if (ramp.hold > 0.0) phase += ramp.hold * (h0s + ramp.j_max * xs);
            result.w[blk] = Eigen::MatrixXcd::Constant(1, 1, std::polar(1.0, -phase));
            continue;
        }

        const Eigen::Matrix3cd h0b3 = h0b;
        const Eigen::Matrix3cd xb3 = xb;
        const Eigen::Matrix3cd h0_half = 0.5 * h0b3;
        Eigen::Matrix3cd w = Eigen::Matrix3cd::Identity();
        for (long long k = 0; k < steps; ++k) {
            const double t0 = k * h;
            if (cf4) {
                const double j1 = ramp_value(ramp, t0 + c1 * h);
                const double j2 = ramp_value(ramp, t0 + c2 * h);
                const double jr = a1 * j1 + a2 * j2;
                const double jl = a2 * j1 + a1 * j2;
                w = detail::unitary_exp3(h0_half + jr * xb3, h) * w;
                w = detail::unitary_exp3(h0_half + jl * xb3, h) * w;
            } else {
                const double jmid = ramp_value(ramp, t0 + 0.5 * h);
                w = detail::unitary_exp3(h0b3 + jmid * xb3, h) * w;
            }
        }
        if (ramp.hold > 0.0)
            w = detail::unitary_exp3(h0b3 + ramp.j_max * xb3, ramp.hold) * w;
        result.w[blk] = w;
    }
    return result;
}

Operator assemble_final_state(const Operator& rho0, const BlockUnitaries& u) {
    Operator w = Operator::Zero(8, 8);
    for (int blk = 0; blk < kNumBlocks; ++blk) {
        const auto& idx = kBlockIndex[blk];
        for (size_t r = 0; r < idx.size(); ++r)
            for (size_t c = 0; c < idx.size(); ++c) w(idx[r], idx[c]) = u.w[blk](r, c);
    }
    Operator rho = w * rho0 * w.adjoint();
    return 0.5 * (rho + Operator(rho.adjoint()));
}

}  // namespace

SweepResult adiabatic_sweep(const DensityMatrix& rho0, const ReadoutSpinParams& spins,
                            const ExchangeRamp& ramp, const SweepControl& ctrl) {
    spins.validate();
    ramp.validate();
    if (rho0.dim() != 8)
        throw std::invalid_argument("adiabatic_sweep: state must live on the 8-dim space");

    const SpinSystem sys = SpinSystem::donor_readout_triple();
    const Operator h0 = readout_hamiltonian(spins, 0.0);
    const Operator x = spin_dot(sys, 0, 1);
    const Operator p_singlet = electron_pair_projectors(sys).singlet;

    // step size from the mandated phase budget; ||X||_2 = 3/4
    const double norm_bound = spectral_norm(h0) + 0.75 * ramp.j_max;
    const double h_max = (norm_bound > 0.0) ? ctrl.phase_budget / norm_bound : ramp.tau_slope;
    if (h_max < ctrl.min_step)
        throw NumericalError("adiabatic_sweep: required step " + std::to_string(h_max) +
                             " s below minimum " + std::to_string(ctrl.min_step) + " s");

    // blocks that carry any weight of rho0
    std::vector<bool> active(kNumBlocks, false);
    const double rho_scale = std::max(1e-300, max_abs(rho0.matrix()));
    for (int blk = 0; blk < kNumBlocks; ++blk)
        for (int r : kBlockIndex[blk])
            if (rho0.matrix().row(r).cwiseAbs().maxCoeff() > 1e-15 * rho_scale)
                active[blk] = true;

    BlockUnitaries u = integrate_blocks(h0, x, ramp, active, ctrl, h_max);
    Operator rho_f = assemble_final_state(rho0.matrix(), u);

    if (ctrl.self_check) {
        const BlockUnitaries u2 = integrate_blocks(h0, x, ramp, active, ctrl, 0.5 * h_max);
        const Operator rho_f2 = assemble_final_state(rho0.matrix(), u2);
        const double diff = max_abs(Operator(rho_f - rho_f2));
        if (diff > 1e-8)
            throw NumericalError("adiabatic_sweep: step-halving self-check failed, change " +
                                 std::to_string(diff));
        rho_f = rho_f2;
    }

    // diagnostics: dominant initial component and its in-block gap structure
    SweepDiagnostics diag;
    Eigen::SelfAdjointEigenSolver<Operator> rho_es(rho0.matrix());
    Eigen::Index dominant;
    rho_es.eigenvalues().maxCoeff(&dominant);
    const Eigen::VectorXcd psi0 = rho_es.eigenvectors().col(dominant);

    int blk0 = 0;
    double best_w = -1.0;
    for (int blk = 0; blk < kNumBlocks; ++blk) {
        double wsum = 0.0;
        for (int r : kBlockIndex[blk]) wsum += std::norm(psi0(r));
        if (wsum > best_w) {
            best_w = wsum;
            blk0 = blk;
        }
    }
    diag.occupied_block = blk0;

    const auto& idx = kBlockIndex[blk0];
    Eigen::VectorXcd start_vec(idx.size());
    for (size_t r = 0; r < idx.size(); ++r) start_vec(r) = psi0(idx[r]);
    if (start_vec.norm() > 0.0) start_vec.normalize();

    const TrackedBranch branch = track_occupied_branch(
        extract_block(h0, blk0), extract_block(x, blk0), ramp, start_vec,
        ctrl.diagnostics_grid);
    diag.min_gap = branch.min_gap;
    diag.t_min_gap = branch.t_min;
    diag.crossing_rate = branch.crossing_rate;

    Eigen::VectorXcd end_full = Eigen::VectorXcd::Zero(8);
    for (size_t r = 0; r < idx.size(); ++r) end_full(idx[r]) = branch.end_vec(r);
    diag.follow_probability = std::real(end_full.dot(rho_f * end_full));
    diag.final_singlet_content = expectation(rho_f, p_singlet);

    SweepResult result{DensityMatrix::unchecked(std::move(rho_f)), diag};
    return result;
}

double recombination_window(const DensityMatrix& rho, const KsmRates& rates,
                            double tau_life, const ReadoutSpinParams& spins, double j_hold) {
    if (!(tau_life > 0.0))
        throw std::invalid_argument("recombination_window: tau_life must be > 0");
    if (rates.dissociation != 0.0)
        throw std::invalid_argument(
            "recombination_window: d must be 0 in readout mode (escape would be counted "
            "as readout)");
    if (rates.generation != 0.0)
        throw std::invalid_argument("recombination_window: generation must be 0");
    rates.validate();

    const SpinSystem sys = SpinSystem::donor_readout_triple();
    const SegmentPropagator prop(sys, readout_hamiltonian(spins, j_hold), rates);
    const Operator rho_f = prop.propagate(rho.matrix(), tau_life);
    double p = 1.0 - rho_f.trace().real() / rho.trace();
    if (p < -1e-9 || p > 1.0 + 1e-9)
        throw NumericalError("recombination_window: p_charged " + std::to_string(p) +
                             " outside [0, 1]");
    return std::min(1.0, std::max(0.0, p));
}

long long photon_budget(const FlashParams& f) {
    f.validate();
    const double energy_j = f.photon_energy_ev * kElectronVolt;
    return std::llround(f.power_w * f.duration * f.quantum_efficiency / energy_j);
}

DecayTrace flash_decay(bool charged, long long n_pairs, const ClassifierParams& c,
                       double horizon, bool stochastic, SplitMix64* rng) {
    c.validate();
    if (n_pairs < 0) throw std::invalid_argument("flash_decay: n_pairs must be >= 0");
    if (!(horizon > 0.0)) throw std::invalid_argument("flash_decay: horizon must be > 0");
    if (stochastic && n_pairs > 0 && rng == nullptr)
        throw std::invalid_argument("flash_decay: stochastic mode needs a generator");

    const double k_eff = c.k_slow + (charged ? c.k_trap : 0.0);

    std::vector<double> grid;
    const int n = 256;
    grid.reserve(n + 2);
    for (int k = 0; k <= n; ++k) grid.push_back(horizon * k / n);
    if (c.tau_decay < horizon) {
        grid.push_back(c.tau_decay);
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    }

    DecayTrace trace;
    trace.times = grid;
    trace.sigma.resize(grid.size());

    if (!stochastic) {
        for (size_t k = 0; k < grid.size(); ++k) trace.sigma[k] = std::exp(-k_eff * grid[k]);
        return trace;
    }
    if (n_pairs == 0) {
        // no carriers generated: no observable decay
        std::fill(trace.sigma.begin(), trace.sigma.end(), 1.0);
        return trace;
    }
    std::vector<double> lifetimes(n_pairs);
    for (long long i = 0; i < n_pairs; ++i) lifetimes[i] = rng->exponential(k_eff);
    for (size_t k = 0; k < grid.size(); ++k) {
        long long alive = 0;
        for (double lt : lifetimes)
            if (lt > grid[k]) ++alive;
        trace.sigma[k] = static_cast<double>(alive) / n_pairs;
    }
    return trace;
}

int classify_readout(const DecayTrace& trace, const ClassifierParams& c) {
    c.validate();
    if (trace.times.empty() || trace.times.size() != trace.sigma.size())
        throw std::invalid_argument("classify_readout: malformed trace");
    if (c.tau_decay < trace.times.front() || c.tau_decay > trace.times.back())
        throw std::out_of_range("classify_readout: tau_decay outside trace horizon");
    const double sigma0 = trace.sigma.front();
    if (sigma0 <= 0.0) return 0;  // no signal, no trap evidence

    const auto it = std::lower_bound(trace.times.begin(), trace.times.end(), c.tau_decay);
    size_t hi = std::min<size_t>(std::max<std::ptrdiff_t>(1, it - trace.times.begin()),
                                 trace.times.size() - 1);
    const size_t lo = hi - 1;
    const double f =
        (c.tau_decay - trace.times[lo]) / (trace.times[hi] - trace.times[lo]);
    const double val = trace.sigma[lo] + f * (trace.sigma[hi] - trace.sigma[lo]);
    return (val / sigma0 < c.threshold) ? 1 : 0;
}

double calibrated_threshold(const ClassifierParams& c) {
    // only the decay constants matter here; c.threshold may still be unset
    if (!(c.k_trap > 0.0)) throw std::invalid_argument("classifier.k_trap must be > 0");
    if (c.k_slow < 0.0) throw std::invalid_argument("classifier.k_slow must be >= 0");
    if (!(c.tau_decay > 0.0)) throw std::invalid_argument("classifier.tau_decay must be > 0");
    return std::exp(-(c.k_slow + 0.5 * c.k_trap) * c.tau_decay);
}

ReadoutStages run_readout_stages(const ReadoutParams& p, NuclearBit bit) {
    p.validate();
    ReadoutStages stages{thermal_initial_state(p.spins, p.temperature, bit),
                         DensityMatrix::maximally_mixed(8),
                         {},
                         0.0,
                         0};
    SweepResult sweep = adiabatic_sweep(stages.initial, p.spins, p.ramp, p.sweep);
    stages.after_sweep = sweep.state;
    stages.sweep = sweep.diag;
    stages.p_charged =
        recombination_window(stages.after_sweep, p.rates, p.tau_life, p.spins, p.ramp.j_max);
    stages.n_pairs = photon_budget(p.flash);
    return stages;
}

namespace {

// one classified shot; carrier draws are keyed (seed, bit, trial, carrier) so
// that pair-count sweeps reuse the same randomness
int classify_shot(const ReadoutStages& stages, const ReadoutParams& p, int bit_tag,
                  long long n_pairs, int trial, std::uint64_t seed) {
    SplitMix64 coin = SplitMix64::stream(seed, bit_tag, trial, 0);
    const bool charged = coin.uniform01() < stages.p_charged;
    const double k_eff = p.classifier.k_slow + (charged ? p.classifier.k_trap : 0.0);

    double frac;
    if (p.stochastic_flash && n_pairs > 0) {
        long long alive = 0;
        for (long long j = 0; j < n_pairs; ++j) {
            SplitMix64 carrier = SplitMix64::stream(seed, bit_tag, trial, 1000 + j);
            const double lifetime = carrier.exponential(k_eff);
            if (lifetime > p.classifier.tau_decay) ++alive;
        }
        frac = static_cast<double>(alive) / n_pairs;
    } else if (n_pairs > 0) {
        frac = std::exp(-k_eff * p.classifier.tau_decay);
    } else {
        frac = 1.0;  // no carriers: flat trace
    }
    return (frac < p.classifier.threshold) ? 1 : 0;
}

}  // namespace

FidelityResult readout_fidelity(const ReadoutParams& p, int n_trials, std::uint64_t seed) {
    if (n_trials < 1) throw std::invalid_argument("readout_fidelity: n_trials must be >= 1");
    const ReadoutStages up = run_readout_stages(p, NuclearBit::Up);
    const ReadoutStages down = run_readout_stages(p, NuclearBit::Down);

    auto run = [&](const ReadoutStages& stages, int bit_tag) {
        long long ones = 0;
        for (int trial = 0; trial < n_trials; ++trial)
            ones += classify_shot(stages, p, bit_tag, stages.n_pairs, trial, seed);
        return static_cast<double>(ones) / n_trials;
    };

    FidelityResult r;
    r.p_read1_given_up = run(up, 1);
    r.p_read1_given_down = run(down, 2);
    r.contrast = r.p_read1_given_up - r.p_read1_given_down;
    return r;
}

std::vector<std::pair<long long, FidelityResult>> readout_fidelity_vs_pairs(
    const ReadoutParams& p, const std::vector<long long>& pair_counts, int n_trials,
    std::uint64_t seed) {
    if (n_trials < 1) throw std::invalid_argument("readout_fidelity_vs_pairs: n_trials >= 1");
    const ReadoutStages up = run_readout_stages(p, NuclearBit::Up);
    const ReadoutStages down = run_readout_stages(p, NuclearBit::Down);

    std::vector<std::pair<long long, FidelityResult>> table;
    for (long long n_pairs : pair_counts) {
        if (n_pairs < 0)
            throw std::invalid_argument("readout_fidelity_vs_pairs: negative pair count");
        FidelityResult r;
        long long ones_up = 0, ones_down = 0;
        for (int trial = 0; trial < n_trials; ++trial) {
            ones_up += classify_shot(up, p, 1, n_pairs, trial, seed);
            ones_down += classify_shot(down, p, 2, n_pairs, trial, seed);
        }
        r.p_read1_given_up = static_cast<double>(ones_up) / n_trials;
        r.p_read1_given_down = static_cast<double>(ones_down) / n_trials;
        r.contrast = r.p_read1_given_up - r.p_read1_given_down;
        table.emplace_back(n_pairs, r);
    }
    return table;
}

void write_decay_trace_csv(const DecayTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "time_us,sigma_norm\n";
    char buf[32];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf;
    };
    for (size_t k = 0; k < trace.times.size(); ++k) {
        emit(trace.times[k] * 1e6);
        out << ",";
        emit(trace.sigma[k]);
        out << "\n";
    }
}

}  // namespace sdr
