#include "sdr/hamiltonians.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace sdr {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be finite");
}

}  // namespace

void PairParams::validate() const {
    require_finite(detuning_a, "pair.detuning_a");
    require_finite(detuning_b, "pair.detuning_b");
    require_finite(exchange_j, "pair.exchange_j");
    require(exchange_j >= 0.0, "pair.exchange_j must be >= 0");
}

void DriveParams::validate() const {
    require_finite(rabi_omega1, "drive.rabi_omega1");
    require(rabi_omega1 >= 0.0, "drive.rabi_omega1 must be >= 0");
    require_finite(phase_deg, "drive.phase_deg");
}

double DriveParams::phase_rad() const {
    double p = std::fmod(phase_deg, 360.0);
    if (p < 0.0) p += 360.0;
    return p * std::numbers::pi / 180.0;
}

DriveParams DriveParams::reversed() const {
    DriveParams r = *this;
    r.phase_deg = std::fmod(phase_deg + 180.0, 360.0);
    if (r.phase_deg < 0.0) r.phase_deg += 360.0;
    return r;
}

void ReadoutSpinParams::validate() const {
    require(omega_p > 0.0, "readout.spins.omega_p must be > 0");
    require(omega_db > 0.0, "readout.spins.omega_db must be > 0");
    require(omega_n >= 0.0, "readout.spins.omega_n must be >= 0");
    require(hyperfine_a >= 0.0, "readout.spins.hyperfine_a must be >= 0");
}

void ExchangeRamp::validate() const {
    require(j_max >= 0.0, "ramp.j_max must be >= 0");
    require(tau_slope > 0.0, "ramp.tau_slope must be > 0");
    require(hold >= 0.0, "ramp.hold must be >= 0");
}

Operator rotating_pair_hamiltonian(const PairParams& p, const DriveParams& d) {
    p.validate();
    d.validate();
    const SpinSystem sys = SpinSystem::ce_db_pair();
    const double phi = d.phase_rad();
    Operator h = p.detuning_a * spin_operator(sys, 0, Axis::Z) +
                 p.detuning_b * spin_operator(sys, 1, Axis::Z);
    h += d.rabi_omega1 * std::cos(phi) *
         (spin_operator(sys, 0, Axis::X) + spin_operator(sys, 1, Axis::X));
    h += d.rabi_omega1 * std::sin(phi) *
         (spin_operator(sys, 0, Axis::Y) + spin_operator(sys, 1, Axis::Y));
    if (p.exchange_j != 0.0) h += p.exchange_j * spin_dot(sys, 0, 1);
    return h;
}

Operator readout_hamiltonian(const ReadoutSpinParams& s, double j) {
    s.validate();
    if (j < 0.0) throw std::invalid_argument("readout_hamiltonian: j must be >= 0");
    const SpinSystem sys = SpinSystem::donor_readout_triple();
    Operator h = s.omega_p * spin_operator(sys, 0, Axis::Z) +
                 s.omega_db * spin_operator(sys, 1, Axis::Z) -
                 s.omega_n * spin_operator(sys, 2, Axis::Z);
    if (s.hyperfine_a != 0.0) h += s.hyperfine_a * spin_dot(sys, 0, 2);
    if (j != 0.0) h += j * spin_dot(sys, 0, 1);
    return h;
}

double ramp_value(const ExchangeRamp& r, double t) {
    r.validate();
    if (t < 0.0) throw std::invalid_argument("ramp_value: t must be >= 0");
    if (t >= r.tau_slope) return r.j_max;
    const double x = t / r.tau_slope;
    switch (r.shape) {
        case RampShape::Linear:
            return r.j_max * x;
        case RampShape::RaisedCosine:
            return r.j_max * 0.5 * (1.0 - std::cos(std::numbers::pi * x));
    }
    return r.j_max;
}

LevelDiagram instantaneous_spectrum(const ReadoutSpinParams& s,
                                    const std::vector<double>& j_grid) {
    if (j_grid.empty()) throw std::invalid_argument("instantaneous_spectrum: empty grid");
    for (size_t k = 1; k < j_grid.size(); ++k)
        if (!(j_grid[k] > j_grid[k - 1]))
            throw std::invalid_argument("instantaneous_spectrum: grid must be strictly increasing");

    const SpinSystem sys = SpinSystem::donor_readout_triple();
    const Operator p_singlet = electron_pair_projectors(sys).singlet;
    const int n = static_cast<int>(j_grid.size());
    const int dim = sys.dim();

    LevelDiagram diag;
    diag.j = j_grid;
    diag.energy.resize(n, dim);
    diag.singlet_character.resize(n, dim);
    diag.vectors.resize(n);
    diag.branch_flagged.assign(dim, false);

    Eigen::MatrixXcd prev(dim, dim);
    for (int k = 0; k < n; ++k) {
        Eigen::SelfAdjointEigenSolver<Operator> es(readout_hamiltonian(s, j_grid[k]));
        const Eigen::VectorXd evals = es.eigenvalues();
        const Eigen::MatrixXcd evecs = es.eigenvectors();

        Eigen::VectorXd branch_e(dim);
        Eigen::MatrixXcd branch_v(dim, dim);
        if (k == 0) {
            // branches numbered by ascending energy at the first grid point
            branch_e = evals;
            branch_v = evecs;
        } else {
            // one-to-one max-overlap assignment against the previous point
            Eigen::MatrixXd overlap(dim, dim);
            for (int b = 0; b < dim; ++b)
                for (int i = 0; i < dim; ++i)
                    overlap(b, i) = std::abs(prev.col(b).dot(evecs.col(i)));

            std::vector<bool> branch_done(dim, false), vec_used(dim, false);
            for (int round = 0; round < dim; ++round) {
                int best_b = -1, best_i = -1;
                double best = -1.0;
                for (int b = 0; b < dim; ++b) {
                    if (branch_done[b]) continue;
                    for (int i = 0; i < dim; ++i) {
                        if (vec_used[i]) continue;
                        if (overlap(b, i) > best) {
                            best = overlap(b, i);
                            best_b = b;
                            best_i = i;
                        }
                    }
                }
                // ambiguity: a second candidate within 1e-6 of the winner
                double second = -1.0;
                for (int i = 0; i < dim; ++i)
                    if (!vec_used[i] && i != best_i && overlap(best_b, i) > second)
                        second = overlap(best_b, i);
                if (second >= 0.0 && best - second < 1e-6) diag.branch_flagged[best_b] = true;

                branch_done[best_b] = true;
                vec_used[best_i] = true;
                branch_e(best_b) = evals(best_i);
                // keep a consistent phase along the branch
                complex ph = prev.col(best_b).dot(evecs.col(best_i));
                ph = (std::abs(ph) > 0) ? ph / std::abs(ph) : complex(1.0, 0.0);
                branch_v.col(best_b) = evecs.col(best_i) * ph;
            }
        }

        diag.energy.row(k) = branch_e.transpose();
        for (int b = 0; b < dim; ++b) {
            const Eigen::VectorXcd v = branch_v.col(b);
            diag.singlet_character(k, b) = std::real(v.dot(p_singlet * v));
        }
        diag.vectors[k] = branch_v;
        prev = branch_v;
    }
    return diag;
}

void write_level_diagram_csv(const LevelDiagram& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "j";
    for (int b = 1; b <= d.num_branches(); ++b) out << ",E_" << b;
    for (int b = 1; b <= d.num_branches(); ++b) out << ",singlet_character_" << b;
    out << "\n";
    char buf[32];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf;
    };
    for (size_t k = 0; k < d.j.size(); ++k) {
        emit(d.j[k]);
        for (int b = 0; b < d.num_branches(); ++b) {
            out << ",";
            emit(d.energy(k, b));
        }
        for (int b = 0; b < d.num_branches(); ++b) {
            out << ",";
            emit(d.singlet_character(k, b));
        }
        out << "\n";
    }
}

}  // namespace sdr
