#include "sdr/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace sdr {

namespace {

PairParams member_pair(const PairParams& pair, const EnsembleMember& m) {
    PairParams p = pair;
    p.detuning_a += m.detuning_a;
    p.detuning_b += m.detuning_b;
    return p;
}

DensityMatrix member_initial_state(const InitialState& initial, const SpinSystem& sys,
                                   const PairParams& pair, const KsmRates& rates) {
    switch (initial.kind) {
        case InitialState::Kind::MemberSteadyState: {
            const Operator h_free = rotating_pair_hamiltonian(pair, DriveParams{0.0, 0.0});
            const DensityMatrix ss = steady_state(sys, h_free, rates);
            const double tr = ss.trace();
            if (tr <= 0.0) throw NumericalError("member steady state has zero trace");
            return DensityMatrix(ss.matrix() / tr);
        }
        case InitialState::Kind::TripletMinus:
            return DensityMatrix::pure(basis_ket(sys, {1, 1}));
        case InitialState::Kind::Explicit:
            return *initial.rho;
    }
    throw std::logic_error("unreachable");
}

}  // namespace

void PulseSegment::validate() const {
    if (duration < 0.0) throw std::invalid_argument("segment duration must be >= 0");
    if (rabi_omega1 < 0.0) throw std::invalid_argument("segment rabi_omega1 must be >= 0");
}

double PulseSequence::total_duration() const {
    double total = 0.0;
    for (const auto& s : segments) total += s.duration;
    return total;
}

void PulseSequence::validate() const {
    for (const auto& s : segments) s.validate();
    if (!(total_duration() > 0.0))
        throw std::invalid_argument("sequence total duration must be > 0");
}

Trajectory run_sequence(const InitialState& initial, const PulseSequence& seq,
                        const PairParams& pair, const KsmRates& rates,
                        const BroadeningSpec& ens, int samples_per_segment) {
    seq.validate();
    pair.validate();
    rates.validate();
    const SpinSystem sys = SpinSystem::ce_db_pair();
    const std::vector<EnsembleMember> members = build_ensemble(ens);
    const int samples = std::max(2, samples_per_segment);

    Trajectory averaged;
    std::vector<Eigen::MatrixXcd> per_member;
    per_member.reserve(members.size());

    bool first_member = true;
    std::vector<std::vector<Eigen::MatrixXcd>> member_states(members.size());
    std::vector<double> grid;

    for (size_t mi = 0; mi < members.size(); ++mi) {
        const EnsembleMember& m = members[mi];
        const PairParams p = member_pair(pair, m);
        Operator rho = member_initial_state(initial, sys, p, rates).matrix();

        std::vector<Eigen::MatrixXcd>& states = member_states[mi];
        double t = 0.0;
        states.push_back(rho);
        if (first_member) grid.push_back(0.0);

        for (const PulseSegment& seg : seq.segments) {
            if (seg.duration <= 0.0) continue;
            DriveParams d;
            d.rabi_omega1 = seg.rabi_omega1 * std::abs(m.rabi_scale);
            // a negative rabi_scale tail node is an inverted drive
            d.phase_deg = seg.phase_deg + (m.rabi_scale < 0.0 ? 180.0 : 0.0);
            const SegmentPropagator prop(sys, rotating_pair_hamiltonian(p, d), rates);
            for (int k = 1; k < samples; ++k) {
                const double dt = seg.duration * k / (samples - 1);
                states.push_back(prop.propagate(rho, dt));
                if (first_member) grid.push_back(t + dt);
            }
            rho = states.back();
            t += seg.duration;
        }
        first_member = false;
    }

    averaged.times = grid;
    averaged.states.resize(grid.size());
    for (size_t k = 0; k < grid.size(); ++k) {
        std::vector<Eigen::MatrixXcd> column;
        column.reserve(members.size());
        for (size_t mi = 0; mi < members.size(); ++mi) column.push_back(member_states[mi][k]);
        averaged.states[k] = ensemble_average_states(members, column);
    }
    return averaged;
}

namespace {

struct TerminalPoint {
    double pop_tminus = 0.0;
    double pop_singlet = 0.0;
    double q_excess = 0.0;
};

// integrates (R(t) - R_ref) over one segment with `prop` applied to rho0,
// trapezoid rule on `samples` points; returns the end state
Operator integrate_segment(const SegmentPropagator& prop, const Operator& rho0,
                           double duration, double r_ref, const SpinSystem& sys,
                           const KsmRates& rates, int samples, double& q_accum) {
    if (duration <= 0.0) return rho0;
    Operator rho = rho0;
    double prev_rate = recombination_rate(rho0, sys, rates);
    for (int k = 1; k < samples; ++k) {
        const double t = duration * k / (samples - 1);
        rho = prop.propagate(rho0, t);
        const double rate = recombination_rate(rho, sys, rates);
        q_accum += 0.5 * (prev_rate + rate - 2.0 * r_ref) * duration / (samples - 1);
        prev_rate = rate;
    }
    return rho;
}

}  // namespace

ScanResult echo_scan(double tau_180, const std::vector<double>& grid_s,
                     const PairParams& pair, const KsmRates& rates,
                     const BroadeningSpec& ens, const DriveParams& drive,
                     EchoScanAxis axis, const SequenceOptions& opts) {
    if (!(tau_180 > 0.0)) throw std::invalid_argument("echo_scan: tau_180 must be > 0");
    if (grid_s.empty()) throw std::invalid_argument("echo_scan: empty grid");
    for (size_t k = 1; k < grid_s.size(); ++k)
        if (!(grid_s[k] > grid_s[k - 1]))
            throw std::invalid_argument("echo_scan: grid must be increasing");
    pair.validate();
    rates.validate();
    drive.validate();

    const SpinSystem sys = SpinSystem::ce_db_pair();
    const PairProjectors proj = electron_pair_projectors(sys);
    const std::vector<EnsembleMember> members = build_ensemble(ens);
    const int samples = std::max(2, opts.samples_per_segment);
    const int n = static_cast<int>(grid_s.size());

    std::vector<TerminalPoint> acc(n);

    for (const EnsembleMember& m : members) {
        const PairParams p = member_pair(pair, m);
        DriveParams d1;
        d1.rabi_omega1 = drive.rabi_omega1 * std::abs(m.rabi_scale);
        d1.phase_deg = drive.phase_deg + (m.rabi_scale < 0.0 ? 180.0 : 0.0);
        const DriveParams d2 = d1.reversed();

        const SegmentPropagator prop1(sys, rotating_pair_hamiltonian(p, d1), rates);
        const SegmentPropagator prop2(sys, rotating_pair_hamiltonian(p, d2), rates);

        const Operator rho0 = member_initial_state(opts.initial, sys, p, rates).matrix();
        const double r_ref = recombination_rate(rho0, sys, rates);

        // first segment up to tau_180 is shared by all grid points past it
        double q_first = 0.0;
        const Operator rho_mid = integrate_segment(prop1, rho0, tau_180, r_ref, sys, rates,
                                                   samples, q_first);

        for (int k = 0; k < n; ++k) {
            double s1, s2;
            if (axis == EchoScanAxis::TotalLength) {
                s1 = std::min(grid_s[k], tau_180);
                s2 = std::max(0.0, grid_s[k] - tau_180);
            } else {
                s1 = tau_180;
                s2 = grid_s[k];
            }

            Operator rho_end;
            double q = 0.0;
            if (s1 < tau_180) {
                rho_end = integrate_segment(prop1, rho0, s1, r_ref, sys, rates, samples, q);
                if (s1 == 0.0) rho_end = rho0;
            } else {
                q = q_first;
                rho_end = (s2 > 0.0)
                              ? integrate_segment(prop2, rho_mid, s2, r_ref, sys, rates,
                                                  samples, q)
                              : rho_mid;
            }

            acc[k].pop_tminus += m.weight * (proj.triplet_minus * rho_end).trace().real();
            acc[k].pop_singlet += m.weight * (proj.singlet * rho_end).trace().real();
            acc[k].q_excess += m.weight * q;
        }
    }

    ScanResult result;
    result.abscissa_name = (axis == EchoScanAxis::TotalLength) ? "total_ns" : "second_ns";
    for (int k = 0; k < n; ++k) {
        result.abscissa_ns.push_back(grid_s[k] * 1e9);
        result.pop_tminus.push_back(acc[k].pop_tminus);
        result.pop_singlet.push_back(acc[k].pop_singlet);
        result.q_excess.push_back(acc[k].q_excess);
    }
    return result;
}

ScanResult rabi_scan(const std::vector<double>& duration_grid_s, const PairParams& pair,
                     const KsmRates& rates, const BroadeningSpec& ens,
                     const DriveParams& drive, const SequenceOptions& opts) {
    if (duration_grid_s.empty()) throw std::invalid_argument("rabi_scan: empty grid");
    for (size_t k = 1; k < duration_grid_s.size(); ++k)
        if (!(duration_grid_s[k] > duration_grid_s[k - 1]))
            throw std::invalid_argument("rabi_scan: grid must be increasing");
    pair.validate();
    rates.validate();
    drive.validate();

    const SpinSystem sys = SpinSystem::ce_db_pair();
    const PairProjectors proj = electron_pair_projectors(sys);
    const std::vector<EnsembleMember> members = build_ensemble(ens);
    const int samples = std::max(2, opts.samples_per_segment);
    const int n = static_cast<int>(duration_grid_s.size());

    std::vector<TerminalPoint> acc(n);

    for (const EnsembleMember& m : members) {
        const PairParams p = member_pair(pair, m);
        DriveParams d;
        d.rabi_omega1 = drive.rabi_omega1 * std::abs(m.rabi_scale);
        d.phase_deg = drive.phase_deg + (m.rabi_scale < 0.0 ? 180.0 : 0.0);
        const SegmentPropagator prop(sys, rotating_pair_hamiltonian(p, d), rates);

        const Operator rho0 = member_initial_state(opts.initial, sys, p, rates).matrix();
        const double r_ref = recombination_rate(rho0, sys, rates);

        for (int k = 0; k < n; ++k) {
            double q = 0.0;
            const double dur = duration_grid_s[k];
            const Operator rho_end =
                dur > 0.0 ? integrate_segment(prop, rho0, dur, r_ref, sys, rates, samples, q)
                          : rho0;
            acc[k].pop_tminus += m.weight * (proj.triplet_minus * rho_end).trace().real();
            acc[k].pop_singlet += m.weight * (proj.singlet * rho_end).trace().real();
            acc[k].q_excess += m.weight * q;
        }
    }

    ScanResult result;
    result.abscissa_name = "pulse_ns";
    for (int k = 0; k < n; ++k) {
        result.abscissa_ns.push_back(duration_grid_s[k] * 1e9);
        result.pop_tminus.push_back(acc[k].pop_tminus);
        result.pop_singlet.push_back(acc[k].pop_singlet);
        result.q_excess.push_back(acc[k].q_excess);
    }
    return result;
}

EchoFeature measure_echo_feature(const ScanResult& scan, double expected_peak_ns) {
    const auto& x = scan.abscissa_ns;
    const auto& y = scan.pop_tminus;
    if (x.size() < 5) throw std::invalid_argument("measure_echo_feature: scan too short");

    // locate the peak: maximum within half an expected period around the
    // nominal echo position, then refined to the global feature top
    size_t peak = 0;
    double best = -1.0;
    for (size_t k = 0; k < x.size(); ++k) {
        if (std::abs(x[k] - expected_peak_ns) <= 0.5 * expected_peak_ns && y[k] > best) {
            best = y[k];
            peak = k;
        }
    }
    if (best < 0.0) throw std::invalid_argument("measure_echo_feature: echo position outside scan");

    // flanking minima
    size_t left = peak;
    while (left > 0 && y[left - 1] <= y[left]) --left;
    size_t right = peak;
    while (right + 1 < y.size() && y[right + 1] <= y[right]) ++right;
    if (left == peak || right == peak)
        throw std::invalid_argument("measure_echo_feature: no flanking minima in scan range");

    auto crossing = [&](size_t from, size_t to, double level) {
        // walk from the peak outward until y drops below level, interpolate
        const int step = (to > from) ? 1 : -1;
        for (size_t k = from; k != to; k += step) {
            const size_t nk = k + step;
            if ((y[k] - level) * (y[nk] - level) <= 0.0 && y[k] != y[nk]) {
                const double f = (level - y[k]) / (y[nk] - y[k]);
                return x[k] + f * (x[nk] - x[k]);
            }
        }
        return x[to];
    };

    const double level_left = 0.5 * (y[peak] + y[left]);
    const double level_right = 0.5 * (y[peak] + y[right]);
    const double xl = crossing(peak, left, level_left);
    const double xr = crossing(peak, right, level_right);

    EchoFeature f;
    f.peak_ns = x[peak];
    f.peak_value = y[peak];
    f.width_ns = xr - xl;
    return f;
}

void write_scan_csv(const ScanResult& scan, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << scan.abscissa_name << ",pop_Tminus,pop_S,Q\n";
    char buf[32];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf;
    };
    for (size_t k = 0; k < scan.abscissa_ns.size(); ++k) {
        emit(scan.abscissa_ns[k]);
        out << ",";
        emit(scan.pop_tminus[k]);
        out << ",";
        emit(scan.pop_singlet[k]);
        out << ",";
        emit(scan.q_excess[k]);
        out << "\n";
    }
}

}  // namespace sdr
