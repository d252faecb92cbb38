#include "sdr/selfcheck.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sdr {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

Operator random_pair_hamiltonian(SplitMix64& rng) {
    PairParams p;
    p.detuning_a = (rng.uniform01() - 0.5) * 4e8;
    p.detuning_b = (rng.uniform01() - 0.5) * 4e8;
    p.exchange_j = rng.uniform01() * 1e7;
    DriveParams d;
    d.rabi_omega1 = rng.uniform01() * 1e8;
    d.phase_deg = rng.uniform01() * 360.0;
    return rotating_pair_hamiltonian(p, d);
}

SuiteResult check_unitary_trace() {
    SuiteResult r{"unitary-limit trace and positivity", true, ""};
    const SpinSystem sys = SpinSystem::ce_db_pair();
    SplitMix64 rng(2024);
    double worst_trace = 0.0;
    double worst_eig = 0.0;
    for (int rep = 0; rep < 8; ++rep) {
        Operator state = (rep % 2) ? DensityMatrix::maximally_mixed(4).matrix()
                                   : DensityMatrix::pure(basis_ket(sys, {1, 1})).matrix();
        const double tr0 = state.trace().real();
        for (int seg = 0; seg < 5; ++seg) {
            const Trajectory traj =
                evolve(DensityMatrix::unchecked(state), sys, random_pair_hamiltonian(rng),
                       KsmRates{}, 0.0, 2e-6, StepControl{.samples = 17});
            for (const Operator& s : traj.states) {
                worst_trace = std::max(worst_trace, std::abs(s.trace().real() - tr0));
                Eigen::SelfAdjointEigenSolver<Operator> es(s, Eigen::EigenvaluesOnly);
                worst_eig = std::min(worst_eig, es.eigenvalues().minCoeff());
            }
            state = traj.final_state();
        }
    }
    r.pass = worst_trace <= 1e-9 && worst_eig >= -1e-9;
    r.detail = "max |trace drift| = " + fmt(worst_trace) +
               ", min eigenvalue = " + fmt(worst_eig);
    return r;
}

SuiteResult check_trace_monotone() {
    SuiteResult r{"trace monotone without generation", true, ""};
    const SpinSystem sys = SpinSystem::ce_db_pair();
    SplitMix64 rng(77);
    const KsmRates rates{1e7, 1e3, 1e4, 0.0};
    double worst = 0.0;
    for (int rep = 0; rep < 6; ++rep) {
        const DensityMatrix rho = DensityMatrix::maximally_mixed(4);
        const Trajectory traj = evolve(rho, sys, random_pair_hamiltonian(rng), rates, 0.0,
                                       2e-6, StepControl{.samples = 129});
        for (size_t k = 1; k < traj.states.size(); ++k)
            worst = std::max(worst, traj.states[k].trace().real() -
                                        traj.states[k - 1].trace().real());
    }
    r.pass = worst <= 1e-12;
    r.detail = "max per-step trace rise = " + fmt(worst);
    return r;
}

SuiteResult check_projectors() {
    SuiteResult r{"projector idempotence and completeness", true, ""};
    double worst_idem = 0.0, worst_complete = 0.0, worst_algebra = 0.0;
    for (const SpinSystem& sys :
         {SpinSystem::ce_db_pair(), SpinSystem::donor_readout_triple()}) {
        const PairProjectors p = electron_pair_projectors(sys);
        const Operator id = Operator::Identity(sys.dim(), sys.dim());
        for (const Operator* proj :
             {&p.singlet, &p.triplet_plus, &p.triplet_zero, &p.triplet_minus})
            worst_idem = std::max(worst_idem, max_abs(Operator(*proj * *proj - *proj)));
        worst_complete = std::max(
            worst_complete, max_abs(Operator(p.singlet + p.triplet_plus + p.triplet_zero +
                                             p.triplet_minus - id)));
        int a = -1, b = -1;
        for (int s = 0; s < sys.num_sites(); ++s)
            if (sys.is_electron(s)) (a < 0 ? a : b) = s;
        const Operator ps_algebra = 0.25 * id - spin_dot(sys, a, b);
        worst_algebra = std::max(worst_algebra, max_abs(Operator(ps_algebra - p.singlet)));
    }
    r.pass = worst_idem <= 1e-12 && worst_complete <= 1e-14 && worst_algebra <= 1e-14;
    r.detail = "idempotence " + fmt(worst_idem) + ", completeness " + fmt(worst_complete) +
               ", route agreement " + fmt(worst_algebra);
    return r;
}

SuiteResult check_jz_conservation() {
    SuiteResult r{"readout Hamiltonian conserves total m", true, ""};
    const SpinSystem sys = SpinSystem::donor_readout_triple();
    const Operator jz = spin_operator(sys, 0, Axis::Z) + spin_operator(sys, 1, Axis::Z) +
                        spin_operator(sys, 2, Axis::Z);
    SplitMix64 rng(5150);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        ReadoutSpinParams s;
        s.omega_p = (0.5 + rng.uniform01()) * 6e10;
        s.omega_db = (0.5 + rng.uniform01()) * 6e10;
        s.omega_n = rng.uniform01() * 4e8;
        s.hyperfine_a = rng.uniform01() * 7e8;
        const Operator h = readout_hamiltonian(s, rng.uniform01() * 8e10);
        worst = std::max(worst, max_abs(Operator(h * jz - jz * h)));
    }
    r.pass = worst <= 1e-13;
    r.detail = "max |[H, Jz]| entry = " + fmt(worst);
    return r;
}

SuiteResult check_steady_state(const Config& cfg) {
    SuiteResult r{"steady-state residual and closed form", true, ""};
    const SpinSystem sys = SpinSystem::ce_db_pair();
    const KsmRates rates = cfg.ksm_rates();
    const PairProjectors proj = electron_pair_projectors(sys);

    const DensityMatrix ss = steady_state(sys, Operator::Zero(4, 4), rates);
    const double singlet_expect =
        rates.generation / 4.0 / (rates.r_singlet + rates.dissociation);
    const double triplet_expect =
        rates.generation / 4.0 / (rates.r_triplet + rates.dissociation);
    const double err_s =
        std::abs(expectation(ss, proj.singlet) - singlet_expect) / singlet_expect;
    const double err_t =
        std::abs(expectation(ss, proj.triplet_minus) - triplet_expect) / triplet_expect;

    // driven steady state: fixed point of the evolution
    const Operator h_drive = rotating_pair_hamiltonian(cfg.pair_params(), cfg.drive_params());
    const DensityMatrix ss_drive = steady_state(sys, h_drive, rates);
    const SegmentPropagator prop(sys, h_drive, rates);
    const double drift = max_abs(Operator(prop.propagate(ss_drive.matrix(), 3e-6) -
                                          ss_drive.matrix()));

    r.pass = err_s <= 1e-12 && err_t <= 1e-12 && drift <= 1e-8;
    r.detail = "closed-form relative error " + fmt(std::max(err_s, err_t)) +
               ", fixed-point drift " + fmt(drift);
    return r;
}

SuiteResult check_step_halving() {
    SuiteResult r{"integrator step-halving stability", true, ""};
    // toy-scale smooth ramp through the avoided crossing, with the sink on
    const SpinSystem sys = SpinSystem::donor_readout_triple();
    ReadoutSpinParams spins;
    spins.omega_p = 10.0;
    spins.omega_db = 10.0;
    spins.omega_n = 0.05;
    spins.hyperfine_a = 0.5;
    ExchangeRamp ramp;
    ramp.j_max = 25.0;
    ramp.tau_slope = 400.0;
    ramp.hold = 20.0;

    const DensityMatrix rho0 = thermal_initial_state(spins, 1e-6, NuclearBit::Up);
    const KsmRates rates{0.01, 0.0, 0.0, 0.0};
    auto h_of_t = [&](double t) {
        return readout_hamiltonian(spins, ramp_value(ramp, t));
    };

    double evolve_diff = 0.0;
    {
        StepControl ctrl;
        ctrl.samples = 5;
        const Trajectory coarse = evolve(rho0, sys, h_of_t, rates, 0.0, 420.0, ctrl);
        StepControl fine = ctrl;
        fine.phase_budget = 0.5 * ctrl.phase_budget;
        const Trajectory refined = evolve(rho0, sys, h_of_t, rates, 0.0, 420.0, fine);
        evolve_diff = max_abs(Operator(coarse.final_state() - refined.final_state()));
    }

    double sweep_diff = 0.0;
    {
        SweepControl ctrl;
        const SweepResult coarse = adiabatic_sweep(rho0, spins, ramp, ctrl);
        SweepControl fine = ctrl;
        fine.phase_budget = 0.5 * ctrl.phase_budget;
        const SweepResult refined = adiabatic_sweep(rho0, spins, ramp, fine);
        sweep_diff =
            max_abs(Operator(coarse.state.matrix() - refined.state.matrix()));
    }

    r.pass = evolve_diff <= 1e-8 && sweep_diff <= 1e-8;
    r.detail = "midpoint evolve change " + fmt(evolve_diff) + ", exchange sweep change " +
               fmt(sweep_diff);
    return r;
}

SuiteResult check_rerun_determinism(const Config& cfg) {
    SuiteResult r{"byte-identical reruns under fixed seed", true, ""};
    namespace fs = std::filesystem;

    // scan written twice through the same CSV path
    BroadeningSpec ens = cfg.broadening_spec();
    ens.scheme = BroadeningScheme::MonteCarlo;
    ens.n_nodes = 48;
    ens.seed = cfg.run.seed;

    std::vector<double> grid;
    for (int k = 0; k <= 24; ++k) grid.push_back(100e-9 + k * 8e-9);

    auto run_once = [&](const fs::path& path) {
        SequenceOptions opts;
        opts.initial = InitialState::triplet_minus();
        const ScanResult scan = echo_scan(100e-9, grid, cfg.pair_params(), KsmRates{}, ens,
                                          cfg.drive_params(), EchoScanAxis::TotalLength, opts);
        write_scan_csv(scan, path.string());
    };

    const fs::path tmp = fs::temp_directory_path() / "sdrsim_selfcheck";
    fs::create_directories(tmp);
    const fs::path f1 = tmp / "rerun_a.csv";
    const fs::path f2 = tmp / "rerun_b.csv";
    run_once(f1);
    run_once(f2);

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const bool scan_equal = slurp(f1) == slurp(f2);
    fs::remove(f1);
    fs::remove(f2);

    // seeded Monte Carlo pipeline twice (toy scale keeps the sweep cheap)
    ReadoutParams p = cfg.readout_params();
    p.spins = ReadoutSpinParams{10.0, 10.0, 0.05, 0.5};
    p.ramp = ExchangeRamp{25.0, 500.0, RampShape::Linear, 10.0};
    p.rates = KsmRates{3.0, 0.0, 0.0, 0.0};
    p.tau_life = 1.0;
    p.temperature = 1e-6;
    const FidelityResult fa = readout_fidelity(p, 400, cfg.run.seed);
    const FidelityResult fb = readout_fidelity(p, 400, cfg.run.seed);
    const bool mc_equal = fa.p_read1_given_up == fb.p_read1_given_up &&
                          fa.p_read1_given_down == fb.p_read1_given_down;

    r.pass = scan_equal && mc_equal;
    r.detail = std::string("scan bytes ") + (scan_equal ? "identical" : "DIFFER") +
               ", Monte Carlo " + (mc_equal ? "identical" : "DIFFER");
    return r;
}

SuiteResult check_gh_convergence(const Config& cfg) {
    SuiteResult r{"Gauss-Hermite node-doubling convergence", true, ""};
    std::vector<double> grid;
    for (int k = 0; k <= 20; ++k) grid.push_back(k * 20e-9);

    SequenceOptions opts;
    opts.initial = InitialState::triplet_minus();
    BroadeningSpec base = cfg.broadening_spec();
    BroadeningSpec dbl = base;
    dbl.n_nodes = 2 * base.n_nodes;

    const ScanResult a = echo_scan(100e-9, grid, cfg.pair_params(), KsmRates{}, base,
                                   cfg.drive_params(), EchoScanAxis::TotalLength, opts);
    const ScanResult b = echo_scan(100e-9, grid, cfg.pair_params(), KsmRates{}, dbl,
                                   cfg.drive_params(), EchoScanAxis::TotalLength, opts);
    double worst = 0.0;
    for (size_t k = 0; k < a.pop_tminus.size(); ++k)
        worst = std::max(worst, std::abs(a.pop_tminus[k] - b.pop_tminus[k]));
    r.pass = worst <= 1e-4;
    r.detail = "max curve change = " + fmt(worst);
    return r;
}

SuiteResult check_echo_exactness(const Config& cfg) {
    SuiteResult r{"phase-reversal refocusing", true, ""};
    const SpinSystem sys = SpinSystem::ce_db_pair();

    // arbitrary rabi distribution, zero detunings, rates off
    BroadeningSpec ens;
    ens.sigma_rabi_rel = 0.35;
    ens.n_nodes = 64;
    ens.scheme = BroadeningScheme::MonteCarlo;
    ens.seed = 99;

    PairParams pair;  // all zero
    PulseSequence seq;
    seq.segments.push_back({123e-9, cfg.drive_params().rabi_omega1, 0.0, "dephase"});
    seq.segments.push_back({123e-9, cfg.drive_params().rabi_omega1, 180.0, "rephase"});

    const DensityMatrix rho0 = DensityMatrix::pure(basis_ket(sys, {1, 1}));
    const Trajectory traj = run_sequence(InitialState::explicit_state(rho0), seq, pair,
                                         KsmRates{}, ens, 9);
    const double refocus_err = max_abs(Operator(traj.final_state() - rho0.matrix()));

    // echo position never shifts with the broadening width
    bool position_ok = true;
    std::vector<double> grid;
    for (int k = 0; k <= 40; ++k) grid.push_back(150e-9 + k * 2.5e-9);
    for (double sigma : {0.05, 0.1, 0.2, 0.4}) {
        BroadeningSpec gh;
        gh.sigma_rabi_rel = sigma;
        gh.n_nodes = 21;
        SequenceOptions opts;
        opts.initial = InitialState::triplet_minus();
        const ScanResult scan = echo_scan(100e-9, grid, pair, KsmRates{}, gh,
                                          cfg.drive_params(), EchoScanAxis::TotalLength, opts);
        size_t argmax = 0;
        for (size_t k = 1; k < scan.pop_tminus.size(); ++k)
            if (scan.pop_tminus[k] > scan.pop_tminus[argmax]) argmax = k;
        if (std::abs(scan.abscissa_ns[argmax] - 200.0) > 2.5 + 1e-9) position_ok = false;
    }

    r.pass = refocus_err <= 1e-9 && position_ok;
    r.detail = "refocus error " + fmt(refocus_err) + ", echo position " +
               (position_ok ? "stable" : "SHIFTED");
    return r;
}

}  // namespace

std::vector<SuiteResult> run_selfcheck(const Config& cfg) {
    std::vector<SuiteResult> results;
    results.push_back(check_unitary_trace());
    results.push_back(check_trace_monotone());
    results.push_back(check_projectors());
    results.push_back(check_jz_conservation());
    results.push_back(check_steady_state(cfg));
    results.push_back(check_step_halving());
    results.push_back(check_rerun_determinism(cfg));
    results.push_back(check_gh_convergence(cfg));
    results.push_back(check_echo_exactness(cfg));
    return results;
}

}  // namespace sdr
