#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sdr/hamiltonians.hpp"
#include "sdr/propagator.hpp"

using namespace sdr;

TEST_CASE("free evolution is the identity") {
    const SpinSystem sys = SpinSystem::ce_db_pair();
    const DensityMatrix rho0 = DensityMatrix::maximally_mixed(4);
    const Trajectory traj =
        evolve(rho0, sys, Operator::Zero(4, 4), KsmRates{}, 0.0, 1e-6, StepControl{});
    for (const Operator& s : traj.states)
        CHECK(max_abs(Operator(s - rho0.matrix())) < 1e-14);
}

TEST_CASE("resonant drive: |up,up> population follows sin^4(w1 t / 2)") {
    // independent oracle: each spin flips with probability sin^2(w1 t / 2)
    const SpinSystem sys = SpinSystem::ce_db_pair();
    const double w1 = 2.0 * std::numbers::pi * 1.0e7;
    const Operator h = rotating_pair_hamiltonian(PairParams{0, 0, 0}, DriveParams{w1, 0.0});
    const DensityMatrix rho0 = DensityMatrix::pure(basis_ket(sys, {1, 1}));
    const Eigen::VectorXcd uu = basis_ket(sys, {0, 0});

    const Trajectory traj =
        evolve(rho0, sys, h, KsmRates{}, 0.0, 3e-7, StepControl{.samples = 61});
    for (size_t k = 0; k < traj.times.size(); ++k) {
        const double t = traj.times[k];
        const double oracle = std::pow(std::sin(0.5 * w1 * t), 4);
        const double sim = std::real(uu.dot(traj.states[k] * uu));
        CHECK(std::abs(sim - oracle) < 1e-9);
    }
}

TEST_CASE("pure singlet with the sink decays as exp(-(r_S + d) t)") {
    const SpinSystem sys = SpinSystem::ce_db_pair();
    const KsmRates rates{1e7, 0.0, 3e6, 0.0};
    const DensityMatrix rho0 = DensityMatrix::pure(singlet_ket(sys, 0, 1));
    const Trajectory traj =
        evolve(rho0, sys, Operator::Zero(4, 4), rates, 0.0, 5e-7, StepControl{.samples = 21});
    for (size_t k = 0; k < traj.times.size(); ++k) {
        const double expect = std::exp(-(rates.r_singlet + rates.dissociation) * traj.times[k]);
        CHECK(traj.states[k].trace().real() == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("generation refills the ensemble") {
    // H = 0: every diagonal mode relaxes toward G/(dim (r+d))
    const SpinSystem sys = SpinSystem::ce_db_pair();
    const KsmRates rates{1e7, 1e3, 1e4, 1e4};
    const DensityMatrix rho0 = DensityMatrix::unchecked(Operator::Zero(4, 4));
    const Trajectory traj =
        evolve(rho0, sys, Operator::Zero(4, 4), rates, 0.0, 2e-3, StepControl{.samples = 9});
    const PairProjectors proj = electron_pair_projectors(sys);
    const double singlet_ss = rates.generation / 4 / (rates.r_singlet + rates.dissociation);
    const double tminus_ss = rates.generation / 4 / (rates.r_triplet + rates.dissociation);
    const Operator final_state = traj.final_state();
    CHECK(expectation(final_state, proj.singlet) ==
          doctest::Approx(singlet_ss).epsilon(1e-6));
    CHECK(expectation(final_state, proj.triplet_minus) ==
          doctest::Approx(tminus_ss).epsilon(1e-6));
}

TEST_CASE("affine combination of inputs propagates to the same combination") {
    const SpinSystem sys = SpinSystem::ce_db_pair();
    const KsmRates rates{1e7, 1e3, 1e4, 1e4};
    const Operator h =
        rotating_pair_hamiltonian(PairParams{2e8, 0.0, 1e7}, DriveParams{6e7, 45.0});
    const DensityMatrix r1 = DensityMatrix::pure(basis_ket(sys, {1, 1}));
    const DensityMatrix r2 = DensityMatrix::maximally_mixed(4);
    const double alpha = 0.3;

    const SegmentPropagator prop(sys, h, rates);
    const Operator left =
        prop.propagate(alpha * r1.matrix() + (1 - alpha) * r2.matrix(), 4e-7);
    const Operator right = alpha * prop.propagate(r1.matrix(), 4e-7) +
                           (1 - alpha) * prop.propagate(r2.matrix(), 4e-7);
    CHECK(max_abs(Operator(left - right)) <= 1e-8);
}

TEST_CASE("steady state") {
    const SpinSystem sys = SpinSystem::ce_db_pair();
    const KsmRates rates{1e7, 1e3, 1e4, 1e4};
    const PairProjectors proj = electron_pair_projectors(sys);

    SUBCASE("H = 0 closed form") {
        const DensityMatrix ss = steady_state(sys, Operator::Zero(4, 4), rates);
        const double singlet = rates.generation / 4 / (rates.r_singlet + rates.dissociation);
        const double triplet = rates.generation / 4 / (rates.r_triplet + rates.dissociation);
        CHECK(expectation(ss, proj.singlet) == doctest::Approx(singlet).epsilon(1e-12));
        CHECK(expectation(ss, proj.triplet_minus) == doctest::Approx(triplet).epsilon(1e-12));
        CHECK(expectation(ss, proj.triplet_zero) == doctest::Approx(triplet).epsilon(1e-12));
        // singlet : triplet population ratio = (r_T + d) : (r_S + d)
        const double ratio = expectation(ss, proj.singlet) / expectation(ss, proj.triplet_minus);
        CHECK(ratio == doctest::Approx((rates.r_triplet + rates.dissociation) /
                                       (rates.r_singlet + rates.dissociation))
                           .epsilon(1e-10));
    }

    SUBCASE("driving the db resonance increases steady-state recombination") {
        const Operator h_off =
            rotating_pair_hamiltonian(PairParams{2e8, 0.0, 0.0}, DriveParams{0.0, 0.0});
        const Operator h_on =
            rotating_pair_hamiltonian(PairParams{2e8, 0.0, 0.0},
                                      DriveParams{2.0 * std::numbers::pi * 1e7, 0.0});
        const double r_off = recombination_rate(steady_state(sys, h_off, rates), sys, rates);
        const double r_on = recombination_rate(steady_state(sys, h_on, rates), sys, rates);
        CHECK(r_on > r_off * 1.01);
    }

    SUBCASE("fixed point under evolution") {
        const Operator h =
            rotating_pair_hamiltonian(PairParams{1e8, 0.0, 0.0}, DriveParams{5e7, 0.0});
        const DensityMatrix ss = steady_state(sys, h, rates);
        const SegmentPropagator prop(sys, h, rates);
        CHECK(max_abs(Operator(prop.propagate(ss.matrix(), 1e-5) - ss.matrix())) <= 1e-8);
    }

    SUBCASE("preconditions") {
        CHECK_THROWS_AS(steady_state(sys, Operator::Zero(4, 4), KsmRates{0, 0, 0, 1e4}),
                        std::invalid_argument);
        CHECK_THROWS_AS(steady_state(sys, Operator::Zero(4, 4), KsmRates{1e7, 1e3, 1e4, 0}),
                        std::invalid_argument);
    }
}

TEST_CASE("recombination rate") {
    const SpinSystem sys = SpinSystem::ce_db_pair();
    const KsmRates rates{1e7, 1e3, 0.0, 0.0};
    const PairProjectors proj = electron_pair_projectors(sys);

    CHECK(recombination_rate(DensityMatrix::pure(basis_ket(sys, {1, 1})), sys, rates) ==
          doctest::Approx(rates.r_triplet).epsilon(1e-12));
    CHECK(recombination_rate(DensityMatrix::pure(singlet_ket(sys, 0, 1)), sys, rates) ==
          doctest::Approx(rates.r_singlet).epsilon(1e-12));
    CHECK(recombination_rate(DensityMatrix::maximally_mixed(4), sys, rates) ==
          doctest::Approx((rates.r_singlet + 3 * rates.r_triplet) / 4).epsilon(1e-12));
    (void)proj;
}

TEST_CASE("smooth schedules: midpoint stepping") {
    const SpinSystem sys = SpinSystem::ce_db_pair();
    // drive amplitude ramps linearly over the segment
    const double w1 = 2.0 * std::numbers::pi * 1e7;
    auto h_of_t = [&](double t) {
        return rotating_pair_hamiltonian(PairParams{0, 0, 0},
                                         DriveParams{w1 * (t / 1e-6), 0.0});
    };
    const DensityMatrix rho0 = DensityMatrix::pure(basis_ket(sys, {1, 1}));

    SUBCASE("step halving changes the endpoint by < 1e-8") {
        StepControl ctrl;
        ctrl.samples = 3;
        const Trajectory a = evolve(rho0, sys, h_of_t, KsmRates{}, 0.0, 1e-6, ctrl);
        StepControl fine = ctrl;
        fine.phase_budget = 0.5 * ctrl.phase_budget;
        const Trajectory b = evolve(rho0, sys, h_of_t, KsmRates{}, 0.0, 1e-6, fine);
        CHECK(max_abs(Operator(a.final_state() - b.final_state())) <= 1e-8);
    }

    SUBCASE("built-in self-check accepts the default step") {
        StepControl ctrl;
        ctrl.samples = 3;
        ctrl.self_check = true;
        CHECK_NOTHROW(evolve(rho0, sys, h_of_t, KsmRates{}, 0.0, 1e-6, ctrl));
    }

    SUBCASE("minimum-step failure reports the time") {
        StepControl ctrl;
        ctrl.min_step = 1.0;  // absurdly coarse floor
        CHECK_THROWS_AS(evolve(rho0, sys, h_of_t, KsmRates{}, 0.0, 1e-6, ctrl),
                        NumericalError);
    }
}

TEST_CASE("rates validation") {
    CHECK_THROWS_AS(KsmRates{1e3, 1e7, 0, 0}.validate(), std::invalid_argument);
    CHECK_THROWS_AS(KsmRates{-1, 0, 0, 0}.validate(), std::invalid_argument);
    CHECK_NOTHROW(KsmRates{1e7, 1e3, 1e4, 1e4}.validate());
}
