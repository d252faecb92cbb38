#include <doctest.h>

#include "sdr/spin_algebra.hpp"

using namespace sdr;
using Eigen::VectorXcd;

namespace {
const double kTol = 1e-13;
}

TEST_CASE("spin operators on the pair space") {
    const SpinSystem sys = SpinSystem::ce_db_pair();

    SUBCASE("S_z on site 0 is diag(+1/2,+1/2,-1/2,-1/2)") {
        const Operator sz = spin_operator(sys, 0, Axis::Z);
        Operator expect = Operator::Zero(4, 4);
        expect(0, 0) = 0.5;
        expect(1, 1) = 0.5;
        expect(2, 2) = -0.5;
        expect(3, 3) = -0.5;
        CHECK(max_abs(Operator(sz - expect)) < kTol);
    }

    SUBCASE("squares to I/4, Hermitian, traceless") {
        for (int site = 0; site < 2; ++site)
            for (Axis ax : {Axis::X, Axis::Y, Axis::Z}) {
                const Operator s = spin_operator(sys, site, ax);
                CHECK(max_abs(Operator(s - s.adjoint())) < kTol);
                CHECK(std::abs(s.trace()) < kTol);
                CHECK(max_abs(Operator(s * s - 0.25 * Operator::Identity(4, 4))) < kTol);
            }
    }

    SUBCASE("angular momentum algebra [Sx, Sy] = i Sz") {
        for (int site = 0; site < 2; ++site) {
            const Operator sx = spin_operator(sys, site, Axis::X);
            const Operator sy = spin_operator(sys, site, Axis::Y);
            const Operator sz = spin_operator(sys, site, Axis::Z);
            CHECK(max_abs(Operator(sx * sy - sy * sx - complex(0, 1) * sz)) < kTol);
        }
    }

    SUBCASE("site out of range") {
        CHECK_THROWS_AS(spin_operator(sys, 2, Axis::X), std::out_of_range);
    }
}

TEST_CASE("pair projectors") {
    const SpinSystem sys = SpinSystem::ce_db_pair();
    const PairProjectors p = pair_projectors(sys, 0, 1);

    SUBCASE("|down,down> is pure triplet") {
        const VectorXcd dd = basis_ket(sys, {1, 1});
        CHECK(std::abs(dd.dot(p.singlet * dd)) < kTol);
        CHECK(std::real(dd.dot(p.triplet_minus * dd)) == doctest::Approx(1.0).epsilon(1e-13));
    }

    SUBCASE("trace and completeness") {
        CHECK(p.singlet.trace().real() == doctest::Approx(1.0).epsilon(1e-14));
        const Operator sum =
            p.singlet + p.triplet_plus + p.triplet_zero + p.triplet_minus;
        CHECK(max_abs(Operator(sum - Operator::Identity(4, 4))) <= 1e-14);
    }

    SUBCASE("singlet ket is an eigenvector") {
        const VectorXcd s = singlet_ket(sys, 0, 1);
        CHECK(std::real(s.dot(p.singlet * s)) == doctest::Approx(1.0).epsilon(1e-13));
    }

    SUBCASE("idempotence") {
        for (const Operator* proj :
             {&p.singlet, &p.triplet_plus, &p.triplet_zero, &p.triplet_minus})
            CHECK(max_abs(Operator(*proj * *proj - *proj)) <= 1e-12);
    }

    SUBCASE("agrees with (1/4)I - Sa.Sb") {
        const Operator route2 = 0.25 * Operator::Identity(4, 4) - spin_dot(sys, 0, 1);
        CHECK(max_abs(Operator(route2 - p.singlet)) <= 1e-14);
    }

    SUBCASE("identical sites rejected") {
        CHECK_THROWS_AS(pair_projectors(sys, 1, 1), std::invalid_argument);
    }
}

TEST_CASE("projectors embed into the readout triple") {
    const SpinSystem sys = SpinSystem::donor_readout_triple();
    const PairProjectors p = pair_projectors(sys, 0, 1);

    const Operator sum = p.singlet + p.triplet_plus + p.triplet_zero + p.triplet_minus;
    CHECK(max_abs(Operator(sum - Operator::Identity(8, 8))) <= 1e-14);
    CHECK(p.singlet.trace().real() == doctest::Approx(2.0).epsilon(1e-14));

    const Operator route2 = 0.25 * Operator::Identity(8, 8) - spin_dot(sys, 0, 1);
    CHECK(max_abs(Operator(route2 - p.singlet)) <= 1e-14);

    // nucleus must be rejected as a pair site
    CHECK_THROWS_AS(pair_projectors(sys, 0, 2), std::invalid_argument);
}

TEST_CASE("expectation values") {
    const SpinSystem sys = SpinSystem::ce_db_pair();
    const PairProjectors p = pair_projectors(sys, 0, 1);

    SUBCASE("pure |T-> against P_T-") {
        const DensityMatrix rho = DensityMatrix::pure(basis_ket(sys, {1, 1}));
        CHECK(expectation(rho, p.triplet_minus) == doctest::Approx(1.0).epsilon(1e-13));
    }

    SUBCASE("maximally mixed against P_S") {
        CHECK(expectation(DensityMatrix::maximally_mixed(4), p.singlet) ==
              doctest::Approx(0.25).epsilon(1e-13));
    }

    SUBCASE("|T-> against Sz_a + Sz_b") {
        const DensityMatrix rho = DensityMatrix::pure(basis_ket(sys, {1, 1}));
        const Operator sz = spin_operator(sys, 0, Axis::Z) + spin_operator(sys, 1, Axis::Z);
        CHECK(expectation(rho, sz) == doctest::Approx(-1.0).epsilon(1e-13));
    }

    SUBCASE("dimension mismatch and non-Hermitian observables throw") {
        const DensityMatrix rho = DensityMatrix::maximally_mixed(4);
        CHECK_THROWS_AS(expectation(rho, Operator::Identity(8, 8)), std::invalid_argument);
        Operator bad = Operator::Zero(4, 4);
        bad(0, 1) = 1.0;  // not Hermitian
        CHECK_THROWS_AS(expectation(rho, bad), std::invalid_argument);
    }
}

TEST_CASE("density matrix validation") {
    CHECK_THROWS_AS(DensityMatrix(2.0 * Operator::Identity(4, 4)), std::invalid_argument);

    Operator nonherm = Operator::Zero(4, 4);
    nonherm(0, 1) = 0.5;
    CHECK_THROWS_AS(DensityMatrix(nonherm), std::invalid_argument);

    Operator negative = Operator::Zero(4, 4);
    negative(0, 0) = 1.5;
    negative(1, 1) = -0.5;
    CHECK_THROWS_AS(DensityMatrix(negative), std::invalid_argument);

    // trace < 1 is legal: it encodes pairs already lost
    Operator half = Operator::Zero(4, 4);
    half(3, 3) = 0.5;
    CHECK_NOTHROW(DensityMatrix(half));
}

TEST_CASE("system construction rules") {
    CHECK_THROWS_AS(SpinSystem({SiteRole::ElectronCe, SiteRole::ElectronCe}),
                    std::invalid_argument);
    CHECK(SpinSystem::ce_db_pair().dim() == 4);
    CHECK(SpinSystem::donor_readout_triple().dim() == 8);
    CHECK(SpinSystem::donor_readout_triple().site_with_role(SiteRole::NucleusP) == 2);
}
