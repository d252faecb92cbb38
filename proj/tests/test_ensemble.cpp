#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sdr/ensemble.hpp"

using namespace sdr;

TEST_CASE("gauss-hermite nodes integrate gaussian moments") {
    std::vector<double> t, w;
    gauss_hermite(21, t, w);
    double m0 = 0, m2 = 0, m4 = 0;
    for (int k = 0; k < 21; ++k) {
        m0 += w[k];
        m2 += w[k] * t[k] * t[k];
        m4 += w[k] * std::pow(t[k], 4);
    }
    const double sqrt_pi = std::sqrt(std::numbers::pi);
    CHECK(m0 == doctest::Approx(sqrt_pi).epsilon(1e-12));
    CHECK(m2 == doctest::Approx(0.5 * sqrt_pi).epsilon(1e-12));
    CHECK(m4 == doctest::Approx(0.75 * sqrt_pi).epsilon(1e-12));
}

TEST_CASE("ensemble construction") {
    SUBCASE("single node sits at the mean") {
        BroadeningSpec spec;
        spec.sigma_detuning_b = 2e7;
        spec.n_nodes = 1;
        const auto members = build_ensemble(spec);
        REQUIRE(members.size() == 1);
        CHECK(members[0].detuning_b == 0.0);
        CHECK(members[0].rabi_scale == 1.0);
        CHECK(members[0].weight == doctest::Approx(1.0).epsilon(1e-15));
    }

    SUBCASE("zero sigmas collapse to one member regardless of n_nodes") {
        BroadeningSpec spec;
        spec.n_nodes = 21;
        CHECK(build_ensemble(spec).size() == 1);
        spec.scheme = BroadeningScheme::MonteCarlo;
        CHECK(build_ensemble(spec).size() == 1);
    }

    SUBCASE("quadrature mean and variance at 21 nodes") {
        BroadeningSpec spec;
        spec.sigma_detuning_b = 3.7e7;
        spec.n_nodes = 21;
        const auto members = build_ensemble(spec);
        double wsum = 0, mean = 0, var = 0;
        for (const auto& m : members) {
            wsum += m.weight;
            mean += m.weight * m.detuning_b;
        }
        for (const auto& m : members) var += m.weight * std::pow(m.detuning_b - 0.0, 2);
        CHECK(std::abs(wsum - 1.0) <= 1e-12);
        CHECK(std::abs(mean) <= 1e-12 * spec.sigma_detuning_b);
        CHECK(var == doctest::Approx(spec.sigma_detuning_b * spec.sigma_detuning_b)
                         .epsilon(1e-10));
    }

    SUBCASE("deterministic construction") {
        BroadeningSpec spec;
        spec.sigma_detuning_a = 1e6;
        spec.sigma_rabi_rel = 0.2;
        spec.n_nodes = 9;
        const auto a = build_ensemble(spec);
        const auto b = build_ensemble(spec);
        REQUIRE(a.size() == b.size());
        for (size_t k = 0; k < a.size(); ++k) {
            CHECK(a[k].detuning_a == b[k].detuning_a);
            CHECK(a[k].rabi_scale == b[k].rabi_scale);
            CHECK(a[k].weight == b[k].weight);
        }
    }

    SUBCASE("monte carlo is seeded and reproducible") {
        BroadeningSpec spec;
        spec.sigma_rabi_rel = 0.2;
        spec.n_nodes = 100;
        spec.scheme = BroadeningScheme::MonteCarlo;
        spec.seed = 42;
        const auto a = build_ensemble(spec);
        const auto b = build_ensemble(spec);
        REQUIRE(a.size() == 100);
        for (size_t k = 0; k < a.size(); ++k) CHECK(a[k].rabi_scale == b[k].rabi_scale);
        spec.seed = 43;
        const auto c = build_ensemble(spec);
        CHECK(a[0].rabi_scale != c[0].rabi_scale);
    }

    SUBCASE("tensor grid overflow") {
        BroadeningSpec spec;
        spec.sigma_detuning_a = 1e6;
        spec.sigma_detuning_b = 1e6;
        spec.sigma_rabi_rel = 0.1;
        spec.n_nodes = 101;  // 101^3 > 1e6
        CHECK_THROWS_AS(build_ensemble(spec), std::invalid_argument);
    }
}

TEST_CASE("ensemble averages") {
    SUBCASE("single member is the identity") {
        std::vector<EnsembleMember> members{{0, 0, 1.0, 1.0}};
        const std::vector<std::vector<double>> series{{1.0, 2.0, 3.0}};
        CHECK(ensemble_average(members, series) == series[0]);
    }

    SUBCASE("two members at half weight") {
        std::vector<EnsembleMember> members{{0, 0, 1.0, 0.5}, {0, 0, 1.0, 0.5}};
        const std::vector<std::vector<double>> series{{0.0, 0.0}, {2.0, 4.0}};
        const auto avg = ensemble_average(members, series);
        CHECK(avg[0] == doctest::Approx(1.0));
        CHECK(avg[1] == doctest::Approx(2.0));
    }

    SUBCASE("grid mismatch") {
        std::vector<EnsembleMember> members{{0, 0, 1.0, 0.5}, {0, 0, 1.0, 0.5}};
        const std::vector<std::vector<double>> series{{0.0, 0.0}, {2.0}};
        CHECK_THROWS_AS(ensemble_average(members, series), std::invalid_argument);
    }
}

TEST_CASE("splitmix streams are order independent") {
    const auto a = SplitMix64::stream(7, 1, 5, 9);
    const auto b = SplitMix64::stream(7, 1, 5, 9);
    SplitMix64 x = a, y = b;
    CHECK(x.next() == y.next());
    SplitMix64 z = SplitMix64::stream(7, 1, 5, 10);
    SplitMix64 w = SplitMix64::stream(7, 1, 5, 9);
    CHECK(z.next() != w.next());
}
