#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "vibronic/model.hpp"
#include "vibronic/wavefunction.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace vibronic;

TEST_CASE("chain params invariants") {
    ChainParams p;
    p.L = 1;
    CHECK_THROWS_AS(p.validate(), invalid_parameter);
    p.L = 2;
    p.nu_max = -1;
    CHECK_THROWS_AS(p.validate(), invalid_parameter);
    p.nu_max = 3;
    p.omega = 0.0;
    CHECK_THROWS_AS(p.validate(), invalid_parameter);
    p.omega = 2.0;
    p.g = 3.0;
    CHECK_NOTHROW(p.validate());
    CHECK(p.huang_rhys() == doctest::Approx(2.25).epsilon(1e-15));
    CHECK(p.displacement() == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("franck-condon initial state") {
    ChainParams p;
    p.L = 3;
    auto psi = build_fc_initial_state(p, 1);
    REQUIRE(psi.size() == 1);
    auto bs = psi.support().state(0);
    CHECK(bs.exciton_site == 1);
    CHECK(bs.phonons == std::vector<std::uint8_t>{0, 0, 0});
    CHECK(psi.amplitudes()[0] == complex{1.0, 0.0});
    CHECK(psi.norm2() == 1.0);
    CHECK(psi.leak() == 0.0);

    CHECK_THROWS_AS(build_fc_initial_state(p, 3), invalid_parameter);
    CHECK_THROWS_AS(build_fc_initial_state(p, -1), invalid_parameter);

    ChainParams nine;
    nine.L = 9;
    CHECK(central_site(nine) == 4);
    auto center = build_fc_initial_state(nine, central_site(nine));
    CHECK(center.support().site(0) == 4);
}

TEST_CASE("fc overlap is a normalized Poisson amplitude") {
    ChainParams p;
    p.g = 0.0;
    CHECK(fc_overlap(0, p) == complex{1.0, 0.0});
    CHECK(fc_overlap(3, p) == complex{0.0, 0.0});

    for (double g : {0.5, 1.0, 2.0, 4.0}) {
        p.g = g;
        const double S = p.huang_rhys();
        const int K = static_cast<int>(10 * S + 20);
        double sum = 0.0;
        for (int nu = 0; nu <= K; ++nu) sum += std::norm(fc_overlap(nu, p));
        CHECK(1.0 - sum < 1e-10);
        CHECK(sum <= 1.0 + 1e-12);

        // Independent Poisson weights e^{-S} S^n / n! by recursion.
        double w = std::exp(-S);
        for (int nu = 0; nu <= 40; ++nu) {
            CHECK(std::norm(fc_overlap(nu, p)) == doctest::Approx(w).epsilon(1e-12));
            w *= S / (nu + 1);
        }

        // Adaptive truncation: stop once the Poisson tail is negligible.
        double adaptive = 0.0;
        for (int nu = 0;; ++nu) {
            const double t = std::norm(fc_overlap(nu, p));
            adaptive += t;
            if (nu > S && t < 1e-18) break;
        }
        CHECK(std::abs(adaptive - 1.0) < 1e-12);
    }
}

TEST_CASE("fc overlap mode for g = 4") {
    ChainParams p;
    p.g = 4.0;
    std::vector<double> w;
    for (int nu = 0; nu <= 80; ++nu) w.push_back(std::norm(fc_overlap(nu, p)));
    const auto it = std::max_element(w.begin(), w.end());
    // Integer mean S = 16: nu' = 15 and 16 carry equal weight (ratio S/16 = 1).
    CHECK(w[16] == doctest::Approx(*it).epsilon(1e-12));
    CHECK(w[15] == doctest::Approx(w[16]).epsilon(1e-12));
    CHECK(w[16] > w[17]);
    CHECK(w[15] > w[14]);
}

TEST_CASE("fc overlap sign follows alpha") {
    ChainParams p;
    p.g = -1.0;
    CHECK(fc_overlap(1, p).real() < 0.0);
    CHECK(fc_overlap(2, p).real() > 0.0);
    CHECK_THROWS_AS(fc_overlap(-1, p), invalid_parameter);
}

TEST_CASE("diagonal energy examples") {
    ChainParams p;
    p.L = 2;
    p.delta_eps = 0.37;
    CHECK(state_energy_diagonal(BasisState{0, {0, 0}}, p) == doctest::Approx(1.0));
    p.delta_eps = 0.5;
    CHECK(state_energy_diagonal(BasisState{1, {0, 0}}, p) == doctest::Approx(1.5));
    p.L = 3;
    p.delta_eps = 1.0;
    CHECK(state_energy_diagonal(BasisState{2, {2, 0, 1}}, p) == doctest::Approx(6.5));
}

TEST_CASE("diagonal energy matches literal summation") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        ChainParams p;
        p.L = 2 + static_cast<int>(rng() % 10);
        p.nu_max = 9;
        p.omega = 0.5 + (rng() % 100) / 50.0;
        p.delta_eps = ((rng() % 200) / 100.0) - 1.0;
        BasisState bs{static_cast<int>(rng() % p.L), std::vector<std::uint8_t>(p.L)};
        double expected = p.delta_eps * bs.exciton_site;
        for (int j = 0; j < p.L; ++j) {
            bs.phonons[j] = static_cast<std::uint8_t>(rng() % 10);
            expected += p.omega * (bs.phonons[j] + 0.5);
        }
        CHECK(state_energy_diagonal(bs, p) == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("basis state canonical order") {
    std::vector<BasisState> states{{1, {0, 0}}, {0, {1, 0}}, {0, {0, 2}}, {1, {0, 1}}, {0, {0, 0}}};
    std::sort(states.begin(), states.end());
    CHECK(states.front() == BasisState{0, {0, 0}});
    CHECK(states[1] == BasisState{0, {0, 2}});
    CHECK(states.back() == BasisState{1, {0, 1}});
}

TEST_CASE("state validation") {
    ChainParams p;
    p.L = 3;
    p.nu_max = 2;
    CHECK_NOTHROW(validate_state(BasisState{2, {2, 0, 1}}, p));
    CHECK_THROWS_AS(validate_state(BasisState{3, {0, 0, 0}}, p), invalid_parameter);
    CHECK_THROWS_AS(validate_state(BasisState{0, {3, 0, 0}}, p), invalid_parameter);
    CHECK_THROWS_AS(validate_state(BasisState{0, {0, 0}}, p), invalid_parameter);
}
