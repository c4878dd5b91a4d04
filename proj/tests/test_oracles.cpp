#include <doctest.h>

#include <array>
#include <cmath>

#include "rsmerton/oracles.hpp"
#include "rsmerton/model.hpp"
#include "test_support.hpp"

using namespace rsm;

TEST_CASE("ode_g reproduces the two-regime reference values") {
    const MarketModel model = test::two_state_model(0.1);
    const auto g = ode_g(model, 0.5, 20000);
    CHECK(g[0] == doctest::Approx(1.0419994).epsilon(1e-7));
    CHECK(g[1] == doctest::Approx(1.0394098).epsilon(1e-7));
}

TEST_CASE("ode_g at tau = 0 returns ones") {
    const auto g = ode_g(test::three_state_model(0.5), 0.0, 10);
    for (double v : g) CHECK(v == 1.0);
}

TEST_CASE("ode_g single regime equals the scalar exponential") {
    // delta = -0.13, so g(0.5) = exp(0.065)
    const auto g = ode_g(test::single_state_model(0.1), 0.5, 20000);
    CHECK(g[0] == doctest::Approx(std::exp(0.065)).epsilon(1e-12));
}

TEST_CASE("ode_g converges at fourth order") {
    const MarketModel model = test::two_state_model(0.9);
    const auto exact = matexp_g(model, 0.5);
    auto err = [&](int steps) {
        const auto g = ode_g(model, 0.5, steps);
        return std::max(std::abs(g[0] - exact[0]), std::abs(g[1] - exact[1]));
    };
    const double ratio = err(50) / err(100);
    CHECK(ratio > 10.0);
    CHECK(ratio < 24.0);
}

TEST_CASE("matexp_g at tau = 0 is the identity") {
    const auto g = matexp_g(test::two_state_model(0.3), 0.0);
    for (double v : g) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("matexp_g reproduces the three-regime reference values") {
    const auto g = matexp_g(test::three_state_model(0.1), 0.5);
    CHECK(g[0] == doctest::Approx(1.0241558).epsilon(1e-7));
    CHECK(g[1] == doctest::Approx(1.0221445).epsilon(1e-7));
    CHECK(g[2] == doctest::Approx(1.0195109).epsilon(1e-7));
}

TEST_CASE("matexp_g decouples regimes when the generator is zero") {
    MarketModel model = test::two_state_model(0.3);
    model.generator = GeneratorMatrix{2, {0.0, 0.0, 0.0, 0.0}};
    const RegimeScalars s = regime_scalars(model);
    const auto g = matexp_g(model, 0.7);
    CHECK(g[0] == doctest::Approx(std::exp(-s.delta[0] * 0.7)).epsilon(1e-13));
    CHECK(g[1] == doctest::Approx(std::exp(-s.delta[1] * 0.7)).epsilon(1e-13));
}

TEST_CASE("matexp_g agrees with ode_g on the reference models") {
    for (double gamma : {0.1, 0.9}) {
        for (const MarketModel& model :
             {test::two_state_model(gamma), test::three_state_model(gamma)}) {
            for (double tau : {0.1, 0.5, 1.0}) {
                const auto a = matexp_g(model, tau);
                const auto b = ode_g(model, tau, 20000);
                for (std::size_t i = 0; i < model.regimes(); ++i)
                    CHECK(std::abs(a[i] - b[i]) / std::abs(b[i]) <= 1e-9);
            }
        }
    }
}

TEST_CASE("single-regime chain never jumps") {
    const MarketModel model = test::single_state_model();
    PathRng rng(1, 0);
    const ChainPath path = simulate_chain(model, 0, 10.0, rng);
    CHECK(path.jump_times.empty());
    CHECK(path.states == std::vector<int>{0});
}

TEST_CASE("absorbing state ends the path") {
    MarketModel model = test::two_state_model();
    model.generator = GeneratorMatrix::two_state(20.0, 0.0);  // regime 2 absorbing
    bool absorbed = false;
    for (int k = 0; k < 200 && !absorbed; ++k) {
        PathRng path_rng(7, static_cast<std::uint64_t>(k));
        const ChainPath path = simulate_chain(model, 0, 5.0, path_rng);
        if (!path.jump_times.empty()) {
            CHECK(path.states.back() == 1);
            CHECK(path.jump_times.size() == 1);  // no exit from the absorbing state
            absorbed = true;
        }
    }
    CHECK(absorbed);
}

TEST_CASE("holding times from state 1 are Exp(20)") {
    const MarketModel model = test::two_state_model();
    const long n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (long k = 0; k < n; ++k) {
        PathRng rng(9001, static_cast<std::uint64_t>(k));
        const ChainPath path = simulate_chain(model, 0, 10.0, rng);
        REQUIRE(!path.jump_times.empty());  // P(no jump in 10) = e^{-200}
        const double hold = path.jump_times[0];
        sum += hold;
        sum_sq += hold * hold;
    }
    const double mean = sum / n;
    const double var = (sum_sq - n * mean * mean) / (n - 1);
    const double se = std::sqrt(var / n);
    CHECK(std::abs(mean - 1.0 / 20.0) <= 3.0 * se);
}

TEST_CASE("successor regimes follow q_ij / q_i") {
    const MarketModel model = test::three_state_model();
    const long n = 100000;
    long to_regime2 = 0;
    for (long k = 0; k < n; ++k) {
        PathRng rng(5150, static_cast<std::uint64_t>(k));
        const ChainPath path = simulate_chain(model, 0, 10.0, rng);
        REQUIRE(path.states.size() >= 2);
        if (path.states[1] == 1) ++to_regime2;
    }
    // q_12 / q_1 = 1/20
    const double p = 1.0 / 20.0;
    const double se = std::sqrt(p * (1.0 - p) / n);
    CHECK(std::abs(static_cast<double>(to_regime2) / n - p) <= 3.0 * se);
}

TEST_CASE("mean jump count matches the counting-process oracle") {
    // test-side oracle: integrate p' = Q^T p, n' = sum_i p_i q_i with plain RK4
    const MarketModel model = test::two_state_model();
    const double tau = 0.5;
    std::array<double, 3> y{1.0, 0.0, 0.0};  // p1, p2, expected jumps
    auto deriv = [](const std::array<double, 3>& v) {
        return std::array<double, 3>{-20.0 * v[0] + 30.0 * v[1], 20.0 * v[0] - 30.0 * v[1],
                                     20.0 * v[0] + 30.0 * v[1]};
    };
    const int steps = 20000;
    const double h = tau / steps;
    for (int s = 0; s < steps; ++s) {
        const auto k1 = deriv(y);
        std::array<double, 3> t2, t3, t4;
        for (int i = 0; i < 3; ++i) t2[i] = y[i] + 0.5 * h * k1[i];
        const auto k2 = deriv(t2);
        for (int i = 0; i < 3; ++i) t3[i] = y[i] + 0.5 * h * k2[i];
        const auto k3 = deriv(t3);
        for (int i = 0; i < 3; ++i) t4[i] = y[i] + h * k3[i];
        const auto k4 = deriv(t4);
        for (int i = 0; i < 3; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    const double expected_jumps = y[2];
    CHECK(expected_jumps == doctest::Approx(11.92).epsilon(1e-3));  // hand integration

    const long n = 200000;
    double sum = 0.0, sum_sq = 0.0;
    for (long k = 0; k < n; ++k) {
        PathRng rng(24601, static_cast<std::uint64_t>(k));
        const double jumps =
            static_cast<double>(simulate_chain(model, 0, tau, rng).jump_times.size());
        sum += jumps;
        sum_sq += jumps * jumps;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq - n * mean * mean) / (n - 1) / n);
    CHECK(std::abs(mean - expected_jumps) <= 3.0 * se);
}

TEST_CASE("mc_g at tau = 0 is exactly one with zero error") {
    const PathEstimate est = mc_g(test::two_state_model(), 0, 0.0, 5000, 11);
    CHECK(est.mean == 1.0);
    CHECK(est.std_error == 0.0);
}

TEST_CASE("mc_g single regime is deterministic") {
    const MarketModel model = test::single_state_model(0.1);
    const RegimeScalars s = regime_scalars(model);
    const double tau = 0.5;
    const PathEstimate est = mc_g(model, 0, tau, 4000, 17);
    CHECK(est.mean == std::exp(-(s.delta[0] * tau)));  // identical samples
    CHECK(est.std_error == 0.0);
}

TEST_CASE("mc_g brackets the transform solution on the bull/bear model") {
    const MarketModel model = test::two_state_model(0.1);
    const auto exact = matexp_g(model, 0.5);
    for (int i = 0; i < 2; ++i) {
        const PathEstimate est = mc_g(model, i, 0.5, 100000, 555);
        CHECK(std::abs(est.mean - exact[static_cast<std::size_t>(i)]) <= 3.0 * est.std_error);
    }
}

TEST_CASE("mc_g is reproducible and worker-count invariant") {
    const MarketModel model = test::two_state_model(0.3);
    const PathEstimate a = mc_g(model, 0, 0.5, 20017, 99, 1);
    const PathEstimate b = mc_g(model, 0, 0.5, 20017, 99, 3);
    const PathEstimate c = mc_g(model, 0, 0.5, 20017, 99, 2);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    CHECK(a.mean == c.mean);

    const PathEstimate other = mc_g(model, 0, 0.5, 20017, 100);
    CHECK(a.mean != other.mean);
}

TEST_CASE("single-path estimate reports NaN standard error") {
    const PathEstimate est = mc_g(test::two_state_model(), 0, 0.5, 1, 4);
    CHECK(std::isnan(est.std_error));
}
