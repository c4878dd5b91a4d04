#include <doctest.h>

#include <cmath>

#include "rsmerton/model.hpp"
#include "rsmerton/rng.hpp"
#include "test_support.hpp"

using namespace rsm;

namespace {

bool has_fault(const std::vector<ModelViolation>& violations, ModelFault fault) {
    for (const auto& v : violations)
        if (v.fault == fault) return true;
    return false;
}

}  // namespace

TEST_CASE("two-regime bull/bear model validates") {
    const MarketModel model = test::two_state_model();
    CHECK(check_model(model).empty());
    CHECK_NOTHROW(validate_model(model));
    // idempotent
    CHECK_NOTHROW(validate_model(validate_model(model)));
}

TEST_CASE("degenerate single regime validates") {
    const MarketModel model = test::single_state_model();
    CHECK(check_model(model).empty());
}

TEST_CASE("absorbing state is allowed") {
    // q_1 = 0 is the Merton baseline of the q1 -> 0 sweep; it must validate
    MarketModel model = test::two_state_model();
    model.generator = GeneratorMatrix::two_state(0.0, 30.0);
    CHECK(check_model(model).empty());
}

TEST_CASE("non-conservative generator rows are rejected") {
    MarketModel model = test::two_state_model();
    model.generator.q = {1.0, 0.0, 30.0, -30.0};  // row sums (1, 0)
    const auto violations = check_model(model);
    CHECK(has_fault(violations, ModelFault::NonConservativeGenerator));
    CHECK_THROWS_AS(validate_model(model), ValidationError);
}

TEST_CASE("negative rates are rejected") {
    MarketModel model = test::two_state_model();
    model.generator.q = {2.0, -2.0, 30.0, -30.0};  // negative off-diagonal
    CHECK(has_fault(check_model(model), ModelFault::NegativeRate));

    model = test::two_state_model();
    model.sigma[0] = 0.0;
    CHECK(has_fault(check_model(model), ModelFault::NegativeRate));

    model = test::two_state_model();
    model.r[1] = -0.01;
    CHECK(has_fault(check_model(model), ModelFault::NegativeRate));
}

TEST_CASE("gamma outside (-inf,1)\\{0} is rejected") {
    MarketModel model = test::two_state_model();
    model.gamma = 0.0;
    CHECK(has_fault(check_model(model), ModelFault::InvalidGamma));
    model.gamma = 1.0;
    CHECK(has_fault(check_model(model), ModelFault::InvalidGamma));
    model.gamma = 1.7;
    CHECK(has_fault(check_model(model), ModelFault::InvalidGamma));
    model.gamma = -3.0;
    CHECK(check_model(model).empty());
}

TEST_CASE("dimension mismatches are rejected") {
    MarketModel model = test::two_state_model();
    model.mu = {0.5};
    CHECK(has_fault(check_model(model), ModelFault::DimensionMismatch));
}

TEST_CASE("every violation is reported, not just the first") {
    MarketModel model = test::two_state_model();
    model.generator.q = {2.0, -1.0, 30.0, -30.0};  // row 1 sums to 1, q12 < 0
    model.sigma[0] = 0.0;
    model.gamma = 0.0;
    const auto violations = check_model(model);
    CHECK(has_fault(violations, ModelFault::NonConservativeGenerator));
    CHECK(has_fault(violations, ModelFault::NegativeRate));
    CHECK(has_fault(violations, ModelFault::InvalidGamma));
    CHECK(violations.size() >= 4);  // row sum, q12 < 0, sigma, gamma

    try {
        validate_model(model);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.violations().size() == violations.size());
    }
}

TEST_CASE("regime scalars of the bull regime") {
    // delta(1) = -0.1 [0.45^2 / (2 * 0.9 * 0.09) + 0.05] = -0.13
    const MarketModel model = test::two_state_model(0.1);
    const RegimeScalars s = regime_scalars(model);
    CHECK(s.sharpe[0] == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(s.delta[0] == doctest::Approx(-0.13).epsilon(1e-13));
    // independent evaluation from the raw ingredients
    const double phi = (0.5 - 0.05) / 0.3;
    const double expected = -0.1 * (phi * phi / (2.0 * (1.0 - 0.1)) + 0.05);
    CHECK(s.delta[0] == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("zero excess return") {
    MarketModel model = test::two_state_model(0.3);
    model.mu = {0.05, 0.05};
    const RegimeScalars s = regime_scalars(model);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(s.sharpe[i] == 0.0);
        CHECK(s.delta[i] == doctest::Approx(-0.3 * 0.05).epsilon(1e-15));
    }
}

TEST_CASE("delta vanishes when mu = r and r -> 0 limit") {
    // validation requires r > 0; the scalar formula itself is exact at r = 0
    MarketModel model = test::single_state_model(-0.7);
    model.mu = {1e-12};
    model.r = {1e-12};
    const RegimeScalars s = regime_scalars(model);
    CHECK(std::abs(s.delta[0]) <= 1e-12);
    CHECK(s.sharpe[0] == 0.0);
}

TEST_CASE("delta depends on (mu - r)/sigma only through the Sharpe ratio") {
    PathRng rng(2024, 7);
    for (int trial = 0; trial < 50; ++trial) {
        const MarketModel model = test::random_model(rng, 1 + static_cast<std::size_t>(rng.next_u64() % 4));
        const RegimeScalars s = regime_scalars(model);
        // rescale sigma and move mu so the Sharpe ratio is unchanged
        MarketModel scaled = model;
        for (std::size_t i = 0; i < model.regimes(); ++i) {
            const double new_sigma = model.sigma[i] * (0.5 + rng.next_uniform());
            scaled.sigma[i] = new_sigma;
            scaled.mu[i] = model.r[i] + s.sharpe[i] * new_sigma;
        }
        const RegimeScalars s2 = regime_scalars(scaled);
        for (std::size_t i = 0; i < model.regimes(); ++i) {
            CHECK(s2.sharpe[i] == doctest::Approx(s.sharpe[i]).epsilon(1e-12));
            CHECK(s2.delta[i] == doctest::Approx(s.delta[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("delta sign matches the sign of -gamma") {
    PathRng rng(77, 0);
    for (int trial = 0; trial < 100; ++trial) {
        MarketModel model = test::random_model(rng, 2);
        model.gamma = trial % 2 == 0 ? 0.05 + 0.9 * rng.next_uniform()
                                     : -2.0 * rng.next_uniform() - 0.01;
        const RegimeScalars s = regime_scalars(model);
        for (std::size_t i = 0; i < 2; ++i) {
            if (model.gamma > 0.0)
                CHECK(s.delta[i] < 0.0);
            else
                CHECK(s.delta[i] > 0.0);
        }
    }
}
