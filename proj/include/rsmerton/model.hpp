#ifndef RSMERTON_MODEL_HPP
#define RSMERTON_MODEL_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsm {

// Absolute tolerance on generator row sums. Rows are never renormalized;
// a violation is reported as an error.
inline constexpr double kRowSumTolerance = 1e-12;

/// Transition-rate matrix of the modulating Markov chain.
/// Off-diagonal entries are jump rates (>= 0), rows sum to zero, and the
/// diagonal holds the negated exit rates. A zero exit rate marks an
/// absorbing state (the single-regime case is the Merton baseline).
struct GeneratorMatrix {
    std::size_t m = 0;        // number of regimes
    std::vector<double> q;    // row-major m x m rate matrix

    double operator()(std::size_t i, std::size_t j) const { return q[i * m + j]; }
    double& operator()(std::size_t i, std::size_t j) { return q[i * m + j]; }

    // exit rate q_i = -q_ii
    double exit_rate(std::size_t i) const { return -(*this)(i, i); }

    static GeneratorMatrix single();                        // m = 1, no switching
    static GeneratorMatrix two_state(double q1, double q2);
};

/// Market parameters of the regime-switching bond/stock problem:
/// per-regime short rate, asset return rate and volatility, plus the
/// power-utility exponent gamma (gamma < 1, gamma != 0).
struct MarketModel {
    GeneratorMatrix generator;
    std::vector<double> r;      // risk-free rate per regime
    std::vector<double> mu;     // asset return rate per regime
    std::vector<double> sigma;  // volatility per regime
    double gamma = 0.0;

    std::size_t regimes() const { return generator.m; }
};

/// Per-regime quantities derived from the market parameters:
/// the Sharpe ratio and the discount coefficient delta that drives the
/// exponential functional of the chain.
struct RegimeScalars {
    std::vector<double> delta;   // delta(i) = -gamma [ Phi(i)^2 / (2(1-gamma)) + r(i) ]
    std::vector<double> sharpe;  // Phi(i) = (mu(i) - r(i)) / sigma(i)
};

enum class ModelFault {
    NonConservativeGenerator,
    NegativeRate,
    InvalidGamma,
    DimensionMismatch,
};

const char* to_string(ModelFault fault);

struct ModelViolation {
    ModelFault fault;
    std::string message;
};

/// Carries every violated invariant, not just the first one found.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<ModelViolation> violations);
    const std::vector<ModelViolation>& violations() const { return violations_; }

private:
    std::vector<ModelViolation> violations_;
};

/// All invariant violations of the instance; empty means valid.
std::vector<ModelViolation> check_model(const MarketModel& model);

/// Returns the model unchanged if valid, otherwise throws ValidationError
/// listing every violation. Idempotent.
const MarketModel& validate_model(const MarketModel& model);

/// Derived per-regime scalars. Pre: model validated.
RegimeScalars regime_scalars(const MarketModel& model);

}  // namespace rsm

#endif
