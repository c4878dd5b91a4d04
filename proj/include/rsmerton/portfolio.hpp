#ifndef RSMERTON_PORTFOLIO_HPP
#define RSMERTON_PORTFOLIO_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "rsmerton/laplace.hpp"
#include "rsmerton/model.hpp"
#include "rsmerton/oracles.hpp"
#include "rsmerton/rng.hpp"

namespace rsm {

/// Power utility U(x) = x^gamma / gamma.
double power_utility(double x, double gamma);

/// Value function V(x, t, i) = U(x) g(i, T - t).
/// Pre: 0 <= t <= horizon; x >= 0, and x > 0 when gamma < 0 (U(0) = -inf).
double value(const ValueSolution& sol, double x, double t, int regime);

/// Optimal fraction of wealth in the risky asset,
/// (mu(i) - r(i)) / ((1 - gamma) sigma(i)^2); constant per regime.
double optimal_fraction(const MarketModel& model, int regime);

/// Exponential factor of the no-switching Merton value,
/// exp{ [gamma/(1-gamma) (mu-r)^2/(2 sigma^2) + gamma r] tau }.
double merton_factor(double mu, double sigma, double r, double gamma, double tau);

/// One simulated trajectory of the optimally controlled wealth.
struct WealthPath {
    std::vector<double> times;    // uniform grid merged with the chain's jump times
    std::vector<double> wealth;
    std::vector<int> regimes;     // regime in force entering each time point
    double terminal_utility = 0.0;
};

/// Simulate the optimal wealth SDE: between jumps the wealth is a geometric
/// Brownian motion with drift Phi^2/(1-gamma) + r and volatility Phi/(1-gamma);
/// each segment uses the exact log-normal increment (no discretization error).
WealthPath simulate_optimal_wealth(const MarketModel& model, double x0, int initial_regime,
                                   double horizon, int n_steps, PathRng& rng);

/// Monte Carlo estimate of E[U(X*_T)]; closes the loop against V(x0, 0, i0).
PathEstimate expected_utility_mc(const MarketModel& model, double x0, int initial_regime,
                                 double horizon, long n_paths, std::uint64_t seed,
                                 int n_workers = 0);

/// Max over the grid and regimes of |V_t + r x V_x + QV - (mu-r)^2 V_x^2 / (2 sigma^2 V_xx)|
/// normalized by |V|, with all derivatives of U(x) g(i, T-t) in closed form
/// (dg/dtau comes from the exponential sum term by term).
double hjb_residual(const ValueSolution& sol, std::span<const double> xs,
                    std::span<const double> ts);

/// Same residual with finite-difference derivatives; cross-check only.
double hjb_residual_fd(const ValueSolution& sol, std::span<const double> xs,
                       std::span<const double> ts);

}  // namespace rsm

#endif
