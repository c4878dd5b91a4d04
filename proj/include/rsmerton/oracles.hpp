#ifndef RSMERTON_ORACLES_HPP
#define RSMERTON_ORACLES_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "rsmerton/model.hpp"
#include "rsmerton/rng.hpp"

namespace rsm {

/// Monte Carlo estimator output.
struct PathEstimate {
    double mean = 0.0;
    double std_error = 0.0;  // sample sd / sqrt(n); NaN when n == 1
    long n_paths = 0;
    std::uint64_t seed = 0;
};

/// One realization of the modulating chain on [0, horizon].
struct ChainPath {
    std::vector<double> jump_times;  // strictly increasing, inside (0, horizon)
    std::vector<int> states;         // visited regimes; size jump_times.size() + 1
};

/// Coefficient matrix Q - diag(delta) of the linear system g' = (Q - diag delta) g.
Eigen::MatrixXd g_system_matrix(const MarketModel& model, const RegimeScalars& scalars);

/// g(., tau) by classical fixed-step 4th-order Runge-Kutta on the linear
/// system above with g(0) = 1. Global error O((tau/steps)^4).
std::vector<double> ode_g(const MarketModel& model, double tau, int steps);

/// g(., tau) = exp(tau (Q - diag delta)) * 1 via scaling-and-squaring.
std::vector<double> matexp_g(const MarketModel& model, double tau);

/// Exact event-driven simulation: holding times are Exp(q_i), the successor
/// is drawn with probability q_ij / q_i. States with q_i = 0 are absorbing.
ChainPath simulate_chain(const MarketModel& model, int initial_regime, double horizon,
                         PathRng& rng);

/// Monte Carlo estimate of g(i0, tau) = E[exp(-int_0^tau delta(Y_u) du) | Y_0 = i0].
/// The delta integral along each path is exact (delta is piecewise constant).
/// Paths are distributed over workers; path k always draws from RNG stream k,
/// and the reduction is a fixed-order block combine, so the estimate depends
/// only on (parameters, n_paths, seed).
PathEstimate mc_g(const MarketModel& model, int initial_regime, double tau, long n_paths,
                  std::uint64_t seed, int n_workers = 0);

namespace detail {

/// Shared parallel driver: sample_fn(rng, path_index) -> one draw.
/// n_workers = 0 picks hardware concurrency. Deterministic in (n_paths, seed).
PathEstimate parallel_estimate(long n_paths, std::uint64_t seed,
                               const std::function<double(PathRng&, long)>& sample_fn,
                               int n_workers = 0);

}  // namespace detail

}  // namespace rsm

#endif
