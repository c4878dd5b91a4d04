#include "rsmerton/oracles.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include <unsupported/Eigen/MatrixFunctions>

namespace rsm {

Eigen::MatrixXd g_system_matrix(const MarketModel& model, const RegimeScalars& scalars) {
    const auto m = static_cast<Eigen::Index>(model.regimes());
    Eigen::MatrixXd a(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            a(i, j) = model.generator(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    for (Eigen::Index i = 0; i < m; ++i) a(i, i) -= scalars.delta[static_cast<std::size_t>(i)];
    return a;
}

std::vector<double> ode_g(const MarketModel& model, double tau, int steps) {
    if (tau < 0.0) throw std::invalid_argument("ode_g: tau must be >= 0");
    if (steps < 1) throw std::invalid_argument("ode_g: steps must be >= 1");

    const auto m = static_cast<Eigen::Index>(model.regimes());
    Eigen::VectorXd g = Eigen::VectorXd::Ones(m);
    if (tau == 0.0) return {g.data(), g.data() + m};

    const Eigen::MatrixXd a = g_system_matrix(model, regime_scalars(model));
    const double h = tau / steps;
    Eigen::VectorXd k1(m), k2(m), k3(m), k4(m);
    for (int n = 0; n < steps; ++n) {
        k1 = a * g;
        k2 = a * (g + (0.5 * h) * k1);
        k3 = a * (g + (0.5 * h) * k2);
        k4 = a * (g + h * k3);
        g += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return {g.data(), g.data() + m};
}

std::vector<double> matexp_g(const MarketModel& model, double tau) {
    if (tau < 0.0) throw std::invalid_argument("matexp_g: tau must be >= 0");
    const auto m = static_cast<Eigen::Index>(model.regimes());
    const Eigen::MatrixXd a = g_system_matrix(model, regime_scalars(model));
    const Eigen::VectorXd g = (tau * a).exp() * Eigen::VectorXd::Ones(m);
    return {g.data(), g.data() + m};
}

ChainPath simulate_chain(const MarketModel& model, int initial_regime, double horizon,
                         PathRng& rng) {
    const auto m = static_cast<int>(model.regimes());
    if (initial_regime < 0 || initial_regime >= m)
        throw std::invalid_argument("simulate_chain: regime index out of range");
    if (horizon < 0.0) throw std::invalid_argument("simulate_chain: horizon must be >= 0");

    ChainPath path;
    path.states.push_back(initial_regime);

    double t = 0.0;
    int state = initial_regime;
    while (true) {
        const double rate = model.generator.exit_rate(static_cast<std::size_t>(state));
        if (!(rate > 0.0)) break;  // absorbing
        t += rng.next_exponential(rate);
        if (t >= horizon) break;

        // successor j != state with probability q_ij / q_i
        const double target = rng.next_uniform() * rate;
        double cum = 0.0;
        int next = -1;
        for (int j = 0; j < m; ++j) {
            if (j == state) continue;
            cum += model.generator(static_cast<std::size_t>(state), static_cast<std::size_t>(j));
            if (target < cum) {
                next = j;
                break;
            }
        }
        if (next < 0) {  // rounding spill: take the last positive-rate successor
            for (int j = m - 1; j >= 0; --j) {
                if (j != state &&
                    model.generator(static_cast<std::size_t>(state), static_cast<std::size_t>(j)) > 0.0) {
                    next = j;
                    break;
                }
            }
        }
        path.jump_times.push_back(t);
        path.states.push_back(next);
        state = next;
    }
    return path;
}

namespace detail {

namespace {

struct WelfordStats {
    long count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }

    void combine(const WelfordStats& other) {
        if (other.count == 0) return;
        if (count == 0) {
            *this = other;
            return;
        }
        const double n_a = static_cast<double>(count);
        const double n_b = static_cast<double>(other.count);
        const double n = n_a + n_b;
        const double d = other.mean - mean;
        mean += d * (n_b / n);
        m2 += other.m2 + d * d * (n_a * n_b / n);
        count += other.count;
    }
};

constexpr long kBlockSize = 8192;

}  // namespace

PathEstimate parallel_estimate(long n_paths, std::uint64_t seed,
                               const std::function<double(PathRng&, long)>& sample_fn,
                               int n_workers) {
    if (n_paths < 1) throw std::invalid_argument("parallel_estimate: n_paths must be >= 1");

    const long n_blocks = (n_paths + kBlockSize - 1) / kBlockSize;
    std::vector<WelfordStats> block_stats(static_cast<std::size_t>(n_blocks));

    auto run_block = [&](long b) {
        WelfordStats stats;
        const long begin = b * kBlockSize;
        const long end = std::min(begin + kBlockSize, n_paths);
        for (long k = begin; k < end; ++k) {
            PathRng rng(seed, static_cast<std::uint64_t>(k));
            stats.add(sample_fn(rng, k));
        }
        block_stats[static_cast<std::size_t>(b)] = stats;
    };

    int workers = n_workers > 0 ? n_workers
                                : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = static_cast<int>(std::min<long>(workers, n_blocks));

    if (workers == 1) {
        for (long b = 0; b < n_blocks; ++b) run_block(b);
    } else {
        std::atomic<long> next_block{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                while (true) {
                    const long b = next_block.fetch_add(1);
                    if (b >= n_blocks) return;
                    run_block(b);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    // fixed-order reduction: independent of worker count
    WelfordStats total;
    for (const auto& s : block_stats) total.combine(s);

    PathEstimate est;
    est.mean = total.mean;
    est.n_paths = n_paths;
    est.seed = seed;
    if (n_paths == 1) {
        est.std_error = std::numeric_limits<double>::quiet_NaN();
    } else {
        const double variance = total.m2 / static_cast<double>(n_paths - 1);
        est.std_error = std::sqrt(variance / static_cast<double>(n_paths));
    }
    return est;
}

}  // namespace detail

PathEstimate mc_g(const MarketModel& model, int initial_regime, double tau, long n_paths,
                  std::uint64_t seed, int n_workers) {
    const RegimeScalars scalars = regime_scalars(model);
    auto sample = [&](PathRng& rng, long) {
        const ChainPath path = simulate_chain(model, initial_regime, tau, rng);
        // exact integral of the piecewise-constant delta along the path
        double integral = 0.0;
        double prev = 0.0;
        for (std::size_t k = 0; k < path.jump_times.size(); ++k) {
            integral += scalars.delta[static_cast<std::size_t>(path.states[k])] *
                        (path.jump_times[k] - prev);
            prev = path.jump_times[k];
        }
        integral += scalars.delta[static_cast<std::size_t>(path.states.back())] * (tau - prev);
        return std::exp(-integral);
    };
    return detail::parallel_estimate(n_paths, seed, sample, n_workers);
}

}  // namespace rsm
