#include "rsmerton/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rsm {

double power_utility(double x, double gamma) { return std::pow(x, gamma) / gamma; }

double value(const ValueSolution& sol, double x, double t, int regime) {
    if (t < 0.0 || t > sol.horizon) throw std::domain_error("value: t must lie in [0, T]");
    if (x < 0.0) throw std::domain_error("value: wealth must be >= 0");
    if (x == 0.0 && sol.model.gamma < 0.0)
        throw std::domain_error("value: U(0) is -inf for gamma < 0");
    const double tau = sol.horizon - t;
    if (x == 0.0) return 0.0;  // gamma in (0,1): U(0) = 0
    return power_utility(x, sol.model.gamma) * sol.g_at(regime, tau);
}

double optimal_fraction(const MarketModel& model, int regime) {
    const auto i = static_cast<std::size_t>(regime);
    const double sigma = model.sigma[i];
    return (model.mu[i] - model.r[i]) / ((1.0 - model.gamma) * sigma * sigma);
}

double merton_factor(double mu, double sigma, double r, double gamma, double tau) {
    const double excess = mu - r;
    const double rate = gamma / (1.0 - gamma) * excess * excess / (2.0 * sigma * sigma) + gamma * r;
    return std::exp(rate * tau);
}

namespace {

struct SegmentDynamics {
    double drift;  // Phi^2/(1-gamma) + r
    double vol;    // Phi/(1-gamma)
};

std::vector<SegmentDynamics> wealth_dynamics(const MarketModel& model,
                                             const RegimeScalars& scalars) {
    const std::size_t m = model.regimes();
    std::vector<SegmentDynamics> dyn(m);
    const double a = 1.0 - model.gamma;
    for (std::size_t i = 0; i < m; ++i) {
        const double phi = scalars.sharpe[i];
        dyn[i] = {phi * phi / a + model.r[i], phi / a};
    }
    return dyn;
}

// exact log-normal step over dt in the regime's dynamics
double gbm_step(double x, const SegmentDynamics& d, double dt, double z) {
    return x * std::exp((d.drift - 0.5 * d.vol * d.vol) * dt + d.vol * std::sqrt(dt) * z);
}

}  // namespace

WealthPath simulate_optimal_wealth(const MarketModel& model, double x0, int initial_regime,
                                   double horizon, int n_steps, PathRng& rng) {
    if (!(x0 > 0.0)) throw std::invalid_argument("simulate_optimal_wealth: x0 must be > 0");
    if (n_steps < 1) throw std::invalid_argument("simulate_optimal_wealth: n_steps must be >= 1");

    const RegimeScalars scalars = regime_scalars(model);
    const std::vector<SegmentDynamics> dyn = wealth_dynamics(model, scalars);
    const ChainPath chain = simulate_chain(model, initial_regime, horizon, rng);

    // uniform grid merged with the jump times
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(n_steps) + chain.jump_times.size() + 1);
    for (int k = 0; k <= n_steps; ++k)
        times.push_back(horizon * static_cast<double>(k) / static_cast<double>(n_steps));
    times.insert(times.end(), chain.jump_times.begin(), chain.jump_times.end());
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    WealthPath path;
    path.times = times;
    path.wealth.reserve(times.size());
    path.regimes.reserve(times.size());

    double x = x0;
    std::size_t next_jump = 0;
    int regime = initial_regime;
    auto consume_jumps_up_to = [&](double t_now) {
        while (next_jump < chain.jump_times.size() && chain.jump_times[next_jump] <= t_now) {
            ++next_jump;
            regime = chain.states[next_jump];
        }
    };
    consume_jumps_up_to(0.0);
    path.wealth.push_back(x);
    path.regimes.push_back(regime);
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double dt = times[k] - times[k - 1];
        if (dt > 0.0) {
            const auto& d = dyn[static_cast<std::size_t>(regime)];
            if (d.vol == 0.0)
                x *= std::exp(d.drift * dt);
            else
                x = gbm_step(x, d, dt, rng.next_normal());
        }
        consume_jumps_up_to(times[k]);
        path.wealth.push_back(x);
        path.regimes.push_back(regime);
    }
    path.terminal_utility = power_utility(x, model.gamma);
    return path;
}

PathEstimate expected_utility_mc(const MarketModel& model, double x0, int initial_regime,
                                 double horizon, long n_paths, std::uint64_t seed,
                                 int n_workers) {
    if (!(x0 > 0.0)) throw std::invalid_argument("expected_utility_mc: x0 must be > 0");

    const RegimeScalars scalars = regime_scalars(model);
    const std::vector<SegmentDynamics> dyn = wealth_dynamics(model, scalars);
    const double gamma = model.gamma;

    auto sample = [&](PathRng& rng, long) {
        // terminal wealth only: one exact log-normal increment per chain segment
        const ChainPath chain = simulate_chain(model, initial_regime, horizon, rng);
        double log_x = std::log(x0);
        double prev = 0.0;
        for (std::size_t k = 0; k <= chain.jump_times.size(); ++k) {
            const double end = k < chain.jump_times.size() ? chain.jump_times[k] : horizon;
            const double dt = end - prev;
            const auto& d = dyn[static_cast<std::size_t>(chain.states[k])];
            if (dt > 0.0) {
                log_x += (d.drift - 0.5 * d.vol * d.vol) * dt;
                if (d.vol != 0.0) log_x += d.vol * std::sqrt(dt) * rng.next_normal();
            }
            prev = end;
        }
        return power_utility(std::exp(log_x), gamma);
    };
    return detail::parallel_estimate(n_paths, seed, sample, n_workers);
}

namespace {

struct HjbPointTerms {
    double v;
    double residual;
};

}  // namespace

double hjb_residual(const ValueSolution& sol, std::span<const double> xs,
                    std::span<const double> ts) {
    const MarketModel& model = sol.model;
    const std::size_t m = model.regimes();
    const double gamma = model.gamma;

    std::vector<ExponentialSum> dg;
    dg.reserve(m);
    for (const auto& gi : sol.g) dg.push_back(gi.derivative());

    double worst = 0.0;
    for (double t : ts) {
        const double tau = sol.horizon - t;
        std::vector<double> g_vals(m), dg_vals(m);
        for (std::size_t i = 0; i < m; ++i) {
            g_vals[i] = sol.g[i](tau);
            dg_vals[i] = dg[i](tau);
        }
        for (double x : xs) {
            const double u = power_utility(x, gamma);
            const double ux = std::pow(x, gamma - 1.0);          // U'(x)
            const double uxx = (gamma - 1.0) * std::pow(x, gamma - 2.0);
            for (std::size_t i = 0; i < m; ++i) {
                const double v = u * g_vals[i];
                const double v_t = -u * dg_vals[i];              // d/dt of g(i, T-t)
                const double v_x = ux * g_vals[i];
                const double v_xx = uxx * g_vals[i];
                double qv = 0.0;
                for (std::size_t j = 0; j < m; ++j) qv += model.generator(i, j) * g_vals[j];
                qv *= u;
                const double excess = model.mu[i] - model.r[i];
                const double nonlinear =
                    excess * excess * v_x * v_x / (2.0 * model.sigma[i] * model.sigma[i] * v_xx);
                const double residual = v_t + model.r[i] * x * v_x + qv - nonlinear;
                worst = std::max(worst, std::abs(residual) / std::max(std::abs(v), 1e-300));
            }
        }
    }
    return worst;
}

double hjb_residual_fd(const ValueSolution& sol, std::span<const double> xs,
                       std::span<const double> ts) {
    const MarketModel& model = sol.model;
    const std::size_t m = model.regimes();

    auto v_of = [&](double x, double t, std::size_t i) {
        return power_utility(x, model.gamma) * sol.g[i](sol.horizon - t);
    };

    double worst = 0.0;
    for (double t : ts) {
        const double ht = 1e-6 * std::max(sol.horizon, 1.0);
        for (double x : xs) {
            const double hx = 1e-4 * x;  // near eps^(1/4): balances truncation and roundoff in V_xx
            for (std::size_t i = 0; i < m; ++i) {
                const double v = v_of(x, t, i);
                const double v_t = (v_of(x, t + ht, i) - v_of(x, t - ht, i)) / (2.0 * ht);
                const double v_x = (v_of(x + hx, t, i) - v_of(x - hx, t, i)) / (2.0 * hx);
                const double v_xx =
                    (v_of(x + hx, t, i) - 2.0 * v + v_of(x - hx, t, i)) / (hx * hx);
                double qv = 0.0;
                for (std::size_t j = 0; j < m; ++j)
                    qv += model.generator(i, j) * v_of(x, t, j);
                const double excess = model.mu[i] - model.r[i];
                const double nonlinear =
                    excess * excess * v_x * v_x / (2.0 * model.sigma[i] * model.sigma[i] * v_xx);
                const double residual = v_t + model.r[i] * x * v_x + qv - nonlinear;
                worst = std::max(worst, std::abs(residual) / std::max(std::abs(v), 1e-300));
            }
        }
    }
    return worst;
}

}  // namespace rsm
