#include "rsmerton/model.hpp"

#include <cmath>
#include <sstream>

namespace rsm {

GeneratorMatrix GeneratorMatrix::single() {
    return GeneratorMatrix{1, {0.0}};
}

GeneratorMatrix GeneratorMatrix::two_state(double q1, double q2) {
    return GeneratorMatrix{2, {-q1, q1, q2, -q2}};
}

const char* to_string(ModelFault fault) {
    switch (fault) {
        case ModelFault::NonConservativeGenerator: return "NonConservativeGenerator";
        case ModelFault::NegativeRate: return "NegativeRate";
        case ModelFault::InvalidGamma: return "InvalidGamma";
        case ModelFault::DimensionMismatch: return "DimensionMismatch";
    }
    return "UnknownFault";
}

namespace {

std::string joined_message(const std::vector<ModelViolation>& violations) {
    std::ostringstream os;
    os << "invalid market model (" << violations.size() << " violation"
       << (violations.size() == 1 ? "" : "s") << "):";
    for (const auto& v : violations) os << "\n  [" << to_string(v.fault) << "] " << v.message;
    return os.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<ModelViolation> violations)
    : std::runtime_error(joined_message(violations)), violations_(std::move(violations)) {}

std::vector<ModelViolation> check_model(const MarketModel& model) {
    std::vector<ModelViolation> out;
    auto add = [&out](ModelFault fault, const std::string& msg) {
        out.push_back({fault, msg});
    };

    const std::size_t m = model.generator.m;
    if (m < 1) {
        add(ModelFault::DimensionMismatch, "regime count must be >= 1");
        return out;  // nothing else is meaningful
    }
    if (model.generator.q.size() != m * m) {
        std::ostringstream os;
        os << "generator has " << model.generator.q.size() << " entries, expected " << m * m;
        add(ModelFault::DimensionMismatch, os.str());
        return out;
    }

    auto check_len = [&](const std::vector<double>& v, const char* name) {
        if (v.size() != m) {
            std::ostringstream os;
            os << name << " has length " << v.size() << ", expected " << m;
            add(ModelFault::DimensionMismatch, os.str());
            return false;
        }
        return true;
    };
    const bool r_ok = check_len(model.r, "r");
    const bool mu_ok = check_len(model.mu, "mu");
    const bool sigma_ok = check_len(model.sigma, "sigma");

    for (std::size_t i = 0; i < m; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double qij = model.generator(i, j);
            row_sum += qij;
            if (i != j && !(qij >= 0.0)) {
                std::ostringstream os;
                os << "q(" << i + 1 << "," << j + 1 << ") = " << qij << " must be >= 0";
                add(ModelFault::NegativeRate, os.str());
            }
        }
        if (!(std::abs(row_sum) <= kRowSumTolerance)) {
            std::ostringstream os;
            os << "generator row " << i + 1 << " sums to " << row_sum << ", expected 0 within "
               << kRowSumTolerance;
            add(ModelFault::NonConservativeGenerator, os.str());
        }
    }

    auto check_positive = [&](const std::vector<double>& v, const char* name, bool ok) {
        if (!ok) return;
        for (std::size_t i = 0; i < m; ++i) {
            if (!(v[i] > 0.0)) {
                std::ostringstream os;
                os << name << "(" << i + 1 << ") = " << v[i] << " must be > 0";
                add(ModelFault::NegativeRate, os.str());
            }
        }
    };
    check_positive(model.r, "r", r_ok);
    check_positive(model.mu, "mu", mu_ok);
    check_positive(model.sigma, "sigma", sigma_ok);

    if (!(model.gamma < 1.0) || model.gamma == 0.0 || std::isnan(model.gamma)) {
        std::ostringstream os;
        os << "gamma = " << model.gamma << " must satisfy gamma < 1 and gamma != 0";
        add(ModelFault::InvalidGamma, os.str());
    }

    return out;
}

const MarketModel& validate_model(const MarketModel& model) {
    auto violations = check_model(model);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    return model;
}

RegimeScalars regime_scalars(const MarketModel& model) {
    const std::size_t m = model.regimes();
    RegimeScalars s;
    s.delta.resize(m);
    s.sharpe.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double phi = (model.mu[i] - model.r[i]) / model.sigma[i];
        s.sharpe[i] = phi;
        s.delta[i] = -model.gamma * (phi * phi / (2.0 * (1.0 - model.gamma)) + model.r[i]);
    }
    return s;
}

}  // namespace rsm
