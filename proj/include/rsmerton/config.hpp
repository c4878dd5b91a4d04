#ifndef RSMERTON_CONFIG_HPP
#define RSMERTON_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rsmerton/model.hpp"

namespace rsm {

/// Flat key/value run configuration. Per-regime vectors are arrays, the
/// generator is a row-major array. See configs/*.cfg for the schema.
struct RunConfig {
    std::size_t regimes = 0;
    std::vector<double> q;  // row-major generator, regimes^2 entries
    std::vector<double> r;
    std::vector<double> mu;
    std::vector<double> sigma;
    double gamma = 0.1;
    std::vector<double> gamma_list;  // table sweeps; empty = use gamma
    double horizon = 0.5;            // T
    double t = 0.0;                  // initial time
    double x0 = 1.0;
    long paths = 1000000;
    std::uint64_t seed = 42;
    int steps = 20000;               // ODE oracle steps
    std::vector<double> q1_list;     // merton-limit sweep of the regime-1 exit rate
    std::string out;                 // CSV output path; empty = stdout only

    MarketModel to_model() const { return to_model(gamma); }
    MarketModel to_model(double gamma_override) const;

    // effective sweep: gamma_list if present, else {gamma}
    std::vector<double> gammas() const;

    bool operator==(const RunConfig&) const = default;
};

class ConfigParseError : public std::runtime_error {
public:
    ConfigParseError(int line, const std::string& message);
    int line() const { return line_; }

private:
    int line_;
};

RunConfig parse_config_text(std::string_view text);
RunConfig load_config_file(const std::string& path);  // throws std::ios_base::failure on I/O

/// Lossless round-trip: every double is written with shortest exact form.
std::string serialize_config(const RunConfig& config);

/// Config-level checks beyond model validation (horizon/t ordering, gamma
/// list entries, counts). Empty result means usable.
std::vector<std::string> check_config(const RunConfig& config);

}  // namespace rsm

#endif
