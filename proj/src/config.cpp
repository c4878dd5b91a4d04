#include "rsmerton/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rsm {

MarketModel RunConfig::to_model(double gamma_override) const {
    MarketModel model;
    model.generator.m = regimes;
    model.generator.q = q;
    model.r = r;
    model.mu = mu;
    model.sigma = sigma;
    model.gamma = gamma_override;
    return model;
}

std::vector<double> RunConfig::gammas() const {
    return gamma_list.empty() ? std::vector<double>{gamma} : gamma_list;
}

ConfigParseError::ConfigParseError(int line, const std::string& message)
    : std::runtime_error("config line " + std::to_string(line) + ": " + message), line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view token, int line) {
    token = trim(token);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size())
        throw ConfigParseError(line, "not a number: '" + std::string(token) + "'");
    return value;
}

// integer keys are parsed as integers so 64-bit seeds survive exactly
template <typename Int>
Int parse_integer(std::string_view token, int line, const char* what) {
    token = trim(token);
    Int value{};
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size())
        throw ConfigParseError(line, std::string(what) + ": '" + std::string(token) + "'");
    return value;
}

std::vector<double> parse_array(std::string_view body, int line) {
    body = trim(body);
    if (body.size() < 2 || body.front() != '[' || body.back() != ']')
        throw ConfigParseError(line, "expected an array like [a, b, c]");
    body.remove_prefix(1);
    body.remove_suffix(1);
    std::vector<double> out;
    body = trim(body);
    if (body.empty()) return out;
    while (true) {
        const auto comma = body.find(',');
        if (comma == std::string_view::npos) {
            out.push_back(parse_double(body, line));
            break;
        }
        out.push_back(parse_double(body.substr(0, comma), line));
        body = body.substr(comma + 1);
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_array(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) out += ", ";
        out += format_double(v[k]);
    }
    return out + "]";
}

}  // namespace

RunConfig parse_config_text(std::string_view text) {
    RunConfig config;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                              : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        const auto hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigParseError(line_no, "expected 'key = value'");
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view val = trim(line.substr(eq + 1));

        if (key == "regimes") {
            const auto v = parse_integer<long long>(val, line_no, "regimes must be an integer");
            if (v < 1) throw ConfigParseError(line_no, "regimes must be a positive integer");
            config.regimes = static_cast<std::size_t>(v);
        } else if (key == "q") {
            config.q = parse_array(val, line_no);
        } else if (key == "r") {
            config.r = parse_array(val, line_no);
        } else if (key == "mu") {
            config.mu = parse_array(val, line_no);
        } else if (key == "sigma") {
            config.sigma = parse_array(val, line_no);
        } else if (key == "gamma") {
            config.gamma = parse_double(val, line_no);
        } else if (key == "gamma_list") {
            config.gamma_list = parse_array(val, line_no);
        } else if (key == "horizon") {
            config.horizon = parse_double(val, line_no);
        } else if (key == "t") {
            config.t = parse_double(val, line_no);
        } else if (key == "x0") {
            config.x0 = parse_double(val, line_no);
        } else if (key == "paths") {
            const auto v = parse_integer<long long>(val, line_no, "paths must be an integer");
            if (v < 1) throw ConfigParseError(line_no, "paths must be a positive integer");
            config.paths = static_cast<long>(v);
        } else if (key == "seed") {
            config.seed =
                parse_integer<std::uint64_t>(val, line_no, "seed must be a non-negative integer");
        } else if (key == "steps") {
            const auto v = parse_integer<long long>(val, line_no, "steps must be an integer");
            if (v < 1) throw ConfigParseError(line_no, "steps must be a positive integer");
            config.steps = static_cast<int>(v);
        } else if (key == "q1_list") {
            config.q1_list = parse_array(val, line_no);
        } else if (key == "out") {
            config.out = std::string(val);
        } else {
            throw ConfigParseError(line_no, "unknown key '" + std::string(key) + "'");
        }
    }
    return config;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream os;
    os << "regimes = " << c.regimes << "\n";
    os << "q = " << format_array(c.q) << "\n";
    os << "r = " << format_array(c.r) << "\n";
    os << "mu = " << format_array(c.mu) << "\n";
    os << "sigma = " << format_array(c.sigma) << "\n";
    os << "gamma = " << format_double(c.gamma) << "\n";
    if (!c.gamma_list.empty()) os << "gamma_list = " << format_array(c.gamma_list) << "\n";
    os << "horizon = " << format_double(c.horizon) << "\n";
    os << "t = " << format_double(c.t) << "\n";
    os << "x0 = " << format_double(c.x0) << "\n";
    os << "paths = " << c.paths << "\n";
    os << "seed = " << c.seed << "\n";
    os << "steps = " << c.steps << "\n";
    if (!c.q1_list.empty()) os << "q1_list = " << format_array(c.q1_list) << "\n";
    if (!c.out.empty()) os << "out = " << c.out << "\n";
    return os.str();
}

std::vector<std::string> check_config(const RunConfig& c) {
    std::vector<std::string> errors;
    if (c.regimes < 1) errors.push_back("regimes must be >= 1");
    if (c.q.size() != c.regimes * c.regimes)
        errors.push_back("q must have regimes^2 entries");
    if (!(c.horizon >= c.t) || !(c.t >= 0.0))
        errors.push_back("times must satisfy horizon >= t >= 0");
    for (double g : c.gammas()) {
        if (!(g < 1.0) || g == 0.0) {
            errors.push_back("every gamma must satisfy gamma < 1 and gamma != 0");
            break;
        }
    }
    if (!(c.x0 >= 0.0)) errors.push_back("x0 must be >= 0");
    for (double q1 : c.q1_list)
        if (!(q1 >= 0.0)) {
            errors.push_back("q1_list entries must be >= 0");
            break;
        }
    return errors;
}

}  // namespace rsm
