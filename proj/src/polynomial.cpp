#include "rsmerton/polynomial.hpp"

#include <cmath>
#include <stdexcept>

namespace rsm {

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    canonicalize();
}

Polynomial Polynomial::constant(double c) { return Polynomial({c}); }

Polynomial Polynomial::linear(double c0, double c1) { return Polynomial({c0, c1}); }

void Polynomial::canonicalize() {
    while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
}

double Polynomial::eval(double u) const {
    double y = 0.0;
    for (std::size_t k = coeffs_.size(); k-- > 0;) y = y * u + coeffs_[k];
    return y;
}

std::complex<double> Polynomial::eval(std::complex<double> u) const {
    std::complex<double> y = 0.0;
    for (std::size_t k = coeffs_.size(); k-- > 0;) y = y * u + coeffs_[k];
    return y;
}

double Polynomial::eval_magnitude(std::complex<double> u) const {
    const double au = std::abs(u);
    double y = 0.0;
    for (std::size_t k = coeffs_.size(); k-- > 0;) y = y * au + std::abs(coeffs_[k]);
    return y;
}

Polynomial Polynomial::derivative() const {
    if (coeffs_.size() <= 1) return Polynomial();
    std::vector<double> d(coeffs_.size() - 1);
    for (std::size_t k = 1; k < coeffs_.size(); ++k)
        d[k - 1] = coeffs_[k] * static_cast<double>(k);
    return Polynomial(std::move(d));
}

Polynomial Polynomial::monic() const {
    if (is_zero()) throw std::invalid_argument("monic: zero polynomial");
    Polynomial out = *this;
    const double lead = out.coeffs_.back();
    for (auto& c : out.coeffs_) c /= lead;
    out.coeffs_.back() = 1.0;  // exact
    return out;
}

Polynomial Polynomial::trimmed(double rel_eps) const {
    double max_abs = 0.0;
    for (double c : coeffs_) max_abs = std::max(max_abs, std::abs(c));
    Polynomial out = *this;
    while (!out.coeffs_.empty() && std::abs(out.coeffs_.back()) <= rel_eps * max_abs)
        out.coeffs_.pop_back();
    return out;
}

Polynomial& Polynomial::operator+=(const Polynomial& rhs) {
    if (coeffs_.size() < rhs.coeffs_.size()) coeffs_.resize(rhs.coeffs_.size(), 0.0);
    for (std::size_t k = 0; k < rhs.coeffs_.size(); ++k) coeffs_[k] += rhs.coeffs_[k];
    canonicalize();
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& rhs) {
    if (coeffs_.size() < rhs.coeffs_.size()) coeffs_.resize(rhs.coeffs_.size(), 0.0);
    for (std::size_t k = 0; k < rhs.coeffs_.size(); ++k) coeffs_[k] -= rhs.coeffs_[k];
    canonicalize();
    return *this;
}

Polynomial& Polynomial::operator*=(const Polynomial& rhs) {
    if (is_zero() || rhs.is_zero()) {
        coeffs_.clear();
        return *this;
    }
    std::vector<double> out(coeffs_.size() + rhs.coeffs_.size() - 1, 0.0);
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        for (std::size_t j = 0; j < rhs.coeffs_.size(); ++j)
            out[i + j] += coeffs_[i] * rhs.coeffs_[j];
    coeffs_ = std::move(out);
    canonicalize();
    return *this;
}

Polynomial& Polynomial::operator*=(double s) {
    if (s == 0.0) {
        coeffs_.clear();
        return *this;
    }
    for (auto& c : coeffs_) c *= s;
    return *this;
}

std::pair<Polynomial, Polynomial> Polynomial::divmod(const Polynomial& a, const Polynomial& b) {
    if (b.is_zero()) throw std::invalid_argument("divmod: division by zero polynomial");
    if (a.degree() < b.degree()) return {Polynomial(), a};

    std::vector<double> rem = a.coeffs_;
    const std::size_t nq = a.coeffs_.size() - b.coeffs_.size() + 1;
    std::vector<double> quot(nq, 0.0);
    const double lead = b.coeffs_.back();
    for (std::size_t k = nq; k-- > 0;) {
        const double factor = rem[k + b.coeffs_.size() - 1] / lead;
        quot[k] = factor;
        if (factor == 0.0) continue;
        for (std::size_t j = 0; j < b.coeffs_.size(); ++j) rem[k + j] -= factor * b.coeffs_[j];
    }
    rem.resize(b.coeffs_.size() - 1);
    return {Polynomial(std::move(quot)), Polynomial(std::move(rem))};
}

RationalFunction RationalFunction::normalized() const {
    if (den.is_zero()) throw std::invalid_argument("RationalFunction: zero denominator");
    const double lead = den.leading();
    RationalFunction out;
    out.den = den.monic();
    out.num = num * (1.0 / lead);
    return out;
}

}  // namespace rsm
