#ifndef RSMERTON_POLYNOMIAL_HPP
#define RSMERTON_POLYNOMIAL_HPP

#include <complex>
#include <utility>
#include <vector>

namespace rsm {

/// Dense real-coefficient polynomial, coefficients in ascending degree.
/// Canonical form has a nonzero leading coefficient; the zero polynomial is
/// the empty coefficient list with degree() == -1.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs);

    static Polynomial constant(double c);
    static Polynomial linear(double c0, double c1);  // c0 + c1 u

    bool is_zero() const { return coeffs_.empty(); }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    double leading() const { return coeffs_.empty() ? 0.0 : coeffs_.back(); }
    const std::vector<double>& coeffs() const { return coeffs_; }

    // coefficient of u^k; zero beyond the degree
    double operator[](std::size_t k) const { return k < coeffs_.size() ? coeffs_[k] : 0.0; }

    double eval(double u) const;
    std::complex<double> eval(std::complex<double> u) const;

    // sum_k |a_k| |u|^k; the natural scale for residual tests at u
    double eval_magnitude(std::complex<double> u) const;

    Polynomial derivative() const;
    Polynomial monic() const;  // divide by the leading coefficient

    // drop leading coefficients below rel_eps * max |a_k|
    Polynomial trimmed(double rel_eps) const;

    Polynomial& operator+=(const Polynomial& rhs);
    Polynomial& operator-=(const Polynomial& rhs);
    Polynomial& operator*=(const Polynomial& rhs);
    Polynomial& operator*=(double s);

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, const Polynomial& b) { return a *= b; }
    friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
    friend Polynomial operator*(double s, Polynomial a) { return a *= s; }

    /// Euclidean division: a = q*b + r with deg(r) < deg(b). b must be nonzero.
    static std::pair<Polynomial, Polynomial> divmod(const Polynomial& a, const Polynomial& b);

private:
    void canonicalize();
    std::vector<double> coeffs_;
};

/// Ratio of two polynomials. Pipeline outputs keep den monic and
/// deg(num) < deg(den) (strictly proper).
struct RationalFunction {
    Polynomial num;
    Polynomial den;

    std::complex<double> eval(std::complex<double> u) const { return num.eval(u) / den.eval(u); }

    // scale num and den so den is monic
    RationalFunction normalized() const;
};

}  // namespace rsm

#endif
