#include "rsmerton/laplace.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace rsm {

namespace {

using Complex = std::complex<double>;

// noise tolerance when dropping coefficients above the structural degree
constexpr double kDegreeNoiseTol = 1e-6;

Polynomial truncate_checked(const Polynomial& p, int structural_degree, const char* what) {
    double max_abs = 0.0;
    for (double c : p.coeffs()) max_abs = std::max(max_abs, std::abs(c));
    std::vector<double> kept;
    kept.reserve(static_cast<std::size_t>(structural_degree) + 1);
    for (int k = 0; k <= structural_degree; ++k) kept.push_back(p[static_cast<std::size_t>(k)]);
    for (int k = structural_degree + 1; k <= p.degree(); ++k) {
        if (std::abs(p[static_cast<std::size_t>(k)]) > kDegreeNoiseTol * max_abs)
            throw DegenerateSystem(std::string(what) + ": coefficient above the structural degree");
    }
    return Polynomial(std::move(kept));
}

bool poly_effectively_zero(const Polynomial& p, double scale) {
    for (double c : p.coeffs())
        if (std::abs(c) > 1e-14 * scale) return false;
    return true;
}

// fraction-free elimination; exact division keeps intermediate degrees tight
Polynomial bareiss_det(std::vector<Polynomial> a, std::size_t m) {
    if (m == 1) return a[0];

    double coeff_scale = 1.0;
    for (const auto& p : a)
        for (double c : p.coeffs()) coeff_scale = std::max(coeff_scale, std::abs(c));

    double sign = 1.0;
    Polynomial prev = Polynomial::constant(1.0);
    for (std::size_t k = 0; k + 1 < m; ++k) {
        if (poly_effectively_zero(a[k * m + k], coeff_scale)) {
            std::size_t swap_row = k;
            for (std::size_t i = k + 1; i < m; ++i)
                if (!poly_effectively_zero(a[i * m + k], coeff_scale)) {
                    swap_row = i;
                    break;
                }
            if (swap_row == k) return Polynomial();  // singular
            for (std::size_t j = 0; j < m; ++j) std::swap(a[k * m + j], a[swap_row * m + j]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < m; ++i)
            for (std::size_t j = k + 1; j < m; ++j) {
                Polynomial num = a[i * m + j] * a[k * m + k] - a[i * m + k] * a[k * m + j];
                a[i * m + j] = Polynomial::divmod(num, prev).first;
            }
        prev = a[k * m + k];
    }
    return sign * a[m * m - 1];
}

std::vector<Polynomial> replace_column_with_ones(const TransformSystem& system, std::size_t col) {
    std::vector<Polynomial> a = system.entries;
    for (std::size_t i = 0; i < system.m; ++i) a[i * system.m + col] = Polynomial::constant(1.0);
    return a;
}

struct CramerResult {
    Polynomial den;
    std::vector<Polynomial> nums;
};

CramerResult cramer_bareiss(const TransformSystem& system) {
    CramerResult out;
    out.den = bareiss_det(system.entries, system.m);
    out.nums.reserve(system.m);
    for (std::size_t i = 0; i < system.m; ++i)
        out.nums.push_back(bareiss_det(replace_column_with_ones(system, i), system.m));
    return out;
}

// evaluate the system at scaled roots of unity, take determinants and
// Cramer solutions there, and recover coefficients by an inverse DFT
CramerResult cramer_interpolation(const TransformSystem& system) {
    const std::size_t m = system.m;
    const std::size_t n_points = m + 1;

    double radius = 1.0;
    for (std::size_t i = 0; i < m; ++i) radius = std::max(radius, std::abs(system(i, i)[0]));

    std::vector<Complex> det_vals(n_points);
    std::vector<std::vector<Complex>> num_vals(m, std::vector<Complex>(n_points));
    const double two_pi = 6.283185307179586476925286766559;

    for (std::size_t k = 0; k < n_points; ++k) {
        const double angle = two_pi * static_cast<double>(k) / static_cast<double>(n_points);
        const Complex z = radius * Complex(std::cos(angle), std::sin(angle));
        Eigen::MatrixXcd a(m, m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = system(i, j).eval(z);
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
        const Complex det = lu.determinant();
        det_vals[k] = det;
        const Eigen::VectorXcd sol = lu.solve(Eigen::VectorXcd::Ones(static_cast<Eigen::Index>(m)));
        for (std::size_t i = 0; i < m; ++i)
            num_vals[i][k] = det * sol(static_cast<Eigen::Index>(i));
    }

    auto interpolate = [&](const std::vector<Complex>& values) {
        std::vector<double> coeffs(n_points);
        double max_abs = 0.0;
        double max_imag = 0.0;
        double r_pow = 1.0;
        for (std::size_t j = 0; j < n_points; ++j) {
            Complex c = 0.0;
            for (std::size_t k = 0; k < n_points; ++k) {
                const double angle = -two_pi * static_cast<double>(j * k % n_points) /
                                     static_cast<double>(n_points);
                c += values[k] * Complex(std::cos(angle), std::sin(angle));
            }
            c /= static_cast<double>(n_points) * r_pow;
            r_pow *= radius;
            coeffs[j] = c.real();
            max_abs = std::max(max_abs, std::abs(c));
            max_imag = std::max(max_imag, std::abs(c.imag()));
        }
        if (max_imag > 1e-8 * std::max(1.0, max_abs))
            throw DegenerateSystem("solve_transform: interpolation produced complex coefficients");
        return Polynomial(std::move(coeffs));
    };

    CramerResult out;
    out.den = interpolate(det_vals);
    out.nums.reserve(m);
    for (std::size_t i = 0; i < m; ++i) out.nums.push_back(interpolate(num_vals[i]));
    return out;
}

std::vector<Complex> to_complex_coeffs(const Polynomial& p) {
    std::vector<Complex> c(p.coeffs().begin(), p.coeffs().end());
    if (c.empty()) c.push_back(0.0);
    return c;
}

// divide by (u - z); remainder is the value at z
std::vector<Complex> synthetic_division(const std::vector<Complex>& c, Complex z, Complex* rem) {
    if (c.size() <= 1) {
        if (rem) *rem = c.empty() ? Complex(0.0) : c[0];
        return {Complex(0.0)};
    }
    std::vector<Complex> q(c.size() - 1);
    Complex carry = c.back();
    for (std::size_t k = c.size() - 1; k-- > 0;) {
        q[k] = carry;
        carry = c[k] + z * carry;
    }
    if (rem) *rem = carry;
    return q;
}

// first `count` Taylor coefficients of p around z
std::vector<Complex> taylor_at(std::vector<Complex> c, Complex z, int count) {
    std::vector<Complex> out(static_cast<std::size_t>(count), Complex(0.0));
    for (int j = 0; j < count; ++j) {
        Complex rem;
        c = synthetic_division(c, z, &rem);
        out[static_cast<std::size_t>(j)] = rem;
        if (c.size() == 1 && c[0] == Complex(0.0)) break;
    }
    return out;
}

Complex eval_complex_poly(const std::vector<Complex>& c, Complex z) {
    Complex y = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) y = y * z + c[k];
    return y;
}

}  // namespace

TransformSystem build_system(const MarketModel& model, const RegimeScalars& scalars) {
    const std::size_t m = model.regimes();
    TransformSystem system;
    system.m = m;
    system.entries.resize(m * m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (i == j)
                system(i, j) = Polynomial::linear(scalars.delta[i] + model.generator.exit_rate(i), 1.0);
            else
                system(i, j) = Polynomial::constant(-model.generator(i, j));
        }
    }
    return system;
}

std::vector<RationalFunction> solve_transform(const TransformSystem& system, DetMethod method) {
    const std::size_t m = system.m;
    if (m == 0) throw std::invalid_argument("solve_transform: empty system");

    if (method == DetMethod::Auto)
        method = m <= 6 ? DetMethod::Bareiss : DetMethod::Interpolation;
    CramerResult cr = method == DetMethod::Bareiss ? cramer_bareiss(system)
                                                   : cramer_interpolation(system);

    double den_scale = 0.0;
    for (double c : cr.den.coeffs()) den_scale = std::max(den_scale, std::abs(c));
    if (cr.den.is_zero() || poly_effectively_zero(cr.den, std::max(1.0, den_scale)))
        throw DegenerateSystem("solve_transform: determinant of the system vanishes");

    Polynomial den = truncate_checked(cr.den, static_cast<int>(m), "solve_transform denominator");
    if (den.degree() != static_cast<int>(m))
        throw DegenerateSystem("solve_transform: denominator degree mismatch");

    const double lead = den.leading();
    den = den.monic();

    std::vector<RationalFunction> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        Polynomial num =
            truncate_checked(cr.nums[i], static_cast<int>(m) - 1, "solve_transform numerator");
        num *= 1.0 / lead;
        if (num.degree() != static_cast<int>(m) - 1)
            throw DegenerateSystem("solve_transform: transform is not strictly proper");
        out.push_back({std::move(num), den});
    }
    return out;
}

std::vector<PoleTerm> partial_fractions(const RationalFunction& rf,
                                        const std::vector<PoleTerm>& poles,
                                        double* reconstruction_residual) {
    const int deg_den = rf.den.degree();
    int mult_sum = 0;
    for (const auto& p : poles) mult_sum += p.multiplicity;
    if (mult_sum != deg_den)
        throw InconsistentPoles("partial_fractions: multiplicities do not sum to deg(den)");
    if (rf.num.degree() >= deg_den)
        throw InconsistentPoles("partial_fractions: rational function is not strictly proper");

    const RationalFunction nf = rf.normalized();
    const std::vector<Complex> den_c = to_complex_coeffs(nf.den);
    const std::vector<Complex> num_c = to_complex_coeffs(nf.num);

    std::vector<PoleTerm> out = poles;
    for (std::size_t k = 0; k < out.size(); ++k) {
        auto& term = out[k];
        term.residues.assign(static_cast<std::size_t>(term.multiplicity), Complex(0.0));

        // conjugate poles get conjugate residues; compute the +Im one only
        if (term.pole.imag() < 0.0) {
            bool matched = false;
            for (std::size_t l = 0; l < k; ++l) {
                if (out[l].multiplicity == term.multiplicity &&
                    std::abs(out[l].pole - std::conj(term.pole)) == 0.0) {
                    for (int j = 0; j < term.multiplicity; ++j)
                        term.residues[static_cast<std::size_t>(j)] =
                            std::conj(out[l].residues[static_cast<std::size_t>(j)]);
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
        }

        // rest = den / (u - pole)^multiplicity
        std::vector<Complex> rest = den_c;
        for (int t = 0; t < term.multiplicity; ++t) {
            Complex rem;
            rest = synthetic_division(rest, term.pole, &rem);
        }

        const int n = term.multiplicity;
        const std::vector<Complex> a = taylor_at(num_c, term.pole, n);
        const std::vector<Complex> b = taylor_at(rest, term.pole, n);
        if (std::abs(b[0]) < 1e-300)
            throw InconsistentPoles("partial_fractions: pole multiplicity exceeds its order in den");

        // series division c = a / b up to order n-1
        std::vector<Complex> c(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            Complex acc = a[static_cast<std::size_t>(j)];
            for (int l = 1; l <= j; ++l)
                acc -= b[static_cast<std::size_t>(l)] * c[static_cast<std::size_t>(j - l)];
            c[static_cast<std::size_t>(j)] = acc / b[0];
        }
        // c_j is the coefficient of (u - pole)^{-(n-j)}
        for (int j = 0; j < n; ++j)
            term.residues[static_cast<std::size_t>(n - 1 - j)] = c[static_cast<std::size_t>(j)];
    }

    // re-evaluate the decomposition off the poles
    Complex centroid = 0.0;
    double spread = 0.0;
    for (const auto& p : out) centroid += p.pole;
    centroid /= static_cast<double>(out.size());
    for (const auto& p : out) spread = std::max(spread, std::abs(p.pole - centroid));
    const double radius = 2.0 * (1.0 + spread);

    double max_rel = 0.0;
    for (int s = 0; s < 5; ++s) {
        const double angle = 6.283185307179586 * s / 5.0 + 0.37;
        const Complex z = centroid + radius * Complex(std::cos(angle), std::sin(angle));
        Complex sum = 0.0;
        for (const auto& p : out) {
            Complex inv = 1.0 / (z - p.pole);
            Complex power = inv;
            for (int j = 0; j < p.multiplicity; ++j) {
                sum += p.residues[static_cast<std::size_t>(j)] * power;
                power *= inv;
            }
        }
        const Complex direct = eval_complex_poly(num_c, z) / eval_complex_poly(den_c, z);
        const double rel = std::abs(sum - direct) / std::max(std::abs(direct), 1e-300);
        max_rel = std::max(max_rel, rel);
    }
    if (reconstruction_residual) *reconstruction_residual = max_rel;
    if (max_rel > 1e-6)
        throw InconsistentPoles("partial_fractions: decomposition fails to reproduce the transform");

    return out;
}

std::complex<double> ExponentialSum::eval_complex(double tau) const {
    Complex sum = 0.0;
    for (const auto& term : terms) {
        double tau_pow = 1.0;
        for (int p = 0; p < term.power; ++p) tau_pow *= tau;
        sum += term.coefficient * tau_pow * std::exp(term.rate * tau);
    }
    return sum;
}

ExponentialSum ExponentialSum::derivative() const {
    ExponentialSum d;
    d.regime = regime;
    auto add_term = [&d](Complex coeff, int power, Complex rate) {
        if (coeff == Complex(0.0)) return;
        for (auto& t : d.terms) {
            if (t.power == power && t.rate == rate) {
                t.coefficient += coeff;
                return;
            }
        }
        d.terms.push_back({coeff, power, rate});
    };
    for (const auto& term : terms) {
        add_term(term.coefficient * term.rate, term.power, term.rate);
        if (term.power >= 1)
            add_term(term.coefficient * static_cast<double>(term.power), term.power - 1, term.rate);
    }
    return d;
}

ExponentialSum ExponentialSum::scaled(double s) const {
    ExponentialSum out = *this;
    for (auto& term : out.terms) term.coefficient *= s;
    return out;
}

ExponentialSum invert_transform(const std::vector<PoleTerm>& terms, int regime) {
    ExponentialSum sum;
    sum.regime = regime;
    for (const auto& pt : terms) {
        double factorial = 1.0;
        for (int j = 0; j < pt.multiplicity; ++j) {
            if (j >= 1) factorial *= static_cast<double>(j);
            sum.terms.push_back({pt.residues[static_cast<std::size_t>(j)] / factorial, j, pt.pole});
        }
    }
    std::sort(sum.terms.begin(), sum.terms.end(), [](const auto& a, const auto& b) {
        if (a.rate.real() != b.rate.real()) return a.rate.real() > b.rate.real();
        if (a.rate.imag() != b.rate.imag()) return a.rate.imag() > b.rate.imag();
        return a.power < b.power;
    });
    return sum;
}

TwoStateClosedForm two_state_closed_form(const MarketModel& model) {
    if (model.regimes() != 2)
        throw std::invalid_argument("two_state_closed_form: model must have two regimes");
    const RegimeScalars s = regime_scalars(model);
    const double q1 = model.generator.exit_rate(0);
    const double q2 = model.generator.exit_rate(1);

    TwoStateClosedForm cf;
    cf.alpha1 = s.delta[1] + q1 + q2;
    cf.alpha2 = s.delta[0] + q1 + q2;
    cf.beta0 = s.delta[0] * s.delta[1] + s.delta[0] * q2 + s.delta[1] * q1;
    cf.beta1 = s.delta[0] + s.delta[1] + q1 + q2;
    cf.discriminant = cf.beta1 * cf.beta1 - 4.0 * cf.beta0;
    if (!(cf.discriminant > 0.0))
        throw DegenerateSystem("two_state_closed_form: discriminant is not positive");

    const double sq = std::sqrt(cf.discriminant);
    const double q = -0.5 * (cf.beta1 + std::copysign(sq, cf.beta1));
    double r1, r2;
    if (q != 0.0) {
        r1 = q;
        r2 = cf.beta0 / q;
    } else {  // beta1 == 0
        r1 = 0.5 * sq;
        r2 = -0.5 * sq;
    }
    cf.u1 = std::max(r1, r2);
    cf.u2 = std::min(r1, r2);
    return cf;
}

double TwoStateClosedForm::g(int regime, double tau) const {
    const double alpha = regime == 0 ? alpha1 : alpha2;
    return ((u1 + alpha) * std::exp(u1 * tau) - (u2 + alpha) * std::exp(u2 * tau)) / (u1 - u2);
}

ValueSolution solve_g(const MarketModel& model, double horizon) {
    validate_model(model);
    if (horizon < 0.0) throw std::invalid_argument("solve_g: horizon must be >= 0");

    ValueSolution sol;
    sol.model = model;
    sol.scalars = regime_scalars(model);
    sol.horizon = horizon;

    const TransformSystem system = build_system(model, sol.scalars);
    sol.transforms = solve_transform(system);
    sol.denominator = sol.transforms[0].den;

    const std::vector<PoleTerm> poles = find_poles(sol.denominator, &sol.root_diag);

    const std::size_t m = model.regimes();
    sol.g.reserve(m);
    sol.pole_terms.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        double recon = 0.0;
        sol.pole_terms.push_back(partial_fractions(sol.transforms[i], poles, &recon));
        sol.max_reconstruction_residual = std::max(sol.max_reconstruction_residual, recon);
        sol.g.push_back(invert_transform(sol.pole_terms.back(), static_cast<int>(i)));
        sol.max_terminal_gap = std::max(sol.max_terminal_gap, std::abs(sol.g.back()(0.0) - 1.0));
    }

    if (m == 2) {
        const double q1 = model.generator.exit_rate(0);
        const double q2 = model.generator.exit_rate(1);
        const double beta1 = sol.scalars.delta[0] + sol.scalars.delta[1] + q1 + q2;
        const double beta0 =
            sol.scalars.delta[0] * sol.scalars.delta[1] + sol.scalars.delta[0] * q2 +
            sol.scalars.delta[1] * q1;
        sol.discriminant = beta1 * beta1 - 4.0 * beta0;
        const double disc_scale = std::max({1.0, beta1 * beta1, std::abs(beta0)});
        if (sol.discriminant > 1e-12 * disc_scale) {
            const TwoStateClosedForm cf = two_state_closed_form(model);
            const double t_max = horizon > 0.0 ? horizon : 1.0;
            double gap = 0.0;
            for (int k = 0; k <= 10; ++k) {
                const double tau = t_max * k / 10.0;
                for (int i = 0; i < 2; ++i) {
                    const double ref = cf.g(i, tau);
                    gap = std::max(gap, std::abs(sol.g_at(i, tau) - ref) / std::max(1.0, std::abs(ref)));
                }
            }
            sol.closed_form_gap = gap;
        }
    }
    return sol;
}

}  // namespace rsm
