#ifndef RSMERTON_LAPLACE_HPP
#define RSMERTON_LAPLACE_HPP

#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rsmerton/model.hpp"
#include "rsmerton/polynomial.hpp"
#include "rsmerton/roots.hpp"

namespace rsm {

/// The m x m polynomial matrix of the transform-domain linear system
/// A(u) L(u) = 1: diagonal u + delta(i) + q_i, off-diagonal -q_ij.
struct TransformSystem {
    std::size_t m = 0;
    std::vector<Polynomial> entries;  // row-major

    const Polynomial& operator()(std::size_t i, std::size_t j) const { return entries[i * m + j]; }
    Polynomial& operator()(std::size_t i, std::size_t j) { return entries[i * m + j]; }
};

class DegenerateSystem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InconsistentPoles : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Closed-form representation sum_k c_k tau^{p_k} exp(u_k tau) of one g(i, .).
/// Complex modes appear in conjugate pairs, so evaluation is real up to
/// rounding; operator() returns the real part.
struct ExponentialSum {
    struct Term {
        std::complex<double> coefficient;
        int power = 0;  // >= 0
        std::complex<double> rate;
    };

    std::vector<Term> terms;
    int regime = 0;

    std::complex<double> eval_complex(double tau) const;
    double operator()(double tau) const { return eval_complex(tau).real(); }

    ExponentialSum derivative() const;       // d/dtau, term by term
    ExponentialSum scaled(double s) const;   // every coefficient times s
};

/// Explicit two-state solution: transforms (u + alpha_i) / (u^2 + beta1 u + beta0)
/// inverted through the two real roots of the quadratic denominator.
struct TwoStateClosedForm {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double beta0 = 0.0;
    double beta1 = 0.0;
    double discriminant = 0.0;  // beta1^2 - 4 beta0
    double u1 = 0.0;            // larger root
    double u2 = 0.0;

    double g(int regime, double tau) const;
};

/// Full solution of g plus diagnostics of the transform pipeline.
struct ValueSolution {
    MarketModel model;
    RegimeScalars scalars;
    double horizon = 0.0;
    std::vector<ExponentialSum> g;

    // diagnostics
    Polynomial denominator;                        // shared monic denominator
    std::vector<RationalFunction> transforms;      // L_i
    std::vector<std::vector<PoleTerm>> pole_terms; // per regime, residues filled
    RootDiagnostics root_diag;
    double max_reconstruction_residual = 0.0;      // partial-fraction re-evaluation
    double max_terminal_gap = 0.0;                 // max_i |g_i(0) - 1|
    double discriminant = std::numeric_limits<double>::quiet_NaN();    // m == 2
    double closed_form_gap = std::numeric_limits<double>::quiet_NaN(); // m == 2

    double g_at(int regime, double tau) const { return g[static_cast<std::size_t>(regime)](tau); }
};

enum class DetMethod {
    Auto,           // Bareiss for m <= 6, interpolation above
    Bareiss,        // fraction-free elimination over polynomials
    Interpolation,  // evaluation at scaled roots of unity + inverse DFT
};

/// Assemble the transform-domain system. Pre: model validated.
TransformSystem build_system(const MarketModel& model, const RegimeScalars& scalars);

/// Cramer's rule over polynomials: L_i = det(A_i) / det(A) with column i of
/// A_i replaced by ones. Every result is strictly proper with the same monic
/// degree-m denominator. Throws DegenerateSystem if det(A) vanishes.
std::vector<RationalFunction> solve_transform(const TransformSystem& system,
                                              DetMethod method = DetMethod::Auto);

/// Residues of rf at the given poles (multiplicities must cover deg(den)).
/// For a simple pole the residue is num(u_k)/den'(u_k); higher multiplicities
/// come from the Taylor expansion of num/(den/(u-u_k)^n) at u_k.
std::vector<PoleTerm> partial_fractions(const RationalFunction& rf,
                                        const std::vector<PoleTerm>& poles,
                                        double* reconstruction_residual = nullptr);

/// Inverse transform: a residue c on (u-u_k)^{-(n+1)} contributes
/// c tau^n exp(u_k tau) / n!.
ExponentialSum invert_transform(const std::vector<PoleTerm>& terms, int regime = 0);

/// End-to-end pipeline: build, solve, factor, decompose, invert.
/// For m == 2 the closed form is evaluated alongside as a cross-check and the
/// largest relative gap is reported in the diagnostics.
ValueSolution solve_g(const MarketModel& model, double horizon);

/// The explicit m = 2 fast path. Pre: model validated, two regimes.
TwoStateClosedForm two_state_closed_form(const MarketModel& model);

}  // namespace rsm

#endif
