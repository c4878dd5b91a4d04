#ifndef RSMERTON_ROOTS_HPP
#define RSMERTON_ROOTS_HPP

#include <complex>
#include <stdexcept>
#include <vector>

#include "rsmerton/polynomial.hpp"

namespace rsm {

/// One pole of a strictly proper rational function together with the
/// partial-fraction residues of (u - pole)^{-1} ... (u - pole)^{-multiplicity}.
/// find_poles leaves residues empty; partial_fractions fills them.
struct PoleTerm {
    std::complex<double> pole;
    int multiplicity = 1;
    std::vector<std::complex<double>> residues;
};

class RootFindingFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RootOptions {
    double tol = 1e-12;           // convergence test on |p(z)| / scale(z)
    int max_iterations = 200;
    double cluster_eps = 1e-8;    // relative merge distance for coincident roots
    double residual_tol = 1e-9;   // accepted |p(pole)| / scale(pole) of reported poles
    bool companion_fallback = true;
};

struct RootDiagnostics {
    int iterations = 0;
    bool used_companion_fallback = false;
    double max_residual = 0.0;  // max |p(pole)| / scale(pole) over reported poles
};

/// Aberth-Ehrlich simultaneous iteration on a monic polynomial.
/// Returns the raw (unclustered) roots; success reports whether every root
/// met the tolerance or stagnated at working precision within the budget.
std::vector<std::complex<double>> aberth_roots(const Polynomial& monic, const RootOptions& opts,
                                               int* iterations, bool* success);

/// Eigenvalues of the companion matrix; fallback route.
std::vector<std::complex<double>> companion_eigenvalues(const Polynomial& monic);

/// All roots of den with multiplicities: roots closer than
/// cluster_eps * max(1, |root|) are merged, and near-coincident clusters are
/// merged when a multiple-root interpretation matches den at working
/// precision. Complex poles come in exact conjugate pairs. Throws
/// RootFindingFailure when the iteration does not converge or a reported
/// root fails the residual check.
std::vector<PoleTerm> find_poles(const Polynomial& den, RootDiagnostics* diag = nullptr,
                                 const RootOptions& opts = {});

}  // namespace rsm

#endif
