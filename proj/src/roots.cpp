#include "rsmerton/roots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace rsm {

namespace {

using Complex = std::complex<double>;

constexpr double kEps = std::numeric_limits<double>::epsilon();

// p(z) and p'(z) in one Horner pass
void eval_with_derivative(const std::vector<double>& c, Complex z, Complex& p, Complex& dp) {
    p = c.back();
    dp = 0.0;
    for (std::size_t k = c.size() - 1; k-- > 0;) {
        dp = dp * z + p;
        p = p * z + c[k];
    }
}

double eval_scale(const std::vector<double>& c, Complex z) {
    const double az = std::abs(z);
    double s = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) s = s * az + std::abs(c[k]);
    return s;
}

// Fujiwara bound on root magnitudes of a monic polynomial
double root_magnitude_bound(const std::vector<double>& c) {
    const std::size_t n = c.size() - 1;
    double bound = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double a = std::abs(c[k]);
        if (k == 0) a *= 0.5;
        bound = std::max(bound, std::pow(a, 1.0 / static_cast<double>(n - k)));
    }
    return 2.0 * bound;
}

// a few Newton steps, keeping the best iterate seen
Complex newton_polish(const std::vector<double>& c, Complex z, int max_steps) {
    Complex best = z;
    double best_res = std::abs(Polynomial(c).eval(z));  // small n; clarity over speed
    for (int it = 0; it < max_steps; ++it) {
        Complex p, dp;
        eval_with_derivative(c, z, p, dp);
        const double res = std::abs(p);
        if (res < best_res) {
            best_res = res;
            best = z;
        }
        if (res == 0.0 || std::abs(dp) == 0.0) break;
        const Complex step = p / dp;
        if (std::abs(step) <= 2.0 * kEps * (1.0 + std::abs(z))) break;
        z -= step;
    }
    Complex p, dp;
    eval_with_derivative(c, z, p, dp);
    if (std::abs(p) < best_res) best = z;
    return best;
}

std::vector<double> derivative_coeffs(std::vector<double> c, int order) {
    for (int t = 0; t < order; ++t) {
        if (c.size() <= 1) return {0.0};
        std::vector<double> d(c.size() - 1);
        for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = c[k] * static_cast<double>(k);
        c = std::move(d);
    }
    return c;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

std::vector<Complex> aberth_roots(const Polynomial& monic, const RootOptions& opts,
                                  int* iterations, bool* success) {
    const auto& c = monic.coeffs();
    const int n = monic.degree();
    std::vector<Complex> z(static_cast<std::size_t>(n));

    // initial guesses on a circle around the root centroid
    const Complex centroid(-c[static_cast<std::size_t>(n - 1)] / n, 0.0);
    const double radius = std::max(0.5 * root_magnitude_bound(c), 0.25 * (1.0 + std::abs(centroid)));
    for (int k = 0; k < n; ++k) {
        const double angle = 6.283185307179586 * k / n + 0.376;
        z[static_cast<std::size_t>(k)] = centroid + radius * Complex(std::cos(angle), std::sin(angle));
    }

    std::vector<bool> done(static_cast<std::size_t>(n), false);
    int iter = 0;
    bool all_done = false;
    for (; iter < opts.max_iterations && !all_done; ++iter) {
        all_done = true;
        for (int i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            if (done[ui]) continue;

            Complex p, dp;
            eval_with_derivative(c, z[ui], p, dp);
            if (std::abs(p) <= opts.tol * eval_scale(c, z[ui])) {
                done[ui] = true;
                continue;
            }
            all_done = false;

            Complex correction;
            if (std::abs(dp) == 0.0) {
                // flat spot: nudge off it
                correction = Complex(0.001, 0.002) * (1.0 + std::abs(z[ui]));
            } else {
                const Complex w = p / dp;
                Complex repulsion = 0.0;
                for (int j = 0; j < n; ++j) {
                    if (j == i) continue;
                    const Complex diff = z[ui] - z[static_cast<std::size_t>(j)];
                    if (std::abs(diff) > 0.0) repulsion += 1.0 / diff;
                }
                const Complex denom = 1.0 - w * repulsion;
                correction = std::abs(denom) > 1e-300 ? w / denom : w;
            }
            if (std::abs(correction) <= 4.0 * kEps * (1.0 + std::abs(z[ui]))) {
                done[ui] = true;  // stagnated at working precision
                continue;
            }
            z[ui] -= correction;
        }
    }

    if (iterations) *iterations = iter;
    if (success) *success = std::all_of(done.begin(), done.end(), [](bool b) { return b; });
    return z;
}

std::vector<Complex> companion_eigenvalues(const Polynomial& monic) {
    const int n = monic.degree();
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -monic.coeffs()[static_cast<std::size_t>(i)];
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, /*computeEigenvectors=*/false);
    const auto ev = es.eigenvalues();
    std::vector<Complex> roots(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) roots[static_cast<std::size_t>(i)] = ev(i);
    return roots;
}

namespace {

// Newton on the (k-1)-th derivative: a multiplicity-k root of p is a simple
// root of p^{(k-1)}, so this converges quadratically to the cluster center.
Complex polish_multiple(const std::vector<double>& c, Complex z, int multiplicity) {
    if (multiplicity <= 1) return newton_polish(c, z, 4);
    const std::vector<double> d = derivative_coeffs(c, multiplicity - 1);
    return newton_polish(d, z, 40);
}

struct Cluster {
    Complex center;
    int size = 0;
};

std::vector<Cluster> cluster_roots(const std::vector<double>& c, std::vector<Complex> roots,
                                   const RootOptions& opts) {
    const int n = static_cast<int>(roots.size());

    // hard pass: the unconditional coincidence rule
    UnionFind uf(n);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            const double d = std::abs(roots[static_cast<std::size_t>(a)] - roots[static_cast<std::size_t>(b)]);
            const double s = std::max({1.0, std::abs(roots[static_cast<std::size_t>(a)]),
                                       std::abs(roots[static_cast<std::size_t>(b)])});
            if (d <= opts.cluster_eps * s) uf.unite(a, b);
        }

    std::vector<Cluster> clusters;
    {
        std::vector<int> rep(static_cast<std::size_t>(n), -1);
        for (int i = 0; i < n; ++i) {
            const int r = uf.find(i);
            if (rep[static_cast<std::size_t>(r)] < 0) {
                rep[static_cast<std::size_t>(r)] = static_cast<int>(clusters.size());
                clusters.push_back({0.0, 0});
            }
            auto& cl = clusters[static_cast<std::size_t>(rep[static_cast<std::size_t>(r)])];
            cl.center += roots[static_cast<std::size_t>(i)];
            cl.size += 1;
        }
        for (auto& cl : clusters) {
            cl.center /= static_cast<double>(cl.size);
            cl.center = polish_multiple(c, cl.center, cl.size);
        }
    }

    // soft pass: merge near-coincident clusters only when the multiple-root
    // interpretation reproduces p at working precision at the joint center.
    // The radius must cover the stagnation spread of a multiplicity-k root,
    // |p| ~ tol*scale at distance (tol*scale)^{1/k}; 3e-3 covers k <= 4.
    const double soft_radius = 3e5 * opts.cluster_eps;
    bool merged = true;
    while (merged && clusters.size() > 1) {
        merged = false;
        for (std::size_t a = 0; a < clusters.size() && !merged; ++a) {
            for (std::size_t b = a + 1; b < clusters.size() && !merged; ++b) {
                const double d = std::abs(clusters[a].center - clusters[b].center);
                const double s = std::max({1.0, std::abs(clusters[a].center), std::abs(clusters[b].center)});
                if (d > soft_radius * s) continue;
                const int k = clusters[a].size + clusters[b].size;
                Complex center = (clusters[a].center * static_cast<double>(clusters[a].size) +
                                  clusters[b].center * static_cast<double>(clusters[b].size)) /
                                 static_cast<double>(k);
                center = polish_multiple(c, center, k);
                const double res = std::abs(Polynomial(c).eval(center));
                if (res <= opts.tol * eval_scale(c, center)) {
                    clusters[a] = {center, k};
                    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(b));
                    merged = true;
                }
            }
        }
    }
    return clusters;
}

}  // namespace

std::vector<PoleTerm> find_poles(const Polynomial& den, RootDiagnostics* diag,
                                 const RootOptions& opts) {
    if (den.is_zero() || den.degree() < 1)
        throw std::invalid_argument("find_poles: denominator must have degree >= 1");
    const Polynomial monic = den.monic();
    const auto& c = monic.coeffs();
    const int n = monic.degree();

    RootDiagnostics local;
    std::vector<Complex> raw;

    if (n == 1) {
        raw = {Complex(-c[0], 0.0)};
    } else if (n == 2) {
        const double b = c[1], a0 = c[0];
        const double disc = b * b - 4.0 * a0;
        if (disc > 0.0) {
            const double sq = std::sqrt(disc);
            const double q = -0.5 * (b + std::copysign(sq, b));
            if (q != 0.0)
                raw = {Complex(q, 0.0), Complex(a0 / q, 0.0)};
            else  // b == 0, a0 < 0
                raw = {Complex(0.5 * sq, 0.0), Complex(-0.5 * sq, 0.0)};
        } else if (disc == 0.0) {
            raw = {Complex(-0.5 * b, 0.0), Complex(-0.5 * b, 0.0)};
        } else {
            const double im = 0.5 * std::sqrt(-disc);
            raw = {Complex(-0.5 * b, im), Complex(-0.5 * b, -im)};
        }
    } else {
        bool ok = false;
        raw = aberth_roots(monic, opts, &local.iterations, &ok);
        if (!ok) {
            if (!opts.companion_fallback)
                throw RootFindingFailure("find_poles: Aberth iteration did not converge within budget");
            local.used_companion_fallback = true;
            raw = companion_eigenvalues(monic);
        }
        for (auto& z : raw) z = newton_polish(c, z, 3);
    }

    // snap numerically-real roots onto the axis
    for (auto& z : raw)
        if (std::abs(z.imag()) <= 1e-9 * std::max(1.0, std::abs(z))) z = Complex(z.real(), 0.0);

    std::vector<Cluster> clusters = cluster_roots(c, raw, opts);

    for (auto& cl : clusters)
        if (std::abs(cl.center.imag()) <= 1e-9 * std::max(1.0, std::abs(cl.center)))
            cl.center = Complex(cl.center.real(), 0.0);

    // enforce exact conjugate pairs among the complex poles
    std::vector<int> partner(clusters.size(), -1);
    for (std::size_t a = 0; a < clusters.size(); ++a) {
        if (clusters[a].center.imag() <= 0.0 || partner[a] >= 0) continue;
        double best = std::numeric_limits<double>::infinity();
        int match = -1;
        for (std::size_t b = 0; b < clusters.size(); ++b) {
            if (b == a || partner[b] >= 0 || clusters[b].center.imag() >= 0.0) continue;
            const double d = std::abs(std::conj(clusters[b].center) - clusters[a].center);
            if (d < best) {
                best = d;
                match = static_cast<int>(b);
            }
        }
        const double tol = 1e-6 * std::max(1.0, std::abs(clusters[a].center));
        if (match < 0 || best > tol || clusters[static_cast<std::size_t>(match)].size != clusters[a].size)
            throw RootFindingFailure("find_poles: conjugate pairing of complex roots failed");
        const auto ub = static_cast<std::size_t>(match);
        const double re = 0.5 * (clusters[a].center.real() + clusters[ub].center.real());
        const double im = 0.5 * (clusters[a].center.imag() - clusters[ub].center.imag());
        clusters[a].center = Complex(re, im);
        clusters[ub].center = Complex(re, -im);
        partner[a] = match;
        partner[ub] = static_cast<int>(a);
    }

    // residual check on every reported pole
    for (const auto& cl : clusters) {
        const double res = std::abs(monic.eval(cl.center));
        const double scale = std::max(eval_scale(c, cl.center), 1e-300);
        local.max_residual = std::max(local.max_residual, res / scale);
        if (res > opts.residual_tol * scale)
            throw RootFindingFailure("find_poles: reported root fails the residual check");
    }

    std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
        if (a.center.real() != b.center.real()) return a.center.real() > b.center.real();
        return a.center.imag() > b.center.imag();
    });

    int total = 0;
    std::vector<PoleTerm> poles;
    poles.reserve(clusters.size());
    for (const auto& cl : clusters) {
        poles.push_back({cl.center, cl.size, {}});
        total += cl.size;
    }
    if (total != n) throw RootFindingFailure("find_poles: multiplicities do not sum to the degree");

    if (diag) *diag = local;
    return poles;
}

}  // namespace rsm
