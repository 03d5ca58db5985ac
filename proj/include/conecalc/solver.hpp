#pragma once

#include <vector>

#include "conecalc/fuchs.hpp"

namespace conecalc {

struct ConeSolverOptions {
    double residual_tol = 1e-6;     // a posteriori ||Au - f|| / ||f|| on the interior
    double taylor_residual_tol = 1e-5;
    bool check_ellipticity = true;
    double interior_fraction = 0.75; // |t| <= fraction * T counts as interior
    double line_margin = 1e-6;       // smallest distance of a root to any used weight line
    double im_half = 16.0;           // root scan window height
    NumericsConfig numerics;
};

/// Solution of A u = f at weight gamma, together with the data needed to
/// continue its Mellin transform across the strip: the Taylor levels of A,
/// the right-hand side, and the per-level grid functions u_l.
struct ModelSolution {
    WeightedGridFunction u;
    std::vector<WeightedGridFunction> levels; // u = sum of levels
    FuchsOperator A;
    WeightedGridFunction f;
    double gamma = 0.0;
    double beta = 0.0; // weight line Re z = (n+1)/2 - gamma
    int depth = 0;     // Taylor depth used
    double residual = 0.0;

    /// Meromorphic continuation of M u_l at any strip point, through the
    /// recursion V_l(z) = -h_0(z)^{-1} sum_{i=1..l} h_i(z+i) V_{l-i}(z+i),
    /// V_0(z) = h_0(z)^{-1} (M f)(z + mu). Entire in z except for the poles
    /// of the h_0 inverses.
    Vector continue_level(int l, Complex z) const
    {
        const Matrix h0 = A.taylor_symbol(0).eval(z, 0.0);
        Vector rhs;
        if (l == 0) {
            rhs = mellin_eval_at(f, z + static_cast<double>(A.mu)).transpose();
        } else {
            rhs = Vector::Zero(A.base.dim());
            for (int i = 1; i <= l; ++i) {
                const Complex zi = z + static_cast<double>(i);
                rhs -= A.taylor_symbol(i).eval(zi, 0.0) * continue_level(l - i, zi);
            }
        }
        return h0.partialPivLu().solve(rhs);
    }

    /// Continuation of the full M u = sum_l M u_l.
    Vector continue_mellin(Complex z) const
    {
        Vector acc = Vector::Zero(A.base.dim());
        for (int l = 0; l <= depth; ++l) acc += continue_level(l, z);
        return acc;
    }
};

namespace solver_detail {

/// Relative interior residual ||Au - f|| / ||f|| in the r^n dr dx norm,
/// restricted to |t| <= frac * T (and to r <= r_cap when finite).
inline double interior_residual(const WeightedGridFunction& resid, const WeightedGridFunction& f,
                                double frac, double r_cap = std::numeric_limits<double>::infinity())
{
    const RadialGrid& g = f.grid;
    const int n = f.cone_dim();
    double num = 0.0, den = 0.0;
    for (int i = 0; i < g.M; ++i) {
        if (std::abs(g.t(i)) > frac * g.T || g.r(i) > r_cap) continue;
        const double w = std::pow(g.r(i), n + 1);
        num += w * resid.values.row(i).squaredNorm();
        den += w * f.values.row(i).squaredNorm();
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline void require_roots_off_lines(const FuchsOperator& A, double beta, int depth,
                                    const ConeSolverOptions& opt)
{
    const auto roots = indicial_roots(A, beta - 0.5, beta + depth + 0.5, opt.im_half);
    for (const auto& root : roots) {
        for (int l = 0; l <= depth; ++l) {
            const double d = std::abs(root.z.real() - (beta + l));
            if (d < opt.line_margin) {
                if (l == 0)
                    throw NotElliptic("solve: indicial root at Re z = " +
                                      std::to_string(root.z.real()) + " on the weight line");
                throw IntermediateLineHitsRoot(
                    "solve: indicial root at Re z = " + std::to_string(root.z.real()) +
                    " on the intermediate line Re z = " + std::to_string(beta + l));
            }
        }
    }
}

} // namespace solver_detail

/// Mellin solver for the constant-coefficient model problem A u = f at
/// weight gamma: M u = h_0(z)^{-1} (M f)(z + mu) on Re z = (n+1)/2 - gamma.
/// The solution is verified a posteriori by applying A through direct
/// log-grid differentiation.
inline ModelSolution solve_model(const FuchsOperator& A, const WeightedGridFunction& f,
                                 double gamma, const ConeSolverOptions& opt = ConeSolverOptions())
{
    require_same_base(A.base, f.base, "solve_model");
    for (int j = 0; j <= A.degree(); ++j)
        for (int l = 1; l <= A.k_taylor; ++l)
            if (!A.a(j, l).is_zero())
                throw InvalidArgument("solve_model: operator has r-dependent coefficients; "
                                      "use solve_with_taylor");
    fuchs_detail::sign_convention_selftest();

    const double beta = 0.5 * (f.cone_dim() + 1) - gamma;
    if (opt.check_ellipticity) {
        const EllipticityReport rep = ellipticity_report(A, gamma);
        if (!rep.elliptic())
            throw NotElliptic("solve_model: operator not elliptic at gamma = " +
                              std::to_string(gamma) +
                              (rep.conormal_elliptic ? "" : " (conormal symbol degenerates)"));
        if (rep.nearest_root_distance < opt.line_margin)
            throw NotElliptic("solve_model: indicial root within " +
                              std::to_string(opt.line_margin) + " of the weight line");
    }

    SpectralFunction F = mellin_forward(f, beta + A.mu, opt.numerics);
    F.beta = beta; // samples of M(r^mu f) on the gamma line
    const MeromorphicSymbol h0 = A.taylor_symbol(0);
    for (int k = 0; k < f.grid.M; ++k) {
        const Matrix h = h0.eval(F.z(k), 0.0);
        F.values.row(k) = h.partialPivLu().solve(F.values.row(k).transpose()).transpose();
    }

    ModelSolution sol;
    sol.u = mellin_inverse(F);
    sol.u.gamma = gamma;
    sol.levels = {sol.u};
    sol.A = A;
    sol.f = f;
    sol.gamma = gamma;
    sol.beta = beta;
    sol.depth = 0;

    WeightedGridFunction resid = apply_fuchs(A, sol.u);
    resid.values -= f.values;
    sol.residual = solver_detail::interior_residual(resid, f, opt.interior_fraction);
    if (sol.residual > opt.residual_tol)
        throw ResidualTooLarge("solve_model: a posteriori residual " +
                               std::to_string(sol.residual) + " exceeds " +
                               std::to_string(opt.residual_tol));
    return sol;
}

/// Solver for operators with Taylor coefficients a_j(r) = sum_l a_{j,l} r^l:
/// u = sum_{l=0..depth} u_l with A_0 u_0 = f and
/// A_0 u_l = - sum_{i=1..l} r^i A_i u_{l-i}. Spectrally the recursion runs
/// on the shifted lines Re z = beta + i, so no indicial root may sit on any
/// of them.
inline ModelSolution solve_with_taylor(const FuchsOperator& A, const WeightedGridFunction& f,
                                       double gamma, int depth,
                                       const ConeSolverOptions& opt = ConeSolverOptions())
{
    require_same_base(A.base, f.base, "solve_with_taylor");
    if (depth < 0) throw InvalidArgument("solve_with_taylor: negative depth");
    fuchs_detail::sign_convention_selftest();

    const double beta = 0.5 * (f.cone_dim() + 1) - gamma;
    if (opt.check_ellipticity) {
        const EllipticityReport rep = ellipticity_report(A.taylor_level(0), gamma);
        if (!rep.elliptic())
            throw NotElliptic("solve_with_taylor: top conormal symbol not elliptic at gamma = " +
                              std::to_string(gamma));
        solver_detail::require_roots_off_lines(A, beta, depth, opt);
    }

    const RadialGrid& g = f.grid;
    const int dim = f.base.dim();
    const MeromorphicSymbol h0 = A.taylor_symbol(0);
    std::vector<MeromorphicSymbol> hs;
    for (int l = 0; l <= std::min(depth, A.k_taylor); ++l) hs.push_back(A.taylor_symbol(l));

    // V[l][c] = M u_l sampled on the line Re z = beta + c, c = 0..depth-l
    std::vector<std::vector<Matrix>> V(static_cast<std::size_t>(depth) + 1);
    for (int l = 0; l <= depth; ++l)
        V[static_cast<std::size_t>(l)].resize(static_cast<std::size_t>(depth - l) + 1);

    for (int c = depth; c >= 0; --c) {
        // M(r^mu f) on the line beta + c
        SpectralFunction F = mellin_forward(f, beta + c + A.mu, opt.numerics);
        Matrix V0(g.M, dim);
        for (int k = 0; k < g.M; ++k) {
            const Complex z(beta + c, g.rho(k));
            V0.row(k) = h0.eval(z, 0.0)
                            .partialPivLu()
                            .solve(F.values.row(k).transpose())
                            .transpose();
        }
        V[0][static_cast<std::size_t>(c)] = std::move(V0);
    }
    for (int l = 1; l <= depth; ++l) {
        for (int c = depth - l; c >= 0; --c) {
            Matrix rhs = Matrix::Zero(g.M, dim);
            for (int i = 1; i <= l; ++i) {
                if (i >= static_cast<int>(hs.size())) break; // Taylor coefficients beyond stored are zero
                const Matrix& Vprev = V[static_cast<std::size_t>(l - i)][static_cast<std::size_t>(c + i)];
                for (int k = 0; k < g.M; ++k) {
                    const Complex zi(beta + c + i, g.rho(k));
                    rhs.row(k) -= (hs[static_cast<std::size_t>(i)].eval(zi, 0.0) *
                                   Vprev.row(k).transpose())
                                      .transpose();
                }
            }
            Matrix Vl(g.M, dim);
            for (int k = 0; k < g.M; ++k) {
                const Complex z(beta + c, g.rho(k));
                Vl.row(k) =
                    h0.eval(z, 0.0).partialPivLu().solve(rhs.row(k).transpose()).transpose();
            }
            V[static_cast<std::size_t>(l)][static_cast<std::size_t>(c)] = std::move(Vl);
        }
    }

    ModelSolution sol;
    sol.A = A;
    sol.f = f;
    sol.gamma = gamma;
    sol.beta = beta;
    sol.depth = depth;
    sol.u = WeightedGridFunction(g, f.base, gamma);
    for (int l = 0; l <= depth; ++l) {
        SpectralFunction S(g, f.base, beta);
        S.values = V[static_cast<std::size_t>(l)][0];
        WeightedGridFunction ul = mellin_inverse(S);
        ul.gamma = gamma;
        sol.u.values += ul.values;
        sol.levels.push_back(std::move(ul));
    }

    WeightedGridFunction resid = apply_fuchs(A, sol.u);
    resid.values -= f.values;
    // the recursion is asymptotic at the tip: measure the residual on r <= 1
    sol.residual = solver_detail::interior_residual(resid, f, opt.interior_fraction, 1.0);
    if (sol.residual > opt.taylor_residual_tol)
        throw ResidualTooLarge("solve_with_taylor: residual " + std::to_string(sol.residual) +
                               " exceeds " + std::to_string(opt.taylor_residual_tol));
    return sol;
}

} // namespace conecalc
