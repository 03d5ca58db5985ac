#pragma once

#include <vector>

#include "conecalc/asymptotic_types.hpp"
#include "conecalc/solver.hpp"

namespace conecalc {

struct ExtractionOptions {
    double margin = 1e-3;     // contour-shift margin to the target line
    double coeff_rel_tol = 1e-9; // coefficients below this (relative) are dropped
    Cutoff cutoff;            // omega used to synthesise the singular part
    double im_half = 16.0;
    ContourOptions contour;
};

/// Coefficients of one exponent: terms[k] multiplies omega(r) r^{-p} log^k r
/// (one complex value per base mode).
struct SingularTerm {
    Complex p;
    std::vector<Vector> coeff; // k = 0..m
    int log_order() const { return static_cast<int>(coeff.size()) - 1; }
};

struct Extraction {
    std::vector<SingularTerm> terms;
    DiscreteAsymptoticType type;
    WeightedGridFunction u_sing;
    WeightedGridFunction u_flat;
};

namespace extraction_detail {

inline WeightedGridFunction synthesize_singular(const std::vector<SingularTerm>& terms,
                                                const RadialGrid& g, const BaseModel& base,
                                                double gamma, const Cutoff& omega)
{
    WeightedGridFunction out(g, base, gamma);
    for (int i = 0; i < g.M; ++i) {
        const double r = g.r(i);
        const double w = omega(r);
        if (w == 0.0) continue;
        const double t = g.t(i);
        for (const auto& term : terms) {
            const Complex rp = std::exp(-term.p * t); // r^{-p}
            double logk = 1.0;
            for (int k = 0; k <= term.log_order(); ++k) {
                out.values.row(i) +=
                    (w * rp * logk) * term.coeff[static_cast<std::size_t>(k)].transpose();
                logk *= t;
            }
        }
    }
    return out;
}

inline double factorial(int k)
{
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

} // namespace extraction_detail

/// Discrete asymptotics of a solved cone problem: the inversion contour is
/// shifted from Re z = beta down to Re z = beta + theta + margin, and each
/// pole of the continued Mellin transform passed on the way contributes one
/// Laurent block. The Laurent data of M u at p maps to the coefficients of
/// omega(r) r^{-p} log^k r via c_k -> (-1)^k / k! c_k. The remainder
/// u - u_sing is flat of order |theta| relative to gamma.
inline Extraction extract_asymptotics(const ModelSolution& sol, double theta,
                                      const ExtractionOptions& opt = ExtractionOptions())
{
    if (!(theta < 0.0)) throw InvalidArgument("extract_asymptotics: theta must be negative");
    const double beta = sol.beta;
    const double target = beta + theta;

    // candidate poles: indicial roots in [target, beta + depth] shifted down
    // by the Taylor levels
    const auto roots =
        indicial_roots(sol.A, target - 0.25, beta + sol.depth + 0.5, opt.im_half, opt.contour);
    std::vector<Complex> candidates;
    std::vector<int> orders;
    auto push_candidate = [&](Complex p, int ord) {
        if (p.real() <= target || p.real() >= beta) return;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (std::abs(candidates[i] - p) < 1e-7) {
                orders[i] = std::min(orders[i] + ord, 9);
                return;
            }
        }
        candidates.push_back(p);
        orders.push_back(ord);
    };
    for (const auto& root : roots)
        for (int l = 0; l <= sol.depth; ++l)
            push_candidate(root.z - static_cast<double>(l), root.multiplicity);

    for (const Complex& p : candidates) {
        if (p.real() - target < opt.margin)
            throw PoleTooCloseToTargetLine(
                "extract_asymptotics: pole at Re z = " + std::to_string(p.real()) +
                " within margin " + std::to_string(opt.margin) + " of the target line Re z = " +
                std::to_string(target));
        if (beta - p.real() < opt.margin)
            throw PoleTooCloseToTargetLine(
                "extract_asymptotics: pole at Re z = " + std::to_string(p.real()) +
                " within margin of the source line Re z = " + std::to_string(beta));
    }

    // one Laurent block of the continued M u per candidate pole
    MatrixFn continued = [&sol](Complex z) -> Matrix { return sol.continue_mellin(z); };
    std::vector<SingularTerm> terms;
    double scale = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const Complex p = candidates[i];
        double gap = std::min(p.real() - target, beta - p.real());
        for (std::size_t j = 0; j < candidates.size(); ++j)
            if (j != i) gap = std::min(gap, std::abs(p - candidates[j]));
        const double radius = std::min(0.45 * gap, 0.3);
        const LaurentBlock blk =
            laurent_extract(continued, p, orders[i] - 1, radius, opt.contour);

        SingularTerm term;
        term.p = p;
        for (int k = 0; k < blk.pole_order(); ++k) {
            // (2 pi i)^{-1} oint r^{-z} c (z-p)^{-(k+1)} dz = c r^{-p} (-log r)^k / k!
            const double s = (k % 2 == 0 ? 1.0 : -1.0) / extraction_detail::factorial(k);
            term.coeff.push_back(s * blk.coeffs[static_cast<std::size_t>(k)].col(0));
            scale = std::max(scale, term.coeff.back().cwiseAbs().maxCoeff());
        }
        terms.push_back(std::move(term));
    }

    // prune empty coefficients and exponents
    const double cut = std::max(opt.coeff_rel_tol * scale, 1e-14 * std::max(scale, 1.0));
    std::vector<SingularTerm> kept;
    for (auto& term : terms) {
        while (!term.coeff.empty() && term.coeff.back().cwiseAbs().maxCoeff() <= cut)
            term.coeff.pop_back();
        if (!term.coeff.empty()) kept.push_back(std::move(term));
    }
    std::sort(kept.begin(), kept.end(), [](const SingularTerm& a, const SingularTerm& b) {
        if (a.p.real() != b.p.real()) return a.p.real() > b.p.real();
        return a.p.imag() < b.p.imag();
    });

    Extraction out;
    out.terms = std::move(kept);
    WeightData wd(sol.gamma, theta, sol.f.cone_dim());
    out.type = DiscreteAsymptoticType(wd);
    for (const auto& term : out.terms)
        out.type.pairs.push_back(AsymPair{term.p, term.log_order()});
    out.type.normalize();

    out.u_sing = extraction_detail::synthesize_singular(out.terms, sol.u.grid, sol.u.base,
                                                        sol.gamma, opt.cutoff);
    out.u_flat = sol.u;
    out.u_flat.values -= out.u_sing.values;
    return out;
}

/// Fitting route for a bare grid function: least squares against the
/// singular basis {r^{-p} log^k r} over a window near the tip, in the
/// e^{beta t}-weighted norm. Candidates (with maximal log order) must be
/// supplied, e.g. from indicial data. Used when no solver-side continuation
/// of M u is available.
inline Extraction extract_asymptotics_fit(const WeightedGridFunction& u,
                                          const std::vector<ZeroLocation>& candidates,
                                          double gamma, double theta,
                                          const ExtractionOptions& opt = ExtractionOptions())
{
    if (!(theta < 0.0)) throw InvalidArgument("extract_asymptotics_fit: theta must be negative");
    const RadialGrid& g = u.grid;
    const double beta = 0.5 * (u.cone_dim() + 1) - gamma;
    const double target = beta + theta;

    std::vector<std::pair<Complex, int>> basis; // (p, k)
    for (const auto& c : candidates) {
        if (c.z.real() <= target + opt.margin || c.z.real() >= beta - opt.margin) continue;
        for (int k = 0; k < c.multiplicity; ++k) basis.emplace_back(c.z, k);
    }

    // fit window: omega == 1 and well clear of the window end
    std::vector<int> rows;
    for (int i = 0; i < g.M; ++i) {
        const double t = g.t(i);
        if (t >= -0.72 * g.T && t <= std::log(0.45)) rows.push_back(i);
    }
    if (rows.size() < 8 + 2 * basis.size())
        throw InvalidArgument("extract_asymptotics_fit: fit window too small");

    Extraction out;
    WeightData wd(gamma, theta, u.cone_dim());
    out.type = DiscreteAsymptoticType(wd);

    std::vector<SingularTerm> terms;
    if (!basis.empty()) {
        const int nrow = static_cast<int>(rows.size());
        const int ncol = static_cast<int>(basis.size());
        Eigen::MatrixXcd Vd(nrow, ncol);
        Eigen::VectorXd wgt(nrow);
        for (int r = 0; r < nrow; ++r) {
            const double t = g.t(rows[static_cast<std::size_t>(r)]);
            wgt(r) = std::exp(beta * t);
            for (int c = 0; c < ncol; ++c) {
                const auto& [p, k] = basis[static_cast<std::size_t>(c)];
                Vd(r, c) = std::exp(-p * t) * std::pow(t, k);
            }
        }
        Eigen::MatrixXcd Vw = wgt.asDiagonal() * Vd;
        const auto qr = Vw.colPivHouseholderQr();

        std::vector<Eigen::VectorXcd> sols(static_cast<std::size_t>(u.base.dim()));
        for (int m = 0; m < u.base.dim(); ++m) {
            Eigen::VectorXcd rhs(nrow);
            for (int r = 0; r < nrow; ++r)
                rhs(r) = wgt(r) * u.values(rows[static_cast<std::size_t>(r)], m);
            sols[static_cast<std::size_t>(m)] = qr.solve(rhs);
        }

        // regroup per exponent
        for (const auto& c : candidates) {
            SingularTerm term;
            term.p = c.z;
            bool any = false;
            for (int k = 0; k < c.multiplicity; ++k) {
                int col = -1;
                for (int j = 0; j < ncol; ++j)
                    if (std::abs(basis[static_cast<std::size_t>(j)].first - c.z) < 1e-12 &&
                        basis[static_cast<std::size_t>(j)].second == k)
                        col = j;
                if (col < 0) continue;
                Vector v(u.base.dim());
                for (int m = 0; m < u.base.dim(); ++m)
                    v(m) = sols[static_cast<std::size_t>(m)](col);
                term.coeff.push_back(v);
                if (v.cwiseAbs().maxCoeff() > 0.0) any = true;
            }
            if (any) terms.push_back(std::move(term));
        }
    }

    double scale = 0.0;
    for (const auto& t : terms)
        for (const auto& v : t.coeff) scale = std::max(scale, v.cwiseAbs().maxCoeff());
    const double cut = std::max(opt.coeff_rel_tol * scale, 1e-14 * std::max(scale, 1.0));
    std::vector<SingularTerm> kept;
    for (auto& t : terms) {
        while (!t.coeff.empty() && t.coeff.back().cwiseAbs().maxCoeff() <= cut)
            t.coeff.pop_back();
        if (!t.coeff.empty()) kept.push_back(std::move(t));
    }
    out.terms = std::move(kept);
    for (const auto& term : out.terms)
        out.type.pairs.push_back(AsymPair{term.p, term.log_order()});
    out.type.normalize();

    out.u_sing =
        extraction_detail::synthesize_singular(out.terms, g, u.base, gamma, opt.cutoff);
    out.u_flat = u;
    out.u_flat.values -= out.u_sing.values;
    return out;
}

} // namespace conecalc
