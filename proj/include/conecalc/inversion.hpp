#pragma once

#include <random>
#include <vector>

#include "conecalc/contour.hpp"
#include "conecalc/symbol.hpp"

namespace conecalc {

struct InversionOptions {
    double im_half = 16.0;      // height of the zero search window
    int fit_degree = -1;        // polynomial degree of the fitted regular part; -1 = automatic
    double probe_tol = 1e-6;    // ceiling for the probe residual before giving up
    double line_tol = 1e-8;     // smallest acceptable singular value on the reference line
    double boundary_margin = 1e-6;
    ContourOptions contour;
};

struct EllipticInverse {
    MeromorphicSymbol symbol;
    double fit_residual = 0.0;   // least-squares residual of the regular-part fit
    double probe_residual = 0.0; // max |f(z) f^{-1}(z) - 1| over probe points
};

namespace inversion_detail {

inline Matrix invert_dense(const Matrix& m)
{
    return m.partialPivLu().solve(Matrix::Identity(m.rows(), m.cols()));
}

/// Scalar polynomial with roots at the poles of f (with multiplicity),
/// lifted to a symbol; multiplying f by it clears all pole blocks.
inline MeromorphicSymbol denominator_of(const MeromorphicSymbol& f)
{
    std::vector<Complex> coeffs{1.0};
    for (const auto& b : f.poles) {
        for (int k = 0; k < b.pole_order(); ++k) {
            std::vector<Complex> next(coeffs.size() + 1, Complex(0.0));
            for (std::size_t i = 0; i < coeffs.size(); ++i) {
                next[i + 1] += coeffs[i];
                next[i] -= coeffs[i] * b.p;
            }
            coeffs = std::move(next);
        }
    }
    std::vector<Matrix> lifted;
    lifted.reserve(coeffs.size());
    for (const auto& c : coeffs)
        lifted.push_back(c * Matrix::Identity(f.dim(), f.dim()));
    MeromorphicSymbol d = MeromorphicSymbol::polynomial(f.base, lifted);
    d.strip_lo = f.strip_lo;
    d.strip_hi = f.strip_hi;
    return d;
}

inline std::vector<Complex> probe_points(double lo, double hi, double im_half, int count,
                                         unsigned seed = 20231u)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> ur(lo, hi), ui(-im_half, im_half);
    std::vector<Complex> pts;
    pts.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) pts.emplace_back(ur(rng), ui(rng));
    return pts;
}

/// Least-squares polynomial fit of g at the given points, one matrix entry
/// at a time; returns coefficients c_0..c_deg and the max residual.
inline std::pair<std::vector<Matrix>, double> fit_polynomial(
    const std::vector<Complex>& pts, const std::vector<Matrix>& vals, int deg, int dim)
{
    const int n = static_cast<int>(pts.size());
    Eigen::MatrixXcd V(n, deg + 1);
    for (int i = 0; i < n; ++i) {
        Complex w(1.0, 0.0);
        for (int j = 0; j <= deg; ++j) {
            V(i, j) = w;
            w *= pts[static_cast<std::size_t>(i)];
        }
    }
    const auto qr = V.colPivHouseholderQr();
    std::vector<Matrix> coeffs(static_cast<std::size_t>(deg) + 1, Matrix::Zero(dim, dim));
    double residual = 0.0;
    Eigen::VectorXcd rhs(n);
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
            for (int i = 0; i < n; ++i) rhs(i) = vals[static_cast<std::size_t>(i)](r, c);
            const Eigen::VectorXcd sol = qr.solve(rhs);
            for (int j = 0; j <= deg; ++j) coeffs[static_cast<std::size_t>(j)](r, c) = sol(j);
            residual = std::max(residual, (V * sol - rhs).cwiseAbs().maxCoeff());
        }
    }
    return {coeffs, residual};
}

} // namespace inversion_detail

/// Inverse of an elliptic symbol h on its working strip. The pole set of
/// h^{-1} comes from the zeros of det h (plus candidates at the poles of h),
/// Laurent blocks from contour quadrature of z -> h(z)^{-1}, and the regular
/// part from a least-squares polynomial fit on strip probes. The product
/// h^{-1} h is verified at probe points.
inline EllipticInverse invert_elliptic(const MeromorphicSymbol& h, double strip_lo,
                                       double strip_hi,
                                       const InversionOptions& opt = InversionOptions())
{
    using namespace inversion_detail;
    if (!(strip_lo < strip_hi)) throw InvalidArgument("invert_elliptic: empty strip");

    const int dim = h.dim();
    auto h_inv_fn = [&h](Complex z) { return invert_dense(h.eval(z, 0.0)); };

    // ellipticity probe: h^{-1} bounded on the strip boundary and at large
    // |Im z| samples
    {
        double min_sv = std::numeric_limits<double>::infinity();
        const double scale = std::max(h.scale(), 1e-300);
        for (double re : {strip_lo, strip_hi}) {
            for (int i = -8; i <= 8; ++i) {
                const Complex z(re, opt.im_half * i / 8.0);
                min_sv = std::min(min_sv,
                                  h.eval(z, 0.0).jacobiSvd().singularValues().minCoeff());
            }
        }
        for (double im : {-4.0 * opt.im_half, 4.0 * opt.im_half}) {
            const Complex z(0.5 * (strip_lo + strip_hi), im);
            min_sv = std::min(min_sv, h.eval(z, 0.0).jacobiSvd().singularValues().minCoeff());
        }
        if (!(min_sv > opt.line_tol * scale))
            throw NotElliptic("invert_elliptic: h^{-1} unbounded on the strip boundary "
                              "(min singular value " +
                              std::to_string(min_sv) + ")");
    }

    // numerator polynomial: d(z) h(z) with the scalar denominator of h
    MeromorphicSymbol numerator = multiply(denominator_of(h), h);
    if (!numerator.poles.empty())
        throw NoConvergence("invert_elliptic: pole blocks failed to cancel in the numerator");

    auto zeros = locate_singularities(numerator.as_callable(), strip_lo, strip_hi, opt.im_half,
                                      opt.contour);

    // pole candidates: zeros of det(numerator) plus the poles of h itself
    std::vector<Complex> candidates;
    std::vector<int> orders;
    for (const auto& z : zeros) {
        candidates.push_back(z.z);
        orders.push_back(z.det_multiplicity);
    }
    for (const auto& b : h.poles) {
        if (b.p.real() <= strip_lo || b.p.real() >= strip_hi || std::abs(b.p.imag()) > opt.im_half)
            continue;
        bool known = false;
        for (const auto& c : candidates)
            if (std::abs(c - b.p) < 1e-7) known = true;
        if (!known) {
            candidates.push_back(b.p);
            orders.push_back(b.pole_order());
        }
    }

    MeromorphicSymbol inv(h.base, h.is_smoothing() ? kSmoothingOrder : -h.order);
    inv.strip_lo = strip_lo;
    inv.strip_hi = strip_hi;

    const double edge_gap = std::min(std::abs(strip_hi - strip_lo), 1.0);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const Complex p = candidates[i];
        if (std::min(p.real() - strip_lo, strip_hi - p.real()) < opt.boundary_margin * edge_gap)
            throw PoleOnStripBoundary("invert_elliptic: pole of the inverse at Re z = " +
                                      std::to_string(p.real()) +
                                      " sits on the strip boundary");
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < candidates.size(); ++j)
            if (j != i) gap = std::min(gap, std::abs(p - candidates[j]));
        const double radius = std::min({0.35 * gap, 0.25, 0.45 * (p.real() - strip_lo),
                                        0.45 * (strip_hi - p.real())});
        LaurentBlock blk = laurent_extract(h_inv_fn, p, orders[i] - 1 + 1, radius, opt.contour);
        double scale = 1e-300;
        for (const auto& c : blk.coeffs) scale = std::max(scale, c.cwiseAbs().maxCoeff());
        for (int k = 0; k < blk.pole_order(); ++k) {
            const Matrix& c = blk.coeffs[static_cast<std::size_t>(k)];
            if (c.cwiseAbs().maxCoeff() > 1e-10 * scale) inv.add_pole_term(p, k, c);
        }
    }
    inv.prune(1e-12);

    // regular part: fit h^{-1} minus the Laurent part by a polynomial on
    // strip probes; the matrix-coefficient degree is enough (h^{-1} decays),
    // capped to keep the Vandermonde fit sane
    const int deg =
        opt.fit_degree >= 0 ? opt.fit_degree : std::min(std::max(0, numerator.degree()), 10);
    auto pts = probe_points(strip_lo + 0.05 * (strip_hi - strip_lo),
                            strip_hi - 0.05 * (strip_hi - strip_lo), opt.im_half,
                            std::max(8 * (deg + 1), 48));
    // keep probes away from the poles
    std::erase_if(pts, [&](Complex z) {
        for (const auto& b : inv.poles)
            if (std::abs(z - b.p) < 0.05) return true;
        return false;
    });
    std::vector<Matrix> vals;
    vals.reserve(pts.size());
    for (const Complex& z : pts) vals.push_back(h_inv_fn(z) - inv.eval(z, 0.0));
    auto [coeffs, fit_res] = inversion_detail::fit_polynomial(pts, vals, deg, dim);
    for (int j = 0; j <= deg; ++j)
        inv.add_holo_term(j, coeffs[static_cast<std::size_t>(j)]);
    inv.prune(1e-13);

    // verify h^{-1} h = 1 at fresh probes
    double probe_res = 0.0;
    for (const Complex& z : probe_points(strip_lo + 0.1, strip_hi - 0.1, 0.7 * opt.im_half, 24,
                                         977u)) {
        bool near_pole = false;
        for (const auto& b : inv.poles)
            if (std::abs(z - b.p) < 0.05) near_pole = true;
        for (const auto& b : h.poles)
            if (std::abs(z - b.p) < 0.05) near_pole = true;
        if (near_pole) continue;
        const Matrix err = inv.eval(z, 0.0) * h.eval(z, 0.0) - Matrix::Identity(dim, dim);
        probe_res = std::max(probe_res, err.cwiseAbs().maxCoeff());
    }
    if (probe_res > opt.probe_tol)
        throw NoConvergence("invert_elliptic: probe residual " + std::to_string(probe_res) +
                            " above tolerance; regular part is not polynomial on this strip");

    return EllipticInverse{std::move(inv), fit_res, probe_res};
}

/// Inverse of 1 + f for a smoothing symbol f: (1+f)^{-1} = 1 + l with l
/// smoothing. `beta` is the reference weight line on which 1+f must be
/// invertible. The returned symbol is l (not 1 + l).
inline EllipticInverse invert_one_plus(const MeromorphicSymbol& f, double beta,
                                       const InversionOptions& opt = InversionOptions())
{
    using namespace inversion_detail;
    if (!f.is_smoothing() && f.degree() > 0)
        throw InvalidArgument("invert_one_plus: f must carry the smoothing order tag");

    const int dim = f.dim();
    const MeromorphicSymbol one_plus_f = add(MeromorphicSymbol::identity(f.base), f);

    // invertibility of 1 + f on the reference line
    {
        double min_sv = std::numeric_limits<double>::infinity();
        for (int i = -12; i <= 12; ++i) {
            const Complex z(beta, opt.im_half * i / 6.0);
            bool at_pole = false;
            for (const auto& b : f.poles)
                if (std::abs(z - b.p) < 1e-8) at_pole = true;
            if (at_pole) continue;
            min_sv = std::min(min_sv,
                              one_plus_f.eval(z, 0.0).jacobiSvd().singularValues().minCoeff());
        }
        if (!(min_sv > opt.line_tol))
            throw NotInvertibleOnLine("invert_one_plus: 1+f not invertible on Re z = " +
                                      std::to_string(beta));
    }

    const double strip_lo =
        std::isfinite(f.strip_lo) ? f.strip_lo : beta - 2.0 * opt.im_half;
    const double strip_hi =
        std::isfinite(f.strip_hi) ? f.strip_hi : beta + 2.0 * opt.im_half;

    auto l_fn = [&one_plus_f, dim](Complex z) -> Matrix {
        return invert_dense(one_plus_f.eval(z, 0.0)) - Matrix::Identity(dim, dim);
    };

    // candidates: zeros of det(d (1+f)) in the strip plus poles of f where
    // the cancellation may fail
    MeromorphicSymbol numerator = multiply(denominator_of(f), one_plus_f);
    if (!numerator.poles.empty())
        throw NoConvergence("invert_one_plus: pole blocks failed to cancel in the numerator");
    auto zeros = locate_singularities(numerator.as_callable(), strip_lo, strip_hi, opt.im_half,
                                      opt.contour);

    std::vector<Complex> candidates;
    std::vector<int> orders;
    for (const auto& z : zeros) {
        candidates.push_back(z.z);
        orders.push_back(z.det_multiplicity);
    }
    for (const auto& b : f.poles) {
        if (b.p.real() <= strip_lo || b.p.real() >= strip_hi || std::abs(b.p.imag()) > opt.im_half)
            continue;
        bool known = false;
        for (const auto& c : candidates)
            if (std::abs(c - b.p) < 1e-7) known = true;
        if (!known) {
            candidates.push_back(b.p);
            orders.push_back(b.pole_order());
        }
    }

    MeromorphicSymbol l(f.base, kSmoothingOrder);
    l.strip_lo = f.strip_lo;
    l.strip_hi = f.strip_hi;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const Complex p = candidates[i];
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < candidates.size(); ++j)
            if (j != i) gap = std::min(gap, std::abs(p - candidates[j]));
        const double radius = std::min({0.35 * gap, 0.25});
        LaurentBlock blk = laurent_extract(l_fn, p, orders[i], radius, opt.contour);
        double scale = 1e-300;
        for (const auto& c : blk.coeffs) scale = std::max(scale, c.cwiseAbs().maxCoeff());
        for (int k = 0; k < blk.pole_order(); ++k) {
            const Matrix& c = blk.coeffs[static_cast<std::size_t>(k)];
            if (c.cwiseAbs().maxCoeff() > 1e-10 * std::max(scale, 1.0)) l.add_pole_term(p, k, c);
        }
    }
    l.prune(1e-12);

    // verify (1+f)(1+l) = 1 at probes
    const MeromorphicSymbol one_plus_l = add(MeromorphicSymbol::identity(f.base), l);
    double probe_res = 0.0;
    for (const Complex& z :
         probe_points(beta - 2.0, beta + 2.0, 0.7 * opt.im_half, 24, 40111u)) {
        bool near_pole = false;
        for (const auto& b : l.poles)
            if (std::abs(z - b.p) < 0.05) near_pole = true;
        for (const auto& b : f.poles)
            if (std::abs(z - b.p) < 0.05) near_pole = true;
        if (near_pole) continue;
        const Matrix err = one_plus_f.eval(z, 0.0) * one_plus_l.eval(z, 0.0) -
                           Matrix::Identity(dim, dim);
        probe_res = std::max(probe_res, err.cwiseAbs().maxCoeff());
    }
    if (probe_res > opt.probe_tol)
        throw NoConvergence("invert_one_plus: probe residual " + std::to_string(probe_res));

    return EllipticInverse{std::move(l), 0.0, probe_res};
}

} // namespace conecalc
