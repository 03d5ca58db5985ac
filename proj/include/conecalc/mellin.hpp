#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "conecalc/grid.hpp"

namespace conecalc {

// The transform pair realised here, with t = log r and v(t) = e^{beta t} u(e^t):
//
//   Mu(beta + i rho)   = integral r^{z-1} u(r) dr = integral e^{i rho t} v(t) dt,
//   u(e^t)             = e^{-beta t} (2pi)^{-1} integral e^{-i rho t} Mu(beta+i rho) drho,
//
// discretised by the periodic trapezoid rule on [-T, T). Forward and inverse
// are exact inverses of each other on the grid. The sign convention makes
// M((-r d/dr) u)(z) = z Mu(z).

namespace mellin_detail {

inline void column_dft(Matrix& values, int sign)
{
    std::vector<Complex> buf(static_cast<std::size_t>(values.rows()));
    for (int m = 0; m < values.cols(); ++m) {
        for (int i = 0; i < values.rows(); ++i) buf[static_cast<std::size_t>(i)] = values(i, m);
        fft_detail::radix2(buf.data(), buf.size(), sign);
        for (int i = 0; i < values.rows(); ++i) values(i, m) = buf[static_cast<std::size_t>(i)];
    }
}

} // namespace mellin_detail

/// Weighted Mellin transform of u restricted to the line Re z = beta.
/// Throws WindowTruncation when e^{beta t} u(e^t) is not negligible at the
/// window ends (the grid window is too small for this weight).
inline SpectralFunction mellin_forward(const WeightedGridFunction& u, double beta,
                                       const NumericsConfig& cfg = NumericsConfig::defaults())
{
    const RadialGrid& g = u.grid;
    SpectralFunction out(g, u.base, beta);

    Matrix v = u.values;
    for (int i = 0; i < g.M; ++i) v.row(i) *= std::exp(beta * g.t(i));

    const double bmag = boundary_magnitude(v);
    if (bmag > cfg.boundary_tol)
        throw WindowTruncation("mellin_forward: boundary magnitude " + std::to_string(bmag) +
                               " exceeds tolerance at beta = " + std::to_string(beta));

    mellin_detail::column_dft(v, +1); // unnormalised, positive exponent
    const double h = g.step();
    for (int k = 0; k < g.M; ++k) v.row(k) *= (k % 2 == 0 ? h : -h);
    out.values = std::move(v);
    return out;
}

/// Inverse of mellin_forward; lands on the grid recorded in the spectral data.
inline WeightedGridFunction mellin_inverse(const SpectralFunction& gdata)
{
    const RadialGrid& g = gdata.grid;
    WeightedGridFunction out(g, gdata.base,
                             0.5 * (gdata.base.cone_dim() + 1) - gdata.beta);

    Matrix w = gdata.values;
    for (int k = 0; k < g.M; ++k)
        if (k % 2 != 0) w.row(k) *= -1.0;
    mellin_detail::column_dft(w, -1);
    const double scale = 1.0 / (2.0 * g.T);
    for (int i = 0; i < g.M; ++i) w.row(i) *= scale * std::exp(-gdata.beta * g.t(i));
    out.values = std::move(w);
    return out;
}

/// Trapezoid evaluation of Mu at a single complex point. Valid wherever
/// e^{(Re z) t} u(e^t) decays inside the window; no truncation check is done
/// here, callers choose admissible z.
inline Eigen::RowVectorXcd mellin_eval_at(const WeightedGridFunction& u, Complex z)
{
    const RadialGrid& g = u.grid;
    Eigen::RowVectorXcd acc = Eigen::RowVectorXcd::Zero(u.base.dim());
    for (int i = 0; i < g.M; ++i) acc += std::exp(z * g.t(i)) * u.values.row(i);
    return acc * g.step();
}

/// Mellin operator action u -> M^{-1}[ f(z) (M u)(z) ] on the weight line
/// Re z = (n+1)/2 - gamma, for a constant-in-r symbol given as a callable
/// z -> matrix on the base modes.
template <typename SymbolFn>
WeightedGridFunction op_mellin_fn(SymbolFn&& f, double gamma, const WeightedGridFunction& u,
                                  const NumericsConfig& cfg = NumericsConfig::defaults())
{
    const double beta = 0.5 * (u.cone_dim() + 1) - gamma;
    SpectralFunction g = mellin_forward(u, beta, cfg);
    for (int k = 0; k < u.grid.M; ++k) {
        const Matrix fv = f(g.z(k));
        g.values.row(k) = (fv * g.values.row(k).transpose()).transpose();
    }
    return mellin_inverse(g);
}

/// Group action kappa_lambda^g: u(r) -> lambda^{(n+1)/2+g} u(lambda r),
/// realised as a band-limited shift by log(lambda) in t. The plain dilation
/// delta_lambda is kappa with the normalisation exponent forced to zero,
/// i.e. g = -(n+1)/2.
inline WeightedGridFunction dilate(const WeightedGridFunction& u, double lambda, double g_exp,
                                   const NumericsConfig& cfg = NumericsConfig::defaults())
{
    if (!(lambda > 0.0)) throw InvalidArgument("dilate: lambda must be positive");
    const RadialGrid& g = u.grid;
    WeightedGridFunction out(g, u.base, u.gamma);

    const double s = std::log(lambda);
    Matrix w = u.values;
    mellin_detail::column_dft(w, -1); // forward DFT
    for (int k = 0; k < g.M; ++k)
        w.row(k) *= std::exp(Complex(0.0, g.rho(k) * s)) / static_cast<double>(g.M);
    mellin_detail::column_dft(w, +1); // unnormalised inverse

    const double amp = std::pow(lambda, 0.5 * (u.cone_dim() + 1) + g_exp);
    out.values = amp * w;

    // The shifted support must still fit: allow whatever leakage the input
    // already had, but reject results that newly touch the window ends.
    const double allowed = std::max(cfg.boundary_tol, 2.0 * boundary_magnitude(u.values));
    if (boundary_magnitude(out.values) > allowed)
        throw WindowTruncation("dilate: support leaves the grid window at lambda = " +
                               std::to_string(lambda));
    return out;
}

/// Plain dilation (delta_lambda u)(r) = u(lambda r).
inline WeightedGridFunction dilate_plain(const WeightedGridFunction& u, double lambda,
                                         const NumericsConfig& cfg = NumericsConfig::defaults())
{
    return dilate(u, lambda, -0.5 * (u.cone_dim() + 1), cfg);
}

/// Spectral derivative d/dt on the log grid, applied per mode.
inline WeightedGridFunction log_derivative(const WeightedGridFunction& u)
{
    const RadialGrid& g = u.grid;
    WeightedGridFunction out(g, u.base, u.gamma);
    Matrix w = u.values;
    mellin_detail::column_dft(w, -1);
    for (int k = 0; k < g.M; ++k)
        w.row(k) *= Complex(0.0, g.rho(k)) / static_cast<double>(g.M);
    mellin_detail::column_dft(w, +1);
    out.values = std::move(w);
    return out;
}

} // namespace conecalc
