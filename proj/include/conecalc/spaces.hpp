#pragma once

#include <cmath>
#include <vector>

#include "conecalc/grid.hpp"
#include "conecalc/mellin.hpp"

namespace conecalc {

/// Realization of the order-s multiplier in the Mellin--Fourier norm.
/// Different variants give equivalent norms; ZFull is (1+|z|^2+k^2)^s with z
/// on the weight line, ImOnly replaces |z|^2 by (Im z)^2 and is exactly
/// invariant under shifting the line (so the r^gamma factorisation identity
/// holds on the nose).
enum class MultiplierVariant { ZFull, ImOnly };

struct NormSpec {
    double s = 0.0;
    double gamma = 0.0;
    double g = 0.0; // exit weight
    MultiplierVariant variant = MultiplierVariant::ZFull;

    NormSpec() = default;
    NormSpec(double s_, double gamma_, double g_ = 0.0,
             MultiplierVariant v = MultiplierVariant::ZFull)
        : s(s_), gamma(gamma_), g(g_), variant(v)
    {
    }
};

namespace spaces_detail {

inline double mode_measure(const BaseModel& b)
{
    // Plancherel factor of the unit-circle metric; the point base carries a
    // single atom of mass 1
    return b.kind == BaseModel::Kind::Circle ? 2.0 * 3.14159265358979323846 : 1.0;
}

/// Quadratic partition of unity subordinate to the cut-off: phi0^2 + phi1^2
/// = 1, phi0 = 1 on r <= lo, phi1 = 1 on r >= hi.
struct SplitPair {
    Cutoff omega;
    double phi0(double r) const
    {
        const double w = omega(r), v = 1.0 - w;
        return w / std::sqrt(w * w + v * v);
    }
    double phi1(double r) const
    {
        const double w = omega(r), v = 1.0 - w;
        return v / std::sqrt(w * w + v * v);
    }
};

inline WeightedGridFunction scaled_by(const WeightedGridFunction& u,
                                      const std::function<double(double)>& w)
{
    WeightedGridFunction out = u;
    for (int i = 0; i < u.grid.M; ++i) out.values.row(i) *= w(u.grid.r(i));
    return out;
}

} // namespace spaces_detail

/// Scalar product (u, v) = integral u conj(v) r^n dr dx of the r^{-n/2} L^2
/// space, by the trapezoid rule in t = log r and exact mode sums.
inline Complex pairing(const WeightedGridFunction& u, const WeightedGridFunction& v)
{
    require_same_layout(u, v, "pairing");
    const RadialGrid& g = u.grid;
    const int n = u.cone_dim();
    Complex acc(0.0, 0.0);
    for (int i = 0; i < g.M; ++i) {
        Complex row(0.0, 0.0);
        for (int m = 0; m < u.base.dim(); ++m)
            row += u.values(i, m) * std::conj(v.values(i, m));
        acc += std::pow(g.r(i), n + 1) * row;
    }
    return acc * g.step() * spaces_detail::mode_measure(u.base);
}

inline double scpr_norm(const WeightedGridFunction& u)
{
    return std::sqrt(std::abs(pairing(u, u)));
}

/// Mellin--Fourier norm of H^{s,gamma}: the order-s multiplier applied to
/// M u on the line Re z = (n+1)/2 - gamma, modes summed exactly. No window
/// check; callers wanting the precondition use hs_gamma_norm.
inline double hs_gamma_norm_unchecked(const WeightedGridFunction& u, const NormSpec& spec)
{
    const RadialGrid& g = u.grid;
    const int n = u.cone_dim();
    const double beta = 0.5 * (n + 1) - spec.gamma;

    Matrix v = u.values;
    for (int i = 0; i < g.M; ++i) v.row(i) *= std::exp(beta * g.t(i));
    mellin_detail::column_dft(v, +1);
    const double h = g.step();

    const double re2 = spec.variant == MultiplierVariant::ZFull ? beta * beta : 0.0;
    double acc = 0.0;
    for (int k = 0; k < g.M; ++k) {
        const double rho = g.rho(k);
        for (int m = 0; m < u.base.dim(); ++m) {
            const double km = static_cast<double>(u.base.mode(m));
            const double mult = std::pow(1.0 + re2 + rho * rho + km * km, spec.s);
            acc += mult * std::norm(h * v(k, m));
        }
    }
    // (2 pi)^{-1} sum drho = sum / (2T)
    return std::sqrt(acc / (2.0 * g.T) * spaces_detail::mode_measure(u.base));
}

inline double hs_gamma_norm(const WeightedGridFunction& u, const NormSpec& spec,
                            const NumericsConfig& cfg = NumericsConfig::defaults())
{
    const RadialGrid& g = u.grid;
    const double beta = 0.5 * (u.cone_dim() + 1) - spec.gamma;
    Matrix v = u.values;
    for (int i = 0; i < g.M; ++i) v.row(i) *= std::exp(beta * g.t(i));
    const double bmag = boundary_magnitude(v);
    if (bmag > cfg.boundary_tol)
        throw WindowTruncation("hs_gamma_norm: boundary magnitude " + std::to_string(bmag) +
                               " at gamma = " + std::to_string(spec.gamma));
    return hs_gamma_norm_unchecked(u, spec);
}

/// Exit-zone surrogate norm: sum over j + |m'| <= s of the r^n dr dx norms
/// of <r>^g d_r^j (modes^{m'} w), realised spectrally on the log grid.
/// Integer s only.
inline double exit_norm(const WeightedGridFunction& w, int s, double g_exit)
{
    if (s < 0) throw InvalidArgument("exit_norm: s must be nonnegative");
    const RadialGrid& g = w.grid;
    const int n = w.cone_dim();

    double acc = 0.0;
    WeightedGridFunction der = w; // d_r^j w
    for (int j = 0; j <= s; ++j) {
        if (j > 0) {
            // d_r = e^{-t} d_t on the log grid
            der = log_derivative(der);
            for (int i = 0; i < g.M; ++i) der.values.row(i) *= std::exp(-g.t(i));
        }
        for (int i = 0; i < g.M; ++i) {
            const double r = g.r(i);
            const double wgt = std::pow(r, n + 1) * std::pow(1.0 + r * r, g_exit);
            for (int m = 0; m < w.base.dim(); ++m) {
                const double km = static_cast<double>(w.base.mode(m));
                // x-derivatives up to total order s: sum_{|m'| <= s - j} k^{2m'}
                double mode_mult = 0.0;
                double kp = 1.0;
                for (int mp = 0; mp + j <= s; ++mp) {
                    mode_mult += kp;
                    kp *= km * km;
                }
                acc += wgt * mode_mult * std::norm(der.values(i, m));
            }
        }
    }
    return std::sqrt(acc * g.step() * spaces_detail::mode_measure(w.base));
}

/// K^{s,gamma;g} norm: near-cone part through the Mellin--Fourier norm,
/// exit part through the <r>^g-weighted Sobolev surrogate, glued by a
/// quadratic partition so that s = gamma = g = 0 reproduces the r^{-n/2} L^2
/// scalar-product norm exactly.
inline double ksg_norm(const WeightedGridFunction& u, const NormSpec& spec,
                       const Cutoff& omega = Cutoff(),
                       const NumericsConfig& cfg = NumericsConfig::defaults())
{
    if (spec.s != std::floor(spec.s) || spec.s < 0.0)
        throw InvalidArgument("ksg_norm: exit surrogate needs integer s >= 0");
    spaces_detail::SplitPair split{omega};
    const WeightedGridFunction near =
        spaces_detail::scaled_by(u, [&](double r) { return split.phi0(r); });
    const WeightedGridFunction far =
        spaces_detail::scaled_by(u, [&](double r) { return split.phi1(r); });
    const double a = hs_gamma_norm(near, spec, cfg);
    const double b = exit_norm(far, static_cast<int>(spec.s), spec.g);
    return std::sqrt(a * a + b * b);
}

/// Flatness certificate: the norms of the near-cone part at the weights
/// gamma - theta - 1/(m+1), m = 0..m_max. Bounded profiles certify flatness
/// of order -theta relative to gamma; exponents inside the strip blow up as
/// the line crosses them.
inline std::vector<double> flatness_profile(const WeightedGridFunction& u,
                                            const WeightData& weight, int m_max,
                                            const Cutoff& omega = Cutoff())
{
    if (!weight.theta_finite())
        throw InvalidArgument("flatness_profile: needs a finite weight interval");
    spaces_detail::SplitPair split{omega};
    const WeightedGridFunction near =
        spaces_detail::scaled_by(u, [&](double r) { return split.phi0(r); });
    std::vector<double> profile;
    for (int m = 0; m <= m_max; ++m) {
        const double gm = weight.gamma - weight.theta - 1.0 / (m + 1);
        profile.push_back(hs_gamma_norm_unchecked(near, NormSpec(0.0, gm)));
    }
    return profile;
}

} // namespace conecalc
