#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "conecalc/base_model.hpp"
#include "conecalc/errors.hpp"
#include "conecalc/fft.hpp"

namespace conecalc {

/// Shared numeric defaults. Boundary tolerance is relative; it guards the
/// window truncation of transforms on the log grid.
struct NumericsConfig {
    double boundary_tol = 1e-12;
    double pole_line_tol = 1e-6;

    static const NumericsConfig& defaults()
    {
        static NumericsConfig cfg;
        return cfg;
    }
};

/// Uniform grid in t = log r on [-T, T), M nodes, M a power of two. The nodes
/// r_i = e^{t_i} cover [e^{-T}, e^{T}) logarithmically.
struct RadialGrid {
    double T = 12.0;
    int M = 4096;

    RadialGrid() = default;
    RadialGrid(double T_, int M_) : T(T_), M(M_)
    {
        if (!(T > 0.0)) throw InvalidArgument("RadialGrid: T must be positive");
        if (M < 8 || !fft_detail::is_power_of_two(static_cast<std::size_t>(M)))
            throw InvalidArgument("RadialGrid: M must be a power of two, M >= 8");
    }

    double step() const { return 2.0 * T / M; }
    double t(int i) const { return -T + i * step(); }
    double r(int i) const { return std::exp(t(i)); }

    /// Frequency of DFT bin k, dual to t: rho_k = pi * signed(k) / T.
    double rho(int k) const
    {
        return 3.14159265358979323846 * static_cast<double>(signed_bin(k, M)) / T;
    }

    bool operator==(const RadialGrid& o) const { return T == o.T && M == o.M; }
    bool operator!=(const RadialGrid& o) const { return !(*this == o); }
};

/// Samples of a function on the cone: rows = radial nodes, columns = base
/// modes (1 for the point, 2N+1 for circle(N)). `gamma` is the nominal weight
/// the function is considered to live at; it is metadata, not a scaling.
struct WeightedGridFunction {
    RadialGrid grid;
    BaseModel base;
    Matrix values; // grid.M x base.dim()
    double gamma = 0.0;

    WeightedGridFunction() = default;
    WeightedGridFunction(RadialGrid g, BaseModel b, double gamma_ = 0.0)
        : grid(g), base(b), values(Matrix::Zero(g.M, b.dim())), gamma(gamma_)
    {
    }

    int cone_dim() const { return base.cone_dim(); }

    void check_finite() const
    {
        if (!values.allFinite()) throw InvalidArgument("WeightedGridFunction: non-finite values");
    }
};

/// Mellin data on a weight line Re z = beta, sampled at z = beta + i rho_k
/// with the grid's dual frequencies. Carries the source grid so the inverse
/// knows where to land.
struct SpectralFunction {
    RadialGrid grid;
    BaseModel base;
    double beta = 0.0;
    Matrix values; // grid.M x base.dim(), row k <-> rho_k

    SpectralFunction() = default;
    SpectralFunction(RadialGrid g, BaseModel b, double beta_)
        : grid(g), base(b), beta(beta_), values(Matrix::Zero(g.M, b.dim()))
    {
    }

    std::complex<double> z(int k) const { return {beta, grid.rho(k)}; }
};

inline void require_same_layout(const WeightedGridFunction& a, const WeightedGridFunction& b,
                                const char* where)
{
    if (a.grid != b.grid) throw GridMismatch(std::string(where) + ": grids differ");
    require_same_base(a.base, b.base, where);
}

/// Smooth cut-off: 1 on r <= lo, 0 on r >= hi, C^inf bridge in between.
struct Cutoff {
    double lo = 0.5;
    double hi = 2.0 / 3.0;

    Cutoff() = default;
    Cutoff(double lo_, double hi_) : lo(lo_), hi(hi_)
    {
        if (!(0.0 < lo && lo < hi)) throw InvalidArgument("Cutoff: need 0 < lo < hi");
    }

    double operator()(double r) const
    {
        if (r <= lo) return 1.0;
        if (r >= hi) return 0.0;
        const double x = (hi - r) / (hi - lo); // 0 at hi, 1 at lo
        return bump(x) / (bump(x) + bump(1.0 - x));
    }

private:
    static double bump(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
};

/// Smoothed absolute value [eta]: equal to |eta| for |eta| >= 1, even,
/// strictly positive, with [0] = ct0 and a polynomial bridge matched to
/// value/first/second derivative at |eta| = 1.
struct EtaBracket {
    double a0 = 0.5, a2 = 0.375, a4 = 0.25, a6 = -0.125;

    static EtaBracket standard() { return EtaBracket{}; }

    /// Alternative admissible choice ([0] = 0.7, C^1 bridge); differs from
    /// the standard one only on |eta| < 1.
    static EtaBracket alternative() { return EtaBracket{0.7, -0.225, 0.85, -0.325}; }

    double operator()(double eta) const
    {
        const double x = std::abs(eta);
        if (x >= 1.0) return x;
        const double x2 = x * x;
        return a0 + x2 * (a2 + x2 * (a4 + x2 * a6));
    }
};

/// Largest magnitude within `edge` nodes of either window end, relative to
/// the overall maximum; 0 for identically zero data.
inline double boundary_magnitude(const Matrix& values, int edge = 8)
{
    const int M = static_cast<int>(values.rows());
    edge = std::min(edge, M / 4);
    const double peak = values.cwiseAbs().maxCoeff();
    if (peak == 0.0) return 0.0;
    double worst = 0.0;
    for (int i = 0; i < edge; ++i) {
        worst = std::max(worst, values.row(i).cwiseAbs().maxCoeff());
        worst = std::max(worst, values.row(M - 1 - i).cwiseAbs().maxCoeff());
    }
    return worst / peak;
}

/// Build a grid function from a callable u(r, mode_index).
template <typename F>
WeightedGridFunction sample_function(const RadialGrid& g, const BaseModel& b, F&& u,
                                     double gamma = 0.0)
{
    WeightedGridFunction out(g, b, gamma);
    for (int i = 0; i < g.M; ++i)
        for (int m = 0; m < b.dim(); ++m) out.values(i, m) = u(g.r(i), m);
    return out;
}

} // namespace conecalc
