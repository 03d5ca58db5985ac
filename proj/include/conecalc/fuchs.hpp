#pragma once

#include <mutex>
#include <vector>

#include "conecalc/asymptotic_types.hpp"
#include "conecalc/conormal.hpp"
#include "conecalc/contour.hpp"
#include "conecalc/grid.hpp"
#include "conecalc/mellin.hpp"
#include "conecalc/symbol.hpp"

namespace conecalc {

/// Fuchs-type operator on the model cone,
///   A = r^{-mu} sum_{j} a_j(r) (-r d/dr)^j,
/// with coefficients a_j(r) = sum_{l <= k_taylor} a_{j,l} r^l given as base
/// operators (constants on the point base, trig-polynomial differential
/// operators on the circle). `mu` is the weight exponent; the derivative
/// degree may differ (e.g. (-r d/dr) - p0 has mu = 0, degree 1).
struct FuchsOperator {
    int mu = 0;
    BaseModel base;
    int k_taylor = 0;
    std::vector<std::vector<BaseOperator>> coeffs; // [j][l]

    FuchsOperator() = default;
    FuchsOperator(int mu_, BaseModel base_, int k_taylor_, int degree)
        : mu(mu_), base(base_), k_taylor(k_taylor_),
          coeffs(static_cast<std::size_t>(degree) + 1,
                 std::vector<BaseOperator>(static_cast<std::size_t>(k_taylor_) + 1))
    {
        if (mu_ < 0) throw InvalidArgument("FuchsOperator: mu must be nonnegative");
        if (k_taylor_ < 0) throw InvalidArgument("FuchsOperator: k_taylor must be nonnegative");
    }

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }

    BaseOperator& a(int j, int l) { return coeffs.at(static_cast<std::size_t>(j)).at(static_cast<std::size_t>(l)); }
    const BaseOperator& a(int j, int l) const
    {
        return coeffs.at(static_cast<std::size_t>(j)).at(static_cast<std::size_t>(l));
    }

    /// Mellin symbol of the Taylor level l: h_l(z) = sum_j a_{j,l} z^j.
    MeromorphicSymbol taylor_symbol(int l) const
    {
        std::vector<Matrix> polys;
        for (int j = 0; j <= degree(); ++j) polys.push_back(a(j, l).assemble(base));
        return MeromorphicSymbol::polynomial(base, std::move(polys));
    }

    /// Constant-coefficient part A_l = r^{-mu} sum_j a_{j,l} (-r d/dr)^j.
    FuchsOperator taylor_level(int l) const
    {
        FuchsOperator out(mu, base, 0, degree());
        for (int j = 0; j <= degree(); ++j) out.a(j, 0) = a(j, l);
        return out;
    }

    // --- presets ---

    /// Euler operator r^{-2} ((-r d/dr)^2 - nu^2) on the point base.
    static FuchsOperator euler(double nu)
    {
        FuchsOperator A(2, BaseModel::point(), 0, 2);
        A.a(2, 0) = BaseOperator::constant(1.0);
        A.a(0, 0) = BaseOperator::constant(-nu * nu);
        return A;
    }

    /// First-order model (-r d/dr) - p0 on the point base (mu = 0).
    static FuchsOperator first_order(Complex p0)
    {
        FuchsOperator A(0, BaseModel::point(), 0, 1);
        A.a(1, 0) = BaseOperator::constant(1.0);
        A.a(0, 0) = BaseOperator::constant(-p0);
        return A;
    }

    /// Laplacian of R^2 in polar coordinates on the truncated circle:
    /// r^{-2} ((-r d/dr)^2 + d^2/dx^2), i.e. h(z) = z^2 - k^2 per mode.
    static FuchsOperator polar_laplacian(int N)
    {
        FuchsOperator A(2, BaseModel::circle(N), 0, 2);
        A.a(2, 0) = BaseOperator::constant(1.0);
        BaseOperator lap;
        lap.terms.push_back(TrigTerm{2, {{0, 1.0}}});
        A.a(0, 0) = lap;
        return A;
    }
};

namespace fuchs_detail {

/// One-time check that the discretisation realises M((-r d/dr) u) = z (M u):
/// the whole calculus hangs on this sign.
inline void sign_convention_selftest()
{
    static std::once_flag flag;
    std::call_once(flag, [] {
        RadialGrid g(10.0, 256);
        auto u = sample_function(g, BaseModel::point(), [](double r, int) {
            const double t = std::log(r);
            return std::exp(-t * t);
        });
        WeightedGridFunction du = log_derivative(u);
        du.values *= -1.0; // (-r d/dr) = -d/dt
        const Complex z(0.37, 1.3);
        const Complex lhs = mellin_eval_at(du, z)(0);
        const Complex rhs = z * mellin_eval_at(u, z)(0);
        if (std::abs(lhs - rhs) > 1e-8 * std::abs(rhs))
            throw NoConvergence("sign convention self-test failed: M((-r d/dr)u) != z Mu");
    });
}

} // namespace fuchs_detail

/// Direct action of A on grid samples via spectral differentiation in
/// t = log r, with the Taylor-truncated coefficients.
inline WeightedGridFunction apply_fuchs(const FuchsOperator& A, const WeightedGridFunction& u)
{
    require_same_base(A.base, u.base, "apply_fuchs");
    fuchs_detail::sign_convention_selftest();
    const RadialGrid& g = u.grid;

    // assembled coefficient matrices per (j, l), skipping zero blocks
    std::vector<std::vector<std::pair<int, Matrix>>> mats(static_cast<std::size_t>(A.degree()) + 1);
    for (int j = 0; j <= A.degree(); ++j)
        for (int l = 0; l <= A.k_taylor; ++l)
            if (!A.a(j, l).is_zero())
                mats[static_cast<std::size_t>(j)].emplace_back(l, A.a(j, l).assemble(A.base));

    WeightedGridFunction out(g, u.base, u.gamma);
    WeightedGridFunction der = u; // (-d/dt)^j u, starting at j = 0
    for (int j = 0; j <= A.degree(); ++j) {
        if (j > 0) {
            der = log_derivative(der);
            der.values *= -1.0;
        }
        for (const auto& [l, mat] : mats[static_cast<std::size_t>(j)]) {
            for (int i = 0; i < g.M; ++i) {
                const double w = std::pow(g.r(i), l - A.mu);
                out.values.row(i) += w * (mat * der.values.row(i).transpose()).transpose();
            }
        }
    }
    return out;
}

/// Conormal symbol sequence sigma_c^{mu - j}(A), j = 0..k: exact Taylor
/// coefficient extraction of h(r, z) = sum_j a_j(r) z^j at r = 0.
inline ConormalSequence conormal_sequence(const FuchsOperator& A, int k)
{
    if (k > A.k_taylor)
        throw DepthExceedsTaylor("conormal_sequence: depth " + std::to_string(k) +
                                 " exceeds stored Taylor order " + std::to_string(A.k_taylor));
    fuchs_detail::sign_convention_selftest();
    std::vector<MeromorphicSymbol> terms;
    for (int l = 0; l <= k; ++l) terms.push_back(A.taylor_symbol(l));
    return ConormalSequence(static_cast<double>(A.mu), std::move(terms));
}

/// Zeros of det sigma_c(A) in the strip, i.e. the points where the conormal
/// symbol fails to be invertible.
inline std::vector<ZeroLocation> indicial_roots(const FuchsOperator& A, double strip_lo,
                                                double strip_hi, double im_half = 16.0,
                                                const ContourOptions& opt = ContourOptions())
{
    const MeromorphicSymbol h0 = A.taylor_symbol(0);
    return locate_singularities(h0.as_callable(), strip_lo, strip_hi, im_half, opt);
}

struct EllipticityReport {
    bool psi_elliptic = false;       // reduced principal symbol nonvanishing up to r = 0
    double psi_min = 0.0;            // smallest |reduced principal symbol| over the samples
    bool conormal_elliptic = false;  // conormal symbol invertible along the weight line
    double conormal_min_sv = 0.0;    // smallest singular value on the sampled line
    double weight_line = 0.0;        // Re z = (n+1)/2 - gamma
    double nearest_root_distance = std::numeric_limits<double>::infinity();
    Complex nearest_root{0.0, 0.0};
    std::vector<ZeroLocation> roots; // roots found in the scan window

    bool elliptic() const { return psi_elliptic && conormal_elliptic; }
};

/// Ellipticity of A with respect to the weight gamma: (a) the reduced
/// principal symbol is checked at r = 0 and sample radii over covariable
/// samples, (b) the conormal symbol is scanned along Re z = (n+1)/2 - gamma,
/// (c) the nearest point of the nonbijectivity set D to the line is located.
inline EllipticityReport ellipticity_report(const FuchsOperator& A, double gamma,
                                            double scan_half_width = 3.0,
                                            double im_window = 24.0)
{
    fuchs_detail::sign_convention_selftest();
    EllipticityReport rep;
    const int n = A.base.cone_dim();
    rep.weight_line = 0.5 * (n + 1) - gamma;

    // (a) reduced principal symbol: top total order d* = max(j + order(a_j))
    int dstar = 0;
    for (int j = 0; j <= A.degree(); ++j)
        for (int l = 0; l <= A.k_taylor; ++l)
            if (!A.a(j, l).is_zero()) dstar = std::max(dstar, j + A.a(j, l).deriv_order());

    double psi_min = std::numeric_limits<double>::infinity();
    double psi_scale = 0.0;
    const std::vector<double> radii{0.0, 0.25, 1.0, 3.0};
    const int n_cov = 16, n_x = A.base.kind == BaseModel::Kind::Circle ? 8 : 1;
    for (double r : radii) {
        for (int ic = 0; ic < n_cov; ++ic) {
            // covariable (rho~, xi) on the unit sphere; for the point base
            // only rho~ = +-1 matter
            const double phi = 3.14159265358979323846 * (2.0 * ic + 1.0) / n_cov;
            const double rho = A.base.kind == BaseModel::Kind::Point ? (ic % 2 ? -1.0 : 1.0)
                                                                     : std::cos(phi);
            const double xi = A.base.kind == BaseModel::Kind::Point ? 0.0 : std::sin(phi);
            for (int ix = 0; ix < n_x; ++ix) {
                const double x = 2.0 * 3.14159265358979323846 * ix / n_x;
                Complex val(0.0, 0.0);
                for (int j = 0; j <= A.degree(); ++j) {
                    Complex cj(0.0, 0.0);
                    for (int l = 0; l <= A.k_taylor; ++l)
                        cj += std::pow(r, l) * A.a(j, l).principal(x, xi, dstar - j);
                    val += cj * std::pow(Complex(0.0, -rho), j);
                }
                psi_min = std::min(psi_min, std::abs(val));
                psi_scale = std::max(psi_scale, std::abs(val));
            }
            if (A.base.kind == BaseModel::Kind::Point && ic >= 1) break;
        }
    }
    rep.psi_min = psi_min;
    rep.psi_elliptic = psi_min > 1e-9 * std::max(psi_scale, 1.0);

    // (b) conormal symbol along the weight line
    const MeromorphicSymbol h0 = A.taylor_symbol(0);
    double min_sv = std::numeric_limits<double>::infinity();
    const int n_line = 65;
    for (int i = 0; i < n_line; ++i) {
        const double im = im_window * (2.0 * i / (n_line - 1.0) - 1.0);
        const Matrix m = h0.eval(Complex(rep.weight_line, im), 0.0);
        min_sv = std::min(min_sv, m.jacobiSvd().singularValues().minCoeff());
    }
    rep.conormal_min_sv = min_sv;
    rep.conormal_elliptic = min_sv > 1e-9 * std::max(h0.scale(), 1.0);

    // (c) nearest element of D to the line
    try {
        rep.roots = locate_singularities(h0.as_callable(), rep.weight_line - scan_half_width,
                                         rep.weight_line + scan_half_width, im_window);
        for (const auto& z : rep.roots) {
            const double d = std::abs(z.z.real() - rep.weight_line);
            if (d < rep.nearest_root_distance) {
                rep.nearest_root_distance = d;
                rep.nearest_root = z.z;
            }
        }
        if (rep.nearest_root_distance < 1e-9) rep.conormal_elliptic = false;
    } catch (const ContourThroughZero&) {
        // a root pinned to the scan boundary; the line scan already decided
    }
    return rep;
}

} // namespace conecalc
