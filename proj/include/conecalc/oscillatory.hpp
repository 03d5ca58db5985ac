#pragma once

#include <functional>
#include <vector>

#include "conecalc/edge.hpp"
#include "conecalc/errors.hpp"

namespace conecalc {

// ---------------------------------------------------------------------------
// Regularised oscillatory integrals
//   Os[a] = lim_{eps->0} (2 pi)^{-1} integral integral e^{-i x xi}
//           chi(eps x, eps xi) a(x, xi) dx dxi     (q = 1)
// ---------------------------------------------------------------------------

struct OscillatoryOptions {
    int k_min = 2, k_max = 10;   // eps_k = 2^{-k}
    double tol = 1e-9;           // Richardson convergence target
    double envelope_cut = 1e-18; // integration box threshold
    long node_budget = 1 << 24;  // per-eps tensor quadrature budget
    double base_step = 0.19634954084936207; // pi/16; refined by the phase range
};

struct OscillatoryResult {
    Complex value{0.0, 0.0};
    double convergence = 0.0;          // residual of the extrapolation
    std::vector<Complex> regularised;  // I(eps_k)
};

namespace osc_detail {

inline double gaussian_chi(double x, double xi) { return std::exp(-x * x - xi * xi); }

/// Half-width at which chi(eps .) a decays below the cut along one axis.
template <typename F>
double decay_box(F&& envelope, double cut, double cap)
{
    double x = 1.0;
    while (x < cap && std::abs(envelope(x)) > cut) x *= 1.25;
    return std::min(x * 1.25, cap);
}

/// 3-point Neville extrapolation in eps^2 down the sequence.
inline std::pair<Complex, double> richardson(const std::vector<double>& eps,
                                             const std::vector<Complex>& vals)
{
    std::vector<Complex> cur = vals;
    std::vector<double> h;
    h.reserve(eps.size());
    for (double e : eps) h.push_back(e * e);
    Complex prev_best = cur.back();
    for (std::size_t level = 1; level < vals.size(); ++level) {
        for (std::size_t i = 0; i + level < cur.size(); ++i) {
            const double hi = h[i], hj = h[i + level];
            cur[i] = (hi * cur[i + 1] - hj * cur[i]) / (hi - hj);
        }
        cur.resize(vals.size() - level);
        if (level + 1 == vals.size() || level == 2) prev_best = cur.front();
    }
    const Complex best = cur.front();
    return {best, std::abs(best - prev_best)};
}

} // namespace osc_detail

/// Direct tensor-trapezoid realisation of one regularised integral I(eps)
/// with the Gaussian regulariser. Throws NoConvergence when the declared
/// growth would exceed the node budget.
template <typename Amplitude>
Complex oscillatory_regularised(Amplitude&& a, double eps, const OscillatoryOptions& opt)
{
    // boxes: where the regulariser (or the amplitude itself) kills the integrand
    const double cap = 16.0 / eps;
    const double Bx = osc_detail::decay_box(
        [&](double x) { return std::exp(-eps * eps * x * x) * std::abs(a(x, 0.0)); },
        opt.envelope_cut, cap);
    const double Bxi = osc_detail::decay_box(
        [&](double xi) { return std::exp(-eps * eps * xi * xi) * std::abs(a(0.0, xi)); },
        opt.envelope_cut, cap);

    // the phase e^{-i x xi} must be resolved in each variable
    const double dx = std::min(opt.base_step, 3.14159265358979323846 / (4.0 * Bxi));
    const double dxi = std::min(opt.base_step, 3.14159265358979323846 / (4.0 * Bx));
    const long nx = 2 * static_cast<long>(Bx / dx) + 1;
    const long nxi = 2 * static_cast<long>(Bxi / dxi) + 1;
    if (nx * nxi > opt.node_budget)
        throw NoConvergence("oscillatory_integral: node budget exceeded at eps = " +
                            std::to_string(eps) + " (would need " + std::to_string(nx * nxi) +
                            " nodes)");

    Complex acc(0.0, 0.0);
    for (long i = -nx / 2; i <= nx / 2; ++i) {
        const double x = i * dx;
        const double cx = std::exp(-eps * eps * x * x);
        Complex inner(0.0, 0.0);
        for (long j = -nxi / 2; j <= nxi / 2; ++j) {
            const double xi = j * dxi;
            inner += std::exp(Complex(0.0, -x * xi)) * std::exp(-eps * eps * xi * xi) *
                     a(x, xi);
        }
        acc += cx * inner;
    }
    return acc * (dx * dxi / (2.0 * 3.14159265358979323846));
}

/// Fast path for x-independent amplitudes: the x-integral against the
/// Gaussian regulariser is exact, (sqrt(pi)/eps) e^{-xi^2/(4 eps^2)}, and the
/// remaining 1D integral concentrates at the eps scale.
template <typename Amplitude>
Complex oscillatory_regularised_xi_only(Amplitude&& a, double eps, const OscillatoryOptions& opt)
{
    const double cap = 64.0;
    const double Bxi = osc_detail::decay_box(
        [&](double xi) {
            return std::exp(-std::min(xi * xi / (4.0 * eps * eps), 700.0)) * std::abs(a(xi));
        },
        opt.envelope_cut, cap);
    const double dxi = std::min(0.05 * eps, Bxi / 64.0);
    const long n = 2 * static_cast<long>(Bxi / dxi) + 1;
    Complex acc(0.0, 0.0);
    for (long j = -n / 2; j <= n / 2; ++j) {
        const double xi = j * dxi;
        acc += std::exp(-xi * xi / (4.0 * eps * eps)) * std::exp(-eps * eps * xi * xi) * a(xi);
    }
    const double spi = std::sqrt(3.14159265358979323846);
    return acc * dxi * (spi / eps) / (2.0 * 3.14159265358979323846);
}

/// Os[a] by Richardson extrapolation of the regularised values over
/// eps_k = 2^{-k}, k = k_min..k_max.
template <typename Amplitude>
OscillatoryResult oscillatory_integral(Amplitude&& a, const OscillatoryOptions& opt = {},
                                       bool x_independent_of_first = false)
{
    OscillatoryResult res;
    std::vector<double> eps;
    for (int k = opt.k_min; k <= opt.k_max; ++k) {
        const double e = std::pow(2.0, -k);
        eps.push_back(e);
        if (x_independent_of_first)
            res.regularised.push_back(
                oscillatory_regularised_xi_only([&a](double xi) { return a(0.0, xi); }, e, opt));
        else
            res.regularised.push_back(oscillatory_regularised(a, e, opt));
    }
    auto [value, conv] = osc_detail::richardson(eps, res.regularised);
    res.value = value;
    res.convergence = conv;
    if (!(conv < opt.tol * std::max(1.0, std::abs(value)) + 1e-14))
        throw NoConvergence("oscillatory_integral: extrapolation residual " +
                            std::to_string(conv));
    return res;
}

// ---------------------------------------------------------------------------
// Double symbols polynomial in (y, y', eta) and their left/right reduction
// ---------------------------------------------------------------------------

/// a(y, y', eta) = sum coef[i][j][k] y^i y'^j eta^k, exact calculus.
struct PolySymbol {
    // coef[i][j][k]
    std::vector<std::vector<std::vector<Complex>>> coef;

    PolySymbol() = default;
    PolySymbol(int dy, int dyp, int deta)
        : coef(static_cast<std::size_t>(dy) + 1,
               std::vector<std::vector<Complex>>(
                   static_cast<std::size_t>(dyp) + 1,
                   std::vector<Complex>(static_cast<std::size_t>(deta) + 1, Complex(0.0))))
    {
    }

    int deg_y() const { return static_cast<int>(coef.size()) - 1; }
    int deg_yp() const { return coef.empty() ? -1 : static_cast<int>(coef[0].size()) - 1; }
    int deg_eta() const
    {
        return coef.empty() || coef[0].empty() ? -1 : static_cast<int>(coef[0][0].size()) - 1;
    }

    Complex& at(int i, int j, int k)
    {
        return coef[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                   [static_cast<std::size_t>(k)];
    }
    Complex get(int i, int j, int k) const
    {
        if (i < 0 || j < 0 || k < 0 || i > deg_y() || j > deg_yp() || k > deg_eta())
            return Complex(0.0);
        return coef[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                   [static_cast<std::size_t>(k)];
    }

    Complex eval(double y, double yp, double eta) const
    {
        Complex acc(0.0);
        for (int i = 0; i <= deg_y(); ++i)
            for (int j = 0; j <= deg_yp(); ++j)
                for (int k = 0; k <= deg_eta(); ++k)
                    acc += get(i, j, k) * std::pow(y, i) * std::pow(yp, j) * std::pow(eta, k);
        return acc;
    }

    double max_coeff() const
    {
        double m = 0.0;
        for (const auto& pi : coef)
            for (const auto& pj : pi)
                for (const auto& c : pj) m = std::max(m, std::abs(c));
        return m;
    }
};

namespace osc_detail {

inline double fact(int k)
{
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

} // namespace osc_detail

/// Left symbol of a double symbol, the finite exact expansion
///   a_L(y, eta) = sum_m (1/m!) d_eta^m D_{y'}^m a(y, y', eta) |_{y'=y},
/// with D = -i d/dy'. The result has deg_yp = 0.
inline PolySymbol left_symbol_reduce(const PolySymbol& a)
{
    const int dy = a.deg_y(), dyp = a.deg_yp(), de = a.deg_eta();
    PolySymbol out(dy + dyp, 0, de);
    for (int m = 0; m <= std::min(dyp, de); ++m) {
        // (1/m!) d_eta^m D_{y'}^m a, then substitute y' = y
        for (int i = 0; i <= dy; ++i) {
            for (int j = m; j <= dyp; ++j) {
                // D_{y'}^m y'^j = (-i)^m j!/(j-m)! y'^{j-m}
                const Complex dcoef =
                    std::pow(Complex(0.0, -1.0), m) * osc_detail::fact(j) / osc_detail::fact(j - m);
                for (int k = m; k <= de; ++k) {
                    const double ecoef = osc_detail::fact(k) / osc_detail::fact(k - m);
                    const Complex val =
                        a.get(i, j, k) * dcoef * ecoef / osc_detail::fact(m);
                    // y^i y'^{j-m} -> y^{i + j - m}
                    out.at(i + j - m, 0, k - m) += val;
                }
            }
        }
    }
    return out;
}

/// Right symbol: a_R(y', eta) = sum_m (1/m!) (-1)^m d_eta^m D_y^m a |_{y=y'};
/// returned with the y' dependence in the y slot (deg_yp = 0), matching the
/// layout left_symbol_reduce expects for a y'-only double symbol.
inline PolySymbol right_symbol_reduce(const PolySymbol& a)
{
    const int dy = a.deg_y(), dyp = a.deg_yp(), de = a.deg_eta();
    PolySymbol out(dy + dyp, 0, de);
    for (int m = 0; m <= std::min(dy, de); ++m) {
        for (int i = m; i <= dy; ++i) {
            const Complex dcoef =
                std::pow(Complex(0.0, -1.0), m) * osc_detail::fact(i) / osc_detail::fact(i - m);
            for (int j = 0; j <= dyp; ++j) {
                for (int k = m; k <= de; ++k) {
                    const double ecoef = osc_detail::fact(k) / osc_detail::fact(k - m);
                    const Complex val = a.get(i, j, k) * dcoef * ecoef *
                                        ((m % 2 == 0) ? 1.0 : -1.0) / osc_detail::fact(m);
                    out.at(i - m + j, 0, k - m) += val;
                }
            }
        }
    }
    return out;
}

/// Swap the roles of y and y' (turns a right symbol laid out in the y slot
/// back into a y'-only double symbol).
inline PolySymbol swap_to_second_variable(const PolySymbol& a)
{
    PolySymbol out(0, a.deg_y(), a.deg_eta());
    if (a.deg_yp() > 0) throw InvalidArgument("swap_to_second_variable: a already depends on y'");
    for (int i = 0; i <= a.deg_y(); ++i)
        for (int k = 0; k <= a.deg_eta(); ++k) out.at(0, i, k) = a.get(i, 0, k);
    return out;
}

/// Op(a) u on a periodic y-window: Op(y^i y'^j eta^k) u = y^i D_y^k (y^j u),
/// assembled monomial by monomial with spectral derivatives. Exact up to the
/// FFT for polynomial symbols and smooth u supported inside the window.
inline Eigen::VectorXcd op_apply(const PolySymbol& a, const EdgeGrid& g,
                                 const Eigen::VectorXcd& u)
{
    if (u.size() != g.Q) throw GridMismatch("op_apply: sample count mismatch");

    auto dy_pow = [&g](Eigen::VectorXcd v, int k) {
        std::vector<Complex> buf(static_cast<std::size_t>(g.Q));
        for (int i = 0; i < g.Q; ++i) buf[static_cast<std::size_t>(i)] = v(i);
        fft_detail::radix2(buf.data(), buf.size(), -1);
        for (int m = 0; m < g.Q; ++m)
            buf[static_cast<std::size_t>(m)] *= std::pow(Complex(g.eta(m), 0.0), k);
        fft_detail::radix2(buf.data(), buf.size(), +1);
        for (int i = 0; i < g.Q; ++i) v(i) = buf[static_cast<std::size_t>(i)] / double(g.Q);
        return v;
    };

    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(g.Q);
    for (int j = 0; j <= a.deg_yp(); ++j) {
        Eigen::VectorXcd yju(g.Q);
        for (int i = 0; i < g.Q; ++i) yju(i) = std::pow(g.y(i), j) * u(i);
        for (int k = 0; k <= a.deg_eta(); ++k) {
            bool any = false;
            for (int i = 0; i <= a.deg_y(); ++i)
                if (std::abs(a.get(i, j, k)) != 0.0) any = true;
            if (!any) continue;
            const Eigen::VectorXcd dku = dy_pow(yju, k);
            for (int i = 0; i <= a.deg_y(); ++i) {
                const Complex c = a.get(i, j, k);
                if (std::abs(c) == 0.0) continue;
                for (int r = 0; r < g.Q; ++r) out(r) += c * std::pow(g.y(r), i) * dku(r);
            }
        }
    }
    return out;
}

/// Polynomial fit of a callable double symbol in y'; raises
/// NotPolynomialInSecondVariable when the declared degree does not close.
template <typename Fn>
PolySymbol fit_poly_symbol(Fn&& f, int dy, int dyp, int deta, double span = 1.0,
                           double tol = 1e-8)
{
    // tensor Vandermonde fit on Chebyshev-like nodes
    auto nodes = [span](int n) {
        std::vector<double> xs;
        for (int i = 0; i <= n + 1; ++i)
            xs.push_back(span * std::cos(3.14159265358979323846 * (i + 0.31) / (n + 2)));
        return xs;
    };
    const auto ys = nodes(dy), yps = nodes(dyp), es = nodes(deta);

    std::vector<std::vector<std::vector<Complex>>> data(
        ys.size(), std::vector<std::vector<Complex>>(yps.size(),
                                                     std::vector<Complex>(es.size())));
    for (std::size_t i = 0; i < ys.size(); ++i)
        for (std::size_t j = 0; j < yps.size(); ++j)
            for (std::size_t k = 0; k < es.size(); ++k) data[i][j][k] = f(ys[i], yps[j], es[k]);

    PolySymbol out(dy, dyp, deta);
    double scale = 0.0;
    for (const auto& pi : data)
        for (const auto& pj : pi)
            for (const auto& c : pj) scale = std::max(scale, std::abs(c));

    // full tensor least squares is small at these degrees: flatten and solve
    // against the Kronecker Vandermonde
    const int ny = static_cast<int>(ys.size()), nyp = static_cast<int>(yps.size()),
              ne = static_cast<int>(es.size());
    Eigen::MatrixXcd V(ny * nyp * ne, (dy + 1) * (dyp + 1) * (deta + 1));
    Eigen::VectorXcd rhs(ny * nyp * ne);
    int row = 0;
    for (int i = 0; i < ny; ++i)
        for (int j = 0; j < nyp; ++j)
            for (int k = 0; k < ne; ++k, ++row) {
                rhs(row) = data[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                               [static_cast<std::size_t>(k)];
                int col = 0;
                for (int a_ = 0; a_ <= dy; ++a_)
                    for (int b = 0; b <= dyp; ++b)
                        for (int c = 0; c <= deta; ++c, ++col)
                            V(row, col) = std::pow(ys[static_cast<std::size_t>(i)], a_) *
                                          std::pow(yps[static_cast<std::size_t>(j)], b) *
                                          std::pow(es[static_cast<std::size_t>(k)], c);
            }
    const Eigen::VectorXcd sol = V.colPivHouseholderQr().solve(rhs);
    const double resid = (V * sol - rhs).cwiseAbs().maxCoeff();
    if (resid > tol * std::max(scale, 1.0))
        throw NotPolynomialInSecondVariable(
            "fit_poly_symbol: residual " + std::to_string(resid) +
            "; the symbol is not polynomial of the declared degrees");
    int col = 0;
    for (int a_ = 0; a_ <= dy; ++a_)
        for (int b = 0; b <= dyp; ++b)
            for (int c = 0; c <= deta; ++c, ++col) out.at(a_, b, c) = sol(col);
    return out;
}

} // namespace conecalc
