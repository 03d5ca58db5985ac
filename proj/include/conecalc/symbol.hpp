#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <vector>

#include "conecalc/base_model.hpp"
#include "conecalc/errors.hpp"
#include "conecalc/grid.hpp"
#include "conecalc/mellin.hpp"

namespace conecalc {

inline constexpr double kSmoothingOrder = -std::numeric_limits<double>::infinity();
inline constexpr double kPoleMergeTol = 1e-9;

/// Laurent data of a pole at p of multiplicity m+1: coeffs[k] is the matrix
/// coefficient of (z - p)^{-(k+1)}, k = 0..m.
struct LaurentBlock {
    Complex p;
    std::vector<Matrix> coeffs;

    int log_order() const { return static_cast<int>(coeffs.size()) - 1; } // m
    int pole_order() const { return static_cast<int>(coeffs.size()); }    // m + 1

    double magnitude() const
    {
        double s = 0.0;
        for (const auto& c : coeffs) s = std::max(s, c.cwiseAbs().maxCoeff());
        return s;
    }
};

/// Matrix-valued meromorphic function on a working strip c <= Re z <= c',
/// stored as finite data: a polynomial part sum_j holo[j] z^j plus finitely
/// many Laurent pole blocks inside the strip. Pole data outside the strip is
/// not represented.
struct MeromorphicSymbol {
    double order = 0.0; // mu; -inf tags smoothing symbols
    BaseModel base;
    std::vector<Matrix> holo;
    std::vector<LaurentBlock> poles;
    double strip_lo = -std::numeric_limits<double>::infinity();
    double strip_hi = std::numeric_limits<double>::infinity();

    MeromorphicSymbol() = default;
    explicit MeromorphicSymbol(BaseModel b, double mu = 0.0) : order(mu), base(b) {}

    static MeromorphicSymbol zero(const BaseModel& b)
    {
        MeromorphicSymbol f(b, kSmoothingOrder);
        return f;
    }

    static MeromorphicSymbol constant(const BaseModel& b, const Matrix& c)
    {
        MeromorphicSymbol f(b, 0.0);
        f.holo.push_back(c);
        return f;
    }

    static MeromorphicSymbol identity(const BaseModel& b)
    {
        return constant(b, Matrix::Identity(b.dim(), b.dim()));
    }

    /// Polynomial symbol from coefficients h_0..h_d (scalars lift to
    /// multiples of the identity through the Matrix constructor).
    static MeromorphicSymbol polynomial(const BaseModel& b, std::vector<Matrix> coeffs)
    {
        MeromorphicSymbol f(b, static_cast<double>(coeffs.size()) - 1.0);
        f.holo = std::move(coeffs);
        f.trim();
        return f;
    }

    int dim() const { return base.dim(); }
    int degree() const { return static_cast<int>(holo.size()) - 1; }
    bool is_smoothing() const { return order == kSmoothingOrder; }

    double scale() const
    {
        double s = 0.0;
        for (const auto& h : holo) s = std::max(s, h.cwiseAbs().maxCoeff());
        for (const auto& b : poles) s = std::max(s, b.magnitude());
        return s;
    }

    double pole_distance_to_line(double beta) const
    {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& b : poles) d = std::min(d, std::abs(b.p.real() - beta));
        return d;
    }

    Matrix eval(Complex z, double pole_tol = 1e-10) const
    {
        for (const auto& b : poles)
            if (std::abs(z - b.p) < pole_tol)
                throw EvalAtPole("eval: z within tolerance of pole at Re=" +
                                 std::to_string(b.p.real()));
        Matrix acc = Matrix::Zero(dim(), dim());
        // Horner in z for the polynomial part
        for (int j = degree(); j >= 0; --j) acc = acc * z + holo[static_cast<std::size_t>(j)];
        for (const auto& b : poles) {
            const Complex w = 1.0 / (z - b.p);
            Complex wk = w;
            for (const auto& c : b.coeffs) {
                acc += c * wk;
                wk *= w;
            }
        }
        return acc;
    }

    std::function<Matrix(Complex)> as_callable() const
    {
        return [f = *this](Complex z) { return f.eval(z, 0.0); };
    }

    /// Drop numerically empty blocks and trailing zero polynomial
    /// coefficients. `rel_tol` is measured against the symbol scale.
    void prune(double rel_tol = 1e-13)
    {
        const double cut = rel_tol * std::max(scale(), 1e-300);
        for (auto& b : poles) {
            while (!b.coeffs.empty() && b.coeffs.back().cwiseAbs().maxCoeff() <= cut)
                b.coeffs.pop_back();
        }
        poles.erase(std::remove_if(poles.begin(), poles.end(),
                                   [](const LaurentBlock& b) { return b.coeffs.empty(); }),
                    poles.end());
        trim();
        canonicalize();
    }

    void canonicalize()
    {
        std::sort(poles.begin(), poles.end(), [](const LaurentBlock& a, const LaurentBlock& b) {
            if (a.p.real() != b.p.real()) return a.p.real() > b.p.real();
            return a.p.imag() < b.p.imag();
        });
    }

    /// Block accessor that merges coincident poles (tolerance kPoleMergeTol).
    LaurentBlock& block_at(Complex p)
    {
        for (auto& b : poles)
            if (std::abs(b.p - p) <= kPoleMergeTol) return b;
        poles.push_back(LaurentBlock{p, {}});
        return poles.back();
    }

    void add_pole_term(Complex p, int k, const Matrix& c)
    {
        LaurentBlock& b = block_at(p);
        if (static_cast<int>(b.coeffs.size()) <= k)
            b.coeffs.resize(static_cast<std::size_t>(k) + 1, Matrix::Zero(dim(), dim()));
        b.coeffs[static_cast<std::size_t>(k)] += c;
    }

    void add_holo_term(int j, const Matrix& c)
    {
        if (static_cast<int>(holo.size()) <= j)
            holo.resize(static_cast<std::size_t>(j) + 1, Matrix::Zero(dim(), dim()));
        holo[static_cast<std::size_t>(j)] += c;
    }

    void validate() const
    {
        for (const auto& h : holo)
            if (h.rows() != dim() || h.cols() != dim())
                throw InvalidArgument("symbol: holo coefficient has wrong dimension");
        for (std::size_t i = 0; i < poles.size(); ++i) {
            const auto& b = poles[i];
            if (!(b.p.real() > strip_lo && b.p.real() < strip_hi))
                throw InvalidArgument("symbol: pole outside the working strip");
            for (const auto& c : b.coeffs)
                if (c.rows() != dim() || c.cols() != dim())
                    throw InvalidArgument("symbol: Laurent coefficient has wrong dimension");
            for (std::size_t j = i + 1; j < poles.size(); ++j)
                if (std::abs(b.p - poles[j].p) <= kPoleMergeTol)
                    throw InvalidArgument("symbol: coincident pole locations");
        }
    }

private:
    void trim()
    {
        while (!holo.empty() && holo.back().cwiseAbs().maxCoeff() == 0.0) holo.pop_back();
    }
};

namespace symbol_detail {

inline double binom(int n, int k)
{
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r *= static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

/// Partial fractions of (z-p)^{-a} (z-q)^{-b} for distinct p, q:
/// coefficients A_i of (z-p)^{-i}, i = 1..a, and B_j of (z-q)^{-j}, j = 1..b.
inline void cross_partial_fractions(int a, int b, Complex p, Complex q,
                                    std::vector<Complex>& A, std::vector<Complex>& B)
{
    A.assign(static_cast<std::size_t>(a), Complex(0.0));
    B.assign(static_cast<std::size_t>(b), Complex(0.0));
    // A_i = binom(a+b-i-1, a-i) (-1)^{a-i} (p-q)^{-(a+b-i)}
    for (int i = 1; i <= a; ++i) {
        const int m = a - i;
        A[static_cast<std::size_t>(i - 1)] = binom(a + b - i - 1, m) *
                                             ((m % 2 == 0) ? 1.0 : -1.0) *
                                             std::pow(p - q, -(a + b - i));
    }
    for (int j = 1; j <= b; ++j) {
        const int m = b - j;
        B[static_cast<std::size_t>(j - 1)] = binom(a + b - j - 1, m) *
                                             ((m % 2 == 0) ? 1.0 : -1.0) *
                                             std::pow(q - p, -(a + b - j));
    }
}

} // namespace symbol_detail

inline MeromorphicSymbol add(const MeromorphicSymbol& f, const MeromorphicSymbol& g)
{
    require_same_base(f.base, g.base, "symbol add");
    MeromorphicSymbol out(f.base, std::max(f.order, g.order));
    out.strip_lo = std::max(f.strip_lo, g.strip_lo);
    out.strip_hi = std::min(f.strip_hi, g.strip_hi);
    for (int j = 0; j <= f.degree(); ++j) out.add_holo_term(j, f.holo[static_cast<std::size_t>(j)]);
    for (int j = 0; j <= g.degree(); ++j) out.add_holo_term(j, g.holo[static_cast<std::size_t>(j)]);
    for (const auto& b : f.poles)
        for (int k = 0; k < b.pole_order(); ++k)
            out.add_pole_term(b.p, k, b.coeffs[static_cast<std::size_t>(k)]);
    for (const auto& b : g.poles)
        for (int k = 0; k < b.pole_order(); ++k)
            out.add_pole_term(b.p, k, b.coeffs[static_cast<std::size_t>(k)]);
    out.prune();
    return out;
}

inline MeromorphicSymbol scaled(const MeromorphicSymbol& f, Complex c)
{
    MeromorphicSymbol out = f;
    for (auto& h : out.holo) h *= c;
    for (auto& b : out.poles)
        for (auto& m : b.coeffs) m *= c;
    return out;
}

inline MeromorphicSymbol subtract(const MeromorphicSymbol& f, const MeromorphicSymbol& g)
{
    return add(f, scaled(g, Complex(-1.0)));
}

/// Exact product in the symbol algebra. Polynomial x polynomial convolves,
/// pole x polynomial and pole x pole re-expand into Laurent blocks at the
/// union of the pole locations; coincident poles merge with added orders.
/// Matrix coefficients keep their left/right order.
inline MeromorphicSymbol multiply(const MeromorphicSymbol& f, const MeromorphicSymbol& g)
{
    require_same_base(f.base, g.base, "symbol multiply");
    const double lo = std::max(f.strip_lo, g.strip_lo);
    const double hi = std::min(f.strip_hi, g.strip_hi);
    if (!(lo < hi)) throw StripMismatch("symbol multiply: working strips do not overlap");

    MeromorphicSymbol out(f.base, f.order + g.order);
    out.strip_lo = lo;
    out.strip_hi = hi;

    // polynomial x polynomial
    for (int i = 0; i <= f.degree(); ++i)
        for (int j = 0; j <= g.degree(); ++j)
            out.add_holo_term(i + j, f.holo[static_cast<std::size_t>(i)] *
                                         g.holo[static_cast<std::size_t>(j)]);

    // helper: push C (z-p)^{e} for any integer e, re-expanding nonnegative
    // powers of (z-p) into the polynomial part
    auto push_power = [&out](const Matrix& C, Complex p, int e) {
        if (e < 0) {
            out.add_pole_term(p, -e - 1, C);
            return;
        }
        for (int l = 0; l <= e; ++l)
            out.add_holo_term(l, C * (symbol_detail::binom(e, l) * std::pow(-p, e - l)));
    };

    // polynomial x pole, both orders
    auto poly_times_block = [&](const std::vector<Matrix>& poly, const LaurentBlock& blk,
                                bool poly_on_left) {
        for (int j = 0; j < static_cast<int>(poly.size()); ++j) {
            const Matrix& hj = poly[static_cast<std::size_t>(j)];
            if (hj.cwiseAbs().maxCoeff() == 0.0) continue;
            for (int k = 0; k < blk.pole_order(); ++k) {
                const Matrix& ck = blk.coeffs[static_cast<std::size_t>(k)];
                const Matrix prod = poly_on_left ? Matrix(hj * ck) : Matrix(ck * hj);
                // z^j = sum_i binom(j, i) p^{j-i} (z-p)^i
                for (int i = 0; i <= j; ++i) {
                    const Complex w = symbol_detail::binom(j, i) * std::pow(blk.p, j - i);
                    push_power(prod * w, blk.p, i - (k + 1));
                }
            }
        }
    };
    for (const auto& b : g.poles) poly_times_block(f.holo, b, true);
    for (const auto& b : f.poles) poly_times_block(g.holo, b, false);

    // pole x pole
    std::vector<Complex> A, B;
    for (const auto& bf : f.poles) {
        for (const auto& bg : g.poles) {
            const bool same = std::abs(bf.p - bg.p) <= kPoleMergeTol;
            for (int a = 0; a < bf.pole_order(); ++a) {
                for (int b = 0; b < bg.pole_order(); ++b) {
                    const Matrix prod = bf.coeffs[static_cast<std::size_t>(a)] *
                                        bg.coeffs[static_cast<std::size_t>(b)];
                    if (prod.cwiseAbs().maxCoeff() == 0.0) continue;
                    if (same) {
                        out.add_pole_term(bf.p, a + b + 1, prod);
                    } else {
                        symbol_detail::cross_partial_fractions(a + 1, b + 1, bf.p, bg.p, A, B);
                        for (int i = 1; i <= a + 1; ++i)
                            out.add_pole_term(bf.p, i - 1, prod * A[static_cast<std::size_t>(i - 1)]);
                        for (int j = 1; j <= b + 1; ++j)
                            out.add_pole_term(bg.p, j - 1, prod * B[static_cast<std::size_t>(j - 1)]);
                    }
                }
            }
        }
    }

    out.prune();
    return out;
}

/// Argument shift (T^beta f)(z) = f(z + beta), exact: the polynomial part is
/// recentred binomially, poles move to p - beta, the strip shifts by -beta.
inline MeromorphicSymbol translate(const MeromorphicSymbol& f, double beta)
{
    MeromorphicSymbol out(f.base, f.order);
    out.strip_lo = f.strip_lo - beta;
    out.strip_hi = f.strip_hi - beta;
    for (int j = 0; j <= f.degree(); ++j) {
        const Matrix& hj = f.holo[static_cast<std::size_t>(j)];
        for (int l = 0; l <= j; ++l)
            out.add_holo_term(l, hj * (symbol_detail::binom(j, l) * std::pow(beta, j - l)));
    }
    for (const auto& b : f.poles) {
        for (int k = 0; k < b.pole_order(); ++k)
            out.add_pole_term(b.p - beta, k, b.coeffs[static_cast<std::size_t>(k)]);
    }
    out.prune();
    return out;
}

/// op_M^gamma(f) u for a MeromorphicSymbol, with the pole-on-weight-line
/// admissibility check.
inline WeightedGridFunction op_mellin(const MeromorphicSymbol& f, double gamma,
                                      const WeightedGridFunction& u,
                                      const NumericsConfig& cfg = NumericsConfig::defaults())
{
    require_same_base(f.base, u.base, "op_mellin");
    const double beta = 0.5 * (u.cone_dim() + 1) - gamma;
    if (f.pole_distance_to_line(beta) < cfg.pole_line_tol)
        throw PoleOnWeightLine("op_mellin: symbol pole within tolerance of Re z = " +
                               std::to_string(beta));
    return op_mellin_fn([&f](Complex z) { return f.eval(z, 0.0); }, gamma, u, cfg);
}

} // namespace conecalc
