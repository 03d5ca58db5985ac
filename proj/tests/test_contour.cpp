#include <catch2/catch_amalgamated.hpp>

#include "conecalc/contour.hpp"
#include "conecalc/inversion.hpp"
#include "oracles.hpp"

using namespace conecalc;

namespace {

MatrixFn scalar_fn(std::function<Complex(Complex)> f)
{
    return [f = std::move(f)](Complex z) -> Matrix {
        Matrix m(1, 1);
        m(0, 0) = f(z);
        return m;
    };
}

} // namespace

TEST_CASE("locate_singularities: quadratic roots")
{
    const double nu = 0.7;
    auto f = scalar_fn([nu](Complex z) { return z * z - nu * nu; });
    auto zs = locate_singularities(f, -1.0, 1.0, 4.0);
    REQUIRE(zs.size() == 2);
    REQUIRE(std::abs(zs[0].z - Complex(-nu, 0.0)) < 1e-10);
    REQUIRE(std::abs(zs[1].z - Complex(nu, 0.0)) < 1e-10);
    REQUIRE(zs[0].multiplicity == 1);
    REQUIRE(zs[1].multiplicity == 1);
}

TEST_CASE("locate_singularities: polar Laplacian symbol on the circle")
{
    // h(z) = z^2 - k^2 per Fourier mode; zeros at the integers, z = 0 double
    const int N = 4;
    BaseModel b = BaseModel::circle(N);
    Matrix lap = Matrix::Zero(b.dim(), b.dim());
    for (int i = 0; i < b.dim(); ++i) lap(i, i) = -static_cast<double>(b.mode(i) * b.mode(i));
    auto h = MeromorphicSymbol::polynomial(
        b, {lap, Matrix::Zero(b.dim(), b.dim()), Matrix::Identity(b.dim(), b.dim())});

    auto zs = locate_singularities(h.as_callable(), -4.5, 4.5, 6.0);
    REQUIRE(zs.size() == static_cast<std::size_t>(2 * N + 1));
    for (const auto& z : zs) {
        const double k = std::round(z.z.real());
        REQUIRE(std::abs(z.z - Complex(k, 0.0)) < 1e-9);
        if (k == 0.0) {
            REQUIRE(z.multiplicity == 2); // 1 and log r
        } else {
            REQUIRE(z.multiplicity == 1);
            REQUIRE(z.det_multiplicity == 2); // modes +-k coincide in det
        }
    }
}

TEST_CASE("locate_singularities: transcendental scalar")
{
    auto f = scalar_fn([](Complex z) { return std::exp(z) - 2.0; });
    auto zs = locate_singularities(f, 0.0, 1.0, 4.0);
    REQUIRE(zs.size() == 1);
    REQUIRE(std::abs(zs[0].z - Complex(std::log(2.0), 0.0)) < 1e-12);
    REQUIRE(zs[0].multiplicity == 1);
}

TEST_CASE("locate_singularities agrees between f and pole-free products")
{
    auto f = scalar_fn([](Complex z) { return (z - 0.3) * (z + 0.6) * (z - Complex(0.1, 0.4)); });
    auto g = scalar_fn([](Complex z) { return std::exp(0.3 * z) + 3.0; }); // nonvanishing
    auto fg = scalar_fn(
        [](Complex z) { return ((z - 0.3) * (z + 0.6) * (z - Complex(0.1, 0.4))) * (std::exp(0.3 * z) + 3.0); });
    auto z1 = locate_singularities(f, -1.0, 1.0, 2.0);
    auto z2 = locate_singularities(fg, -1.0, 1.0, 2.0);
    REQUIRE(z1.size() == z2.size());
    for (std::size_t i = 0; i < z1.size(); ++i) {
        REQUIRE(std::abs(z1[i].z - z2[i].z) < 1e-9);
        REQUIRE(z1[i].multiplicity == z2[i].multiplicity);
    }
}

TEST_CASE("laurent_extract: direct Laurent data")
{
    const Complex p(0.4, -0.2);
    auto f1 = scalar_fn([p](Complex z) { return 1.0 / (z - p); });
    auto b1 = laurent_extract(f1, p, 0, 0.3);
    REQUIRE(std::abs(b1.coeffs[0](0, 0) - 1.0) < 1e-12);

    auto f2 = scalar_fn([p](Complex z) { return 1.0 / ((z - p) * (z - p)) + 3.0 / (z - p); });
    auto b2 = laurent_extract(f2, p, 1, 0.3);
    REQUIRE(std::abs(b2.coeffs[0](0, 0) - 3.0) < 1e-12);
    REQUIRE(std::abs(b2.coeffs[1](0, 0) - 1.0) < 1e-12);
}

TEST_CASE("laurent_extract: residue of Gamma at 0, radius stability")
{
    auto f = scalar_fn([](Complex z) { return oracles::gamma(z); });
    auto blk1 = laurent_extract(f, Complex(0.0, 0.0), 0, 0.4);
    auto blk2 = laurent_extract(f, Complex(0.0, 0.0), 0, 0.2);
    REQUIRE(std::abs(blk1.coeffs[0](0, 0) - 1.0) < 1e-12);
    REQUIRE((blk1.coeffs[0] - blk2.coeffs[0]).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("laurent_extract flags a contaminated disk")
{
    const Complex p(0.0, 0.0), q(0.15, 0.0);
    auto f = scalar_fn([p, q](Complex z) { return 1.0 / (z - p) + 1.0 / (z - q); });
    REQUIRE_THROWS_AS(laurent_extract(f, p, 0, 0.5), ContaminatedDisk);
}

TEST_CASE("invert_elliptic: identity, linear, quadratic")
{
    auto idm = MeromorphicSymbol::identity(BaseModel::point());
    idm.strip_lo = -2.0;
    idm.strip_hi = 2.0;
    auto inv0 = invert_elliptic(idm, -2.0, 2.0);
    REQUIRE((inv0.symbol.eval(Complex(0.3, 0.7)) - Matrix::Identity(1, 1)).cwiseAbs().maxCoeff() <
            1e-12);

    const Complex p0(0.4, 0.0);
    auto lin = MeromorphicSymbol::polynomial(BaseModel::point(),
                                             {Matrix::Constant(1, 1, -p0), Matrix::Identity(1, 1)});
    auto inv1 = invert_elliptic(lin, -2.0, 2.0);
    REQUIRE(inv1.symbol.poles.size() == 1);
    REQUIRE(std::abs(inv1.symbol.poles[0].p - p0) < 1e-11);
    REQUIRE(std::abs(inv1.symbol.poles[0].coeffs[0](0, 0) - 1.0) < 1e-9);
    REQUIRE(inv1.probe_residual < 1e-9);

    const double nu = 0.7;
    auto quad = MeromorphicSymbol::polynomial(
        BaseModel::point(),
        {Matrix::Constant(1, 1, -nu * nu), Matrix::Zero(1, 1), Matrix::Identity(1, 1)});
    auto inv2 = invert_elliptic(quad, -2.0, 2.0);
    REQUIRE(inv2.symbol.poles.size() == 2);
    for (const auto& blk : inv2.symbol.poles) {
        const double sign = blk.p.real() > 0 ? 1.0 : -1.0;
        REQUIRE(std::abs(blk.coeffs[0](0, 0) - Complex(sign / (2.0 * nu), 0.0)) < 1e-9);
    }
}

TEST_CASE("invert_elliptic is an involution up to tolerance")
{
    const double nu = 0.55;
    auto quad = MeromorphicSymbol::polynomial(
        BaseModel::point(),
        {Matrix::Constant(1, 1, -nu * nu), Matrix::Zero(1, 1), Matrix::Identity(1, 1)});
    auto inv = invert_elliptic(quad, -2.0, 2.0);
    auto invinv = invert_elliptic(inv.symbol, -2.0, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const Complex z(oracles::uniform(-1.8, 1.8), oracles::uniform(-3.0, 3.0));
        if (std::abs(z - Complex(nu, 0)) < 0.2 || std::abs(z + Complex(nu, 0)) < 0.2) continue;
        worst = std::max(worst,
                         (invinv.symbol.eval(z) - quad.eval(z)).cwiseAbs().maxCoeff());
    }
    REQUIRE(worst < 1e-7);
}

TEST_CASE("invert_elliptic rejects non-elliptic data")
{
    // h(z) = z - on the boundary of every strip that contains 0 the minimum
    // singular value collapses at large |Im z|? no - use the zero symbol
    auto zero = MeromorphicSymbol::zero(BaseModel::point());
    zero.add_holo_term(0, Matrix::Zero(1, 1));
    REQUIRE_THROWS_AS(invert_elliptic(zero, -1.0, 1.0), NotElliptic);
}

TEST_CASE("invert_one_plus: zero, scalar pole, rank-one matrix")
{
    auto zero = MeromorphicSymbol::zero(BaseModel::point());
    auto l0 = invert_one_plus(zero, 0.5);
    REQUIRE(l0.symbol.poles.empty());
    REQUIRE(l0.symbol.degree() < 0);

    // f = c/(z-p): 1 + l = (z-p)/(z-p+c), pole of l at p - c with residue -c
    const Complex p(0.3, 0.0), c(0.8, 0.0);
    MeromorphicSymbol f(BaseModel::point(), kSmoothingOrder);
    f.add_pole_term(p, 0, Matrix::Constant(1, 1, c));
    auto l = invert_one_plus(f, 1.5);
    REQUIRE(l.symbol.poles.size() == 1);
    REQUIRE(std::abs(l.symbol.poles[0].p - (p - c)) < 1e-10);
    REQUIRE(std::abs(l.symbol.poles[0].coeffs[0](0, 0) - (-c)) < 1e-9);

    // rank-one matrix-valued f(z) = c(z) v w^*
    BaseModel cb = BaseModel::circle(1);
    Vector v(cb.dim()), w(cb.dim());
    for (int i = 0; i < cb.dim(); ++i) {
        v(i) = oracles::ucomplex();
        w(i) = oracles::ucomplex();
    }
    MeromorphicSymbol g(cb, kSmoothingOrder);
    g.add_pole_term(Complex(-0.4, 0.1), 0, 0.3 * (v * w.adjoint()));
    auto lg = invert_one_plus(g, 1.0);
    const MeromorphicSymbol one_plus_f = add(MeromorphicSymbol::identity(cb), g);
    const MeromorphicSymbol one_plus_l = add(MeromorphicSymbol::identity(cb), lg.symbol);
    double worst = 0.0;
    int checked = 0;
    for (int i = 0; i < 40 && checked < 20; ++i) {
        const Complex z(oracles::uniform(-2.0, 2.0), oracles::uniform(-2.0, 2.0));
        bool ok = true;
        for (const auto& blk : g.poles)
            if (std::abs(z - blk.p) < 0.2) ok = false;
        for (const auto& blk : lg.symbol.poles)
            if (std::abs(z - blk.p) < 0.2) ok = false;
        if (!ok) continue;
        ++checked;
        const Matrix err = one_plus_f.eval(z) * one_plus_l.eval(z) -
                           Matrix::Identity(cb.dim(), cb.dim());
        worst = std::max(worst, err.cwiseAbs().maxCoeff());
    }
    REQUIRE(checked == 20);
    REQUIRE(worst < 1e-9);
}

TEST_CASE("invert_one_plus rejects data singular on the line")
{
    MeromorphicSymbol f(BaseModel::point(), kSmoothingOrder);
    // 1 + f(z) = (z - 1/2)/(z + 1/2) vanishes at z = 1/2
    f.add_pole_term(Complex(-0.5, 0.0), 0, Matrix::Constant(1, 1, -1.0));
    REQUIRE_THROWS_AS(invert_one_plus(f, 0.5), NotInvertibleOnLine);
}
