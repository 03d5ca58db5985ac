#include <catch2/catch_amalgamated.hpp>

#include "conecalc/conormal.hpp"
#include "conecalc/serialize.hpp"
#include "conecalc/symbol.hpp"
#include "oracles.hpp"

using namespace conecalc;

namespace {

Matrix m1(Complex c)
{
    return Matrix::Constant(1, 1, c);
}

MeromorphicSymbol scalar_poly(std::vector<Complex> cs)
{
    std::vector<Matrix> lifted;
    for (auto c : cs) lifted.push_back(m1(c));
    return MeromorphicSymbol::polynomial(BaseModel::point(), std::move(lifted));
}

MeromorphicSymbol simple_pole(Complex p, Complex residue)
{
    MeromorphicSymbol f(BaseModel::point(), kSmoothingOrder);
    f.add_pole_term(p, 0, m1(residue));
    return f;
}

MeromorphicSymbol random_symbol(int deg, int npoles, double scale = 1.0)
{
    MeromorphicSymbol f(BaseModel::point(), static_cast<double>(deg));
    for (int j = 0; j <= deg; ++j) f.holo.push_back(m1(oracles::ucomplex(scale)));
    for (int i = 0; i < npoles; ++i) {
        const Complex p(oracles::uniform(-2.0, 2.0), oracles::uniform(-1.0, 1.0));
        const int m = i % 2;
        for (int k = 0; k <= m; ++k) f.add_pole_term(p, k, m1(oracles::ucomplex(scale)));
    }
    f.prune();
    return f;
}

double eval_diff(const MeromorphicSymbol& a, const MeromorphicSymbol& b, int samples = 24)
{
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const Complex z(oracles::uniform(-3.0, 3.0), oracles::uniform(-3.0, 3.0));
        bool ok = true;
        for (const auto& blk : a.poles)
            if (std::abs(z - blk.p) < 0.1) ok = false;
        for (const auto& blk : b.poles)
            if (std::abs(z - blk.p) < 0.1) ok = false;
        if (!ok) continue;
        worst = std::max(worst, (a.eval(z) - b.eval(z)).cwiseAbs().maxCoeff());
    }
    return worst;
}

} // namespace

TEST_CASE("eval: polynomial, simple pole, Euler polynomial root")
{
    auto f = scalar_poly({0.0, 1.0}); // f(z) = z
    REQUIRE(f.eval(Complex(2.0, 1.0))(0, 0) == Complex(2.0, 1.0));

    auto g = simple_pole(Complex(1.0, 0.0), 1.0);
    REQUIRE(std::abs(g.eval(Complex(3.0, 0.0))(0, 0) - 0.5) < 1e-15);

    auto h = scalar_poly({-0.49, 0.0, 1.0}); // z^2 - 0.7^2
    REQUIRE(std::abs(h.eval(Complex(0.7, 0.0))(0, 0)) < 1e-15);

    REQUIRE_THROWS_AS(g.eval(Complex(1.0, 1e-12), 1e-10), EvalAtPole);
}

TEST_CASE("multiply: identity, pole cancellation, partial fractions")
{
    auto f = random_symbol(2, 2);
    auto idm = MeromorphicSymbol::identity(BaseModel::point());
    REQUIRE(eval_diff(multiply(f, idm), f) < 1e-12);

    // (z-1) * 1/(z-1) = 1, the pole block prunes away
    auto lin = scalar_poly({-1.0, 1.0});
    auto inv = simple_pole(Complex(1.0, 0.0), 1.0);
    auto prod = multiply(lin, inv);
    REQUIRE(prod.poles.empty());
    REQUIRE(prod.degree() == 0);
    REQUIRE(std::abs(prod.holo[0](0, 0) - 1.0) < 1e-14);

    // 1/(z-1) * 1/(z-2): simple poles with residues -1 and +1
    auto p1 = simple_pole(Complex(1.0, 0.0), 1.0);
    auto p2 = simple_pole(Complex(2.0, 0.0), 1.0);
    auto q = multiply(p1, p2);
    REQUIRE(q.poles.size() == 2);
    for (const auto& blk : q.poles) {
        if (std::abs(blk.p - Complex(1.0, 0.0)) < 1e-12)
            REQUIRE(std::abs(blk.coeffs[0](0, 0) - Complex(-1.0, 0.0)) < 1e-14);
        else
            REQUIRE(std::abs(blk.coeffs[0](0, 0) - Complex(1.0, 0.0)) < 1e-14);
    }
}

TEST_CASE("multiply agrees with pointwise evaluation on random symbols")
{
    for (int trial = 0; trial < 6; ++trial) {
        auto f = random_symbol(2, 2), g = random_symbol(1, 2);
        auto prod = multiply(f, g);
        for (int i = 0; i < 12; ++i) {
            const Complex z(oracles::uniform(-3.0, 3.0), oracles::uniform(-3.0, 3.0));
            bool ok = true;
            for (const auto& blk : prod.poles)
                if (std::abs(z - blk.p) < 0.15) ok = false;
            if (!ok) continue;
            const Complex direct = f.eval(z)(0, 0) * g.eval(z)(0, 0);
            REQUIRE(std::abs(prod.eval(z)(0, 0) - direct) < 1e-9 * (1.0 + std::abs(direct)));
        }
    }
}

TEST_CASE("multiply is associative and distributes")
{
    auto a = random_symbol(1, 1), b = random_symbol(2, 1), c = random_symbol(1, 2);
    REQUIRE(eval_diff(multiply(multiply(a, b), c), multiply(a, multiply(b, c))) < 1e-8);
    REQUIRE(eval_diff(multiply(a, add(b, c)), add(multiply(a, b), multiply(a, c))) < 1e-9);
}

TEST_CASE("translate: identity, shift, semigroup, morphism")
{
    auto f = random_symbol(3, 2);
    REQUIRE(eval_diff(translate(f, 0.0), f) < 1e-13);

    auto z = scalar_poly({0.0, 1.0});
    auto shifted = translate(z, 1.0);
    REQUIRE(shifted.degree() == 1);
    REQUIRE(std::abs(shifted.holo[0](0, 0) - 1.0) < 1e-15);
    REQUIRE(std::abs(shifted.holo[1](0, 0) - 1.0) < 1e-15);

    auto g = random_symbol(2, 2);
    const double a = 0.7, b = -1.3;
    REQUIRE(eval_diff(translate(translate(g, a), b), translate(g, a + b)) < 1e-10);

    // T^beta (f g) = (T^beta f)(T^beta g)
    REQUIRE(eval_diff(translate(multiply(f, g), 0.9),
                      multiply(translate(f, 0.9), translate(g, 0.9))) < 1e-8);
}

TEST_CASE("symbol JSON round-trip")
{
    auto f = random_symbol(2, 3, 2.0);
    f.strip_lo = -3.0;
    f.strip_hi = 3.0;
    auto back = symbol_from_json(symbol_to_json(f));
    REQUIRE(back.poles.size() == f.poles.size());
    REQUIRE(eval_diff(back, f) < 1e-14);

    // matrix-valued on a small circle
    BaseModel cb = BaseModel::circle(2);
    MeromorphicSymbol g(cb, 1.0);
    Matrix h0 = Matrix::Zero(cb.dim(), cb.dim());
    for (int i = 0; i < cb.dim(); ++i)
        for (int j = 0; j < cb.dim(); ++j) h0(i, j) = oracles::ucomplex();
    g.holo = {h0, Matrix::Identity(cb.dim(), cb.dim())};
    g.add_pole_term(Complex(0.3, -0.2), 1, h0 * 0.5);
    auto gb = symbol_from_json(symbol_to_json(g));
    const Complex z(1.4, 0.3);
    REQUIRE((gb.eval(z) - g.eval(z)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("strip mismatch is rejected")
{
    auto f = random_symbol(1, 0);
    f.strip_lo = -2.0;
    f.strip_hi = -1.0;
    auto g = random_symbol(1, 0);
    g.strip_lo = 1.0;
    g.strip_hi = 2.0;
    REQUIRE_THROWS_AS(multiply(f, g), StripMismatch);
}
