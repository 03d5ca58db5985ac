#include <catch2/catch_amalgamated.hpp>

#include "conecalc/mellin.hpp"
#include "conecalc/spaces.hpp"
#include "conecalc/symbol.hpp"
#include "oracles.hpp"

using namespace conecalc;

namespace {

WeightedGridFunction bump(const RadialGrid& g, double t_center, double t_width = 0.8)
{
    return sample_function(g, BaseModel::point(), [=](double r, int) {
        const double t = std::log(r);
        return std::exp(-std::pow((t - t_center) / t_width, 2));
    });
}

double rel_l2(const Matrix& a, const Matrix& b)
{
    return (a - b).norm() / b.norm();
}

} // namespace

TEST_CASE("lanczos gamma agrees with the defining quadrature")
{
    for (Complex z : {Complex(0.5, 0.0), Complex(0.5, 2.2), Complex(1.7, -3.0), Complex(2.4, 0.9)}) {
        const Complex by_quad =
            oracles::mellin_quadrature([](double r) { return std::exp(-r); }, z);
        REQUIRE(std::abs(oracles::gamma(z) - by_quad) < 1e-10 * std::abs(by_quad));
    }
}

TEST_CASE("mellin_forward of exp(-r) matches Gamma on the half line")
{
    RadialGrid g(64.0, 4096);
    auto u = sample_function(g, BaseModel::point(), [](double r, int) { return std::exp(-r); });
    auto sp = mellin_forward(u, 0.5);
    for (int k : {0, 1, 5, 40, 200, 2000}) {
        const Complex z = sp.z(k);
        if (std::abs(z.imag()) > 40.0) continue;
        const Complex expected = oracles::gamma(z);
        REQUIRE(std::abs(sp.values(k, 0) - expected) <= 1e-8 * std::abs(expected));
    }
}

TEST_CASE("mellin_forward of zero is zero")
{
    RadialGrid g(12.0, 256);
    WeightedGridFunction u(g, BaseModel::point());
    auto sp = mellin_forward(u, 0.5);
    REQUIRE(sp.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mellin_forward raises WindowTruncation when the window is too small")
{
    RadialGrid g(12.0, 1024); // e^{t/2} e^{-e^t} ~ e^{-6} at the left end
    auto u = sample_function(g, BaseModel::point(), [](double r, int) { return std::exp(-r); });
    REQUIRE_THROWS_AS(mellin_forward(u, 0.5), WindowTruncation);
}

TEST_CASE("transform of a cut-off monomial: values and Laurent order")
{
    // u = omega(r) r^{-p} log^k r has a pole of order k+1 at p
    RadialGrid g(40.0, 4096);
    const Complex p(-1.0, 0.0);
    Cutoff omega;
    for (int k : {0, 1, 2}) {
        auto u = sample_function(g, BaseModel::point(), [&](double r, int) {
            const double w = omega(r);
            return w == 0.0 ? Complex(0.0)
                            : w * std::exp(-p * std::log(r)) * std::pow(std::log(r), k);
        });

        // off-pole values against adaptive quadrature
        for (Complex z : {Complex(0.4, 0.7), Complex(-0.3, -1.1), Complex(0.9, 0.0)}) {
            const Complex by_quad = oracles::mellin_quadrature(
                [&](double r) {
                    const double w = omega(r);
                    return w == 0.0 ? Complex(0.0)
                                    : w * std::exp(-p * std::log(r)) *
                                          std::pow(std::log(r), k);
                },
                z, -40.0, 0.0);
            const Complex mine = mellin_eval_at(u, z)(0);
            REQUIRE(std::abs(mine - by_quad) < 1e-8 * (1.0 + std::abs(by_quad)));
        }

        // fitted Laurent order at p equals k+1 (top coefficient (-1)^k k!)
        MatrixFn f = [&](Complex z) -> Matrix {
            Matrix m(1, 1);
            m(0, 0) = mellin_eval_at(u, z)(0);
            return m;
        };
        LaurentBlock blk = laurent_extract(f, p, 3, 0.35);
        int order = 0;
        for (int j = 0; j < blk.pole_order(); ++j)
            if (blk.coeffs[static_cast<std::size_t>(j)].cwiseAbs().maxCoeff() > 1e-6)
                order = j + 1;
        REQUIRE(order == k + 1);
        double expected_top = 1.0;
        for (int i = 2; i <= k; ++i) expected_top *= i;
        REQUIRE(std::abs(blk.coeffs[static_cast<std::size_t>(k)](0, 0) -
                         Complex((k % 2 == 0 ? 1.0 : -1.0) * expected_top, 0.0)) < 1e-8);
    }
}

TEST_CASE("roundtrip identity on well-supported bumps")
{
    RadialGrid g(12.0, 4096);
    for (double c : {-3.0, 0.0, 2.5}) {
        auto u = bump(g, c);
        auto back = mellin_inverse(mellin_forward(u, 0.7));
        REQUIRE(rel_l2(back.values, u.values) < 1e-12);
    }
}

TEST_CASE("inverse of sampled Gamma recovers exp(-r) in the interior")
{
    RadialGrid g(64.0, 4096);
    SpectralFunction sp(g, BaseModel::point(), 0.5);
    for (int k = 0; k < g.M; ++k) sp.values(k, 0) = oracles::gamma(sp.z(k));
    auto u = mellin_inverse(sp);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < g.M; ++i) {
        if (std::abs(g.t(i)) > 0.5 * g.T) continue;
        const Complex expected = std::exp(-g.r(i));
        num += std::norm(u.values(i, 0) - expected);
        den += std::norm(expected);
    }
    REQUIRE(std::sqrt(num / den) < 1e-6);
}

TEST_CASE("inverse of zero is zero and grids must match")
{
    RadialGrid g(12.0, 256);
    SpectralFunction sp(g, BaseModel::point(), 0.5);
    REQUIRE(mellin_inverse(sp).values.cwiseAbs().maxCoeff() == 0.0);

    auto u = bump(g, 0.0);
    auto v = bump(RadialGrid(12.0, 512), 0.0);
    REQUIRE_THROWS_AS(pairing(u, v), GridMismatch);
}

TEST_CASE("linearity of the transform pair")
{
    RadialGrid g(12.0, 1024);
    auto u = bump(g, -1.0), v = bump(g, 1.5, 0.5);
    const Complex a = oracles::ucomplex(2.0), b = oracles::ucomplex(2.0);
    WeightedGridFunction w(g, BaseModel::point());
    w.values = a * u.values + b * v.values;
    auto sw = mellin_forward(w, 0.3);
    Matrix expect = a * mellin_forward(u, 0.3).values + b * mellin_forward(v, 0.3).values;
    REQUIRE((sw.values - expect).cwiseAbs().maxCoeff() < 1e-12 * expect.cwiseAbs().maxCoeff());
}

TEST_CASE("Parseval on the weight line")
{
    RadialGrid g(12.0, 2048);
    auto u = bump(g, 0.4);
    const double beta = 0.62;
    auto sp = mellin_forward(u, beta);
    double line = 0.0;
    for (int k = 0; k < g.M; ++k) line += std::norm(sp.values(k, 0));
    line /= 2.0 * g.T; // (2 pi)^{-1} sum drho
    double direct = 0.0;
    for (int i = 0; i < g.M; ++i)
        direct += std::norm(std::exp(beta * g.t(i)) * u.values(i, 0)) * g.step();
    REQUIRE(std::abs(line - direct) < 1e-9 * direct);
}

TEST_CASE("op_mellin with the identity symbol is the identity")
{
    RadialGrid g(12.0, 1024);
    auto u = bump(g, 0.0);
    auto out = op_mellin(MeromorphicSymbol::identity(BaseModel::point()), 0.3, u);
    REQUIRE(rel_l2(out.values, u.values) < 1e-12);
}

TEST_CASE("op_mellin with f(z) = z acts as -r d/dr")
{
    RadialGrid g(12.0, 4096);
    auto u = bump(g, 0.0);
    auto f = MeromorphicSymbol::polynomial(
        BaseModel::point(), {Matrix::Zero(1, 1), Matrix::Identity(1, 1)});
    auto out = op_mellin(f, 0.0, u);

    // fourth-order centred differences on the log grid
    const double h = g.step();
    double worst = 0.0;
    for (int i = 2; i < g.M - 2; ++i) {
        const Complex fd = (-u.values(i + 2, 0) + 8.0 * u.values(i + 1, 0) -
                            8.0 * u.values(i - 1, 0) + u.values(i - 2, 0)) /
                           (12.0 * h);
        worst = std::max(worst, std::abs(out.values(i, 0) - (-fd)));
    }
    REQUIRE(worst < 1e-6);
}

TEST_CASE("op_mellin rejects symbols with a pole on the weight line")
{
    RadialGrid g(12.0, 256);
    auto u = bump(g, 0.0);
    MeromorphicSymbol f(BaseModel::point(), kSmoothingOrder);
    f.add_pole_term(Complex(0.5, 0.0), 0, Matrix::Identity(1, 1));
    REQUIRE_THROWS_AS(op_mellin(f, 0.0, u), PoleOnWeightLine); // line Re z = 1/2
}

TEST_CASE("constant-coefficient op_mellin commutes with dilation")
{
    RadialGrid g(12.0, 2048);
    auto u = bump(g, 0.0, 0.5);
    auto f = MeromorphicSymbol::polynomial(
        BaseModel::point(),
        {Matrix::Constant(1, 1, Complex(0.3, 0.1)), Matrix::Identity(1, 1)});
    for (double lam : {0.7, 1.9}) {
        auto lhs = dilate_plain(op_mellin(f, 0.2, u), lam);
        auto rhs = op_mellin(f, 0.2, dilate_plain(u, lam));
        REQUIRE((lhs.values - rhs.values).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("conjugation identity: delta^{-1} op delta = op for constant symbols")
{
    RadialGrid g(12.0, 2048);
    auto u = bump(g, -0.5, 0.6);
    auto f = MeromorphicSymbol::polynomial(
        BaseModel::point(), {Matrix::Constant(1, 1, Complex(1.0, -0.4)), Matrix::Identity(1, 1)});
    const double lam = 1.7;
    auto conj = dilate_plain(op_mellin(f, 0.0, dilate_plain(u, lam)), 1.0 / lam);
    auto plain = op_mellin(f, 0.0, u);
    REQUIRE((conj.values - plain.values).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("dilate: identity, unitarity, group law")
{
    RadialGrid g(12.0, 2048);
    auto u = bump(g, 0.0, 0.6);

    auto same = dilate(u, 1.0, 0.0);
    REQUIRE((same.values - u.values).cwiseAbs().maxCoeff() < 1e-13);

    const double norm0 = scpr_norm(u);
    for (double lam : {0.4, 0.9, 1.0, 1.7, 3.1}) {
        auto v = dilate(u, lam, 0.0);
        REQUIRE(std::abs(scpr_norm(v) - norm0) < 1e-9 * norm0);
    }

    auto ab = dilate(dilate(u, 1.3, 0.0), 2.1, 0.0);
    auto once = dilate(u, 1.3 * 2.1, 0.0);
    REQUIRE((ab.values - once.values).cwiseAbs().maxCoeff() < 1e-8);

    REQUIRE_THROWS_AS(dilate(u, 1e4, 0.0), WindowTruncation);
}

TEST_CASE("weight-line independence of the holomorphic extension")
{
    RadialGrid g(16.0, 2048);
    auto u = bump(g, 0.0, 0.5);
    // forward at beta1, reconstruct, forward at beta2: consistent with the
    // direct transform at beta2
    auto direct2 = mellin_forward(u, 1.1);
    auto recon = mellin_inverse(mellin_forward(u, 0.2));
    auto via1 = mellin_forward(recon, 1.1);
    REQUIRE((via1.values - direct2.values).cwiseAbs().maxCoeff() <
            1e-6 * direct2.values.cwiseAbs().maxCoeff());
}
