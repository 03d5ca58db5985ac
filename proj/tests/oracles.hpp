// Test-side oracles, independent of the library's transform pipeline:
// adaptive quadrature for Mellin integrals, a Lanczos complex gamma, direct
// ODE integration, and quadrature helpers. Everything here is verified
// against first principles inside the test suites before it is trusted.
#pragma once

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <complex>
#include <functional>
#include <random>

namespace oracles {

using Complex = std::complex<double>;

/// Adaptive quadrature of integral_0^inf r^{z-1} u(r) dr via the log
/// substitution, real and imaginary parts separately.
template <typename F>
Complex mellin_quadrature(F&& u, Complex z, double t_lo = -60.0, double t_hi = 8.0)
{
    boost::math::quadrature::tanh_sinh<double> integ;
    auto re = [&](double t) {
        const double r = std::exp(t);
        return (std::exp(z * t) * Complex(u(r))).real();
    };
    auto im = [&](double t) {
        const double r = std::exp(t);
        return (std::exp(z * t) * Complex(u(r))).imag();
    };
    return {integ.integrate(re, t_lo, t_hi), integ.integrate(im, t_lo, t_hi)};
}

/// Gamma(z) for complex z by Lanczos approximation (g = 7, 9 terms);
/// checked against mellin_quadrature of e^{-r} in the suites.
inline Complex gamma(Complex z)
{
    static const double g = 7.0;
    static const double c[9] = {0.99999999999980993, 676.5203681218851, -1259.1392167224028,
                                771.32342877765313, -176.61502916214059, 12.507343278686905,
                                -0.13857109526572012, 9.9843695780195716e-6,
                                1.5056327351493116e-7};
    if (z.real() < 0.5) {
        // reflection
        const double pi = 3.14159265358979323846;
        return pi / (std::sin(pi * z) * gamma(1.0 - z));
    }
    z -= 1.0;
    Complex x = c[0];
    for (int i = 1; i < 9; ++i) x += c[i] / (z + static_cast<double>(i));
    const Complex t = z + g + 0.5;
    const double sq2pi = 2.5066282746310002;
    return sq2pi * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

/// Fixed-step RK4 for complex first-order systems dy/dt = f(t, y), fine
/// steps; used as the reference integrator for ODE comparisons on the log
/// axis.
template <typename F>
std::vector<Complex> rk4_path(F&& f, double t0, double t1, Complex y0, int steps)
{
    std::vector<Complex> path;
    path.reserve(static_cast<std::size_t>(steps) + 1);
    const double h = (t1 - t0) / steps;
    Complex y = y0;
    path.push_back(y);
    for (int i = 0; i < steps; ++i) {
        const double t = t0 + i * h;
        const Complex k1 = f(t, y);
        const Complex k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
        const Complex k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
        const Complex k4 = f(t + h, y + h * k3);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        path.push_back(y);
    }
    return path;
}

/// Gauss-Kronrod quadrature of a complex integrand on [a, b].
template <typename F>
Complex gk_quadrature(F&& f, double a, double b)
{
    using boost::math::quadrature::gauss_kronrod;
    auto re = [&](double x) { return Complex(f(x)).real(); };
    auto im = [&](double x) { return Complex(f(x)).imag(); };
    return {gauss_kronrod<double, 31>::integrate(re, a, b, 12, 1e-13),
            gauss_kronrod<double, 31>::integrate(im, a, b, 12, 1e-13)};
}

/// Deterministic RNG for the property tests.
inline std::mt19937& rng()
{
    static std::mt19937 gen(0x5eed5u);
    return gen;
}

inline double uniform(double a, double b)
{
    std::uniform_real_distribution<double> d(a, b);
    return d(rng());
}

inline Complex ucomplex(double scale = 1.0)
{
    return {uniform(-scale, scale), uniform(-scale, scale)};
}

} // namespace oracles
