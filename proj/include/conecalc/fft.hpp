#pragma once

#include <complex>
#include <vector>

#include "conecalc/errors.hpp"

namespace conecalc {

using Complex = std::complex<double>;

namespace fft_detail {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// In-place iterative radix-2 transform, sign = -1 for the forward DFT
/// X_k = sum_i x_i e^{-2 pi i k i / n}, sign = +1 for the unnormalised inverse.
inline void radix2(Complex* data, std::size_t n, int sign)
{
    if (!is_power_of_two(n)) throw InvalidArgument("fft: length must be a power of two");

    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    const double pi = 3.14159265358979323846;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * pi / static_cast<double>(len);
        const Complex wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            Complex w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                Complex u = data[i + k];
                Complex v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

} // namespace fft_detail

/// Forward DFT, X_k = sum_i x_i e^{-2 pi i k i / n}.
inline void fft_forward(std::vector<Complex>& x)
{
    fft_detail::radix2(x.data(), x.size(), -1);
}

/// Inverse DFT, x_i = (1/n) sum_k X_k e^{+2 pi i k i / n}.
inline void fft_inverse(std::vector<Complex>& x)
{
    fft_detail::radix2(x.data(), x.size(), +1);
    const double scale = 1.0 / static_cast<double>(x.size());
    for (auto& v : x) v *= scale;
}

/// Signed frequency index for bin k of an n-point DFT: k for k < n/2, k - n otherwise.
inline long signed_bin(std::size_t k, std::size_t n)
{
    return k < n / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
}

} // namespace conecalc
