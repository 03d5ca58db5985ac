#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "conecalc/contour.hpp"
#include "conecalc/errors.hpp"

namespace conecalc {

inline constexpr double kPairLocationTol = 1e-9;

/// Weight data (gamma, Theta) with Theta = (theta, 0], theta < 0 (possibly
/// -infinity), on a base of dimension n.
struct WeightData {
    double gamma = 0.0;
    double theta = -1.0;
    int n = 0;

    WeightData() = default;
    WeightData(double gamma_, double theta_, int n_) : gamma(gamma_), theta(theta_), n(n_)
    {
        if (!(theta < 0.0)) throw InvalidArgument("WeightData: theta must be negative");
        if (n < 0) throw InvalidArgument("WeightData: n must be nonnegative");
    }

    bool theta_finite() const { return std::isfinite(theta); }

    /// The strip (n+1)/2 - gamma + theta < Re p < (n+1)/2 - gamma.
    double strip_upper() const { return 0.5 * (n + 1) - gamma; }
    double strip_lower() const
    {
        return theta_finite() ? strip_upper() + theta : -std::numeric_limits<double>::infinity();
    }
};

/// One exponent of a discrete asymptotic expansion: terms r^{-p} log^k r for
/// k = 0..m.
struct AsymPair {
    Complex p;
    int m = 0;
};

/// Finite list of (p_j, m_j) pairs with weight data. Pairs are kept sorted
/// by decreasing Re p, then increasing Im p, and are pairwise distinct up to
/// the location tolerance.
struct DiscreteAsymptoticType {
    std::vector<AsymPair> pairs;
    WeightData weight;

    DiscreteAsymptoticType() = default;
    explicit DiscreteAsymptoticType(WeightData w) : weight(w) {}
    DiscreteAsymptoticType(std::vector<AsymPair> ps, WeightData w)
        : pairs(std::move(ps)), weight(w)
    {
        normalize();
    }

    void normalize()
    {
        std::vector<AsymPair> merged;
        for (const auto& q : pairs) {
            bool absorbed = false;
            for (auto& r : merged) {
                if (std::abs(r.p - q.p) <= kPairLocationTol) {
                    r.m = std::max(r.m, q.m);
                    absorbed = true;
                    break;
                }
            }
            if (!absorbed) merged.push_back(q);
        }
        std::sort(merged.begin(), merged.end(), [](const AsymPair& a, const AsymPair& b) {
            if (a.p.real() != b.p.real()) return a.p.real() > b.p.real();
            return a.p.imag() < b.p.imag();
        });
        pairs = std::move(merged);
    }

    bool contains(Complex p, int m) const
    {
        for (const auto& q : pairs)
            if (std::abs(q.p - p) <= kPairLocationTol && q.m >= m) return true;
        return false;
    }

    /// Subset relation up to the location tolerance (log orders dominated).
    bool subset_of(const DiscreteAsymptoticType& other) const
    {
        for (const auto& q : pairs)
            if (!other.contains(q.p, q.m)) return false;
        return true;
    }
};

struct ValidationReport {
    bool valid = true;
    std::vector<std::string> violations;
};

/// Strip condition: every exponent obeys
/// (n+1)/2 - gamma + theta < Re p < (n+1)/2 - gamma.
inline ValidationReport validate(const DiscreteAsymptoticType& P)
{
    ValidationReport rep;
    for (const auto& q : P.pairs) {
        if (!(q.p.real() < P.weight.strip_upper() && q.p.real() > P.weight.strip_lower())) {
            rep.valid = false;
            rep.violations.push_back("pair at Re p = " + std::to_string(q.p.real()) +
                                     " outside (" + std::to_string(P.weight.strip_lower()) +
                                     ", " + std::to_string(P.weight.strip_upper()) + ")");
        }
        if (q.m < 0) {
            rep.valid = false;
            rep.violations.push_back("negative log order");
        }
    }
    return rep;
}

/// T^delta P: shift all exponents; validity is not re-enforced, callers
/// revalidate against their weight data.
inline DiscreteAsymptoticType shift(const DiscreteAsymptoticType& P, double delta)
{
    DiscreteAsymptoticType out = P;
    for (auto& q : out.pairs) q.p += delta;
    out.normalize();
    return out;
}

inline DiscreteAsymptoticType conjugate(const DiscreteAsymptoticType& P)
{
    DiscreteAsymptoticType out = P;
    for (auto& q : out.pairs) q.p = std::conj(q.p);
    out.normalize();
    return out;
}

/// Smallest superset closed under (p, m) -> (p - l, m) for integers l >= 1
/// with Re p - l > (n+1)/2 - gamma + theta. For theta = -infinity an
/// explicit depth bound must be supplied (the closure would be infinite).
inline DiscreteAsymptoticType shadow_close(const DiscreteAsymptoticType& P, int depth_bound = -1)
{
    double lower = P.weight.strip_lower();
    if (!P.weight.theta_finite()) {
        if (depth_bound < 0)
            throw InvalidArgument(
                "shadow_close: infinite weight interval needs an explicit depth bound");
        lower = P.weight.strip_upper() - (depth_bound + 1);
    }
    DiscreteAsymptoticType out = P;
    for (const auto& q : P.pairs) {
        for (int l = 1; q.p.real() - l > lower; ++l)
            out.pairs.push_back(AsymPair{q.p - static_cast<double>(l), q.m});
    }
    out.normalize();
    return out;
}

/// Asymptotic type generated by a pole set: keep the poles inside the weight
/// strip, with log order m = multiplicity - 1.
inline DiscreteAsymptoticType from_pole_set(const std::vector<ZeroLocation>& D,
                                            const WeightData& weight)
{
    DiscreteAsymptoticType out(weight);
    for (const auto& d : D) {
        if (d.z.real() < weight.strip_upper() - kPairLocationTol &&
            d.z.real() > weight.strip_lower() + kPairLocationTol)
            out.pairs.push_back(AsymPair{d.z, d.multiplicity - 1});
    }
    out.normalize();
    return out;
}

/// Discrete asymptotic type for Mellin symbols: finitely many pairs per
/// strip; here just the pairs inside a declared working strip.
struct MellinAsymptoticType {
    std::vector<AsymPair> pairs;
    double strip_lo = 0.0;
    double strip_hi = 0.0;

    void normalize()
    {
        std::sort(pairs.begin(), pairs.end(), [](const AsymPair& a, const AsymPair& b) {
            if (a.p.real() != b.p.real()) return a.p.real() > b.p.real();
            return a.p.imag() < b.p.imag();
        });
    }
};

inline MellinAsymptoticType mellin_type_of(const MeromorphicSymbol& f)
{
    MellinAsymptoticType out;
    out.strip_lo = f.strip_lo;
    out.strip_hi = f.strip_hi;
    for (const auto& b : f.poles) out.pairs.push_back(AsymPair{b.p, b.log_order()});
    out.normalize();
    return out;
}

} // namespace conecalc
