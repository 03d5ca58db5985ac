#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <vector>

#include "conecalc/errors.hpp"

namespace conecalc {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// The cross-section of the model cone: a single point (n = 0) or the unit
/// circle truncated to Fourier modes k = -N..N (n = 1). All operator data on
/// the circle lives on the 2N+1 dimensional mode space.
struct BaseModel {
    enum class Kind { Point, Circle };

    Kind kind = Kind::Point;
    int N = 0; // Fourier truncation, circle only

    static BaseModel point() { return BaseModel{Kind::Point, 0}; }
    static BaseModel circle(int N)
    {
        if (N < 0) throw InvalidArgument("circle truncation N must be >= 0");
        return BaseModel{Kind::Circle, N};
    }

    int dim() const { return kind == Kind::Point ? 1 : 2 * N + 1; }
    int cone_dim() const { return kind == Kind::Point ? 0 : 1; } // n = dim X

    /// Fourier mode of matrix row/column `i` (0 for the point).
    int mode(int i) const { return kind == Kind::Point ? 0 : i - N; }
    int index_of_mode(int k) const { return kind == Kind::Point ? 0 : k + N; }

    bool operator==(const BaseModel& o) const { return kind == o.kind && N == o.N; }
    bool operator!=(const BaseModel& o) const { return !(*this == o); }
};

inline void require_same_base(const BaseModel& a, const BaseModel& b, const char* where)
{
    if (a != b) throw BaseMismatch(std::string(where) + ": base models differ");
}

/// One term c(x) (d/dx)^m of a differential operator on S^1, with the
/// trigonometric polynomial c(x) = sum_q coeff[q] e^{iqx}.
struct TrigTerm {
    int deriv_order = 0;
    std::map<int, std::complex<double>> trig; // frequency -> coefficient
};

/// Differential operator on the base model with trigonometric-polynomial
/// coefficients. For the point base only a constant multiple is allowed; the
/// symbolic structure is kept so that principal symbols can be evaluated
/// exactly.
struct BaseOperator {
    std::vector<TrigTerm> terms;

    static BaseOperator constant(std::complex<double> c)
    {
        BaseOperator op;
        op.terms.push_back(TrigTerm{0, {{0, c}}});
        return op;
    }

    static BaseOperator zero() { return BaseOperator{}; }

    bool is_zero() const
    {
        for (const auto& t : terms)
            for (const auto& [q, c] : t.trig)
                if (std::abs(c) != 0.0) return false;
        return true;
    }

    int deriv_order() const
    {
        int d = 0;
        for (const auto& t : terms)
            if (!t.trig.empty()) d = std::max(d, t.deriv_order);
        return d;
    }

    int trig_degree() const
    {
        int d = 0;
        for (const auto& t : terms)
            for (const auto& [q, c] : t.trig)
                if (std::abs(c) != 0.0) d = std::max(d, std::abs(q));
        return d;
    }

    /// Assemble the matrix on the mode space of `base`. Acting on e^{ikx},
    /// (d/dx)^m gives (ik)^m and e^{iqx}-multiplication shifts k -> k+q;
    /// shifts leaving the truncation are rejected rather than aliased.
    Matrix assemble(const BaseModel& base) const
    {
        const int d = base.dim();
        Matrix A = Matrix::Zero(d, d);
        for (const auto& t : terms) {
            for (const auto& [q, c] : t.trig) {
                if (std::abs(c) == 0.0) continue;
                if (base.kind == BaseModel::Kind::Point) {
                    if (t.deriv_order != 0 || q != 0)
                        throw InvalidArgument("point base admits only constant coefficients");
                    A(0, 0) += c;
                    continue;
                }
                if (std::abs(q) > base.N)
                    throw InvalidArgument("trig degree exceeds circle truncation N");
                for (int col = 0; col < d; ++col) {
                    const int k = base.mode(col);
                    const int kq = k + q;
                    if (kq < -base.N || kq > base.N) continue; // target mode truncated away
                    const std::complex<double> ik(0.0, static_cast<double>(k));
                    A(base.index_of_mode(kq), col) += c * std::pow(ik, t.deriv_order);
                }
            }
        }
        return A;
    }

    /// Value of the order-`order` homogeneous symbol at base point x and
    /// covariable xi: sum over terms with deriv_order == order of
    /// c(x) (i xi)^order.
    std::complex<double> principal(double x, double xi, int order) const
    {
        std::complex<double> s(0.0, 0.0);
        for (const auto& t : terms) {
            if (t.deriv_order != order) continue;
            std::complex<double> cx(0.0, 0.0);
            for (const auto& [q, c] : t.trig)
                cx += c * std::exp(std::complex<double>(0.0, q * x));
            s += cx * std::pow(std::complex<double>(0.0, xi), order);
        }
        return s;
    }
};

} // namespace conecalc
