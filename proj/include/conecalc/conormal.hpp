#pragma once

#include <vector>

#include "conecalc/inversion.hpp"
#include "conecalc/symbol.hpp"

namespace conecalc {

/// Sequence of conormal symbols sigma_c^{mu - j}, j = 0..k. terms[0] is the
/// principal conormal symbol; depth k is the weight-interval depth for
/// Theta = (-(k+1), 0].
struct ConormalSequence {
    double mu = 0.0;
    std::vector<MeromorphicSymbol> terms;

    ConormalSequence() = default;
    ConormalSequence(double mu_, std::vector<MeromorphicSymbol> t) : mu(mu_), terms(std::move(t))
    {
        if (terms.empty()) throw InvalidArgument("ConormalSequence: needs at least one term");
    }

    int depth() const { return static_cast<int>(terms.size()) - 1; }
    const BaseModel& base() const { return terms.front().base; }

    static ConormalSequence identity(const BaseModel& b, int depth)
    {
        std::vector<MeromorphicSymbol> t;
        t.push_back(MeromorphicSymbol::identity(b));
        for (int j = 0; j < depth; ++j) t.push_back(MeromorphicSymbol::zero(b));
        return ConormalSequence(0.0, std::move(t));
    }
};

/// Mellin translation product: the conormal symbols of the composition,
///   sigma_c^{muA+muB-l}(AB)(z) = sum_{i+j=l} (T^{muB-i} sigma_c^{muA-j}(A))(z)
///                                 sigma_c^{muB-i}(B)(z),
/// computed exactly in the symbol algebra, to depth min(depth A, depth B).
inline ConormalSequence translation_product(const ConormalSequence& A, const ConormalSequence& B)
{
    require_same_base(A.base(), B.base(), "translation_product");
    const int k = std::min(A.depth(), B.depth());
    std::vector<MeromorphicSymbol> out;
    for (int l = 0; l <= k; ++l) {
        MeromorphicSymbol term = MeromorphicSymbol::zero(A.base());
        for (int i = 0; i <= l; ++i) {
            const int j = l - i;
            term = add(term, multiply(translate(A.terms[static_cast<std::size_t>(j)], B.mu - i),
                                      B.terms[static_cast<std::size_t>(i)]));
        }
        out.push_back(std::move(term));
    }
    return ConormalSequence(A.mu + B.mu, std::move(out));
}

struct ConormalInverseOptions {
    InversionOptions inversion;
};

/// Parametrix recursion for an order-zero sequence in 1+A form: inverts the
/// conormal symbols of 1+A through the Mellin translation product. The input
/// terms are (1 + f_0, f_1, ..., f_k); the output is the sequence of
/// sigma_c^{-i}(1+B), i.e. (1 + l_0, b_1, ..., b_k), with
/// translation_product(input, output) = identity sequence up to depth k.
/// `gamma` fixes the reference weight line Re z = (n+1)/2 - gamma on which
/// 1 + f_0 must be bijective.
inline ConormalSequence invert_conormal_sequence(const ConormalSequence& A, double gamma,
                                                 const ConormalInverseOptions& opt = {})
{
    if (A.mu != 0.0)
        throw InvalidArgument("invert_conormal_sequence: sequence must have order 0");
    const BaseModel& base = A.base();
    const double beta = 0.5 * (base.cone_dim() + 1) - gamma;

    const MeromorphicSymbol f0 = subtract(A.terms[0], MeromorphicSymbol::identity(base));
    EllipticInverse level0;
    try {
        level0 = invert_one_plus(f0, beta, opt.inversion);
    } catch (const NotInvertibleOnLine& e) {
        throw ConormalNotBijective(std::string("invert_conormal_sequence: ") + e.what());
    }
    const MeromorphicSymbol one_plus_l = add(MeromorphicSymbol::identity(base), level0.symbol);

    std::vector<MeromorphicSymbol> B;
    B.push_back(one_plus_l);
    for (int l = 1; l <= A.depth(); ++l) {
        // sum over i + j = l with i < l of (T^{-i} sigma_c^{-j}(1+A)) sigma_c^{-i}(1+B)
        MeromorphicSymbol acc = MeromorphicSymbol::zero(base);
        for (int i = 0; i < l; ++i) {
            const int j = l - i;
            acc = add(acc, multiply(translate(A.terms[static_cast<std::size_t>(j)],
                                              static_cast<double>(-i)),
                                    B[static_cast<std::size_t>(i)]));
        }
        // solve (T^{-l}(1+f0)) sigma_c^{-l}(1+B) = -acc
        MeromorphicSymbol term =
            multiply(translate(one_plus_l, static_cast<double>(-l)), scaled(acc, Complex(-1.0)));
        term.order = kSmoothingOrder;
        B.push_back(std::move(term));
    }
    return ConormalSequence(0.0, std::move(B));
}

} // namespace conecalc
