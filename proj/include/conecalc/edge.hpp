#pragma once

#include <functional>
#include <vector>

#include "conecalc/parallel.hpp"
#include "conecalc/solver.hpp"
#include "conecalc/spaces.hpp"

namespace conecalc {

/// Periodic window for the edge variable y (q = 1): Q nodes on a torus of
/// period L. Functions are assumed supported well inside the window.
struct EdgeGrid {
    double L = 2.0 * 3.14159265358979323846;
    int Q = 256;

    EdgeGrid() = default;
    EdgeGrid(double L_, int Q_) : L(L_), Q(Q_)
    {
        if (!(L > 0.0)) throw InvalidArgument("EdgeGrid: period must be positive");
        if (Q < 8 || !fft_detail::is_power_of_two(static_cast<std::size_t>(Q)))
            throw InvalidArgument("EdgeGrid: Q must be a power of two, Q >= 8");
    }

    double y(int j) const { return -0.5 * L + j * (L / Q); }
    double eta(int m) const
    {
        return 2.0 * 3.14159265358979323846 * static_cast<double>(signed_bin(m, Q)) / L;
    }
    double step() const { return L / Q; }
};

/// Samples of an edge function u(y) with values in the weighted cone space
/// of the fiber: rows = y nodes, columns = (radial node, base mode) pairs.
/// `action_g` is the exponent g of the group action kappa^g on the fiber;
/// `fiber_spec` fixes the fiber norm used in W^s norms.
struct EdgeGridFunction {
    EdgeGrid ygrid;
    RadialGrid rgrid;
    BaseModel base;
    double action_g = 0.0;      // exponent g of kappa^g on the fiber
    bool trivial_action = false; // kappa = id (plain H^s(R^q, H) norms)
    NormSpec fiber_spec; // H = K^{s,gamma;g} with these parameters
    Eigen::MatrixXcd values; // Q x (M * dim)

    EdgeGridFunction() = default;
    EdgeGridFunction(EdgeGrid yg, RadialGrid rg, BaseModel b)
        : ygrid(yg), rgrid(rg), base(b),
          values(Eigen::MatrixXcd::Zero(yg.Q, static_cast<Eigen::Index>(rg.M) * b.dim()))
    {
    }

    int fiber_size() const { return rgrid.M * base.dim(); }

    WeightedGridFunction fiber(int row) const
    {
        WeightedGridFunction f(rgrid, base, fiber_spec.gamma);
        for (int i = 0; i < rgrid.M; ++i)
            for (int m = 0; m < base.dim(); ++m)
                f.values(i, m) = values(row, static_cast<Eigen::Index>(i) * base.dim() + m);
        return f;
    }

    void set_fiber(int row, const WeightedGridFunction& f)
    {
        for (int i = 0; i < rgrid.M; ++i)
            for (int m = 0; m < base.dim(); ++m)
                values(row, static_cast<Eigen::Index>(i) * base.dim() + m) = f.values(i, m);
    }
};

namespace edge_detail {

/// DFT along y for every fiber entry; sign -1 gives hat u(eta_m) up to the
/// L/Q measure factor, +1 the unnormalised inverse.
inline Eigen::MatrixXcd y_dft(const Eigen::MatrixXcd& vals, int sign)
{
    Eigen::MatrixXcd out = vals;
    std::vector<Complex> buf(static_cast<std::size_t>(vals.rows()));
    for (Eigen::Index c = 0; c < vals.cols(); ++c) {
        for (Eigen::Index r = 0; r < vals.rows(); ++r) buf[static_cast<std::size_t>(r)] = vals(r, c);
        fft_detail::radix2(buf.data(), buf.size(), sign);
        for (Eigen::Index r = 0; r < vals.rows(); ++r) out(r, c) = buf[static_cast<std::size_t>(r)];
    }
    return out;
}

// The y window is centred: the DFT sees samples starting at y = -L/2, so
// bin m picks up a phase e^{+i eta_m L/2} relative to the continuous
// transform. It cancels in norms and in forward/backward pairs, and is
// carried explicitly where single bins matter.
inline Complex binphase(const EdgeGrid& g, int m)
{
    return std::exp(Complex(0.0, g.eta(m) * 0.5 * g.L));
}

inline double angle_bracket(double eta) { return std::sqrt(1.0 + eta * eta); }

inline double fiber_norm(const WeightedGridFunction& f, const NormSpec& spec)
{
    if (spec.s == 0.0 && spec.gamma == 0.0 && spec.g == 0.0) return scpr_norm(f);
    return ksg_norm(f, spec);
}

} // namespace edge_detail

/// W^s norm: { (2 pi)^{-1} integral <eta>^{2s} || kappa_{<eta>}^{-1}
/// hat u(eta) ||_H^2 d eta }^{1/2} in the discrete Fourier realisation.
inline double ws_norm(const EdgeGridFunction& u, double s)
{
    const EdgeGrid& yg = u.ygrid;
    Eigen::MatrixXcd hat = edge_detail::y_dft(u.values, -1);
    hat *= yg.step(); // continuous-transform normalisation

    std::vector<double> contrib(static_cast<std::size_t>(yg.Q), 0.0);
    parallel_for(yg.Q, [&](int m) {
        const double lam = edge_detail::angle_bracket(yg.eta(m));
        WeightedGridFunction fib(u.rgrid, u.base, u.fiber_spec.gamma);
        for (int i = 0; i < u.rgrid.M; ++i)
            for (int md = 0; md < u.base.dim(); ++md)
                fib.values(i, md) = hat(m, static_cast<Eigen::Index>(i) * u.base.dim() + md);
        const WeightedGridFunction back =
            u.trivial_action ? fib : dilate(fib, 1.0 / lam, u.action_g);
        const double fn = edge_detail::fiber_norm(back, u.fiber_spec);
        contrib[static_cast<std::size_t>(m)] = std::pow(lam * lam, s) * fn * fn;
    });
    double acc = 0.0;
    for (double c : contrib) acc += c;
    return std::sqrt(acc / yg.L);
}

/// K = F^{-1} kappa_{<eta>} F (sign = +1) and its inverse (sign = -1).
inline EdgeGridFunction edge_k_transform(const EdgeGridFunction& u, int sign)
{
    EdgeGridFunction out = u;
    Eigen::MatrixXcd hat = edge_detail::y_dft(u.values, -1);
    for (int m = 0; m < u.ygrid.Q; ++m) {
        const double lam = edge_detail::angle_bracket(u.ygrid.eta(m));
        WeightedGridFunction fib(u.rgrid, u.base, u.fiber_spec.gamma);
        for (int i = 0; i < u.rgrid.M; ++i)
            for (int md = 0; md < u.base.dim(); ++md)
                fib.values(i, md) = hat(m, static_cast<Eigen::Index>(i) * u.base.dim() + md);
        const WeightedGridFunction mapped =
            dilate(fib, sign > 0 ? lam : 1.0 / lam, u.action_g);
        for (int i = 0; i < u.rgrid.M; ++i)
            for (int md = 0; md < u.base.dim(); ++md)
                hat(m, static_cast<Eigen::Index>(i) * u.base.dim() + md) = mapped.values(i, md);
    }
    out.values = edge_detail::y_dft(hat, +1);
    out.values /= static_cast<double>(u.ygrid.Q);
    return out;
}

/// Plain H^s norm of the edge function (trivial group action), for the
/// K-isomorphism identity ws_norm(u) = hs_norm(K^{-1} u).
inline double edge_hs_norm(const EdgeGridFunction& u, double s)
{
    EdgeGridFunction tmp = u;
    tmp.trivial_action = true;
    return ws_norm(tmp, s);
}

/// Spectral derivative D_y = -i d/dy.
inline EdgeGridFunction edge_dy(const EdgeGridFunction& u)
{
    EdgeGridFunction out = u;
    Eigen::MatrixXcd hat = edge_detail::y_dft(u.values, -1);
    for (int m = 0; m < u.ygrid.Q; ++m) hat.row(m) *= u.ygrid.eta(m);
    out.values = edge_detail::y_dft(hat, +1);
    out.values /= static_cast<double>(u.ygrid.Q);
    return out;
}

/// Singular functions of edge asymptotics:
///   u = F^{-1}_{eta->y} [eta]^{(n+1)/2} omega(r [eta]) bhat(x, eta)
///        (r [eta])^{-p} log^l (r [eta]),
/// with b given by samples on (y, base modes).
inline EdgeGridFunction synth_singular(const EdgeGrid& yg, const RadialGrid& rg,
                                       const BaseModel& base, const Eigen::MatrixXcd& b,
                                       Complex p, int l, double gamma,
                                       const EtaBracket& bracket = EtaBracket::standard(),
                                       const Cutoff& omega = Cutoff())
{
    if (b.rows() != yg.Q || b.cols() != base.dim())
        throw InvalidArgument("synth_singular: b must be Q x dim(base)");
    const int n = base.cone_dim();

    EdgeGridFunction out(yg, rg, base);
    out.fiber_spec.gamma = gamma;
    Eigen::MatrixXcd bhat = edge_detail::y_dft(b, -1); // unnormalised

    Eigen::MatrixXcd hat = Eigen::MatrixXcd::Zero(yg.Q, out.fiber_size());
    for (int m = 0; m < yg.Q; ++m) {
        const double br = bracket(yg.eta(m));
        const double amp = std::pow(br, 0.5 * (n + 1));
        for (int i = 0; i < rg.M; ++i) {
            const double rb = rg.r(i) * br;
            const double w = omega(rb);
            if (w == 0.0) continue;
            const double lt = std::log(rb);
            const Complex profile = amp * w * std::exp(-p * lt) * std::pow(lt, l);
            for (int md = 0; md < base.dim(); ++md)
                hat(m, static_cast<Eigen::Index>(i) * base.dim() + md) =
                    profile * bhat(m, md);
        }
    }
    out.values = edge_detail::y_dft(hat, +1);
    out.values /= static_cast<double>(yg.Q);
    return out;
}

/// Operator-valued symbol a(y, eta) acting on fiber functions, with its
/// twisted-homogeneity order. `kind` records the construction.
struct OperatorValuedSymbol {
    enum class Kind { Potential, SmoothingMellin, PrincipalEdge, Multiplication };

    double order = 0.0;
    Kind kind = Kind::Multiplication;
    double action_g = 0.0;            // kappa exponent on both sides
    bool trivial_input_action = false; // input space carries kappa = id (potential symbols)
    std::function<WeightedGridFunction(double, double, const WeightedGridFunction&)> apply;
};

/// Multiplication symbol u -> phi(r [eta]) u (Example of order 0).
inline OperatorValuedSymbol multiplication_symbol(std::function<double(double)> phi,
                                                  const EtaBracket& bracket = EtaBracket::standard())
{
    OperatorValuedSymbol a;
    a.order = 0.0;
    a.kind = OperatorValuedSymbol::Kind::Multiplication;
    a.apply = [phi = std::move(phi), bracket](double, double eta,
                                              const WeightedGridFunction& u) {
        WeightedGridFunction out = u;
        const double br = bracket(eta);
        for (int i = 0; i < u.grid.M; ++i) out.values.row(i) *= phi(u.grid.r(i) * br);
        return out;
    };
    return a;
}

/// Potential symbol (order 0): c -> [eta]^{(n+1)/2} omega(r[eta]) b(x)
/// (r[eta])^{-p} log^l(r[eta]) c. The fiber input is ignored except for its
/// layout; the scalar c rides in as a multiplier.
inline OperatorValuedSymbol potential_symbol(const Vector& b, Complex p, int l,
                                             const EtaBracket& bracket = EtaBracket::standard(),
                                             const Cutoff& omega = Cutoff())
{
    OperatorValuedSymbol a;
    a.order = 0.0;
    a.kind = OperatorValuedSymbol::Kind::Potential;
    a.trivial_input_action = true;
    a.apply = [b, p, l, bracket, omega](double, double eta, const WeightedGridFunction& u) {
        WeightedGridFunction out(u.grid, u.base, u.gamma);
        const int n = u.cone_dim();
        const double br = bracket(eta);
        const double amp = std::pow(br, 0.5 * (n + 1));
        for (int i = 0; i < u.grid.M; ++i) {
            const double rb = u.grid.r(i) * br;
            const double w = omega(rb);
            if (w == 0.0) continue;
            const double lt = std::log(rb);
            out.values.row(i) = (amp * w * std::exp(-p * lt) * std::pow(lt, l)) * b.transpose();
        }
        return out;
    };
    return a;
}

/// One term of a smoothing Mellin edge symbol (q = 1):
///   u -> r^{-mu+j} omega(r[eta]) op_M^{gamma_ja - n/2}(f) eta^alpha
///        omega'(r[eta]) u,
/// of order mu - j + alpha. The weight condition gamma - j <= gamma_ja <=
/// gamma and the pole condition on the line are checked at construction.
inline OperatorValuedSymbol smoothing_mellin_symbol(
    const MeromorphicSymbol& f, double mu, int j, int alpha, double gamma, double gamma_ja,
    const EtaBracket& bracket = EtaBracket::standard(), const Cutoff& omega = Cutoff(),
    const Cutoff& omega_prime = Cutoff(0.6, 0.8),
    const NumericsConfig& cfg = NumericsConfig::defaults())
{
    if (j < 0 || alpha < 0 || alpha > j)
        throw InvalidArgument("smoothing_mellin_symbol: need 0 <= alpha <= j");
    if (!(gamma - j <= gamma_ja + 1e-12 && gamma_ja <= gamma + 1e-12))
        throw InadmissibleWeight("smoothing_mellin_symbol: gamma_ja outside [gamma-j, gamma]");
    const double beta = 0.5 * (f.base.cone_dim() + 1) - gamma_ja;
    if (f.pole_distance_to_line(beta) < cfg.pole_line_tol)
        throw PoleOnWeightLine("smoothing_mellin_symbol: pole of f on Re z = " +
                               std::to_string(beta));

    OperatorValuedSymbol a;
    a.order = mu - j + alpha;
    a.kind = OperatorValuedSymbol::Kind::SmoothingMellin;
    a.apply = [f, mu, j, alpha, gamma_ja, bracket, omega, omega_prime,
               cfg](double, double eta, const WeightedGridFunction& u) {
        const double br = bracket(eta);
        WeightedGridFunction cut = u;
        for (int i = 0; i < u.grid.M; ++i) cut.values.row(i) *= omega_prime(u.grid.r(i) * br);
        cut.values *= std::pow(eta, alpha);
        WeightedGridFunction mid = op_mellin(f, gamma_ja, cut, cfg);
        WeightedGridFunction out = mid;
        for (int i = 0; i < u.grid.M; ++i)
            out.values.row(i) *= std::pow(u.grid.r(i), j - mu) * omega(u.grid.r(i) * br);
        return out;
    };
    return a;
}

/// Homogeneous principal edge symbol of a constant-coefficient Fuchs
/// operator: sigma(eta) u = omega(r|eta|) A (omega'(r|eta|) u)
///                         + (1-omega(r|eta|)) A ((1-omega''(r|eta|)) u),
/// an order-mu family of cone operators (for differential A the Mellin and
/// Fourier quantisations agree exactly, so both terms act directly).
inline OperatorValuedSymbol principal_edge_symbol(const FuchsOperator& A,
                                                  const Cutoff& omega = Cutoff(),
                                                  const Cutoff& omega_prime = Cutoff(0.7, 0.9),
                                                  const Cutoff& omega_dblprime = Cutoff(0.3, 0.4))
{
    // omega'' < omega < omega' so that each factor is constant on the
    // support of its partner
    OperatorValuedSymbol a;
    a.order = static_cast<double>(A.mu);
    a.kind = OperatorValuedSymbol::Kind::PrincipalEdge;
    a.apply = [A, omega, omega_prime, omega_dblprime](double, double eta,
                                                      const WeightedGridFunction& u) {
        if (eta == 0.0)
            throw InvalidArgument("principal_edge_symbol: eta must be nonzero");
        const double ae = std::abs(eta);
        WeightedGridFunction near = u, far = u;
        for (int i = 0; i < u.grid.M; ++i) {
            near.values.row(i) *= omega_prime(u.grid.r(i) * ae);
            far.values.row(i) *= 1.0 - omega_dblprime(u.grid.r(i) * ae);
        }
        WeightedGridFunction a_near = apply_fuchs(A, near);
        WeightedGridFunction a_far = apply_fuchs(A, far);
        WeightedGridFunction out(u.grid, u.base, u.gamma);
        for (int i = 0; i < u.grid.M; ++i) {
            const double w = omega(u.grid.r(i) * ae);
            out.values.row(i) = w * a_near.values.row(i) + (1.0 - w) * a_far.values.row(i);
        }
        return out;
    };
    return a;
}

/// Largest relative deviation from twisted homogeneity,
///   a(y, lambda eta) v  vs  lambda^mu kappa_lambda a(y, eta) kappa_lambda^{-1} v,
/// over the given lambda/eta lattice and probe fibers; norms are the fiber
/// K^{0,0} norms.
inline double twisted_homogeneity_check(const OperatorValuedSymbol& a,
                                        const std::vector<double>& lambdas,
                                        const std::vector<double>& etas,
                                        const std::vector<WeightedGridFunction>& probes)
{
    double worst = 0.0;
    for (const auto& v : probes) {
        const double vn = scpr_norm(v);
        if (!(vn > 0.0)) continue;
        for (double eta : etas) {
            for (double lam : lambdas) {
                const WeightedGridFunction lhs = a.apply(0.0, lam * eta, v);
                const WeightedGridFunction inner = a.apply(
                    0.0, eta, a.trivial_input_action ? v : dilate(v, 1.0 / lam, a.action_g));
                WeightedGridFunction rhs = dilate(inner, lam, a.action_g);
                rhs.values *= std::pow(lam, a.order);
                WeightedGridFunction diff = lhs;
                diff.values -= rhs.values;
                worst = std::max(worst, scpr_norm(diff) / vn);
            }
        }
    }
    return worst;
}

} // namespace conecalc
