#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "conecalc/errors.hpp"
#include "conecalc/symbol.hpp"

namespace conecalc {

using MatrixFn = std::function<Matrix(Complex)>;

struct ContourOptions {
    int edge_nodes = 256;   // initial nodes per rectangle edge
    int max_refine = 5;     // doublings of the edge sampling
    int max_depth = 12;     // rectangle subdivision depth
    int circle_nodes = 512; // trapezoid nodes for circle quadratures
    double log_drop = 30.0; // per-step dip of log|det| that flags a zero on the contour
};

/// Zero of det f at z with two multiplicity notions: `multiplicity` is the
/// pole order of f(z)^{-1} there (the count that drives log terms in
/// asymptotics), `det_multiplicity` the argument-principle count of det f.
/// Both agree for scalar f.
struct ZeroLocation {
    Complex z;
    int multiplicity = 1;
    int det_multiplicity = 1;
};

namespace contour_detail {

/// log det by in-place elimination with partial pivoting, as
/// log|det| + i arg(det); avoids over/underflow of the plain determinant on
/// larger mode spaces (and the allocation overhead of a full LU object).
inline Complex log_det(Matrix m)
{
    const int n = static_cast<int>(m.rows());
    if (n == 1) {
        const Complex v = m(0, 0);
        return {std::log(std::abs(v)), std::arg(v)};
    }
    double lm = 0.0, ph = 0.0;
    int swaps = 0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        double best = std::norm(m(c, c));
        for (int r = c + 1; r < n; ++r) {
            const double v = std::norm(m(r, c));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (piv != c) {
            m.row(c).tail(n - c).swap(m.row(piv).tail(n - c));
            ++swaps;
        }
        const Complex d = m(c, c);
        if (d == Complex(0.0, 0.0)) return {-std::numeric_limits<double>::infinity(), 0.0};
        lm += 0.5 * std::log(std::norm(d));
        ph += std::arg(d);
        if (c + 1 < n) {
            const Complex inv = 1.0 / d;
            for (int r = c + 1; r < n; ++r) {
                const Complex factor = m(r, c) * inv;
                if (factor != Complex(0.0, 0.0))
                    m.row(r).tail(n - c - 1) -= factor * m.row(c).tail(n - c - 1);
            }
        }
    }
    if (swaps % 2 != 0) ph += 3.14159265358979323846;
    return {lm, ph};
}

inline double wrap_angle(double a)
{
    const double pi = 3.14159265358979323846;
    while (a > pi) a -= 2.0 * pi;
    while (a < -pi) a += 2.0 * pi;
    return a;
}

struct Rect {
    double re_lo, re_hi, im_lo, im_hi;
    double width() const { return re_hi - re_lo; }
    double height() const { return im_hi - im_lo; }
    Complex center() const { return {0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi)}; }
    double radius() const { return 0.5 * std::hypot(width(), height()); }
    bool contains(Complex z, double tol) const
    {
        return z.real() >= re_lo - tol && z.real() <= re_hi + tol && z.imag() >= im_lo - tol &&
               z.imag() <= im_hi + tol;
    }
};

struct WindingData {
    int winding = 0;
    Complex first_moment{0.0, 0.0}; // sum of enclosed zeros, with multiplicity
};

/// Phase-tracking traversal of the rectangle boundary. Along the way it
/// accumulates both the winding of det f and the boundary estimate of the
/// first zero moment (2 pi i)^{-1} oint z d(log det f). The sampling doubles
/// until every step turns by less than ~pi/2; nullopt when a zero (nearly)
/// sits on the contour.
inline std::optional<WindingData> winding_number(const MatrixFn& f, const Rect& rc,
                                                 const ContourOptions& opt)
{
    auto corner = [&rc](int c) -> Complex {
        switch (c & 3) {
        case 0: return {rc.re_lo, rc.im_lo};
        case 1: return {rc.re_hi, rc.im_lo};
        case 2: return {rc.re_hi, rc.im_hi};
        default: return {rc.re_lo, rc.im_hi};
        }
    };

    int nodes = opt.edge_nodes;
    double prev_fail_at = -1.0; // arclength fraction of the last bad step
    for (int attempt = 0; attempt <= opt.max_refine; ++attempt, nodes *= 2) {
        double total = 0.0;
        Complex moment(0.0, 0.0);
        bool ok = true;
        double fail_at = -1.0;
        Complex zprev = corner(0);
        Complex prev = log_det(f(zprev));
        if (!std::isfinite(prev.real())) return std::nullopt;
        for (int edge = 0; edge < 4 && ok; ++edge) {
            const Complex a = corner(edge), b = corner(edge + 1);
            for (int i = 1; i <= nodes && ok; ++i) {
                const Complex z = a + (b - a) * (static_cast<double>(i) / nodes);
                const Complex cur = log_det(f(z));
                const double dphi = wrap_angle(cur.imag() - prev.imag());
                if (!std::isfinite(cur.real()) ||
                    std::abs(cur.real() - prev.real()) > opt.log_drop || std::abs(dphi) > 1.6) {
                    ok = false;
                    fail_at = (edge + static_cast<double>(i) / nodes) / 4.0;
                    break;
                }
                total += dphi;
                const Complex dlog(cur.real() - prev.real(), dphi);
                moment += 0.5 * (z + zprev) * dlog;
                prev = cur;
                zprev = z;
            }
        }
        if (ok) {
            const double w = total / (2.0 * 3.14159265358979323846);
            const long rounded = std::lround(w);
            if (std::abs(w - rounded) < 0.25)
                return WindingData{static_cast<int>(rounded),
                                   moment / Complex(0.0, 2.0 * 3.14159265358979323846)};
        }
        // a bad step that stays put under refinement is a zero on the
        // contour; refining further cannot cure it
        if (fail_at >= 0.0 && prev_fail_at >= 0.0 &&
            std::abs(fail_at - prev_fail_at) < 4.0 / nodes)
            return std::nullopt;
        prev_fail_at = fail_at;
    }
    return std::nullopt;
}

/// Newton polishing adapted to multiplicity m, using the logarithmic
/// derivative of det f; keeps the best iterate seen.
inline Complex polish_root(const MatrixFn& f, Complex z0, int m, double len_scale)
{
    auto logmag = [&f](Complex z) { return log_det(f(z)).real(); };
    Complex best = z0, z = z0;
    double best_mag = logmag(z0);
    double step_scale = 1e-7 * std::max(len_scale, std::abs(z0));
    for (int it = 0; it < 64; ++it) {
        // difference step tied to the distance still to cover, so the
        // logarithmic derivative stays accurate down to machine precision
        const double h = std::clamp(0.01 * step_scale, 5e-14 * std::max(1.0, std::abs(z)),
                                    1e-7 * std::max(1.0, std::abs(z)) + 1e-9 * len_scale);
        const Complex Lp = log_det(f(z + h));
        const Complex Lm = log_det(f(z - h));
        const Complex dlog((Lp.real() - Lm.real()) / (2.0 * h),
                           wrap_angle(Lp.imag() - Lm.imag()) / (2.0 * h));
        if (!(std::abs(dlog) > 0.0) || !std::isfinite(std::abs(dlog))) break;
        const Complex step = static_cast<double>(m) / dlog;
        z -= step;
        step_scale = std::abs(step);
        const double mag = logmag(z);
        if (std::isfinite(mag) && mag < best_mag) {
            best_mag = mag;
            best = z;
        }
        if (step_scale < 2e-16 * std::max(1.0, std::abs(z))) break;
    }
    return best;
}

} // namespace contour_detail

/// Laurent coefficients c_k = (2 pi i)^{-1} oint f(z) (z-p)^k dz, k = 0..m,
/// by the trapezoid rule on |z-p| = radius (exponentially convergent). A
/// two-radius consistency pre-check detects a second singularity in the disk.
inline LaurentBlock laurent_extract(const MatrixFn& f, Complex p, int m, double radius,
                                    const ContourOptions& opt = ContourOptions())
{
    if (!(radius > 0.0)) throw InvalidArgument("laurent_extract: radius must be positive");
    if (m < 0) throw InvalidArgument("laurent_extract: m must be nonnegative");
    const int n = opt.circle_nodes;
    const double two_pi = 2.0 * 3.14159265358979323846;

    auto coeffs_at = [&](double rho) {
        std::vector<Matrix> samples;
        samples.reserve(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            const double th = two_pi * j / n;
            samples.push_back(f(p + rho * std::exp(Complex(0.0, th))));
        }
        std::vector<Matrix> cs;
        for (int k = 0; k <= m; ++k) {
            Matrix acc = Matrix::Zero(samples[0].rows(), samples[0].cols());
            for (int j = 0; j < n; ++j) {
                const double th = two_pi * j / n;
                acc += samples[static_cast<std::size_t>(j)] *
                       (std::pow(rho, k + 1) * std::exp(Complex(0.0, (k + 1) * th)));
            }
            cs.push_back(acc / static_cast<double>(n));
        }
        return cs;
    };

    const auto c1 = coeffs_at(radius);
    const auto c2 = coeffs_at(0.5 * radius);
    double scale = 1e-300;
    for (const auto& c : c1) scale = std::max(scale, c.cwiseAbs().maxCoeff());
    for (int k = 0; k <= m; ++k) {
        const double diff = (c1[static_cast<std::size_t>(k)] - c2[static_cast<std::size_t>(k)])
                                .cwiseAbs()
                                .maxCoeff();
        if (diff > 1e-8 * std::max(scale, 1e-30))
            throw ContaminatedDisk("laurent_extract: coefficients not radius-stable; "
                                   "another singularity inside |z-p| = " +
                                   std::to_string(radius));
    }

    LaurentBlock out;
    out.p = p;
    out.coeffs = c1;
    return out;
}

/// All zeros of det f in [re_lo, re_hi] x [-im_half, im_half] with
/// multiplicities. Rectangles are subdivided until each isolates one zero
/// location (confirmed by re-counting the winding on a small box) or the
/// depth limit declares a cluster. See ZeroLocation for the multiplicity
/// convention.
inline std::vector<ZeroLocation> locate_singularities(const MatrixFn& f, double re_lo,
                                                      double re_hi, double im_half = 16.0,
                                                      const ContourOptions& opt = ContourOptions())
{
    using namespace contour_detail;
    if (!(re_lo < re_hi) || !(im_half > 0.0))
        throw InvalidArgument("locate_singularities: empty search rectangle");

    const int dim = static_cast<int>(f(Complex(re_lo, 0.0)).rows());

    struct Cell {
        Rect rc;
        WindingData wd;
        int depth;
    };

    // winding with a few outward jitters when the contour runs through a zero
    auto safe_winding = [&](Rect rc, int depth) -> std::pair<Rect, WindingData> {
        const double jr = 0.0071 * rc.width() + 1e-9, ji = 0.0071 * rc.height() + 1e-9;
        for (int attempt = 0; attempt < 7; ++attempt) {
            const auto w = winding_number(f, rc, opt);
            if (w) return {rc, *w};
            rc.re_lo -= jr;
            rc.re_hi += 0.61803398875 * jr;
            rc.im_lo -= ji;
            rc.im_hi += 0.61803398875 * ji;
        }
        throw ContourThroughZero(
            "locate_singularities: cannot separate a zero from the contour at depth " +
            std::to_string(depth));
    };

    auto box_winding = [&](Complex c, double r) -> std::optional<int> {
        const auto w = winding_number(f, Rect{c.real() - r, c.real() + r, c.imag() - r,
                                              c.imag() + r},
                                      opt);
        if (w) return w->winding;
        return std::nullopt;
    };

    const Rect domain{re_lo, re_hi, -im_half, im_half};
    std::vector<Cell> work;
    {
        auto [rc, wd] = safe_winding(domain, 0);
        if (wd.winding < 0)
            throw InvalidArgument(
                "locate_singularities: negative winding; f has poles in the rectangle");
        if (wd.winding > 0) work.push_back(Cell{rc, wd, 0});
    }

    struct Candidate {
        Complex z;
        int det_mult;
    };
    std::vector<Candidate> found;

    while (!work.empty()) {
        Cell cell = work.back();
        work.pop_back();
        const Rect& rc = cell.rc;
        const int w = cell.wd.winding;

        // Try to read the cell as a single location: seed at the moment
        // centroid, polish, and confirm by a winding count on a small box.
        // A box count larger than the cell winding is fine: the location is
        // still exact, the cell just sees part of the multiplicity (zero on
        // a shared cut); the final per-zero recount repairs the count.
        {
            Complex seed = cell.wd.first_moment / static_cast<double>(w);
            if (rc.contains(seed, 0.5 * rc.radius())) {
                const Complex z = polish_root(f, seed, w, std::max(rc.width(), 1e-9));
                const double r_small = 1e-7 * std::max(1.0, std::abs(z)) + 1e-10;
                if (rc.contains(z, 1e-6)) {
                    if (const auto bw = box_winding(z, r_small); bw && *bw >= w) {
                        found.push_back(Candidate{z, w});
                        continue;
                    }
                }
            }
        }

        if (cell.depth >= opt.max_depth) {
            // declared cluster: polish the centroid with the full count
            const Complex seed = cell.wd.first_moment / static_cast<double>(w);
            const Complex z = polish_root(f, seed, w, std::max(rc.width(), 1e-9));
            found.push_back(Candidate{rc.contains(z, 0.1 * rc.radius() + 1e-6) ? z : seed, w});
            continue;
        }

        const bool split_re = rc.width() >= rc.height();
        bool split_done = false;
        for (double frac : {0.5 + 0.013 * ((cell.depth % 3) - 1), 0.437, 0.569}) {
            Rect a = rc, b = rc;
            if (split_re) {
                const double cut = rc.re_lo + frac * rc.width();
                a.re_hi = cut;
                b.re_lo = cut;
            } else {
                const double cut = rc.im_lo + frac * rc.height();
                a.im_hi = cut;
                b.im_lo = cut;
            }
            int got = 0;
            bool fine = true;
            std::vector<Cell> subs;
            for (Rect sub : {a, b}) {
                try {
                    auto [rc2, wd] = safe_winding(sub, cell.depth + 1);
                    if (wd.winding > 0) subs.push_back(Cell{rc2, wd, cell.depth + 1});
                    got += std::max(wd.winding, 0);
                } catch (const ContourThroughZero&) {
                    fine = false;
                    break;
                }
            }
            if (fine && got == w) {
                for (const auto& s : subs) work.push_back(s);
                split_done = true;
                break;
            }
        }
        if (!split_done)
            work.push_back(Cell{rc, cell.wd, opt.max_depth}); // give up splitting, declare cluster
    }

    // merge near-coincident candidates (a zero on a shared cut appears once
    // per neighbour, with the windings split between them)
    std::vector<ZeroLocation> merged;
    for (const auto& c : found) {
        bool absorbed = false;
        for (auto& m : merged) {
            if (std::abs(m.z - c.z) <= 1e-7 * std::max(1.0, std::abs(c.z))) {
                m.det_multiplicity += c.det_mult;
                absorbed = true;
                break;
            }
        }
        if (!absorbed) merged.push_back(ZeroLocation{c.z, c.det_mult, c.det_mult});
    }

    // authoritative per-zero recount on its own box
    for (std::size_t i = 0; i < merged.size(); ++i) {
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < merged.size(); ++j)
            if (j != i) gap = std::min(gap, std::abs(merged[i].z - merged[j].z));
        const double r = std::min({0.35 * gap, 0.3, 0.1 + 0.1 * std::abs(merged[i].z)});
        if (const auto w = box_winding(merged[i].z, r); w && *w > 0) {
            merged[i].det_multiplicity = *w;
            merged[i].multiplicity = *w;
        } else {
            merged[i].multiplicity = merged[i].det_multiplicity;
        }
    }

    // pole order of f^{-1} refines the multiplicity for matrix-valued f
    if (dim > 1) {
        MatrixFn inv = [&f](Complex z) -> Matrix {
            const Matrix m = f(z);
            return m.partialPivLu().solve(Matrix::Identity(m.rows(), m.cols()));
        };
        for (std::size_t i = 0; i < merged.size(); ++i) {
            double gap = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < merged.size(); ++j)
                if (j != i) gap = std::min(gap, std::abs(merged[i].z - merged[j].z));
            double rad = std::min({0.35 * gap, 0.25});
            for (int attempt = 0; attempt < 3 && rad > 1e-9; ++attempt, rad *= 0.5) {
                try {
                    LaurentBlock blk =
                        laurent_extract(inv, merged[i].z, merged[i].det_multiplicity - 1, rad, opt);
                    double scale = 1e-300;
                    for (const auto& cm : blk.coeffs)
                        scale = std::max(scale, cm.cwiseAbs().maxCoeff());
                    int order = 0;
                    for (int k = 0; k < static_cast<int>(blk.coeffs.size()); ++k)
                        if (blk.coeffs[static_cast<std::size_t>(k)].cwiseAbs().maxCoeff() >
                            1e-8 * scale)
                            order = k + 1;
                    if (order > 0) merged[i].multiplicity = order;
                    break;
                } catch (const ContaminatedDisk&) {
                    continue;
                }
            }
        }
    }

    std::vector<ZeroLocation> inside;
    for (const auto& z : merged)
        if (domain.contains(z.z, 1e-9)) inside.push_back(z);
    std::sort(inside.begin(), inside.end(), [](const ZeroLocation& a, const ZeroLocation& b) {
        if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
        return a.z.imag() < b.z.imag();
    });
    return inside;
}

} // namespace conecalc
