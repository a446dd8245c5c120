#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hypershift/core.hpp"
#include "hypershift/geometry.hpp"

/// Branch maps, truncated countable families, and the almost-everywhere map F.
///
/// A family is a finite list of C^2 branch maps f_i, each carrying its
/// full-height domain E_i, its full-width image strip S_i, an exact or
/// finite-difference two-jet, and an inverse defined on the strip. Countability
/// is handled by truncation at truncN together with an analytic tail model that
/// accounts for the widths of the branches that were cut off.
namespace hypershift {

/// Analytic description of the branch widths beyond the truncation index,
/// used by the geometric checks to bound what the cut tail contributes.
struct TailModel {
    bool present = false;
    std::string description;
    // sum of maximal branch widths over i > truncN
    std::function<double(int)> width_tail;
    // sum of width_max_i * (-log width_min_i) over i > truncN; may return inf
    std::function<double(int)> g3_tail;
};

struct BranchMap {
    int index = 0;
    FullHeightRect domain;
    FullWidthStrip strip;                    // image f_i(E_i)
    std::function<Jet2(Point)> eval;         // defined on the closed domain
    std::function<Point(Point)> inverse;     // defined on the strip
};

struct MapFamily {
    std::string name;
    std::vector<BranchMap> branches;         // branch i stored at branches[i-1]
    int truncN = 0;
    double alpha = 0.0;                      // cone half-slope, 0 < alpha < 1
    double K0 = 0.0;                         // expansion constant, > 1
    double C0 = 0.0;                         // distortion constant, > 0
    TailModel tail;
    bool analyticJets = true;
    bool orientationPreserving = true;       // F1x > 0 on every branch

    const BranchMap& branch(int i) const {
        if (i < 1 || i > truncN) throw std::invalid_argument("branch index out of range");
        return branches[static_cast<std::size_t>(i - 1)];
    }

    Jet2 jet(int i, const Point& z) const { return branch(i).eval(z); }

private:
    friend MapFamily finalize_family(MapFamily fam);
    std::vector<int> orderByLeft_;           // branch indices sorted by min left boundary

public:
    /// Branch whose domain interior contains z, if any. Boundary points and
    /// points beyond the truncated tail yield nullopt: the map is defined
    /// only on interiors and the complement has measure zero.
    std::optional<int> locate(const Point& z) const {
        if (!in_unit_square(z)) return std::nullopt;
        // branches are totally ordered left to right; binary search by the
        // minimum of the left boundary, then test the two candidates spanning z
        auto it = std::upper_bound(orderByLeft_.begin(), orderByLeft_.end(), z.x,
                                   [this](double x, int idx) {
                                       return x < branches[static_cast<std::size_t>(idx)].domain.left.min_value();
                                   });
        for (int step = 0; step < 2 && it != orderByLeft_.begin(); ++step) {
            --it;
            const auto& b = branches[static_cast<std::size_t>(*it)];
            if (b.domain.contains_interior(z)) return b.index;
        }
        return std::nullopt;
    }
};

inline MapFamily finalize_family(MapFamily fam) {
    fam.orderByLeft_.resize(fam.branches.size());
    for (std::size_t k = 0; k < fam.branches.size(); ++k) fam.orderByLeft_[k] = static_cast<int>(k);
    std::sort(fam.orderByLeft_.begin(), fam.orderByLeft_.end(), [&fam](int a, int b) {
        return fam.branches[static_cast<std::size_t>(a)].domain.left.min_value() <
               fam.branches[static_cast<std::size_t>(b)].domain.left.min_value();
    });
    for (const auto& b : fam.branches) {
        b.domain.validate(fam.alpha);
        b.strip.validate(fam.alpha);
    }
    return fam;
}

inline std::optional<int> locate_branch(const MapFamily& fam, const Point& z) {
    return fam.locate(z);
}

/// One step of F. nullopt marks escape: the orbit left the union of branch
/// interiors, either on a boundary or beyond the truncation index.
inline std::optional<Point> apply_F(const MapFamily& fam, const Point& z) {
    auto i = fam.locate(z);
    if (!i) return std::nullopt;
    return fam.branch(*i).eval(z).image();
}

/// Expansion factor along the unstable direction (1, a): |F1x + a F1y|.
inline double unstable_derivative(const Jet2& jet, double a) {
    const double d = std::abs(jet.f1x + a * jet.f1y);
    if (!(d > 0.0))
        throw hyperbolicity_error("unstable derivative vanished: |F1x + a F1y| <= 0");
    return d;
}

/// Image slope of the unstable direction: DF maps (1, a) to a vector whose
/// normalized second coordinate is (F2x/F1x + (F2y/F1x) a) / (1 + (F1y/F1x) a).
inline double slope_transport(const Jet2& jet, double a) {
    const double denom = 1.0 + (jet.f1y / jet.f1x) * a;
    if (std::abs(denom) < 1e-14)
        throw cone_error("slope transport: vanishing denominator, vector left the cone");
    return (jet.f2x / jet.f1x + (jet.f2y / jet.f1x) * a) / denom;
}

/// Central-difference two-jet for families supplied without analytic
/// derivatives. The point map must be evaluable in an h-neighborhood of z.
inline Jet2 synthesize_jet(const std::function<Point(Point)>& f, const Point& z, double h = 1e-5) {
    const Point c = f(z);
    const Point px = f({z.x + h, z.y}), mx = f({z.x - h, z.y});
    const Point py = f({z.x, z.y + h}), my = f({z.x, z.y - h});
    const Point pxpy = f({z.x + h, z.y + h}), pxmy = f({z.x + h, z.y - h});
    const Point mxpy = f({z.x - h, z.y + h}), mxmy = f({z.x - h, z.y - h});
    Jet2 j;
    j.f1 = c.x;
    j.f2 = c.y;
    j.f1x = (px.x - mx.x) / (2 * h);
    j.f1y = (py.x - my.x) / (2 * h);
    j.f2x = (px.y - mx.y) / (2 * h);
    j.f2y = (py.y - my.y) / (2 * h);
    j.f1xx = (px.x - 2 * c.x + mx.x) / (h * h);
    j.f1yy = (py.x - 2 * c.x + my.x) / (h * h);
    j.f2xx = (px.y - 2 * c.y + mx.y) / (h * h);
    j.f2yy = (py.y - 2 * c.y + my.y) / (h * h);
    j.f1xy = (pxpy.x - pxmy.x - mxpy.x + mxmy.x) / (4 * h * h);
    j.f2xy = (pxpy.y - pxmy.y - mxpy.y + mxmy.y) / (4 * h * h);
    return j;
}

namespace detail {

inline FullHeightRect straight_rect(int index, double left, double right, int samples = kDefaultGraphSamples) {
    FullHeightRect r;
    r.index = index;
    r.left = SampledGraph::constant(left, samples);
    r.right = SampledGraph::constant(right, samples);
    return r;
}

inline FullWidthStrip straight_strip(double bottom, double top, int samples = kDefaultGraphSamples) {
    FullWidthStrip s;
    s.bottom = SampledGraph::constant(bottom, samples);
    s.top = SampledGraph::constant(top, samples);
    return s;
}

inline TailModel dyadic_tail() {
    TailModel t;
    t.present = true;
    t.description = "dyadic: width_i = 2^-i, strip height 2^-(i+1)";
    t.width_tail = [](int n) { return std::ldexp(1.0, -n); };
    t.g3_tail = [](int n) { return std::log(2.0) * (n + 2) * std::ldexp(1.0, -n); };
    return t;
}

}  // namespace detail

/// Affine reference family. Branch i has domain x in [1-2^(1-i), 1-2^-i],
/// maps (x, y) to (2^i (x - l_i), c_i + 2^-(i+1) y) with c_i = 1/2 - 2^-i.
/// Domains tile the square up to the 2^-truncN tail; strips stack exactly.
inline MapFamily make_dyadic_family(int truncN) {
    if (truncN < 2) throw std::invalid_argument("make_dyadic_family: truncN must be >= 2");
    MapFamily fam;
    fam.name = "dyadic";
    fam.truncN = truncN;
    fam.alpha = 0.5;
    fam.K0 = 2.0;
    fam.C0 = 1.0;
    fam.tail = detail::dyadic_tail();
    fam.branches.reserve(static_cast<std::size_t>(truncN));
    for (int i = 1; i <= truncN; ++i) {
        const double l = 1.0 - std::ldexp(1.0, 1 - i);
        const double r = 1.0 - std::ldexp(1.0, -i);
        const double scale = std::ldexp(1.0, i);        // 2^i
        const double c = 0.5 - std::ldexp(1.0, -i);
        const double h = std::ldexp(1.0, -(i + 1));     // strip height
        BranchMap b;
        b.index = i;
        b.domain = detail::straight_rect(i, l, r);
        b.strip = detail::straight_strip(c, c + h);
        b.eval = [l, scale, c, h](Point z) {
            Jet2 j;
            j.f1 = scale * (z.x - l);
            j.f2 = c + h * z.y;
            j.f1x = scale;
            j.f2y = h;
            return j;
        };
        b.inverse = [l, scale, c, h](Point w) {
            return Point{l + w.x / scale, (w.y - c) / h};
        };
        fam.branches.push_back(std::move(b));
    }
    return finalize_family(std::move(fam));
}

enum class PerturbedDecay { constant, geometric };

/// Nonlinear family on the dyadic domains. With t = 2^i (x - l_i) the first
/// coordinate becomes t + eps_i t (1 - t) (1 + shear y) and the second stays
/// c_i + 2^-(i+1) y. Constant eps_i = eps makes the second-derivative ratio
/// grow like 2^i; geometric eps_i = eps 2^-i keeps it bounded. Positive shear
/// couples the expansion rate to y, bending stable manifolds.
inline MapFamily make_perturbed_family(int truncN, double eps, PerturbedDecay decay, double shear) {
    if (truncN < 2) throw std::invalid_argument("make_perturbed_family: truncN must be >= 2");
    if (!(eps >= 0.0) || eps >= 0.2) throw std::invalid_argument("make_perturbed_family: need 0 <= eps < 0.2");
    if (!(shear >= 0.0) || shear >= 0.2) throw std::invalid_argument("make_perturbed_family: need 0 <= shear < 0.2");
    MapFamily fam;
    fam.name = decay == PerturbedDecay::constant ? "perturbed-constant" : "perturbed-geometric";
    fam.truncN = truncN;
    fam.alpha = 0.5;
    fam.C0 = 1.0;
    const double eps1 = decay == PerturbedDecay::constant ? eps : 0.5 * eps;
    fam.K0 = 2.0 * (1.0 - eps1 * (1.0 + shear));   // sharp min of F1x - alpha |F1y| over the family
    fam.tail = detail::dyadic_tail();
    fam.branches.reserve(static_cast<std::size_t>(truncN));
    for (int i = 1; i <= truncN; ++i) {
        const double l = 1.0 - std::ldexp(1.0, 1 - i);
        const double r = 1.0 - std::ldexp(1.0, -i);
        const double scale = std::ldexp(1.0, i);
        const double c = 0.5 - std::ldexp(1.0, -i);
        const double h = std::ldexp(1.0, -(i + 1));
        const double e = decay == PerturbedDecay::constant ? eps : eps * std::ldexp(1.0, -i);
        BranchMap b;
        b.index = i;
        b.domain = detail::straight_rect(i, l, r);
        b.strip = detail::straight_strip(c, c + h);
        b.eval = [l, scale, c, h, e, shear](Point z) {
            const double t = scale * (z.x - l);
            const double g = 1.0 + shear * z.y;
            Jet2 j;
            j.f1 = t + e * t * (1.0 - t) * g;
            j.f2 = c + h * z.y;
            j.f1x = (1.0 + e * (1.0 - 2.0 * t) * g) * scale;
            j.f1y = e * t * (1.0 - t) * shear;
            j.f2y = h;
            j.f1xx = -2.0 * e * g * scale * scale;
            j.f1xy = e * (1.0 - 2.0 * t) * shear * scale;
            return j;
        };
        b.inverse = [l, scale, c, h, e, shear](Point w) {
            const double y = (w.y - c) / h;
            const double eg = e * (1.0 + shear * y);
            // t (1 + eg) - eg t^2 = X, stable small root of the quadratic
            const double t = 2.0 * w.x / ((1.0 + eg) + std::sqrt((1.0 + eg) * (1.0 + eg) - 4.0 * eg * w.x));
            return Point{l + t / scale, y};
        };
        fam.branches.push_back(std::move(b));
    }
    return finalize_family(std::move(fam));
}

}  // namespace hypershift
