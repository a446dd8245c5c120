#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "hypershift/fit.hpp"
#include "hypershift/symbolic.hpp"

/// Invariant manifolds by graph transform, the unstable slope field, and the
/// measured variation/ratio estimates of the distortion theory.
///
/// Unstable curves are forward images of a horizontal seed segment under a
/// finite history block; stable curves are midlines of deep cylinders. Both
/// stay graphs with slope at most alpha. Product-structure families (every
/// built-in) have exactly horizontal unstable leaves, so tangent slopes on
/// them vanish identically; the slope-gap estimator therefore transports
/// cone-boundary slopes along the same histories, which is the quantity whose
/// geometric decay the contraction argument actually controls.
namespace hypershift {

struct ManifoldCurve {
    enum class Kind { stable, unstable };
    Kind kind = Kind::unstable;
    SampledGraph graph;           // y(x) for unstable, x(y) for stable
    std::vector<double> slopes;   // tangent slope per sample
    Word definingWord;
    int generationDepth = 0;

    double value_at(double t) const { return graph(t); }

    double slope_at(double t) const {
        const double n1 = static_cast<double>(slopes.size() - 1);
        double s = std::clamp(t, 0.0, 1.0) * n1;
        auto k = static_cast<std::size_t>(s);
        if (k >= slopes.size() - 1) return slopes.back();
        const double frac = s - static_cast<double>(k);
        return slopes[k] + frac * (slopes[k + 1] - slopes[k]);
    }

    double max_abs_slope() const {
        double m = 0.0;
        for (double s : slopes) m = std::max(m, std::abs(s));
        return m;
    }
};

namespace detail {

struct CurveWithField {
    SampledGraph graph;
    std::vector<double> field;
};

/// Forward image of a near-horizontal curve through one branch, transporting
/// an attached slope field alongside (the image tangent of a curve tangent is
/// the transported slope, so seeding the field with the seed tangent yields
/// the image curve's own tangents).
inline CurveWithField push_curve_through_branch(const BranchMap& b, const SampledGraph& g,
                                                const std::vector<double>& field) {
    const std::size_t m = g.size();
    const double xLo = curve_domain_crossing(b, g, true);
    const double xHi = curve_domain_crossing(b, g, false);
    std::vector<double> X(m), Y(m), A(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double x = xLo + (xHi - xLo) * static_cast<double>(k) / static_cast<double>(m - 1);
        const Jet2 j = b.eval({x, g(x)});
        X[k] = j.f1;
        Y[k] = j.f2;
        const double n1 = static_cast<double>(m - 1);
        double s = std::clamp(x, 0.0, 1.0) * n1;
        auto kk = static_cast<std::size_t>(std::min(s, static_cast<double>(m - 2)));
        const double frac = s - static_cast<double>(kk);
        const double a = field[kk] + frac * (field[kk + 1] - field[kk]);
        A[k] = slope_transport(j, a);
    }
    CurveWithField out;
    std::vector<double> gv(m), fv(m);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const double x = static_cast<double>(k) / static_cast<double>(m - 1);
        while (seg + 2 < m && X[seg + 1] < x) ++seg;
        const double span = X[seg + 1] - X[seg];
        const double t = span > 0 ? std::clamp((x - X[seg]) / span, 0.0, 1.0) : 0.0;
        gv[k] = Y[seg] + t * (Y[seg + 1] - Y[seg]);
        fv[k] = A[seg] + t * (A[seg + 1] - A[seg]);
    }
    out.graph = SampledGraph(std::move(gv));
    out.field = std::move(fv);
    return out;
}

inline CurveWithField push_history(const MapFamily& fam, const Word& history, double seedY,
                                   double seedSlope) {
    CurveWithField cur;
    cur.graph = SampledGraph::constant(seedY);
    cur.field.assign(cur.graph.size(), seedSlope);
    for (int s : history.symbols) cur = push_curve_through_branch(fam.branch(s), cur.graph, cur.field);
    return cur;
}

}  // namespace detail

/// Unstable curve labeled by a history block: the horizontal seed at seedY
/// carried forward through the last `depth` symbols. Successive depths of the
/// same infinite history converge geometrically in the sup norm.
inline ManifoldCurve unstable_curve(const MapFamily& fam, const Word& negWord, int depth,
                                    double seedY = 0.0) {
    if (depth < 0 || static_cast<std::size_t>(depth) > negWord.size())
        throw std::invalid_argument("unstable_curve: depth must be between 0 and |negWord|");
    require_word_in_alphabet(fam, negWord);
    auto pushed = detail::push_history(fam, negWord.suffix(static_cast<std::size_t>(depth)), seedY, 0.0);
    ManifoldCurve c;
    c.kind = ManifoldCurve::Kind::unstable;
    c.graph = std::move(pushed.graph);
    c.slopes = std::move(pushed.field);
    c.definingWord = negWord;
    c.generationDepth = depth;
    return c;
}

/// Stable curve labeled by a future block: the midline of its cylinder.
inline ManifoldCurve stable_curve(const MapFamily& fam, const Word& posWord) {
    if (posWord.empty()) throw std::invalid_argument("stable_curve: word must be nonempty");
    auto cyl = build_cylinder(fam, posWord);
    ManifoldCurve c;
    c.kind = ManifoldCurve::Kind::stable;
    std::vector<double> mid(cyl.left.size());
    for (std::size_t k = 0; k < mid.size(); ++k)
        mid[k] = 0.5 * (cyl.left.values[k] + cyl.right.values[k]);
    c.graph = SampledGraph(std::move(mid));
    c.slopes.resize(c.graph.size());
    for (std::size_t k = 0; k < c.slopes.size(); ++k)
        c.slopes[k] = c.graph.slope_at(static_cast<double>(k) / static_cast<double>(c.slopes.size() - 1));
    c.definingWord = posWord;
    c.generationDepth = static_cast<int>(posWord.size());
    return c;
}

/// Unique crossing of a stable and an unstable curve; the cone gap makes
/// x -> x_s(y_u(x)) a contraction with factor at most alpha^2.
inline Point curve_crossing(const ManifoldCurve& stable, const ManifoldCurve& unstable) {
    if (stable.kind != ManifoldCurve::Kind::stable || unstable.kind != ManifoldCurve::Kind::unstable)
        throw std::invalid_argument("curve_crossing: need one stable and one unstable curve");
    double x = 0.5;
    for (int iter = 0; iter < 200; ++iter) {
        const double next = stable.value_at(unstable.value_at(x));
        if (std::abs(next - x) < 1e-13) {
            x = next;
            break;
        }
        x = next;
    }
    return {x, unstable.value_at(x)};
}

struct SlopeGapReport {
    double maxGap = 0.0;
    int crossings = 0;
};

/// Largest slope mismatch between two unstable leaves where they cross one
/// stable manifold inside the rectangle. Slopes are cone-boundary values
/// transported through the rectangle's history block, the worst case over
/// admissible tangent data; histories of product families transport equal
/// slopes to points with equal forward itineraries, so the gap vanishes
/// exactly when the expansion does not depend on the contracting coordinate.
inline SlopeGapReport slope_field_gap(const MapFamily& fam, const MixedRect& rect, int samples,
                                      std::uint64_t seed = 1) {
    if (rect.negWord.empty())
        throw std::invalid_argument("slope_field_gap: rectangle needs a nonempty history block");
    if (samples < 1) throw std::invalid_argument("slope_field_gap: samples must be >= 1");
    Rng rng(seed);
    SlopeGapReport rep;
    for (int s = 0; s < samples; ++s) {
        // one stable manifold through the rectangle, refined past the future block
        Word stableWord = rect.posWord;
        for (int k = 0; k < 10; ++k) stableWord.symbols.push_back(rng.uniform_int(1, std::min(4, fam.truncN)));
        auto sc = stable_curve(fam, stableWord);
        // two unstable leaves with the rectangle's history, different seed heights
        auto u1 = detail::push_history(fam, rect.negWord, rng.uniform01(), fam.alpha);
        auto u2 = detail::push_history(fam, rect.negWord, rng.uniform01(), fam.alpha);
        ManifoldCurve c1{ManifoldCurve::Kind::unstable, u1.graph, u1.field, rect.negWord,
                         static_cast<int>(rect.negWord.size())};
        ManifoldCurve c2{ManifoldCurve::Kind::unstable, u2.graph, u2.field, rect.negWord,
                         static_cast<int>(rect.negWord.size())};
        const Point z3 = curve_crossing(sc, c1);
        const Point z4 = curve_crossing(sc, c2);
        rep.maxGap = std::max(rep.maxGap, std::abs(c1.slope_at(z3.x) - c2.slope_at(z4.x)));
        rep.crossings += 2;
    }
    return rep;
}

/// Spread of log of the unstable derivative over attractor-approximating
/// points of the rectangle, slopes taken from the local unstable leaves.
inline double variation_log_Du(const MapFamily& fam, const MixedRect& rect, int samples,
                               std::uint64_t seed = 1) {
    if (samples < 1) throw std::invalid_argument("variation_log_Du: samples must be >= 1");
    Rng rng(seed);
    const int firstSymbol = rect.posWord[0];
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    const int maxSym = std::min(4, fam.truncN);
    for (int s = 0; s < samples; ++s) {
        Word stableWord = rect.posWord;
        for (int k = 0; k < 10; ++k) stableWord.symbols.push_back(rng.uniform_int(1, maxSym));
        auto sc = stable_curve(fam, stableWord);
        Word history = rect.negWord;
        for (int k = 0; k < 6; ++k) history.symbols.insert(history.symbols.begin(), rng.uniform_int(1, maxSym));
        auto uc = unstable_curve(fam, history, static_cast<int>(history.size()), rng.uniform01());
        const Point z = curve_crossing(sc, uc);
        const double a = uc.slope_at(z.x);
        const double v = std::log(unstable_derivative(fam.jet(firstSymbol, z), a));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi - lo;
}

struct VariationFit {
    double c0 = 0.0;
    double theta0 = 0.0;
    double residual = 0.0;
    std::vector<std::pair<int, int>> depthsUsed;
    bool exactZero = false;
    bool valid = false;
};

namespace detail {

inline Word repeat_pattern(const std::vector<int>& pattern, int length) {
    Word w;
    w.symbols.reserve(static_cast<std::size_t>(length));
    for (int k = 0; k < length; ++k)
        w.symbols.push_back(pattern[static_cast<std::size_t>(k) % pattern.size()]);
    return w;
}

inline VariationFit from_geometric(const GeometricFit& g, std::vector<std::pair<int, int>> depths) {
    VariationFit f;
    f.c0 = g.c;
    f.theta0 = g.theta;
    f.residual = g.logResidual;
    f.exactZero = g.exactZero;
    f.valid = g.valid;
    f.depthsUsed = std::move(depths);
    return f;
}

}  // namespace detail

/// Variation of log D^u F over a nested family of rectangles with
/// min(m, n) = k, fitted as c * theta^k. Exactly-zero sequences (affine
/// families) are reported as degenerate exact fits.
inline VariationFit fit_variation_decay(const MapFamily& fam, int kMax, int samples,
                                        std::uint64_t seed = 1) {
    if (kMax < 2) throw std::invalid_argument("fit_variation_decay: kMax must be >= 2");
    std::vector<double> ks, vs;
    std::vector<std::pair<int, int>> depths;
    for (int k = 1; k <= kMax; ++k) {
        auto neg = detail::repeat_pattern({2, 1}, k);
        auto pos = detail::repeat_pattern({1, 2}, k);
        auto rect = build_mixed(fam, neg, pos);
        vs.push_back(variation_log_Du(fam, rect, samples, seed + static_cast<std::uint64_t>(k)));
        ks.push_back(k);
        depths.emplace_back(k, k);
    }
    return detail::from_geometric(fit_geometric_decay(ks, vs), std::move(depths));
}

/// Slope gaps over rectangles with history depth m = 1..mMax, fitted as
/// c0 * theta0^m.
inline VariationFit fit_slope_gap_decay(const MapFamily& fam, int mMax, int samples,
                                        std::uint64_t seed = 1) {
    if (mMax < 2) throw std::invalid_argument("fit_slope_gap_decay: mMax must be >= 2");
    std::vector<double> ms, gs;
    std::vector<std::pair<int, int>> depths;
    const Word pos{1, 2};
    for (int m = 1; m <= mMax; ++m) {
        auto neg = detail::repeat_pattern({1, 2}, m);
        auto rect = build_mixed(fam, neg, pos);
        gs.push_back(slope_field_gap(fam, rect, samples, seed + static_cast<std::uint64_t>(m)).maxGap);
        ms.push_back(m);
        depths.emplace_back(m, static_cast<int>(pos.size()));
    }
    return detail::from_geometric(fit_geometric_decay(ms, gs), std::move(depths));
}

struct RatioSuiteReport {
    double fxRatio = 1.0;             // max within-branch ratio of |F1x|
    double widthRatio = 1.0;          // max within-branch ratio of section widths
    double duRatio = 1.0;             // max within-branch ratio of D^u F along leaves
    double crossSectionRatio = 1.0;   // max within-branch ratio of leaf section lengths
    double deepCrossSectionRatio = 1.0;  // same over depth-n cylinders
    int depth = 0;
};

/// Bounded-ratio measurements: expansion, width, unstable-derivative and
/// leaf-length ratios within branches, plus leaf-length ratios across
/// depth-n cylinders. All are identically 1 for the affine family.
inline RatioSuiteReport bounded_ratio_suite(const MapFamily& fam, int depth, std::uint64_t seed = 1) {
    if (depth < 1 || depth > 6) throw std::invalid_argument("bounded_ratio_suite: depth must be in [1, 6]");
    RatioSuiteReport rep;
    rep.depth = depth;
    const int grid = 24;
    const int branchCap = std::min(10, fam.truncN);
    for (int i = 1; i <= branchCap; ++i) {
        const auto& b = fam.branch(i);
        double fxLo = 1e300, fxHi = 0, wLo = 1e300, wHi = 0, duLo = 1e300, duHi = 0;
        for (int ky = 0; ky <= grid; ++ky) {
            const double y = static_cast<double>(ky) / grid;
            wLo = std::min(wLo, b.domain.width_at(y));
            wHi = std::max(wHi, b.domain.width_at(y));
            for (int kx = 0; kx <= grid; ++kx) {
                const double x = b.domain.left(y) +
                                 (b.domain.right(y) - b.domain.left(y)) * static_cast<double>(kx) / grid;
                const Jet2 j = b.eval({x, y});
                fxLo = std::min(fxLo, std::abs(j.f1x));
                fxHi = std::max(fxHi, std::abs(j.f1x));
                const double du = unstable_derivative(j, 0.0);   // leaves of built-ins are horizontal
                duLo = std::min(duLo, du);
                duHi = std::max(duHi, du);
            }
        }
        rep.fxRatio = std::max(rep.fxRatio, fxHi / fxLo);
        rep.widthRatio = std::max(rep.widthRatio, wHi / wLo);
        rep.duRatio = std::max(rep.duRatio, duHi / duLo);
        rep.crossSectionRatio = std::max(rep.crossSectionRatio, wHi / wLo);
    }
    // leaf-length ratios across depth-n cylinders at attractor-like heights
    Rng rng(seed);
    for (int trial = 0; trial < 20; ++trial) {
        Word w;
        for (int k = 0; k < depth; ++k) w.symbols.push_back(rng.uniform_int(1, std::min(6, fam.truncN)));
        auto cyl = build_cylinder(fam, w);
        double lo = 1e300, hi = 0;
        for (int k = 0; k <= 16; ++k) {
            const double y = static_cast<double>(k) / 16.0;
            const double width = cyl.width_at(y);
            lo = std::min(lo, width);
            hi = std::max(hi, width);
        }
        rep.deepCrossSectionRatio = std::max(rep.deepCrossSectionRatio, hi / lo);
    }
    return rep;
}

inline std::string curve_to_csv(const ManifoldCurve& c) {
    std::ostringstream os;
    os.precision(17);
    os << "kind,word,abscissa,ordinate,slope\n";
    const char* kind = c.kind == ManifoldCurve::Kind::stable ? "stable" : "unstable";
    for (std::size_t k = 0; k < c.graph.size(); ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(c.graph.size() - 1);
        os << kind << ',' << c.definingWord.str() << ',' << t << ',' << c.graph.values[k] << ','
           << c.slopes[k] << '\n';
    }
    return os.str();
}

}  // namespace hypershift
