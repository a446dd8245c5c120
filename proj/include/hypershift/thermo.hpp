#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hypershift/fit.hpp"
#include "hypershift/manifolds.hpp"
#include "hypershift/symbolic.hpp"

/// Thermodynamics on the one-sided symbolic space: the geometric potential
/// (minus log of the unstable derivative), its transfer to stable-manifold
/// classes, symbolic Hölder variation, periodic points, partition sums,
/// pressure with its positive-recurrence band, and the Ruelle operator.
///
/// One-sided words are realized as points of the reference unstable manifold:
/// the representative of a word is the center of its cylinder's crossing with
/// that manifold. Alphabet sums are truncated at truncN; the cut tail is
/// estimated from the tail model and reported, never silently dropped.
namespace hypershift {

struct PotentialContext {
    MapFamily family;
    ManifoldCurve referenceUnstable;          // full-width reference leaf
    double seriesTolerance = 1e-10;
    int maxSeriesTerms = 64;
    double potentialShift = 0.0;              // diagnostic constant added to the potential
    std::size_t enumerationBudget = 2'000'000;

    // cached flag: potential constant on each branch, enabling the exact
    // per-slot factorization of periodic sums
    mutable int branchConstantState = -1;     // -1 unknown, 0 no, 1 yes
    mutable std::vector<double> branchValues;
};

/// The potential at z with unstable slope a.
inline double phi(const PotentialContext& ctx, const Point& z, double a) {
    auto i = ctx.family.locate(z);
    if (!i) throw numerical_error("phi: point is not inside any branch domain");
    return -std::log(unstable_derivative(ctx.family.jet(*i, z), a)) + ctx.potentialShift;
}

namespace detail {

inline double phi_at_branch(const PotentialContext& ctx, int branch, const Point& z, double a) {
    return -std::log(unstable_derivative(ctx.family.jet(branch, z), a)) + ctx.potentialShift;
}

// symbol sampler weighted like the reference family's widths
inline int sample_symbol(Rng& rng, int cap) {
    const double u = rng.uniform01();
    int i = 1 + static_cast<int>(std::floor(-std::log2(std::max(u, 1e-9))));
    return std::min(i, cap);
}

inline Point apply_word_once(const MapFamily& fam, int symbol, const Point& z) {
    return fam.branch(symbol).eval(z).image();
}

}  // namespace detail

/// Center of the word's cylinder crossing with the reference unstable leaf:
/// the canonical point realizing a one-sided word. The cylinder section is
/// refined symbol by symbol: its depth-k image spans the full width of the
/// square, so the next symbol's domain edges are bracketed and each edge is a
/// monotone scalar crossing of the by-symbol forward orbit. No branch lookup
/// is involved, which keeps the refinement immune to boundary ties. Requires
/// orientation-preserving branches.
inline Point reference_point(const PotentialContext& ctx, const Word& word) {
    if (word.empty()) throw std::invalid_argument("reference_point: word must be nonempty");
    require_word_in_alphabet(ctx.family, word);
    if (!ctx.family.orientationPreserving)
        throw numerical_error("reference_point: family must be orientation preserving");
    const auto& fam = ctx.family;
    const auto& ref = ctx.referenceUnstable;
    const auto n = static_cast<int>(word.size());

    auto orbit_after = [&](double x, int steps) {
        Point z{x, ref.value_at(x)};
        for (int j = 0; j < steps; ++j) z = detail::apply_word_once(fam, word[static_cast<std::size_t>(j)], z);
        return z;
    };

    // depth-0 section: the first branch's domain edges on the reference leaf
    auto leaf_edge = [&](const SampledGraph& boundary) {
        double x = 0.5;
        for (int iter = 0; iter < 200; ++iter) {
            const double next = boundary(ref.value_at(x));
            if (std::abs(next - x) < 1e-15) return next;
            x = next;
        }
        return x;
    };
    const auto& dom0 = fam.branch(word[0]).domain;
    double a = leaf_edge(dom0.left), b = leaf_edge(dom0.right);

    for (int k = 1; k < n; ++k) {
        const auto& dom = fam.branch(word[static_cast<std::size_t>(k)]).domain;
        auto edge_crossing = [&](const SampledGraph& boundary) {
            double lo = a, hi = b;
            for (int iter = 0; iter < 60; ++iter) {
                const double mid = 0.5 * (lo + hi);
                const Point w = orbit_after(mid, k);
                if (w.x < boundary(w.y))
                    lo = mid;
                else
                    hi = mid;
            }
            return 0.5 * (lo + hi);
        };
        const double na = edge_crossing(dom.left);
        const double nb = edge_crossing(dom.right);
        a = na;
        b = nb;
    }
    const double x = 0.5 * (a + b);
    return {x, ref.value_at(x)};
}

/// Partial sum of the telescoped difference between the potentials along the
/// orbit of z and along the orbit of its stable-class representative on the
/// reference leaf. Terms must decay geometrically; persistent terms above the
/// tolerance raise holder_error.
inline double u_series(const PotentialContext& ctx, const Point& z, double slope = 0.0) {
    const auto& fam = ctx.family;
    // The stable-class anchor is matched through finitely many symbols, so
    // the pair stays close only while symbols keep agreeing: past half the
    // matched depth the expanding direction reopens the gap. Summing over
    // the first half keeps both error channels at contraction^(depth/2).
    const int wanted = std::min(2 * ctx.maxSeriesTerms, 96);
    auto it = itinerary(fam, z, wanted);
    if (it.word.empty()) throw numerical_error("u_series: point escapes immediately");
    const Point z0 = reference_point(ctx, it.word);
    const int terms = std::min(static_cast<int>(it.word.size() / 2) + 1, ctx.maxSeriesTerms);

    Point w = z, w0 = z0;
    double aW = slope, aW0 = ctx.referenceUnstable.slope_at(z0.x);
    double sum = 0.0, best = 0.0;
    double head = 0.0, prev = std::numeric_limits<double>::infinity();
    double minTerm = std::numeric_limits<double>::infinity();
    int rising = 0;
    for (int k = 0; k < terms; ++k) {
        const int s = it.word[static_cast<std::size_t>(k)];
        const double term = detail::phi_at_branch(ctx, s, w, aW) - detail::phi_at_branch(ctx, s, w0, aW0);
        sum += term;
        const double mag = std::abs(term);
        if (k < 4) head = std::max(head, mag);
        if (mag < minTerm) {
            minTerm = mag;
            best = sum;
        }
        if (mag < ctx.seriesTolerance && k >= 1) return sum;
        // a truncated anchor reopens the expanding gap eventually: once the
        // terms rise persistently, the sum at the dip is the usable value
        if (k >= 1 && mag > prev * 1.000001) {
            if (++rising >= 3) return best;
        } else {
            rising = 0;
        }
        prev = mag;
        const Jet2 jW = fam.jet(s, w), jW0 = fam.jet(s, w0);
        aW = slope_transport(jW, aW);
        aW0 = slope_transport(jW0, aW0);
        w = jW.image();
        w0 = jW0.image();
    }
    // Tolerance unmet: a genuine Hölder failure keeps the terms near their
    // initial size over the whole window.
    if (terms >= 8 && minTerm > ctx.seriesTolerance && minTerm >= 0.45 * head)
        throw holder_error("u_series: terms fail to decay; the potential is not locally Holder");
    return best;
}

/// The symbolic potential of a one-sided word: the potential at the word's
/// reference-leaf representative, corrected by the telescoped series at its
/// image so the value depends only on forward symbols. The representative is
/// its own stable-class anchor, so the series at the point itself vanishes.
inline double phi_u(const PotentialContext& ctx, const Word& word) {
    if (word.size() < 2) throw std::invalid_argument("phi_u: need at least 2 symbols");
    const Point z = reference_point(ctx, word);
    const double a = ctx.referenceUnstable.slope_at(z.x);
    const double base = detail::phi_at_branch(ctx, word[0], z, a);
    const Jet2 j = ctx.family.jet(word[0], z);
    const Point fz = j.image();
    const double aF = slope_transport(j, a);
    return base + u_series(ctx, fz, aF);
}

struct HolderEstimate {
    std::vector<std::pair<int, double>> perN;   // (n, V_n)
    double fittedC = 0.0;
    double fittedTheta = 0.0;
    double residual = 0.0;
    bool exactZero = false;
    bool valid = false;
};

/// Symbolic variation V_n: the largest spread of the potential over sampled
/// word pairs agreeing on their first n symbols, forced monotone in n by
/// taking the envelope over deeper agreements (any pair counted at depth
/// n + 1 also witnesses depth n).
inline HolderEstimate holder_variation(const PotentialContext& ctx, int nMax, int samplesPerCyl,
                                       std::uint64_t seed = 1) {
    if (nMax < 2) throw std::invalid_argument("holder_variation: nMax must be >= 2");
    if (samplesPerCyl < 1) throw std::invalid_argument("holder_variation: need at least one sample");
    Rng rng(seed);
    const int cap = std::min(6, ctx.family.truncN);
    std::vector<double> raw(static_cast<std::size_t>(nMax) + 1, 0.0);
    for (int n = 1; n <= nMax; ++n) {
        for (int s = 0; s < samplesPerCyl; ++s) {
            Word base;
            for (int k = 0; k < n; ++k) base.symbols.push_back(detail::sample_symbol(rng, cap));
            Word x = base, y = base;
            const int e1 = detail::sample_symbol(rng, cap);
            int e2 = detail::sample_symbol(rng, cap);
            if (e2 == e1) e2 = (e1 % cap) + 1;
            x.symbols.push_back(e1);
            y.symbols.push_back(e2);
            for (int k = 0; k < 3; ++k) {
                x.symbols.push_back(detail::sample_symbol(rng, cap));
                y.symbols.push_back(detail::sample_symbol(rng, cap));
            }
            raw[static_cast<std::size_t>(n)] =
                std::max(raw[static_cast<std::size_t>(n)], std::abs(phi_u(ctx, x) - phi_u(ctx, y)));
        }
    }
    HolderEstimate est;
    for (int n = nMax - 1; n >= 1; --n)
        raw[static_cast<std::size_t>(n)] = std::max(raw[static_cast<std::size_t>(n)],
                                                    raw[static_cast<std::size_t>(n) + 1]);
    std::vector<double> ns, vs;
    for (int n = 1; n <= nMax; ++n) {
        est.perN.emplace_back(n, raw[static_cast<std::size_t>(n)]);
        ns.push_back(n);
        vs.push_back(raw[static_cast<std::size_t>(n)]);
    }
    const auto fit = fit_geometric_decay(ns, vs);
    est.fittedC = fit.c;
    est.fittedTheta = fit.theta;
    est.residual = fit.logResidual;
    est.exactZero = fit.exactZero;
    est.valid = fit.valid;
    return est;
}

/// Unique periodic point whose itinerary repeats the word: alternating
/// contraction on the cylinder/strip pair. Each pass solves the expanding
/// coordinate by bisection within the first branch's section and pushes the
/// contracting coordinate forward once. Verification is done in the
/// contracting directions (y forward, x through the inverse chain); the
/// forward x-residual is conditioning-limited for words with huge expansion.
inline Point periodic_point(const MapFamily& fam, const Word& word) {
    if (word.empty()) throw std::invalid_argument("periodic_point: word must be nonempty");
    require_word_in_alphabet(fam, word);
    const auto& dom = fam.branch(word[0]).domain;
    auto cycle = [&](double x, double y) {
        Point z{x, y};
        for (int s : word.symbols) z = detail::apply_word_once(fam, s, z);
        return z;
    };
    // Which side of the word's cylinder is the seed on? Classify at the
    // first step whose point leaves its branch domain; evaluating the
    // branch formulas far outside their domains is never needed (and is not
    // monotone for nonlinear families).
    auto cycle_side = [&](double x0, double y0) {
        Point z{x0, y0};
        for (int s : word.symbols) {
            const auto& d = fam.branch(s).domain;
            if (z.x < d.left(z.y)) return -1;
            if (z.x > d.right(z.y)) return +1;
            z = detail::apply_word_once(fam, s, z);
        }
        return z.x < x0 ? -1 : +1;   // inside the cylinder: sign of the expanding residual
    };
    auto solve_x = [&](double y) {
        double lo = dom.left(y), hi = dom.right(y);
        for (int iter = 0; iter < 80; ++iter) {
            const double mid = 0.5 * (lo + hi);
            if (cycle_side(mid, y) < 0)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    };
    double y = 0.5, x = solve_x(y);
    bool settled = false;
    for (int pass = 0; pass < 2000 && !settled; ++pass) {
        const double xNew = solve_x(y);
        const double yNew = cycle(xNew, y).y;
        settled = std::max(std::abs(xNew - x), std::abs(yNew - y)) < 1e-13;
        x = xNew;
        y = yNew;
    }
    if (!settled) throw numerical_error("periodic_point: no convergence for word " + word.str());
    x = solve_x(y);
    const Point z{x, y};

    // The residual in the expanding direction is amplified by the cycle
    // expansion, so the certificate is: the contracting coordinate closes to
    // 1e-10 and every orbit point lies in its branch domain.
    if (std::abs(cycle(x, y).y - y) > 1e-10)
        throw numerical_error("periodic_point: cycle verification failed for word " + word.str());
    Point orbitPoint = z;
    for (int s : word.symbols) {
        const auto& d = fam.branch(s).domain;
        if (orbitPoint.x < d.left(orbitPoint.y) - 1e-9 || orbitPoint.x > d.right(orbitPoint.y) + 1e-9 ||
            orbitPoint.y < -1e-9 || orbitPoint.y > 1.0 + 1e-9)
            throw numerical_error("periodic_point: cycle verification failed for word " + word.str());
        orbitPoint = detail::apply_word_once(fam, s, orbitPoint);
    }
    return z;
}

namespace detail {

/// Potential summed along the periodic orbit of the word, slopes transported
/// around the cycle to their periodic values first.
inline double cycle_potential_sum(const PotentialContext& ctx, const Word& word, const Point& p) {
    const auto& fam = ctx.family;
    // settle the periodic slope by transporting around the cycle a few times
    double a = 0.0;
    for (int rounds = 0; rounds < 4; ++rounds) {
        Point z = p;
        for (int s : word.symbols) {
            const Jet2 j = fam.jet(s, z);
            a = slope_transport(j, a);
            z = j.image();
        }
    }
    double sum = 0.0;
    Point z = p;
    for (int s : word.symbols) {
        const Jet2 j = fam.jet(s, z);
        sum += -std::log(unstable_derivative(j, a)) + ctx.potentialShift;
        a = slope_transport(j, a);
        z = j.image();
    }
    return sum;
}

inline bool potential_is_branch_constant(const PotentialContext& ctx) {
    if (ctx.branchConstantState >= 0) return ctx.branchConstantState == 1;
    const auto& fam = ctx.family;
    ctx.branchValues.assign(static_cast<std::size_t>(fam.truncN) + 1, 0.0);
    bool constant = true;
    for (int i = 1; i <= fam.truncN; ++i) {
        const auto& b = fam.branch(i);
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int ky = 0; ky <= 6; ++ky) {
            const double y = ky / 6.0;
            for (int kx = 0; kx <= 6; ++kx) {
                const double x = b.domain.left(y) + (b.domain.right(y) - b.domain.left(y)) * kx / 6.0;
                for (double a : {-fam.alpha, 0.0, fam.alpha}) {
                    const double v = phi_at_branch(ctx, i, {x, y}, a);
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
        }
        ctx.branchValues[static_cast<std::size_t>(i)] = 0.5 * (lo + hi);
        if (hi - lo > 1e-12) constant = false;
    }
    ctx.branchConstantState = constant ? 1 : 0;
    return constant;
}

}  // namespace detail

/// Periodic-orbit partition sum over all n-words starting at the anchor.
/// Potentials that are exactly constant per branch (the affine family)
/// factorize per free slot, so the sum telescopes to a closed form; otherwise
/// the words are enumerated and each periodic point solved, within the
/// context's enumeration budget.
inline double partition_sum(const PotentialContext& ctx, int anchor, int n) {
    const auto& fam = ctx.family;
    if (anchor < 1 || anchor > fam.truncN)
        throw std::invalid_argument("partition_sum: anchor outside the alphabet");
    if (n < 1) throw std::invalid_argument("partition_sum: n must be >= 1");

    if (detail::potential_is_branch_constant(ctx)) {
        double slotSum = 0.0;
        for (int j = 1; j <= fam.truncN; ++j)
            slotSum += std::exp(ctx.branchValues[static_cast<std::size_t>(j)]);
        return std::exp(ctx.branchValues[static_cast<std::size_t>(anchor)]) *
               std::pow(slotSum, n - 1);
    }

    double words = 1.0;
    for (int k = 1; k < n; ++k) words *= fam.truncN;
    if (words > static_cast<double>(ctx.enumerationBudget))
        throw numerical_error("partition_sum: word count exceeds the enumeration budget and the "
                              "potential does not factorize per branch");

    double total = 0.0;
    Word w;
    w.symbols.assign(static_cast<std::size_t>(n), 1);
    w.symbols[0] = anchor;
    auto recurse = [&](auto&& self, int pos) -> void {
        if (pos == n) {
            const Point p = periodic_point(fam, w);
            total += std::exp(detail::cycle_potential_sum(ctx, w, p));
            return;
        }
        for (int j = 1; j <= fam.truncN; ++j) {
            w.symbols[static_cast<std::size_t>(pos)] = j;
            self(self, pos + 1);
        }
    };
    recurse(recurse, 1);
    return total;
}

struct PressureEstimate {
    std::vector<std::array<double, 3>> values;   // (n, Z_n, log(Z_n)/n)
    int anchorSymbol = 0;
    double lambda = 0.0;
    double bandLo = 0.0, bandHi = 0.0;           // observed range of Z_n / lambda^n
    double P = 0.0;
    bool diverged = false;
    double tailFraction = 0.0;                   // modeled alphabet-tail share per free slot
};

/// Pressure from the growth of partition sums. The head estimator is the
/// successive log difference, which cancels the O(1/n) anchor bias visible
/// in the closed-form affine sums.
inline PressureEstimate pressure(const PotentialContext& ctx, int anchor, int nMax) {
    if (nMax < 3) throw std::invalid_argument("pressure: nMax must be >= 3");
    PressureEstimate est;
    est.anchorSymbol = anchor;
    std::vector<double> logZ(static_cast<std::size_t>(nMax) + 1, 0.0);
    for (int n = 1; n <= nMax; ++n) {
        const double z = partition_sum(ctx, anchor, n);
        if (!(z > 0.0) || !std::isfinite(z)) est.diverged = true;
        logZ[static_cast<std::size_t>(n)] = std::log(z);
        est.values.push_back({static_cast<double>(n), z, std::log(z) / n});
    }
    est.P = logZ[static_cast<std::size_t>(nMax)] - logZ[static_cast<std::size_t>(nMax) - 1];
    if (!std::isfinite(est.P)) est.diverged = true;
    est.lambda = std::exp(est.P);
    est.bandLo = std::numeric_limits<double>::infinity();
    est.bandHi = 0.0;
    for (int n = 1; n <= nMax; ++n) {
        const double ratio = std::exp(logZ[static_cast<std::size_t>(n)] - n * est.P);
        est.bandLo = std::min(est.bandLo, ratio);
        est.bandHi = std::max(est.bandHi, ratio);
    }
    if (ctx.family.tail.present) {
        const double kept = 1.0 - ctx.family.tail.width_tail(ctx.family.truncN);
        est.tailFraction = ctx.family.tail.width_tail(ctx.family.truncN) / std::max(kept, 1e-300);
    }
    return est;
}

/// One application of the Ruelle operator to a bounded word function at the
/// word x: the sum over one-symbol extensions weighted by the exponential of
/// the symbolic potential.
inline double ruelle_apply(const PotentialContext& ctx,
                           const std::function<double(const Word&)>& f, const Word& x,
                           int truncN) {
    if (truncN < 1 || truncN > ctx.family.truncN)
        throw std::invalid_argument("ruelle_apply: truncation outside the family alphabet");
    double sum = 0.0;
    for (int i = 1; i <= truncN; ++i) {
        const Word extended = x.prepended(i);
        sum += std::exp(phi_u(ctx, extended)) * f(extended);
    }
    return sum;
}

struct HypothesesReport {
    bool mixingAndFinitelyManyImages = false;
    int distinctRows = 0;
    bool holder = false;
    HolderEstimate holderEstimate;
    bool pressureFinite = false;
    PressureEstimate pressureEstimate;
    bool ruelleBounded = false;
    double ruelleSup = 0.0;
    std::string derivation;

    bool all() const {
        return mixingAndFinitelyManyImages && holder && pressureFinite && ruelleBounded;
    }
};

/// The verification chain for exponential decay: (a) mixing with finitely
/// many images, (b) local Hölder potential, (c) finite pressure close to
/// zero, (d) bounded Ruelle sum of the constant 1.
inline HypothesesReport verify_hypotheses(const PotentialContext& ctx, int nMax = 6,
                                          int samples = 16, double pressureTol = 0.05,
                                          std::uint64_t seed = 1) {
    HypothesesReport rep;
    const auto ts = transition_structure(ctx.family);
    const auto mix = check_topological_mixing(ts, Word{1}, Word{1}, 8);
    rep.distinctRows = check_finitely_many_images(ts);
    rep.mixingAndFinitelyManyImages = mix.mixing && rep.distinctRows < 8;

    rep.holderEstimate = holder_variation(ctx, nMax, samples, seed);
    rep.holder = rep.holderEstimate.exactZero ||
                 (rep.holderEstimate.valid && rep.holderEstimate.fittedTheta < 1.0);

    rep.pressureEstimate = pressure(ctx, 1, std::min(nMax, 5));
    rep.pressureFinite = !rep.pressureEstimate.diverged &&
                         std::isfinite(rep.pressureEstimate.P) &&
                         std::abs(rep.pressureEstimate.P) <= pressureTol;

    Rng rng(seed ^ 0xabcdef);
    const int cap = std::min(6, ctx.family.truncN);
    double sup = 0.0;
    auto one = [](const Word&) { return 1.0; };
    for (int s = 0; s < std::max(8, samples); ++s) {
        Word x;
        const int len = 2 + rng.uniform_int(0, 4);
        for (int k = 0; k < len; ++k) x.symbols.push_back(detail::sample_symbol(rng, cap));
        sup = std::max(sup, ruelle_apply(ctx, one, x, ctx.family.truncN));
    }
    rep.ruelleSup = sup;
    rep.ruelleBounded = std::isfinite(sup) && sup < 100.0;

    rep.derivation = "finitely many images + bounded transfer sum of 1 => positive recurrence; "
                     "observed band [" + std::to_string(rep.pressureEstimate.bandLo) + ", " +
                     std::to_string(rep.pressureEstimate.bandHi) + "]";
    return rep;
}

/// Potential summed along the periodic orbit of the word (slopes settled to
/// their periodic values first).
inline double periodic_orbit_potential_sum(const PotentialContext& ctx, const Word& word) {
    const Point p = periodic_point(ctx.family, word);
    return detail::cycle_potential_sum(ctx, word, p);
}

/// Absolute mismatch between the symbolic potential summed over the cyclic
/// rotations of a word and the geometric potential summed along its periodic
/// orbit; telescoped corrections cancel around a cycle, so this vanishes up
/// to series truncation.
inline double coboundary_residual(const PotentialContext& ctx, const Word& word) {
    if (word.empty()) throw std::invalid_argument("coboundary_residual: word must be nonempty");
    const auto n = static_cast<int>(word.size());
    const double orbitSum = periodic_orbit_potential_sum(ctx, word);
    double symbolicSum = 0.0;
    Word rotated = word;
    for (int k = 0; k < n; ++k) {
        Word extended;
        const std::size_t target = word.size() + 25;
        for (std::size_t j = 0; j < target; ++j)
            extended.symbols.push_back(rotated.symbols[j % rotated.size()]);
        symbolicSum += phi_u(ctx, extended);
        rotated.symbols.push_back(rotated.symbols.front());
        rotated.symbols.erase(rotated.symbols.begin());
    }
    return std::abs(symbolicSum - orbitSum);
}

/// Length of the reference leaf's crossing with the word's cylinder (the
/// max-norm arc length of a graph with slope below 1 is its x-extent).
inline double reference_section_length(const PotentialContext& ctx, const Word& word) {
    auto cyl = build_cylinder(ctx.family, word);
    const auto& ref = ctx.referenceUnstable;
    auto edge = [&](const SampledGraph& boundary) {
        double x = 0.5;
        for (int iter = 0; iter < 200; ++iter) {
            const double next = boundary(ref.value_at(x));
            if (std::abs(next - x) < 1e-14) return next;
            x = next;
        }
        return x;
    };
    return edge(cyl.right) - edge(cyl.left);
}

inline PotentialContext make_potential_context(const MapFamily& fam, double seriesTolerance = 1e-10,
                                               int maxSeriesTerms = 64) {
    if (!(seriesTolerance > 0.0))
        throw std::invalid_argument("make_potential_context: tolerance must be positive");
    PotentialContext ctx;
    ctx.family = fam;
    Word ones;
    for (int k = 0; k < 30; ++k) ones.symbols.push_back(1);
    ctx.referenceUnstable = unstable_curve(fam, ones, 30);
    ctx.seriesTolerance = seriesTolerance;
    ctx.maxSeriesTerms = maxSeriesTerms;
    return ctx;
}

inline std::string pressure_to_csv(const PressureEstimate& est) {
    std::ostringstream os;
    os.precision(17);
    os << "n,z_n,log_z_n_over_n,z_over_lambda_n\n";
    for (const auto& row : est.values) {
        const double n = row[0];
        os << n << ',' << row[1] << ',' << row[2] << ','
           << row[1] / std::pow(est.lambda, n) << '\n';
    }
    return os.str();
}

inline std::string holder_to_csv(const HolderEstimate& est) {
    std::ostringstream os;
    os.precision(17);
    os << "n,v_n\n";
    for (const auto& [n, v] : est.perN) os << n << ',' << v << '\n';
    return os.str();
}

}  // namespace hypershift
