#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hypershift/family.hpp"

/// Symbolic dynamics over the truncated alphabet: itineraries, cylinder
/// rectangles (full height), strips (full width), mixed rectangles, and the
/// transition-structure predicates used by the thermodynamic layer.
///
/// Cylinder boundaries are pulled back through inverse branches one symbol at
/// a time; strip boundaries are pushed forward. Both stay graphs with slope
/// at most alpha, so polyline sampling on the standard grid is stable.
namespace hypershift {

struct Word {
    std::vector<int> symbols;

    Word() = default;
    Word(std::initializer_list<int> s) : symbols(s) {}
    explicit Word(std::vector<int> s) : symbols(std::move(s)) {}

    std::size_t size() const { return symbols.size(); }
    bool empty() const { return symbols.empty(); }
    int operator[](std::size_t k) const { return symbols[k]; }

    Word appended(int j) const {
        Word w = *this;
        w.symbols.push_back(j);
        return w;
    }

    Word prepended(int j) const {
        Word w;
        w.symbols.reserve(symbols.size() + 1);
        w.symbols.push_back(j);
        w.symbols.insert(w.symbols.end(), symbols.begin(), symbols.end());
        return w;
    }

    Word suffix(std::size_t count) const {
        Word w;
        if (count >= symbols.size()) return *this;
        w.symbols.assign(symbols.end() - static_cast<std::ptrdiff_t>(count), symbols.end());
        return w;
    }

    Word shifted() const {   // drop the first symbol
        Word w;
        w.symbols.assign(symbols.begin() + 1, symbols.end());
        return w;
    }

    std::string str() const {
        std::ostringstream os;
        for (std::size_t k = 0; k < symbols.size(); ++k) {
            if (k) os << '-';
            os << symbols[k];
        }
        return os.str();
    }

    bool operator==(const Word& o) const { return symbols == o.symbols; }
    bool operator<(const Word& o) const { return symbols < o.symbols; }
};

inline void require_word_in_alphabet(const MapFamily& fam, const Word& w) {
    for (int s : w.symbols)
        if (s < 1 || s > fam.truncN)
            throw std::invalid_argument("word symbol " + std::to_string(s) +
                                        " outside the truncated alphabet");
}

struct CylinderRect {
    Word word;
    SampledGraph left, right;   // x(y) over y in [0,1]

    double width_at(double y) const { return right(y) - left(y); }
    double width_max() const {
        double w = 0.0;
        for (std::size_t k = 0; k < left.size(); ++k)
            w = std::max(w, right.values[k] - left.values[k]);
        return w;
    }
};

struct StripRect {
    Word word;                  // history block, oldest symbol first
    SampledGraph bottom, top;   // y(x) over x in [0,1]

    double height_at(double x) const { return top(x) - bottom(x); }
    double height_max() const {
        double h = 0.0;
        for (std::size_t k = 0; k < bottom.size(); ++k)
            h = std::max(h, top.values[k] - bottom.values[k]);
        return h;
    }
};

struct MixedRect {
    Word negWord, posWord;
    SampledGraph left, right;   // stable-side boundaries, from the cylinder
    SampledGraph bottom, top;   // unstable-side boundaries, from the strip

    double horizontal_extent() const {
        // widest cylinder section over the strip's height band
        const double yLo = bottom.min_value(), yHi = top.max_value();
        double w = 0.0;
        const int probes = 64;
        for (int k = 0; k <= probes; ++k) {
            const double y = yLo + (yHi - yLo) * static_cast<double>(k) / probes;
            w = std::max(w, right(y) - left(y));
        }
        return w;
    }

    double vertical_extent() const {
        // tallest strip section over the cylinder's width band
        const double xLo = left.min_value(), xHi = right.max_value();
        double h = 0.0;
        const int probes = 64;
        for (int k = 0; k <= probes; ++k) {
            const double x = xLo + (xHi - xLo) * static_cast<double>(k) / probes;
            h = std::max(h, top(x) - bottom(x));
        }
        return h;
    }

    double diameter() const { return std::max(horizontal_extent(), vertical_extent()); }
};

struct Itinerary {
    Word word;
    std::optional<int> escapedAt;   // position of the first symbol that failed
};

/// Branch symbols along the forward orbit; stops at the first boundary hit or
/// excursion beyond the truncated alphabet, reporting the position in-band.
inline Itinerary itinerary(const MapFamily& fam, Point z, int n) {
    if (n < 1) throw std::invalid_argument("itinerary: n must be >= 1");
    if (!in_unit_square(z)) throw std::invalid_argument("itinerary: point outside the square");
    Itinerary out;
    out.word.symbols.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        auto i = fam.locate(z);
        if (!i) {
            out.escapedAt = k;
            return out;
        }
        out.word.symbols.push_back(*i);
        z = fam.branch(*i).eval(z).image();
    }
    return out;
}

namespace detail {

/// Root of F1(x, y) - target(F2(x, y)) = 0 in x at fixed y, i.e. the pullback
/// of a stable-side boundary graph through one branch. Monotone because F1x
/// dominates the boundary slope; bisection with a Newton accelerator.
inline double pull_point_through_branch(const BranchMap& b, double y, const SampledGraph& target,
                                        double guess) {
    double lo = b.domain.left(y), hi = b.domain.right(y);
    auto value = [&](double x) {
        const Jet2 j = b.eval({x, y});
        return j.f1 - target(j.f2);
    };
    double x = std::clamp(guess, lo, hi);
    for (int iter = 0; iter < 100; ++iter) {
        const Jet2 j = b.eval({x, y});
        const double v = j.f1 - target(j.f2);
        if (std::abs(v) < 1e-14) return x;
        if (v > 0)
            hi = x;
        else
            lo = x;
        const double deriv = j.f1x - target.slope_at(j.f2) * j.f2x;
        double next = deriv > 0 ? x - v / deriv : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) < 1e-16) return next;
        x = next;
    }
    (void)value;
    return x;
}

inline SampledGraph pull_graph_through_branch(const BranchMap& b, const SampledGraph& target) {
    std::vector<double> out(target.size());
    double guess = 0.5 * (b.domain.left(0.0) + b.domain.right(0.0));
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double y = static_cast<double>(k) / static_cast<double>(out.size() - 1);
        guess = pull_point_through_branch(b, y, target, guess);
        out[k] = guess;
    }
    return SampledGraph(std::move(out));
}

/// x where the near-horizontal curve g enters the branch domain from the
/// given side; fixed point of x = boundary(g(x)), a contraction.
inline double curve_domain_crossing(const BranchMap& b, const SampledGraph& g, bool leftSide) {
    const SampledGraph& boundary = leftSide ? b.domain.left : b.domain.right;
    double x = leftSide ? b.domain.left(0.5) : b.domain.right(0.5);
    for (int iter = 0; iter < 200; ++iter) {
        const double next = boundary(g(x));
        if (std::abs(next - x) < 1e-15) return next;
        x = next;
    }
    return x;
}

/// Forward image of a near-horizontal graph restricted to one branch domain,
/// resampled as a graph over the full width of the square.
inline SampledGraph push_graph_through_branch(const BranchMap& b, const SampledGraph& g) {
    const std::size_t m = g.size();
    const double xLo = curve_domain_crossing(b, g, true);
    const double xHi = curve_domain_crossing(b, g, false);
    std::vector<double> X(m), Y(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double x = xLo + (xHi - xLo) * static_cast<double>(k) / static_cast<double>(m - 1);
        const Jet2 j = b.eval({x, g(x)});
        X[k] = j.f1;
        Y[k] = j.f2;
    }
    // resample (X, Y) onto the uniform grid; X is increasing for
    // orientation-preserving branches
    std::vector<double> out(m);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const double x = static_cast<double>(k) / static_cast<double>(m - 1);
        while (seg + 2 < m && X[seg + 1] < x) ++seg;
        const double span = X[seg + 1] - X[seg];
        const double t = span > 0 ? std::clamp((x - X[seg]) / span, 0.0, 1.0) : 0.0;
        out[k] = Y[seg] + t * (Y[seg + 1] - Y[seg]);
    }
    return SampledGraph(std::move(out));
}

}  // namespace detail

/// Full-height rectangle of points whose next |word| symbols follow the word:
/// E_{i0 ... i(n-1)}, built by pulling the terminal domain boundaries back
/// through the inverse branches.
inline CylinderRect build_cylinder(const MapFamily& fam, const Word& word) {
    if (word.empty()) throw std::invalid_argument("build_cylinder: word must be nonempty");
    require_word_in_alphabet(fam, word);
    CylinderRect rect;
    rect.word = word;
    const auto& last = fam.branch(word.symbols.back());
    rect.left = last.domain.left;
    rect.right = last.domain.right;
    for (auto it = word.symbols.rbegin() + 1; it != word.symbols.rend(); ++it) {
        const auto& b = fam.branch(*it);
        rect.left = detail::pull_graph_through_branch(b, rect.left);
        rect.right = detail::pull_graph_through_branch(b, rect.right);
    }
    if (rect.width_max() <= 0.0)
        throw numerical_error("build_cylinder: empty intersection for word " + word.str());
    return rect;
}

/// Full-width strip of points whose last |word| symbols followed the word:
/// the terminal branch image of the recursive strip-domain intersection.
inline StripRect build_strip(const MapFamily& fam, const Word& word) {
    if (word.empty()) throw std::invalid_argument("build_strip: word must be nonempty");
    require_word_in_alphabet(fam, word);
    StripRect strip;
    strip.word = word;
    const auto& oldest = fam.branch(word.symbols.front());
    strip.bottom = oldest.strip.bottom;
    strip.top = oldest.strip.top;
    for (auto it = word.symbols.begin() + 1; it != word.symbols.end(); ++it) {
        const auto& b = fam.branch(*it);
        strip.bottom = detail::push_graph_through_branch(b, strip.bottom);
        strip.top = detail::push_graph_through_branch(b, strip.top);
    }
    return strip;
}

/// Intersection of the strip of the history block with the cylinder of the
/// future block. An empty history yields the full-height cylinder itself.
inline MixedRect build_mixed(const MapFamily& fam, const Word& negWord, const Word& posWord) {
    if (posWord.empty()) throw std::invalid_argument("build_mixed: future word must be nonempty");
    MixedRect rect;
    rect.negWord = negWord;
    rect.posWord = posWord;
    auto cyl = build_cylinder(fam, posWord);
    rect.left = std::move(cyl.left);
    rect.right = std::move(cyl.right);
    if (negWord.empty()) {
        rect.bottom = SampledGraph::constant(0.0);
        rect.top = SampledGraph::constant(1.0);
    } else {
        auto strip = build_strip(fam, negWord);
        rect.bottom = std::move(strip.bottom);
        rect.top = std::move(strip.top);
    }
    return rect;
}

/// 0/1 transition matrix over the truncated alphabet plus the class of the
/// (identical) tail rows. Built-in families are full shifts.
struct TransitionStructure {
    int alphabet = 0;
    std::vector<std::vector<std::uint8_t>> rows;
    bool tailRowAllOnes = false;

    static TransitionStructure full_shift(int alphabet) {
        TransitionStructure ts;
        ts.alphabet = alphabet;
        ts.rows.assign(static_cast<std::size_t>(alphabet),
                       std::vector<std::uint8_t>(static_cast<std::size_t>(alphabet), 1));
        ts.tailRowAllOnes = true;
        return ts;
    }

    bool admissible(int from, int to) const {
        return rows[static_cast<std::size_t>(from - 1)][static_cast<std::size_t>(to - 1)] != 0;
    }

    bool word_admissible(const Word& w) const {
        for (std::size_t k = 0; k + 1 < w.size(); ++k)
            if (!admissible(w[k], w[k + 1])) return false;
        return true;
    }
};

inline TransitionStructure transition_structure(const MapFamily& fam) {
    return TransitionStructure::full_shift(fam.truncN);
}

struct MixingReport {
    bool mixing = false;
    int first = 0;   // least n such that every lag in [n, horizon] connects
};

/// Does the cylinder of c1 meet the n-step preimage of the cylinder of c2 for
/// every n from some point on, up to the horizon?
inline MixingReport check_topological_mixing(const TransitionStructure& ts, const Word& c1,
                                             const Word& c2, int horizon) {
    if (horizon < 1) throw std::invalid_argument("check_topological_mixing: horizon must be >= 1");
    if (c1.empty() || c2.empty())
        throw std::invalid_argument("check_topological_mixing: cylinders must be nonempty");
    if (!ts.word_admissible(c1) || !ts.word_admissible(c2)) return {};

    const auto n1 = static_cast<int>(c1.size());
    const auto a = static_cast<std::size_t>(ts.alphabet);

    // boolean reachability powers: reach[g][i][j] = path of exactly g edges
    std::vector<std::vector<std::vector<std::uint8_t>>> reach;
    reach.push_back({});   // placeholder for g = 0 (identity), handled inline
    std::vector<std::vector<std::uint8_t>> cur = ts.rows;
    reach.push_back(cur);
    for (int g = 2; g <= horizon + 1; ++g) {
        std::vector<std::vector<std::uint8_t>> next(a, std::vector<std::uint8_t>(a, 0));
        for (std::size_t i = 0; i < a; ++i)
            for (std::size_t k = 0; k < a; ++k)
                if (cur[i][k])
                    for (std::size_t j = 0; j < a; ++j)
                        if (ts.rows[k][j]) next[i][j] = 1;
        cur = std::move(next);
        reach.push_back(cur);
    }

    auto connects = [&](int n) {
        if (n < n1) {
            // overlapping occurrence: symbols must agree where the blocks overlap
            for (int k = n; k < n1; ++k) {
                const int k2 = k - n;
                if (k2 < static_cast<int>(c2.size()) && c1[static_cast<std::size_t>(k)] != c2[static_cast<std::size_t>(k2)])
                    return false;
            }
            // bridge admissibility if c2 extends beyond c1
            if (n + static_cast<int>(c2.size()) > n1) {
                const int join = n1 - n;   // first index of c2 outside the overlap
                if (join >= 1 && !ts.admissible(c2[static_cast<std::size_t>(join - 1)],
                                                c2[static_cast<std::size_t>(join)]))
                    return false;
            }
            return true;
        }
        const int gap = n - n1;   // free symbols between the blocks
        const int from = c1.symbols.back(), to = c2.symbols.front();
        return reach[static_cast<std::size_t>(gap + 1)][static_cast<std::size_t>(from - 1)]
                    [static_cast<std::size_t>(to - 1)] != 0;
    };

    MixingReport rep;
    int firstOfSuffix = horizon + 1;
    for (int n = horizon; n >= 1; --n) {
        if (connects(n))
            firstOfSuffix = n;
        else
            break;
    }
    // a single connecting lag at the horizon is no evidence (periodic
    // structures connect at every other lag); require a suffix of length >= 2
    if (firstOfSuffix + 1 <= horizon) {
        rep.mixing = true;
        rep.first = firstOfSuffix;
    }
    return rep;
}

/// Number of distinct rows over the truncated alphabet plus the tail-row
/// class when it is not already represented.
inline int check_finitely_many_images(const TransitionStructure& ts) {
    std::set<std::vector<std::uint8_t>> distinct(ts.rows.begin(), ts.rows.end());
    int count = static_cast<int>(distinct.size());
    if (ts.tailRowAllOnes) {
        std::vector<std::uint8_t> ones(static_cast<std::size_t>(ts.alphabet), 1);
        if (!distinct.count(ones)) ++count;
    }
    return count;
}

inline std::string cylinder_to_csv(const CylinderRect& rect) {
    std::ostringstream os;
    os.precision(17);
    os << "kind,word,grid_index,coord\n";
    for (std::size_t k = 0; k < rect.left.size(); ++k)
        os << "cylinder_left," << rect.word.str() << ',' << k << ',' << rect.left.values[k] << '\n';
    for (std::size_t k = 0; k < rect.right.size(); ++k)
        os << "cylinder_right," << rect.word.str() << ',' << k << ',' << rect.right.values[k] << '\n';
    return os.str();
}

inline std::string strip_to_csv(const StripRect& strip) {
    std::ostringstream os;
    os.precision(17);
    os << "kind,word,grid_index,coord\n";
    for (std::size_t k = 0; k < strip.bottom.size(); ++k)
        os << "strip_bottom," << strip.word.str() << ',' << k << ',' << strip.bottom.values[k] << '\n';
    for (std::size_t k = 0; k < strip.top.size(); ++k)
        os << "strip_top," << strip.word.str() << ',' << k << ',' << strip.top.values[k] << '\n';
    return os.str();
}

}  // namespace hypershift
