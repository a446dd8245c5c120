#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "hypershift/fit.hpp"
#include "hypershift/manifolds.hpp"
#include "hypershift/parallel.hpp"
#include "hypershift/symbolic.hpp"

/// Orbit statistics: Birkhoff averages, the Lyapunov exponent along the
/// unstable field, correlation decay for Hölder observables from one long
/// orbit, an Ulam-discretized transfer operator as the independent route to
/// the decay rate, and the cylinder frequency-versus-leaf-length comparison.
namespace hypershift {

struct Orbit {
    std::uint64_t seed = 0;
    Point start{};
    int length = 0;
    std::vector<Point> points;
    std::vector<int> escapePositions;   // indices whose point had no branch
    bool truncationWarning = false;     // escape rate above 1 percent

    bool escaped_at(int k) const {
        return std::binary_search(escapePositions.begin(), escapePositions.end(), k);
    }
};

/// Deterministic orbit of the almost-everywhere map. Escapes restart from a
/// seeded random interior point with the event recorded; identical
/// (seed, start, length) give bit-identical orbits.
inline Orbit simulate(const MapFamily& fam, Point start, int length, std::uint64_t seed) {
    if (length < 1) throw std::invalid_argument("simulate: length must be >= 1");
    if (!in_unit_square(start)) throw std::invalid_argument("simulate: start outside the square");
    Orbit orbit;
    orbit.seed = seed;
    orbit.start = start;
    orbit.length = length;
    orbit.points.reserve(static_cast<std::size_t>(length));
    Rng rng(seed);
    Point z = start;
    for (int k = 0; k < length; ++k) {
        orbit.points.push_back(z);
        auto i = fam.locate(z);
        if (!i) {
            orbit.escapePositions.push_back(k);
            do {
                z = Point{rng.uniform01(), rng.uniform01()};
            } while (!fam.locate(z));
            continue;
        }
        z = fam.branch(*i).eval(z).image();
    }
    orbit.truncationWarning =
        static_cast<double>(orbit.escapePositions.size()) > 0.01 * static_cast<double>(length);
    return orbit;
}

struct Observable {
    std::string name;
    std::function<double(Point)> eval;
    double holderExponent = 1.0;        // gamma in (0, 1]
    double holderConstant = 1.0;        // c with |f(x) - f(y)| <= c |x - y|^gamma
    bool piecewiseOnly = false;         // Hölder within branch interiors only
};

inline Observable make_coordinate_observable() {
    return {"x", [](Point z) { return z.x; }, 1.0, 1.0, false};
}

inline Observable make_constant_observable(double value) {
    return {"const", [value](Point) { return value; }, 1.0, 0.0, false};
}

/// log of the unstable expansion rate, evaluated pointwise with the leaf
/// slope of the built-in families (their unstable leaves are horizontal).
/// Hölder only within branch interiors; the value jumps across domains.
inline Observable make_log_expansion_observable(const MapFamily& fam) {
    auto eval = [fam](Point z) {
        auto i = fam.locate(z);
        if (!i) return 0.0;
        return std::log(unstable_derivative(fam.jet(*i, z), 0.0));
    };
    return {"log_du", eval, 1.0, 4.0 * fam.truncN, true};
}

/// Spot-check of the Hölder bound on random pairs (same-branch pairs when
/// the observable is only piecewise regular).
inline bool validate_observable(const MapFamily& fam, const Observable& obs, int samples,
                                std::uint64_t seed) {
    Rng rng(seed);
    for (int s = 0; s < samples; ++s) {
        Point a{rng.uniform01(), rng.uniform01()};
        Point b{rng.uniform01(), rng.uniform01()};
        if (obs.piecewiseOnly) {
            auto ia = fam.locate(a);
            if (!ia) continue;
            const auto& dom = fam.branch(*ia).domain;
            b = Point{rng.uniform(dom.left(a.y), dom.right(a.y)), a.y};
        }
        const double lhs = std::abs(obs.eval(a) - obs.eval(b));
        const double rhs = obs.holderConstant * std::pow(dist_max(a, b), obs.holderExponent);
        if (lhs > rhs + 1e-12) return false;
    }
    return true;
}

/// Time average over the orbit, escape steps excluded.
inline double birkhoff(const Orbit& orbit, const Observable& obs) {
    if (orbit.length < 1000) throw std::invalid_argument("birkhoff: orbit too short");
    double sum = 0.0;
    std::size_t count = 0, nextEscape = 0;
    for (std::size_t k = 0; k < orbit.points.size(); ++k) {
        if (nextEscape < orbit.escapePositions.size() &&
            static_cast<std::size_t>(orbit.escapePositions[nextEscape]) == k) {
            ++nextEscape;
            continue;
        }
        sum += obs.eval(orbit.points[k]);
        ++count;
    }
    return sum / static_cast<double>(count);
}

/// Average unstable expansion exponent along the orbit, slopes transported
/// through the differential and reset at restarts. Seeding the slope at 0 is
/// exact for the built-in families and converges geometrically in general.
inline double lyapunov(const MapFamily& fam, const Orbit& orbit) {
    if (orbit.length < 10000) throw std::invalid_argument("lyapunov: orbit too short");
    double sum = 0.0;
    std::size_t count = 0;
    double a = 0.0;
    std::size_t nextEscape = 0;
    for (std::size_t k = 0; k < orbit.points.size(); ++k) {
        if (nextEscape < orbit.escapePositions.size() &&
            static_cast<std::size_t>(orbit.escapePositions[nextEscape]) == k) {
            ++nextEscape;
            a = 0.0;
            continue;
        }
        auto i = fam.locate(orbit.points[k]);
        if (!i) continue;
        const Jet2 j = fam.jet(*i, orbit.points[k]);
        sum += std::log(unstable_derivative(j, a));
        a = slope_transport(j, a);
        ++count;
    }
    return sum / static_cast<double>(count);
}

/// Difference between the two entropy estimators run on the same orbit: the
/// time average of the pointwise log-expansion observable against the
/// transported-slope exponent.
inline double entropy_check(const MapFamily& fam, const Orbit& orbit) {
    return std::abs(birkhoff(orbit, make_log_expansion_observable(fam)) - lyapunov(fam, orbit));
}

struct DecayFit {
    enum class Method { orbit, transfer };
    Method method = Method::orbit;
    std::vector<int> lags;
    std::vector<double> correlations;
    double fittedC = 0.0;
    double fittedEta = 0.0;
    bool valid = false;
    int lagsRetained = 0;
    double noiseFloor = 0.0;
    // transfer-method extras
    double leadingEigenvalue = 0.0;
    double secondEigenvalue = 0.0;
    double stationaryUniformity = 0.0;   // max deviation of the stationary density from uniform
};

/// Correlation decay from one long orbit: C(n) over the requested lags with
/// both observables centered, pairs spanning a restart excluded, and the
/// geometric fit restricted to lags above the sampling noise floor
/// 3 / sqrt(length).
inline DecayFit correlation(const MapFamily& fam, const Observable& obs1, const Observable& obs2,
                            int orbitLength, int maxLag, std::uint64_t seed) {
    if (orbitLength < 1000) throw std::invalid_argument("correlation: orbit too short");
    if (maxLag < 1 || maxLag > 20) throw std::invalid_argument("correlation: lags must be in [1, 20]");
    const Orbit orbit = simulate(fam, {0.1234567, 0.7654321}, orbitLength, seed);

    std::vector<double> v1(orbit.points.size()), v2(orbit.points.size());
    for (std::size_t k = 0; k < orbit.points.size(); ++k) {
        v1[k] = obs1.eval(orbit.points[k]);
        v2[k] = obs2.eval(orbit.points[k]);
    }
    const double m1 = std::accumulate(v1.begin(), v1.end(), 0.0) / static_cast<double>(v1.size());
    const double m2 = std::accumulate(v2.begin(), v2.end(), 0.0) / static_cast<double>(v2.size());

    DecayFit fit;
    fit.method = DecayFit::Method::orbit;
    fit.noiseFloor = 3.0 / std::sqrt(static_cast<double>(orbitLength));
    const auto& esc = orbit.escapePositions;
    for (int n = 0; n <= maxLag; ++n) {
        double acc = 0.0;
        std::size_t count = 0, nextEscape = 0;
        for (std::size_t k = 0; k + static_cast<std::size_t>(n) < orbit.points.size(); ++k) {
            while (nextEscape < esc.size() && static_cast<std::size_t>(esc[nextEscape]) < k)
                ++nextEscape;
            if (nextEscape < esc.size() &&
                static_cast<std::size_t>(esc[nextEscape]) <= k + static_cast<std::size_t>(n))
                continue;   // the pair spans a restart
            acc += (v1[k] - m1) * (v2[k + static_cast<std::size_t>(n)] - m2);
            ++count;
        }
        fit.lags.push_back(n);
        fit.correlations.push_back(count ? acc / static_cast<double>(count) : 0.0);
    }

    std::vector<double> ks, vs;
    for (std::size_t j = 0; j < fit.lags.size(); ++j) {
        if (std::abs(fit.correlations[j]) > fit.noiseFloor) {
            ks.push_back(fit.lags[j]);
            vs.push_back(std::abs(fit.correlations[j]));
        }
    }
    fit.lagsRetained = static_cast<int>(ks.size());
    const auto g = fit_geometric_decay(ks, vs);
    fit.fittedC = g.c;
    fit.fittedEta = g.theta;
    fit.valid = g.valid && !g.exactZero && fit.lagsRetained >= 3;
    return fit;
}

namespace detail {

struct SparseTransfer {
    int bins = 0;
    // rows[b] lists (target bin, weight); rows are normalized to sum 1
    std::vector<std::vector<std::pair<int, double>>> rows;

    std::vector<double> apply_density(const std::vector<double>& rho) const {
        std::vector<double> out(static_cast<std::size_t>(bins), 0.0);
        for (int b = 0; b < bins; ++b)
            for (const auto& [t, w] : rows[static_cast<std::size_t>(b)])
                out[static_cast<std::size_t>(t)] += rho[static_cast<std::size_t>(b)] * w;
        return out;
    }

    std::vector<double> apply_function(const std::vector<double>& g) const {
        std::vector<double> out(static_cast<std::size_t>(bins), 0.0);
        for (int b = 0; b < bins; ++b) {
            double acc = 0.0;
            for (const auto& [t, w] : rows[static_cast<std::size_t>(b)])
                acc += w * g[static_cast<std::size_t>(t)];
            out[static_cast<std::size_t>(b)] = acc;
        }
        return out;
    }
};

inline bool is_product_structure(const MapFamily& fam) {
    for (const auto& b : fam.branches) {
        for (double y : {0.0, 0.33, 0.71, 1.0}) {
            const double x = 0.5 * (b.domain.left(y) + b.domain.right(y));
            const Jet2 j = b.eval({x, y});
            if (std::abs(j.f2x) > 1e-13 || std::abs(j.f1y) > 1e-13) return false;
        }
    }
    return true;
}

/// Exact bin-transition weights of the one-dimensional expanding factor of a
/// product family: preimage intervals of bin edges through each monotone
/// branch, survivor-normalized per row.
inline SparseTransfer build_transfer_1d(const MapFamily& fam, int bins) {
    SparseTransfer T;
    T.bins = bins;
    T.rows.assign(static_cast<std::size_t>(bins), {});
    const double h = 1.0 / bins;
    std::vector<std::map<int, double>> accum(static_cast<std::size_t>(bins));
    for (const auto& b : fam.branches) {
        const double midY = 0.5 * (b.strip.bottom(0.5) + b.strip.top(0.5));
        auto pre = [&](double X) { return b.inverse({X, midY}).x; };
        for (int t = 0; t < bins; ++t) {
            double p = pre(t * h), q = pre((t + 1) * h);
            if (p > q) std::swap(p, q);
            const int bLo = std::max(0, static_cast<int>(std::floor(p / h)));
            const int bHi = std::min(bins - 1, static_cast<int>(std::floor((q - 1e-15) / h)));
            for (int src = bLo; src <= bHi; ++src) {
                const double lo = std::max(p, src * h);
                const double hi = std::min(q, (src + 1) * h);
                if (hi > lo) accum[static_cast<std::size_t>(src)][t] += (hi - lo) / h;
            }
        }
    }
    for (int src = 0; src < bins; ++src) {
        double total = 0.0;
        for (const auto& [t, w] : accum[static_cast<std::size_t>(src)]) total += w;
        auto& row = T.rows[static_cast<std::size_t>(src)];
        if (total <= 0.0) {
            row.emplace_back(src, 1.0);   // isolated bin, keep mass in place
            continue;
        }
        row.reserve(accum[static_cast<std::size_t>(src)].size());
        for (const auto& [t, w] : accum[static_cast<std::size_t>(src)]) row.emplace_back(t, w / total);
    }
    return T;
}

/// Sampled cell-transition weights of the full two-dimensional map for
/// sheared families; each x-bin column is split into yBins cells probed on a
/// subgrid.
inline SparseTransfer build_transfer_2d(const MapFamily& fam, int xBins, int yBins) {
    SparseTransfer T;
    const int cells = xBins * yBins;
    T.bins = cells;
    T.rows.assign(static_cast<std::size_t>(cells), {});
    const double hx = 1.0 / xBins, hy = 1.0 / yBins;
    const int probe = 4;
    for (int bx = 0; bx < xBins; ++bx) {
        for (int by = 0; by < yBins; ++by) {
            std::map<int, double> acc;
            int hits = 0;
            for (int px = 0; px < probe; ++px)
                for (int py = 0; py < probe; ++py) {
                    const Point z{(bx + (px + 0.5) / probe) * hx, (by + (py + 0.5) / probe) * hy};
                    auto i = fam.locate(z);
                    if (!i) continue;
                    const Point w = fam.branch(*i).eval(z).image();
                    const int tx = std::min(xBins - 1, std::max(0, static_cast<int>(w.x / hx)));
                    const int ty = std::min(yBins - 1, std::max(0, static_cast<int>(w.y / hy)));
                    acc[tx * yBins + ty] += 1.0;
                    ++hits;
                }
            auto& row = T.rows[static_cast<std::size_t>(bx * yBins + by)];
            if (hits == 0) {
                row.emplace_back(bx * yBins + by, 1.0);
                continue;
            }
            for (const auto& [t, w] : acc) row.emplace_back(t, w / hits);
        }
    }
    return T;
}

}  // namespace detail

/// Transfer-operator route to the decay rate: Ulam discretization of the
/// expanding factor (or of the full square for sheared families), leading
/// eigenvalue by power iteration, correlations of the coordinate observable
/// by matrix powers, and the second eigenvalue from their decay ratios.
inline DecayFit ulam_decay(const MapFamily& fam, int bins, int maxLag) {
    if (bins < 256 || (bins & (bins - 1)) != 0)
        throw std::invalid_argument("ulam_decay: bins must be a power of two >= 256");
    if (maxLag < 1 || maxLag > 30) throw std::invalid_argument("ulam_decay: lags must be in [1, 30]");

    const bool product = detail::is_product_structure(fam);
    detail::SparseTransfer T = product ? detail::build_transfer_1d(fam, bins)
                                       : detail::build_transfer_2d(fam, std::min(bins, 512), 64);

    // stationary density and leading eigenvalue
    std::vector<double> rho(static_cast<std::size_t>(T.bins), 1.0 / T.bins);
    double leading = 0.0;
    for (int iter = 0; iter < 300; ++iter) {
        auto next = T.apply_density(rho);
        const double mass = std::accumulate(next.begin(), next.end(), 0.0);
        leading = mass / std::accumulate(rho.begin(), rho.end(), 0.0);
        for (auto& v : next) v /= mass;
        double delta = 0.0;
        for (std::size_t k = 0; k < rho.size(); ++k) delta = std::max(delta, std::abs(next[k] - rho[k]));
        rho = std::move(next);
        if (delta < 1e-14) break;
    }

    DecayFit fit;
    fit.method = DecayFit::Method::transfer;
    fit.leadingEigenvalue = leading;
    double uniformity = 0.0;
    for (double v : rho) uniformity = std::max(uniformity, std::abs(v * T.bins - 1.0));
    fit.stationaryUniformity = uniformity;

    // coordinate observable on bins, centered against the stationary density
    std::vector<double> g(static_cast<std::size_t>(T.bins));
    if (product) {
        for (int b = 0; b < T.bins; ++b) g[static_cast<std::size_t>(b)] = (b + 0.5) / T.bins;
    } else {
        const int yBins = 64, xBins = T.bins / yBins;
        for (int b = 0; b < T.bins; ++b) g[static_cast<std::size_t>(b)] = ((b / yBins) + 0.5) / xBins;
    }
    double mean = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) mean += rho[k] * g[k];
    std::vector<double> centered(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) centered[k] = g[k] - mean;

    std::vector<double> iter = centered;
    std::vector<double> norms;
    for (int n = 0; n <= maxLag; ++n) {
        double c = 0.0, norm = 0.0;
        for (std::size_t k = 0; k < iter.size(); ++k) {
            c += rho[k] * centered[k] * iter[k];
            norm += rho[k] * std::abs(iter[k]);
        }
        fit.lags.push_back(n);
        fit.correlations.push_back(c);
        norms.push_back(norm);
        iter = T.apply_function(iter);
        // re-center against the stationary density to keep the leading mode out
        double drift = 0.0;
        for (std::size_t k = 0; k < iter.size(); ++k) drift += rho[k] * iter[k];
        for (auto& v : iter) v -= drift;
    }

    // second eigenvalue from the tail of the norm-decay ratios
    std::vector<double> ratios;
    for (std::size_t n = 4; n + 1 < norms.size(); ++n)
        if (norms[n] > 1e-300) ratios.push_back(norms[n + 1] / norms[n]);
    if (!ratios.empty()) {
        std::nth_element(ratios.begin(), ratios.begin() + static_cast<std::ptrdiff_t>(ratios.size() / 2),
                         ratios.end());
        fit.secondEigenvalue = ratios[ratios.size() / 2];
    }

    std::vector<double> ks, vs;
    for (std::size_t j = 0; j < fit.lags.size(); ++j)
        if (std::abs(fit.correlations[j]) > 1e-13) {
            ks.push_back(fit.lags[j]);
            vs.push_back(std::abs(fit.correlations[j]));
        }
    fit.lagsRetained = static_cast<int>(ks.size());
    const auto gfit = fit_geometric_decay(ks, vs);
    fit.fittedC = gfit.c;
    fit.fittedEta = gfit.theta;
    fit.valid = gfit.valid && !gfit.exactZero;
    return fit;
}

struct CylinderRatioRow {
    Word word;
    long long visits = 0;
    double frequency = 0.0;
    double sectionLength = 0.0;
    double ratio = 0.0;
};

struct CylinderRatioReport {
    std::vector<CylinderRatioRow> rows;
    double minRatio = 0.0, maxRatio = 0.0;
    double minRatioRank1 = 0.0, maxRatioRank1 = 0.0;
    long long minVisits = 0;
};

/// Visit frequencies of cylinders of rank up to maxRank against the lengths
/// of the reference leaf's sections of the same cylinders: the two measures
/// the theory identifies, compared as ratios on every word with enough
/// visits.
inline CylinderRatioReport gibbs_vs_srb(const MapFamily& fam, int maxRank, int orbitLength,
                                        std::uint64_t seed = 1, long long minVisits = 100) {
    if (maxRank < 1 || maxRank > 4) throw std::invalid_argument("gibbs_vs_srb: rank must be in [1, 4]");
    const Orbit orbit = simulate(fam, {0.1234567, 0.7654321}, orbitLength, seed);

    std::vector<int> symbols(orbit.points.size(), -1);
    for (std::size_t k = 0; k < orbit.points.size(); ++k) {
        auto i = fam.locate(orbit.points[k]);
        symbols[k] = i ? *i : -1;
    }

    Word ones;
    for (int k = 0; k < 30; ++k) ones.symbols.push_back(1);
    const ManifoldCurve ref = unstable_curve(fam, ones, 30);
    auto section_length = [&](const Word& w) {
        auto cyl = build_cylinder(fam, w);
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
    };

    CylinderRatioReport rep;
    rep.minVisits = minVisits;
    rep.minRatio = rep.minRatioRank1 = std::numeric_limits<double>::infinity();
    rep.maxRatio = rep.maxRatioRank1 = 0.0;
    const int base = fam.truncN + 1;
    for (int rank = 1; rank <= maxRank; ++rank) {
        std::map<long long, long long> counts;
        long long starts = 0;
        for (std::size_t k = 0; k + static_cast<std::size_t>(rank) <= symbols.size(); ++k) {
            long long key = 0;
            bool ok = true;
            for (int j = 0; j < rank; ++j) {
                const int s = symbols[k + static_cast<std::size_t>(j)];
                if (s < 0) {
                    ok = false;
                    break;
                }
                key = key * base + s;
            }
            if (!ok) continue;
            ++counts[key];
            ++starts;
        }
        for (const auto& [key, visits] : counts) {
            if (visits < minVisits) continue;
            CylinderRatioRow row;
            long long k = key;
            std::vector<int> rev;
            for (int j = 0; j < rank; ++j) {
                rev.push_back(static_cast<int>(k % base));
                k /= base;
            }
            row.word.symbols.assign(rev.rbegin(), rev.rend());
            row.visits = visits;
            row.frequency = static_cast<double>(visits) / static_cast<double>(starts);
            row.sectionLength = section_length(row.word);
            row.ratio = row.frequency / row.sectionLength;
            rep.minRatio = std::min(rep.minRatio, row.ratio);
            rep.maxRatio = std::max(rep.maxRatio, row.ratio);
            if (rank == 1) {
                rep.minRatioRank1 = std::min(rep.minRatioRank1, row.ratio);
                rep.maxRatioRank1 = std::max(rep.maxRatioRank1, row.ratio);
            }
            rep.rows.push_back(std::move(row));
        }
    }
    return rep;
}

inline std::string decay_to_csv(const DecayFit& fit) {
    std::ostringstream os;
    os.precision(17);
    os << "lag,correlation,fit_c,fit_eta,method\n";
    const char* m = fit.method == DecayFit::Method::orbit ? "orbit" : "operator";
    for (std::size_t j = 0; j < fit.lags.size(); ++j)
        os << fit.lags[j] << ',' << fit.correlations[j] << ',' << fit.fittedC << ',' << fit.fittedEta
           << ',' << m << '\n';
    return os.str();
}

inline std::string cylinders_to_csv(const CylinderRatioReport& rep) {
    std::ostringstream os;
    os.precision(17);
    os << "cylinder,frequency,length,ratio\n";
    for (const auto& row : rep.rows)
        os << row.word.str() << ',' << row.frequency << ',' << row.sectionLength << ',' << row.ratio
           << '\n';
    return os.str();
}

}  // namespace hypershift
