#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "hypershift/core.hpp"

/// Sampled boundary curves and the curvilinear rectangle/strip types built
/// from them. Boundaries are polylines over a uniform grid of the transverse
/// coordinate; every constructed boundary in this library has slope at most
/// alpha < 1, which keeps piecewise-linear interpolation error second order.
namespace hypershift {

inline constexpr int kDefaultGraphSamples = 257;

/// Graph of a scalar function over a uniform grid on [0, 1].
/// For a stable-side boundary the abscissa is y and values are x(y);
/// for an unstable-side boundary the abscissa is x and values are y(x).
struct SampledGraph {
    std::vector<double> values;  // values[k] at abscissa k / (n - 1)

    SampledGraph() = default;
    explicit SampledGraph(std::vector<double> v) : values(std::move(v)) {
        if (values.size() < 2) throw std::invalid_argument("SampledGraph: need at least 2 samples");
    }

    static SampledGraph constant(double c, int samples = kDefaultGraphSamples) {
        return SampledGraph(std::vector<double>(static_cast<std::size_t>(samples), c));
    }

    std::size_t size() const { return values.size(); }

    double abscissa(std::size_t k) const {
        return static_cast<double>(k) / static_cast<double>(values.size() - 1);
    }

    // linear interpolation; t is clamped to [0, 1]
    double operator()(double t) const {
        const double n1 = static_cast<double>(values.size() - 1);
        double s = std::clamp(t, 0.0, 1.0) * n1;
        auto k = static_cast<std::size_t>(s);
        if (k >= values.size() - 1) return values.back();
        const double frac = s - static_cast<double>(k);
        return values[k] + frac * (values[k + 1] - values[k]);
    }

    double min_value() const { return *std::min_element(values.begin(), values.end()); }
    double max_value() const { return *std::max_element(values.begin(), values.end()); }

    // largest |dv/dt| over grid intervals
    double max_slope() const {
        const double h = 1.0 / static_cast<double>(values.size() - 1);
        double m = 0.0;
        for (std::size_t k = 0; k + 1 < values.size(); ++k)
            m = std::max(m, std::abs(values[k + 1] - values[k]) / h);
        return m;
    }

    // centered finite-difference slope at abscissa t (one-sided at the ends)
    double slope_at(double t) const {
        const std::size_t n = values.size();
        const double h = 1.0 / static_cast<double>(n - 1);
        double s = std::clamp(t, 0.0, 1.0) * static_cast<double>(n - 1);
        auto k = static_cast<std::size_t>(std::min(s, static_cast<double>(n - 2)));
        return (values[k + 1] - values[k]) / h;
    }
};

/// Branch domain: full height in the square, bounded left/right by graphs x(y).
struct FullHeightRect {
    int index = 0;
    SampledGraph left;
    SampledGraph right;

    double width_at(double y) const { return right(y) - left(y); }

    double width_max() const {
        double w = 0.0;
        for (std::size_t k = 0; k < left.size(); ++k)
            w = std::max(w, right.values[k] - left.values[k]);
        return w;
    }

    double width_min() const {
        double w = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < left.size(); ++k)
            w = std::min(w, right.values[k] - left.values[k]);
        return w;
    }

    /// Interior relative to the square: boundaries shared between adjacent
    /// domains are excluded, but where a boundary coincides with the edge of
    /// the square itself the edge belongs to the domain (so corner fixed
    /// points such as the origin have well-defined orbits).
    bool contains_interior(const Point& z) const {
        if (z.y < 0.0 || z.y > 1.0) return false;
        const double l = left(z.y), r = right(z.y);
        const bool leftOk = z.x > l || (l <= kBoundaryTol && z.x >= l);
        const bool rightOk = z.x < r || (r >= 1.0 - kBoundaryTol && z.x <= r);
        return leftOk && rightOk;
    }

    void validate(double alpha) const {
        if (left.size() != right.size())
            throw std::invalid_argument("FullHeightRect: boundary sample counts differ");
        if (left.max_slope() > alpha + 1e-9 || right.max_slope() > alpha + 1e-9)
            throw std::invalid_argument("FullHeightRect: boundary slope exceeds alpha");
        if (width_min() <= 0.0)
            throw std::invalid_argument("FullHeightRect: left boundary not strictly left of right");
    }
};

/// Branch image: full width in the square, bounded below/above by graphs y(x).
struct FullWidthStrip {
    SampledGraph bottom;
    SampledGraph top;

    double height_at(double x) const { return top(x) - bottom(x); }

    bool contains_interior(const Point& z) const {
        return z.x >= 0.0 && z.x <= 1.0 && z.y > bottom(z.x) && z.y < top(z.x);
    }

    void validate(double alpha) const {
        if (bottom.size() != top.size())
            throw std::invalid_argument("FullWidthStrip: boundary sample counts differ");
        if (bottom.max_slope() > alpha + 1e-9 || top.max_slope() > alpha + 1e-9)
            throw std::invalid_argument("FullWidthStrip: boundary slope exceeds alpha");
        for (std::size_t k = 0; k < bottom.size(); ++k)
            if (top.values[k] - bottom.values[k] <= 0.0)
                throw std::invalid_argument("FullWidthStrip: bottom not strictly below top");
    }
};

}  // namespace hypershift
