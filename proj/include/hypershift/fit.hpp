#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

/// Log-linear least squares for geometric-decay data: fits values v_k ~ c * theta^k
/// and reports the relative residual in log scale. Sequences that are exactly
/// zero (products of families whose relevant variation vanishes identically)
/// are reported as degenerate exact fits rather than fit failures.
namespace hypershift {

struct GeometricFit {
    double c = 0.0;
    double theta = 0.0;
    double logResidual = 0.0;   // RMS log-space residual / max(1, log-range)
    bool exactZero = false;     // every sample was below the zero floor
    bool valid = false;

    static constexpr double kZeroFloor = 1e-14;
};

/// ks[j], vs[j]: depth and measured value. Requires at least two points above
/// the zero floor for a genuine fit.
inline GeometricFit fit_geometric_decay(const std::vector<double>& ks, const std::vector<double>& vs) {
    GeometricFit out;
    std::vector<double> xs, ys;
    for (std::size_t j = 0; j < vs.size(); ++j) {
        if (vs[j] > GeometricFit::kZeroFloor) {
            xs.push_back(ks[j]);
            ys.push_back(std::log(vs[j]));
        }
    }
    if (xs.empty()) {
        out.exactZero = true;
        out.valid = true;
        out.c = 0.0;
        out.theta = 0.0;
        out.logResidual = 0.0;
        return out;
    }
    if (xs.size() < 2) return out;   // not enough signal, invalid
    const auto n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        sx += xs[j];
        sy += ys[j];
        sxx += xs[j] * xs[j];
        sxy += xs[j] * ys[j];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-30) return out;
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    double rss = 0.0, lo = ys[0], hi = ys[0];
    for (std::size_t j = 0; j < xs.size(); ++j) {
        const double r = ys[j] - (intercept + slope * xs[j]);
        rss += r * r;
        lo = std::min(lo, ys[j]);
        hi = std::max(hi, ys[j]);
    }
    out.c = std::exp(intercept);
    out.theta = std::exp(slope);
    out.logResidual = std::sqrt(rss / n) / std::max(1.0, hi - lo);
    out.valid = true;
    return out;
}

}  // namespace hypershift
