#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

/// Core value types shared by every module: points of the unit square,
/// tangent vectors, two-jets of a branch map, the max norm, and the small
/// exception hierarchy used for quantitative failures.
namespace hypershift {

inline constexpr double kBoundaryTol = 1e-12;   // slack allowed on [0,1] membership
inline constexpr double kMarginTol = 1e-12;     // inequality slack absorbing roundoff
inline constexpr double kRootTol = 1e-13;       // scalar root/bisection tolerance

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct Vec2 {
    double v1 = 0.0;
    double v2 = 0.0;
};

// max norm |(v1,v2)| = max(|v1|,|v2|); all distances in this library use it
inline double norm_max(const Vec2& v) { return std::max(std::abs(v.v1), std::abs(v.v2)); }

inline double dist_max(const Point& a, const Point& b) {
    return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

inline bool in_unit_square(const Point& z, double tol = kBoundaryTol) {
    return std::isfinite(z.x) && std::isfinite(z.y) &&
           z.x >= -tol && z.x <= 1.0 + tol && z.y >= -tol && z.y <= 1.0 + tol;
}

/// Value, first and second partial derivatives of one branch at one point.
struct Jet2 {
    double f1 = 0.0, f2 = 0.0;              // image coordinates
    double f1x = 0.0, f1y = 0.0;            // first partials of the first coordinate
    double f2x = 0.0, f2y = 0.0;            // first partials of the second coordinate
    double f1xx = 0.0, f1xy = 0.0, f1yy = 0.0;
    double f2xx = 0.0, f2xy = 0.0, f2yy = 0.0;

    Point image() const { return {f1, f2}; }

    // |f1x f2y - f1y f2x|, absolute Jacobian determinant
    double jacobian_abs() const { return std::abs(f1x * f2y - f1y * f2x); }

    // max over the six second partials, the second-derivative magnitude used
    // by the distortion checks
    double second_derivative_max() const {
        double m = std::abs(f1xx);
        m = std::max(m, std::abs(f1xy));
        m = std::max(m, std::abs(f1yy));
        m = std::max(m, std::abs(f2xx));
        m = std::max(m, std::abs(f2xy));
        m = std::max(m, std::abs(f2yy));
        return m;
    }
};

class hyperbolicity_error : public std::runtime_error {
public:
    explicit hyperbolicity_error(const std::string& what) : std::runtime_error(what) {}
};

class cone_error : public std::runtime_error {
public:
    explicit cone_error(const std::string& what) : std::runtime_error(what) {}
};

class holder_error : public std::runtime_error {
public:
    explicit holder_error(const std::string& what) : std::runtime_error(what) {}
};

class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// Deterministic RNG wrapper. The standard distributions are
/// implementation-defined, so uniforms are mapped from raw 64-bit draws to
/// keep outputs identical across compilers for a fixed seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // integer in [lo, hi] inclusive
    int uniform_int(int lo, int hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(eng_() % span);
    }

    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

}  // namespace hypershift
