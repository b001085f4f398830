#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace etchprobe {

/// Bad configuration, file format, or usage. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure (singular system, residual not met, ...). CLI exit code 3.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Vec3 = std::array<double, 3>;

/// Axis-aligned box, lo inclusive / hi exclusive for point queries.
struct Box3 {
    Vec3 lo{0.0, 0.0, 0.0};
    Vec3 hi{0.0, 0.0, 0.0};

    double extent(int axis) const { return hi[axis] - lo[axis]; }

    double volume() const {
        return extent(0) * extent(1) * extent(2);
    }

    bool empty() const {
        return hi[0] <= lo[0] || hi[1] <= lo[1] || hi[2] <= lo[2];
    }

    bool contains(const Vec3& p) const {
        return p[0] >= lo[0] && p[0] < hi[0] && p[1] >= lo[1] && p[1] < hi[1] &&
               p[2] >= lo[2] && p[2] < hi[2];
    }

    Box3 clipped(int axis, double min_coord) const {
        Box3 out = *this;
        out.lo[axis] = std::max(out.lo[axis], min_coord);
        return out;
    }

    static Box3 intersection(const Box3& a, const Box3& b) {
        Box3 out;
        for (int k = 0; k < 3; ++k) {
            out.lo[k] = std::max(a.lo[k], b.lo[k]);
            out.hi[k] = std::min(a.hi[k], b.hi[k]);
        }
        return out;
    }

    bool overlaps(const Box3& other) const {
        return !intersection(*this, other).empty();
    }
};

inline bool nearly_equal(double a, double b, double rel_tol, double abs_tol = 0.0) {
    const double diff = std::abs(a - b);
    return diff <= abs_tol || diff <= rel_tol * std::max(std::abs(a), std::abs(b));
}

/// splitmix64 step; used to derive independent RNG streams from one seed.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

} // namespace etchprobe
