#pragma once

// Shared helpers for the test suite. Reference computations here are
// deliberately independent of the library code paths they check:
// extended precision accumulation, direct loops, no shared kernels.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "destripe/cube.hpp"

namespace testsup {

using destripe::Cube;
using destripe::CubeTuple;
using destripe::Dims;

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline Cube random_cube(std::mt19937_64& rng, Dims d, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Cube c(d);
    for (std::size_t n = 0; n < c.size(); ++n) c[n] = u(rng);
    return c;
}

inline Cube random_positive_cube(std::mt19937_64& rng, Dims d, double lo = 0.1, double hi = 2.0) {
    return random_cube(rng, d, lo, hi);
}

inline CubeTuple random_tuple(std::mt19937_64& rng, const std::vector<Dims>& dims,
                              double lo = -1.0, double hi = 1.0) {
    CubeTuple t;
    t.reserve(dims.size());
    for (Dims d : dims) t.push_back(random_cube(rng, d, lo, hi));
    return t;
}

/// Extended-precision inner product, summed by direct loop.
inline long double ref_dot(const Cube& a, const Cube& b) {
    long double s = 0.0L;
    for (std::size_t n = 0; n < a.size(); ++n)
        s += static_cast<long double>(a[n]) * static_cast<long double>(b[n]);
    return s;
}

inline long double ref_fro(const Cube& a) { return std::sqrt(static_cast<double>(ref_dot(a, a))); }

/// |<A x, y> - <x, A* y>| against the normalized bound tol*(|x||y| + 1).
template <class Fwd, class Adj>
bool adjoint_identity_holds(Fwd&& fwd, Adj&& adj, const Cube& x, const Cube& y, double tol) {
    const double lhs = destripe::dot(fwd(x), y);
    const double rhs = destripe::dot(x, adj(y));
    return std::abs(lhs - rhs) <= tol * (destripe::fro_norm(x) * destripe::fro_norm(y) + 1.0);
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / (std::abs(want) + 1.0);
}

inline double max_abs_diff(const Cube& a, const Cube& b) {
    double m = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, std::abs(a[n] - b[n]));
    return m;
}

inline double tuple_max_abs_diff(const CubeTuple& a, const CubeTuple& b) {
    double m = 0.0;
    for (std::size_t q = 0; q < a.size(); ++q) m = std::max(m, max_abs_diff(a[q], b[q]));
    return m;
}

} // namespace testsup
