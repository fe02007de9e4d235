#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "destripe/errors.hpp"

namespace destripe {

/// Extents of a dense 3-D tensor: n1 rows (vertical), n2 columns
/// (horizontal), n3 bands or frames (third axis).
struct Dims {
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    std::size_t n3 = 0;

    std::size_t volume() const { return n1 * n2 * n3; }

    friend bool operator==(const Dims& a, const Dims& b) = default;

    std::string str() const {
        return std::to_string(n1) + "x" + std::to_string(n2) + "x" + std::to_string(n3);
    }
};

/// Dense real 3-D array. The vertical index varies fastest in memory,
/// then the horizontal index, then the band index, so each band is a
/// column-major n1 x n2 matrix.
class Cube {
public:
    Cube() = default;

    explicit Cube(Dims d, double fill = 0.0) : dims_(d), data_(d.volume(), fill) {
        if (d.n1 == 0 || d.n2 == 0 || d.n3 == 0)
            throw shape_error("Cube dims must be positive, got " + d.str());
    }

    const Dims& dims() const { return dims_; }
    std::size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](std::size_t lin) { return data_[lin]; }
    double operator[](std::size_t lin) const { return data_[lin]; }

    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
        return i + dims_.n1 * (j + dims_.n2 * k);
    }

    double& operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[index(i, j, k)]; }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const { return data_[index(i, j, k)]; }

    void fill(double v) { data_.assign(data_.size(), v); }

    Cube& operator+=(const Cube& o) {
        check_same(o);
        for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += o.data_[n];
        return *this;
    }

    Cube& operator-=(const Cube& o) {
        check_same(o);
        for (std::size_t n = 0; n < data_.size(); ++n) data_[n] -= o.data_[n];
        return *this;
    }

    Cube& operator*=(double a) {
        for (double& v : data_) v *= a;
        return *this;
    }

    friend Cube operator+(Cube a, const Cube& b) { return a += b; }
    friend Cube operator-(Cube a, const Cube& b) { return a -= b; }
    friend Cube operator*(double a, Cube x) { return x *= a; }

private:
    void check_same(const Cube& o) const {
        if (!(dims_ == o.dims_))
            throw shape_error("Cube dims mismatch: " + dims_.str() + " vs " + o.dims_.str());
    }

    Dims dims_;
    std::vector<double> data_;
};

/// Ordered list of cubes; the primal and dual variables of the solver
/// are tuples, not single arrays.
using CubeTuple = std::vector<Cube>;

inline Cube ones(Dims d) { return Cube(d, 1.0); }

/// Elementwise product. Dims must agree.
inline Cube hadamard(const Cube& a, const Cube& b) {
    if (!(a.dims() == b.dims()))
        throw shape_error("hadamard dims mismatch: " + a.dims().str() + " vs " + b.dims().str());
    Cube out = a;
    for (std::size_t n = 0; n < out.size(); ++n) out[n] *= b[n];
    return out;
}

/// dst += alpha * src, elementwise.
inline void add_scaled(Cube& dst, double alpha, const Cube& src) {
    if (!(dst.dims() == src.dims()))
        throw shape_error("add_scaled dims mismatch: " + dst.dims().str() + " vs " + src.dims().str());
    for (std::size_t n = 0; n < dst.size(); ++n) dst[n] += alpha * src[n];
}

/// Entrywise reciprocal. Every entry must be nonzero and finite.
inline Cube reciprocal(const Cube& x) {
    Cube out = x;
    for (std::size_t n = 0; n < out.size(); ++n) {
        if (out[n] == 0.0 || !std::isfinite(out[n]))
            throw config_error("reciprocal of zero or non-finite entry");
        out[n] = 1.0 / out[n];
    }
    return out;
}

/// Inner product in fixed storage order. The summation order never
/// changes, so results are bit-reproducible across runs.
inline double dot(const Cube& a, const Cube& b) {
    if (!(a.dims() == b.dims()))
        throw shape_error("dot dims mismatch: " + a.dims().str() + " vs " + b.dims().str());
    double s = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
    return s;
}

inline double fro_norm_sq(const Cube& a) { return dot(a, a); }
inline double fro_norm(const Cube& a) { return std::sqrt(fro_norm_sq(a)); }

inline double max_abs(const Cube& a) {
    double m = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, std::abs(a[n]));
    return m;
}

inline bool all_finite(const Cube& a) {
    for (std::size_t n = 0; n < a.size(); ++n)
        if (!std::isfinite(a[n])) return false;
    return true;
}

inline std::vector<Dims> dims_of(const CubeTuple& t) {
    std::vector<Dims> d;
    d.reserve(t.size());
    for (const Cube& c : t) d.push_back(c.dims());
    return d;
}

inline CubeTuple zeros_like(const CubeTuple& t) {
    CubeTuple out;
    out.reserve(t.size());
    for (const Cube& c : t) out.emplace_back(c.dims());
    return out;
}

inline double tuple_dot(const CubeTuple& a, const CubeTuple& b) {
    if (a.size() != b.size()) throw shape_error("tuple_dot arity mismatch");
    double s = 0.0;
    for (std::size_t m = 0; m < a.size(); ++m) s += dot(a[m], b[m]);
    return s;
}

inline double tuple_norm_sq(const CubeTuple& a) { return tuple_dot(a, a); }
inline double tuple_norm(const CubeTuple& a) { return std::sqrt(tuple_norm_sq(a)); }

inline CubeTuple hadamard(const CubeTuple& a, const CubeTuple& b) {
    if (a.size() != b.size()) throw shape_error("hadamard arity mismatch");
    CubeTuple out;
    out.reserve(a.size());
    for (std::size_t m = 0; m < a.size(); ++m) out.push_back(hadamard(a[m], b[m]));
    return out;
}

/// Differencing axis: 0 vertical (rows), 1 horizontal (columns),
/// 2 temporal (bands/frames).
enum class Axis { v = 0, h = 1, t = 2 };

namespace detail {

struct AxisView {
    std::size_t extent = 0;   // extent along the differencing axis
    std::size_t stride = 0;   // linear stride along that axis
    std::size_t outer_a = 0;  // extents and strides of the other two axes
    std::size_t stride_a = 0;
    std::size_t outer_b = 0;
    std::size_t stride_b = 0;
};

inline AxisView axis_view(const Dims& d, Axis axis) {
    const std::size_t ext[3] = {d.n1, d.n2, d.n3};
    const std::size_t str[3] = {1, d.n1, d.n1 * d.n2};
    const int a = static_cast<int>(axis);
    const int oa = (a + 1) % 3, ob = (a + 2) % 3;
    return {ext[a], str[a], ext[oa], str[oa], ext[ob], str[ob]};
}

inline Dims reduced(const Dims& d, Axis axis) {
    Dims out = d;
    std::size_t& e = (axis == Axis::v) ? out.n1 : (axis == Axis::h) ? out.n2 : out.n3;
    if (e < 2) throw shape_error("diff needs extent >= 2 along axis, got " + d.str());
    --e;
    return out;
}

} // namespace detail

/// Neighbor difference along one axis with Neumann boundary handling:
/// out(m) = x(m) - x(m+1), so the output loses one plane along the
/// axis. With absolute=true the stencil coefficients are replaced by
/// their magnitudes: out(m) = x(m) + x(m+1).
inline Cube diff(const Cube& x, Axis axis, bool absolute = false) {
    const Dims od = detail::reduced(x.dims(), axis);
    Cube out(od);
    const auto vi = detail::axis_view(x.dims(), axis);
    const auto vo = detail::axis_view(od, axis);
    const double sgn = absolute ? 1.0 : -1.0;
    for (std::size_t b = 0; b < vi.outer_b; ++b)
        for (std::size_t a = 0; a < vi.outer_a; ++a) {
            const std::size_t ibase = a * vi.stride_a + b * vi.stride_b;
            const std::size_t obase = a * vo.stride_a + b * vo.stride_b;
            for (std::size_t m = 0; m + 1 < vi.extent; ++m)
                out[obase + m * vo.stride] =
                    x[ibase + m * vi.stride] + sgn * x[ibase + (m + 1) * vi.stride];
        }
    return out;
}

/// Adjoint of diff(., axis): maps the reduced-extent cube back to full
/// extent. Boundary planes receive one stencil coefficient, interior
/// planes two. With absolute=true all coefficients enter with +1, which
/// is what the stepsize synthesis sums.
inline Cube diff_adjoint(const Cube& y, Axis axis, Dims full, bool absolute = false) {
    if (!(detail::reduced(full, axis) == y.dims()))
        throw shape_error("diff_adjoint dims mismatch: " + y.dims().str() + " for full " + full.str());
    Cube out(full);
    const auto vi = detail::axis_view(y.dims(), axis);
    const auto vo = detail::axis_view(full, axis);
    const double sgn = absolute ? 1.0 : -1.0;
    for (std::size_t b = 0; b < vo.outer_b; ++b)
        for (std::size_t a = 0; a < vo.outer_a; ++a) {
            const std::size_t ibase = a * vi.stride_a + b * vi.stride_b;
            const std::size_t obase = a * vo.stride_a + b * vo.stride_b;
            for (std::size_t m = 0; m < vo.extent; ++m) {
                double v = 0.0;
                if (m + 1 < vo.extent) v += y[ibase + m * vi.stride];
                if (m > 0) v += sgn * y[ibase + (m - 1) * vi.stride];
                out[obase + m * vo.stride] = v;
            }
        }
    return out;
}

inline Cube diff_v(const Cube& x) { return diff(x, Axis::v); }
inline Cube diff_h(const Cube& x) { return diff(x, Axis::h); }
inline Cube diff_t(const Cube& x) { return diff(x, Axis::t); }
inline Cube diff_v_adjoint(const Cube& y, Dims full) { return diff_adjoint(y, Axis::v, full); }
inline Cube diff_h_adjoint(const Cube& y, Dims full) { return diff_adjoint(y, Axis::h, full); }
inline Cube diff_t_adjoint(const Cube& y, Dims full) { return diff_adjoint(y, Axis::t, full); }

/// Counterclockwise quarter turn of every band: out(n2-1-j, i, k) = x(i, j, k).
/// Output dims are (n2, n1, n3).
inline Cube rotate90_spatial(const Cube& x) {
    const Dims d = x.dims();
    Cube out(Dims{d.n2, d.n1, d.n3});
    for (std::size_t k = 0; k < d.n3; ++k)
        for (std::size_t j = 0; j < d.n2; ++j)
            for (std::size_t i = 0; i < d.n1; ++i)
                out(d.n2 - 1 - j, i, k) = x(i, j, k);
    return out;
}

/// Clockwise quarter turn; exact inverse of rotate90_spatial.
inline Cube rotate90_spatial_inv(const Cube& y) {
    const Dims d = y.dims();
    Cube out(Dims{d.n2, d.n1, d.n3});
    for (std::size_t k = 0; k < d.n3; ++k)
        for (std::size_t j = 0; j < d.n2; ++j)
            for (std::size_t i = 0; i < d.n1; ++i)
                out(j, d.n1 - 1 - i, k) = y(i, j, k);
    return out;
}

} // namespace destripe
