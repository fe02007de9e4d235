#pragma once

#include <cmath>
#include <vector>

#include "destripe/cube.hpp"
#include "destripe/errors.hpp"

namespace destripe {

/// Band-averaged PSNR against a unit-dynamic-range reference:
/// mean over bands of 10*log10(n1*n2 / ||U_k - Ref_k||_F^2).
/// Bands that match exactly contribute cap_db.
inline double mpsnr(const Cube& u, const Cube& ref, double cap_db = 100.0) {
    if (!(u.dims() == ref.dims())) throw shape_error("mpsnr dims mismatch");
    const Dims d = u.dims();
    const std::size_t plane = d.n1 * d.n2;
    double acc = 0.0;
    for (std::size_t k = 0; k < d.n3; ++k) {
        double errsq = 0.0;
        for (std::size_t n = 0; n < plane; ++n) {
            const double e = u[k * plane + n] - ref[k * plane + n];
            errsq += e * e;
        }
        const double band =
            errsq == 0.0 ? cap_db
                         : std::min(cap_db, 10.0 * std::log10(static_cast<double>(plane) / errsq));
        acc += band;
    }
    return acc / static_cast<double>(d.n3);
}

namespace detail {

/// Summed-area table over one band: S(i+1, j+1) = sum of the leading
/// i x j submatrix. Window sums then cost four lookups.
class AreaTable {
public:
    AreaTable(const double* band, std::size_t n1, std::size_t n2,
              const double* other = nullptr)
        : n1_(n1), s_((n1 + 1) * (n2 + 1), 0.0) {
        for (std::size_t j = 0; j < n2; ++j)
            for (std::size_t i = 0; i < n1; ++i) {
                const double v = other ? band[i + n1 * j] * other[i + n1 * j] : band[i + n1 * j];
                at(i + 1, j + 1) = v + at(i, j + 1) + at(i + 1, j) - at(i, j);
            }
    }

    double window(std::size_t i0, std::size_t j0, std::size_t w) const {
        return at(i0 + w, j0 + w) - at(i0, j0 + w) - at(i0 + w, j0) + at(i0, j0);
    }

private:
    double& at(std::size_t i, std::size_t j) { return s_[i + (n1_ + 1) * j]; }
    double at(std::size_t i, std::size_t j) const { return s_[i + (n1_ + 1) * j]; }
    std::size_t n1_;
    std::vector<double> s_;
};

} // namespace detail

/// Band-averaged SSIM with 8x8 uniform windows at full overlap, unit
/// dynamic range, population statistics. Only windows entirely inside
/// the band contribute.
inline double mssim(const Cube& u, const Cube& ref) {
    if (!(u.dims() == ref.dims())) throw shape_error("mssim dims mismatch");
    const Dims d = u.dims();
    constexpr std::size_t W = 8;
    if (d.n1 < W || d.n2 < W)
        throw shape_error("mssim needs bands of at least 8x8, got " + d.str());
    constexpr double C1 = 0.01 * 0.01;
    constexpr double C2 = 0.03 * 0.03;
    const double wn = static_cast<double>(W * W);

    double acc = 0.0;
    const std::size_t plane = d.n1 * d.n2;
    for (std::size_t k = 0; k < d.n3; ++k) {
        const double* x = u.data() + k * plane;
        const double* y = ref.data() + k * plane;
        detail::AreaTable sx(x, d.n1, d.n2), sy(y, d.n1, d.n2);
        detail::AreaTable sxx(x, d.n1, d.n2, x), syy(y, d.n1, d.n2, y), sxy(x, d.n1, d.n2, y);

        double band = 0.0;
        std::size_t windows = 0;
        for (std::size_t j0 = 0; j0 + W <= d.n2; ++j0)
            for (std::size_t i0 = 0; i0 + W <= d.n1; ++i0) {
                const double mx = sx.window(i0, j0, W) / wn;
                const double my = sy.window(i0, j0, W) / wn;
                const double vx = sxx.window(i0, j0, W) / wn - mx * mx;
                const double vy = syy.window(i0, j0, W) / wn - my * my;
                const double cxy = sxy.window(i0, j0, W) / wn - mx * my;
                const double ssim = ((2.0 * mx * my + C1) * (2.0 * cxy + C2)) /
                                    ((mx * mx + my * my + C1) * (vx + vy + C2));
                band += ssim;
                ++windows;
            }
        acc += band / static_cast<double>(windows);
    }
    return acc / static_cast<double>(d.n3);
}

} // namespace destripe
