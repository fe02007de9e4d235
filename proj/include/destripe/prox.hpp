#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "destripe/cube.hpp"
#include "destripe/errors.hpp"

namespace destripe {

namespace detail {

inline void validate_step(const Cube& g) {
    for (std::size_t n = 0; n < g.size(); ++n)
        if (!(g[n] > 0.0) || !std::isfinite(g[n]))
            throw config_error("stepsize entries must be positive and finite");
}

inline void validate_step(const CubeTuple& g) {
    for (const Cube& c : g) validate_step(c);
}

/// Terms whose prox is not separable take one scalar stepsize; the
/// caller must have collapsed the cube to a constant beforehand.
inline double scalar_step(const CubeTuple& g) {
    validate_step(g);
    const double s = g.at(0)[0];
    for (const Cube& c : g)
        for (std::size_t n = 0; n < c.size(); ++n)
            if (c[n] != s) throw config_error("this term needs a uniform stepsize");
    return s;
}

} // namespace detail

inline double soft_threshold(double x, double t) {
    const double m = std::abs(x) - t;
    if (m <= 0.0) return 0.0;
    return x < 0.0 ? -m : m;
}

/// Entrywise soft threshold with per-entry threshold weight*step.
inline Cube prox_l1(const Cube& x, const Cube& step, double weight) {
    if (weight < 0.0) throw config_error("l1 weight must be nonnegative");
    if (!(x.dims() == step.dims())) throw shape_error("prox_l1 step dims mismatch");
    detail::validate_step(step);
    Cube out = x;
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = soft_threshold(x[n], weight * step[n]);
    return out;
}

/// Shrinkage of the groups formed across tuple components at a shared
/// coordinate: every group is scaled by (1 - weight*step/||group||)+.
/// Exact prox when the step is constant within each group, which is
/// the only regime the solver produces.
inline CubeTuple prox_l12_group(const CubeTuple& x, const CubeTuple& step, double weight) {
    if (weight < 0.0) throw config_error("l12 weight must be nonnegative");
    if (x.empty() || x.size() != step.size()) throw shape_error("prox_l12_group arity mismatch");
    for (const Cube& c : x)
        if (!(c.dims() == x[0].dims())) throw shape_error("l12 components must share dims");
    for (std::size_t m = 0; m < x.size(); ++m)
        if (!(step[m].dims() == x[m].dims())) throw shape_error("prox_l12_group step dims mismatch");
    detail::validate_step(step);

    CubeTuple out = x;
    const std::size_t vol = x[0].size();
    for (std::size_t n = 0; n < vol; ++n) {
        double nsq = 0.0;
        for (const Cube& c : x) nsq += c[n] * c[n];
        const double norm = std::sqrt(nsq);
        for (std::size_t m = 0; m < x.size(); ++m) {
            const double f = norm == 0.0 ? 0.0 : std::max(0.0, 1.0 - weight * step[m][n] / norm);
            out[m][n] = f * x[m][n];
        }
    }
    return out;
}

/// Block shrinkage of each vertical column (fixed column and band):
/// col <- (1 - weight*step/||col||)+ col.
inline Cube prox_l21_columns(const Cube& x, double step, double weight) {
    if (weight < 0.0) throw config_error("l21 weight must be nonnegative");
    if (!(step > 0.0)) throw config_error("l21 step must be positive");
    const Dims d = x.dims();
    Cube out = x;
    for (std::size_t k = 0; k < d.n3; ++k)
        for (std::size_t j = 0; j < d.n2; ++j) {
            double nsq = 0.0;
            for (std::size_t i = 0; i < d.n1; ++i) nsq += x(i, j, k) * x(i, j, k);
            const double norm = std::sqrt(nsq);
            const double f = norm == 0.0 ? 0.0 : std::max(0.0, 1.0 - weight * step / norm);
            for (std::size_t i = 0; i < d.n1; ++i) out(i, j, k) = f * x(i, j, k);
        }
    return out;
}

/// Singular value thresholding of every band slice. Slices are the
/// column-major n1 x n2 matrices the storage already holds, so Eigen
/// maps them without copies.
inline Cube prox_nuclear_per_slice(const Cube& x, double step, double weight) {
    if (weight < 0.0) throw config_error("nuclear weight must be nonnegative");
    if (!(step > 0.0)) throw config_error("nuclear step must be positive");
    if (weight * step == 0.0) return x; // exact identity, skip the SVD round trip

    const Dims d = x.dims();
    const double t = weight * step;
    Cube out = x;
    const auto rows = static_cast<Eigen::Index>(d.n1);
    const auto cols = static_cast<Eigen::Index>(d.n2);
    for (std::size_t k = 0; k < d.n3; ++k) {
        Eigen::Map<const Eigen::MatrixXd> slice(x.data() + k * d.n1 * d.n2, rows, cols);
        Eigen::Map<Eigen::MatrixXd> dst(out.data() + k * d.n1 * d.n2, rows, cols);
        // sigma_max <= Frobenius norm, so thresholding wipes the slice;
        // this also keeps near-underflow slices away from the SVD,
        // which is not reliable at denormal scales.
        const double scale = slice.norm();
        if (scale <= t) {
            dst.setZero();
            continue;
        }
        Eigen::BDCSVD<Eigen::MatrixXd> svd(slice / scale,
                                           Eigen::ComputeThinU | Eigen::ComputeThinV);
        Eigen::VectorXd sv = svd.singularValues();
        for (Eigen::Index r = 0; r < sv.size(); ++r)
            sv[r] = soft_threshold(sv[r] * scale, t);
        dst = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
    }
    return out;
}

/// Euclidean projection onto { z : ||z - center||_F <= radius }.
inline Cube project_fro_ball(const Cube& x, const Cube& center, double radius) {
    if (radius < 0.0) throw config_error("ball radius must be nonnegative");
    if (!(x.dims() == center.dims())) throw shape_error("ball center dims mismatch");
    Cube r = x - center;
    const double norm = fro_norm(r);
    if (norm <= radius) return x;
    Cube out = center;
    add_scaled(out, radius / norm, r);
    return out;
}

/// One convex term of a splitting: a named functional with a weight,
/// its value, and its scaled prox. Stepsizes arrive as cubes matching
/// the argument; non-separable kinds insist on a uniform step.
struct ProxTerm {
    enum class Kind {
        zero_function,
        l1,
        l12_group,
        l21_columns,
        nuclear_per_slice,
        indicator_zero,
        fro_ball,
    };

    Kind kind = Kind::zero_function;
    double weight = 1.0;
    Cube center;         // fro_ball only
    double radius = 0.0; // fro_ball only

    static ProxTerm zero() { return {}; }
    static ProxTerm l1(double w) { return {Kind::l1, w, {}, 0.0}; }
    static ProxTerm l12_group(double w) { return {Kind::l12_group, w, {}, 0.0}; }
    static ProxTerm l21_columns(double w) { return {Kind::l21_columns, w, {}, 0.0}; }
    static ProxTerm nuclear_per_slice(double w) { return {Kind::nuclear_per_slice, w, {}, 0.0}; }
    static ProxTerm indicator_zero() { return {Kind::indicator_zero, 0.0, {}, 0.0}; }
    static ProxTerm fro_ball(Cube c, double r) { return {Kind::fro_ball, 0.0, std::move(c), r}; }

    /// Non-separable proxes need the stepsize collapsed to one scalar.
    bool needs_uniform_step() const {
        return kind == Kind::l21_columns || kind == Kind::nuclear_per_slice || kind == Kind::fro_ball;
    }

    double evaluate(const CubeTuple& x) const {
        switch (kind) {
        case Kind::zero_function:
        case Kind::indicator_zero:
        case Kind::fro_ball:
            return 0.0; // indicators contribute no objective value; feasibility is tracked separately
        case Kind::l1: {
            double s = 0.0;
            for (const Cube& c : x)
                for (std::size_t n = 0; n < c.size(); ++n) s += std::abs(c[n]);
            return weight * s;
        }
        case Kind::l12_group: {
            for (const Cube& c : x)
                if (!(c.dims() == x.at(0).dims())) throw shape_error("l12 components must share dims");
            double s = 0.0;
            for (std::size_t n = 0; n < x.at(0).size(); ++n) {
                double nsq = 0.0;
                for (const Cube& c : x) nsq += c[n] * c[n];
                s += std::sqrt(nsq);
            }
            return weight * s;
        }
        case Kind::l21_columns: {
            const Cube& c = single(x);
            const Dims d = c.dims();
            double s = 0.0;
            for (std::size_t k = 0; k < d.n3; ++k)
                for (std::size_t j = 0; j < d.n2; ++j) {
                    double nsq = 0.0;
                    for (std::size_t i = 0; i < d.n1; ++i) nsq += c(i, j, k) * c(i, j, k);
                    s += std::sqrt(nsq);
                }
            return weight * s;
        }
        case Kind::nuclear_per_slice: {
            const Cube& c = single(x);
            const Dims d = c.dims();
            double s = 0.0;
            for (std::size_t k = 0; k < d.n3; ++k) {
                Eigen::Map<const Eigen::MatrixXd> slice(c.data() + k * d.n1 * d.n2,
                                                        static_cast<Eigen::Index>(d.n1),
                                                        static_cast<Eigen::Index>(d.n2));
                // normalize so the SVD never sees denormal-scale input
                const double scale = slice.norm();
                if (scale == 0.0) continue;
                Eigen::BDCSVD<Eigen::MatrixXd> svd(slice / scale);
                s += scale * svd.singularValues().sum();
            }
            return weight * s;
        }
        }
        throw config_error("unknown prox term kind");
    }

    CubeTuple prox(const CubeTuple& x, const CubeTuple& step) const {
        if (x.empty()) throw shape_error("prox of empty tuple");
        if (x.size() != step.size()) throw shape_error("prox step arity mismatch");
        switch (kind) {
        case Kind::zero_function:
            return x;
        case Kind::l1: {
            CubeTuple out;
            out.reserve(x.size());
            for (std::size_t m = 0; m < x.size(); ++m) out.push_back(prox_l1(x[m], step[m], weight));
            return out;
        }
        case Kind::l12_group:
            return prox_l12_group(x, step, weight);
        case Kind::l21_columns:
            return {prox_l21_columns(single(x), detail::scalar_step(step), weight)};
        case Kind::nuclear_per_slice:
            return {prox_nuclear_per_slice(single(x), detail::scalar_step(step), weight)};
        case Kind::indicator_zero:
            return zeros_like(x);
        case Kind::fro_ball:
            detail::scalar_step(step); // projection ignores the value but demands uniformity
            return {project_fro_ball(single(x), center, radius)};
        }
        throw config_error("unknown prox term kind");
    }

private:
    static const Cube& single(const CubeTuple& x) {
        if (x.size() != 1) throw shape_error("this term takes a single cube");
        return x.at(0);
    }
};

/// Prox of the convex conjugate under the same stepsize metric,
/// obtained from the prox of the term itself: the inner prox runs at
/// the reciprocal stepsize, then the result is folded back.
inline CubeTuple prox_conjugate(const ProxTerm& f, const CubeTuple& x, const CubeTuple& step) {
    if (x.size() != step.size()) throw shape_error("prox_conjugate step arity mismatch");
    detail::validate_step(step);
    CubeTuple inv;
    inv.reserve(step.size());
    for (const Cube& g : step) inv.push_back(reciprocal(g));
    CubeTuple inner = f.prox(hadamard(inv, x), inv);
    CubeTuple out = x;
    for (std::size_t m = 0; m < out.size(); ++m) out[m] -= hadamard(step[m], inner[m]);
    return out;
}

} // namespace destripe
