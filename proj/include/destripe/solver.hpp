#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "destripe/stripe_models.hpp"

namespace destripe {

/// Full description of one destriping run: observed cube, image prior,
/// stripe prior, data-fit radius, and stopping parameters.
struct Problem {
    Cube observed;
    Regularizer reg;
    StripeModel stripe;
    double epsilon = 0.0;
    double tol = 1e-4;
    std::size_t max_iters = 50000;
    std::size_t trace_every = 1; // thin the trace for long runs; 1 records every iteration
};

struct TraceRow {
    std::size_t iteration = 0;
    double objective = 0.0;
    double rel_change = 0.0;
    double flat_res_v = 0.0; // raw ||D_v S||_F
    double flat_res_t = 0.0; // raw ||D_t S||_F (0 when the cube has one band)
    double ball_res = 0.0;   // ||V - (U + S)||_F
};

/// Entrywise stepsizes: one cube per primal variable, one tuple per
/// dual row. All entries are strictly positive.
struct Preconditioners {
    CubeTuple primal;
    DualStack dual;
};

/// The assembled splitting. Primal order is fixed: 0 = image, 1 = stripes.
struct Assembly {
    OperatorMatrix K{{}};
    std::vector<ProxTerm> dual_terms; // one per matrix row
    ProxTerm stripe_primal = ProxTerm::zero();
};

inline Assembly assemble(const Problem& p) {
    const Dims d = p.observed.dims();
    if (d.volume() == 0) throw config_error("observed cube is empty");
    if (!all_finite(p.observed)) throw config_error("observed cube has non-finite entries");
    if (p.epsilon < 0.0) throw config_error("epsilon must be nonnegative");
    if (!(p.tol > 0.0)) throw config_error("tol must be positive");
    if (p.max_iters == 0) throw config_error("max_iters must be positive");
    if (p.trace_every == 0) throw config_error("trace_every must be positive");

    Assembly a;
    a.K = OperatorMatrix({d, d});

    for (const RegBlock& b : p.reg.blocks) {
        a.K.add_row({{0, b.op}});
        a.dual_terms.push_back(b.term);
    }
    const StripeContribution sc = contribute(p.stripe, d);
    a.stripe_primal = sc.primal;
    for (const RegBlock& b : sc.dual_blocks) {
        a.K.add_row({{1, b.op}});
        a.dual_terms.push_back(b.term);
    }
    // data fit: U + S must stay within epsilon of the observation
    a.K.add_row({{0, make_identity(d)}, {1, make_identity(d)}});
    a.dual_terms.push_back(ProxTerm::fro_ball(p.observed, p.epsilon));
    return a;
}

/// Reciprocal absolute row/column sums of the coefficient matrix.
/// Zero sums (coordinates no coefficient touches, e.g. padding planes)
/// get stepsize 1. Rows whose term cannot take entrywise steps are
/// collapsed to their minimum entry.
inline Preconditioners synthesize_preconditioners(const OperatorMatrix& K,
                                                  const std::vector<bool>& collapse_rows) {
    if (collapse_rows.size() != K.rows.size())
        throw shape_error("collapse mask size must match row count");

    CubeTuple ones_primal;
    for (const Dims& d : K.primal_dims) ones_primal.push_back(ones(d));
    DualStack ones_dual;
    for (const auto& row : K.rows) {
        CubeTuple t;
        for (const Dims& d : row.out_dims) t.push_back(ones(d));
        ones_dual.push_back(std::move(t));
    }

    Preconditioners g;
    g.primal = matrix_abs_adjoint_apply(K, ones_dual);
    g.dual = matrix_abs_apply(K, ones_primal);

    auto invert = [](Cube& c) {
        for (std::size_t n = 0; n < c.size(); ++n) c[n] = c[n] == 0.0 ? 1.0 : 1.0 / c[n];
    };
    for (Cube& c : g.primal) invert(c);
    for (CubeTuple& t : g.dual)
        for (Cube& c : t) invert(c);

    for (std::size_t r = 0; r < K.rows.size(); ++r) {
        if (!collapse_rows[r]) continue;
        double m = std::numeric_limits<double>::infinity();
        for (const Cube& c : g.dual[r])
            for (std::size_t n = 0; n < c.size(); ++n) m = std::min(m, c[n]);
        for (Cube& c : g.dual[r]) c.fill(m);
    }

    for (const Cube& c : g.primal)
        if (!all_finite(c)) throw numeric_error("primal stepsize synthesis produced non-finite entries");
    for (const CubeTuple& t : g.dual)
        for (const Cube& c : t)
            if (!all_finite(c)) throw numeric_error("dual stepsize synthesis produced non-finite entries");
    return g;
}

inline std::vector<bool> collapse_mask(const Assembly& a) {
    std::vector<bool> m;
    m.reserve(a.dual_terms.size());
    for (const ProxTerm& t : a.dual_terms) m.push_back(t.needs_uniform_step());
    return m;
}

/// Validity probe for the stepsizes: the scaled operator must shrink
/// random inputs, strictly. Returns false as soon as one trial fails.
inline bool check_stepsize_condition(const OperatorMatrix& K, const Preconditioners& g,
                                     int trials = 100, std::uint64_t seed = 20240901) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < trials; ++t) {
        CubeTuple x;
        for (const Dims& d : K.primal_dims) {
            Cube c(d);
            for (std::size_t n = 0; n < c.size(); ++n) c[n] = u(rng);
            x.push_back(std::move(c));
        }
        const double xn = tuple_norm(x);
        if (xn == 0.0) continue;
        DualStack out = matrix_apply(K, hadamard(g.primal, x));
        double sq = 0.0;
        for (std::size_t r = 0; r < out.size(); ++r) {
            CubeTuple scaled = hadamard(g.dual[r], out[r]);
            sq += tuple_norm_sq(scaled);
        }
        if (!(std::sqrt(sq) < xn)) return false;
    }
    return true;
}

/// Objective value J(U, S): prior on the image plus the stripe term.
/// Hard constraints count zero; their violation lives in the trace.
inline double objective(const Problem& p, const Cube& u, const Cube& s) {
    return p.reg.evaluate(u) + stripe_objective(p.stripe, s);
}

struct SolveResult {
    Cube image;
    Cube stripes;
    std::vector<TraceRow> trace;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Core iteration on a prebuilt assembly with given stepsizes. The
/// image takes a plain gradient step (it carries no primal term), the
/// stripe prox and all dual conjugate proxes run entrywise scaled.
inline SolveResult solve_with(const Problem& p, const Assembly& a, const Preconditioners& g) {
    const Dims d = p.observed.dims();
    SolveResult res;
    res.image = p.observed; // warm start at the observation
    res.stripes = Cube(d);
    DualStack y;
    for (const auto& row : a.K.rows) {
        CubeTuple t;
        for (const Dims& od : row.out_dims) t.push_back(Cube(od));
        y.push_back(std::move(t));
    }

    const double guard = 1e12 * (1.0 + fro_norm(p.observed));
    res.trace.reserve(std::min<std::size_t>(p.max_iters / p.trace_every + 1, 65536));

    for (std::size_t it = 1; it <= p.max_iters; ++it) {
        const CubeTuple grad = matrix_adjoint_apply(a.K, y);

        Cube u_next = res.image;
        add_scaled(u_next, -1.0, hadamard(g.primal[0], grad[0]));

        Cube s_arg = res.stripes;
        add_scaled(s_arg, -1.0, hadamard(g.primal[1], grad[1]));
        Cube s_next = a.stripe_primal.prox({std::move(s_arg)}, {g.primal[1]})[0];

        // extrapolated point 2 z+ - z
        Cube u_bar = u_next;
        u_bar *= 2.0;
        u_bar -= res.image;
        Cube s_bar = s_next;
        s_bar *= 2.0;
        s_bar -= res.stripes;

        const DualStack kz = matrix_apply(a.K, {std::move(u_bar), std::move(s_bar)});
        for (std::size_t r = 0; r < y.size(); ++r) {
            CubeTuple arg = y[r];
            for (std::size_t m = 0; m < arg.size(); ++m) arg[m] += hadamard(g.dual[r][m], kz[r][m]);
            y[r] = prox_conjugate(a.dual_terms[r], arg, g.dual[r]);
        }

        const double move = fro_norm(u_next - res.image);
        const double base = fro_norm(res.image);
        const double rel = move / (base > 0.0 ? base : 1.0);
        // the duals are still warming up on iteration 1 (the image has
        // not felt them yet and trivially repeats), so the stopping
        // test only arms afterwards
        const bool may_stop = it > 1;

        res.image = std::move(u_next);
        res.stripes = std::move(s_next);
        res.iterations = it;

        if (!all_finite(res.image) || !all_finite(res.stripes) || fro_norm(res.image) > guard ||
            fro_norm(res.stripes) > guard)
            throw numeric_error("iterates diverged at iteration " + std::to_string(it));

        const bool stopping = (may_stop && rel < p.tol) || it == p.max_iters;
        if (it % p.trace_every == 0 || stopping) {
            TraceRow row;
            row.iteration = it;
            row.objective = objective(p, res.image, res.stripes);
            row.rel_change = rel;
            const auto [rv, rt] = flatness_residual(res.stripes, d.n3 >= 2);
            row.flat_res_v = rv;
            row.flat_res_t = rt;
            row.ball_res = fro_norm(p.observed - (res.image + res.stripes));
            res.trace.push_back(row);
        }

        if (may_stop && rel < p.tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

inline SolveResult solve(const Problem& p) {
    const Assembly a = assemble(p);
    const Preconditioners g = synthesize_preconditioners(a.K, collapse_mask(a));
    return solve_with(p, a, g);
}

} // namespace destripe
