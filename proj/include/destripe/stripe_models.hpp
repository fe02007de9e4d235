#pragma once

#include <string>
#include <utility>
#include <vector>

#include "destripe/regularizers.hpp"

namespace destripe {

/// Structural prior on the stripe component. The flatness model pins
/// the vertical (and optionally frame-to-frame) differences of the
/// stripes to zero through hard constraints; the others penalize.
struct StripeModel {
    enum class Kind { flatness, sparse, group_sparse, low_rank, tv };

    Kind kind = Kind::flatness;
    double lambda = 0.0; // sparsity / group / rank weight
    double mu = 0.0;     // vertical-gradient weight (tv kind only)
    bool temporal = false; // flatness kind: constrain frame differences too

    static StripeModel flatness(double lambda, bool temporal) {
        check_lambda(lambda);
        return {Kind::flatness, lambda, 0.0, temporal};
    }
    static StripeModel sparse(double lambda) {
        check_lambda(lambda);
        return {Kind::sparse, lambda, 0.0, false};
    }
    static StripeModel group_sparse(double lambda) {
        check_lambda(lambda);
        return {Kind::group_sparse, lambda, 0.0, false};
    }
    static StripeModel low_rank(double lambda) {
        check_lambda(lambda);
        return {Kind::low_rank, lambda, 0.0, false};
    }
    static StripeModel tv(double lambda, double mu) {
        check_lambda(lambda);
        if (!(mu > 0.0)) throw config_error("stripe tv model needs mu > 0");
        return {Kind::tv, lambda, mu, false};
    }

    std::string name() const {
        switch (kind) {
        case Kind::flatness: return "fc";
        case Kind::sparse: return "s";
        case Kind::group_sparse: return "gs";
        case Kind::low_rank: return "lr";
        case Kind::tv: return "tv";
        }
        return "?";
    }

private:
    static void check_lambda(double l) {
        if (!(l > 0.0)) throw config_error("stripe model needs lambda > 0");
    }
};

/// What a stripe model adds to the splitting: the prox taken in the
/// stripe primal step plus dual operator/term rows on the stripe cube.
struct StripeContribution {
    ProxTerm primal = ProxTerm::zero();
    std::vector<RegBlock> dual_blocks;
};

inline StripeContribution contribute(const StripeModel& m, Dims d) {
    StripeContribution c;
    switch (m.kind) {
    case StripeModel::Kind::flatness:
        c.primal = ProxTerm::l1(m.lambda);
        c.dual_blocks.push_back({make_diff_op(Axis::v, d), ProxTerm::indicator_zero()});
        if (m.temporal)
            c.dual_blocks.push_back({make_diff_op(Axis::t, d), ProxTerm::indicator_zero()});
        break;
    case StripeModel::Kind::sparse:
        c.primal = ProxTerm::l1(m.lambda);
        break;
    case StripeModel::Kind::group_sparse:
        c.dual_blocks.push_back({make_identity(d), ProxTerm::l21_columns(m.lambda)});
        break;
    case StripeModel::Kind::low_rank:
        c.dual_blocks.push_back({make_identity(d), ProxTerm::nuclear_per_slice(m.lambda)});
        break;
    case StripeModel::Kind::tv:
        c.primal = ProxTerm::l1(m.lambda);
        c.dual_blocks.push_back({make_diff_op(Axis::v, d), ProxTerm::l1(m.mu)});
        break;
    }
    return c;
}

/// Value of the stripe term J(S). Hard constraints contribute nothing;
/// their violation is reported through flatness_residual instead.
inline double stripe_objective(const StripeModel& m, const Cube& s) {
    const StripeContribution c = contribute(m, s.dims());
    double v = c.primal.evaluate({s});
    for (const RegBlock& b : c.dual_blocks) v += b.term.evaluate(b.op.apply({s}));
    return v;
}

/// Raw Frobenius norms of the vertical and temporal differences of the
/// stripe cube. Axes too short to difference report zero.
inline std::pair<double, double> flatness_residual(const Cube& s, bool temporal) {
    const Dims d = s.dims();
    const double rv = d.n1 >= 2 ? fro_norm(diff_v(s)) : 0.0;
    const double rt = (temporal && d.n3 >= 2) ? fro_norm(diff_t(s)) : 0.0;
    return {rv, rt};
}

inline StripeModel make_stripe_model(const std::string& name, double lambda, double mu,
                                     bool temporal) {
    if (name == "fc") return StripeModel::flatness(lambda, temporal);
    if (name == "s") return StripeModel::sparse(lambda);
    if (name == "gs") return StripeModel::group_sparse(lambda);
    if (name == "lr") return StripeModel::low_rank(lambda);
    if (name == "tv") return StripeModel::tv(lambda, mu);
    throw config_error("unknown stripe model '" + name + "' (expected fc, s, gs, lr, tv)");
}

} // namespace destripe
