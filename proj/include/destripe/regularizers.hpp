#pragma once

#include <string>
#include <utility>
#include <vector>

#include "destripe/linop.hpp"
#include "destripe/prox.hpp"

namespace destripe {

/// One dual block of a splitting: a linear map paired with the convex
/// term applied to its output.
struct RegBlock {
    LinOp op;
    ProxTerm term;
};

/// A pluggable smoothness prior on the image component. Priors built
/// for spectral stacks expect stripe offsets to vary across bands, so
/// they drop the temporal flatness constraint on the stripe component
/// by default; video priors keep it.
struct Regularizer {
    std::string name;
    double weight = 1.0;
    bool drop_temporal_flatness = false;
    std::vector<RegBlock> blocks;

    double evaluate(const Cube& u) const {
        double s = 0.0;
        for (const RegBlock& b : blocks) s += b.term.evaluate(b.op.apply({u}));
        return s;
    }
};

namespace detail {
inline void check_reg_weight(double w) {
    if (!(w > 0.0)) throw config_error("regularizer weight must be positive");
}
} // namespace detail

/// Per-band isotropic TV: vertical and horizontal gradients are
/// zero-padded to the full shape, stacked, and their coordinate groups
/// shrunk jointly.
inline Regularizer make_htv(Dims d, double weight) {
    detail::check_reg_weight(weight);
    Regularizer r{"htv", weight, true, {}};
    r.blocks.push_back({stack({make_diff_op(Axis::v, d, true), make_diff_op(Axis::h, d, true)}),
                        ProxTerm::l12_group(weight)});
    return r;
}

/// Anisotropic 3-D TV: separate l1 terms on each unpadded gradient.
inline Regularizer make_atv(Dims d, double weight) {
    detail::check_reg_weight(weight);
    Regularizer r{"atv", weight, false, {}};
    for (Axis ax : {Axis::v, Axis::h, Axis::t})
        r.blocks.push_back({make_diff_op(ax, d), ProxTerm::l1(weight)});
    return r;
}

/// Isotropic 3-D TV: all three padded gradients grouped per coordinate.
inline Regularizer make_itv(Dims d, double weight) {
    detail::check_reg_weight(weight);
    Regularizer r{"itv", weight, false, {}};
    r.blocks.push_back({stack({make_diff_op(Axis::v, d, true), make_diff_op(Axis::h, d, true),
                               make_diff_op(Axis::t, d, true)}),
                        ProxTerm::l12_group(weight)});
    return r;
}

/// l1 on the temporal differences of the two spatial gradients.
inline Regularizer make_sstv(Dims d, double weight) {
    detail::check_reg_weight(weight);
    Regularizer r{"sstv", weight, true, {}};
    for (Axis ax : {Axis::v, Axis::h}) {
        LinOp spatial = make_diff_op(ax, d);
        LinOp temporal = make_diff_op(Axis::t, spatial.out_dims[0]);
        r.blocks.push_back({compose(temporal, spatial), ProxTerm::l1(weight)});
    }
    return r;
}

/// Nuclear norm of every band slice.
inline Regularizer make_tnn(Dims d, double weight) {
    detail::check_reg_weight(weight);
    Regularizer r{"tnn", weight, true, {}};
    r.blocks.push_back({make_identity(d), ProxTerm::nuclear_per_slice(weight)});
    return r;
}

inline Regularizer make_regularizer(const std::string& name, Dims d, double weight) {
    if (name == "htv") return make_htv(d, weight);
    if (name == "atv") return make_atv(d, weight);
    if (name == "itv") return make_itv(d, weight);
    if (name == "sstv") return make_sstv(d, weight);
    if (name == "tnn") return make_tnn(d, weight);
    throw config_error("unknown regularizer '" + name + "' (expected htv, atv, itv, sstv, tnn)");
}

} // namespace destripe
