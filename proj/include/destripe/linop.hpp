#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "destripe/cube.hpp"
#include "destripe/errors.hpp"

namespace destripe {

inline void tuple_add_inplace(CubeTuple& a, const CubeTuple& b) {
    if (a.size() != b.size()) throw shape_error("tuple add arity mismatch");
    for (std::size_t m = 0; m < a.size(); ++m) a[m] += b[m];
}

/// A linear map between cube tuples. Four closures travel together:
/// the map, its adjoint, and the absolute-coefficient pair in which
/// every stencil coefficient is replaced by its magnitude. The last
/// two are what the stepsize synthesis feeds with all-ones input to
/// obtain row and column sums of the coefficient matrix.
struct LinOp {
    std::string kind;
    std::vector<Dims> in_dims;
    std::vector<Dims> out_dims;

    using Fn = std::function<CubeTuple(const CubeTuple&)>;
    Fn fwd, adj, abs_fwd, abs_adj;

    CubeTuple apply(const CubeTuple& x) const {
        check(x, in_dims);
        return fwd(x);
    }
    CubeTuple adjoint(const CubeTuple& y) const {
        check(y, out_dims);
        return adj(y);
    }
    CubeTuple abs_apply(const CubeTuple& x) const {
        check(x, in_dims);
        return abs_fwd(x);
    }
    CubeTuple abs_adjoint(const CubeTuple& y) const {
        check(y, out_dims);
        return abs_adj(y);
    }

private:
    void check(const CubeTuple& t, const std::vector<Dims>& want) const {
        if (t.size() != want.size())
            throw shape_error(kind + ": tuple arity " + std::to_string(t.size()) +
                              ", expected " + std::to_string(want.size()));
        for (std::size_t m = 0; m < want.size(); ++m)
            if (!(t[m].dims() == want[m]))
                throw shape_error(kind + ": component " + std::to_string(m) + " has dims " +
                                  t[m].dims().str() + ", expected " + want[m].str());
    }
};

namespace detail {

/// Drop the last plane along an axis.
inline Cube restrict_axis(const Cube& y, Axis axis) {
    const Dims od = reduced(y.dims(), axis);
    Cube out(od);
    for (std::size_t k = 0; k < od.n3; ++k)
        for (std::size_t j = 0; j < od.n2; ++j)
            for (std::size_t i = 0; i < od.n1; ++i)
                out(i, j, k) = y(i, j, k);
    return out;
}

/// Embed into full extent along an axis; the trailing plane stays zero.
inline Cube embed_axis(const Cube& x, Axis axis, Dims full) {
    if (!(reduced(full, axis) == x.dims()))
        throw shape_error("embed_axis dims mismatch: " + x.dims().str() + " into " + full.str());
    Cube out(full);
    const Dims d = x.dims();
    for (std::size_t k = 0; k < d.n3; ++k)
        for (std::size_t j = 0; j < d.n2; ++j)
            for (std::size_t i = 0; i < d.n1; ++i)
                out(i, j, k) = x(i, j, k);
    return out;
}

inline std::string axis_name(Axis a) {
    return a == Axis::v ? "diff_v" : a == Axis::h ? "diff_h" : "diff_t";
}

} // namespace detail

/// Neighbor difference along one axis. With padded=true the output
/// keeps the full extent; the missing boundary differences are pinned
/// to zero so that several gradients can share one shape.
inline LinOp make_diff_op(Axis axis, Dims in, bool padded = false) {
    LinOp op;
    op.kind = detail::axis_name(axis) + (padded ? "+pad" : "");
    op.in_dims = {in};
    const Dims rd = detail::reduced(in, axis);
    op.out_dims = {padded ? in : rd};

    if (!padded) {
        op.fwd = [axis](const CubeTuple& x) { return CubeTuple{diff(x[0], axis)}; };
        op.adj = [axis, in](const CubeTuple& y) { return CubeTuple{diff_adjoint(y[0], axis, in)}; };
        op.abs_fwd = [axis](const CubeTuple& x) { return CubeTuple{diff(x[0], axis, true)}; };
        op.abs_adj = [axis, in](const CubeTuple& y) {
            return CubeTuple{diff_adjoint(y[0], axis, in, true)};
        };
    } else {
        op.fwd = [axis, in](const CubeTuple& x) {
            return CubeTuple{detail::embed_axis(diff(x[0], axis), axis, in)};
        };
        op.adj = [axis, in](const CubeTuple& y) {
            return CubeTuple{diff_adjoint(detail::restrict_axis(y[0], axis), axis, in)};
        };
        op.abs_fwd = [axis, in](const CubeTuple& x) {
            return CubeTuple{detail::embed_axis(diff(x[0], axis, true), axis, in)};
        };
        op.abs_adj = [axis, in](const CubeTuple& y) {
            return CubeTuple{diff_adjoint(detail::restrict_axis(y[0], axis), axis, in, true)};
        };
    }
    return op;
}

inline LinOp make_identity(Dims d) {
    LinOp op;
    op.kind = "identity";
    op.in_dims = {d};
    op.out_dims = {d};
    auto id = [](const CubeTuple& x) { return x; };
    op.fwd = op.adj = op.abs_fwd = op.abs_adj = id;
    return op;
}

/// (x_1, ..., x_m) -> x_1 + ... + x_m. All coefficients are +1, so the
/// absolute variants coincide with the plain ones.
inline LinOp make_sum(Dims d, std::size_t arity) {
    if (arity == 0) throw config_error("make_sum needs arity >= 1");
    LinOp op;
    op.kind = "sum_of_inputs";
    op.in_dims.assign(arity, d);
    op.out_dims = {d};
    auto fwd = [](const CubeTuple& x) {
        Cube s = x[0];
        for (std::size_t m = 1; m < x.size(); ++m) s += x[m];
        return CubeTuple{std::move(s)};
    };
    auto adj = [arity](const CubeTuple& y) { return CubeTuple(arity, y[0]); };
    op.fwd = op.abs_fwd = fwd;
    op.adj = op.abs_adj = adj;
    return op;
}

/// outer(inner(.)). Inner output dims must equal outer input dims.
inline LinOp compose(const LinOp& outer, const LinOp& inner) {
    if (inner.out_dims.size() != outer.in_dims.size())
        throw shape_error("compose: arity mismatch between " + inner.kind + " and " + outer.kind);
    for (std::size_t m = 0; m < outer.in_dims.size(); ++m)
        if (!(inner.out_dims[m] == outer.in_dims[m]))
            throw shape_error("compose: dims mismatch between " + inner.kind + " and " + outer.kind);

    LinOp op;
    op.kind = "(" + outer.kind + " o " + inner.kind + ")";
    op.in_dims = inner.in_dims;
    op.out_dims = outer.out_dims;
    op.fwd = [o = outer, i = inner](const CubeTuple& x) { return o.apply(i.apply(x)); };
    op.adj = [o = outer, i = inner](const CubeTuple& y) { return i.adjoint(o.adjoint(y)); };
    op.abs_fwd = [o = outer, i = inner](const CubeTuple& x) { return o.abs_apply(i.abs_apply(x)); };
    op.abs_adj = [o = outer, i = inner](const CubeTuple& y) { return i.abs_adjoint(o.abs_adjoint(y)); };
    return op;
}

/// Stack several maps with identical inputs into one whose output is
/// the concatenation of the parts' outputs.
inline LinOp stack(std::vector<LinOp> parts) {
    if (parts.empty()) throw config_error("stack needs at least one part");
    LinOp op;
    op.kind = "stack[";
    for (std::size_t p = 0; p < parts.size(); ++p) {
        if (!(parts[p].in_dims == parts[0].in_dims))
            throw shape_error("stack: parts disagree on input dims");
        op.kind += (p ? "," : "") + parts[p].kind;
        for (const Dims& d : parts[p].out_dims) op.out_dims.push_back(d);
    }
    op.kind += "]";
    op.in_dims = parts[0].in_dims;

    auto arities = std::make_shared<std::vector<std::size_t>>();
    for (const LinOp& p : parts) arities->push_back(p.out_dims.size());
    auto shared = std::make_shared<std::vector<LinOp>>(std::move(parts));

    auto fwd_with = [shared](const CubeTuple& x, bool absolute) {
        CubeTuple out;
        for (const LinOp& p : *shared) {
            CubeTuple r = absolute ? p.abs_apply(x) : p.apply(x);
            for (Cube& c : r) out.push_back(std::move(c));
        }
        return out;
    };
    auto adj_with = [shared, arities](const CubeTuple& y, bool absolute) {
        CubeTuple acc;
        std::size_t at = 0;
        for (std::size_t p = 0; p < shared->size(); ++p) {
            CubeTuple slice(y.begin() + static_cast<std::ptrdiff_t>(at),
                            y.begin() + static_cast<std::ptrdiff_t>(at + (*arities)[p]));
            at += (*arities)[p];
            CubeTuple part = absolute ? (*shared)[p].abs_adjoint(slice) : (*shared)[p].adjoint(slice);
            if (acc.empty())
                acc = std::move(part);
            else
                tuple_add_inplace(acc, part);
        }
        return acc;
    };
    op.fwd = [fwd_with](const CubeTuple& x) { return fwd_with(x, false); };
    op.abs_fwd = [fwd_with](const CubeTuple& x) { return fwd_with(x, true); };
    op.adj = [adj_with](const CubeTuple& y) { return adj_with(y, false); };
    op.abs_adj = [adj_with](const CubeTuple& y) { return adj_with(y, true); };
    return op;
}

/// Block operator matrix: rows are dual blocks, columns are primal
/// variables. Each entry applies one LinOp (single-cube input) to one
/// primal component; entries sharing a row are summed.
struct OperatorMatrix {
    struct Entry {
        std::size_t primal = 0;
        LinOp op;
    };
    struct Row {
        std::vector<Entry> entries;
        std::vector<Dims> out_dims; // kept explicitly so empty rows stay well-typed
    };

    std::vector<Dims> primal_dims;
    std::vector<Row> rows;

    explicit OperatorMatrix(std::vector<Dims> primal) : primal_dims(std::move(primal)) {}

    void add_row(std::vector<Entry> entries) {
        if (entries.empty()) throw config_error("add_row: use add_empty_row for zero rows");
        Row row;
        row.out_dims = entries[0].op.out_dims;
        for (const Entry& e : entries) {
            if (e.primal >= primal_dims.size())
                throw shape_error("matrix entry references primal " + std::to_string(e.primal));
            if (e.op.in_dims.size() != 1 || !(e.op.in_dims[0] == primal_dims[e.primal]))
                throw shape_error("matrix entry op " + e.op.kind + " does not accept primal " +
                                  std::to_string(e.primal));
            if (!(e.op.out_dims == row.out_dims))
                throw shape_error("matrix entries of one row disagree on output dims");
        }
        row.entries = std::move(entries);
        rows.push_back(std::move(row));
    }

    void add_empty_row(std::vector<Dims> out_dims) { rows.push_back(Row{{}, std::move(out_dims)}); }
};

/// One CubeTuple per matrix row.
using DualStack = std::vector<CubeTuple>;

namespace detail {

inline void check_primal(const OperatorMatrix& M, const CubeTuple& z) {
    if (z.size() != M.primal_dims.size()) throw shape_error("matrix apply: primal arity mismatch");
    for (std::size_t p = 0; p < z.size(); ++p)
        if (!(z[p].dims() == M.primal_dims[p]))
            throw shape_error("matrix apply: primal " + std::to_string(p) + " dims mismatch");
}

inline void check_dual(const OperatorMatrix& M, const DualStack& y) {
    if (y.size() != M.rows.size()) throw shape_error("matrix adjoint: row count mismatch");
    for (std::size_t r = 0; r < y.size(); ++r)
        if (!(dims_of(y[r]) == M.rows[r].out_dims))
            throw shape_error("matrix adjoint: row " + std::to_string(r) + " dims mismatch");
}

inline DualStack matrix_apply_impl(const OperatorMatrix& M, const CubeTuple& z, bool absolute) {
    check_primal(M, z);
    DualStack out;
    out.reserve(M.rows.size());
    for (const auto& row : M.rows) {
        CubeTuple acc;
        for (const auto& e : row.entries) {
            CubeTuple t = absolute ? e.op.abs_apply({z[e.primal]}) : e.op.apply({z[e.primal]});
            if (acc.empty())
                acc = std::move(t);
            else
                tuple_add_inplace(acc, t);
        }
        if (acc.empty()) { // empty row maps everything to zero
            for (const Dims& d : row.out_dims) acc.emplace_back(d);
        }
        out.push_back(std::move(acc));
    }
    return out;
}

inline CubeTuple matrix_adjoint_impl(const OperatorMatrix& M, const DualStack& y, bool absolute) {
    check_dual(M, y);
    CubeTuple acc;
    for (const Dims& d : M.primal_dims) acc.emplace_back(d);
    for (std::size_t r = 0; r < M.rows.size(); ++r)
        for (const auto& e : M.rows[r].entries) {
            CubeTuple part = absolute ? e.op.abs_adjoint(y[r]) : e.op.adjoint(y[r]);
            acc[e.primal] += part[0];
        }
    return acc;
}

} // namespace detail

inline DualStack matrix_apply(const OperatorMatrix& M, const CubeTuple& z) {
    return detail::matrix_apply_impl(M, z, false);
}
inline CubeTuple matrix_adjoint_apply(const OperatorMatrix& M, const DualStack& y) {
    return detail::matrix_adjoint_impl(M, y, false);
}
inline DualStack matrix_abs_apply(const OperatorMatrix& M, const CubeTuple& z) {
    return detail::matrix_apply_impl(M, z, true);
}
inline CubeTuple matrix_abs_adjoint_apply(const OperatorMatrix& M, const DualStack& y) {
    return detail::matrix_adjoint_impl(M, y, true);
}

inline double dual_stack_dot(const DualStack& a, const DualStack& b) {
    if (a.size() != b.size()) throw shape_error("dual stack dot arity mismatch");
    double s = 0.0;
    for (std::size_t r = 0; r < a.size(); ++r) s += tuple_dot(a[r], b[r]);
    return s;
}

inline double dual_stack_norm(const DualStack& a) {
    double s = 0.0;
    for (const CubeTuple& t : a) s += tuple_norm_sq(t);
    return std::sqrt(s);
}

} // namespace destripe
