#include <catch2/catch_amalgamated.hpp>

#include "destripe/linop.hpp"
#include "support.hpp"

using namespace destripe;
using testsup::make_rng;
using testsup::random_cube;
using testsup::random_tuple;

namespace {

// <K x, y> vs <x, K* y> on random tuples, normalized bound.
void require_tuple_adjoint(const LinOp& op, std::mt19937_64& rng, int trials = 100,
                           double tol = 1e-10) {
    for (int t = 0; t < trials; ++t) {
        CubeTuple x = random_tuple(rng, op.in_dims);
        CubeTuple y = random_tuple(rng, op.out_dims);
        const double lhs = tuple_dot(op.apply(x), y);
        const double rhs = tuple_dot(x, op.adjoint(y));
        REQUIRE(std::abs(lhs - rhs) <= tol * (tuple_norm(x) * tuple_norm(y) + 1.0));
    }
}

} // namespace

TEST_CASE("diff op blocks: plain and padded") {
    const Dims d{4, 5, 3};
    auto rng = make_rng(101);

    for (Axis ax : {Axis::v, Axis::h, Axis::t}) {
        LinOp plain = make_diff_op(ax, d);
        REQUIRE(plain.out_dims[0] == detail::reduced(d, ax));
        require_tuple_adjoint(plain, rng);

        LinOp padded = make_diff_op(ax, d, true);
        REQUIRE(padded.out_dims[0] == d);
        require_tuple_adjoint(padded, rng);

        // padded forward leaves the trailing plane zero and matches the
        // plain forward elsewhere
        Cube x = random_cube(rng, d);
        Cube plain_out = plain.apply({x})[0];
        Cube pad_out = padded.apply({x})[0];
        const std::size_t ext = (ax == Axis::v) ? d.n1 : (ax == Axis::h) ? d.n2 : d.n3;
        for (std::size_t k = 0; k < d.n3; ++k)
            for (std::size_t j = 0; j < d.n2; ++j)
                for (std::size_t i = 0; i < d.n1; ++i) {
                    const std::size_t pos = (ax == Axis::v) ? i : (ax == Axis::h) ? j : k;
                    if (pos + 1 == ext)
                        REQUIRE(pad_out(i, j, k) == 0.0);
                    else
                        REQUIRE(pad_out(i, j, k) == plain_out(i, j, k));
                }

        // absolute closures agree with the raw stencil helpers
        Cube absfwd = plain.abs_apply({x})[0];
        REQUIRE(testsup::max_abs_diff(absfwd, diff(x, ax, true)) == 0.0);
    }

    REQUIRE_THROWS_AS(make_diff_op(Axis::t, Dims{4, 5, 1}), shape_error);
}

TEST_CASE("identity and sum blocks") {
    const Dims d{3, 4, 2};
    auto rng = make_rng(55);

    LinOp id = make_identity(d);
    Cube x = random_cube(rng, d);
    REQUIRE(testsup::max_abs_diff(id.apply({x})[0], x) == 0.0);
    require_tuple_adjoint(id, rng);

    LinOp sum2 = make_sum(d, 2);
    Cube u = random_cube(rng, d), s = random_cube(rng, d);
    REQUIRE(testsup::max_abs_diff(sum2.apply({u, s})[0], u + s) == 0.0);
    CubeTuple back = sum2.adjoint({x});
    REQUIRE(back.size() == 2);
    REQUIRE(testsup::max_abs_diff(back[0], x) == 0.0);
    REQUIRE(testsup::max_abs_diff(back[1], x) == 0.0);
    require_tuple_adjoint(sum2, rng);

    REQUIRE_THROWS_AS(make_sum(d, 0), config_error);
    REQUIRE_THROWS_AS(sum2.apply({u}), shape_error);
}

TEST_CASE("composition applies inner then outer") {
    const Dims d{4, 3, 5};
    auto rng = make_rng(77);

    LinOp dv = make_diff_op(Axis::v, d);
    LinOp dt_after = make_diff_op(Axis::t, dv.out_dims[0]);
    LinOp c = compose(dt_after, dv);

    Cube x = random_cube(rng, d);
    Cube direct = diff(diff(x, Axis::v), Axis::t);
    REQUIRE(testsup::max_abs_diff(c.apply({x})[0], direct) == 0.0);
    REQUIRE(c.out_dims[0] == Dims{3, 3, 4});
    require_tuple_adjoint(c, rng);

    // abs composition chains the absolute stencils
    Cube a = c.abs_apply({x})[0];
    REQUIRE(testsup::max_abs_diff(a, diff(diff(x, Axis::v, true), Axis::t, true)) == 0.0);

    LinOp bad = make_diff_op(Axis::h, Dims{9, 9, 9});
    REQUIRE_THROWS_AS(compose(bad, dv), shape_error);
}

TEST_CASE("stack concatenates outputs and sums adjoints") {
    const Dims d{4, 4, 3};
    auto rng = make_rng(13);

    LinOp st = stack({make_diff_op(Axis::v, d, true), make_diff_op(Axis::h, d, true)});
    REQUIRE(st.out_dims.size() == 2);
    REQUIRE(st.out_dims[0] == d);
    REQUIRE(st.out_dims[1] == d);

    Cube x = random_cube(rng, d);
    CubeTuple out = st.apply({x});
    REQUIRE(testsup::max_abs_diff(out[0], make_diff_op(Axis::v, d, true).apply({x})[0]) == 0.0);
    REQUIRE(testsup::max_abs_diff(out[1], make_diff_op(Axis::h, d, true).apply({x})[0]) == 0.0);
    require_tuple_adjoint(st, rng);

    // adjoint is the sum of the parts' adjoints
    CubeTuple y = random_tuple(rng, st.out_dims);
    Cube want = make_diff_op(Axis::v, d, true).adjoint({y[0]})[0] +
                make_diff_op(Axis::h, d, true).adjoint({y[1]})[0];
    REQUIRE(testsup::max_abs_diff(st.adjoint(y)[0], want) == 0.0);

    REQUIRE_THROWS_AS(stack({make_identity(d), make_identity(Dims{2, 2, 2})}), shape_error);
    REQUIRE_THROWS_AS(stack({}), config_error);
}

TEST_CASE("abs closures on all-ones give stencil coefficient sums") {
    const Dims d{4, 5, 3};
    LinOp dv = make_diff_op(Axis::v, d);

    // column sums: 1 at boundary rows, 2 in between
    Cube cols = dv.abs_adjoint({ones(dv.out_dims[0])})[0];
    for (std::size_t k = 0; k < d.n3; ++k)
        for (std::size_t j = 0; j < d.n2; ++j)
            for (std::size_t i = 0; i < d.n1; ++i)
                REQUIRE(cols(i, j, k) == ((i == 0 || i + 1 == d.n1) ? 1.0 : 2.0));

    // row sums: every output entry touches two inputs
    Cube rows = dv.abs_apply({ones(d)})[0];
    for (std::size_t n = 0; n < rows.size(); ++n) REQUIRE(rows[n] == 2.0);

    // padded variant: pad coordinates have empty coefficient rows
    LinOp dvp = make_diff_op(Axis::v, d, true);
    Cube prows = dvp.abs_apply({ones(d)})[0];
    for (std::size_t k = 0; k < d.n3; ++k)
        for (std::size_t j = 0; j < d.n2; ++j)
            for (std::size_t i = 0; i < d.n1; ++i)
                REQUIRE(prows(i, j, k) == (i + 1 == d.n1 ? 0.0 : 2.0));
}

TEST_CASE("operator matrix: apply, adjoint, empty rows") {
    const Dims d{3, 4, 2};
    auto rng = make_rng(2024);

    // two primals (U, S); rows: gradient pair on U, vertical diff on S,
    // U + S via two identity entries, one empty row
    OperatorMatrix M({d, d});
    M.add_row({{0, stack({make_diff_op(Axis::v, d, true), make_diff_op(Axis::h, d, true)})}});
    M.add_row({{1, make_diff_op(Axis::v, d)}});
    M.add_row({{0, make_identity(d)}, {1, make_identity(d)}});
    M.add_empty_row({d});

    Cube u = random_cube(rng, d), s = random_cube(rng, d);
    DualStack out = matrix_apply(M, {u, s});
    REQUIRE(out.size() == 4);
    REQUIRE(out[0].size() == 2);
    REQUIRE(testsup::max_abs_diff(out[1][0], diff_v(s)) == 0.0);
    REQUIRE(testsup::max_abs_diff(out[2][0], u + s) == 0.0);
    REQUIRE(tuple_norm(out[3]) == 0.0);
    REQUIRE(out[3][0].dims() == d);

    // adjoint identity over the whole matrix
    for (int t = 0; t < 100; ++t) {
        CubeTuple z = random_tuple(rng, M.primal_dims);
        DualStack y;
        for (const auto& row : M.rows) y.push_back(random_tuple(rng, row.out_dims));
        const double lhs = dual_stack_dot(matrix_apply(M, z), y);
        const double rhs = tuple_dot(z, matrix_adjoint_apply(M, y));
        double xn = tuple_norm(z), yn = dual_stack_norm(y);
        REQUIRE(std::abs(lhs - rhs) <= 1e-10 * (xn * yn + 1.0));
    }

    // abs variants match entrywise absolute sums for a single-entry row
    Cube rowsum = matrix_abs_apply(M, {ones(d), ones(d)})[1][0];
    for (std::size_t n = 0; n < rowsum.size(); ++n) REQUIRE(rowsum[n] == 2.0);

    // validation errors
    OperatorMatrix bad({d});
    REQUIRE_THROWS_AS(bad.add_row({{1, make_identity(d)}}), shape_error);
    REQUIRE_THROWS_AS(bad.add_row({{0, make_identity(Dims{9, 9, 9})}}), shape_error);
    REQUIRE_THROWS_AS(bad.add_row({}), config_error);
    REQUIRE_THROWS_AS(
        bad.add_row({{0, make_identity(d)}, {0, make_diff_op(Axis::v, d)}}), shape_error);
    REQUIRE_THROWS_AS(matrix_apply(M, {u}), shape_error);
}
