#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "destripe/regularizers.hpp"
#include "destripe/stripe_models.hpp"
#include "support.hpp"

using namespace destripe;
using testsup::make_rng;
using testsup::random_cube;

TEST_CASE("htv hand values") {
    // [[0,1],[0,1]]: only horizontal jumps, value 2
    Cube x(Dims{2, 2, 1});
    x(0, 1, 0) = 1.0;
    x(1, 1, 0) = 1.0;
    REQUIRE(make_htv(x.dims(), 1.0).evaluate(x) == Catch::Approx(2.0).margin(1e-14));

    // [[0,1],[1,1]]: one coordinate carries both gradients, value sqrt(2)
    Cube y(Dims{2, 2, 1});
    y(0, 1, 0) = 1.0;
    y(1, 0, 0) = 1.0;
    y(1, 1, 0) = 1.0;
    REQUIRE(make_htv(y.dims(), 1.0).evaluate(y) == Catch::Approx(std::sqrt(2.0)).margin(1e-14));

    // weight scales linearly
    REQUIRE(make_htv(x.dims(), 2.5).evaluate(x) == Catch::Approx(5.0).margin(1e-14));
}

TEST_CASE("atv and itv hand values") {
    // ramp along the band axis: only temporal differences contribute
    const Dims d{3, 2, 4};
    Cube x(d);
    for (std::size_t k = 0; k < d.n3; ++k)
        for (std::size_t j = 0; j < d.n2; ++j)
            for (std::size_t i = 0; i < d.n1; ++i)
                x(i, j, k) = static_cast<double>(k);
    // |dt| = 1 on (3)(2)(3) entries
    REQUIRE(make_atv(d, 1.0).evaluate(x) == Catch::Approx(18.0).margin(1e-12));

    // single-axis ramp: isotropic grouping degenerates to the anisotropic sum
    const Dims d2{3, 2, 2};
    Cube y(d2);
    for (std::size_t k = 0; k < d2.n3; ++k)
        for (std::size_t j = 0; j < d2.n2; ++j)
            for (std::size_t i = 0; i < d2.n1; ++i)
                y(i, j, k) = static_cast<double>(i);
    const double atv = make_atv(d2, 1.0).evaluate(y);
    const double itv = make_itv(d2, 1.0).evaluate(y);
    REQUIRE(atv == Catch::Approx(8.0).margin(1e-12));
    REQUIRE(itv == Catch::Approx(atv).margin(1e-12));
}

TEST_CASE("sstv hand values and invariances") {
    const Dims d{3, 2, 2};

    // constant along bands: zero
    auto rng = make_rng(5);
    Cube base = random_cube(rng, Dims{3, 2, 1});
    Cube c(d);
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t i = 0; i < 3; ++i)
                c(i, j, k) = base(i, j, 0);
    REQUIRE(make_sstv(d, 1.0).evaluate(c) == 0.0);

    // spatially constant per band: zero
    Cube f(d);
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t i = 0; i < 3; ++i)
                f(i, j, k) = 3.0 * static_cast<double>(k);
    REQUIRE(make_sstv(d, 1.0).evaluate(f) == 0.0);

    // x = i*k: vertical gradient is -k, its temporal difference is 1
    Cube x(d);
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t i = 0; i < 3; ++i)
                x(i, j, k) = static_cast<double>(i * k);
    REQUIRE(make_sstv(d, 1.0).evaluate(x) == Catch::Approx(4.0).margin(1e-12));
}

TEST_CASE("tnn equals sum of slice singular values") {
    auto rng = make_rng(21);
    const std::size_t n = 4;
    // rank-1 slices sigma * u v^T with unit factors
    Eigen::VectorXd u = Eigen::VectorXd::NullaryExpr(
        n, [&]() { return std::uniform_real_distribution<double>(-1, 1)(rng); });
    Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(
        n, [&]() { return std::uniform_real_distribution<double>(-1, 1)(rng); });
    u.normalize();
    v.normalize();

    Cube x(Dims{n, n, 2});
    const double sigmas[2] = {2.0, 0.7};
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i)
                x(i, j, k) = sigmas[k] * u(static_cast<Eigen::Index>(i)) *
                             v(static_cast<Eigen::Index>(j));
    REQUIRE(make_tnn(x.dims(), 1.0).evaluate(x) == Catch::Approx(2.7).margin(1e-10));
}

TEST_CASE("regularizer factory, flags, vanishing on constants") {
    const Dims d{4, 4, 3};
    auto rng = make_rng(31);

    REQUIRE(make_regularizer("htv", d, 1.0).drop_temporal_flatness);
    REQUIRE(make_regularizer("sstv", d, 1.0).drop_temporal_flatness);
    REQUIRE(make_regularizer("tnn", d, 1.0).drop_temporal_flatness);
    REQUIRE(!make_regularizer("atv", d, 1.0).drop_temporal_flatness);
    REQUIRE(!make_regularizer("itv", d, 1.0).drop_temporal_flatness);

    REQUIRE_THROWS_AS(make_regularizer("nope", d, 1.0), config_error);
    REQUIRE_THROWS_AS(make_regularizer("htv", d, 0.0), config_error);
    REQUIRE_THROWS_AS(make_regularizer("htv", d, -1.0), config_error);

    // every TV-family prior vanishes on constants and is nonnegative
    Cube flat(d, 4.2);
    for (const char* name : {"htv", "atv", "itv", "sstv"})
        REQUIRE(make_regularizer(name, d, 1.0).evaluate(flat) == 0.0);
    Cube r = random_cube(rng, d);
    for (const char* name : {"htv", "atv", "itv", "sstv", "tnn"})
        REQUIRE(make_regularizer(name, d, 1.0).evaluate(r) >= 0.0);

    // every block of every prior passes the adjoint identity
    for (const char* name : {"htv", "atv", "itv", "sstv", "tnn"}) {
        Regularizer reg = make_regularizer(name, d, 1.0);
        for (const RegBlock& b : reg.blocks)
            for (int t = 0; t < 20; ++t) {
                CubeTuple xx = testsup::random_tuple(rng, b.op.in_dims);
                CubeTuple yy = testsup::random_tuple(rng, b.op.out_dims);
                const double lhs = tuple_dot(b.op.apply(xx), yy);
                const double rhs = tuple_dot(xx, b.op.adjoint(yy));
                REQUIRE(std::abs(lhs - rhs) <= 1e-10 * (tuple_norm(xx) * tuple_norm(yy) + 1.0));
            }
    }

    // temporal priors on a single-band cube fail loudly
    REQUIRE_THROWS_AS(make_regularizer("sstv", Dims{4, 4, 1}, 1.0), shape_error);
    REQUIRE_THROWS_AS(make_regularizer("atv", Dims{4, 4, 1}, 1.0), shape_error);
}

TEST_CASE("stripe model contributions") {
    const Dims d{4, 3, 2};

    StripeContribution fc = contribute(StripeModel::flatness(0.5, true), d);
    REQUIRE(fc.primal.kind == ProxTerm::Kind::l1);
    REQUIRE(fc.primal.weight == 0.5);
    REQUIRE(fc.dual_blocks.size() == 2);
    REQUIRE(fc.dual_blocks[0].term.kind == ProxTerm::Kind::indicator_zero);
    REQUIRE(fc.dual_blocks[1].term.kind == ProxTerm::Kind::indicator_zero);
    REQUIRE(fc.dual_blocks[0].op.out_dims[0] == Dims{3, 3, 2});
    REQUIRE(fc.dual_blocks[1].op.out_dims[0] == Dims{4, 3, 1});

    StripeContribution fcs = contribute(StripeModel::flatness(0.5, false), d);
    REQUIRE(fcs.dual_blocks.size() == 1);

    StripeContribution sp = contribute(StripeModel::sparse(0.5), d);
    REQUIRE(sp.primal.kind == ProxTerm::Kind::l1);
    REQUIRE(sp.dual_blocks.empty());

    StripeContribution gs = contribute(StripeModel::group_sparse(0.5), d);
    REQUIRE(gs.primal.kind == ProxTerm::Kind::zero_function);
    REQUIRE(gs.dual_blocks.size() == 1);
    REQUIRE(gs.dual_blocks[0].term.kind == ProxTerm::Kind::l21_columns);
    REQUIRE(gs.dual_blocks[0].op.kind == "identity");

    StripeContribution lr = contribute(StripeModel::low_rank(0.5), d);
    REQUIRE(lr.dual_blocks[0].term.kind == ProxTerm::Kind::nuclear_per_slice);

    StripeContribution tv = contribute(StripeModel::tv(0.5, 0.2), d);
    REQUIRE(tv.primal.kind == ProxTerm::Kind::l1);
    REQUIRE(tv.dual_blocks.size() == 1);
    REQUIRE(tv.dual_blocks[0].term.kind == ProxTerm::Kind::l1);
    REQUIRE(tv.dual_blocks[0].term.weight == 0.2);

    // temporal flatness needs at least two bands
    REQUIRE_THROWS_AS(contribute(StripeModel::flatness(0.5, true), Dims{4, 3, 1}), shape_error);

    REQUIRE_THROWS_AS(StripeModel::flatness(0.0, false), config_error);
    REQUIRE_THROWS_AS(StripeModel::tv(0.5, 0.0), config_error);
    REQUIRE_THROWS_AS(make_stripe_model("bogus", 0.5, 0.2, false), config_error);
    REQUIRE(make_stripe_model("fc", 0.5, 0.0, true).temporal);
    REQUIRE(make_stripe_model("lr", 0.5, 0.0, false).kind == StripeModel::Kind::low_rank);
}

TEST_CASE("stripe objective and flatness residual") {
    const Dims d{3, 2, 2};
    Cube s(d);
    // column-replicated offsets: flat along i by construction
    const double off[2][2] = {{0.2, -0.1}, {0.0, 0.3}};
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t i = 0; i < 3; ++i)
                s(i, j, k) = off[j][k];

    const double l1 = 3.0 * (0.2 + 0.1 + 0.0 + 0.3);
    REQUIRE(stripe_objective(StripeModel::flatness(2.0, true), s) ==
            Catch::Approx(2.0 * l1).margin(1e-12));
    REQUIRE(stripe_objective(StripeModel::sparse(1.0), s) == Catch::Approx(l1).margin(1e-12));

    // group sparse: sum of column norms = sqrt(3) * sum |offset|
    REQUIRE(stripe_objective(StripeModel::group_sparse(1.0), s) ==
            Catch::Approx(std::sqrt(3.0) * (0.2 + 0.1 + 0.0 + 0.3)).margin(1e-12));

    // tv: lambda l1 + mu |vertical diffs| (zero here)
    REQUIRE(stripe_objective(StripeModel::tv(1.0, 5.0), s) == Catch::Approx(l1).margin(1e-12));

    auto [rv, rt] = flatness_residual(s, true);
    REQUIRE(rv == 0.0);
    REQUIRE(rt > 0.0); // offsets differ across bands

    // time-invariant stripes: both residuals vanish
    Cube si(d);
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t i = 0; i < 3; ++i)
                si(i, j, k) = off[j][0];
    auto [riv, rit] = flatness_residual(si, true);
    REQUIRE(riv == 0.0);
    REQUIRE(rit == 0.0);

    // non-flat stripes are seen by the vertical residual
    Cube bump = s;
    bump(1, 0, 0) += 0.5;
    REQUIRE(flatness_residual(bump, false).first == Catch::Approx(std::sqrt(0.5)).margin(1e-12));
}
