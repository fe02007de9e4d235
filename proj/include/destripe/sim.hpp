#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "destripe/cube.hpp"
#include "destripe/errors.hpp"

namespace destripe {

/// Column-wise stripe field. Each affected column of each band gets a
/// constant offset drawn uniformly from [-range, range]; the offset is
/// written bitwise-identically down the column, so vertical differences
/// vanish exactly. With time_invariant the per-column offsets are drawn
/// once and replicated across bands the same way. column_fraction picks
/// which columns are striped; the offset for a column is drawn before
/// its coin so the offset stream does not depend on the fraction.
struct StripeSpec {
    double range = 0.3;
    double column_fraction = 1.0;
    bool time_invariant = false;
    std::uint64_t seed = 0;
};

inline Cube gen_stripes(const Dims& d, const StripeSpec& spec) {
    if (!(spec.range >= 0.0) || !std::isfinite(spec.range))
        throw config_error("stripe range must be finite and >= 0");
    if (!(spec.column_fraction >= 0.0) || !(spec.column_fraction <= 1.0))
        throw config_error("stripe column fraction must lie in [0, 1]");
    Cube out(d);
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> offset(-spec.range, spec.range);
    std::bernoulli_distribution coin(spec.column_fraction);

    const std::size_t bands = spec.time_invariant ? 1 : d.n3;
    for (std::size_t k = 0; k < bands; ++k)
        for (std::size_t j = 0; j < d.n2; ++j) {
            const double a = offset(rng);
            const double v = coin(rng) ? a : 0.0;
            for (std::size_t i = 0; i < d.n1; ++i) out(i, j, k) = v;
        }
    if (spec.time_invariant)
        for (std::size_t k = 1; k < d.n3; ++k)
            for (std::size_t j = 0; j < d.n2; ++j)
                for (std::size_t i = 0; i < d.n1; ++i) out(i, j, k) = out(i, j, 0);
    return out;
}

inline Cube gen_gaussian(const Dims& d, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw config_error("noise sigma must be finite and >= 0");
    Cube out(d);
    if (sigma == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    for (std::size_t n = 0; n < d.volume(); ++n) out[n] = noise(rng);
    return out;
}

/// Degradation cases for the synthetic study:
///   i    stripes varying across bands
///   ii   stripes shared by all bands
///   iii  band-varying stripes plus white Gaussian noise
enum class NoiseCase { stripes, stripes_shared, stripes_gaussian };

inline NoiseCase parse_noise_case(const std::string& name) {
    if (name == "i") return NoiseCase::stripes;
    if (name == "ii") return NoiseCase::stripes_shared;
    if (name == "iii") return NoiseCase::stripes_gaussian;
    throw config_error("unknown degradation case '" + name + "' (expected i, ii, or iii)");
}

inline std::string noise_case_name(NoiseCase c) {
    switch (c) {
        case NoiseCase::stripes: return "i";
        case NoiseCase::stripes_shared: return "ii";
        default: return "iii";
    }
}

struct CaseData {
    Cube observed;
    Cube stripes;
    Cube gaussian;
    double epsilon_oracle = 0.0;
};

/// Builds truth + stripes (+ noise) for one degradation case. The
/// Gaussian stream is decoupled from the stripe stream by remixing the
/// seed, so the same stripes appear with and without noise.
inline CaseData make_case(const Cube& truth, NoiseCase c, double range, double column_fraction,
                          double sigma, std::uint64_t seed) {
    const Dims d = truth.dims();
    StripeSpec spec;
    spec.range = range;
    spec.column_fraction = column_fraction;
    spec.time_invariant = (c == NoiseCase::stripes_shared);
    spec.seed = seed;
    CaseData out{Cube(d), gen_stripes(d, spec), Cube(d), 0.0};
    if (c == NoiseCase::stripes_gaussian)
        out.gaussian = gen_gaussian(d, sigma, seed ^ 0x9e3779b97f4a7c15ull);
    out.epsilon_oracle = fro_norm(out.gaussian);
    out.observed = truth + out.stripes + out.gaussian;
    return out;
}

/// Piecewise-constant phantom: a mid-gray background with a few
/// axis-aligned boxes of random constant intensity, later boxes
/// painting over earlier ones. Values stay in [0, 1].
inline Cube make_blocks_phantom(const Dims& d, std::uint64_t seed, std::size_t boxes = 6) {
    Cube out(d);
    for (std::size_t n = 0; n < d.volume(); ++n) out[n] = 0.25;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> level(0.1, 0.9);
    auto span = [&rng](std::size_t n) {
        std::uniform_int_distribution<std::size_t> lo(0, n - 1);
        const std::size_t a = lo(rng);
        std::uniform_int_distribution<std::size_t> hi(a, n - 1);
        return std::pair<std::size_t, std::size_t>(a, hi(rng));
    };
    for (std::size_t b = 0; b < boxes; ++b) {
        const double v = level(rng);
        const auto [i0, i1] = span(d.n1);
        const auto [j0, j1] = span(d.n2);
        const auto [k0, k1] = span(d.n3);
        for (std::size_t k = k0; k <= k1; ++k)
            for (std::size_t j = j0; j <= j1; ++j)
                for (std::size_t i = i0; i <= i1; ++i) out(i, j, k) = v;
    }
    return out;
}

/// Video-like phantom: a bright square sliding diagonally across a flat
/// background, one step per band. Deterministic, no RNG.
inline Cube make_moving_block_phantom(const Dims& d) {
    Cube out(d);
    for (std::size_t n = 0; n < d.volume(); ++n) out[n] = 0.2;
    const std::size_t bi = std::max<std::size_t>(1, d.n1 / 4);
    const std::size_t bj = std::max<std::size_t>(1, d.n2 / 4);
    for (std::size_t k = 0; k < d.n3; ++k) {
        const double t = d.n3 > 1 ? static_cast<double>(k) / static_cast<double>(d.n3 - 1) : 0.0;
        const auto i0 = static_cast<std::size_t>(std::lround(t * static_cast<double>(d.n1 - bi)));
        const auto j0 = static_cast<std::size_t>(std::lround(t * static_cast<double>(d.n2 - bj)));
        for (std::size_t j = j0; j < j0 + bj; ++j)
            for (std::size_t i = i0; i < i0 + bi; ++i) out(i, j, k) = 0.8;
    }
    return out;
}

} // namespace destripe
