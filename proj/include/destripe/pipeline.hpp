#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "destripe/io.hpp"
#include "destripe/metrics.hpp"
#include "destripe/sim.hpp"
#include "destripe/solver.hpp"

namespace destripe {

/// One destriping invocation, file paths included. Also carries the
/// grid axes for sweep mode, which reuses the shared solver settings.
struct RunConfig {
    // files
    std::string input;          // observed cube
    std::string truth;          // reference cube; enables scoring when set
    std::string noise;          // noise cube backing epsilon = "oracle"
    std::string output_image;
    std::string output_stripes;
    std::string trace_csv;
    std::string metrics_csv;

    // labels for the metrics table
    std::string dataset = "cube";
    std::string case_label = "-";
    std::string range_label = "-";

    // model
    std::string reg = "htv";
    double weight = 1.0;
    std::string stripe_model = "fc";
    double lambda = 0.0;
    bool has_lambda = false;    // lambda carries no default; it must be given
    double mu = 0.0;
    bool temporal = false;      // flatness across frames (fc model only)
    std::string epsilon;        // nonnegative number, or "oracle" (= noise norm)
    double tol = 1e-4;
    std::size_t max_iters = 50000;
    std::size_t trace_every = 1;
    bool rotate = false;        // quarter turn before solving, undone after
    bool mask_runtime = false;  // write runtime_s as 0.000 for byte comparisons
    std::uint64_t seed = 0;

    // sweep axes
    std::vector<std::string> cases{"i", "ii", "iii"};
    std::vector<std::string> models{"fc"};
    std::vector<std::string> regs{"htv"};
    std::vector<double> ranges{0.3};
    double fraction = 1.0;
    double sigma = 0.05;
};

namespace detail {

inline std::string fmt_g17(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

inline std::string fmt_runtime(double seconds, bool mask) {
    char b[40];
    std::snprintf(b, sizeof b, "%.3f", mask ? 0.0 : seconds);
    return b;
}

inline void write_text(const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open for writing: " + path);
    f.write(body.data(), static_cast<std::streamsize>(body.size()));
    f.flush();
    if (!f) throw io_error("write failed: " + path);
}

} // namespace detail

inline constexpr const char* trace_csv_header =
    "iteration,objective,rel_change,flat_res_v,flat_res_t,ball_res";
inline constexpr const char* metrics_csv_header =
    "dataset,case,range,model,regularizer,mpsnr,mssim,iters,runtime_s";

inline void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
    std::string body(trace_csv_header);
    body.push_back('\n');
    for (const TraceRow& r : trace) {
        body += std::to_string(r.iteration);
        for (double v : {r.objective, r.rel_change, r.flat_res_v, r.flat_res_t, r.ball_res}) {
            body.push_back(',');
            body += detail::fmt_g17(v);
        }
        body.push_back('\n');
    }
    detail::write_text(path, body);
}

/// One scored run: either a single invocation or a sweep cell. A failed
/// cell keeps its labels and reports nan scores with zero iterations.
struct MetricsRow {
    std::string dataset;
    std::string case_label;
    std::string range_label;
    std::string model;
    std::string regularizer;
    double mpsnr = std::numeric_limits<double>::quiet_NaN();
    double mssim = std::numeric_limits<double>::quiet_NaN();
    std::size_t iters = 0;
    double runtime_s = 0.0;
    bool ok = true;
    std::string error; // not part of the CSV; for callers that report
};

inline void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows,
                              bool mask_runtime) {
    std::string body(metrics_csv_header);
    body.push_back('\n');
    for (const MetricsRow& r : rows) {
        body += r.dataset;
        body.push_back(',');
        body += r.case_label;
        body.push_back(',');
        body += r.range_label;
        body.push_back(',');
        body += r.model;
        body.push_back(',');
        body += r.regularizer;
        body.push_back(',');
        body += detail::fmt_g17(r.mpsnr);
        body.push_back(',');
        body += detail::fmt_g17(r.mssim);
        body.push_back(',');
        body += std::to_string(r.iters);
        body.push_back(',');
        body += detail::fmt_runtime(r.runtime_s, mask_runtime);
        body.push_back('\n');
    }
    detail::write_text(path, body);
}

/// Data-fit radius from the config: a literal nonnegative number, or
/// "oracle" for the Frobenius norm of the referenced noise cube.
inline double resolve_epsilon(const RunConfig& cfg) {
    if (cfg.epsilon.empty())
        throw config_error("epsilon is required: a nonnegative number or 'oracle'");
    if (cfg.epsilon == "oracle") {
        if (cfg.noise.empty())
            throw config_error("epsilon 'oracle' needs a noise cube path");
        return fro_norm(read_cube(cfg.noise));
    }
    double v = 0.0;
    const char* b = cfg.epsilon.data();
    const char* e = b + cfg.epsilon.size();
    const auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e || !std::isfinite(v) || v < 0.0)
        throw config_error("bad epsilon '" + cfg.epsilon + "': want a nonnegative number or 'oracle'");
    return v;
}

namespace detail {

inline Problem build_problem(const RunConfig& cfg, Cube observed, double eps) {
    Problem p;
    p.observed = std::move(observed);
    p.reg = make_regularizer(cfg.reg, p.observed.dims(), cfg.weight);
    if (!cfg.has_lambda) throw config_error("lambda is required and has no default");
    p.stripe = make_stripe_model(cfg.stripe_model, cfg.lambda, cfg.mu, cfg.temporal);
    p.epsilon = eps;
    p.tol = cfg.tol;
    p.max_iters = cfg.max_iters;
    p.trace_every = cfg.trace_every;
    return p;
}

} // namespace detail

struct RunOutcome {
    SolveResult result; // image and stripes in the input orientation
    double epsilon = 0.0;
    double runtime_s = 0.0;
    bool scored = false;
    double mpsnr = std::numeric_limits<double>::quiet_NaN();
    double mssim = std::numeric_limits<double>::quiet_NaN();
};

/// Read, solve, write. The rotate flag turns the cube a quarter turn
/// before solving and turns both outputs back, so horizontally striped
/// inputs can reuse the vertical-stripe machinery unchanged. Scores are
/// computed against the truth cube when one is given; CSVs and output
/// cubes are written only to the paths that are set.
inline RunOutcome run_destripe(const RunConfig& cfg) {
    if (cfg.input.empty()) throw config_error("input cube path is required");
    Cube v = read_cube(cfg.input);
    const double eps = resolve_epsilon(cfg);

    Problem p = detail::build_problem(cfg, cfg.rotate ? rotate90_spatial(v) : std::move(v), eps);

    const auto t0 = std::chrono::steady_clock::now();
    SolveResult r = solve(p);
    const auto t1 = std::chrono::steady_clock::now();

    if (cfg.rotate) {
        r.image = rotate90_spatial_inv(r.image);
        r.stripes = rotate90_spatial_inv(r.stripes);
    }

    RunOutcome out;
    out.epsilon = eps;
    out.runtime_s = std::chrono::duration<double>(t1 - t0).count();

    if (!cfg.output_image.empty()) write_cube(cfg.output_image, r.image);
    if (!cfg.output_stripes.empty()) write_cube(cfg.output_stripes, r.stripes);
    if (!cfg.trace_csv.empty()) write_trace_csv(cfg.trace_csv, r.trace);

    if (!cfg.truth.empty()) {
        const Cube truth = read_cube(cfg.truth);
        out.mpsnr = mpsnr(r.image, truth);
        out.mssim = mssim(r.image, truth);
        out.scored = true;
        if (!cfg.metrics_csv.empty()) {
            MetricsRow row;
            row.dataset = cfg.dataset;
            row.case_label = cfg.case_label;
            row.range_label = cfg.range_label;
            row.model = cfg.stripe_model;
            row.regularizer = cfg.reg;
            row.mpsnr = out.mpsnr;
            row.mssim = out.mssim;
            row.iters = r.iterations;
            row.runtime_s = out.runtime_s;
            write_metrics_csv(cfg.metrics_csv, {row}, cfg.mask_runtime);
        }
    }

    out.result = std::move(r);
    return out;
}

/// Synthetic sweep over (case, range, model, regularizer). Degraded
/// data is generated once per (case, range) pair with a seed offset by
/// the pair index, then every model/regularizer combination solves the
/// same cube. Loop order is fixed, so a given config and seed always
/// produce the same rows in the same order. A cell that throws becomes
/// a nan row and the sweep continues. The temporal flatness constraint
/// switches on only for the flatness model on shared-stripe data under
/// a prior that keeps frame coupling.
inline std::vector<MetricsRow> run_benchmark(const RunConfig& cfg) {
    if (cfg.truth.empty()) throw config_error("sweep mode needs a truth cube path");
    if (!cfg.has_lambda) throw config_error("lambda is required and has no default");
    if (cfg.cases.empty() || cfg.models.empty() || cfg.regs.empty() || cfg.ranges.empty())
        throw config_error("sweep grid has an empty axis");

    const Cube truth = read_cube(cfg.truth);
    const bool oracle_eps = cfg.epsilon.empty() || cfg.epsilon == "oracle";
    const double fixed_eps = oracle_eps ? 0.0 : resolve_epsilon(cfg);

    std::vector<MetricsRow> rows;
    std::size_t data_index = 0;
    for (const std::string& case_name : cfg.cases) {
        const NoiseCase nc = parse_noise_case(case_name);
        for (double range : cfg.ranges) {
            const std::uint64_t cell_seed = cfg.seed + 1000003ull * data_index++;
            const CaseData cd =
                make_case(truth, nc, range, cfg.fraction, cfg.sigma, cell_seed);
            for (const std::string& model : cfg.models) {
                for (const std::string& reg : cfg.regs) {
                    MetricsRow row;
                    row.dataset = cfg.dataset;
                    row.case_label = case_name;
                    row.range_label = detail::fmt_g17(range);
                    row.model = model;
                    row.regularizer = reg;
                    const auto t0 = std::chrono::steady_clock::now();
                    try {
                        RunConfig cell = cfg;
                        cell.stripe_model = model;
                        cell.reg = reg;
                        Regularizer probe = make_regularizer(reg, truth.dims(), cfg.weight);
                        cell.temporal = model == "fc" && nc == NoiseCase::stripes_shared &&
                                        !probe.drop_temporal_flatness;
                        Problem p = detail::build_problem(
                            cell, cd.observed, oracle_eps ? cd.epsilon_oracle : fixed_eps);
                        const SolveResult r = solve(p);
                        row.mpsnr = mpsnr(r.image, truth);
                        row.mssim = mssim(r.image, truth);
                        row.iters = r.iterations;
                    } catch (const std::exception& e) {
                        row.ok = false;
                        row.error = e.what();
                    }
                    const auto t1 = std::chrono::steady_clock::now();
                    row.runtime_s = std::chrono::duration<double>(t1 - t0).count();
                    rows.push_back(std::move(row));
                }
            }
        }
    }

    if (!cfg.metrics_csv.empty()) write_metrics_csv(cfg.metrics_csv, rows, cfg.mask_runtime);
    return rows;
}

/// Fixture generator settings: a phantom plus one degradation case.
struct GenConfig {
    std::string phantom = "blocks"; // blocks | moving-block
    Dims dims{64, 64, 8};
    double scale = 1.0;
    std::uint64_t phantom_seed = 101;
    std::size_t boxes = 6;
    std::string case_name = "i";
    double range = 0.3;
    double fraction = 1.0;
    double sigma = 0.05;
    std::uint64_t seed = 0;
    std::string out_prefix;
};

/// Files written by the fixture generator, so callers can feed them to
/// a run without reconstructing the naming scheme.
struct GenPaths {
    std::string truth;
    std::string observed;
    std::string stripes;
    std::string noise;
    double epsilon_oracle = 0.0;
};

inline GenPaths generate_fixture(const GenConfig& g) {
    if (g.out_prefix.empty()) throw config_error("fixture generator needs an output prefix");
    if (!(g.scale > 0.0) || !std::isfinite(g.scale))
        throw config_error("phantom scale must be positive and finite");

    Cube truth;
    if (g.phantom == "blocks") {
        truth = make_blocks_phantom(g.dims, g.phantom_seed, g.boxes);
    } else if (g.phantom == "moving-block") {
        truth = make_moving_block_phantom(g.dims);
    } else {
        throw config_error("unknown phantom '" + g.phantom + "' (expected blocks, moving-block)");
    }
    truth *= g.scale;

    const CaseData cd =
        make_case(truth, parse_noise_case(g.case_name), g.range, g.fraction, g.sigma, g.seed);

    GenPaths out;
    out.truth = g.out_prefix + ".truth.cube";
    out.observed = g.out_prefix + ".observed.cube";
    out.stripes = g.out_prefix + ".stripes.cube";
    out.noise = g.out_prefix + ".noise.cube";
    out.epsilon_oracle = cd.epsilon_oracle;
    write_cube(out.truth, truth);
    write_cube(out.observed, cd.observed);
    write_cube(out.stripes, cd.stripes);
    write_cube(out.noise, cd.gaussian);
    return out;
}

} // namespace destripe
