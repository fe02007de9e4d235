// Command-line front end: run (single cube), benchmark (synthetic
// sweep), gen-truth (fixture files). Config files are plain key=value
// lines; command-line flags override file values. Exit codes: 0 ok,
// 2 bad configuration, 3 file trouble, 4 numerical breakdown.
#include <algorithm>
#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "destripe/pipeline.hpp"

namespace {

struct Cli {
    destripe::RunConfig run;
    destripe::GenConfig gen;
    std::vector<std::size_t> gen_dims{64, 64, 8};
    std::string lambda_str; // presence signals has_lambda
    std::string config_path;
    std::string mode;
};

// Splices "key=value" lines from a config file into the argument list
// as "--key=value" tokens right after the subcommand name. Keys whose
// option already appears on the command line are skipped, so flags
// override the file; within the file the last occurrence of a key wins.
std::vector<std::string> splice_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size();) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size())
                throw destripe::config_error("--config needs a file path");
            path = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + i);
        } else {
            ++i;
        }
    }
    if (path.empty()) return args;

    std::ifstream f(path);
    if (!f) throw destripe::io_error("cannot open config file: " + path);

    std::set<std::string> given;
    for (const std::string& a : args)
        if (a.rfind("--", 0) == 0) given.insert(a.substr(0, a.find('=')));

    const auto trim = [](const std::string& s) {
        const char* ws = " \t\r";
        const auto b = s.find_first_not_of(ws);
        if (b == std::string::npos) return std::string();
        return s.substr(b, s.find_last_not_of(ws) - b + 1);
    };

    std::vector<std::string> order;
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos || trim(t.substr(0, eq)).empty())
            throw destripe::config_error(path + " line " + std::to_string(lineno) +
                                         " is not key=value: " + t);
        const std::string key = trim(t.substr(0, eq));
        if (given.count("--" + key)) continue;
        if (!kv.count(key)) order.push_back(key);
        kv[key] = trim(t.substr(eq + 1));
    }

    std::size_t at = 0;
    while (at < args.size() && args[at].rfind("-", 0) == 0) ++at;
    if (at < args.size()) ++at; // land right after the subcommand
    std::vector<std::string> out(args.begin(), args.begin() + at);
    for (const std::string& k : order) out.push_back("--" + k + "=" + kv[k]);
    out.insert(out.end(), args.begin() + at, args.end());
    return out;
}

void add_solver_options(CLI::App* cmd, Cli& c) {
    cmd->add_option("--reg", c.run.reg, "image prior: htv, atv, itv, sstv, tnn")
        ->capture_default_str();
    cmd->add_option("--weight", c.run.weight, "image prior weight")->capture_default_str();
    cmd->add_option("--stripe-model", c.run.stripe_model,
                    "stripe prior: fc, s, gs, lr, tv")
        ->capture_default_str();
    cmd->add_option("--lambda", c.lambda_str, "stripe sparsity weight (required, no default)");
    cmd->add_option("--mu", c.run.mu, "stripe vertical-gradient weight (tv stripe model)");
    cmd->add_option("--epsilon", c.run.epsilon,
                    "data-fit radius: nonnegative number, or 'oracle' to use the noise norm");
    cmd->add_option("--tol", c.run.tol, "relative-change stopping threshold")
        ->capture_default_str();
    cmd->add_option("--max-iters", c.run.max_iters, "iteration cap")->capture_default_str();
    cmd->add_option("--trace-every", c.run.trace_every, "record every n-th iteration")
        ->capture_default_str();
    cmd->add_option("--seed", c.run.seed, "seed for synthetic data")->capture_default_str();
    cmd->add_option("--dataset", c.run.dataset, "dataset label in the metrics table")
        ->capture_default_str();
    cmd->add_flag("--mask-runtime", c.run.mask_runtime,
                  "write runtime_s as 0.000 so reruns byte-compare equal");
    cmd->add_option("--config", c.config_path,
                    "plain key=value file; flags given here override it");
}

int dispatch(Cli& c) {
    if (!c.lambda_str.empty()) {
        const char* b = c.lambda_str.data();
        const char* e = b + c.lambda_str.size();
        const auto [p, ec] = std::from_chars(b, e, c.run.lambda);
        if (ec != std::errc() || p != e)
            throw destripe::config_error("bad lambda '" + c.lambda_str + "': want a number");
        c.run.has_lambda = true;
    }
    if (c.mode == "run") {
        const destripe::RunOutcome out = destripe::run_destripe(c.run);
        std::printf("iterations=%zu converged=%d epsilon=%.17g\n", out.result.iterations,
                    out.result.converged ? 1 : 0, out.epsilon);
        if (out.scored)
            std::printf("mpsnr=%.6f mssim=%.6f\n", out.mpsnr, out.mssim);
        return 0;
    }
    if (c.mode == "benchmark") {
        const auto rows = destripe::run_benchmark(c.run);
        std::size_t failed = 0;
        for (const auto& r : rows) {
            if (r.ok) continue;
            ++failed;
            std::fprintf(stderr, "cell case=%s range=%s model=%s reg=%s failed: %s\n",
                         r.case_label.c_str(), r.range_label.c_str(), r.model.c_str(),
                         r.regularizer.c_str(), r.error.c_str());
        }
        std::printf("cells=%zu failed=%zu\n", rows.size(), failed);
        return 0;
    }
    c.gen.seed = c.run.seed;
    if (c.gen_dims.size() != 3)
        throw destripe::config_error("--dims wants three extents, e.g. 64,64,8");
    c.gen.dims = destripe::Dims{c.gen_dims[0], c.gen_dims[1], c.gen_dims[2]};
    const destripe::GenPaths out = destripe::generate_fixture(c.gen);
    std::printf("truth=%s\nobserved=%s\nstripes=%s\nnoise=%s\nepsilon_oracle=%.17g\n",
                out.truth.c_str(), out.observed.c_str(), out.stripes.c_str(), out.noise.c_str(),
                out.epsilon_oracle);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    Cli c;
    CLI::App app{"destripe: convex stripe removal for 3-D image cubes"};
    app.require_subcommand(1);

    CLI::App* run = app.add_subcommand("run", "destripe one observed cube");
    run->add_option("--input", c.run.input, "observed cube")->required();
    run->add_option("--output-image", c.run.output_image, "restored cube path");
    run->add_option("--output-stripes", c.run.output_stripes, "stripe cube path");
    run->add_option("--trace-csv", c.run.trace_csv, "per-iteration trace path");
    run->add_option("--metrics-csv", c.run.metrics_csv, "scores path (needs --truth)");
    run->add_option("--truth", c.run.truth, "reference cube for scoring");
    run->add_option("--noise", c.run.noise, "noise cube backing --epsilon oracle");
    run->add_option("--case", c.run.case_label, "case label for the metrics table");
    run->add_option("--range", c.run.range_label, "stripe range label for the metrics table");
    run->add_flag("--rotate", c.run.rotate,
                  "quarter-turn the cube before solving and turn results back");
    run->add_flag("--temporal-flatness", c.run.temporal,
                  "constrain frame-to-frame stripe differences (fc stripe model)");
    add_solver_options(run, c);

    CLI::App* bench = app.add_subcommand("benchmark", "sweep synthetic degradations of a truth cube");
    bench->add_option("--truth", c.run.truth, "clean cube to degrade and restore")->required();
    bench->add_option("--metrics-csv", c.run.metrics_csv, "output table")->required();
    bench->add_option("--cases", c.run.cases, "degradation cases (i, ii, iii)")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--models", c.run.models, "stripe priors to sweep")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--regs", c.run.regs, "image priors to sweep")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--ranges", c.run.ranges, "stripe amplitude bounds")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--fraction", c.run.fraction, "fraction of striped columns")
        ->capture_default_str();
    bench->add_option("--sigma", c.run.sigma, "gaussian noise level for case iii")
        ->capture_default_str();
    add_solver_options(bench, c);

    CLI::App* gen = app.add_subcommand("gen-truth", "write phantom truth and degraded fixtures");
    gen->add_option("--phantom", c.gen.phantom, "blocks or moving-block")->capture_default_str();
    gen->add_option("--dims", c.gen_dims, "cube extents n1,n2,n3")
        ->delimiter(',')
        ->capture_default_str();
    gen->add_option("--scale", c.gen.scale, "multiply the phantom by this")->capture_default_str();
    gen->add_option("--phantom-seed", c.gen.phantom_seed, "seed for the blocks phantom")
        ->capture_default_str();
    gen->add_option("--boxes", c.gen.boxes, "box count for the blocks phantom")
        ->capture_default_str();
    gen->add_option("--case", c.gen.case_name, "degradation case: i, ii, iii")
        ->capture_default_str();
    gen->add_option("--range", c.gen.range, "stripe amplitude bound")->capture_default_str();
    gen->add_option("--fraction", c.gen.fraction, "fraction of striped columns")
        ->capture_default_str();
    gen->add_option("--sigma", c.gen.sigma, "gaussian noise level")->capture_default_str();
    gen->add_option("--seed", c.run.seed, "degradation seed")->capture_default_str();
    gen->add_option("--out-prefix", c.gen.out_prefix, "path prefix for the fixture files")
        ->required();
    gen->add_option("--config", c.config_path,
                    "plain key=value file; flags given here override it");

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = splice_config(std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(args);
        c.mode = run->parsed() ? "run" : bench->parsed() ? "benchmark" : "gen-truth";
        return dispatch(c);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const destripe::io_error& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 3;
    } catch (const destripe::numeric_error& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 4;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
