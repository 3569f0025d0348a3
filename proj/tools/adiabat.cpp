#include "adiabatic/acceptance.hpp"
#include "adiabatic/config.hpp"
#include "adiabatic/jump_expansion.hpp"
#include "adiabatic/sweep.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace adiabatic;

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numeric = 3;
constexpr int exit_validate = 4;

constexpr const char* schema_help = R"(Config (JSON, unknown keys rejected; defaults in parentheses):
  model.family          constant | rotated_frame | rotating_spin | landau_zener_window |
                        smooth_interpolation | flat_endpoint_ramp | user_matrix_polynomial
  model.dim (2), model.initial_state (0), model.time_scale (1), model.params {...}
  lambda                number or list, > 0 (required)
  duration              number or list, > 0 (1); at most one of lambda/duration is a list
  K                     expansion order 0..6 (2)
  grid                  policy oscillation_resolving|uniform, points_per_period (128),
                        max_step (1e-3), intervals (2000), max_nodes (2e7)
  oracle                rtol (1e-10), slices (100000), residual_threshold (1e-6)
  gap_tol (1e-3), output_dir ("results"), seed (0)
  reports               scaling_fit (true), bound_check (true), berry_check (false),
                        secular_probe (false)
Exit codes: 0 ok, 2 config error, 3 numeric failure, 4 validate failure.)";

struct Common {
    std::string config;
    std::string out;
    unsigned threads = 0;
    std::vector<std::string> formats{"csv", "json"};
    bool strict = false;
};

EmitFormats parse_formats(const std::vector<std::string>& names)
{
    EmitFormats f{false, false};
    for(const auto& n : names)
    {
        if(n == "csv")
            f.csv = true;
        else if(n == "json")
            f.json = true;
        else
            throw Error(ErrorKind::ValidationError, "unknown format '" + n + "' (expected csv, json)",
                        "--format");
    }
    return f;
}

void report_error(const Error& e)
{
    std::cerr << "error [" << to_string(e.kind()) << "]";
    if(!e.stage().empty())
        std::cerr << " stage=" << e.stage();
    if(!e.field().empty())
        std::cerr << " field=" << e.field();
    std::cerr << ": " << e.what() << "\n";
}

void print_point(const RunResult& r)
{
    std::printf("lambda=%g S=%g", r.lambda, r.duration);
    if(r.error)
    {
        const std::string kind(to_string(r.error->kind));
        std::printf("  FAILED [%s] stage=%s: %s\n", kind.c_str(), r.error->stage.c_str(), r.error->message.c_str());
        return;
    }
    std::printf("  grid=%zu", r.grid_intervals);
    if(r.K >= 1)
        std::printf("  bound_margin=%.3e", r.bound_margin);
    if(!r.truncation_residuals.empty())
        std::printf("  residual(K=%d)=%.3e", r.K, r.truncation_residuals.back());
    std::printf("  oracle=%.3e", r.oracle.state_residual);
    if(r.geometric_phase)
        std::printf("  berry=%.6f (expected %.6f)", *r.geometric_phase, *r.expected_geometric_phase);
    std::printf("\n");
    for(const auto& w : r.warnings)
        std::printf("  warning: %s\n", w.c_str());
}

int finish(const SweepResult& sweep, const RunConfig& cfg, const Common& c, double seconds, unsigned threads)
{
    const std::string out = c.out.empty() ? cfg.output_dir : c.out;
    for(const auto& p : sweep.points)
        print_point(p);
    if(sweep.first_order && sweep.first_order->fit)
        std::printf("first-order exponent %.4f (R^2 %.4f)\n", sweep.first_order->fit->exponent,
                    sweep.first_order->fit->r2);
    if(sweep.secular && sweep.secular->fit)
        std::printf("secular exponent %.4f (R^2 %.4f)\n", sweep.secular->fit->exponent, sweep.secular->fit->r2);
    for(const auto& path : emit(sweep, cfg, out, parse_formats(c.formats), {seconds, threads}))
        std::printf("wrote %s\n", path.string().c_str());

    if(sweep.failures > 0)
        return exit_numeric;
    if(c.strict)
        for(const auto& p : sweep.points)
            if(!p.warnings.empty())
            {
                std::cerr << "strict: warnings promoted to failure\n";
                return exit_numeric;
            }
    return exit_ok;
}

int cmd_run(const Common& c)
{
    const RunConfig cfg = load_config(c.config);
    const auto t0 = std::chrono::steady_clock::now();
    SweepResult sweep;
    sweep.points.push_back(run_single(cfg));
    sweep.failures = sweep.points.front().ok() ? 0 : 1;
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    return finish(sweep, cfg, c, dt.count(), 1);
}

int cmd_sweep(const Common& c)
{
    const RunConfig cfg = load_config(c.config);
    const unsigned threads = c.threads ? c.threads : std::max(1u, std::thread::hardware_concurrency());
    const auto t0 = std::chrono::steady_clock::now();
    const SweepResult sweep = run_sweep(cfg, threads);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    return finish(sweep, cfg, c, dt.count(), threads);
}

int cmd_validate()
{
    namespace acc = acceptance;
    const auto checks = acc::all_criteria();
    int failed = 0;
    for(std::size_t i = 0; i < checks.size(); ++i)
    {
        const auto r = acc::run_guarded(checks[i], static_cast<int>(i + 1));
        std::printf("%s\n", acc::format_line(r).c_str());
        std::fflush(stdout);
        failed += r.passed ? 0 : 1;
    }
    std::printf("%zu/%zu checks passed\n", checks.size() - static_cast<std::size_t>(failed), checks.size());
    return failed == 0 ? exit_ok : exit_validate;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"adiabat: jump expansion of slow quantum evolution"};
    app.footer(schema_help);
    app.require_subcommand(1);

    Common common;
    auto add_io = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "JSON config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", common.out, "output directory (overrides output_dir)");
        sub->add_option("--format", common.formats, "comma-separated output formats: csv,json")->delimiter(',');
        sub->add_flag("--strict", common.strict, "treat warnings (oracle resolution, bound, regime) as failures");
    };

    auto* run = app.add_subcommand("run", "single (lambda, S) point");
    add_io(run);
    auto* sweep = app.add_subcommand("sweep", "parallel sweep over lambda or S with scaling reports");
    add_io(sweep);
    sweep->add_option("--threads", common.threads, "worker threads (default: all cores)")
        ->check(CLI::PositiveNumber);
    auto* validate = app.add_subcommand("validate", "oracle cross-checks and invariants on built-in families");

    int dim = 2, order = 2, initial = 0;
    auto* explain = app.add_subcommand("explain", "print the diagram expansion for a given dim and order");
    explain->add_option("--dim", dim, "Hilbert-space dimension")->check(CLI::Range(2, 8));
    explain->add_option("-K,--order", order, "maximum number of jumps")->check(CLI::Range(0, 6));
    explain->add_option("--initial", initial, "initial level")->check(CLI::NonNegativeNumber);

    try
    {
        app.parse(argc, argv);
    }
    catch(const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try
    {
        if(*run)
            return cmd_run(common);
        if(*sweep)
            return cmd_sweep(common);
        if(*validate)
            return cmd_validate();
        if(*explain)
        {
            if(initial >= dim)
                throw Error(ErrorKind::LevelOutOfRange, "initial level must lie in [0, dim)", "--initial");
            std::cout << describe_diagrams(dim, order, initial);
            return exit_ok;
        }
    }
    catch(const Error& e)
    {
        report_error(e);
        return e.is_config_error() || e.kind() == ErrorKind::IoError ? exit_config : exit_numeric;
    }
    catch(const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    }
    return exit_ok;
}
