#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "defind/cli.hpp"

namespace {

struct AxisOptions {
    std::string alpha = "0.1:0.9:0.1";
    std::string p = "0";
    std::vector<double> q{0.0};
};

void add_io_flags(CLI::App* cmd, defind::cli::RunSpec& spec, bool input_required) {
    auto* in = cmd->add_option("--input", spec.input_path, "configuration JSON file");
    if (input_required) in->required();
    cmd->add_option("--output", spec.output_path, "report destination file");
    cmd->add_flag("--no-timestamp", spec.no_timestamp,
                  "omit the generated_at field, making reruns byte-identical");
}

void add_oracle_flags(CLI::App* cmd, defind::cli::RunSpec& spec) {
    cmd->add_option("--rel-tol", spec.oracle.rel_tol, "integrator relative tolerance")
        ->check(CLI::Range(1e-13, 1e-3));
    cmd->add_option("--rmax", spec.oracle.r_max, "outer endpoint of the infinity sweep")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--boundary-band", spec.oracle.boundary_band,
                    "half-width of the inconclusive band around nu^2 = 1")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--jobs", spec.jobs, "worker threads (0 = hardware)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deficiency indices of planar Schrodinger operators with point singularities"};
    app.require_subcommand(1);

    defind::cli::RunSpec spec;
    AxisOptions axes;

    CLI::App* classify = app.add_subcommand(
        "classify", "closed-form per-singularity indices and the configuration total");
    add_io_flags(classify, spec, true);
    classify->add_option("--format", spec.format, "stdout format")
        ->check(CLI::IsMember({"table", "json"}));

    CLI::App* verify = app.add_subcommand(
        "verify", "cross-check every singularity against the numerical oracle");
    add_io_flags(verify, spec, true);
    verify->add_option("--format", spec.format, "stdout format")
        ->check(CLI::IsMember({"table", "json"}));
    add_oracle_flags(verify, spec);

    CLI::App* grid = app.add_subcommand(
        "grid", "agreement sweep over an (alpha, p, q) grid, emitted as CSV");
    grid->add_option("--alpha", axes.alpha, "alpha axis, lo:hi:step or a single value");
    grid->add_option("--p", axes.p, "p axis, lo:hi:step or a single value");
    grid->add_option("--q", axes.q, "q values")->expected(-1);
    grid->add_option("--output", spec.output_path, "CSV destination file");
    grid->add_option("--format", spec.format, "output format")->check(CLI::IsMember({"csv"}));
    add_oracle_flags(grid, spec);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return defind::cli::kValidationFailure;
    }

    if (classify->parsed()) {
        spec.command = defind::cli::Command::Classify;
    } else if (verify->parsed()) {
        spec.command = defind::cli::Command::Verify;
    } else {
        spec.command = defind::cli::Command::Grid;
        const auto alpha_axis = defind::cli::parse_axis(axes.alpha);
        const auto p_axis = defind::cli::parse_axis(axes.p);
        if (!alpha_axis || !p_axis) {
            std::cerr << "error: axis must be lo:hi:step with step > 0, or a single value\n";
            return defind::cli::kValidationFailure;
        }
        spec.alpha_axis = *alpha_axis;
        spec.p_axis = *p_axis;
        spec.q_values = axes.q;
    }

    return defind::cli::run(spec, std::cout, std::cerr);
}
