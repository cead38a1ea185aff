// pbuck: run closed-loop parallel-buck scenarios, export traces, emit plots.
//
//   pbuck run <scenario> [-o csv] [--dt s] [--t-end s] [--record-every n] [--no-ccm-check]
//   pbuck plot <csv> [-o script]
//   pbuck validate <scenario>

#include "pbuck/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Closed-loop simulator for two parallel buck converters"};
    app.require_subcommand(1);

    std::filesystem::path scenario_path;
    std::string csv_out;
    double dt = 0.0;
    double t_end = 0.0;
    int record_every = 0;
    bool no_ccm_check = false;
    auto* run = app.add_subcommand("run", "Simulate a scenario, write a CSV trace and print metrics");
    run->add_option("scenario", scenario_path, "Scenario file")->required();
    auto* out_opt = run->add_option("-o,--output", csv_out, "CSV output path (default: <scenario stem>.csv)");
    auto* dt_opt = run->add_option("--dt", dt, "Override integration step [s]");
    auto* t_end_opt = run->add_option("--t-end", t_end, "Override end time [s]");
    auto* rec_opt = run->add_option("--record-every", record_every, "Record every n-th step");
    run->add_flag("--no-ccm-check", no_ccm_check, "Do not abort when an inductor current goes negative");

    std::filesystem::path csv_path;
    std::string script_out;
    auto* plot = app.add_subcommand("plot", "Emit a gnuplot script for a trace CSV");
    plot->add_option("csv", csv_path, "Trace CSV")->required();
    auto* script_opt = plot->add_option("-o,--output", script_out, "Script path (default: stdout)");

    std::filesystem::path validate_path;
    auto* validate = app.add_subcommand("validate", "Parse a scenario and print its canonical form");
    validate->add_option("scenario", validate_path, "Scenario file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : pbuck::cli::kUsage;
    }

    if (run->parsed()) {
        pbuck::cli::RunFlags flags;
        if (*out_opt) flags.out_csv = csv_out;
        if (*dt_opt) flags.dt = dt;
        if (*t_end_opt) flags.t_end = t_end;
        if (*rec_opt) flags.record_every = record_every;
        flags.no_ccm_check = no_ccm_check;
        return pbuck::cli::run_command(scenario_path, flags, std::cout, std::cerr);
    }
    if (plot->parsed()) {
        std::optional<std::filesystem::path> out;
        if (*script_opt) out = script_out;
        return pbuck::cli::plot_command(csv_path, out, std::cout, std::cerr);
    }
    return pbuck::cli::validate_command(validate_path, std::cout, std::cerr);
}
