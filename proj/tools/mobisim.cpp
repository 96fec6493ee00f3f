// Command-line front end: single runs, the comparison matrix and its report.

#include "mobisim/harness.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace mobisim;

namespace {

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    return f;
}

Presets load_presets(const std::string& defaults_file, const std::vector<std::string>& sets) {
    Presets presets;
    if (!defaults_file.empty()) {
        std::ifstream in(defaults_file);
        if (!in) throw ConfigError("cannot open defaults file " + defaults_file);
        presets.load_ini(in);
    }
    for (const auto& s : sets) presets.set_assignment(s);
    return presets;
}

int simulate(const std::string& scenario_file, std::uint64_t seed, const fs::path& out, bool trace) {
    Scenario scenario = read_scenario_file(scenario_file);
    fs::create_directories(out);
    const std::string run_id = fmt::format("{}-s{}", scenario.name, seed);
    Simulation sim(scenario, seed);
    std::ofstream events, messages;
    if (trace) {
        events = open_out(out / ("events_" + run_id + ".tsv"));
        messages = open_out(out / ("messages_" + run_id + ".csv"));
        sim.set_event_trace(&events);
        sim.set_message_trace(&messages);
    }
    const RunResult r = sim.run();
    write_run_files(sim, out, run_id);
    auto summary = open_out(out / ("summary_" + run_id + ".csv"));
    write_result_csv(summary, r);
    std::cout << fmt::format("{}: recomputations {} control {} delivered {}/{} visible breaks {}/{}\n", run_id,
                             r.recomputations, r.control_msgs, r.pkts_delivered, r.pkts_sent, r.visible_breaks,
                             r.phys_breaks);
    return 0;
}

int matrix(const std::string& preset, const std::vector<std::uint64_t>& seeds, const fs::path& out,
           const Presets& presets, bool per_run, bool quiet) {
    std::vector<MatrixCell> cells;
    if (preset == "table2") cells = table2_cells();
    else if (preset == "rld_sweep") cells = rld_sweep_cells(presets);
    else throw ConfigError("unknown preset '" + preset + "' (table2, rld_sweep)");

    fs::create_directories(out);
    {
        auto f = open_out(out / "defaults_used.ini");
        presets.write_ini(f);
    }
    MatrixOptions opts;
    opts.per_run_files = per_run;
    opts.progress = quiet ? nullptr : &std::cerr;
    const auto rows = run_matrix(cells, seeds, presets, out, opts);
    {
        auto f = open_out(out / "runs.csv");
        write_runs_csv(f, rows);
    }
    const auto checks = ordering_checks(rows);
    {
        auto f = open_out(out / "ordering_report.txt");
        write_ordering_report(f, checks);
    }
    write_ordering_report(std::cout, checks);
    return all_passed(checks) ? 0 : 1;
}

int report(const fs::path& in_dir) {
    std::ifstream in(in_dir / "runs.csv");
    if (!in) throw ConfigError("no runs.csv in " + in_dir.string());
    const auto checks = ordering_checks(read_runs_csv(in));
    {
        auto f = open_out(in_dir / "ordering_report.txt");
        write_ordering_report(f, checks);
    }
    write_ordering_report(std::cout, checks);
    return all_passed(checks) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mobility-aware link-break heuristics on multihop routing"};
    app.require_subcommand(1);

    auto* sim_cmd = app.add_subcommand("simulate", "Run one scenario file");
    std::string scenario_file;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    bool trace = false;
    sim_cmd->add_option("--scenario", scenario_file, "Scenario file")->required()->check(CLI::ExistingFile);
    sim_cmd->add_option("--seed", seed, "Random seed");
    sim_cmd->add_option("--out", out_dir, "Output directory");
    sim_cmd->add_flag("--trace", trace, "Write event and message traces");

    auto* mat_cmd = app.add_subcommand("matrix", "Run the comparison matrix");
    std::string preset = "table2";
    std::vector<std::uint64_t> seeds{1, 2, 3};
    std::string defaults_file;
    std::vector<std::string> sets;
    bool per_run = false;
    bool quiet = false;
    mat_cmd->add_option("--preset", preset, "table2 or rld_sweep");
    mat_cmd->add_option("--seeds", seeds, "Comma-separated seeds")->delimiter(',');
    mat_cmd->add_option("--out", out_dir, "Output directory");
    mat_cmd->add_option("--defaults", defaults_file, "Defaults file overriding the built-in presets");
    mat_cmd->add_option("--set", sets, "Override one preset, key=value (repeatable)");
    mat_cmd->add_flag("--per-run-files", per_run, "Also write metrics/links/episodes files per run");
    mat_cmd->add_flag("--quiet", quiet, "No progress lines");

    auto* rep_cmd = app.add_subcommand("report", "Re-evaluate ordering checks from runs.csv");
    std::string in_dir;
    rep_cmd->add_option("--in", in_dir, "Matrix output directory")->required();

    auto* def_cmd = app.add_subcommand("defaults", "Print the preset defaults file");
    def_cmd->add_option("--defaults", defaults_file, "Start from this file");
    def_cmd->add_option("--set", sets, "Override one preset, key=value");

    auto* scn_cmd = app.add_subcommand("scenario", "Write the scenario file of one matrix cell");
    std::string cell_key;
    std::string example_family;
    auto* cell_opt = scn_cmd->add_option("--cell", cell_key, "Cell key, e.g. confined-low-high-long-rld-dv");
    auto* ex_opt = scn_cmd->add_option("--example", example_family, "Eight-node example topology for DV or LS");
    cell_opt->excludes(ex_opt);
    scn_cmd->add_option("--seed", seed, "Random seed");
    scn_cmd->add_option("--defaults", defaults_file, "Defaults file");
    scn_cmd->add_option("--set", sets, "Override one preset, key=value");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim_cmd) return simulate(scenario_file, seed, out_dir, trace);
        if (*mat_cmd) return matrix(preset, seeds, out_dir, load_presets(defaults_file, sets), per_run, quiet);
        if (*rep_cmd) return report(in_dir);
        if (*def_cmd) {
            load_presets(defaults_file, sets).write_ini(std::cout);
            return 0;
        }
        if (*scn_cmd && !example_family.empty()) {
            write_scenario(std::cout, example_topology(parse_family(example_family), HeuristicKind::LD));
            return 0;
        }
        if (*scn_cmd) {
            if (cell_key.empty()) throw ConfigError("scenario: give --cell or --example");
            write_scenario(std::cout, build_scenario(parse_cell_key(cell_key), load_presets(defaults_file, sets), seed));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
