#pragma once

#include "mobisim/presets.hpp"
#include "mobisim/simulation.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mobisim {

enum class Pattern { Confined, PingPong, Free };
enum class Density { Low, High };
enum class Frequency { Low, High };

std::string_view to_string(Pattern p);
std::string_view to_string(Density d);
std::string_view to_string(Frequency f);
std::string_view to_string(LinkLength l);

/// One cell of the comparison matrix.
struct MatrixCell {
    Pattern pattern = Pattern::Confined;
    Density density = Density::Low;
    Frequency frequency = Frequency::Low;
    LinkLength link_length = LinkLength::Short;
    HeuristicKind heuristic = HeuristicKind::LD;
    Family family = Family::ReactiveDV;
    /// Overrides the preset tolerance interval (rld_sweep).
    std::optional<SimTime> rld_delta_t;

    std::string key() const;
    auto operator<=>(const MatrixCell&) const = default;
};

/// Inverse of MatrixCell::key().
MatrixCell parse_cell_key(std::string_view key);

/// Full product in a fixed order: pattern, density, frequency, link length,
/// heuristic, family.
std::vector<MatrixCell> table2_cells();
/// Ping-pong cells, RLD at each swept tolerance plus the LD baseline.
std::vector<MatrixCell> rld_sweep_cells(const Presets& presets);

struct GridLayout {
    std::size_t cols = 0;
    std::size_t rows = 0;
    double spacing = 0.0;
    Vec2 origin;
    std::vector<Vec2> positions;
};

GridLayout grid_layout(std::size_t n, double spacing, double area_side);

/// Flow endpoints of an n-node grid: two pairs across the grid.
std::vector<std::pair<NodeId, NodeId>> grid_flow_pairs(const GridLayout& grid, std::size_t n);

/// Deterministic mapping from a cell and seed to a runnable scenario.
Scenario build_scenario(const MatrixCell& cell, const Presets& presets, std::uint64_t seed);

/// Built-in eight-node example topology: S adj A, C, E; A-B; B-C; B-D; C-D;
/// E-F; F-G; G-D. Ids S=0 A=1 B=2 C=3 D=4 E=5 F=6 G=7. One flow S -> D.
Scenario example_topology(Family family, HeuristicKind heuristic);
inline constexpr NodeId kExS = 0, kExA = 1, kExB = 2, kExC = 3, kExD = 4, kExE = 5, kExF = 6, kExG = 7;

// Scenario files: sections [scenario] [radio] [heuristic] [protocol] [tx]
// [metrics] [node N] [flow N]; see README.
Scenario read_scenario(std::istream& in);
Scenario read_scenario_file(const std::filesystem::path& path);
void write_scenario(std::ostream& out, const Scenario& s);

struct RunRow {
    std::string run_id;
    MatrixCell cell;
    std::uint64_t seed = 0;
    RunResult result;
};

/// runs.csv header and row; the column set is fixed.
std::string runs_csv_header();
std::string runs_csv_row(const RunRow& row);

/// Two-column `counter,value` summary of one run.
void write_result_csv(std::ostream& out, const RunResult& r);

/// Writes metrics_/links_/episodes_ files for a finished simulation.
void write_run_files(const Simulation& sim, const std::filesystem::path& dir, const std::string& run_id);

struct MatrixOptions {
    bool per_run_files = false;
    std::ostream* progress = nullptr;
};

/// Runs every (cell, seed) in order. A failing run throws with the cell named.
std::vector<RunRow> run_matrix(const std::vector<MatrixCell>& cells, const std::vector<std::uint64_t>& seeds,
                               const Presets& presets, const std::filesystem::path& out_dir, MatrixOptions opts = {});

void write_runs_csv(std::ostream& out, const std::vector<RunRow>& rows);
std::vector<RunRow> read_runs_csv(std::istream& in);

struct OrderingCheck {
    std::string name;
    bool applicable = false;
    bool passed = false;
    std::string detail;
};

/// Paired per-seed contrasts over whatever rows are present. Checks with no
/// matching rows are reported as skipped and do not fail.
std::vector<OrderingCheck> ordering_checks(const std::vector<RunRow>& rows);
void write_ordering_report(std::ostream& out, const std::vector<OrderingCheck>& checks);
bool all_passed(const std::vector<OrderingCheck>& checks);

}  // namespace mobisim
