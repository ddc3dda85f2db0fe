#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gvp/config.hpp"
#include "gvp/oracle.hpp"

namespace gvp {

struct LoadedInstances {
    std::vector<Instance> instances;
    /// One message per file that failed to parse.
    std::vector<std::string> errors;
};

/// Instances named by the config. Sokoban and N-puzzle read `levels` (files
/// or directories), concatenate them in order and keep levels
/// first_level..last_level. N-puzzle without level files generates
/// quality_per_k scrambles for every k in 1..quality_k_max. Grid builds the
/// configured board. Throws ConfigError when nothing loads.
LoadedInstances load_instances(const RunConfig& cfg);

/// The scramble pool of the quality recipe; ids are `k<k>-<j>`.
std::vector<Instance> scramble_pool(const RunConfig& cfg);

// Plans file: one `id<TAB>plan` line per solved instance.
struct PlanEntry {
    std::string id;
    std::string text;
};

void write_plans(const std::filesystem::path& path, const TaskPool& pool);
std::vector<PlanEntry> read_plans(const std::filesystem::path& path);

struct ValidationFailure {
    std::string id;
    std::string reason;
};

struct ValidationReport {
    std::size_t checked = 0;
    std::vector<ValidationFailure> failures;

    bool ok() const noexcept { return failures.empty(); }
};

ValidationReport validate_plans(std::span<const PlanEntry> plans, std::span<const Instance> instances);

// Metrics CSV: one row per iteration, no timing columns.
std::string metrics_header();
std::string metrics_row(const IterationReport& report);
/// Parses a metrics CSV back into column name -> values; throws Error on a
/// malformed row.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

/// One JSON line per instance attempt, wall time included.
std::string run_records_jsonl(const IterationReport& report, Engine engine);

/// Result of one curriculum run on a fixed instance set.
struct CurriculumRun {
    TaskPool pool;
    CurriculumSummary summary;
    std::uint64_t final_digest = 0;
    std::size_t plan_samples = 0;
    std::size_t gvi_samples = 0;
};

/// run_until_stall with run-directory output: config.json, metrics.csv,
/// runs.jsonl, plans.tsv, summary.json and checkpoints/.
CurriculumRun run_curriculum(const RunConfig& cfg, std::vector<Instance> instances,
                             const std::filesystem::path& run_dir, std::ostream* log = nullptr);

struct SolveResult {
    CurriculumRun run;
    std::vector<std::string> load_errors;
};

SolveResult cmd_solve(const RunConfig& cfg, std::ostream* log = nullptr);

struct GridDemoResult {
    int iterations = 0;
    int first_solve = 0;  // 0: never solved
    int followups = 0;
    int resolved = 0;     // follow-up iterations that solved again
    bool iteration1_connected = false;
    bool init_in_range = false;
    std::vector<IterationReport> reports;
};

/// Single-instance grid curriculum: iterates until the first solve (at most
/// grid_max_iterations), then grid_followup more iterations. Writes
/// frames/values_<it>.txt and frames/expanded_<it>.txt every frame_every
/// iterations. Requires the tabular backend.
GridDemoResult cmd_grid_demo(const RunConfig& cfg, std::ostream* log = nullptr);

inline constexpr std::array<int, 3> kRelaxations{0, 5, 10};

struct QualityRow {
    int k = 0;
    std::size_t instances = 0;
    std::size_t excluded = 0;
    std::size_t solved = 0;
    std::array<std::size_t, 3> within{};
};

struct QualityResult {
    std::size_t instances = 0;
    std::size_t excluded = 0;  // oracle gave up
    std::size_t solved = 0;
    std::array<std::size_t, 3> within{};  // solved with length <= optimum + relaxation
    std::vector<QualityRow> by_k;
    CurriculumRun run;

    double percent(std::size_t count) const { return instances ? 100.0 * count / instances : 0.0; }
};

QualityResult cmd_quality(const RunConfig& cfg, std::ostream* log = nullptr);

struct AblateRow {
    double p = 0.0;
    std::size_t instances = 0;
    std::size_t solved = 0;
    int iterations = 0;
    std::size_t plan_samples = 0;
    std::size_t gvi_samples = 0;
};

/// One curriculum per value of ablate_p, all with the same seed and instances.
std::vector<AblateRow> cmd_ablate(const RunConfig& cfg, std::ostream* log = nullptr);

ValidationReport cmd_validate(const RunConfig& cfg, const std::filesystem::path& plans);

std::vector<OracleResult> cmd_oracle(const RunConfig& cfg, std::ostream* log = nullptr);

/// Expanded cells of a grid iteration as a row-major 0/1 mask.
std::vector<std::uint8_t> expanded_mask(const GridSpec& grid, std::span<const SearchOutcome> outcomes);
/// True when the set cells form one 4-connected region containing `start`.
bool connected_from(const GridSpec& grid, std::span<const std::uint8_t> mask, std::array<int, 2> start);

}  // namespace gvp
