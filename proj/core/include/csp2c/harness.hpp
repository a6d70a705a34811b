#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "csp2c/codegen.hpp"

namespace csp2c {

class HarnessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ToolKind { Analysis, Baseline };
enum class Outcome { Reached, NotReached, Timeout, ToolError };

std::string_view to_string(ToolKind k) noexcept;
std::string_view to_string(Outcome o) noexcept;
Outcome parse_outcome(std::string_view s);

inline constexpr double kDefaultToolTimeoutSeconds = 1000.0;

/// External tool. Templates may use {src}, {bitcode}, {out}, {instance} and
/// {version}; values are shell-quoted on substitution.
struct ToolSpec {
    std::string name;
    ToolKind kind = ToolKind::Analysis;
    std::optional<std::string> prepare;
    std::string run;
    double timeout_seconds = kDefaultToolTimeoutSeconds;
    /// ECMAScript regex searched in stdout and stderr.
    std::string success_pattern;
    /// Dialect of the generated C handed to an analysis tool.
    Dialect dialect = Dialect::KLEE;

    /// Throws HarnessError on an empty name or run template, a non-positive
    /// timeout or an invalid pattern.
    void validate() const;
};

struct InstanceEntry {
    std::filesystem::path path;
    std::optional<Family> family;
    /// Size parameter used as the scalability index.
    std::optional<std::int64_t> size;
    std::optional<std::string> expected;

    /// File stem.
    std::string id() const;
};

/// Version label used for baseline records, which run on the XCSP3 file.
inline constexpr std::string_view kBaselineVersion = "-";

/// Baseline records carry kBaselineVersion.
struct RunRecord {
    std::string tool;
    std::string instance;
    std::string version;
    Outcome outcome = Outcome::NotReached;
    double wallclock_seconds = 0.0;
    std::optional<double> normalized;
    std::string detail;  // diagnostic for ToolError, not serialized

    friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct MatrixOptions {
    /// Version numbers in each instance's family; empty selects all.
    std::vector<int> versions;
    unsigned workers = 1;
    /// Required for workers > 1; timings of such runs are only indicative.
    bool allow_parallel = false;
    std::filesystem::path work_dir = "csp2c-work";
    std::chrono::milliseconds kill_grace{2000};
};

std::vector<ToolSpec> load_tool_manifest(const std::filesystem::path& file);
std::vector<InstanceEntry> load_instance_manifest(const std::filesystem::path& file);
std::vector<ToolSpec> parse_tool_manifest(const std::string& json_text);
std::vector<InstanceEntry> parse_instance_manifest(const std::string& json_text);

/// One record per (analysis tool, instance, version) and per (baseline, instance),
/// ordered by instance, then version (baselines first), then tool manifest order.
/// Records are not normalized; see normalize().
std::vector<RunRecord> run_matrix(const std::vector<InstanceEntry>& instances, const std::vector<ToolSpec>& tools,
                                  const MatrixOptions& options = {});

bool is_baseline(const RunRecord& r) noexcept;

/// Sets normalized = wallclock / baseline wallclock on every analysis record whose
/// instance has a completed baseline record (Reached or NotReached) with positive
/// wallclock, and clears it elsewhere. The baseline is `baseline_tool`, or the
/// first baseline tool in record order. Baseline records never carry a ratio.
void normalize(std::vector<RunRecord>& records, std::optional<std::string> baseline_tool = std::nullopt);

struct RobustnessRow {
    std::string tool;
    std::string version;
    std::optional<double> mean;  // over non-Timeout, non-ToolError runs
    std::size_t timeouts = 0;
    std::size_t n = 0;  // runs entering the mean
};

struct ScalabilityRow {
    std::string tool;
    std::int64_t size_index = 0;
    std::size_t timeouts = 0;
};

struct Report {
    std::vector<RobustnessRow> robustness;    // sorted by (tool, version)
    std::vector<ScalabilityRow> scalability;  // sorted by (tool, size_index)
    std::vector<RunRecord> records;
    /// Robustness holds raw seconds because no record is normalized.
    bool raw_seconds = false;
    bool no_analysis_tools = false;
    bool parallel = false;
    std::vector<std::string> warnings;
};

/// Aggregates normalized records. `sizes` maps instance ids to their size
/// parameter. Throws HarnessError on empty records.
Report build_report(const std::vector<RunRecord>& records, const std::map<std::string, std::int64_t>& sizes,
                    bool parallel = false);

/// Writes raw.csv, robustness.csv and scalability.csv; returns the paths.
std::vector<std::filesystem::path> emit_csv(const Report& report, const std::filesystem::path& dir);
/// Writes robustness.svg and, when the table is non-empty, scalability.svg.
/// A skipped chart adds a warning to `report`.
std::vector<std::filesystem::path> emit_svg(Report& report, const std::filesystem::path& dir);

/// Reads a raw.csv written by emit_csv.
std::vector<RunRecord> read_records_csv(const std::filesystem::path& file);

/// Sidecars next to raw.csv: instances.csv (instance,size) and run_info.json.
void write_sidecars(const std::filesystem::path& dir, const std::vector<InstanceEntry>& instances, bool parallel);
std::map<std::string, std::int64_t> read_sizes_csv(const std::filesystem::path& file);
bool read_parallel_flag(const std::filesystem::path& run_info);

std::string format_seconds(double s);

}  // namespace csp2c
