#pragma once

// The evolution loop, the ablation harness and run directories.

#include "evosig/archive.hpp"
#include "evosig/evaluator.hpp"
#include "evosig/mutation.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace evosig {

struct RunConfig {
    std::size_t max_iterations = 300;
    std::uint64_t seed = 0;
    std::vector<Scenario> scenarios = builtin_scenarios();
    IntersectionConfig intersection{};
    std::optional<EnsembleConfig> ensemble; // none: offline rule mutator
    std::string template_id = "diff";
    std::optional<std::filesystem::path> template_dir;
    std::size_t prompt_chars = 32000;
    std::size_t inspirations = 4;
    ArchiveDims dims{};
    std::size_t patience = 0; // iterations without a new best; 0 disables
    std::size_t checkpoint_interval = 10;
    std::filesystem::path output_dir = "run";
    std::optional<std::filesystem::path> initial_program; // default: Webster fixture
    unsigned threads = 1;

    void validate() const; // throws Config
};

Json to_json(const RunConfig& c);
/// Relative paths are resolved against `base_dir`. Throws Config.
RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base_dir = ".");
RunConfig load_run_config(const std::filesystem::path& path);

/// One line of log.runl.
struct IterationRecord {
    std::size_t iteration = 0;
    std::optional<std::uint64_t> parent_hash;
    std::uint64_t child_hash = 0;
    std::string model;
    std::string mode; // diff, rewrite, rule, or initial
    std::string diff; // SEARCH/REPLACE text from parent to child
    std::string rationale;
    std::optional<EvalResult> result;
    std::string outcome; // inserted, replaced, rejected, mutation_failed, initial
    std::optional<EvalError> failure;
    double best_score = 0.0; // archive best after this iteration
};

Json to_json(const IterationRecord& r);
IterationRecord iteration_record_from_json(const Json& j);

struct RunReport {
    CandidateProgram best;
    double initial_score = 0.0;
    std::vector<double> trajectory; // best S_c after iteration 0, 1, ...
    std::size_t iterations = 0;     // completed loop iterations
    bool stopped_early = false;
    double wall_seconds = 0.0;
    std::map<std::string, std::size_t> outcomes;            // inserted, replaced, rejected, mutation_failed
    std::map<std::string, std::size_t> mutation_failures;   // by error kind
    std::map<std::string, std::size_t> evaluation_failures; // by error kind
};

struct RunOptions {
    bool resume = false;    // continue from the latest checkpoint in output_dir
    bool overwrite = false; // clear an existing run directory
    Mutator* mutator = nullptr; // overrides the configured mutator
    std::function<void(const IterationRecord&)> on_iteration;
};

/// Minimal one-block diff covering the changed lines; empty when equal.
std::string line_diff(const std::string& parent, const std::string& child);

/// Output directory: checkpoints/iter_NNNNNN.json, log.runl, best.sig,
/// report.txt. Throws Config/Io/Load for unrecoverable problems; mutation
/// and evaluation failures are logged and counted.
RunReport run_evolution(const RunConfig& config, const RunOptions& options = {});

/// Rebuilds the report of a run directory from its log and final checkpoint
/// (wall time is not recorded there and stays zero).
RunReport summarize_run(const std::filesystem::path& run_dir);
std::string format_report(const RunReport& report);

std::optional<std::filesystem::path> latest_checkpoint(const std::filesystem::path& run_dir);

// --------------------------------------------------------------- ablation

enum class AblationMode { RemoveOne, AddSubsets };
std::optional<AblationMode> parse_ablation_mode(std::string_view text);

struct AblationRow {
    std::string variant;
    FlagSet flags;
    double avg_delay = 0.0;
    double avg_stops = 0.0;
    double score = 0.0;
    double change = 0.0; // (S_c - S_c,base) / S_c,base
};

/// Native planner under each flag variant on the given scenarios. The first
/// row is the base.
std::vector<AblationRow> run_ablation(FlagSet base, AblationMode mode,
                                      std::span<const Scenario> scenarios = builtin_scenarios(),
                                      const IntersectionConfig& config = {}, const EvalOptions& options = {});
std::string format_ablation(const std::vector<AblationRow>& rows);

} // namespace evosig
