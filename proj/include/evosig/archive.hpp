#pragma once

#include "evosig/evaluator.hpp"
#include "evosig/io.hpp"
#include "evosig/rng.hpp"
#include "evosig/siglang.hpp"

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace evosig {

inline constexpr std::string_view kEngineVersion = "0.3.0";

struct Cell {
    int i = 0; // token-length bucket
    int j = 0; // mean-cycle bucket
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Grid shape. Defaults: 40 buckets of 25 tokens, 26 buckets of 10 s of
/// mean cycle starting at 40 s.
struct ArchiveDims {
    int token_buckets = 40;
    double tokens_per_bucket = 25.0;
    int cycle_buckets = 26;
    double cycle_origin = 40.0;
    double cycle_per_bucket = 10.0;

    void validate() const;
    friend bool operator==(const ArchiveDims&, const ArchiveDims&) = default;
};

Cell descriptor(std::size_t token_count, double mean_cycle, const ArchiveDims& dims = {});
/// Token count of the source excluding the end marker. Throws Syntax/Limit.
std::size_t token_count(const sig::SourceText& source);

struct CandidateProgram {
    sig::SourceText source;
    EvalResult result;
    std::optional<std::uint64_t> parent_hash;
    std::size_t iteration_born = 0;
    std::string model_used;
    Cell cell;               // set by Archive::insert
    std::size_t tokens = 0;  // set by Archive::insert

    double score() const { return result.scores.combined; }
    friend bool operator==(const CandidateProgram&, const CandidateProgram&) = default;
};

enum class InsertOutcome { Inserted, Replaced, Rejected };
std::string_view to_string(InsertOutcome o);

struct InsertResult {
    InsertOutcome outcome = InsertOutcome::Rejected;
    Cell cell;
    std::optional<CandidateProgram> evicted;
    std::string reason; // set when rejected
};

/// MAP-Elites grid: one program per cell, insert-if-strictly-better.
class Archive {
public:
    explicit Archive(ArchiveDims dims = {});

    /// Recomputes the program's cell and token count. Error results are
    /// rejected; ties keep the incumbent.
    InsertResult insert(CandidateProgram program);

    /// With probability 0.7 uniform over occupied cells (in cell order),
    /// otherwise the best program. Throws EmptyArchive.
    const CandidateProgram& sample_parent(Rng& rng) const;

    /// Top ceil(k/2) by score, then floor(k/2) drawn uniformly from the rest,
    /// never the excluded cell and never twice.
    std::vector<const CandidateProgram*> sample_inspirations(Rng& rng, std::size_t k,
                                                             std::optional<Cell> exclude = std::nullopt) const;

    const CandidateProgram* best() const;
    const CandidateProgram* at(Cell c) const;
    bool empty() const { return grid_.empty(); }
    std::size_t size() const { return grid_.size(); }
    const std::map<Cell, CandidateProgram>& entries() const { return grid_; }
    const ArchiveDims& dims() const { return dims_; }

    friend bool operator==(const Archive&, const Archive&) = default;

    Json to_json() const;
    /// Throws Load for anything malformed or inconsistent.
    static Archive from_json(const Json& j);

private:
    ArchiveDims dims_;
    std::map<Cell, CandidateProgram> grid_;
    std::optional<Cell> best_;
};

/// Best first; equal scores in cell order.
std::vector<const CandidateProgram*> ranked(const Archive& archive);

Json to_json(const CandidateProgram& p);
CandidateProgram candidate_from_json(const Json& j);

void checkpoint(const Archive& archive, const std::filesystem::path& path);
/// Throws Load (corrupt or truncated file) or Io (unreadable).
Archive load_archive(const std::filesystem::path& path);

} // namespace evosig
