#pragma once

// Prompt assembly, model ensemble, response extraction and the offline
// rule-based mutator.

#include "evosig/archive.hpp"
#include "evosig/io.hpp"
#include "evosig/rng.hpp"
#include "evosig/siglang.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace evosig {

enum class MutationMode { Diff, Rewrite, Rule };
std::string_view to_string(MutationMode mode);

// -------------------------------------------------------------- templates

/// A prompt template file has four sections, each introduced by a header
/// line: [mode] (diff or rewrite), [system], [user], [format]. The system and
/// user texts may use {{parent_source}}, {{metrics}}, {{inspirations}} and
/// {{format_instructions}}.
struct PromptTemplate {
    std::string id;
    MutationMode mode = MutationMode::Diff;
    std::string system;
    std::string user;
    std::string format;
};

PromptTemplate parse_template(const std::string& id, const std::string& text);
/// Looks in `dir` first (if given), then the built-in templates ("diff",
/// "rewrite"). Throws TemplateNotFound.
PromptTemplate load_template(const std::string& id, const std::optional<std::filesystem::path>& dir = std::nullopt);

struct PromptBundle {
    std::string system_text;
    std::string user_text;
    MutationMode mode = MutationMode::Diff;
    std::string template_id;
    std::size_t inspirations_used = 0;
    std::size_t inspirations_dropped = 0;

    std::size_t size() const { return system_text.size() + user_text.size(); }
    friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

struct PromptOptions {
    std::size_t max_chars = 32000; // system + user
    std::optional<std::filesystem::path> template_dir;
};

std::string format_metrics(const EvalResult& result);
/// Inspiration section for the given programs, in order; empty when none.
std::string format_inspirations(const std::vector<const CandidateProgram*>& inspirations);

/// Inspirations are dropped lowest S_c first until the prompt fits. The
/// parent is never dropped, so the result may still exceed the budget when no
/// inspirations are left.
PromptBundle build_prompt(const CandidateProgram& parent, const std::vector<const CandidateProgram*>& inspirations,
                          const PromptTemplate& tmpl, const PromptOptions& options = {});
PromptBundle build_prompt(const CandidateProgram& parent, const std::vector<const CandidateProgram*>& inspirations,
                          const std::string& template_id, const PromptOptions& options = {});

// --------------------------------------------------------------- ensemble

struct ModelEndpoint {
    std::string url;   // full chat-completions URL
    std::string model; // opaque identifier sent to the endpoint
    double weight = 0.0;
    std::string auth_env; // environment variable holding a bearer token; may be empty
    friend bool operator==(const ModelEndpoint&, const ModelEndpoint&) = default;
};

struct EnsembleConfig {
    std::vector<ModelEndpoint> models;
    double temperature = 0.6;
    double timeout = 120.0;      // s, per request
    int max_retries = 3;         // attempts after the first
    double backoff = 1.0;        // s, doubled after each failed attempt
    bool network = false;        // requests are refused unless set

    /// The four-model mix (0.4, 0.1, 0.4, 0.1) against a local endpoint.
    static EnsembleConfig default_mix(const std::string& url = "http://127.0.0.1:8000/v1/chat/completions");
    void validate() const; // throws Config
    friend bool operator==(const EnsembleConfig&, const EnsembleConfig&) = default;
};

Json to_json(const EnsembleConfig& c);
/// Throws Config.
EnsembleConfig ensemble_from_json(const Json& j);

/// Weighted categorical draw, one uniform per call. Throws InvalidArgument
/// for an empty or all-zero list.
const ModelEndpoint& sample_model(const EnsembleConfig& config, Rng& rng);

/// Chat-completions request body for the prompt.
Json chat_request(const PromptBundle& prompt, const ModelEndpoint& model, double temperature);

/// POSTs the prompt and returns choices[0].message.content. Retries
/// connection failures, 429 and 5xx with exponential backoff. Throws Mode
/// when networking is disabled, Transport otherwise.
std::string request_mutation(const PromptBundle& prompt, const ModelEndpoint& model, const EnsembleConfig& config);

// ------------------------------------------------------------- extraction

struct MutationFailure {
    ErrorKind kind = ErrorKind::NoUsableCode;
    std::string message;
    std::optional<std::size_t> block_index; // failing diff block
    std::vector<sig::Violation> violations;
};

struct MutationOutcome {
    sig::SourceText child;
    std::string rationale;
    MutationMode mode = MutationMode::Diff;
    std::string model;
    std::optional<MutationFailure> failure;

    bool ok() const { return !failure.has_value(); }
};

/// Text of the first fenced code block, if any.
std::optional<std::string> first_fenced_block(std::string_view text);
/// The response with fenced blocks and SEARCH/REPLACE blocks removed.
std::string strip_code(std::string_view text);

/// SEARCH/REPLACE blocks win over a fenced rewrite. A successful outcome
/// always carries a child that parses and validates.
MutationOutcome extract_mutation(std::string_view response, const sig::SourceText& parent,
                                 const sig::Limits& limits = {});

// ------------------------------------------------------------ rule edits

enum class SiteKind { Scale, Toggle, Swap };

struct MutationSite {
    SiteKind kind = SiteKind::Scale;
    std::size_t offset = 0; // byte range of the token in the source
    std::size_t length = 0;
    double value = 0.0; // Scale only
};

inline constexpr double kRuleFactors[] = {0.5, 0.8, 1.25, 2.0};

/// Numeric literals (except zero and loop bounds), true/false, and calls to
/// min/max.
std::vector<MutationSite> mutation_sites(const sig::SourceText& source);
/// Shortest decimal text for a scaled literal, rounded to 6 decimals.
std::string format_literal(double value);
sig::SourceText apply_site(const sig::SourceText& source, const MutationSite& site, double factor = 1.0);

/// Picks a site uniformly, then a factor uniformly for Scale sites. Throws
/// NoMutableSite (or Syntax if the parent does not parse).
MutationOutcome rule_mutate(const sig::SourceText& parent, Rng& rng);

// --------------------------------------------------------------- mutators

class Mutator {
public:
    virtual ~Mutator() = default;
    /// Never throws for a bad child; failures are returned in the outcome.
    virtual MutationOutcome mutate(const CandidateProgram& parent,
                                   const std::vector<const CandidateProgram*>& inspirations, Rng& rng) = 0;
};

class RuleMutator : public Mutator {
public:
    MutationOutcome mutate(const CandidateProgram& parent, const std::vector<const CandidateProgram*>& inspirations,
                           Rng& rng) override;
};

/// Samples a model, builds the prompt, requests and extracts. Transport and
/// mode errors come back as failures.
class LlmMutator : public Mutator {
public:
    LlmMutator(EnsembleConfig ensemble, std::string template_id, PromptOptions prompt = {});
    MutationOutcome mutate(const CandidateProgram& parent, const std::vector<const CandidateProgram*>& inspirations,
                           Rng& rng) override;
    std::size_t requests() const { return requests_; }

private:
    EnsembleConfig ensemble_;
    PromptTemplate template_;
    PromptOptions prompt_;
    std::size_t requests_ = 0;
};

} // namespace evosig
