#include "evosig/orchestrator.hpp"

#include "evosig/error.hpp"
#include "evosig/fixtures.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace evosig {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::Config, what); }

constexpr std::string_view kCheckpointPrefix = "iter_";

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

fs::path resolve(const fs::path& p, const fs::path& base) { return p.is_absolute() ? p : base / p; }

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return lines;
}

std::string join_lines(const std::vector<std::string>& lines, std::size_t from, std::size_t to) {
    std::string out;
    for (std::size_t k = from; k < to; ++k) {
        if (k > from) out += '\n';
        out += lines[k];
    }
    return out;
}

Json error_json(const std::optional<EvalError>& e) {
    if (!e) return nullptr;
    return {{"kind", std::string(to_string(e->kind))}, {"message", e->message}};
}

std::optional<EvalError> error_from(const Json& j) {
    if (j.is_null()) return std::nullopt;
    const auto kind = parse_error_kind(j.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorKind::Load, "unknown error kind in log");
    return EvalError{*kind, j.at("message").get<std::string>()};
}

Json count_json(const std::map<std::string, std::size_t>& m) {
    Json j = Json::object();
    for (const auto& [k, v] : m) j[k] = v;
    return j;
}

std::map<std::string, std::size_t> counts_from(const Json& j) {
    std::map<std::string, std::size_t> m;
    for (auto it = j.begin(); it != j.end(); ++it) m[it.key()] = it.value().get<std::size_t>();
    return m;
}

fs::path checkpoint_path(const fs::path& dir, std::size_t iteration) {
    char name[32];
    std::snprintf(name, sizeof name, "iter_%06zu.json", iteration);
    return dir / "checkpoints" / name;
}

// Everything in the loop that a checkpoint has to carry besides the archive.
struct LoopState {
    std::size_t iteration = 0;
    std::uint64_t rng_state = 0;
    std::size_t since_improvement = 0;
    bool stopped_early = false;
    std::vector<double> trajectory;
    std::map<std::string, std::size_t> outcomes, mutation_failures, evaluation_failures;
};

Json state_json(const LoopState& s, const Json& config) {
    return {
        {"iteration", s.iteration},
        {"rng_state", s.rng_state},
        {"since_improvement", s.since_improvement},
        {"stopped_early", s.stopped_early},
        {"trajectory", s.trajectory},
        {"outcomes", count_json(s.outcomes)},
        {"mutation_failures", count_json(s.mutation_failures)},
        {"evaluation_failures", count_json(s.evaluation_failures)},
        {"config", config},
    };
}

LoopState state_from(const Json& j) {
    LoopState s;
    s.iteration = j.at("iteration").get<std::size_t>();
    s.rng_state = j.at("rng_state").get<std::uint64_t>();
    s.since_improvement = j.at("since_improvement").get<std::size_t>();
    s.stopped_early = j.at("stopped_early").get<bool>();
    s.trajectory = j.at("trajectory").get<std::vector<double>>();
    s.outcomes = counts_from(j.at("outcomes"));
    s.mutation_failures = counts_from(j.at("mutation_failures"));
    s.evaluation_failures = counts_from(j.at("evaluation_failures"));
    return s;
}

// The parts of a config that must not change across a resume.
Json replay_identity(const RunConfig& c) {
    auto j = to_json(c);
    j.erase("max_iterations");
    j.erase("output_dir");
    j.erase("threads");
    return j;
}

void write_checkpoint(const fs::path& dir, const Archive& archive, const LoopState& s, const Json& identity) {
    auto j = archive.to_json();
    j["run"] = state_json(s, identity);
    write_text_file(checkpoint_path(dir, s.iteration), j.dump(1) + "\n");
}

std::vector<IterationRecord> read_log(const fs::path& path, bool tolerate_torn_tail) {
    std::vector<IterationRecord> out;
    std::istringstream in(read_text_file(path));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            out.push_back(iteration_record_from_json(Json::parse(line)));
        } catch (const std::exception& e) {
            if (tolerate_torn_tail && in.peek() == std::char_traits<char>::eof()) break;
            throw Error(ErrorKind::Load, path.string() + ": bad record after iteration " +
                                             std::to_string(out.empty() ? 0 : out.back().iteration) + ": " + e.what());
        }
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------- config

void RunConfig::validate() const {
    if (max_iterations < 1) config_error("max_iterations must be >= 1");
    if (scenarios.empty()) config_error("scenario list is empty");
    if (checkpoint_interval < 1) config_error("checkpoint_interval must be >= 1");
    if (threads < 1) config_error("threads must be >= 1");
    if (output_dir.empty()) config_error("output_dir is empty");
    try {
        intersection.validate();
        dims.validate();
    } catch (const Error& e) {
        config_error(e.what());
    }
    if (ensemble) ensemble->validate();
}

Json to_json(const RunConfig& c) {
    Json scenarios = Json::array();
    for (const auto& s : c.scenarios) scenarios.push_back(to_json(s));
    return {
        {"max_iterations", c.max_iterations},
        {"seed", c.seed},
        {"scenarios", scenarios},
        {"intersection", to_json(c.intersection)},
        {"ensemble", c.ensemble ? to_json(*c.ensemble) : Json("offline")},
        {"template", c.template_id},
        {"template_dir", c.template_dir ? Json(c.template_dir->string()) : Json(nullptr)},
        {"prompt_chars", c.prompt_chars},
        {"inspirations", c.inspirations},
        {"archive",
         {{"token_buckets", c.dims.token_buckets},
          {"tokens_per_bucket", c.dims.tokens_per_bucket},
          {"cycle_buckets", c.dims.cycle_buckets},
          {"cycle_origin", c.dims.cycle_origin},
          {"cycle_per_bucket", c.dims.cycle_per_bucket}}},
        {"patience", c.patience},
        {"checkpoint_interval", c.checkpoint_interval},
        {"output_dir", c.output_dir.string()},
        {"initial_program", c.initial_program ? Json(c.initial_program->string()) : Json(nullptr)},
        {"threads", c.threads},
    };
}

RunConfig run_config_from_json(const Json& j, const fs::path& base_dir) {
    if (!j.is_object()) config_error("run config must be an object");
    RunConfig c;
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const auto& k = it.key();
            const auto& v = it.value();
            if (k == "max_iterations") {
                c.max_iterations = v.get<std::size_t>();
            } else if (k == "seed") {
                c.seed = v.get<std::uint64_t>();
            } else if (k == "scenarios") {
                if (!v.is_array()) config_error("scenarios must be a list");
                c.scenarios.clear();
                for (const auto& s : v) {
                    if (s.is_object()) {
                        c.scenarios.push_back(scenario_from_json(s));
                    } else {
                        const auto name = s.get<std::string>();
                        if (auto b = builtin_scenario(name))
                            c.scenarios.push_back(*b);
                        else
                            c.scenarios.push_back(load_scenario(resolve(name, base_dir)));
                    }
                }
            } else if (k == "intersection") {
                c.intersection = config_from_json(v);
            } else if (k == "ensemble") {
                if (v.is_string() && v.get<std::string>() == "offline")
                    c.ensemble.reset();
                else if (v.is_string())
                    c.ensemble = ensemble_from_json(read_json_file(resolve(v.get<std::string>(), base_dir)));
                else
                    c.ensemble = ensemble_from_json(v);
            } else if (k == "template") {
                c.template_id = v.get<std::string>();
            } else if (k == "template_dir") {
                if (!v.is_null()) c.template_dir = resolve(v.get<std::string>(), base_dir);
            } else if (k == "prompt_chars") {
                c.prompt_chars = v.get<std::size_t>();
            } else if (k == "inspirations") {
                c.inspirations = v.get<std::size_t>();
            } else if (k == "archive") {
                for (auto a = v.begin(); a != v.end(); ++a) {
                    if (a.key() == "token_buckets") c.dims.token_buckets = a->get<int>();
                    else if (a.key() == "tokens_per_bucket") c.dims.tokens_per_bucket = a->get<double>();
                    else if (a.key() == "cycle_buckets") c.dims.cycle_buckets = a->get<int>();
                    else if (a.key() == "cycle_origin") c.dims.cycle_origin = a->get<double>();
                    else if (a.key() == "cycle_per_bucket") c.dims.cycle_per_bucket = a->get<double>();
                    else config_error("unknown field '" + a.key() + "' in archive");
                }
            } else if (k == "patience") {
                c.patience = v.get<std::size_t>();
            } else if (k == "checkpoint_interval") {
                c.checkpoint_interval = v.get<std::size_t>();
            } else if (k == "output_dir") {
                c.output_dir = resolve(v.get<std::string>(), base_dir);
            } else if (k == "initial_program") {
                if (!v.is_null()) c.initial_program = resolve(v.get<std::string>(), base_dir);
            } else if (k == "threads") {
                c.threads = v.get<unsigned>();
            } else {
                config_error("unknown field '" + k + "' in run config");
            }
        }
    } catch (const Json::exception& e) {
        config_error(std::string("run config: ") + e.what());
    }
    c.validate();
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    return run_config_from_json(read_json_file(path), path.has_parent_path() ? path.parent_path() : fs::path("."));
}

// ------------------------------------------------------------------- log

Json to_json(const IterationRecord& r) {
    return {
        {"iteration", r.iteration},
        {"parent", r.parent_hash ? Json(sig::hash_hex(*r.parent_hash)) : Json(nullptr)},
        {"child", sig::hash_hex(r.child_hash)},
        {"model", r.model},
        {"mode", r.mode},
        {"outcome", r.outcome},
        {"best_S_c", r.best_score},
        {"failure", error_json(r.failure)},
        {"result", r.result ? to_json(*r.result) : Json(nullptr)},
        {"diff", r.diff},
        {"rationale", r.rationale},
    };
}

IterationRecord iteration_record_from_json(const Json& j) {
    auto hex = [](const std::string& s) {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used, 16);
        if (used != s.size() || s.size() != 16) throw Error(ErrorKind::Load, "bad hash '" + s + "'");
        return static_cast<std::uint64_t>(v);
    };
    IterationRecord r;
    r.iteration = j.at("iteration").get<std::size_t>();
    if (!j.at("parent").is_null()) r.parent_hash = hex(j.at("parent").get<std::string>());
    r.child_hash = hex(j.at("child").get<std::string>());
    r.model = j.at("model").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.outcome = j.at("outcome").get<std::string>();
    r.best_score = j.at("best_S_c").get<double>();
    r.failure = error_from(j.at("failure"));
    if (!j.at("result").is_null()) r.result = eval_result_from_json(j.at("result"));
    r.diff = j.at("diff").get<std::string>();
    r.rationale = j.at("rationale").get<std::string>();
    return r;
}

std::string line_diff(const std::string& parent, const std::string& child) {
    if (parent == child) return "";
    const auto a = split_lines(parent);
    const auto b = split_lines(child);
    std::size_t pre = 0;
    while (pre < a.size() && pre < b.size() && a[pre] == b[pre]) ++pre;
    std::size_t suf = 0;
    while (suf < a.size() - pre && suf < b.size() - pre && a[a.size() - 1 - suf] == b[b.size() - 1 - suf]) ++suf;
    // widen until the search text is non-empty on both sides and first
    // matches where the edit is
    const auto offset = [&](std::size_t line) {
        std::size_t at = 0;
        for (std::size_t k = 0; k < line; ++k) at += a[k].size() + 1;
        return at;
    };
    sig::DiffBlock block;
    while (true) {
        block = {join_lines(a, pre, a.size() - suf), join_lines(b, pre, b.size() - suf)};
        const bool edge = pre + suf == a.size() || pre + suf == b.size();
        if (!edge && !block.search.empty() && parent.find(block.search) == offset(pre)) break;
        if (pre > 0)
            --pre;
        else if (suf > 0)
            --suf;
        else
            break;
    }
    try {
        if (sig::apply_diff(sig::SourceText(parent), std::span(&block, 1)).text != child) block = {"", child};
    } catch (const Error&) {
        block = {"", child};
    }
    return sig::format_diff_blocks(std::span(&block, 1));
}

std::optional<fs::path> latest_checkpoint(const fs::path& run_dir) {
    const auto dir = run_dir / "checkpoints";
    if (!fs::is_directory(dir)) return std::nullopt;
    std::optional<fs::path> best;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (name.rfind(kCheckpointPrefix, 0) != 0 || e.path().extension() != ".json") continue;
        if (!best || name > best->filename().string()) best = e.path();
    }
    return best;
}

// ------------------------------------------------------------- evolution

RunReport run_evolution(const RunConfig& config, const RunOptions& options) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    const auto& dir = config.output_dir;
    const auto log_path = dir / "log.runl";
    const auto identity = replay_identity(config);

    EvalOptions eval;
    eval.threads = config.threads;
    auto evaluate = [&](const sig::SourceText& src) {
        return evaluate_program(src, config.scenarios, config.intersection, eval);
    };

    std::unique_ptr<Mutator> owned;
    Mutator* mutator = options.mutator;
    if (!mutator) {
        if (config.ensemble) {
            PromptOptions prompt;
            prompt.max_chars = config.prompt_chars;
            prompt.template_dir = config.template_dir;
            owned = std::make_unique<LlmMutator>(*config.ensemble, config.template_id, prompt);
        } else {
            owned = std::make_unique<RuleMutator>();
        }
        mutator = owned.get();
    }

    Archive archive(config.dims);
    LoopState state;
    Rng rng(config.seed);

    auto append = [&](const IterationRecord& r) {
        std::ofstream out(log_path, std::ios::app | std::ios::binary);
        out << to_json(r).dump() << '\n';
        out.flush();
        if (!out) throw Error(ErrorKind::Io, "cannot append to " + log_path.string());
        if (options.on_iteration) options.on_iteration(r);
    };

    if (options.resume) {
        const auto ckpt = latest_checkpoint(dir);
        if (!ckpt) config_error("nothing to resume in " + dir.string());
        Json j;
        try {
            j = Json::parse(read_text_file(*ckpt));
        } catch (const Json::parse_error& e) {
            throw Error(ErrorKind::Load, ckpt->string() + ": " + e.what());
        }
        archive = Archive::from_json(j);
        try {
            state = state_from(j.at("run"));
            if (j.at("run").at("config") != identity)
                config_error("run config differs from the one in " + ckpt->string());
        } catch (const Json::exception& e) {
            throw Error(ErrorKind::Load, ckpt->string() + ": " + e.what());
        }
        rng.set_state(state.rng_state);
        // drop log records past the checkpoint; they are replayed
        std::string kept;
        for (const auto& r : read_log(log_path, true))
            if (r.iteration <= state.iteration) kept += to_json(r).dump() + "\n";
        write_text_file(log_path, kept);
    } else {
        if (fs::exists(log_path) || fs::exists(dir / "checkpoints")) {
            if (!options.overwrite) config_error(dir.string() + " already holds a run (resume or overwrite it)");
            for (const char* f : {"log.runl", "best.sig", "report.txt", "config.json"}) fs::remove(dir / f);
            fs::remove_all(dir / "checkpoints");
        }
        fs::create_directories(dir / "checkpoints");
        write_text_file(dir / "config.json", to_json(config).dump(2) + "\n");

        CandidateProgram initial;
        initial.source = sig::SourceText(config.initial_program ? read_text_file(*config.initial_program)
                                                                : std::string(fixtures::webster_program()));
        initial.model_used = "initial";
        initial.result = evaluate(initial.source);
        if (!initial.result.ok())
            config_error("initial program failed evaluation: " + std::string(to_string(initial.result.error->kind)) +
                         ": " + initial.result.error->message);
        const auto ins = archive.insert(initial);
        if (ins.outcome == InsertOutcome::Rejected) config_error("initial program rejected: " + ins.reason);

        IterationRecord r;
        r.child_hash = initial.source.hash;
        r.model = "initial";
        r.mode = "initial";
        r.result = initial.result;
        r.outcome = "initial";
        r.best_score = archive.best()->score();
        state.trajectory.push_back(r.best_score);
        append(r);
        state.rng_state = rng.state();
        write_checkpoint(dir, archive, state, identity);
    }

    while (!state.stopped_early && state.iteration < config.max_iterations) {
        const std::size_t i = ++state.iteration;
        const double best_before = archive.best()->score();
        const CandidateProgram parent = archive.sample_parent(rng);
        const auto inspirations = archive.sample_inspirations(rng, config.inspirations, parent.cell);
        auto mutation = mutator->mutate(parent, inspirations, rng);

        IterationRecord r;
        r.iteration = i;
        r.parent_hash = parent.source.hash;
        r.model = mutation.model;
        r.mode = std::string(to_string(mutation.mode));
        r.rationale = mutation.rationale;
        r.child_hash = mutation.child.hash;
        if (!mutation.child.text.empty()) r.diff = line_diff(parent.source.text, mutation.child.text);

        if (!mutation.ok()) {
            r.outcome = "mutation_failed";
            r.failure = EvalError{mutation.failure->kind, mutation.failure->message};
            ++state.mutation_failures[std::string(to_string(mutation.failure->kind))];
        } else {
            CandidateProgram child;
            child.source = mutation.child;
            child.parent_hash = parent.source.hash;
            child.iteration_born = i;
            child.model_used = mutation.model;
            child.result = evaluate(child.source);
            r.result = child.result;
            if (!child.result.ok()) {
                r.failure = child.result.error;
                ++state.evaluation_failures[std::string(to_string(child.result.error->kind))];
            }
            r.outcome = std::string(to_string(archive.insert(std::move(child)).outcome));
        }
        ++state.outcomes[r.outcome];
        r.best_score = archive.best()->score();
        state.trajectory.push_back(r.best_score);
        state.since_improvement = r.best_score > best_before ? 0 : state.since_improvement + 1;
        if (config.patience > 0 && state.since_improvement >= config.patience) state.stopped_early = true;
        state.rng_state = rng.state();
        append(r);
        if (i % config.checkpoint_interval == 0 || state.stopped_early || i == config.max_iterations)
            write_checkpoint(dir, archive, state, identity);
    }
    if (!fs::exists(checkpoint_path(dir, state.iteration))) write_checkpoint(dir, archive, state, identity);

    RunReport report;
    report.best = *archive.best();
    report.trajectory = state.trajectory;
    report.initial_score = state.trajectory.front();
    report.iterations = state.iteration;
    report.stopped_early = state.stopped_early;
    report.outcomes = state.outcomes;
    report.mutation_failures = state.mutation_failures;
    report.evaluation_failures = state.evaluation_failures;
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    write_text_file(dir / "best.sig", report.best.source.text);
    write_text_file(dir / "report.txt", format_report(report));
    return report;
}

RunReport summarize_run(const fs::path& run_dir) {
    const auto ckpt = latest_checkpoint(run_dir);
    if (!ckpt) throw Error(ErrorKind::Load, run_dir.string() + " has no checkpoints");
    Json j;
    try {
        j = Json::parse(read_text_file(*ckpt));
    } catch (const Json::parse_error& e) {
        throw Error(ErrorKind::Load, ckpt->string() + ": " + e.what());
    }
    const auto archive = Archive::from_json(j);
    LoopState state;
    try {
        state = state_from(j.at("run"));
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::Load, ckpt->string() + ": " + e.what());
    }

    RunReport report;
    report.best = *archive.best();
    report.stopped_early = state.stopped_early;
    for (const auto& r : read_log(run_dir / "log.runl", false)) {
        if (r.iteration > state.iteration) break;
        if (r.iteration != report.trajectory.size())
            throw Error(ErrorKind::Load, "log is missing iteration " + std::to_string(report.trajectory.size()));
        report.trajectory.push_back(r.best_score);
        if (r.outcome == "initial") continue;
        report.iterations = r.iteration;
        ++report.outcomes[r.outcome];
        if (r.outcome == "mutation_failed")
            ++report.mutation_failures[std::string(to_string(r.failure->kind))];
        else if (r.failure)
            ++report.evaluation_failures[std::string(to_string(r.failure->kind))];
    }
    if (report.trajectory.empty()) throw Error(ErrorKind::Load, "empty run log");
    report.initial_score = report.trajectory.front();
    return report;
}

std::string format_report(const RunReport& r) {
    std::ostringstream os;
    const auto& b = r.best;
    os << "iterations: " << r.iterations << (r.stopped_early ? " (stopped early)" : "") << '\n';
    if (r.wall_seconds > 0) os << "wall time: " << fmt("%.1f", r.wall_seconds) << " s\n";
    os << "initial S_c: " << fmt("%.4f", r.initial_score) << '\n';
    os << "best S_c: " << fmt("%.4f", b.score()) << " (iteration " << b.iteration_born << ", " << b.model_used
       << ", cell " << b.cell.i << "," << b.cell.j << ", hash " << b.source.hash_hex() << ")\n";
    os << "best avg delay: " << fmt("%.2f", b.result.avg_delay) << " s/veh\n";
    os << "best avg stops: " << fmt("%.3f", b.result.avg_stops) << " per veh\n";
    for (const auto& s : b.result.scenarios)
        os << "  " << s.id << ": " << format_plan(s.plan) << "  delay " << fmt("%.2f", s.avg_delay) << ", stops "
           << fmt("%.3f", s.avg_stops) << '\n';
    auto counts = [&](const char* title, const std::map<std::string, std::size_t>& m) {
        os << title << ':';
        if (m.empty()) os << " none";
        for (const auto& [k, v] : m) os << ' ' << k << '=' << v;
        os << '\n';
    };
    counts("outcomes", r.outcomes);
    counts("mutation failures", r.mutation_failures);
    counts("evaluation failures", r.evaluation_failures);
    os << "improvements:";
    for (std::size_t k = 0; k < r.trajectory.size(); ++k)
        if (k == 0 || r.trajectory[k] > r.trajectory[k - 1]) os << ' ' << k << ':' << fmt("%.4f", r.trajectory[k]);
    os << '\n';
    return os.str();
}

// --------------------------------------------------------------- ablation

std::optional<AblationMode> parse_ablation_mode(std::string_view text) {
    if (text == "remove-one") return AblationMode::RemoveOne;
    if (text == "add-subsets") return AblationMode::AddSubsets;
    return std::nullopt;
}

std::vector<AblationRow> run_ablation(FlagSet base, AblationMode mode, std::span<const Scenario> scenarios,
                                      const IntersectionConfig& config, const EvalOptions& options) {
    using M = Modification;
    std::vector<std::pair<std::string, FlagSet>> variants;
    if (mode == AblationMode::RemoveOne) {
        variants.emplace_back(base == FlagSet::all() ? "all" : base.to_string(), base);
        for (auto m : kModifications)
            if (base.has(m)) variants.emplace_back("w/o " + std::string(to_string(m)), base.without(m));
    } else {
        variants.emplace_back(base.empty() ? "initial" : base.to_string(), base);
        const std::vector<std::vector<M>> subsets = {{M::CLB}, {M::RTI}, {M::SLF},
                                                     {M::CLB, M::RTI}, {M::RTI, M::SLF}, {M::CLB, M::SLF}};
        for (const auto& add : subsets) {
            std::string name;
            FlagSet f = base;
            for (auto m : add) {
                name += "+" + std::string(to_string(m));
                f = f.with(m);
            }
            variants.emplace_back(name, f);
        }
    }

    std::vector<AblationRow> rows;
    for (const auto& [name, flags] : variants) {
        auto cfg = config;
        cfg.flags = flags;
        const auto res = evaluate_planner([&cfg](const DemandMatrix& d) { return compute_plan(d, cfg); }, scenarios,
                                          cfg, options);
        AblationRow row;
        row.variant = name;
        row.flags = flags;
        row.avg_delay = res.avg_delay;
        row.avg_stops = res.avg_stops;
        row.score = res.scores.combined;
        rows.push_back(row);
    }
    for (auto& row : rows) row.change = (row.score - rows.front().score) / rows.front().score;
    return rows;
}

std::string format_ablation(const std::vector<AblationRow>& rows) {
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof line, "%-16s %10s %8s %8s %9s\n", "variant", "delay", "stops", "S_c", "change");
    os << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-16s %10.2f %8.3f %8.4f %+8.2f%%\n", r.variant.c_str(), r.avg_delay,
                      r.avg_stops, r.score, 100.0 * r.change);
        os << line;
    }
    return os.str();
}

} // namespace evosig
