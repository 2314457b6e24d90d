#include "evosig/mutation.hpp"

#include "evosig/error.hpp"
#include "evosig/fixtures.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace evosig {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::Config, what); }

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    for (std::size_t pos = 0; pos <= text.size();) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        pos = nl + 1;
    }
    return lines;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string_view trim_newlines(std::string_view s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool is_fence(std::string_view line) { return trim(line).substr(0, 3) == "```"; }

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

std::string render(const std::string& text, const std::vector<std::pair<std::string_view, std::string_view>>& vars,
                   const std::string& template_id) {
    std::string out;
    std::size_t pos = 0;
    while (true) {
        const auto open = text.find("{{", pos);
        if (open == std::string::npos) break;
        const auto close = text.find("}}", open + 2);
        if (close == std::string::npos) break;
        const auto name = std::string_view(text).substr(open + 2, close - open - 2);
        auto it = std::find_if(vars.begin(), vars.end(), [&](const auto& v) { return v.first == name; });
        if (it == vars.end()) config_error("template '" + template_id + "': unknown placeholder {{" + std::string(name) + "}}");
        out.append(text, pos, open - pos);
        out += it->second;
        pos = close + 2;
    }
    out.append(text, pos);
    return out;
}

std::size_t line_of(std::string_view text, std::size_t offset) {
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

MutationOutcome failed(MutationOutcome out, ErrorKind kind, std::string message) {
    out.failure = MutationFailure{kind, std::move(message), std::nullopt, {}};
    return out;
}

} // namespace

std::string_view to_string(MutationMode mode) {
    switch (mode) {
    case MutationMode::Diff: return "diff";
    case MutationMode::Rewrite: return "rewrite";
    case MutationMode::Rule: return "rule";
    }
    return "?";
}

// -------------------------------------------------------------- templates

PromptTemplate parse_template(const std::string& id, const std::string& text) {
    PromptTemplate t;
    t.id = id;
    std::string* current = nullptr;
    std::string mode;
    bool seen_system = false, seen_user = false, seen_format = false, seen_mode = false;
    for (auto line : split_lines(text)) {
        const auto header = trim(line);
        if (header == "[mode]") {
            current = &mode, seen_mode = true;
        } else if (header == "[system]") {
            current = &t.system, seen_system = true;
        } else if (header == "[user]") {
            current = &t.user, seen_user = true;
        } else if (header == "[format]") {
            current = &t.format, seen_format = true;
        } else if (current) {
            *current += line;
            *current += '\n';
        } else if (!header.empty()) {
            config_error("template '" + id + "': text before the first section");
        }
    }
    if (!seen_mode || !seen_system || !seen_user || !seen_format)
        config_error("template '" + id + "' needs [mode], [system], [user] and [format] sections");
    for (auto* s : {&t.system, &t.user, &t.format}) *s = std::string(trim_newlines(*s));
    const auto m = trim(mode);
    if (m == "diff")
        t.mode = MutationMode::Diff;
    else if (m == "rewrite")
        t.mode = MutationMode::Rewrite;
    else
        config_error("template '" + id + "': mode must be diff or rewrite");
    return t;
}

PromptTemplate load_template(const std::string& id, const std::optional<fs::path>& dir) {
    const bool valid_id = !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    });
    if (!valid_id) throw Error(ErrorKind::TemplateNotFound, "bad template id '" + id + "'");
    if (dir) {
        const auto path = *dir / (id + ".txt");
        if (fs::exists(path)) return parse_template(id, read_text_file(path));
    }
    if (auto text = fixtures::find("templates/" + id + ".txt")) return parse_template(id, std::string(*text));
    throw Error(ErrorKind::TemplateNotFound, "no prompt template '" + id + "'");
}

// ---------------------------------------------------------------- prompts

std::string format_metrics(const EvalResult& r) {
    std::string out;
    out += "- average delay: " + fmt("%.4f", r.avg_delay) + " s/veh\n";
    out += "- average stops: " + fmt("%.4f", r.avg_stops) + " per veh\n";
    out += "- S_d = " + fmt("%.4f", r.scores.delay) + ", S_s = " + fmt("%.4f", r.scores.stops) +
           ", S_c = " + fmt("%.4f", r.scores.combined) + "\n";
    out += "- mean cycle: " + fmt("%.1f", r.mean_cycle) + " s\n";
    for (const auto& s : r.scenarios) {
        out += "- " + s.id + ": delay " + fmt("%.2f", s.avg_delay) + " s/veh, stops " + fmt("%.3f", s.avg_stops) +
               ", cycle " + fmt("%.1f", s.plan.cycle) + " s, greens [";
        for (std::size_t k = 0; k < s.plan.greens.size(); ++k) out += (k ? ", " : "") + fmt("%.1f", s.plan.greens[k]);
        out += "]\n";
    }
    return std::string(trim_newlines(out));
}

std::string format_inspirations(const std::vector<const CandidateProgram*>& inspirations) {
    if (inspirations.empty()) return "";
    std::string out = "\n# Other programs from the archive\n";
    for (std::size_t k = 0; k < inspirations.size(); ++k) {
        const auto* p = inspirations[k];
        out += "\n## Program " + std::to_string(k + 1) + " (S_c = " + fmt("%.4f", p->score()) + ")\n\n```\n";
        out += trim_newlines(p->source.text);
        out += "\n```\n";
    }
    return out;
}

PromptBundle build_prompt(const CandidateProgram& parent, const std::vector<const CandidateProgram*>& inspirations,
                          const PromptTemplate& tmpl, const PromptOptions& options) {
    auto order = inspirations;
    std::stable_sort(order.begin(), order.end(),
                     [](const CandidateProgram* a, const CandidateProgram* b) { return a->score() > b->score(); });

    const std::string source(trim_newlines(parent.source.text));
    const std::string metrics = format_metrics(parent.result);
    for (std::size_t n = order.size();; --n) {
        const std::vector<const CandidateProgram*> kept(order.begin(), order.begin() + static_cast<long>(n));
        const std::string insp = format_inspirations(kept);
        const std::vector<std::pair<std::string_view, std::string_view>> vars = {
            {"parent_source", source},
            {"metrics", metrics},
            {"inspirations", insp},
            {"format_instructions", tmpl.format},
        };
        PromptBundle b;
        b.system_text = render(tmpl.system, vars, tmpl.id);
        b.user_text = render(tmpl.user, vars, tmpl.id);
        b.mode = tmpl.mode;
        b.template_id = tmpl.id;
        b.inspirations_used = n;
        b.inspirations_dropped = order.size() - n;
        if (b.size() <= options.max_chars || n == 0) return b;
    }
}

PromptBundle build_prompt(const CandidateProgram& parent, const std::vector<const CandidateProgram*>& inspirations,
                          const std::string& template_id, const PromptOptions& options) {
    return build_prompt(parent, inspirations, load_template(template_id, options.template_dir), options);
}

// --------------------------------------------------------------- ensemble

EnsembleConfig EnsembleConfig::default_mix(const std::string& url) {
    EnsembleConfig c;
    c.models = {
        {url, "deepseek-v3", 0.4, "EVOSIG_API_KEY"},
        {url, "deepseek-r1", 0.1, "EVOSIG_API_KEY"},
        {url, "o4-mini-high", 0.4, "EVOSIG_API_KEY"},
        {url, "o3", 0.1, "EVOSIG_API_KEY"},
    };
    return c;
}

void EnsembleConfig::validate() const {
    if (models.empty()) config_error("ensemble has no models");
    double total = 0.0;
    for (const auto& m : models) {
        if (m.url.empty() || m.model.empty()) config_error("ensemble model needs a url and a model id");
        if (!std::isfinite(m.weight) || m.weight < 0.0) config_error("model '" + m.model + "' has a negative weight");
        total += m.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) config_error("model weights sum to " + fmt("%.12g", total) + ", not 1");
    if (!std::isfinite(temperature) || temperature < 0.0) config_error("temperature must be >= 0");
    if (!(timeout > 0.0) || !std::isfinite(timeout)) config_error("timeout must be positive");
    if (max_retries < 0) config_error("max_retries must be >= 0");
    if (!(backoff >= 0.0) || !std::isfinite(backoff)) config_error("backoff must be >= 0");
}

Json to_json(const EnsembleConfig& c) {
    Json models = Json::array();
    for (const auto& m : c.models)
        models.push_back({{"url", m.url}, {"model", m.model}, {"weight", m.weight}, {"auth_env", m.auth_env}});
    return {{"models", models},        {"temperature", c.temperature}, {"timeout", c.timeout},
            {"max_retries", c.max_retries}, {"backoff", c.backoff},   {"network", c.network}};
}

EnsembleConfig ensemble_from_json(const Json& j) {
    if (!j.is_object()) config_error("ensemble must be an object");
    EnsembleConfig c;
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const auto& k = it.key();
            const auto& v = it.value();
            if (k == "models") {
                if (!v.is_array()) config_error("ensemble.models must be a list");
                for (const auto& m : v) {
                    ModelEndpoint e;
                    for (auto f = m.begin(); f != m.end(); ++f) {
                        if (f.key() == "url") e.url = f->get<std::string>();
                        else if (f.key() == "model") e.model = f->get<std::string>();
                        else if (f.key() == "weight") e.weight = f->get<double>();
                        else if (f.key() == "auth_env") e.auth_env = f->get<std::string>();
                        else config_error("unknown field '" + f.key() + "' in ensemble model");
                    }
                    c.models.push_back(std::move(e));
                }
            } else if (k == "temperature") {
                c.temperature = v.get<double>();
            } else if (k == "timeout") {
                c.timeout = v.get<double>();
            } else if (k == "max_retries") {
                c.max_retries = v.get<int>();
            } else if (k == "backoff") {
                c.backoff = v.get<double>();
            } else if (k == "network") {
                c.network = v.get<bool>();
            } else {
                config_error("unknown field '" + k + "' in ensemble");
            }
        }
    } catch (const Json::exception& e) {
        config_error(std::string("ensemble: ") + e.what());
    }
    c.validate();
    return c;
}

const ModelEndpoint& sample_model(const EnsembleConfig& config, Rng& rng) {
    double total = 0.0;
    for (const auto& m : config.models) {
        if (!(m.weight >= 0.0)) throw Error(ErrorKind::InvalidArgument, "model weights must be >= 0");
        total += m.weight;
    }
    if (!(total > 0.0)) throw Error(ErrorKind::InvalidArgument, "no model with positive weight");
    const double u = rng.uniform01() * total;
    double cum = 0.0;
    const ModelEndpoint* last = nullptr;
    for (const auto& m : config.models) {
        if (m.weight <= 0.0) continue;
        cum += m.weight;
        last = &m;
        if (u < cum) return m;
    }
    return *last;
}

Json chat_request(const PromptBundle& prompt, const ModelEndpoint& model, double temperature) {
    return {
        {"model", model.model},
        {"temperature", temperature},
        {"messages",
         Json::array({{{"role", "system"}, {"content", prompt.system_text}},
                      {{"role", "user"}, {"content", prompt.user_text}}})},
    };
}

// ------------------------------------------------------------- extraction

std::optional<std::string> first_fenced_block(std::string_view text) {
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!is_fence(lines[i])) continue;
        std::string body;
        for (std::size_t k = i + 1; k < lines.size(); ++k) {
            if (is_fence(lines[k])) return body;
            body += lines[k];
            body += '\n';
        }
        return std::nullopt; // unterminated
    }
    return std::nullopt;
}

std::string strip_code(std::string_view text) {
    std::vector<std::string_view> kept;
    bool in_fence = false, in_block = false;
    for (auto line : split_lines(text)) {
        const auto t = trim(line);
        if (!in_block && is_fence(line)) {
            in_fence = !in_fence;
            continue;
        }
        if (in_fence) continue;
        if (t == sig::kSearchMarker) in_block = true;
        if (in_block) {
            if (t == sig::kReplaceMarker) in_block = false;
            continue;
        }
        if (t.empty() && (kept.empty() || kept.back().empty())) continue;
        kept.push_back(t.empty() ? std::string_view{} : line);
    }
    std::string out;
    for (auto l : kept) {
        out += l;
        out += '\n';
    }
    return std::string(trim(out));
}

MutationOutcome extract_mutation(std::string_view response, const sig::SourceText& parent, const sig::Limits& limits) {
    MutationOutcome out;
    out.rationale = strip_code(response);

    std::vector<sig::DiffBlock> blocks;
    try {
        blocks = sig::parse_diff_blocks(response);
    } catch (const DiffError& e) {
        out = failed(std::move(out), ErrorKind::DiffFailed, e.what());
        out.failure->block_index = e.block_index();
        return out;
    }

    if (!blocks.empty()) {
        out.mode = MutationMode::Diff;
        try {
            out.child = sig::apply_diff(parent, blocks, limits);
        } catch (const DiffError& e) {
            out = failed(std::move(out), ErrorKind::DiffFailed, e.what());
            out.failure->block_index = e.block_index();
            return out;
        } catch (const Error& e) {
            return failed(std::move(out), e.kind(), e.what());
        }
    } else {
        out.mode = MutationMode::Rewrite;
        const auto code = first_fenced_block(response);
        if (!code || trim(*code).empty())
            return failed(std::move(out), ErrorKind::NoUsableCode, "no SEARCH/REPLACE block or fenced code block");
        out.child = sig::SourceText(*code);
    }

    try {
        const auto ast = sig::parse(out.child, limits);
        auto violations = sig::validate(ast);
        if (!violations.empty()) {
            out = failed(std::move(out), ErrorKind::Validation, std::string(trim(sig::describe(violations))));
            out.failure->violations = std::move(violations);
        }
    } catch (const Error& e) {
        return failed(std::move(out), e.kind(), e.what());
    }
    return out;
}

// ------------------------------------------------------------ rule edits

std::string format_literal(double value) {
    double r = std::round(value * 1e6) / 1e6;
    if (r == 0.0) r = 0.0; // no "-0"
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, r, std::chars_format::fixed);
    return std::string(buf, res.ptr);
}

std::vector<MutationSite> mutation_sites(const sig::SourceText& source) {
    using sig::TokenKind;
    const auto tokens = sig::tokenize(source.text, sig::Limits{SIZE_MAX, SIZE_MAX});
    std::vector<MutationSite> sites;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
        const auto& t = tokens[k];
        const auto* prev = k >= 1 ? &tokens[k - 1] : nullptr;
        const auto* prev2 = k >= 2 ? &tokens[k - 2] : nullptr;
        switch (t.kind) {
        case TokenKind::Number: {
            if (t.number == 0.0) break;
            const bool loop_bound = prev && prev->kind == TokenKind::LParen && prev2 &&
                                    prev2->kind == TokenKind::Identifier && prev2->text == "range";
            const bool index = prev && prev->kind == TokenKind::LBracket && prev2 &&
                               (prev2->kind == TokenKind::Identifier || prev2->kind == TokenKind::RBracket ||
                                prev2->kind == TokenKind::RParen);
            if (loop_bound || index) break;
            sites.push_back({SiteKind::Scale, t.offset, t.text.size(), t.number});
            break;
        }
        case TokenKind::KwTrue:
        case TokenKind::KwFalse:
            sites.push_back({SiteKind::Toggle, t.offset, t.text.size(), 0.0});
            break;
        case TokenKind::Identifier:
            if ((t.text == "min" || t.text == "max") && k + 1 < tokens.size() &&
                tokens[k + 1].kind == TokenKind::LParen)
                sites.push_back({SiteKind::Swap, t.offset, t.text.size(), 0.0});
            break;
        default: break;
        }
    }
    return sites;
}

sig::SourceText apply_site(const sig::SourceText& source, const MutationSite& site, double factor) {
    const auto old = std::string_view(source.text).substr(site.offset, site.length);
    std::string repl;
    switch (site.kind) {
    case SiteKind::Scale: repl = format_literal(site.value * factor); break;
    case SiteKind::Toggle: repl = old == "true" ? "false" : "true"; break;
    case SiteKind::Swap: repl = old == "min" ? "max" : "min"; break;
    }
    std::string text = source.text;
    text.replace(site.offset, site.length, repl);
    return sig::SourceText(std::move(text));
}

MutationOutcome rule_mutate(const sig::SourceText& parent, Rng& rng) {
    sig::parse(parent, sig::Limits{SIZE_MAX, SIZE_MAX});
    const auto sites = mutation_sites(parent);
    if (sites.empty()) throw Error(ErrorKind::NoMutableSite, "program has no literal, flag or min/max call to edit");

    const auto& site = sites[rng.index(sites.size())];
    const auto old = std::string(std::string_view(parent.text).substr(site.offset, site.length));
    const auto line = std::to_string(line_of(parent.text, site.offset));
    MutationOutcome out;
    out.mode = MutationMode::Rule;
    out.model = "rule";
    double factor = 1.0;
    switch (site.kind) {
    case SiteKind::Scale:
        factor = kRuleFactors[rng.index(std::size(kRuleFactors))];
        out.child = apply_site(parent, site, factor);
        out.rationale = "line " + line + ": scale " + old + " by " + format_literal(factor) + " -> " +
                        format_literal(site.value * factor);
        break;
    case SiteKind::Toggle:
        out.child = apply_site(parent, site);
        out.rationale = "line " + line + ": toggle " + old;
        break;
    case SiteKind::Swap:
        out.child = apply_site(parent, site);
        out.rationale = "line " + line + ": swap " + old + " for " + (old == "min" ? "max" : "min");
        break;
    }

    try {
        auto violations = sig::validate(sig::parse(out.child));
        if (!violations.empty()) {
            out = failed(std::move(out), ErrorKind::Validation, std::string(trim(sig::describe(violations))));
            out.failure->violations = std::move(violations);
        }
    } catch (const Error& e) {
        return failed(std::move(out), e.kind(), e.what());
    }
    return out;
}

// --------------------------------------------------------------- mutators

MutationOutcome RuleMutator::mutate(const CandidateProgram& parent, const std::vector<const CandidateProgram*>&,
                                    Rng& rng) {
    try {
        return rule_mutate(parent.source, rng);
    } catch (const Error& e) {
        MutationOutcome out;
        out.mode = MutationMode::Rule;
        out.model = "rule";
        return failed(std::move(out), e.kind(), e.what());
    }
}

LlmMutator::LlmMutator(EnsembleConfig ensemble, std::string template_id, PromptOptions prompt)
    : ensemble_(std::move(ensemble)), template_(load_template(template_id, prompt.template_dir)),
      prompt_(std::move(prompt)) {
    ensemble_.validate();
}

MutationOutcome LlmMutator::mutate(const CandidateProgram& parent,
                                   const std::vector<const CandidateProgram*>& inspirations, Rng& rng) {
    const auto& model = sample_model(ensemble_, rng);
    const auto prompt = build_prompt(parent, inspirations, template_, prompt_);
    std::string response;
    try {
        ++requests_;
        response = request_mutation(prompt, model, ensemble_);
    } catch (const Error& e) {
        MutationOutcome out;
        out.mode = template_.mode;
        out.model = model.model;
        return failed(std::move(out), e.kind(), e.what());
    }
    auto out = extract_mutation(response, parent.source);
    out.model = model.model;
    return out;
}

} // namespace evosig
