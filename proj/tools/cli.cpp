#include "cli.hpp"

#include "evosig/error.hpp"
#include "evosig/io.hpp"
#include "evosig/orchestrator.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace evosig {

namespace {

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ';');
    while (!s.empty() && (s.back() == ';' || s.back() == ' ')) s.pop_back();
    return s;
}

// Scenario ids or files; with a seed, each scenario's seeds become seed,
// seed+1, ...
std::vector<Scenario> pick_scenarios(const std::vector<std::string>& names, std::optional<std::uint64_t> seed) {
    std::vector<Scenario> out;
    if (names.empty())
        out = builtin_scenarios();
    else
        for (const auto& n : names) out.push_back(resolve_scenario(n));
    if (seed)
        for (auto& s : out)
            for (std::size_t k = 0; k < s.seeds.size(); ++k) s.seeds[k] = *seed + k;
    return out;
}

IntersectionConfig pick_config(const std::string& path) {
    return path.empty() ? IntersectionConfig{} : config_from_json(read_json_file(path));
}

// A demand matrix, a scenario file, or a built-in scenario id.
DemandMatrix pick_demand(const std::string& arg) {
    if (auto b = builtin_scenario(arg)) return b->demand;
    const auto j = read_json_file(arg);
    return j.contains("demand") ? scenario_from_json(j).demand : demand_from_json(j);
}

void print_eval(std::ostream& out, const EvalResult& r) {
    for (const auto& s : r.scenarios)
        out << s.id << ": delay " << fmt("%.2f", s.avg_delay) << " s/veh, stops " << fmt("%.3f", s.avg_stops) << ", "
            << format_plan(s.plan) << '\n';
    out << "avg_delay: " << fmt("%.4f", r.avg_delay) << '\n';
    out << "avg_stops: " << fmt("%.4f", r.avg_stops) << '\n';
    out << "S_d: " << fmt("%.4f", r.scores.delay) << '\n';
    out << "S_s: " << fmt("%.4f", r.scores.stops) << '\n';
    out << "S_c: " << fmt("%.4f", r.scores.combined) << '\n';
}

} // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Evolve and evaluate fixed-time signal timing programs.", "evosig"};
    app.set_version_flag("--version", std::string(kEngineVersion));
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    app.add_option("--seed", seed, "Seed for all randomness (overrides run config and scenario seeds)");

    std::string config_file, program_file, demand_arg, flags_text = "none", run_dir, output_dir, ablate_mode = "remove-one";
    std::string intersection_file;
    std::vector<std::string> scenario_names;
    std::optional<std::size_t> iterations;
    bool resume = false, overwrite = false, as_json = false, quiet = false;
    unsigned threads = 1;

    auto* evolve = app.add_subcommand("evolve", "Run the evolution loop");
    evolve->add_option("config", config_file, "Run config (JSON)")->required()->check(CLI::ExistingFile);
    evolve->add_option("--iterations", iterations, "Override max_iterations");
    evolve->add_option("--output", output_dir, "Override output_dir");
    evolve->add_flag("--resume", resume, "Continue from the latest checkpoint");
    evolve->add_flag("--overwrite", overwrite, "Replace an existing run directory");
    evolve->add_flag("--quiet", quiet, "No per-iteration progress");

    auto* eval = app.add_subcommand("eval", "Score a program on the scenarios");
    eval->add_option("program", program_file, "SigLang program")->required()->check(CLI::ExistingFile);
    eval->add_option("--scenario", scenario_names, "Scenario id or file (repeatable; default S1 S2 S3)");
    eval->add_option("--config", intersection_file, "Intersection config overrides (JSON)");
    eval->add_option("--threads", threads, "Evaluation threads")->check(CLI::PositiveNumber);
    eval->add_flag("--json", as_json, "Print the full result as JSON");

    auto* webster = app.add_subcommand("webster", "Print the native plan for a demand");
    webster->add_option("demand", demand_arg, "Demand file, scenario file or scenario id")->required();
    webster->add_option("--flags", flags_text, "Modifications, e.g. CLB+RTI, all, none");
    webster->add_option("--config", intersection_file, "Intersection config overrides (JSON)");
    webster->add_flag("--json", as_json, "Print the plan as JSON");

    auto* ablate = app.add_subcommand("ablate", "Compare modification variants of the native planner");
    ablate->add_option("--mode", ablate_mode, "remove-one or add-subsets")
        ->check(CLI::IsMember({"remove-one", "add-subsets"}));
    ablate->add_option("--flags", flags_text, "Base modifications (default: all for remove-one, none for add-subsets)");
    ablate->add_option("--scenario", scenario_names, "Scenario id or file (repeatable)");
    ablate->add_option("--config", intersection_file, "Intersection config overrides (JSON)");
    ablate->add_option("--threads", threads, "Evaluation threads")->check(CLI::PositiveNumber);

    auto* report = app.add_subcommand("report", "Summarize a run directory");
    report->add_option("rundir", run_dir, "Run output directory")->required()->check(CLI::ExistingDirectory);

    if (args.empty()) {
        out << app.help();
        return 2;
    }
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kEngineVersion << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error usage: " << one_line(e.what()) << '\n';
        return 2;
    }

    try {
        if (evolve->parsed()) {
            auto cfg = load_run_config(config_file);
            if (seed) cfg.seed = *seed;
            if (iterations) cfg.max_iterations = *iterations;
            if (!output_dir.empty()) cfg.output_dir = output_dir;
            RunOptions opt;
            opt.resume = resume;
            opt.overwrite = overwrite;
            if (!quiet)
                opt.on_iteration = [&](const IterationRecord& r) {
                    out << "iteration " << r.iteration << ": " << r.outcome << " (" << r.model << "), best S_c "
                        << fmt("%.4f", r.best_score) << '\n';
                };
            const auto rep = run_evolution(cfg, opt);
            out << format_report(rep);
            out << "output: " << cfg.output_dir.string() << '\n';
        } else if (eval->parsed()) {
            const auto scenarios = pick_scenarios(scenario_names, seed);
            EvalOptions opt;
            opt.threads = threads;
            const auto src = sig::SourceText(read_text_file(program_file));
            const auto res = evaluate_program(src, scenarios, pick_config(intersection_file), opt);
            if (as_json)
                out << to_json(res).dump(2) << '\n';
            else if (res.ok())
                print_eval(out, res);
            if (!res.ok()) {
                err << "error " << to_string(res.error->kind) << ": " << one_line(res.error->message) << '\n';
                return 1;
            }
        } else if (webster->parsed()) {
            auto cfg = pick_config(intersection_file);
            cfg.flags = FlagSet::parse(flags_text);
            const auto demand = pick_demand(demand_arg);
            const auto plan = compute_plan(demand, cfg);
            if (as_json) {
                out << to_json(plan).dump(2) << '\n';
            } else {
                out << format_plan(plan) << '\n';
                out << "crs: " << fmt("%.4f", compute_crs(demand, cfg)) << '\n';
            }
        } else if (ablate->parsed()) {
            const auto mode = *parse_ablation_mode(ablate_mode);
            FlagSet base = mode == AblationMode::RemoveOne ? FlagSet::all() : FlagSet{};
            if (ablate->count("--flags")) base = FlagSet::parse(flags_text);
            const auto scenarios = pick_scenarios(scenario_names, seed);
            EvalOptions opt;
            opt.threads = threads;
            out << format_ablation(run_ablation(base, mode, scenarios, pick_config(intersection_file), opt));
        } else if (report->parsed()) {
            out << format_report(summarize_run(run_dir));
        }
    } catch (const Error& e) {
        err << "error " << to_string(e.kind()) << ": " << one_line(e.what()) << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error internal: " << one_line(e.what()) << '\n';
        return 1;
    }
    return 0;
}

} // namespace evosig
