// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any
// fail.

#include "evosig/archive.hpp"
#include "evosig/error.hpp"
#include "evosig/evaluator.hpp"
#include "evosig/fixtures.hpp"
#include "evosig/io.hpp"
#include "evosig/mutation.hpp"
#include "evosig/orchestrator.hpp"
#include "evosig/siglang.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

using namespace evosig;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

std::string num(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

sig::SourceText webster() { return sig::SourceText(std::string(fixtures::webster_program())); }
sig::SourceText discovered() { return sig::SourceText(std::string(fixtures::discovered_program())); }

Verdict score_formula() {
    const double a = score(91.79, 1.19).combined, b = score(73.31, 0.63).combined;
    return {std::abs(a - 0.4893) <= 0.001 && std::abs(b - 0.5946) <= 0.001,
            "S_c(91.79, 1.19) = " + num(a) + " (0.4893), S_c(73.31, 0.63) = " + num(b) + " (0.5946)"};
}

Verdict crs_calibration() {
    const auto cal = IntersectionConfig{}.calibrated_for_crs();
    const double expected[] = {0.868, 0.865, 0.872};
    Verdict v;
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& s = builtin_scenarios()[i];
        const double crs = compute_crs(s.demand, cal);
        v.pass = v.pass && std::abs(crs - expected[i]) <= 0.05;
        v.detail += (i ? ", " : "") + s.id + " " + num(crs, 3) + " (" + num(expected[i], 3) + ")";
    }
    return v;
}

Verdict dsl_equivalence() {
    const auto web = sig::parse(webster());
    const auto disc = sig::parse(discovered());
    Rng rng(20240601);
    int compared = 0, mismatched = 0, infeasible = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto demand = testsupport::random_demand(rng);
        auto cfg = trial % 2 == 0 ? IntersectionConfig{} : testsupport::random_config(rng);
        for (auto [ast, flags] : {std::pair{&web, FlagSet{}}, std::pair{&disc, FlagSet::all()}}) {
            cfg.flags = flags;
            std::optional<PhasePlan> native;
            try {
                native = compute_plan(demand, cfg);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::InfeasiblePlan) throw;
            }
            ++compared;
            if (!native) {
                ++infeasible;
                try {
                    sig::interpret(*ast, demand, cfg);
                    ++mismatched;
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::PlanInvalid) ++mismatched;
                }
                continue;
            }
            const auto dsl = sig::interpret(*ast, demand, cfg);
            if (!(dsl.cycle == native->cycle && dsl.greens == native->greens && dsl.intergreen == native->intergreen))
                ++mismatched;
        }
    }
    return {mismatched == 0, std::to_string(compared) + " plans compared on 1000 demands, " +
                                 std::to_string(mismatched) + " mismatches, " + std::to_string(infeasible) +
                                 " infeasible in both"};
}

Verdict simulator_oracle() {
    Rng rng(2024);
    int broken = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto cfg = trial % 3 == 0 ? IntersectionConfig{} : testsupport::random_config(rng);
        const auto plan = testsupport::random_plan(rng, cfg);
        const auto demand = testsupport::random_demand(rng);
        const auto a = generate_arrivals(demand, rng.next(), 600 + static_cast<int>(rng.index(1200)));
        const auto r = simulate(plan, a, cfg);
        for (std::size_t m = 0; m < kMovementCount; ++m) {
            const auto& st = r.movements[m];
            long n = 0;
            for (int x : a[m]) n += x;
            if (st.arrived != n * kFluidUnit || st.arrived != st.departed + st.residual || st.residual < 0) ++broken;
        }
    }

    // east left alone, green for phase 1 in a cycle with no intergreen
    IntersectionConfig cfg;
    cfg.yellow = 0;
    cfg.all_red = 0;
    const auto m = movement_index(Approach::East, Movement::Left);
    const double rate = cfg.lanes_left * cfg.saturation_flow_per_lane / 3600.0;
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        PhasePlan plan;
        plan.intergreen = 0;
        for (auto& g : plan.greens) g = 5 + std::floor(testsupport::uniform(rng, 0, 50) * 4) / 4;
        plan.cycle = plan.greens[0] + plan.greens[1] + plan.greens[2] + plan.greens[3];
        DemandMatrix d;
        d[Approach::East].left = testsupport::uniform(rng, 100, 1200);
        const int duration = 1200 + static_cast<int>(rng.index(1200));
        const auto a = generate_arrivals(d, rng.next(), duration);
        const auto r = simulate(plan, a, cfg);
        const double oracle = testsupport::cumulative_curve_delay(
            a[m], testsupport::capacity_series(duration, plan.cycle, plan.greens[0], plan.greens[1], rate));
        worst = std::max(worst, std::abs(r.total_delay() - oracle));
    }
    std::ostringstream os;
    os << "100 triples, " << broken << " conservation breaks; worst delay gap over 20 single-movement traces "
       << worst;
    return {broken == 0 && worst <= 1e-9, os.str()};
}

Verdict discovered_beats_baseline() {
    const IntersectionConfig cfg;
    const auto web = evaluate_program(webster(), builtin_scenarios(), cfg);
    const auto disc = evaluate_program(discovered(), builtin_scenarios(), cfg);
    if (!web.ok() || !disc.ok()) return {false, "fixture evaluation failed"};
    return {disc.avg_delay < web.avg_delay && disc.avg_stops < web.avg_stops &&
                disc.scores.combined > web.scores.combined,
            "delay " + num(web.avg_delay, 2) + " -> " + num(disc.avg_delay, 2) + ", stops " + num(web.avg_stops, 3) +
                " -> " + num(disc.avg_stops, 3) + ", S_c " + num(web.scores.combined) + " -> " +
                num(disc.scores.combined)};
}

Verdict ablation() {
    const auto removal = run_ablation(FlagSet::all(), AblationMode::RemoveOne);
    std::string largest;
    double drop = 0;
    for (std::size_t k = 1; k < removal.size(); ++k)
        if (largest.empty() || removal[k].change < drop) largest = removal[k].variant, drop = removal[k].change;
    const auto adds = run_ablation(FlagSet{}, AblationMode::AddSubsets);
    double clb = std::nan("");
    for (const auto& r : adds)
        if (r.variant == "+CLB") clb = r.change;
    return {largest == "w/o CLB" && clb > 0,
            "largest drop " + largest + " " + num(100 * drop, 2) + "%, +CLB " + num(100 * clb, 2) + "%"};
}

Verdict offline_determinism() {
    const auto root = fs::temp_directory_path() / "evosig_acceptance";
    fs::remove_all(root);
    auto run = [&](const std::string& name) {
        RunConfig c;
        c.max_iterations = 50;
        c.seed = 42;
        c.output_dir = root / name;
        return run_evolution(c);
    };
    const auto ra = run("a");
    const auto rb = run("b");
    std::size_t files = 0, differ = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), root / "a");
        const auto name = rel.string();
        if (name != "log.runl" && name != "best.sig" && name.rfind("checkpoints", 0) != 0) continue;
        ++files;
        if (testsupport::read_file(e.path().string()) != testsupport::read_file((root / "b" / rel).string())) ++differ;
    }
    fs::remove_all(root);
    const bool same = ra.best == rb.best && ra.trajectory == rb.trajectory;
    return {same && files >= 3 && differ == 0 && ra.best.score() >= ra.initial_score,
            std::to_string(files) + " files compared, " + std::to_string(differ) + " differ; best S_c " +
                num(ra.best.score()) + " vs initial " + num(ra.initial_score)};
}

CandidateProgram candidate(int padding, double sc, double mean_cycle, int tag) {
    std::string body;
    for (int k = 0; k < padding; ++k) body += "x" + std::to_string(k) + " = " + std::to_string(tag) + ";\n";
    CandidateProgram p;
    p.source = sig::SourceText("fn signal_plan(demand, config) {\n" + body + "return (60, [20, 15, 20, 15]);\n}\n");
    p.result.scores = {sc, sc, sc};
    p.result.mean_cycle = mean_cycle;
    p.model_used = "acceptance";
    p.iteration_born = static_cast<std::size_t>(tag);
    return p;
}

Verdict archive_properties() {
    Rng rng(99);
    Archive a;
    int violations = 0;
    double best_seen = 0;
    for (int n = 0; n < 2000; ++n) {
        std::map<Cell, double> before;
        for (const auto& [c, p] : a.entries()) before[c] = p.score();
        a.insert(candidate(static_cast<int>(rng.index(12)), std::round(rng.uniform01() * 200) / 200,
                           40 + rng.uniform01() * 100, n));
        for (const auto& [c, p] : a.entries())
            if (before.count(c) && p.score() < before[c]) ++violations;
        if (!a.best() || a.best()->score() < best_seen) ++violations;
        best_seen = a.best()->score();
    }

    const auto path = fs::temp_directory_path() / "evosig_acceptance_archive.json";
    checkpoint(a, path);
    const bool round_trip = load_archive(path) == a && load_archive(path).to_json().dump() == a.to_json().dump();
    fs::remove(path);

    const auto mix = EnsembleConfig::default_mix();
    std::map<std::string, int> counts;
    const int n = 100000;
    Rng r(2024);
    for (int i = 0; i < n; ++i) ++counts[sample_model(mix, r).model];
    double worst = 0;
    for (const auto& m : mix.models) worst = std::max(worst, std::abs(double(counts[m.model]) / n - m.weight));

    return {violations == 0 && round_trip && worst <= 0.01,
            std::to_string(a.size()) + " cells, " + std::to_string(violations) + " elitism/monotonicity violations, " +
                "checkpoint round trip " + (round_trip ? "identical" : "differs") + ", worst model frequency error " +
                num(100 * worst, 3) + "%"};
}

Verdict extraction_corpus() {
    const std::string dir = std::string(EVOSIG_TEST_DATA) + "/responses/";
    const auto manifest = Json::parse(testsupport::read_file(dir + "manifest.json"));
    const std::map<std::string, ErrorKind> kinds = {{"no_usable_code", ErrorKind::NoUsableCode},
                                                    {"diff_failed", ErrorKind::DiffFailed},
                                                    {"syntax", ErrorKind::Syntax},
                                                    {"validation", ErrorKind::Validation}};
    const auto parent = webster();
    int wrong = 0, false_success = 0;
    for (const auto& entry : manifest) {
        const auto expected = entry.at("outcome").get<std::string>();
        const auto out = extract_mutation(testsupport::read_file(dir + entry.at("file").get<std::string>()), parent);
        if (expected == "diff" || expected == "rewrite") {
            if (!out.ok() || to_string(out.mode) != expected || out.child == parent ||
                !sig::validate(sig::parse(out.child)).empty())
                ++wrong;
        } else if (out.ok()) {
            ++false_success;
        } else if (!kinds.count(expected) || out.failure->kind != kinds.at(expected)) {
            ++wrong;
        }
    }
    return {manifest.size() >= 10 && wrong == 0 && false_success == 0,
            std::to_string(manifest.size()) + " responses, " + std::to_string(wrong) + " wrong class, " +
                std::to_string(false_success) + " false successes"};
}

} // namespace

int main() {
    const std::pair<const char*, std::function<Verdict()>> criteria[] = {
        {"score formula", score_formula},
        {"crs calibration", crs_calibration},
        {"program/native equivalence", dsl_equivalence},
        {"simulator conservation and oracle", simulator_oracle},
        {"discovered beats baseline", discovered_beats_baseline},
        {"ablation direction", ablation},
        {"offline evolve determinism", offline_determinism},
        {"archive properties", archive_properties},
        {"extraction corpus", extraction_corpus},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!v.pass) ++failed;
        std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << " [" << num(secs, 2) << " s]"
                  << std::endl;
    }
    return failed ? 1 : 0;
}
