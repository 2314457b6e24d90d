#include "doctest.h"

#include "evosig/error.hpp"
#include "evosig/evaluator.hpp"
#include "evosig/fixtures.hpp"
#include "evosig/io.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <cmath>
#include <cstdlib>

using namespace evosig;

namespace {

constexpr std::size_t kEastThrough = movement_index(Approach::East, Movement::Through);
constexpr std::size_t kEastLeft = movement_index(Approach::East, Movement::Left);

Arrivals empty_arrivals(int duration) {
    Arrivals a;
    for (auto& seq : a) seq.assign(static_cast<std::size_t>(duration), 0);
    return a;
}

IntersectionConfig no_intergreen() {
    IntersectionConfig c;
    c.yellow = 0;
    c.all_red = 0;
    return c;
}

} // namespace

// ------------------------------------------------------------- arrivals

TEST_CASE("zero rate gives no arrivals") {
    const auto a = generate_arrivals(DemandMatrix{}, 1, 600);
    for (const auto& seq : a) {
        CHECK(seq.size() == 600);
        for (int v : seq) CHECK(v == 0);
    }
}

TEST_CASE("arrival totals stay within three sigma") {
    const auto& s1 = builtin_scenarios()[0].demand;
    const auto m = movement_index(Approach::North, Movement::Through);
    const double mean = 1550.0 / 2;
    int inside = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const auto a = generate_arrivals(s1, seed, 1800);
        long total = 0;
        for (int v : a[m]) total += v;
        if (std::abs(total - mean) <= 3 * std::sqrt(mean)) ++inside;
    }
    CHECK(inside >= 990);
}

TEST_CASE("poisson draws have the right moments") {
    for (double mean : {0.05, 0.43, 2.0, 7.5}) {
        Rng rng(42);
        double s = 0, s2 = 0;
        const int n = 200000;
        for (int i = 0; i < n; ++i) {
            const double k = poisson_inversion(mean, rng);
            s += k;
            s2 += k * k;
        }
        const double m = s / n, var = s2 / n - m * m;
        CAPTURE(mean);
        CHECK(m == doctest::Approx(mean).epsilon(0.02));
        CHECK(var == doctest::Approx(mean).epsilon(0.03));
    }
    Rng rng(1);
    CHECK(poisson_inversion(0.0, rng) == 0);
    CHECK(rng == Rng(1));
}

TEST_CASE("arrival streams are seeded and independent") {
    const auto& d = builtin_scenarios()[1].demand;
    CHECK(generate_arrivals(d, 7, 900) == generate_arrivals(d, 7, 900));
    CHECK_FALSE(generate_arrivals(d, 7, 900) == generate_arrivals(d, 8, 900));

    auto other = d;
    other[Approach::South].left = 999;
    const auto a = generate_arrivals(d, 7, 900), b = generate_arrivals(other, 7, 900);
    for (std::size_t m = 0; m < kMovementCount; ++m)
        if (m != movement_index(Approach::South, Movement::Left)) CHECK(a[m] == b[m]);

    // the documented stream construction, restated
    Rng direct(splitmix64_mix(7 + 3 * 0x9E3779B97F4A7C15ULL));
    CHECK(arrival_stream(7, 2) == direct);
    CHECK_THROWS_AS(generate_arrivals(d, 1, 0), Error);
}

// ------------------------------------------------------------ simulation

TEST_CASE("movement layout") {
    IntersectionConfig cfg;
    const auto sat = movement_saturation(cfg);
    CHECK(sat[kEastThrough] == doctest::Approx(2.6 * 1800));
    CHECK(sat[kEastLeft] == 1800);
    CHECK(sat[movement_index(Approach::North, Movement::Right)] == 1800);
    CHECK(phase_of(kEastThrough) == Phase::EwThrough);
    CHECK(phase_of(movement_index(Approach::West, Movement::Right)) == Phase::EwThrough);
    CHECK(phase_of(kEastLeft) == Phase::EwLeft);
    CHECK(phase_of(movement_index(Approach::South, Movement::Through)) == Phase::NsThrough);
    CHECK(phase_of(movement_index(Approach::North, Movement::Left)) == Phase::NsLeft);
    CHECK(movement_name(kEastLeft) == "E.left");
}

TEST_CASE("green overlap follows the phase sequence") {
    const PhasePlan p{100, {30.5, 15, 20, 14.5}, 4};
    CHECK(green_overlap(p, Phase::EwThrough, 0) == 1.0);
    CHECK(green_overlap(p, Phase::EwThrough, 30) == 0.5);
    CHECK(green_overlap(p, Phase::EwThrough, 31) == 0.0);
    // EW-left starts at 34.5
    CHECK(green_overlap(p, Phase::EwLeft, 34) == 0.5);
    CHECK(green_overlap(p, Phase::EwLeft, 35) == 1.0);
    // NS-left ends at 34.5 + 19 + 24 + 14.5 = 92, dead time to 100
    CHECK(green_overlap(p, Phase::NsLeft, 91) == 1.0);
    CHECK(green_overlap(p, Phase::NsLeft, 92) == 0.0);
    CHECK(green_overlap(p, Phase::EwThrough, 100) == 1.0);
    CHECK(green_overlap(p, Phase::EwThrough, 130) == 0.5);
}

TEST_CASE("no arrivals means no delay") {
    const auto r = simulate(PhasePlan{86, {20, 15, 20, 15}, 4}, empty_arrivals(1800), IntersectionConfig{});
    CHECK(r.total_delay() == 0.0);
    CHECK(r.total_stops() == 0.0);
    CHECK(r.vehicles_served() == 0.0);
    CHECK(r.average_delay() == 0.0);
}

TEST_CASE("arrival at green onset passes freely") {
    auto a = empty_arrivals(120);
    a[kEastThrough][0] = 1;
    const auto r = simulate(PhasePlan{86, {20, 15, 20, 15}, 4}, a, IntersectionConfig{});
    CHECK(r.total_delay() == 0.0);
    CHECK(r.total_stops() == 0.0);
    CHECK(r.vehicles_served() == 1.0);
}

TEST_CASE("arrival on red waits for green") {
    auto a = empty_arrivals(120);
    a[kEastLeft][0] = 1; // EW-left is green on [24, 39)
    const auto r = simulate(PhasePlan{86, {20, 15, 20, 15}, 4}, a, IntersectionConfig{});
    // queued through seconds 0..23, served at 0.5 veh/s in seconds 24 and 25
    CHECK(r.total_delay() == doctest::Approx(24 + 0.5));
    CHECK(r.total_stops() == 1.0);
    CHECK(r.residual_queue() == 0.0);
}

TEST_CASE("green end re-stops the residual queue") {
    auto a = empty_arrivals(200);
    a[kEastLeft][30] = 10; // 10 veh at 0.5 veh/s need 20 s; 9 s of green left
    const auto r = simulate(PhasePlan{86, {20, 15, 20, 15}, 4}, a, IntersectionConfig{});
    // the queue is non-empty at second 30's end (only 0.5 served) so all 10
    // arrivals beyond capacity stop: 9.5 first stops, then 10 - 4.5 = 5.5 left
    // at green end
    CHECK(r.total_stops() == doctest::Approx(9.5 + 5.5));
    CHECK(r.vehicles_served() == 10.0);
}

TEST_CASE("delay matches the cumulative curve oracle") {
    auto cfg = no_intergreen();
    // EW-left green on [10, 40) of a 60 s cycle; 0.5 veh/s saturation
    const PhasePlan plan{60, {10, 30, 10, 10}, 0};
    const int duration = 1800;

    SUBCASE("uniform arrivals at half the saturation rate") {
        auto a = empty_arrivals(duration);
        for (int t = 0; t < duration; t += 4) a[kEastLeft][static_cast<std::size_t>(t)] = 1;
        const auto r = simulate(plan, a, cfg);
        const double oracle = testsupport::cumulative_curve_delay(a[kEastLeft], testsupport::capacity_series(duration, 60, 10, 30, 0.5));
        CHECK(std::abs(r.total_delay() - oracle) <= 1e-9);
        CHECK(oracle > 0);
    }
    SUBCASE("poisson arrivals at half the saturation rate") {
        DemandMatrix d;
        d[Approach::East].left = 900;
        const auto a = generate_arrivals(d, 5, duration);
        const auto r = simulate(plan, a, cfg);
        const double oracle = testsupport::cumulative_curve_delay(a[kEastLeft], testsupport::capacity_series(duration, 60, 10, 30, 0.5));
        CHECK(std::abs(r.total_delay() - oracle) <= 1e-9);
    }
    SUBCASE("fractional green boundaries") {
        const PhasePlan frac{61.5, {10.25, 30.5, 10, 10.75}, 0};
        DemandMatrix d;
        d[Approach::West].left = 800;
        const auto m = movement_index(Approach::West, Movement::Left);
        const auto a = generate_arrivals(d, 9, duration);
        const auto r = simulate(frac, a, cfg);
        const double oracle = testsupport::cumulative_curve_delay(a[m], testsupport::capacity_series(duration, 61.5, 10.25, 30.5, 0.5));
        CHECK(std::abs(r.total_delay() - oracle) <= 1e-9);
    }
}

TEST_CASE("conservation on random triples") {
    Rng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const auto cfg = trial % 3 == 0 ? IntersectionConfig{} : testsupport::random_config(rng);
        const auto plan = testsupport::random_plan(rng, cfg);
        const auto demand = testsupport::random_demand(rng);
        const auto a = generate_arrivals(demand, rng.next(), 600 + static_cast<int>(rng.index(1200)));
        const auto r = simulate(plan, a, cfg);
        for (std::size_t m = 0; m < kMovementCount; ++m) {
            const auto& st = r.movements[m];
            long n = 0;
            for (int v : a[m]) n += v;
            CHECK(st.arrived == n * kFluidUnit);
            CHECK(st.arrived == st.departed + st.residual);
            CHECK(st.residual >= 0);
        }
    }
}

TEST_CASE("more arrivals never reduce delay") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const IntersectionConfig cfg;
        const auto plan = testsupport::random_plan(rng, cfg);
        auto a = generate_arrivals(testsupport::random_demand(rng), rng.next(), 900);
        const auto before = simulate(plan, a, cfg);
        const auto m = rng.index(kMovementCount);
        for (auto& v : a[m])
            if (rng.index(4) == 0) v += 1 + static_cast<int>(rng.index(3));
        const auto after = simulate(plan, a, cfg);
        CHECK(after.movements[m].delay >= before.movements[m].delay);
    }
}

TEST_CASE("all-green movement keeps a short queue") {
    auto cfg = no_intergreen();
    const PhasePlan plan{60, {60, 0, 0, 0}, 0};
    // capacity 1.3 veh/s; steady patterns below it
    Rng rng(3);
    for (int pattern = 0; pattern < 3; ++pattern) {
        auto a = empty_arrivals(300);
        for (std::size_t t = 0; t < 300; ++t) {
            int v = 1;
            if (pattern == 1) v = t % 2 == 0 ? 2 : 0;
            if (pattern == 2) v = static_cast<int>(rng.index(2));
            a[kEastThrough][t] = v;
        }
        auto prefix = empty_arrivals(0);
        for (std::size_t t = 0; t < 300; ++t) {
            for (std::size_t m = 0; m < kMovementCount; ++m) prefix[m].push_back(a[m][t]);
            const auto r = simulate(plan, prefix, cfg);
            CHECK(r.movements[kEastThrough].residual <= std::int64_t{a[kEastThrough][t]} * kFluidUnit);
        }
    }
}

TEST_CASE("unusable plans are rejected") {
    const auto a = empty_arrivals(10);
    const IntersectionConfig cfg;
    CHECK_THROWS_AS(simulate(PhasePlan{0, {1, 1, 1, 1}, 0}, a, cfg), Error);
    CHECK_THROWS_AS(simulate(PhasePlan{60, {-1, 1, 1, 1}, 0}, a, cfg), Error);
    CHECK_THROWS_AS(simulate(PhasePlan{60, {20, 20, 20, 20}, 4}, a, cfg), Error);
}

// ---------------------------------------------------------------- scoring

TEST_CASE("score formula") {
    CHECK(score(91.79, 1.19).combined == doctest::Approx(0.4893).epsilon(0.001 / 0.4893));
    CHECK(score(73.31, 0.63).combined == doctest::Approx(0.5946).epsilon(0.001 / 0.5946));
    const auto z = score(0, 0);
    CHECK(z.delay == 1.0);
    CHECK(z.stops == 1.0);
    CHECK(z.combined == 1.0);
    const auto h = score(100, 1);
    CHECK(h.delay == 0.5);
    CHECK(h.stops == 0.5);
    CHECK(h.combined == 0.5);
    CHECK_THROWS_AS(score(-1, 0), Error);
    CHECK_THROWS_AS(score(0, -0.1), Error);
    CHECK_THROWS_AS(score(std::nan(""), 0), Error);
}

TEST_CASE("score decreases in delay and stops") {
    Rng rng(8);
    for (int i = 0; i < 1000; ++i) {
        const double d = testsupport::uniform(rng, 0, 500), s = testsupport::uniform(rng, 0, 5);
        const double dd = testsupport::uniform(rng, 1e-6, 50), ds = testsupport::uniform(rng, 1e-6, 1);
        CHECK(score(d + dd, s).combined < score(d, s).combined);
        CHECK(score(d, s + ds).combined < score(d, s).combined);
    }
}

// ------------------------------------------------------------- evaluation

TEST_CASE("webster fixture matches its golden result") {
    const auto r = evaluate_program(sig::SourceText(std::string(fixtures::webster_program())), builtin_scenarios(),
                                    IntersectionConfig{});
    REQUIRE(r.ok());
    CHECK(std::isfinite(r.avg_delay));
    CHECK(std::isfinite(r.avg_stops));
    const std::string path = std::string(EVOSIG_TEST_DATA) + "/golden/webster_eval.json";
    if (std::getenv("EVOSIG_UPDATE_GOLDEN")) write_text_file(path, to_json(r).dump(2) + "\n");
    const auto golden = eval_result_from_json(read_json_file(path));
    CHECK(r == golden);
}

TEST_CASE("discovered fixture beats webster") {
    const IntersectionConfig cfg;
    const auto web = evaluate_program(sig::SourceText(std::string(fixtures::webster_program())), builtin_scenarios(), cfg);
    const auto disc =
        evaluate_program(sig::SourceText(std::string(fixtures::discovered_program())), builtin_scenarios(), cfg);
    REQUIRE(web.ok());
    REQUIRE(disc.ok());
    CHECK(disc.scores.combined > web.scores.combined);
    CHECK(disc.avg_delay < web.avg_delay);
    CHECK(disc.avg_stops < web.avg_stops);
}

TEST_CASE("program evaluation equals native planner evaluation") {
    IntersectionConfig cfg;
    const auto dsl = evaluate_program(sig::SourceText(std::string(fixtures::discovered_program())), builtin_scenarios(), cfg);
    cfg.flags = FlagSet::all();
    const auto native = evaluate_planner([&](const DemandMatrix& d) { return compute_plan(d, cfg); },
                                         builtin_scenarios(), cfg);
    CHECK(dsl == native);
}

TEST_CASE("failing programs score zero") {
    const IntersectionConfig cfg;
    auto run = [&](const std::string& text) {
        return evaluate_program(sig::SourceText(text), builtin_scenarios(), cfg);
    };
    auto r = run("fn signal_plan(demand, config) { return (86, [-20, 15, 20, 15]); }");
    CHECK(r.scores.combined == 0.0);
    REQUIRE(r.error);
    CHECK(r.error->kind == ErrorKind::PlanInvalid);

    r = run("fn signal_plan(demand, config) { return (60, [20, 15, 20, 15]); }");
    REQUIRE(r.error);
    CHECK(r.error->kind == ErrorKind::PlanInvalid);
    CHECK(r.error->message.find("S1") != std::string::npos);

    r = run("fn signal_plan(demand, config) { return (60, [20, 15, 20, 15]) }");
    REQUIRE(r.error);
    CHECK(r.error->kind == ErrorKind::Syntax);

    r = run("fn signal_plan(demand, config) { return (x, [20, 15, 20, 15]); }");
    REQUIRE(r.error);
    CHECK(r.error->kind == ErrorKind::Validation);

    r = run("fn signal_plan(demand, config) { x = 1 / 0; return (86, [20, 15, 20, 15]); }");
    REQUIRE(r.error);
    CHECK(r.error->kind == ErrorKind::Runtime);
    CHECK(r.scores.combined == 0.0);
    CHECK(r.scenarios.empty());
}

TEST_CASE("evaluation is deterministic and thread-independent") {
    const sig::SourceText src(std::string(fixtures::webster_program()));
    const IntersectionConfig cfg;
    const auto a = evaluate_program(src, builtin_scenarios(), cfg);
    const auto b = evaluate_program(src, builtin_scenarios(), cfg);
    EvalOptions opts;
    opts.threads = 4;
    const auto c = evaluate_program(src, builtin_scenarios(), cfg, opts);
    CHECK(a == b);
    CHECK(a == c);
}

TEST_CASE("reduction order ignores scenario and seed order") {
    const sig::SourceText src(std::string(fixtures::discovered_program()));
    const IntersectionConfig cfg;
    auto shuffled = builtin_scenarios();
    std::swap(shuffled[0], shuffled[2]);
    std::swap(shuffled[1].seeds[0], shuffled[1].seeds[2]);
    const auto a = evaluate_program(src, builtin_scenarios(), cfg);
    const auto b = evaluate_program(src, shuffled, cfg);
    CHECK(a.avg_delay == b.avg_delay);
    CHECK(a.avg_stops == b.avg_stops);
    CHECK(a.scores == b.scores);
    CHECK(a.mean_cycle == b.mean_cycle);
    CHECK(b.scenarios[0].id == "S3");
}

TEST_CASE("seed averaging then scenario averaging") {
    const IntersectionConfig cfg;
    const auto planner = [&](const DemandMatrix& d) { return compute_plan(d, cfg); };
    const auto r = evaluate_planner(planner, builtin_scenarios(), cfg);
    double total = 0;
    for (const auto& sc : builtin_scenarios()) {
        const auto plan = compute_plan(sc.demand, cfg);
        double per = 0;
        for (auto seed : sc.seeds) per += simulate(plan, generate_arrivals(sc.demand, seed, sc.duration), cfg).average_delay();
        total += per / 3;
    }
    CHECK(r.avg_delay == doctest::Approx(total / 3).epsilon(1e-14));
    CHECK(r.mean_cycle == doctest::Approx((130.0 + r.scenarios[1].plan.cycle + r.scenarios[2].plan.cycle) / 3));
}

TEST_CASE("scenario validation") {
    Scenario s = builtin_scenarios()[0];
    s.seeds.clear();
    CHECK_THROWS_AS(s.validate(), Error);
    s = builtin_scenarios()[0];
    s.duration = 0;
    CHECK_THROWS_AS(s.validate(), Error);
    CHECK_THROWS_AS(evaluate_program(sig::SourceText("x"), {}, IntersectionConfig{}), Error);
    CHECK(builtin_scenario("S2")->seeds == std::vector<std::uint64_t>{201, 202, 203});
    CHECK_FALSE(builtin_scenario("S9"));
}

TEST_CASE("shipped scenario files equal the built-ins") {
    for (const auto& s : builtin_scenarios()) {
        const auto path = std::string(EVOSIG_DATA_DIR) + "/scenarios/" + s.id + ".json";
        CHECK(load_scenario(path) == s);
    }
}

TEST_CASE("scenario json round trip and errors") {
    const auto s = builtin_scenarios()[2];
    CHECK(scenario_from_json(to_json(s)) == s);
    auto j = to_json(s);
    j["demand"]["N"]["through"] = -5;
    CHECK_THROWS_AS(scenario_from_json(j), Error);
    j = to_json(s);
    j["extra"] = 1;
    CHECK_THROWS_AS(scenario_from_json(j), Error);
    j = to_json(s);
    j.erase("duration");
    CHECK(scenario_from_json(j).duration == 1800);
    j["demand"] = Json::parse(R"({"north": {"through": 1, "left": 2, "right": 3}, "S": {"through": 0, "left": 0,
        "right": 0}, "E": {"through": 0, "left": 0, "right": 0}, "W": {"through": 0, "left": 0, "right": 0}})");
    CHECK(scenario_from_json(j).demand[Approach::North].right == 3);
}

TEST_CASE("eval result json round trip") {
    const auto r = evaluate_program(sig::SourceText(std::string(fixtures::discovered_program())), builtin_scenarios(),
                                    IntersectionConfig{});
    CHECK(eval_result_from_json(Json::parse(to_json(r).dump())) == r);
    EvalResult bad;
    bad.error = EvalError{ErrorKind::FuelExhausted, "budget"};
    CHECK(eval_result_from_json(to_json(bad)) == bad);
}

TEST_CASE("config json") {
    IntersectionConfig c;
    c.flags = FlagSet{Modification::CLB, Modification::PAR};
    c.yellow = 4;
    CHECK(config_from_json(to_json(c)) == c);
    const auto partial = config_from_json(Json::parse(R"({"flags": ["RTI", "SLF"], "saturation_flow_per_lane": 1900})"));
    CHECK(partial.flags == FlagSet{Modification::RTI, Modification::SLF});
    CHECK(partial.saturation_flow_per_lane == 1900);
    CHECK(partial.yellow == 3);
    CHECK_THROWS_AS(config_from_json(Json::parse(R"({"colour": 1})")), Error);
    CHECK_THROWS_AS(config_from_json(Json::parse(R"({"shared_lane_factor": 3})")), Error);
}
