#include "doctest.h"

#include "evosig/error.hpp"
#include "evosig/evaluator.hpp"
#include "evosig/timing.hpp"
#include "support.hpp"

#include <cmath>

using namespace evosig;

namespace {

const DemandMatrix& s1() { return builtin_scenarios()[0].demand; }

// Brute-force split: y_i / Y of the effective green, no clamping.
std::array<double, 4> proportional(const std::array<double, 4>& y, double cycle, double lost) {
    double total = 0;
    for (double v : y) total += v;
    std::array<double, 4> g{};
    for (int i = 0; i < 4; ++i) g[i] = y[i] / total * (cycle - lost);
    return g;
}

FlowRatios ratios_of(std::array<double, 4> y) {
    FlowRatios r;
    r.y = y;
    r.total = ((y[0] + y[1]) + y[2]) + y[3];
    return r;
}

} // namespace

TEST_CASE("flow ratios by hand") {
    IntersectionConfig cfg;
    auto r = compute_flow_ratios(s1(), cfg);
    CHECK(r.y[0] == doctest::Approx(1450.0 / (2.9 * 1800.0)).epsilon(1e-12));
    CHECK(r.y[0] == doctest::Approx(0.2778).epsilon(1e-3));
    CHECK(r.y[1] == doctest::Approx(200.0 / 1800.0));
    CHECK(r.y[2] == doctest::Approx(1550.0 / 5220.0));
    CHECK(r.y[3] == doctest::Approx(210.0 / 1800.0));
    CHECK(r.total == doctest::Approx(r.y[0] + r.y[1] + r.y[2] + r.y[3]));

    cfg.flags = {Modification::RTI};
    r = compute_flow_ratios(s1(), cfg);
    CHECK(r.y[0] == doctest::Approx((1450.0 + 40.0) / 5220.0));
    CHECK(r.y[0] == doctest::Approx(0.2854).epsilon(1e-3));
    // north 1550+30 beats south 1450+50
    CHECK(r.y[2] == doctest::Approx(1580.0 / 5220.0));

    cfg.flags = {Modification::SLF};
    r = compute_flow_ratios(s1(), cfg);
    CHECK(r.y[0] == doctest::Approx(1450.0 / (2.5 * 1800.0)));
}

TEST_CASE("zero demand gives zero ratios") {
    auto r = compute_flow_ratios(DemandMatrix{}, IntersectionConfig{});
    for (double y : r.y) CHECK(y == 0.0);
    CHECK(r.total == 0.0);
    CHECK(compute_crs(DemandMatrix{}, IntersectionConfig{}) == 0.0);
}

TEST_CASE("phase without capacity") {
    IntersectionConfig cfg;
    cfg.lanes_left = 0;
    DemandMatrix d;
    CHECK(compute_flow_ratios(d, cfg).y[1] == 0.0);
    d[Approach::East].left = 10;
    try {
        compute_flow_ratios(d, cfg);
        FAIL("expected infeasible demand");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InfeasibleDemand);
        CHECK(std::string(e.what()).find("EW-left") != std::string::npos);
    }
}

TEST_CASE("demand validation") {
    DemandMatrix d;
    d[Approach::South].right = -1;
    CHECK_THROWS_AS(compute_flow_ratios(d, IntersectionConfig{}), Error);
    d[Approach::South].right = std::nan("");
    CHECK_THROWS_AS(d.validate(), Error);
}

TEST_CASE("crs ignores flags and is linear") {
    IntersectionConfig cfg;
    const double base = compute_crs(s1(), cfg);
    cfg.flags = FlagSet::all();
    CHECK(compute_crs(s1(), cfg) == base);
    CHECK(compute_crs(s1().scaled(2.0), cfg) == 2.0 * base);
}

TEST_CASE("crs under the simulator calibration") {
    const auto cal = IntersectionConfig{}.calibrated_for_crs();
    const double expected[] = {0.868, 0.865, 0.872};
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& sc = builtin_scenarios()[i];
        CAPTURE(sc.id);
        CHECK(std::abs(compute_crs(sc.demand, cal) - expected[i]) <= 0.05);
    }
}

TEST_CASE("webster cycle") {
    IntersectionConfig cfg;
    CHECK(webster_cycle(0.868, 16, cfg) == 130.0);
    cfg.flags = {Modification::CLB};
    CHECK(webster_cycle(0.868, 16, cfg) == doctest::Approx(29.0 / 0.132));
    CHECK(webster_cycle(0.868, 16, cfg) == doctest::Approx(219.7).epsilon(1e-3));
    CHECK(webster_cycle(0.0, 16, cfg) == 50.0);
    CHECK(webster_cycle(1.0, 16, cfg) == 240.0);
    CHECK(webster_cycle(3.5, 16, IntersectionConfig{}) == 130.0);
    CHECK_THROWS_AS(webster_cycle(0.5, 0.0, cfg), Error);
}

TEST_CASE("allocate greens proportionally") {
    IntersectionConfig cfg;
    const std::array<double, 4> y{0.2778, 0.1111, 0.2969, 0.1167};
    const auto plan = allocate_greens(130, ratios_of(y), cfg);
    const auto expect = proportional(y, 130, 16);
    for (int i = 0; i < 4; ++i) CHECK(plan.greens[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    // none of these fall under their minimum, so nothing is clamped
    CHECK(plan.greens[1] > 15.0);
    CHECK(plan.cycle == 130.0);
    CHECK(plan.intergreen == 4.0);
    CHECK(plan.green_total() == doctest::Approx(114.0));

    const auto even = allocate_greens(116, ratios_of({0.25, 0.25, 0.25, 0.25}), cfg);
    for (double g : even.greens) CHECK(g == 25.0);
}

TEST_CASE("minimum green clamping") {
    IntersectionConfig cfg;
    const auto r = ratios_of({0.5, 0.01, 0.3, 0.01});
    auto plan = allocate_greens(130, r, cfg);
    CHECK(plan.greens[1] == 15.0);
    CHECK(plan.greens[3] == 15.0);
    CHECK(plan.greens[0] == doctest::Approx(0.5 / 0.82 * 114));
    // overrun: the phase sequence takes longer than the nominal cycle
    CHECK(plan.cycle == doctest::Approx(plan.green_total() + 16.0));
    CHECK(plan_violations(plan, cfg).empty());

    cfg.flags = {Modification::PAR};
    plan = allocate_greens(130, r, cfg);
    CHECK(plan.cycle == 130.0);
    CHECK(plan.green_total() == doctest::Approx(114.0).epsilon(1e-12));
    CHECK(plan.greens[0] == doctest::Approx(84.0 * 0.5 / 0.8));
    CHECK(plan.greens[2] == doctest::Approx(84.0 * 0.3 / 0.8));
}

TEST_CASE("rescaling can clamp a second round") {
    IntersectionConfig cfg;
    cfg.flags = {Modification::PAR};
    // EW-left starts just above its minimum and is pushed below it by the
    // first rescale
    const auto r = ratios_of({0.6, 0.135, 0.005, 0.15});
    const auto plan = allocate_greens(130, r, cfg);
    for (std::size_t i = 0; i < 4; ++i) CHECK(plan.greens[i] >= cfg.min_greens()[i]);
    CHECK(plan.green_total() == doctest::Approx(114.0).epsilon(1e-12));
    CHECK(plan.greens[1] == 15.0);
}

TEST_CASE("feasibility window") {
    IntersectionConfig cfg;
    // ratios in proportion to the minimums, so the split lands on them
    const auto r = ratios_of({0.2, 0.15, 0.2, 0.15});
    // G = 64 < 70
    auto plan = allocate_greens(80, r, cfg);
    CHECK(plan.cycle == doctest::Approx(86.0));
    CHECK(plan.green_total() == doctest::Approx(70.0));

    cfg.flags = {Modification::MGF};
    plan = allocate_greens(80, r, cfg);
    CHECK(plan.cycle == 90.0);
    CHECK(plan.green_total() == doctest::Approx(74.0));

    // a split that clamps EW-left stretches the baseline cycle past 86
    cfg.flags = {};
    plan = allocate_greens(80, ratios_of({0.2, 0.1, 0.2, 0.1}), cfg);
    CHECK(plan.greens[1] == 15.0);
    CHECK(plan.cycle == doctest::Approx(2 * 70.0 / 3.0 + 30.0 + 16.0));

    cfg.flags = {};
    cfg.min_green_through = 30;
    try {
        allocate_greens(80, r, cfg);
        FAIL("expected infeasible plan");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InfeasiblePlan);
        CHECK(std::string(e.what()).find("106") != std::string::npos);
    }
    cfg.flags = {Modification::MGF, Modification::PAR};
    CHECK(allocate_greens(80, r, cfg).cycle == 106.0);
}

TEST_CASE("compute plan on the built-in demand") {
    IntersectionConfig cfg;
    auto plan = compute_plan(s1(), cfg);
    CHECK(plan.cycle == 130.0);
    CHECK(plan_violations(plan, cfg).empty());

    cfg.flags = FlagSet::all();
    plan = compute_plan(s1(), cfg);
    // Y = 0.910 under RTI and the 0.5 factor, so the extended bound binds
    CHECK(compute_flow_ratios(s1(), cfg).total == doctest::Approx(0.9100).epsilon(1e-3));
    CHECK(plan.cycle == 240.0);
    CHECK(plan.green_total() == doctest::Approx(224.0).epsilon(1e-12));
    CHECK(format_plan(plan) == "cycle=240; greens=82,27,86,29; intergreen=4");
}

TEST_CASE("zero demand plan") {
    IntersectionConfig cfg;
    auto plan = compute_plan(DemandMatrix{}, cfg);
    CHECK(plan.cycle == 86.0);
    CHECK(plan.greens == cfg.min_greens());
    cfg.flags = FlagSet::all();
    plan = compute_plan(DemandMatrix{}, cfg);
    CHECK(plan.cycle == 90.0);
    // rescaling spreads the spare 4 s over the minimums
    for (std::size_t i = 0; i < 4; ++i) CHECK(plan.greens[i] == doctest::Approx(cfg.min_greens()[i] * 74.0 / 70.0));
}

TEST_CASE("toggling one flag changes only its own terms") {
    Rng rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const auto d = testsupport::random_demand(rng);
        const auto all = FlagSet::all();
        for (auto base : {FlagSet{}, all}) {
            IntersectionConfig on, off;
            on.flags = base.with(Modification::RTI);
            off.flags = base.without(Modification::RTI);
            auto a = compute_flow_ratios(d, on), b = compute_flow_ratios(d, off);
            CHECK(a.y[1] == b.y[1]);
            CHECK(a.y[3] == b.y[3]);
            CHECK(a.y[0] >= b.y[0]);

            on.flags = base.with(Modification::SLF);
            off.flags = base.without(Modification::SLF);
            a = compute_flow_ratios(d, on);
            b = compute_flow_ratios(d, off);
            CHECK(a.y[1] == b.y[1]);
            CHECK(a.y[3] == b.y[3]);
            CHECK(a.y[2] >= b.y[2]);

            on.flags = base.with(Modification::CLB);
            off.flags = base.without(Modification::CLB);
            a = compute_flow_ratios(d, on);
            b = compute_flow_ratios(d, off);
            CHECK(a.y == b.y);
            CHECK(on.effective_cycle_max() == 240.0);
            CHECK(off.effective_cycle_max() == 130.0);
        }
    }
}

TEST_CASE("rescaling uses the whole effective green") {
    Rng rng(11);
    int unclamped = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        IntersectionConfig cfg;
        cfg.flags = FlagSet::all();
        const auto d = testsupport::random_demand(rng);
        const auto r = compute_flow_ratios(d, cfg);
        if (r.total <= 0.0) continue;
        const auto plan = compute_plan(d, cfg);
        CHECK(plan_violations(plan, cfg).empty());
        bool any_min = false;
        for (std::size_t i = 0; i < 4; ++i) any_min = any_min || plan.greens[i] == cfg.min_greens()[i];
        if (any_min) continue;
        ++unclamped;
        CHECK(std::abs(plan.green_total() - (plan.cycle - 16.0)) <= 1e-6);
    }
    CHECK(unclamped > 50);
}

TEST_CASE("ratios scale with demand") {
    Rng rng(3);
    IntersectionConfig cfg;
    for (int trial = 0; trial < 200; ++trial) {
        const auto d = testsupport::random_demand(rng);
        const double k = testsupport::uniform(rng, 0.1, 3.0);
        const auto a = compute_flow_ratios(d, cfg);
        const auto b = compute_flow_ratios(d.scaled(k), cfg);
        for (int i = 0; i < 4; ++i) CHECK(b.y[i] == doctest::Approx(k * a.y[i]).epsilon(1e-12));
    }
}

TEST_CASE("plans are deterministic and valid") {
    Rng rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        const auto d = testsupport::random_demand(rng);
        IntersectionConfig cfg;
        cfg.flags = FlagSet::from_bits(static_cast<unsigned>(rng.index(32)));
        CAPTURE(cfg.flags.to_string());
        const auto p = compute_plan(d, cfg);
        CHECK(p == compute_plan(d, cfg));
        CHECK(plan_violations(p, cfg).empty());
        for (std::size_t i = 0; i < 4; ++i) CHECK(p.greens[i] >= cfg.min_greens()[i]);
        CHECK(p.green_total() + 4 * p.intergreen <= p.cycle + 1e-6);
    }
}

TEST_CASE("flag sets") {
    CHECK(FlagSet{}.to_string() == "none");
    CHECK(FlagSet::all().to_string() == "CLB+RTI+SLF+MGF+PAR");
    CHECK(FlagSet::parse("RTI,CLB") == FlagSet{Modification::CLB, Modification::RTI});
    CHECK(FlagSet::parse("CLB+SLF") == FlagSet{Modification::CLB, Modification::SLF});
    CHECK(FlagSet::parse("all") == FlagSet::all());
    CHECK(FlagSet::parse("none").empty());
    CHECK(FlagSet::parse("").empty());
    CHECK_THROWS_AS(FlagSet::parse("XYZ"), Error);
    CHECK(FlagSet::all().without(Modification::PAR).to_string() == "CLB+RTI+SLF+MGF");
}

TEST_CASE("plan violations") {
    IntersectionConfig cfg;
    PhasePlan p{60, {20, 15, 20, 15}, 4};
    CHECK(plan_violations(p, cfg).size() == 1); // 70 + 16 > 60
    p.cycle = 86;
    CHECK(plan_violations(p, cfg).empty());
    p.greens[1] = -1;
    CHECK_FALSE(plan_violations(p, cfg).empty());
    p.greens[1] = 10;
    CHECK_FALSE(plan_violations(p, cfg).empty());
    p = {301, {100, 15, 100, 15}, 4};
    CHECK_FALSE(plan_violations(p, cfg).empty());
    p.cycle = 0;
    CHECK_FALSE(plan_violations(p, cfg).empty());
    CHECK(format_plan({130.4, {39.5, 15.8, 42.2, 16.6}, 4}) == "cycle=130; greens=40,16,42,17; intergreen=4");
}

TEST_CASE("config validation") {
    IntersectionConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.shared_lane_factor = 1.5;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.cycle_min = 200;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.min_green_left = 0;
    CHECK_THROWS_AS(compute_plan(DemandMatrix{}, cfg), Error);
}
