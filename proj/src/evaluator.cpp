#include "evosig/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

namespace evosig {

namespace {

Scenario make_scenario(std::string id, std::array<ApproachDemand, 4> rows, std::vector<std::uint64_t> seeds) {
    Scenario s;
    s.id = std::move(id);
    s.demand.approaches = rows;
    s.seeds = std::move(seeds);
    return s;
}

} // namespace

void Scenario::validate() const {
    if (id.empty()) throw Error(ErrorKind::InvalidArgument, "scenario id is empty");
    if (duration <= 0) throw Error(ErrorKind::InvalidArgument, "scenario " + id + ": duration must be positive");
    if (seeds.empty()) throw Error(ErrorKind::InvalidArgument, "scenario " + id + ": needs at least one seed");
    demand.validate();
}

const std::vector<Scenario>& builtin_scenarios() {
    // N, S, E, W rows of (through, left, right) veh/h
    static const std::vector<Scenario> scenarios{
        make_scenario("S1", {{{1550, 210, 30}, {1450, 180, 50}, {1450, 200, 40}, {1400, 180, 40}}}, {101, 102, 103}),
        make_scenario("S2", {{{2600, 230, 30}, {2450, 250, 50}, {600, 80, 40}, {650, 90, 40}}}, {201, 202, 203}),
        make_scenario("S3", {{{2500, 80, 60}, {2400, 90, 70}, {400, 330, 150}, {450, 340, 120}}}, {301, 302, 303}),
    };
    return scenarios;
}

std::optional<Scenario> builtin_scenario(std::string_view id) {
    for (const auto& s : builtin_scenarios())
        if (s.id == id) return s;
    return std::nullopt;
}

std::string movement_name(std::size_t index) {
    static constexpr std::string_view kinds[] = {"through", "left", "right"};
    return std::string(to_string(static_cast<Approach>(index / 3))) + "." + std::string(kinds[index % 3]);
}

// ------------------------------------------------------------- arrivals

int poisson_inversion(double mean, Rng& rng) {
    if (!(mean > 0.0)) return 0;
    const double u = rng.uniform01();
    double p = std::exp(-mean);
    double cdf = p;
    int k = 0;
    // the cap only matters when the cdf stalls below u from rounding
    while (u > cdf && k < 10000) {
        ++k;
        p *= mean / k;
        cdf += p;
        if (p == 0.0 && k > mean) break;
    }
    return k;
}

Rng arrival_stream(std::uint64_t seed, std::size_t movement) {
    return Rng(splitmix64_mix(seed + (static_cast<std::uint64_t>(movement) + 1) * 0x9E3779B97F4A7C15ULL));
}

Arrivals generate_arrivals(const DemandMatrix& demand, std::uint64_t seed, int duration) {
    if (duration < 1) throw Error(ErrorKind::InvalidArgument, "duration must be at least 1 s");
    demand.validate();
    Arrivals out;
    for (std::size_t m = 0; m < kMovementCount; ++m) {
        const auto& row = demand.approaches[m / 3];
        const double vph = m % 3 == 0 ? row.through : m % 3 == 1 ? row.left : row.right;
        const double rate = vph / 3600.0;
        Rng rng = arrival_stream(seed, m);
        auto& seq = out[m];
        seq.resize(static_cast<std::size_t>(duration));
        for (auto& a : seq) a = poisson_inversion(rate, rng);
    }
    return out;
}

// ------------------------------------------------------------ simulation

double SimResult::total_delay() const {
    std::int64_t sum = 0;
    for (const auto& m : movements) sum += m.delay;
    return static_cast<double>(sum) / kFluidUnit;
}

double SimResult::total_stops() const {
    std::int64_t sum = 0;
    for (const auto& m : movements) sum += m.stops;
    return static_cast<double>(sum) / kFluidUnit;
}

double SimResult::vehicles_arrived() const {
    std::int64_t sum = 0;
    for (const auto& m : movements) sum += m.arrived;
    return static_cast<double>(sum) / kFluidUnit;
}

double SimResult::vehicles_served() const {
    std::int64_t sum = 0;
    for (const auto& m : movements) sum += m.departed;
    return static_cast<double>(sum) / kFluidUnit;
}

double SimResult::residual_queue() const {
    std::int64_t sum = 0;
    for (const auto& m : movements) sum += m.residual;
    return static_cast<double>(sum) / kFluidUnit;
}

double SimResult::average_delay() const {
    std::int64_t delay = 0, arrived = 0;
    for (const auto& m : movements) {
        delay += m.delay;
        arrived += m.arrived;
    }
    return arrived == 0 ? 0.0 : static_cast<double>(delay) / static_cast<double>(arrived);
}

double SimResult::average_stops() const {
    std::int64_t stops = 0, arrived = 0;
    for (const auto& m : movements) {
        stops += m.stops;
        arrived += m.arrived;
    }
    return arrived == 0 ? 0.0 : static_cast<double>(stops) / static_cast<double>(arrived);
}

std::array<double, kMovementCount> movement_saturation(const IntersectionConfig& config) {
    const double s = config.saturation_flow_per_lane;
    const double through =
        (config.lanes_through_exclusive + config.sim_shared_lane_through_share * config.lanes_shared_through_right) * s;
    const double left = config.lanes_left * s;
    const double right = config.lanes_shared_through_right * s;
    std::array<double, kMovementCount> out{};
    for (std::size_t m = 0; m < kMovementCount; ++m) out[m] = m % 3 == 0 ? through : m % 3 == 1 ? left : right;
    return out;
}

Phase phase_of(std::size_t movement) {
    const auto approach = static_cast<Approach>(movement / 3);
    const bool ew = approach == Approach::East || approach == Approach::West;
    const bool left = movement % 3 == 1;
    if (ew) return left ? Phase::EwLeft : Phase::EwThrough;
    return left ? Phase::NsLeft : Phase::NsThrough;
}

namespace {

double phase_start(const PhasePlan& plan, Phase phase) {
    double start = 0.0;
    for (std::size_t p = 0; p < static_cast<std::size_t>(phase); ++p) start += plan.greens[p] + plan.intergreen;
    return start;
}

struct SecondState {
    double overlap = 0.0;
    bool green_ends = false; // a green interval ends in (t, t+1]
};

SecondState second_state(const PhasePlan& plan, double start, double length, double t) {
    SecondState st;
    if (!(length > 0.0)) return st;
    const double c = plan.cycle;
    const auto k0 = static_cast<long long>(std::floor((t - start - length) / c));
    const auto k1 = static_cast<long long>(std::floor((t + 1.0 - start) / c));
    for (long long k = k0; k <= k1; ++k) {
        const double a = static_cast<double>(k) * c + start;
        const double b = a + length;
        st.overlap += std::max(0.0, std::min(b, t + 1.0) - std::max(a, t));
        if (b > t && b <= t + 1.0) st.green_ends = true;
    }
    st.overlap = std::min(st.overlap, 1.0);
    return st;
}

void check_plan(const PhasePlan& plan) {
    auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, "unusable plan: " + what); };
    if (!std::isfinite(plan.cycle) || plan.cycle <= 0.0) bad("cycle must be positive");
    if (!std::isfinite(plan.intergreen) || plan.intergreen < 0.0) bad("intergreen must be non-negative");
    for (double g : plan.greens)
        if (!std::isfinite(g) || g < 0.0) bad("greens must be non-negative");
    if (plan.green_total() + 4.0 * plan.intergreen > plan.cycle + 1e-6) bad("phase sequence exceeds the cycle");
}

} // namespace

double green_overlap(const PhasePlan& plan, Phase phase, double t) {
    check_plan(plan);
    const auto p = static_cast<std::size_t>(phase);
    return second_state(plan, phase_start(plan, phase), plan.greens[p], t).overlap;
}

SimResult simulate(const PhasePlan& plan, const Arrivals& arrivals, const IntersectionConfig& config) {
    check_plan(plan);
    const auto sat = movement_saturation(config);

    SimResult result;
    for (std::size_t m = 0; m < kMovementCount; ++m) {
        const auto& seq = arrivals[m];
        const auto phase = phase_of(m);
        const auto p = static_cast<std::size_t>(phase);
        const double start = phase_start(plan, phase);
        const double per_second = sat[m] / 3600.0;
        auto& st = result.movements[m];

        std::int64_t queue = 0;
        for (std::size_t t = 0; t < seq.size(); ++t) {
            if (seq[t] < 0) throw Error(ErrorKind::InvalidArgument, "negative arrival count");
            const auto sec = second_state(plan, start, plan.greens[p], static_cast<double>(t));
            const std::int64_t arrive = static_cast<std::int64_t>(seq[t]) * kFluidUnit;
            const auto cap = static_cast<std::int64_t>(std::llround(per_second * sec.overlap * kFluidUnit));

            if (sec.overlap <= 0.0 || queue > 0)
                st.stops += arrive;
            else
                st.stops += std::max<std::int64_t>(0, arrive - cap);

            queue += arrive;
            const std::int64_t depart = std::min(queue, cap);
            queue -= depart;
            st.arrived += arrive;
            st.departed += depart;
            st.delay += queue;
            if (sec.green_ends) st.stops += queue;
        }
        st.residual = queue;
    }
    return result;
}

// ---------------------------------------------------------------- scoring

Scores score(double avg_delay, double avg_stops) {
    if (!(avg_delay >= 0.0) || !(avg_stops >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "delay and stops must be non-negative");
    Scores s;
    s.delay = 1.0 / (1.0 + avg_delay / 100.0);
    s.stops = 1.0 / (1.0 + avg_stops);
    s.combined = 0.5 * s.delay + 0.5 * s.stops;
    return s;
}

// ------------------------------------------------------------- evaluation

namespace {

struct Cell {
    std::size_t scenario = 0;
    std::uint64_t seed = 0;
    double delay = 0.0;
    double stops = 0.0;
};

EvalResult failed(ErrorKind kind, std::string message) {
    EvalResult r;
    r.error = EvalError{kind, std::move(message)};
    return r;
}

void run_cells(std::vector<Cell>& cells, const std::vector<PhasePlan>& plans, std::span<const Scenario> scenarios,
               const IntersectionConfig& config, unsigned threads) {
    auto work = [&](Cell& c) {
        const auto& sc = scenarios[c.scenario];
        const auto arrivals = generate_arrivals(sc.demand, c.seed, sc.duration);
        const auto sim = simulate(plans[c.scenario], arrivals, config);
        c.delay = sim.average_delay();
        c.stops = sim.average_stops();
    };
    threads = std::min<unsigned>(threads, static_cast<unsigned>(cells.size()));
    if (threads <= 1) {
        for (auto& c : cells) work(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i; (i = next.fetch_add(1)) < cells.size();) work(cells[i]);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace

EvalResult evaluate_planner(const Planner& planner, std::span<const Scenario> scenarios,
                            const IntersectionConfig& config, const EvalOptions& options) {
    if (scenarios.empty()) throw Error(ErrorKind::InvalidArgument, "no scenarios to evaluate");
    for (const auto& s : scenarios) s.validate();

    std::vector<PhasePlan> plans;
    plans.reserve(scenarios.size());
    try {
        for (const auto& s : scenarios) {
            auto plan = planner(s.demand);
            const auto problems = plan_violations(plan, config);
            if (!problems.empty()) throw Error(ErrorKind::PlanInvalid, s.id + ": " + problems.front());
            plans.push_back(plan);
        }
    } catch (const Error& e) {
        return failed(e.kind(), e.what());
    } catch (const std::exception& e) {
        return failed(ErrorKind::Runtime, e.what());
    }

    // fixed reduction order: scenario id, then seed
    std::vector<std::size_t> order(scenarios.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scenarios[a].id < scenarios[b].id; });

    std::vector<Cell> cells;
    for (std::size_t si : order) {
        auto seeds = scenarios[si].seeds;
        std::sort(seeds.begin(), seeds.end());
        for (auto seed : seeds) cells.push_back({si, seed});
    }
    run_cells(cells, plans, scenarios, config, std::max(1u, options.threads));

    EvalResult r;
    r.scenarios.resize(scenarios.size());
    double delay_sum = 0.0, stops_sum = 0.0, cycle_sum = 0.0;
    std::size_t ci = 0;
    for (std::size_t si : order) {
        double d = 0.0, s = 0.0;
        const std::size_t n = scenarios[si].seeds.size();
        for (std::size_t k = 0; k < n; ++k, ++ci) {
            d += cells[ci].delay;
            s += cells[ci].stops;
        }
        auto& out = r.scenarios[si];
        out.id = scenarios[si].id;
        out.plan = plans[si];
        out.avg_delay = d / static_cast<double>(n);
        out.avg_stops = s / static_cast<double>(n);
        delay_sum += out.avg_delay;
        stops_sum += out.avg_stops;
        cycle_sum += plans[si].cycle;
    }
    const auto count = static_cast<double>(scenarios.size());
    r.avg_delay = delay_sum / count;
    r.avg_stops = stops_sum / count;
    r.mean_cycle = cycle_sum / count;
    r.scores = score(r.avg_delay, r.avg_stops);
    return r;
}

EvalResult evaluate_program(const sig::SourceText& program, std::span<const Scenario> scenarios,
                            const IntersectionConfig& config, const EvalOptions& options) {
    if (scenarios.empty()) throw Error(ErrorKind::InvalidArgument, "no scenarios to evaluate");
    sig::Ast ast;
    try {
        ast = sig::parse(program, options.limits);
    } catch (const Error& e) {
        return failed(e.kind(), e.what());
    }
    const auto violations = sig::validate(ast);
    if (!violations.empty()) return failed(ErrorKind::Validation, sig::describe(violations));

    const auto fuel = options.fuel;
    return evaluate_planner([&](const DemandMatrix& d) { return sig::interpret(ast, d, config, fuel); }, scenarios,
                            config, options);
}

} // namespace evosig
