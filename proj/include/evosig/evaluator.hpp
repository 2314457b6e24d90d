#pragma once

#include "evosig/error.hpp"
#include "evosig/rng.hpp"
#include "evosig/siglang.hpp"
#include "evosig/timing.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace evosig {

struct Scenario {
    std::string id;
    DemandMatrix demand;
    int duration = 1800; // s
    std::vector<std::uint64_t> seeds;

    void validate() const;
    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// S1-S3 heavy-demand scenarios, 1800 s, three seeds each.
const std::vector<Scenario>& builtin_scenarios();
std::optional<Scenario> builtin_scenario(std::string_view id);

// ------------------------------------------------------------- arrivals

enum class Movement : std::size_t { Through = 0, Left = 1, Right = 2 };
inline constexpr std::size_t kMovementCount = 12;

inline constexpr std::size_t movement_index(Approach a, Movement m) {
    return static_cast<std::size_t>(a) * 3 + static_cast<std::size_t>(m);
}
std::string movement_name(std::size_t index);

/// Per-second arrival counts for each of the 12 movements.
using Arrivals = std::array<std::vector<int>, kMovementCount>;

/// Poisson draw by sequential inversion of the CDF from one uniform.
int poisson_inversion(double mean, Rng& rng);

/// Stream for (seed, movement) starts from state
/// splitmix64_mix(seed + (movement + 1) * 0x9E3779B97F4A7C15).
Rng arrival_stream(std::uint64_t seed, std::size_t movement);

Arrivals generate_arrivals(const DemandMatrix& demand, std::uint64_t seed, int duration);

// ------------------------------------------------------------ simulation

/// Fluid quantities are carried in fixed point, 2^-24 vehicle per unit, so
/// per-movement conservation holds exactly.
inline constexpr std::int64_t kFluidUnit = std::int64_t{1} << 24;

struct MovementStats {
    std::int64_t arrived = 0;  // units
    std::int64_t departed = 0; // units
    std::int64_t residual = 0; // units
    std::int64_t delay = 0;    // unit-seconds
    std::int64_t stops = 0;    // units
};

struct SimResult {
    std::array<MovementStats, kMovementCount> movements{};

    double total_delay() const;    // veh*s
    double total_stops() const;    // stops
    double vehicles_arrived() const;
    double vehicles_served() const;
    double residual_queue() const; // veh
    double average_delay() const;  // s/veh; 0 without arrivals
    double average_stops() const;  // stops/veh; 0 without arrivals
};

/// Discharge rate (veh/h) of each movement during its green.
std::array<double, kMovementCount> movement_saturation(const IntersectionConfig& config);
Phase phase_of(std::size_t movement);

/// Fraction of [t, t+1) covered by the green of `phase` when the plan is
/// cycled from t = 0.
double green_overlap(const PhasePlan& plan, Phase phase, double t);

/// One-second vertical-queue update per movement. Throws InvalidArgument for
/// a structurally unusable plan.
SimResult simulate(const PhasePlan& plan, const Arrivals& arrivals, const IntersectionConfig& config);

// ---------------------------------------------------------------- scoring

struct Scores {
    double delay = 0.0;    // S_d
    double stops = 0.0;    // S_s
    double combined = 0.0; // S_c
};

/// S_d = 1 / (1 + d/100), S_s = 1 / (1 + s), S_c = (S_d + S_s) / 2.
Scores score(double avg_delay, double avg_stops);

// ------------------------------------------------------------- evaluation

struct ScenarioOutcome {
    std::string id;
    PhasePlan plan;
    double avg_delay = 0.0;
    double avg_stops = 0.0;
    friend bool operator==(const ScenarioOutcome&, const ScenarioOutcome&) = default;
};

struct EvalError {
    ErrorKind kind = ErrorKind::Runtime;
    std::string message;
    friend bool operator==(const EvalError&, const EvalError&) = default;
};

struct EvalResult {
    double avg_delay = 0.0;
    double avg_stops = 0.0;
    Scores scores;
    double mean_cycle = 0.0;
    std::vector<ScenarioOutcome> scenarios;
    std::optional<EvalError> error;

    bool ok() const { return !error.has_value(); }
    double combined() const { return scores.combined; }
    friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

inline bool operator==(const Scores& a, const Scores& b) {
    return a.delay == b.delay && a.stops == b.stops && a.combined == b.combined;
}

struct EvalOptions {
    std::uint64_t fuel = sig::kDefaultFuel;
    sig::Limits limits{};
    unsigned threads = 1; // (scenario x seed) cells evaluated concurrently
};

using Planner = std::function<PhasePlan(const DemandMatrix&)>;

/// Plans once per scenario, simulates every seed, averages seeds within a
/// scenario and then scenarios uniformly. Failures are returned in-band with
/// all scores zero.
EvalResult evaluate_planner(const Planner& planner, std::span<const Scenario> scenarios,
                            const IntersectionConfig& config, const EvalOptions& options = {});

EvalResult evaluate_program(const sig::SourceText& program, std::span<const Scenario> scenarios,
                            const IntersectionConfig& config, const EvalOptions& options = {});

} // namespace evosig
