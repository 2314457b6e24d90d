#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evosig {

enum class Approach : std::size_t { North = 0, South = 1, East = 2, West = 3 };
inline constexpr std::array<Approach, 4> kApproaches{Approach::North, Approach::South, Approach::East,
                                                     Approach::West};
std::string_view to_string(Approach a);

/// Hourly volumes (veh/h) for one approach.
struct ApproachDemand {
    double through = 0.0;
    double left = 0.0;
    double right = 0.0;

    friend bool operator==(const ApproachDemand&, const ApproachDemand&) = default;
};

struct DemandMatrix {
    std::array<ApproachDemand, 4> approaches{};

    ApproachDemand& operator[](Approach a) { return approaches[static_cast<std::size_t>(a)]; }
    const ApproachDemand& operator[](Approach a) const { return approaches[static_cast<std::size_t>(a)]; }

    /// Throws InvalidArgument on negative or non-finite volumes.
    void validate() const;

    DemandMatrix scaled(double k) const;

    friend bool operator==(const DemandMatrix&, const DemandMatrix&) = default;
};

// Phase order is fixed: EW through, EW left, NS through, NS left.
enum class Phase : std::size_t { EwThrough = 0, EwLeft = 1, NsThrough = 2, NsLeft = 3 };
inline constexpr std::size_t kPhaseCount = 4;
std::string_view to_string(Phase p);

/// The five timing modifications that separate the discovered program from
/// the baseline Webster implementation.
enum class Modification : unsigned {
    CLB = 1u << 0, // cycle length bound raised
    RTI = 1u << 1, // right turns counted in through demand
    SLF = 1u << 2, // reduced shared-lane factor
    MGF = 1u << 3, // revised minimum-green feasibility window
    PAR = 1u << 4, // post-allocation rescaling
};
inline constexpr std::array<Modification, 5> kModifications{Modification::CLB, Modification::RTI, Modification::SLF,
                                                            Modification::MGF, Modification::PAR};
std::string_view to_string(Modification m);
std::optional<Modification> parse_modification(std::string_view name);

class FlagSet {
public:
    constexpr FlagSet() = default;
    constexpr FlagSet(std::initializer_list<Modification> mods) {
        for (auto m : mods) bits_ |= static_cast<unsigned>(m);
    }
    static constexpr FlagSet all() {
        return {Modification::CLB, Modification::RTI, Modification::SLF, Modification::MGF, Modification::PAR};
    }

    static constexpr FlagSet from_bits(unsigned bits) { FlagSet f; f.bits_ = bits & 31u; return f; }

    constexpr bool has(Modification m) const { return (bits_ & static_cast<unsigned>(m)) != 0; }
    constexpr FlagSet with(Modification m) const { FlagSet f = *this; f.bits_ |= static_cast<unsigned>(m); return f; }
    constexpr FlagSet without(Modification m) const { FlagSet f = *this; f.bits_ &= ~static_cast<unsigned>(m); return f; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr unsigned bits() const { return bits_; }

    /// "CLB+RTI" style; "none" when empty.
    std::string to_string() const;
    /// Accepts comma or plus separated names, "none", "all". Throws InvalidArgument.
    static FlagSet parse(std::string_view text);

    friend constexpr bool operator==(const FlagSet&, const FlagSet&) = default;

private:
    unsigned bits_ = 0;
};

struct CycleWindow {
    double low = 0.0;
    double high = 0.0;
    friend bool operator==(const CycleWindow&, const CycleWindow&) = default;
};

/// Geometry, signal parameters and timing policy. Policy values come in
/// pairs: the baseline value and the one selected by the matching flag.
struct IntersectionConfig {
    int lanes_through_exclusive = 2;
    int lanes_left = 1;
    int lanes_shared_through_right = 1;
    double saturation_flow_per_lane = 1800.0; // veh/h/lane
    double shared_lane_factor = 0.9;
    double reduced_shared_lane_factor = 0.5; // SLF
    double yellow = 3.0;
    double all_red = 1.0;
    double min_green_through = 20.0;
    double min_green_left = 15.0;
    double cycle_min = 50.0;
    double cycle_max = 130.0;
    double extended_cycle_max = 240.0; // CLB
    CycleWindow mgf_window{50.0, 90.0};
    CycleWindow revised_mgf_window{90.0, 140.0}; // MGF
    FlagSet flags{};

    // Physical model used by the simulator, independent of any planning
    // assumption: share of the shared through-right lane's saturation flow
    // available to through traffic.
    double sim_shared_lane_through_share = 0.6;
    // Hard upper bound on any plan's cycle accepted from a program.
    double max_plan_cycle = 300.0;

    double intergreen() const { return yellow + all_red; }
    double lost_time() const { return 4.0 * intergreen(); }
    double effective_shared_lane_factor() const;
    double effective_cycle_max() const;
    CycleWindow effective_mgf_window() const;
    std::array<double, kPhaseCount> min_greens() const {
        return {min_green_through, min_green_left, min_green_through, min_green_left};
    }

    /// Throws InvalidArgument when an invariant is broken.
    void validate() const;

    /// Same intersection, planning shared-lane factor set to the simulator's
    /// physical through share. Under this calibration the critical ratio sums
    /// of the built-in S1-S3 demands describe the simulated intersection.
    IntersectionConfig calibrated_for_crs() const;

    friend bool operator==(const IntersectionConfig&, const IntersectionConfig&) = default;
};

struct FlowRatios {
    std::array<double, kPhaseCount> y{};
    double total = 0.0;
};

struct PhasePlan {
    double cycle = 0.0;
    std::array<double, kPhaseCount> greens{};
    double intergreen = 0.0;

    double green_total() const { return ((greens[0] + greens[1]) + greens[2]) + greens[3]; }
    friend bool operator==(const PhasePlan&, const PhasePlan&) = default;
};

FlowRatios compute_flow_ratios(const DemandMatrix& demand, const IntersectionConfig& config);

/// Critical ratio sum under baseline assumptions (flags ignored).
double compute_crs(const DemandMatrix& demand, const IntersectionConfig& config);

/// Webster's optimal cycle (1.5 L + 5) / (1 - Y), clamped to
/// [cycle_min, effective cycle max]; Y >= 1 yields the cycle max.
double webster_cycle(double critical_ratio_sum, double lost_time, const IntersectionConfig& config);

/// Proportional split of the effective green by y_i / Y, then minimum-green
/// enforcement, the feasibility window when the effective green cannot hold
/// the minimums, and optional rescaling of unclamped phases (PAR). Without PAR
/// a minimum-green overrun lengthens the reported cycle to the time the phase
/// sequence actually takes. Y = 0 allocates minimum greens.
/// Throws InfeasiblePlan when the window cannot fit the minimum greens.
PhasePlan allocate_greens(double cycle, const FlowRatios& ratios, const IntersectionConfig& config);

PhasePlan compute_plan(const DemandMatrix& demand, const IntersectionConfig& config);

/// Shape checks: finite positive cycle within max_plan_cycle, non-negative
/// finite greens and intergreen.
std::vector<std::string> plan_shape_violations(const PhasePlan& plan, const IntersectionConfig& config);

/// Shape checks plus minimum greens and the phase sequence fitting in the
/// cycle. Empty result means the plan is usable by the simulator.
std::vector<std::string> plan_violations(const PhasePlan& plan, const IntersectionConfig& config);

/// `cycle=<int>; greens=<g1,g2,g3,g4>; intergreen=<int>` with whole seconds.
std::string format_plan(const PhasePlan& plan);

} // namespace evosig
