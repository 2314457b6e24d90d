#include "evosig/timing.hpp"

#include "evosig/error.hpp"

#include <cmath>
#include <sstream>

namespace evosig {

namespace {

// Same semantics as the DSL builtins; operand order matters for exact
// agreement with interpreted programs.
double max2(double a, double b) { return a < b ? b : a; }
double min2(double a, double b) { return b < a ? b : a; }
double clamp3(double x, double lo, double hi) { return min2(max2(x, lo), hi); }

double ratio(double demand, double saturation, std::string_view phase) {
    if (saturation <= 0.0) {
        if (demand > 0.0)
            throw Error(ErrorKind::InfeasibleDemand,
                        "phase " + std::string(phase) + " has demand " + std::to_string(demand) +
                            " veh/h but zero saturation flow");
        return 0.0;
    }
    return demand / saturation;
}

} // namespace

std::string_view to_string(Approach a) {
    switch (a) {
    case Approach::North: return "N";
    case Approach::South: return "S";
    case Approach::East: return "E";
    case Approach::West: return "W";
    }
    return "?";
}

std::string_view to_string(Phase p) {
    switch (p) {
    case Phase::EwThrough: return "EW-through";
    case Phase::EwLeft: return "EW-left";
    case Phase::NsThrough: return "NS-through";
    case Phase::NsLeft: return "NS-left";
    }
    return "?";
}

std::string_view to_string(Modification m) {
    switch (m) {
    case Modification::CLB: return "CLB";
    case Modification::RTI: return "RTI";
    case Modification::SLF: return "SLF";
    case Modification::MGF: return "MGF";
    case Modification::PAR: return "PAR";
    }
    return "?";
}

std::optional<Modification> parse_modification(std::string_view name) {
    for (auto m : kModifications)
        if (to_string(m) == name) return m;
    return std::nullopt;
}

std::string FlagSet::to_string() const {
    if (empty()) return "none";
    std::string out;
    for (auto m : kModifications) {
        if (!has(m)) continue;
        if (!out.empty()) out += '+';
        out += evosig::to_string(m);
    }
    return out;
}

FlagSet FlagSet::parse(std::string_view text) {
    FlagSet flags;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find_first_of(",+ ", pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view token = text.substr(pos, end - pos);
        pos = end + 1;
        if (token.empty() || token == "none") continue;
        if (token == "all") {
            flags = FlagSet::all();
            continue;
        }
        auto m = parse_modification(token);
        if (!m) throw Error(ErrorKind::InvalidArgument, "unknown modification flag '" + std::string(token) + "'");
        flags = flags.with(*m);
    }
    return flags;
}

void DemandMatrix::validate() const {
    for (auto a : kApproaches) {
        const auto& d = (*this)[a];
        for (double v : {d.through, d.left, d.right})
            if (!std::isfinite(v) || v < 0.0)
                throw Error(ErrorKind::InvalidArgument,
                            "approach " + std::string(to_string(a)) + " has invalid volume " + std::to_string(v));
    }
}

DemandMatrix DemandMatrix::scaled(double k) const {
    DemandMatrix out = *this;
    for (auto& d : out.approaches) {
        d.through *= k;
        d.left *= k;
        d.right *= k;
    }
    return out;
}

double IntersectionConfig::effective_shared_lane_factor() const {
    return flags.has(Modification::SLF) ? reduced_shared_lane_factor : shared_lane_factor;
}

double IntersectionConfig::effective_cycle_max() const {
    return flags.has(Modification::CLB) ? extended_cycle_max : cycle_max;
}

CycleWindow IntersectionConfig::effective_mgf_window() const {
    return flags.has(Modification::MGF) ? revised_mgf_window : mgf_window;
}

void IntersectionConfig::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, "intersection config: " + what); };
    if (lanes_through_exclusive < 0 || lanes_left < 0 || lanes_shared_through_right < 0) fail("lane counts must be >= 0");
    if (!(saturation_flow_per_lane >= 0.0)) fail("saturation flow must be >= 0");
    for (double f : {shared_lane_factor, reduced_shared_lane_factor, sim_shared_lane_through_share})
        if (!(f >= 0.0 && f <= 1.0)) fail("shared lane factors must lie in [0, 1]");
    if (!(yellow >= 0.0) || !(all_red >= 0.0)) fail("yellow and all-red must be >= 0");
    if (!(min_green_through > 0.0) || !(min_green_left > 0.0)) fail("minimum greens must be > 0");
    if (!(cycle_min <= cycle_max) || !(cycle_min <= extended_cycle_max)) fail("cycle_min exceeds a cycle max");
    if (!(mgf_window.low <= mgf_window.high) || !(revised_mgf_window.low <= revised_mgf_window.high))
        fail("feasibility window low exceeds high");
    if (!(max_plan_cycle > 0.0)) fail("max_plan_cycle must be > 0");
}

IntersectionConfig IntersectionConfig::calibrated_for_crs() const {
    IntersectionConfig c = *this;
    c.shared_lane_factor = sim_shared_lane_through_share;
    return c;
}

FlowRatios compute_flow_ratios(const DemandMatrix& demand, const IntersectionConfig& config) {
    demand.validate();
    const bool rti = config.flags.has(Modification::RTI);
    const double factor = config.effective_shared_lane_factor();
    const double sat = config.saturation_flow_per_lane;
    const double sat_through =
        (static_cast<double>(config.lanes_through_exclusive) +
         factor * static_cast<double>(config.lanes_shared_through_right)) *
        sat;
    const double sat_left = static_cast<double>(config.lanes_left) * sat;

    auto through = [&](Approach a) {
        const auto& d = demand[a];
        return rti ? d.through + d.right : d.through;
    };

    FlowRatios r;
    r.y[0] = ratio(max2(through(Approach::East), through(Approach::West)), sat_through, "EW-through");
    r.y[1] = ratio(max2(demand[Approach::East].left, demand[Approach::West].left), sat_left, "EW-left");
    r.y[2] = ratio(max2(through(Approach::North), through(Approach::South)), sat_through, "NS-through");
    r.y[3] = ratio(max2(demand[Approach::North].left, demand[Approach::South].left), sat_left, "NS-left");
    r.total = ((r.y[0] + r.y[1]) + r.y[2]) + r.y[3];
    return r;
}

double compute_crs(const DemandMatrix& demand, const IntersectionConfig& config) {
    IntersectionConfig baseline = config;
    baseline.flags = {};
    return compute_flow_ratios(demand, baseline).total;
}

double webster_cycle(double critical_ratio_sum, double lost_time, const IntersectionConfig& config) {
    if (!(lost_time > 0.0)) throw Error(ErrorKind::InvalidArgument, "lost time must be positive");
    const double cmax = config.effective_cycle_max();
    if (critical_ratio_sum >= 1.0) return cmax;
    const double c0 = (1.5 * lost_time + 5.0) / (1.0 - critical_ratio_sum);
    return clamp3(c0, config.cycle_min, cmax);
}

PhasePlan allocate_greens(double cycle, const FlowRatios& ratios, const IntersectionConfig& config) {
    const double lost = config.lost_time();
    const auto mins = config.min_greens();
    const double min_total = ((mins[0] + mins[1]) + mins[2]) + mins[3];

    double effective = cycle - lost;
    if (effective < min_total) {
        const CycleWindow window = config.effective_mgf_window();
        const double needed = min_total + lost;
        if (needed > window.high) {
            std::ostringstream msg;
            msg << "minimum greens need a cycle of " << needed << " s but the feasibility window ("
                << window.low << ", " << window.high << ") tops out at " << window.high << " s";
            throw Error(ErrorKind::InfeasiblePlan, msg.str());
        }
        cycle = max2(window.low, needed);
        effective = cycle - lost;
    }

    PhasePlan plan;
    plan.intergreen = config.intergreen();
    std::array<bool, kPhaseCount> clamped{};
    for (std::size_t i = 0; i < kPhaseCount; ++i) {
        plan.greens[i] = ratios.total > 0.0 ? ratios.y[i] / ratios.total * effective : mins[i];
        if (plan.greens[i] < mins[i]) {
            plan.greens[i] = mins[i];
            clamped[i] = true;
        }
    }

    const bool par = config.flags.has(Modification::PAR);
    if (par) {
        // Each pass either settles or clamps another phase, so five passes suffice.
        for (int pass = 0; pass < 5; ++pass) {
            double fixed = 0.0;
            double free = 0.0;
            for (std::size_t i = 0; i < kPhaseCount; ++i) {
                if (clamped[i])
                    fixed = fixed + plan.greens[i];
                else
                    free = free + plan.greens[i];
            }
            if (free <= 0.0) break;
            const double scale = (effective - fixed) / free;
            bool newly_clamped = false;
            for (std::size_t i = 0; i < kPhaseCount; ++i) {
                if (clamped[i]) continue;
                plan.greens[i] = plan.greens[i] * scale;
                if (plan.greens[i] < mins[i]) {
                    plan.greens[i] = mins[i];
                    clamped[i] = true;
                    newly_clamped = true;
                }
            }
            if (!newly_clamped) break;
        }
    }

    bool any_clamped = false;
    for (bool c : clamped) any_clamped = any_clamped || c;
    plan.cycle = (!par && any_clamped) ? plan.green_total() + lost : cycle;
    return plan;
}

PhasePlan compute_plan(const DemandMatrix& demand, const IntersectionConfig& config) {
    config.validate();
    const FlowRatios ratios = compute_flow_ratios(demand, config);
    const double cycle = webster_cycle(ratios.total, config.lost_time(), config);
    return allocate_greens(cycle, ratios, config);
}

std::vector<std::string> plan_shape_violations(const PhasePlan& plan, const IntersectionConfig& config) {
    std::vector<std::string> out;
    if (!std::isfinite(plan.cycle) || plan.cycle <= 0.0)
        out.push_back("cycle must be positive and finite");
    else if (plan.cycle > config.max_plan_cycle)
        out.push_back("cycle " + std::to_string(plan.cycle) + " exceeds limit " + std::to_string(config.max_plan_cycle));
    if (!std::isfinite(plan.intergreen) || plan.intergreen < 0.0) out.push_back("intergreen must be >= 0");
    for (std::size_t i = 0; i < kPhaseCount; ++i)
        if (!std::isfinite(plan.greens[i]) || plan.greens[i] < 0.0)
            out.push_back(std::string(to_string(static_cast<Phase>(i))) + " green is negative or non-finite");
    return out;
}

std::vector<std::string> plan_violations(const PhasePlan& plan, const IntersectionConfig& config) {
    auto out = plan_shape_violations(plan, config);
    if (!out.empty()) return out;
    const auto mins = config.min_greens();
    for (std::size_t i = 0; i < kPhaseCount; ++i)
        if (plan.greens[i] < mins[i] - 1e-9)
            out.push_back(std::string(to_string(static_cast<Phase>(i))) + " green " + std::to_string(plan.greens[i]) +
                          " below minimum " + std::to_string(mins[i]));
    if (plan.green_total() + 4.0 * plan.intergreen > plan.cycle + 1e-6)
        out.push_back("greens plus intergreens exceed the cycle");
    return out;
}

std::string format_plan(const PhasePlan& plan) {
    std::ostringstream os;
    os << "cycle=" << std::lround(plan.cycle) << "; greens=";
    for (std::size_t i = 0; i < kPhaseCount; ++i) os << (i ? "," : "") << std::lround(plan.greens[i]);
    os << "; intergreen=" << std::lround(plan.intergreen);
    return os.str();
}

} // namespace evosig
