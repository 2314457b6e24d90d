#include "evosig/io.hpp"

#include "evosig/error.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace evosig {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::Config, what); }

const Json& field(const Json& j, const char* key) {
    if (!j.is_object()) bad("expected an object");
    auto it = j.find(key);
    if (it == j.end()) bad(std::string("missing field '") + key + "'");
    return *it;
}

double number(const Json& j, const std::string& what) {
    if (!j.is_number()) bad(what + " must be a number");
    return j.get<double>();
}

void reject_unknown(const Json& j, std::initializer_list<std::string_view> known, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (auto k : known) ok = ok || it.key() == k;
        if (!ok) bad("unknown field '" + it.key() + "' in " + where);
    }
}

std::string_view long_name(Approach a) {
    switch (a) {
    case Approach::North: return "north";
    case Approach::South: return "south";
    case Approach::East: return "east";
    case Approach::West: return "west";
    }
    return "?";
}

Json window_json(const CycleWindow& w) { return Json::array({w.low, w.high}); }

CycleWindow window_from(const Json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2) bad(what + " must be [low, high]");
    return {number(j[0], what), number(j[1], what)};
}

} // namespace

Json to_json(const DemandMatrix& d) {
    Json j = Json::object();
    for (auto a : kApproaches) {
        const auto& r = d[a];
        j[std::string(to_string(a))] = {{"through", r.through}, {"left", r.left}, {"right", r.right}};
    }
    return j;
}

DemandMatrix demand_from_json(const Json& j) {
    if (!j.is_object()) bad("demand must be an object");
    DemandMatrix d;
    std::set<std::string> seen;
    for (auto a : kApproaches) {
        const std::string shortk(to_string(a)), longk(long_name(a));
        const Json* row = nullptr;
        if (j.contains(shortk)) row = &j.at(shortk);
        if (j.contains(longk)) {
            if (row) bad("approach " + shortk + " given twice");
            row = &j.at(longk);
        }
        if (!row) bad("demand is missing approach " + shortk);
        reject_unknown(*row, {"through", "left", "right"}, "demand." + shortk);
        auto& out = d[a];
        out.through = number(field(*row, "through"), shortk + ".through");
        out.left = number(field(*row, "left"), shortk + ".left");
        out.right = number(field(*row, "right"), shortk + ".right");
    }
    reject_unknown(j, {"N", "S", "E", "W", "north", "south", "east", "west"}, "demand");
    try {
        d.validate();
    } catch (const Error& e) {
        bad(e.what());
    }
    return d;
}

Json to_json(const Scenario& s) {
    return {{"id", s.id}, {"duration", s.duration}, {"seeds", s.seeds}, {"demand", to_json(s.demand)}};
}

Scenario scenario_from_json(const Json& j) {
    reject_unknown(j, {"id", "duration", "seeds", "demand"}, "scenario");
    Scenario s;
    const auto& id = field(j, "id");
    if (!id.is_string()) bad("scenario id must be a string");
    s.id = id.get<std::string>();
    if (j.contains("duration")) {
        const auto& d = j.at("duration");
        if (!d.is_number_integer()) bad("scenario duration must be an integer");
        s.duration = d.get<int>();
    }
    const auto& seeds = field(j, "seeds");
    if (!seeds.is_array()) bad("scenario seeds must be a list");
    for (const auto& v : seeds) {
        if (!v.is_number_unsigned()) bad("seeds must be non-negative integers");
        s.seeds.push_back(v.get<std::uint64_t>());
    }
    s.demand = demand_from_json(field(j, "demand"));
    try {
        s.validate();
    } catch (const Error& e) {
        bad(e.what());
    }
    return s;
}

Json to_json(const IntersectionConfig& c) {
    return {
        {"lanes_through_exclusive", c.lanes_through_exclusive},
        {"lanes_left", c.lanes_left},
        {"lanes_shared_through_right", c.lanes_shared_through_right},
        {"saturation_flow_per_lane", c.saturation_flow_per_lane},
        {"shared_lane_factor", c.shared_lane_factor},
        {"reduced_shared_lane_factor", c.reduced_shared_lane_factor},
        {"yellow", c.yellow},
        {"all_red", c.all_red},
        {"min_green_through", c.min_green_through},
        {"min_green_left", c.min_green_left},
        {"cycle_min", c.cycle_min},
        {"cycle_max", c.cycle_max},
        {"extended_cycle_max", c.extended_cycle_max},
        {"mgf_window", window_json(c.mgf_window)},
        {"revised_mgf_window", window_json(c.revised_mgf_window)},
        {"flags", c.flags.to_string()},
        {"sim_shared_lane_through_share", c.sim_shared_lane_through_share},
        {"max_plan_cycle", c.max_plan_cycle},
    };
}

IntersectionConfig config_from_json(const Json& j, IntersectionConfig c) {
    if (!j.is_object()) bad("intersection config must be an object");
    auto integer = [&](const char* key, int& out) {
        if (!j.contains(key)) return;
        if (!j.at(key).is_number_integer()) bad(std::string(key) + " must be an integer");
        out = j.at(key).get<int>();
    };
    auto real = [&](const char* key, double& out) {
        if (j.contains(key)) out = number(j.at(key), key);
    };
    integer("lanes_through_exclusive", c.lanes_through_exclusive);
    integer("lanes_left", c.lanes_left);
    integer("lanes_shared_through_right", c.lanes_shared_through_right);
    real("saturation_flow_per_lane", c.saturation_flow_per_lane);
    real("shared_lane_factor", c.shared_lane_factor);
    real("reduced_shared_lane_factor", c.reduced_shared_lane_factor);
    real("yellow", c.yellow);
    real("all_red", c.all_red);
    real("min_green_through", c.min_green_through);
    real("min_green_left", c.min_green_left);
    real("cycle_min", c.cycle_min);
    real("cycle_max", c.cycle_max);
    real("extended_cycle_max", c.extended_cycle_max);
    if (j.contains("mgf_window")) c.mgf_window = window_from(j.at("mgf_window"), "mgf_window");
    if (j.contains("revised_mgf_window"))
        c.revised_mgf_window = window_from(j.at("revised_mgf_window"), "revised_mgf_window");
    if (j.contains("flags")) {
        const auto& f = j.at("flags");
        try {
            if (f.is_string())
                c.flags = FlagSet::parse(f.get<std::string>());
            else if (f.is_array()) {
                c.flags = {};
                for (const auto& item : f) {
                    if (!item.is_string()) bad("flags must be strings");
                    c.flags = FlagSet::from_bits(c.flags.bits() | FlagSet::parse(item.get<std::string>()).bits());
                }
            } else
                bad("flags must be a string or a list");
        } catch (const Error& e) {
            bad(e.what());
        }
    }
    real("sim_shared_lane_through_share", c.sim_shared_lane_through_share);
    real("max_plan_cycle", c.max_plan_cycle);
    reject_unknown(j,
                   {"lanes_through_exclusive", "lanes_left", "lanes_shared_through_right", "saturation_flow_per_lane",
                    "shared_lane_factor", "reduced_shared_lane_factor", "yellow", "all_red", "min_green_through",
                    "min_green_left", "cycle_min", "cycle_max", "extended_cycle_max", "mgf_window",
                    "revised_mgf_window", "flags", "sim_shared_lane_through_share", "max_plan_cycle"},
                   "intersection config");
    try {
        c.validate();
    } catch (const Error& e) {
        bad(e.what());
    }
    return c;
}

Json to_json(const PhasePlan& p) {
    return {{"cycle", p.cycle}, {"greens", p.greens}, {"intergreen", p.intergreen}};
}

PhasePlan plan_from_json(const Json& j) {
    PhasePlan p;
    p.cycle = number(field(j, "cycle"), "cycle");
    const auto& g = field(j, "greens");
    if (!g.is_array() || g.size() != kPhaseCount) bad("greens must be a list of 4 numbers");
    for (std::size_t i = 0; i < kPhaseCount; ++i) p.greens[i] = number(g[i], "green");
    p.intergreen = number(field(j, "intergreen"), "intergreen");
    return p;
}

Json to_json(const EvalResult& r) {
    Json j = {
        {"avg_delay", r.avg_delay},
        {"avg_stops", r.avg_stops},
        {"S_d", r.scores.delay},
        {"S_s", r.scores.stops},
        {"S_c", r.scores.combined},
        {"mean_cycle", r.mean_cycle},
    };
    Json per = Json::array();
    for (const auto& s : r.scenarios)
        per.push_back({{"id", s.id}, {"plan", to_json(s.plan)}, {"avg_delay", s.avg_delay}, {"avg_stops", s.avg_stops}});
    j["scenarios"] = per;
    if (r.error)
        j["error"] = {{"kind", std::string(to_string(r.error->kind))}, {"message", r.error->message}};
    else
        j["error"] = nullptr;
    return j;
}

EvalResult eval_result_from_json(const Json& j) {
    EvalResult r;
    r.avg_delay = number(field(j, "avg_delay"), "avg_delay");
    r.avg_stops = number(field(j, "avg_stops"), "avg_stops");
    r.scores.delay = number(field(j, "S_d"), "S_d");
    r.scores.stops = number(field(j, "S_s"), "S_s");
    r.scores.combined = number(field(j, "S_c"), "S_c");
    r.mean_cycle = number(field(j, "mean_cycle"), "mean_cycle");
    const auto& per = field(j, "scenarios");
    if (!per.is_array()) bad("scenarios must be a list");
    for (const auto& s : per) {
        ScenarioOutcome o;
        const auto& id = field(s, "id");
        if (!id.is_string()) bad("scenario id must be a string");
        o.id = id.get<std::string>();
        o.plan = plan_from_json(field(s, "plan"));
        o.avg_delay = number(field(s, "avg_delay"), "avg_delay");
        o.avg_stops = number(field(s, "avg_stops"), "avg_stops");
        r.scenarios.push_back(std::move(o));
    }
    const auto& err = field(j, "error");
    if (!err.is_null()) {
        const auto& kind = field(err, "kind");
        const auto& msg = field(err, "message");
        if (!kind.is_string() || !msg.is_string()) bad("malformed error record");
        EvalError e;
        bool found = false;
        for (int k = 0; k <= static_cast<int>(ErrorKind::Config); ++k) {
            if (to_string(static_cast<ErrorKind>(k)) == kind.get<std::string>()) {
                e.kind = static_cast<ErrorKind>(k);
                found = true;
            }
        }
        if (!found) bad("unknown error kind '" + kind.get<std::string>() + "'");
        e.message = msg.get<std::string>();
        r.error = e;
    }
    return r;
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    if (in.bad()) throw Error(ErrorKind::Io, "cannot read " + path.string());
    return os.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot move " + tmp.string() + " into place: " + ec.message());
}

Json read_json_file(const fs::path& path) {
    const auto text = read_text_file(path);
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        bad(path.string() + ": " + e.what());
    }
}

Scenario load_scenario(const fs::path& path) {
    const auto j = read_json_file(path);
    try {
        return scenario_from_json(j);
    } catch (const Error& e) {
        bad(path.string() + ": " + e.what());
    }
}

Scenario resolve_scenario(const std::string& id_or_path) {
    if (auto s = builtin_scenario(id_or_path)) return *s;
    return load_scenario(id_or_path);
}

} // namespace evosig
