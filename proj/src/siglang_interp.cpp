#include "evosig/error.hpp"
#include "evosig/siglang.hpp"

#include <cmath>
#include <unordered_map>
#include <variant>

namespace evosig::sig {

namespace {

using List = std::vector<double>;
using Value = std::variant<double, bool, List>;

[[noreturn]] void runtime_error(const Span& at, const std::string& msg) {
    throw Error(ErrorKind::Runtime, "line " + std::to_string(at.line) + ": " + msg);
}

double checked(double v, const Span& at) {
    if (std::isnan(v)) runtime_error(at, "result is NaN");
    if (!std::isfinite(v)) runtime_error(at, "result is not finite");
    return v;
}

double max2(double a, double b) { return a < b ? b : a; }
double min2(double a, double b) { return b < a ? b : a; }

class Interpreter {
public:
    Interpreter(const DemandMatrix& demand, const IntersectionConfig& config, std::uint64_t fuel)
        : config_(config), fuel_(fuel) {
        static constexpr const char* approach_names[] = {"north", "south", "east", "west"};
        for (auto a : kApproaches) {
            const auto& d = demand[a];
            const std::string prefix = std::string("demand.") + approach_names[static_cast<std::size_t>(a)] + ".";
            inputs_[prefix + "through"] = d.through;
            inputs_[prefix + "left"] = d.left;
            inputs_[prefix + "right"] = d.right;
        }
        inputs_["config.saturation_flow"] = config.saturation_flow_per_lane;
        inputs_["config.lanes_through"] = config.lanes_through_exclusive;
        inputs_["config.lanes_left"] = config.lanes_left;
        inputs_["config.lanes_shared"] = config.lanes_shared_through_right;
        inputs_["config.yellow"] = config.yellow;
        inputs_["config.all_red"] = config.all_red;
        inputs_["config.min_green_through"] = config.min_green_through;
        inputs_["config.min_green_left"] = config.min_green_left;
    }

    PhasePlan run(const Ast& ast) {
        exec_block(ast.body);
        if (!result_) throw Error(ErrorKind::Runtime, "program finished without returning a plan");
        return *result_;
    }

private:
    const IntersectionConfig& config_;
    std::uint64_t fuel_;
    std::unordered_map<std::string, double> inputs_;
    std::unordered_map<std::string, Value> vars_;
    std::optional<PhasePlan> result_;

    void step() {
        if (fuel_ == 0) throw Error(ErrorKind::FuelExhausted, "evaluation step budget exhausted");
        --fuel_;
    }

    void exec_block(const std::vector<Stmt>& body) {
        for (const auto& s : body) {
            if (result_) return;
            exec(s);
        }
    }

    void exec(const Stmt& s) {
        step();
        switch (s.kind) {
        case StmtKind::Assign: {
            Value v = eval(s.value);
            if (s.index.empty()) {
                vars_[s.target] = std::move(v);
                return;
            }
            const std::size_t i = index_of(s.index.front(), s.span);
            auto it = vars_.find(s.target);
            if (it == vars_.end()) runtime_error(s.span, "'" + s.target + "' is not defined");
            auto* list = std::get_if<List>(&it->second);
            if (!list) runtime_error(s.span, "'" + s.target + "' is not a list");
            if (i >= list->size()) runtime_error(s.span, "index " + std::to_string(i) + " out of range");
            (*list)[i] = number(v, s.span);
            return;
        }
        case StmtKind::If:
            if (boolean(eval(s.value), s.value.span))
                exec_block(s.body);
            else
                exec_block(s.orelse);
            return;
        case StmtKind::For: {
            List items;
            if (s.loop_is_range) {
                const double n = s.range_count;
                if (!(n >= 0.0 && n <= 10000.0 && n == std::floor(n))) runtime_error(s.span, "invalid range bound");
                for (double k = 0; k < n; k += 1.0) items.push_back(k);
            } else {
                for (const auto& item : s.items) items.push_back(number(eval(item), item.span));
            }
            for (double v : items) {
                if (result_) return;
                step();
                vars_[s.loop_var] = v;
                exec_block(s.body);
            }
            return;
        }
        case StmtKind::Return: {
            const double cycle = number(eval(s.value), s.value.span);
            Value g = eval(s.greens);
            auto* list = std::get_if<List>(&g);
            if (!list || list->size() != kPhaseCount)
                throw Error(ErrorKind::PlanInvalid, "greens must be a list of 4 numbers");
            PhasePlan plan;
            plan.cycle = cycle;
            for (std::size_t i = 0; i < kPhaseCount; ++i) plan.greens[i] = (*list)[i];
            plan.intergreen = config_.intergreen();
            auto violations = plan_shape_violations(plan, config_);
            if (!violations.empty()) {
                std::string msg = "returned plan is invalid:";
                for (const auto& v : violations) msg += " " + v + ";";
                throw Error(ErrorKind::PlanInvalid, msg);
            }
            result_ = plan;
            return;
        }
        }
    }

    static double number(const Value& v, const Span& at) {
        if (auto* d = std::get_if<double>(&v)) return *d;
        runtime_error(at, "expected a number");
    }
    static bool boolean(const Value& v, const Span& at) {
        if (auto* b = std::get_if<bool>(&v)) return *b;
        runtime_error(at, "expected a boolean");
    }
    std::size_t index_of(const Expr& e, const Span& at) {
        const double i = number(eval(e), e.span);
        if (i < 0.0 || i != std::floor(i)) runtime_error(at, "list index must be a non-negative integer");
        return static_cast<std::size_t>(i);
    }

    Value eval(const Expr& e) {
        step();
        switch (e.kind) {
        case ExprKind::Number: return e.number;
        case ExprKind::Bool: return e.boolean;
        case ExprKind::Name: {
            if (auto it = vars_.find(e.name); it != vars_.end()) return it->second;
            if (auto it = inputs_.find(e.name); it != inputs_.end()) return it->second;
            runtime_error(e.span, "'" + e.name + "' is not defined");
        }
        case ExprKind::List: {
            List out;
            out.reserve(e.args.size());
            for (const auto& item : e.args) out.push_back(number(eval(item), item.span));
            return out;
        }
        case ExprKind::Index: {
            Value base = eval(e.args[0]);
            auto* list = std::get_if<List>(&base);
            if (!list) runtime_error(e.span, "only lists can be indexed");
            const std::size_t i = index_of(e.args[1], e.span);
            if (i >= list->size()) runtime_error(e.span, "index " + std::to_string(i) + " out of range");
            return (*list)[i];
        }
        case ExprKind::Unary: {
            if (e.op == Op::Not) return !boolean(eval(e.args[0]), e.args[0].span);
            return checked(-number(eval(e.args[0]), e.args[0].span), e.span);
        }
        case ExprKind::Binary: return binary(e);
        case ExprKind::Call: return call(e);
        }
        runtime_error(e.span, "unknown expression");
    }

    Value binary(const Expr& e) {
        if (e.op == Op::And) {
            if (!boolean(eval(e.args[0]), e.args[0].span)) return false;
            return boolean(eval(e.args[1]), e.args[1].span);
        }
        if (e.op == Op::Or) {
            if (boolean(eval(e.args[0]), e.args[0].span)) return true;
            return boolean(eval(e.args[1]), e.args[1].span);
        }
        const Value lv = eval(e.args[0]);
        const Value rv = eval(e.args[1]);
        if (e.op == Op::Eq || e.op == Op::Ne) {
            if (lv.index() != rv.index() || std::holds_alternative<List>(lv))
                runtime_error(e.span, "== and != compare two numbers or two booleans");
            const bool eq = lv == rv;
            return e.op == Op::Eq ? eq : !eq;
        }
        const double a = number(lv, e.args[0].span);
        const double b = number(rv, e.args[1].span);
        switch (e.op) {
        case Op::Add: return checked(a + b, e.span);
        case Op::Sub: return checked(a - b, e.span);
        case Op::Mul: return checked(a * b, e.span);
        case Op::Div:
            if (b == 0.0) runtime_error(e.span, "division by zero");
            return checked(a / b, e.span);
        case Op::Lt: return a < b;
        case Op::Le: return a <= b;
        case Op::Gt: return a > b;
        case Op::Ge: return a >= b;
        default: runtime_error(e.span, "bad operator");
        }
    }

    Value call(const Expr& e) {
        std::vector<Value> args;
        args.reserve(e.args.size());
        for (const auto& a : e.args) args.push_back(eval(a));
        auto num = [&](std::size_t i) { return number(args.at(i), e.args[i].span); };
        auto need = [&](std::size_t n) {
            if (args.size() != n) runtime_error(e.span, e.name + "() takes " + std::to_string(n) + " argument(s)");
        };

        if (e.name == "min" || e.name == "max") {
            const bool is_max = e.name == "max";
            List values;
            if (args.size() == 1) {
                auto* list = std::get_if<List>(&args[0]);
                if (!list || list->empty()) runtime_error(e.span, e.name + "() of one argument needs a non-empty list");
                values = *list;
            } else {
                if (args.size() < 2) runtime_error(e.span, e.name + "() needs arguments");
                for (std::size_t i = 0; i < args.size(); ++i) values.push_back(num(i));
            }
            double acc = values[0];
            for (std::size_t i = 1; i < values.size(); ++i) acc = is_max ? max2(acc, values[i]) : min2(acc, values[i]);
            return acc;
        }
        if (e.name == "clamp") {
            need(3);
            const double lo = num(1), hi = num(2);
            if (lo > hi) runtime_error(e.span, "clamp() with low above high");
            return min2(max2(num(0), lo), hi);
        }
        if (e.name == "abs") {
            need(1);
            return std::fabs(num(0));
        }
        if (e.name == "round") {
            need(1);
            return std::round(num(0));
        }
        if (e.name == "sum") {
            need(1);
            auto* list = std::get_if<List>(&args[0]);
            if (!list) runtime_error(e.span, "sum() needs a list");
            double acc = 0.0;
            for (double v : *list) acc = acc + v;
            return checked(acc, e.span);
        }
        runtime_error(e.span, "unknown function '" + e.name + "'");
    }
};

} // namespace

PhasePlan interpret(const Ast& ast, const DemandMatrix& demand, const IntersectionConfig& config, std::uint64_t fuel) {
    if (fuel == 0) throw Error(ErrorKind::InvalidArgument, "fuel must be positive");
    return Interpreter(demand, config, fuel).run(ast);
}

} // namespace evosig::sig
