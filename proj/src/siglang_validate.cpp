#include "evosig/siglang.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace evosig::sig {

std::string_view to_string(ViolationKind kind) {
    switch (kind) {
    case ViolationKind::Signature: return "signature";
    case ViolationKind::Return: return "return";
    case ViolationKind::Arity: return "arity";
    case ViolationKind::Definition: return "definition";
    case ViolationKind::Loop: return "loop";
    case ViolationKind::Call: return "call";
    case ViolationKind::Assignment: return "assignment";
    }
    return "?";
}

const std::vector<std::string>& input_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const char* a : {"north", "south", "east", "west"})
            for (const char* m : {"through", "left", "right"}) n.push_back(std::string("demand.") + a + "." + m);
        for (const char* c : {"saturation_flow", "lanes_through", "lanes_left", "lanes_shared", "yellow", "all_red",
                              "min_green_through", "min_green_left"})
            n.push_back(std::string("config.") + c);
        return n;
    }();
    return names;
}

std::string describe(const std::vector<Violation>& violations) {
    std::ostringstream os;
    for (const auto& v : violations) os << "line " << v.line << ": " << to_string(v.kind) << ": " << v.message << '\n';
    return os.str();
}

namespace {

constexpr double kMaxLoopCount = 10000.0;

bool is_builtin(std::string_view name) {
    return name == "min" || name == "max" || name == "clamp" || name == "abs" || name == "round" || name == "sum";
}

// Shape tracking is deliberately shallow: scalars (numbers and booleans)
// versus lists of a known length.
struct Shape {
    bool is_list = false;
    std::size_t length = 0;
};

class Validator {
public:
    std::vector<Violation> run(const Ast& ast) {
        if (ast.name != "signal_plan" || ast.demand_param != "demand" || ast.config_param != "config")
            add(ViolationKind::Signature, 1,
                "signature must be 'fn signal_plan(demand, config)', found 'fn " + ast.name + "(" + ast.demand_param +
                    ", " + ast.config_param + ")'");

        std::size_t returns = 0;
        count_returns(ast.body, returns);
        if (returns != 1)
            add(ViolationKind::Return, 1, "program must contain exactly one return, found " + std::to_string(returns));
        if (ast.body.empty() || ast.body.back().kind != StmtKind::Return)
            add(ViolationKind::Return, ast.body.empty() ? 1 : ast.body.back().span.line,
                "the return statement must be the last top-level statement");

        Scope scope;
        block(ast.body, scope);
        return std::move(out_);
    }

private:
    using Scope = std::map<std::string, Shape>;
    std::vector<Violation> out_;

    void add(ViolationKind k, std::size_t line, std::string msg) { out_.push_back({k, std::move(msg), line}); }

    static void count_returns(const std::vector<Stmt>& body, std::size_t& n) {
        for (const auto& s : body) {
            if (s.kind == StmtKind::Return) ++n;
            count_returns(s.body, n);
            count_returns(s.orelse, n);
        }
    }

    void check_target(const Stmt& s) {
        if (s.target == "demand" || s.target == "config" || is_builtin(s.target) || s.target == "range")
            add(ViolationKind::Assignment, s.span.line, "cannot assign to reserved name '" + s.target + "'");
    }

    void block(const std::vector<Stmt>& body, Scope& scope) {
        for (const auto& s : body) statement(s, scope);
    }

    void statement(const Stmt& s, Scope& scope) {
        switch (s.kind) {
        case StmtKind::Assign: {
            check_target(s);
            const Shape shape = expr(s.value, scope);
            if (s.index.empty()) {
                scope[s.target] = shape;
                return;
            }
            if (expr(s.index.front(), scope).is_list)
                add(ViolationKind::Assignment, s.span.line, "list index must be a number");
            auto it = scope.find(s.target);
            if (it == scope.end())
                add(ViolationKind::Definition, s.span.line, "'" + s.target + "' is indexed before it is assigned");
            else if (!it->second.is_list)
                add(ViolationKind::Assignment, s.span.line, "'" + s.target + "' is not a list");
            if (shape.is_list) add(ViolationKind::Assignment, s.span.line, "list elements must be numbers");
            return;
        }
        case StmtKind::If: {
            expect_scalar(s.value, scope, "condition");
            Scope then_scope = scope;
            Scope else_scope = scope;
            block(s.body, then_scope);
            block(s.orelse, else_scope);
            // Only names assigned on both branches are defined afterwards.
            Scope merged;
            for (const auto& [name, shape] : then_scope) {
                auto it = else_scope.find(name);
                if (it == else_scope.end()) continue;
                merged[name] = (it->second.is_list == shape.is_list && it->second.length == shape.length) ? shape
                                                                                                            : Shape{};
            }
            scope = std::move(merged);
            return;
        }
        case StmtKind::For: {
            if (s.loop_var == "demand" || s.loop_var == "config" || is_builtin(s.loop_var))
                add(ViolationKind::Assignment, s.span.line, "cannot use reserved name '" + s.loop_var + "' as loop variable");
            std::size_t count = s.items.size();
            if (s.loop_is_range) {
                const double n = s.range_count;
                if (!(n >= 0.0 && n <= kMaxLoopCount && n == static_cast<double>(static_cast<long long>(n)))) {
                    add(ViolationKind::Loop, s.span.line, "range bound must be an integer literal in [0, 10000]");
                    count = 0;
                } else {
                    count = static_cast<std::size_t>(n);
                }
            } else {
                for (const auto& item : s.items)
                    if (expr(item, scope).is_list) add(ViolationKind::Loop, s.span.line, "loop items must be numbers");
            }
            Scope body_scope = scope;
            body_scope[s.loop_var] = Shape{};
            block(s.body, body_scope);
            if (count > 0) scope = std::move(body_scope);
            return;
        }
        case StmtKind::Return: {
            const Shape cycle = expr(s.value, scope);
            if (cycle.is_list) add(ViolationKind::Arity, s.span.line, "cycle must be a single number");
            const Shape greens = expr(s.greens, scope);
            if (!greens.is_list)
                add(ViolationKind::Arity, s.span.line, "greens must be a list of 4 phase durations");
            else if (greens.length != kPhaseCount)
                add(ViolationKind::Arity, s.span.line,
                    "greens must have 4 entries, found " + std::to_string(greens.length));
            return;
        }
        }
    }

    void expect_scalar(const Expr& e, const Scope& scope, const char* what) {
        if (expr(e, scope).is_list) add(ViolationKind::Assignment, e.span.line, std::string(what) + " must not be a list");
    }

    Shape expr(const Expr& e, const Scope& scope) {
        switch (e.kind) {
        case ExprKind::Number:
        case ExprKind::Bool: return {};
        case ExprKind::Name: {
            if (e.name.find('.') != std::string::npos) {
                const auto& inputs = input_names();
                if (std::find(inputs.begin(), inputs.end(), e.name) == inputs.end())
                    add(ViolationKind::Definition, e.span.line, "unknown input '" + e.name + "'");
                return {};
            }
            if (e.name == "demand" || e.name == "config") {
                add(ViolationKind::Definition, e.span.line, "'" + e.name + "' must be accessed through a field");
                return {};
            }
            auto it = scope.find(e.name);
            if (it == scope.end()) {
                add(ViolationKind::Definition, e.span.line, "'" + e.name + "' is used before it is assigned");
                return {};
            }
            return it->second;
        }
        case ExprKind::List:
            for (const auto& item : e.args)
                if (expr(item, scope).is_list) add(ViolationKind::Assignment, e.span.line, "lists cannot be nested");
            return Shape{true, e.args.size()};
        case ExprKind::Index: {
            const Shape base = expr(e.args[0], scope);
            if (!base.is_list) add(ViolationKind::Assignment, e.span.line, "only lists can be indexed");
            if (expr(e.args[1], scope).is_list) add(ViolationKind::Assignment, e.span.line, "list index must be a number");
            return {};
        }
        case ExprKind::Unary: expect_scalar(e.args[0], scope, "operand"); return {};
        case ExprKind::Binary:
            expect_scalar(e.args[0], scope, "operand");
            expect_scalar(e.args[1], scope, "operand");
            return {};
        case ExprKind::Call: return call(e, scope);
        }
        return {};
    }

    Shape call(const Expr& e, const Scope& scope) {
        std::vector<Shape> args;
        for (const auto& a : e.args) args.push_back(expr(a, scope));
        auto arity = [&](std::size_t n) {
            if (args.size() != n)
                add(ViolationKind::Call, e.span.line,
                    e.name + "() takes " + std::to_string(n) + " argument(s), got " + std::to_string(args.size()));
        };
        auto scalars = [&] {
            for (const auto& a : args)
                if (a.is_list) add(ViolationKind::Call, e.span.line, e.name + "() arguments must be numbers");
        };
        if (e.name == "min" || e.name == "max") {
            if (args.size() == 1) {
                if (!args[0].is_list) add(ViolationKind::Call, e.span.line, e.name + "() of one argument needs a list");
            } else if (args.size() >= 2) {
                scalars();
            } else {
                add(ViolationKind::Call, e.span.line, e.name + "() needs arguments");
            }
        } else if (e.name == "clamp") {
            arity(3);
            scalars();
        } else if (e.name == "abs" || e.name == "round") {
            arity(1);
            scalars();
        } else if (e.name == "sum") {
            arity(1);
            if (args.size() == 1 && !args[0].is_list) add(ViolationKind::Call, e.span.line, "sum() needs a list");
        } else {
            add(ViolationKind::Call, e.span.line, "unknown function '" + e.name + "'");
        }
        return {};
    }
};

} // namespace

std::vector<Violation> validate(const Ast& ast) { return Validator().run(ast); }

} // namespace evosig::sig
