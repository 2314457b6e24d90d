#include "evosig/siglang.hpp"

#include <charconv>

namespace evosig::sig {

namespace {

// Binding strength; higher binds tighter.
int precedence(const Expr& e) {
    switch (e.kind) {
    case ExprKind::Binary:
        switch (e.op) {
        case Op::Or: return 1;
        case Op::And: return 2;
        case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge: case Op::Eq: case Op::Ne: return 4;
        case Op::Add: case Op::Sub: return 5;
        case Op::Mul: case Op::Div: return 6;
        default: return 0;
        }
    case ExprKind::Unary: return e.op == Op::Not ? 3 : 7;
    default: return 9;
    }
}

std::string_view op_text(Op op) {
    switch (op) {
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::Eq: return "==";
    case Op::Ne: return "!=";
    case Op::And: return "and";
    case Op::Or: return "or";
    case Op::Neg: return "-";
    case Op::Not: return "not";
    }
    return "?";
}

std::string number_text(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

class Printer {
public:
    std::string out;

    void program(const Ast& ast) {
        out += "fn " + ast.name + "(" + ast.demand_param + ", " + ast.config_param + ") {\n";
        block(ast.body, 1);
        out += "}\n";
    }

private:
    void indent(int depth) { out.append(static_cast<std::size_t>(depth) * 4, ' '); }

    void block(const std::vector<Stmt>& body, int depth) {
        for (const auto& s : body) statement(s, depth);
    }

    void statement(const Stmt& s, int depth) {
        indent(depth);
        switch (s.kind) {
        case StmtKind::Assign:
            out += s.target;
            if (!s.index.empty()) out += "[" + expr(s.index.front()) + "]";
            out += " = " + expr(s.value) + ";\n";
            return;
        case StmtKind::If: if_chain(s, depth); return;
        case StmtKind::For:
            out += "for " + s.loop_var + " in ";
            if (s.loop_is_range)
                out += "range(" + number_text(s.range_count) + ")";
            else
                out += "[" + list(s.items) + "]";
            out += " {\n";
            block(s.body, depth + 1);
            indent(depth);
            out += "}\n";
            return;
        case StmtKind::Return: out += "return (" + expr(s.value) + ", " + expr(s.greens) + ");\n"; return;
        }
    }

    void if_chain(const Stmt& s, int depth) {
        out += "if " + expr(s.value) + " {\n";
        block(s.body, depth + 1);
        indent(depth);
        out += "}";
        if (s.orelse.size() == 1 && s.orelse.front().kind == StmtKind::If) {
            out += " else ";
            if_chain(s.orelse.front(), depth);
            return;
        }
        if (!s.orelse.empty()) {
            out += " else {\n";
            block(s.orelse, depth + 1);
            indent(depth);
            out += "}";
        }
        out += "\n";
    }

    std::string list(const std::vector<Expr>& items) {
        std::string s;
        for (std::size_t i = 0; i < items.size(); ++i) s += (i ? ", " : "") + expr(items[i]);
        return s;
    }

    std::string wrapped(const Expr& e, int min_prec) {
        std::string s = expr(e);
        return precedence(e) < min_prec ? "(" + s + ")" : s;
    }

    std::string expr(const Expr& e) {
        switch (e.kind) {
        case ExprKind::Number: return number_text(e.number);
        case ExprKind::Bool: return e.boolean ? "true" : "false";
        case ExprKind::Name: return e.name;
        case ExprKind::List: return "[" + list(e.args) + "]";
        case ExprKind::Index: return wrapped(e.args[0], 9) + "[" + expr(e.args[1]) + "]";
        case ExprKind::Call: return e.name + "(" + list(e.args) + ")";
        case ExprKind::Unary:
            if (e.op == Op::Not) return "not " + wrapped(e.args[0], 3);
            return "-" + wrapped(e.args[0], 7);
        case ExprKind::Binary: {
            const int p = precedence(e);
            // Left-associative operators; comparisons do not chain.
            const int lhs_min = p == 4 ? 5 : p;
            return wrapped(e.args[0], lhs_min) + " " + std::string(op_text(e.op)) + " " + wrapped(e.args[1], p + 1);
        }
        }
        return "?";
    }
};

} // namespace

SourceText pretty_print(const Ast& ast) {
    Printer p;
    p.program(ast);
    return SourceText(std::move(p.out));
}

} // namespace evosig::sig
