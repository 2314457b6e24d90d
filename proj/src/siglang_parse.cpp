#include "evosig/error.hpp"
#include "evosig/siglang.hpp"

#include <charconv>
#include <cstdio>
#include <unordered_map>

namespace evosig::sig {

std::uint64_t content_hash(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t hash) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

namespace {

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

const std::unordered_map<std::string_view, TokenKind>& keywords() {
    static const std::unordered_map<std::string_view, TokenKind> k{
        {"fn", TokenKind::KwFn},         {"if", TokenKind::KwIf},     {"else", TokenKind::KwElse},
        {"for", TokenKind::KwFor},       {"in", TokenKind::KwIn},     {"return", TokenKind::KwReturn},
        {"and", TokenKind::KwAnd},       {"or", TokenKind::KwOr},     {"not", TokenKind::KwNot},
        {"true", TokenKind::KwTrue},     {"false", TokenKind::KwFalse},
    };
    return k;
}

} // namespace

std::vector<Token> tokenize(std::string_view src, const Limits& limits) {
    if (src.size() > limits.max_bytes)
        throw Error(ErrorKind::Limit, "source is " + std::to_string(src.size()) + " bytes, limit " +
                                          std::to_string(limits.max_bytes));
    std::vector<Token> out;
    std::size_t i = 0, line = 1, col = 1;

    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    auto push = [&](TokenKind kind, std::size_t len) {
        if (out.size() >= limits.max_tokens)
            throw Error(ErrorKind::Limit, "program exceeds " + std::to_string(limits.max_tokens) + " tokens");
        out.push_back(Token{kind, src.substr(i, len), i, line, col, 0.0});
        advance(len);
    };

    while (i < src.size()) {
        const char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (is_digit(c)) {
            std::size_t j = i;
            while (j < src.size() && is_digit(src[j])) ++j;
            if (j < src.size() && src[j] == '.') {
                ++j;
                if (j >= src.size() || !is_digit(src[j])) throw SyntaxError(line, col + (j - i), "expected digit after '.'");
                while (j < src.size() && is_digit(src[j])) ++j;
            }
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k >= src.size() || !is_digit(src[k])) throw SyntaxError(line, col + (k - i), "malformed exponent");
                while (k < src.size() && is_digit(src[k])) ++k;
                j = k;
            }
            if (j < src.size() && is_ident_start(src[j])) throw SyntaxError(line, col + (j - i), "malformed number");
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(src.data() + i, src.data() + j, value);
            if (ec != std::errc() || ptr != src.data() + j) throw SyntaxError(line, col, "number out of range");
            const std::size_t len = j - i;
            push(TokenKind::Number, len);
            out.back().number = value;
            continue;
        }
        if (is_ident_start(c)) {
            std::size_t j = i;
            while (j < src.size() && is_ident_char(src[j])) ++j;
            const auto word = src.substr(i, j - i);
            auto it = keywords().find(word);
            push(it == keywords().end() ? TokenKind::Identifier : it->second, j - i);
            continue;
        }
        const char n = i + 1 < src.size() ? src[i + 1] : '\0';
        switch (c) {
        case '(': push(TokenKind::LParen, 1); break;
        case ')': push(TokenKind::RParen, 1); break;
        case '[': push(TokenKind::LBracket, 1); break;
        case ']': push(TokenKind::RBracket, 1); break;
        case '{': push(TokenKind::LBrace, 1); break;
        case '}': push(TokenKind::RBrace, 1); break;
        case ',': push(TokenKind::Comma, 1); break;
        case ';': push(TokenKind::Semicolon, 1); break;
        case '.': push(TokenKind::Dot, 1); break;
        case '+': push(TokenKind::Plus, 1); break;
        case '-': push(TokenKind::Minus, 1); break;
        case '*': push(TokenKind::Star, 1); break;
        case '/': push(TokenKind::Slash, 1); break;
        case '<': n == '=' ? push(TokenKind::Le, 2) : push(TokenKind::Lt, 1); break;
        case '>': n == '=' ? push(TokenKind::Ge, 2) : push(TokenKind::Gt, 1); break;
        case '=': n == '=' ? push(TokenKind::EqEq, 2) : push(TokenKind::Assign, 1); break;
        case '!':
            if (n != '=') throw SyntaxError(line, col, "unexpected '!'");
            push(TokenKind::NotEq, 2);
            break;
        default: {
            std::string shown = (static_cast<unsigned char>(c) < 0x20 || static_cast<unsigned char>(c) >= 0x7f)
                                    ? "byte " + std::to_string(static_cast<unsigned char>(c))
                                    : std::string("'") + c + "'";
            throw SyntaxError(line, col, "unexpected character " + shown);
        }
        }
    }
    out.push_back(Token{TokenKind::End, src.substr(src.size()), src.size(), line, col, 0.0});
    return out;
}

namespace {

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    Ast program() {
        Ast ast;
        expect(TokenKind::KwFn, "'fn'");
        ast.name = std::string(expect(TokenKind::Identifier, "function name").text);
        expect(TokenKind::LParen, "'('");
        ast.demand_param = std::string(expect(TokenKind::Identifier, "parameter name").text);
        expect(TokenKind::Comma, "','");
        ast.config_param = std::string(expect(TokenKind::Identifier, "parameter name").text);
        expect(TokenKind::RParen, "')'");
        ast.body = block();
        if (peek().kind != TokenKind::End) fail(peek(), "unexpected text after program end");
        ast.token_count = toks_.size() - 1;
        return ast;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;

    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    const Token& take() {
        const Token& t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }
    bool accept(TokenKind k) {
        if (peek().kind != k) return false;
        take();
        return true;
    }
    [[noreturn]] static void fail(const Token& t, const std::string& msg) {
        throw SyntaxError(t.line, t.column,
                          msg + (t.kind == TokenKind::End ? " at end of input" : " near '" + std::string(t.text) + "'"));
    }
    const Token& expect(TokenKind k, const char* what) {
        if (peek().kind != k) fail(peek(), std::string("expected ") + what);
        return take();
    }

    static Span span_of(const Token& t) { return Span{t.offset, t.text.size(), t.line, t.column}; }
    Span close_span(Span s) const {
        const Token& last = toks_[pos_ == 0 ? 0 : pos_ - 1];
        s.length = last.offset + last.text.size() - s.offset;
        return s;
    }

    std::vector<Stmt> block() {
        expect(TokenKind::LBrace, "'{'");
        std::vector<Stmt> out;
        while (peek().kind != TokenKind::RBrace) {
            if (peek().kind == TokenKind::End) fail(peek(), "expected '}'");
            out.push_back(statement());
        }
        take();
        return out;
    }

    Stmt statement() {
        const Token& start = peek();
        switch (start.kind) {
        case TokenKind::KwIf: return if_statement();
        case TokenKind::KwFor: return for_statement();
        case TokenKind::KwReturn: {
            take();
            Stmt s;
            s.kind = StmtKind::Return;
            s.span = span_of(start);
            expect(TokenKind::LParen, "'(' after return");
            s.value = expression();
            expect(TokenKind::Comma, "',' between cycle and greens");
            s.greens = expression();
            expect(TokenKind::RParen, "')'");
            expect(TokenKind::Semicolon, "';'");
            s.span = close_span(s.span);
            return s;
        }
        case TokenKind::Identifier: {
            Stmt s;
            s.kind = StmtKind::Assign;
            s.span = span_of(start);
            s.target = std::string(take().text);
            if (accept(TokenKind::LBracket)) {
                s.index.push_back(expression());
                expect(TokenKind::RBracket, "']'");
            }
            expect(TokenKind::Assign, "'='");
            s.value = expression();
            expect(TokenKind::Semicolon, "';'");
            s.span = close_span(s.span);
            return s;
        }
        default: fail(start, "expected a statement");
        }
    }

    Stmt if_statement() {
        Stmt s;
        s.kind = StmtKind::If;
        s.span = span_of(take());
        s.value = expression();
        s.body = block();
        if (accept(TokenKind::KwElse)) {
            if (peek().kind == TokenKind::KwIf)
                s.orelse.push_back(if_statement());
            else
                s.orelse = block();
        }
        s.span = close_span(s.span);
        return s;
    }

    Stmt for_statement() {
        Stmt s;
        s.kind = StmtKind::For;
        s.span = span_of(take());
        s.loop_var = std::string(expect(TokenKind::Identifier, "loop variable").text);
        expect(TokenKind::KwIn, "'in'");
        if (peek().kind == TokenKind::Identifier && peek().text == "range") {
            take();
            expect(TokenKind::LParen, "'('");
            s.loop_is_range = true;
            s.range_count = expect(TokenKind::Number, "literal loop bound").number;
            expect(TokenKind::RParen, "')'");
        } else if (peek().kind == TokenKind::LBracket) {
            take();
            s.items = expression_list(TokenKind::RBracket);
        } else {
            fail(peek(), "expected range(<literal>) or a list literal");
        }
        s.body = block();
        s.span = close_span(s.span);
        return s;
    }

    std::vector<Expr> expression_list(TokenKind close) {
        std::vector<Expr> out;
        if (accept(close)) return out;
        do {
            out.push_back(expression());
        } while (accept(TokenKind::Comma));
        expect(close, close == TokenKind::RParen ? "')'" : "']'");
        return out;
    }

    static Expr binary(Op op, Expr lhs, Expr rhs) {
        Expr e;
        e.kind = ExprKind::Binary;
        e.op = op;
        e.span = lhs.span;
        e.span.length = rhs.span.offset + rhs.span.length - lhs.span.offset;
        e.args.push_back(std::move(lhs));
        e.args.push_back(std::move(rhs));
        return e;
    }

    Expr expression() { return or_expr(); }

    Expr or_expr() {
        Expr lhs = and_expr();
        while (accept(TokenKind::KwOr)) lhs = binary(Op::Or, std::move(lhs), and_expr());
        return lhs;
    }

    Expr and_expr() {
        Expr lhs = not_expr();
        while (accept(TokenKind::KwAnd)) lhs = binary(Op::And, std::move(lhs), not_expr());
        return lhs;
    }

    Expr not_expr() {
        if (peek().kind == TokenKind::KwNot) {
            Span s = span_of(take());
            Expr e;
            e.kind = ExprKind::Unary;
            e.op = Op::Not;
            e.args.push_back(not_expr());
            e.span = close_span(s);
            return e;
        }
        return comparison();
    }

    Expr comparison() {
        Expr lhs = additive();
        auto cmp = [](TokenKind k) -> std::optional<Op> {
            switch (k) {
            case TokenKind::Lt: return Op::Lt;
            case TokenKind::Le: return Op::Le;
            case TokenKind::Gt: return Op::Gt;
            case TokenKind::Ge: return Op::Ge;
            case TokenKind::EqEq: return Op::Eq;
            case TokenKind::NotEq: return Op::Ne;
            default: return std::nullopt;
            }
        };
        if (auto op = cmp(peek().kind)) {
            take();
            lhs = binary(*op, std::move(lhs), additive());
            if (cmp(peek().kind)) fail(peek(), "comparisons do not chain; add parentheses");
        }
        return lhs;
    }

    Expr additive() {
        Expr lhs = term();
        for (;;) {
            if (accept(TokenKind::Plus))
                lhs = binary(Op::Add, std::move(lhs), term());
            else if (accept(TokenKind::Minus))
                lhs = binary(Op::Sub, std::move(lhs), term());
            else
                return lhs;
        }
    }

    Expr term() {
        Expr lhs = unary();
        for (;;) {
            if (accept(TokenKind::Star))
                lhs = binary(Op::Mul, std::move(lhs), unary());
            else if (accept(TokenKind::Slash))
                lhs = binary(Op::Div, std::move(lhs), unary());
            else
                return lhs;
        }
    }

    Expr unary() {
        if (peek().kind == TokenKind::Minus) {
            Span s = span_of(take());
            Expr e;
            e.kind = ExprKind::Unary;
            e.op = Op::Neg;
            e.args.push_back(unary());
            e.span = close_span(s);
            return e;
        }
        return postfix();
    }

    Expr postfix() {
        Expr base = primary();
        while (accept(TokenKind::LBracket)) {
            Expr e;
            e.kind = ExprKind::Index;
            e.span = base.span;
            e.args.push_back(std::move(base));
            e.args.push_back(expression());
            expect(TokenKind::RBracket, "']'");
            e.span = close_span(e.span);
            base = std::move(e);
        }
        return base;
    }

    Expr primary() {
        const Token& t = peek();
        Expr e;
        e.span = span_of(t);
        switch (t.kind) {
        case TokenKind::Number:
            take();
            e.kind = ExprKind::Number;
            e.number = t.number;
            return e;
        case TokenKind::KwTrue:
        case TokenKind::KwFalse:
            take();
            e.kind = ExprKind::Bool;
            e.boolean = t.kind == TokenKind::KwTrue;
            return e;
        case TokenKind::LParen: {
            take();
            Expr inner = expression();
            expect(TokenKind::RParen, "')'");
            return inner;
        }
        case TokenKind::LBracket:
            take();
            e.kind = ExprKind::List;
            e.args = expression_list(TokenKind::RBracket);
            e.span = close_span(e.span);
            return e;
        case TokenKind::Identifier: {
            take();
            e.name = std::string(t.text);
            if (accept(TokenKind::LParen)) {
                e.kind = ExprKind::Call;
                e.args = expression_list(TokenKind::RParen);
                e.span = close_span(e.span);
                return e;
            }
            e.kind = ExprKind::Name;
            while (accept(TokenKind::Dot)) {
                e.name += '.';
                e.name += expect(TokenKind::Identifier, "field name after '.'").text;
            }
            e.span = close_span(e.span);
            return e;
        }
        default: fail(t, "expected an expression");
        }
    }
};

} // namespace

Ast parse(std::string_view source, const Limits& limits) { return Parser(tokenize(source, limits)).program(); }

Ast parse(const SourceText& source, const Limits& limits) { return parse(std::string_view(source.text), limits); }

bool operator==(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case ExprKind::Number:
        if (a.number != b.number) return false;
        break;
    case ExprKind::Bool:
        if (a.boolean != b.boolean) return false;
        break;
    case ExprKind::Name:
    case ExprKind::Call:
        if (a.name != b.name) return false;
        break;
    case ExprKind::Unary:
    case ExprKind::Binary:
        if (a.op != b.op) return false;
        break;
    case ExprKind::List:
    case ExprKind::Index: break;
    }
    return a.args == b.args;
}

bool operator==(const Stmt& a, const Stmt& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case StmtKind::Assign: return a.target == b.target && a.index == b.index && a.value == b.value;
    case StmtKind::If: return a.value == b.value && a.body == b.body && a.orelse == b.orelse;
    case StmtKind::For:
        return a.loop_var == b.loop_var && a.loop_is_range == b.loop_is_range && a.range_count == b.range_count &&
               a.items == b.items && a.body == b.body;
    case StmtKind::Return: return a.value == b.value && a.greens == b.greens;
    }
    return false;
}

bool operator==(const Ast& a, const Ast& b) {
    return a.name == b.name && a.demand_param == b.demand_param && a.config_param == b.config_param &&
           a.body == b.body;
}

} // namespace evosig::sig
