#pragma once

// SigLang: the candidate-program representation. A program is a single
// function `fn signal_plan(demand, config) { ... return (cycle, greens); }`
// over a tiny deterministic imperative language (see docs/siglang.md).

#include "evosig/timing.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evosig::sig {

/// FNV-1a, 64 bit.
std::uint64_t content_hash(std::string_view text);
std::string hash_hex(std::uint64_t hash);

struct SourceText {
    std::string text;
    std::uint64_t hash = content_hash("");

    SourceText() = default;
    explicit SourceText(std::string t) : text(std::move(t)), hash(content_hash(text)) {}

    std::string hash_hex() const { return sig::hash_hex(hash); }
    friend bool operator==(const SourceText&, const SourceText&) = default;
};

struct Limits {
    std::size_t max_bytes = 64 * 1024;
    std::size_t max_tokens = 5000;
};

// ---------------------------------------------------------------- lexing

enum class TokenKind {
    Number, Identifier,
    KwFn, KwIf, KwElse, KwFor, KwIn, KwReturn, KwAnd, KwOr, KwNot, KwTrue, KwFalse,
    LParen, RParen, LBracket, RBracket, LBrace, RBrace, Comma, Semicolon, Dot, Assign,
    Plus, Minus, Star, Slash, Lt, Le, Gt, Ge, EqEq, NotEq,
    End,
};

struct Token {
    TokenKind kind = TokenKind::End;
    std::string_view text;
    std::size_t offset = 0;
    std::size_t line = 1;
    std::size_t column = 1;
    double number = 0.0;
};

/// Throws SyntaxError or a Limit error. The trailing End token is not
/// counted against the token limit.
std::vector<Token> tokenize(std::string_view source, const Limits& limits = {});

// ------------------------------------------------------------------- AST

struct Span {
    std::size_t offset = 0;
    std::size_t length = 0;
    std::size_t line = 0;
    std::size_t column = 0;
};

enum class ExprKind { Number, Bool, Name, List, Index, Call, Unary, Binary };
enum class Op { Add, Sub, Mul, Div, Lt, Le, Gt, Ge, Eq, Ne, And, Or, Neg, Not };

/// Expression node. `args` holds the children: operands for Unary/Binary,
/// call arguments, list items, or {base, index} for Index.
struct Expr {
    ExprKind kind = ExprKind::Number;
    double number = 0.0;
    bool boolean = false;
    std::string name; // Name (possibly dotted) or Call callee
    Op op = Op::Add;
    std::vector<Expr> args;
    Span span; // not part of structural equality
};

bool operator==(const Expr& a, const Expr& b);

enum class StmtKind { Assign, If, For, Return };

struct Stmt {
    StmtKind kind = StmtKind::Assign;
    Span span;

    // Assign: target[index] = value
    std::string target;
    std::vector<Expr> index; // empty or one element

    // Assign value, If condition, Return cycle
    Expr value;
    // Return greens
    Expr greens;

    std::vector<Stmt> body;   // If then-branch, For body
    std::vector<Stmt> orelse; // If else-branch

    // For: `for var in range(count)` or `for var in [items]`
    std::string loop_var;
    bool loop_is_range = false;
    double range_count = 0.0;
    std::vector<Expr> items;
};

bool operator==(const Stmt& a, const Stmt& b);

struct Ast {
    std::string name;
    std::string demand_param;
    std::string config_param;
    std::vector<Stmt> body;
    std::size_t token_count = 0; // not part of structural equality
};

bool operator==(const Ast& a, const Ast& b);

Ast parse(const SourceText& source, const Limits& limits = {});
Ast parse(std::string_view source, const Limits& limits = {});

// ------------------------------------------------------------ validation

enum class ViolationKind { Signature, Return, Arity, Definition, Loop, Call, Assignment };
std::string_view to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::string message;
    std::size_t line = 0;
};

/// Inputs readable by programs, e.g. `demand.north.through`,
/// `config.saturation_flow`.
const std::vector<std::string>& input_names();

std::vector<Violation> validate(const Ast& ast);

/// One line per violation, "line N: kind: message".
std::string describe(const std::vector<Violation>& violations);

// ---------------------------------------------------------- interpretation

inline constexpr std::uint64_t kDefaultFuel = 1'000'000;

/// Deterministic evaluation with a step budget. Errors: Runtime (division by
/// zero, non-finite value, type or index error), FuelExhausted, PlanInvalid
/// when the returned plan has the wrong shape (see plan_shape_violations).
/// Feasibility against the intersection is the evaluator's check.
PhasePlan interpret(const Ast& ast, const DemandMatrix& demand, const IntersectionConfig& config,
                    std::uint64_t fuel = kDefaultFuel);

// --------------------------------------------------------------- printing

SourceText pretty_print(const Ast& ast);

// ------------------------------------------------------------------ diffs

struct DiffBlock {
    std::string search;
    std::string replace;
    friend bool operator==(const DiffBlock&, const DiffBlock&) = default;
};

/// Applies blocks in order, each replacing the first exact occurrence of its
/// search text. A single block with empty search is a full rewrite.
/// Throws DiffError naming the failing block, or Limit on oversize output.
SourceText apply_diff(const SourceText& source, std::span<const DiffBlock> diffs, const Limits& limits = {});

inline constexpr std::string_view kSearchMarker = "<<<<<<< SEARCH";
inline constexpr std::string_view kDividerMarker = "=======";
inline constexpr std::string_view kReplaceMarker = ">>>>>>> REPLACE";

/// Extracts all SEARCH/REPLACE blocks from free text. Throws DiffError for a
/// block that is opened but not properly closed.
std::vector<DiffBlock> parse_diff_blocks(std::string_view text);
std::string format_diff_blocks(std::span<const DiffBlock> diffs);

} // namespace evosig::sig
