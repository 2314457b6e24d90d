#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace evosig {

enum class ErrorKind {
    InvalidArgument,
    InfeasibleDemand,
    InfeasiblePlan,
    Syntax,
    Limit,
    Validation,
    Runtime,
    FuelExhausted,
    PlanInvalid,
    DiffFailed,
    NoUsableCode,
    TemplateNotFound,
    Transport,
    Mode,
    EmptyArchive,
    NoMutableSite,
    Load,
    Io,
    Config,
};

std::string_view to_string(ErrorKind kind);
std::optional<ErrorKind> parse_error_kind(std::string_view name);

/// Base of every error the engine throws. `kind()` is stable and
/// machine-readable; `what()` carries the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t line, std::size_t column, const std::string& message)
        : Error(ErrorKind::Syntax, std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class DiffError : public Error {
public:
    DiffError(std::size_t block_index, const std::string& message)
        : Error(ErrorKind::DiffFailed, "block " + std::to_string(block_index) + ": " + message),
          block_index_(block_index) {}

    std::size_t block_index() const noexcept { return block_index_; }

private:
    std::size_t block_index_;
};

} // namespace evosig
