#include "evosig/error.hpp"

namespace evosig {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::InfeasibleDemand: return "infeasible_demand";
    case ErrorKind::InfeasiblePlan: return "infeasible_plan";
    case ErrorKind::Syntax: return "syntax";
    case ErrorKind::Limit: return "limit";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Runtime: return "runtime";
    case ErrorKind::FuelExhausted: return "fuel_exhausted";
    case ErrorKind::PlanInvalid: return "plan_invalid";
    case ErrorKind::DiffFailed: return "diff_failed";
    case ErrorKind::NoUsableCode: return "no_usable_code";
    case ErrorKind::TemplateNotFound: return "template_not_found";
    case ErrorKind::Transport: return "transport";
    case ErrorKind::Mode: return "mode";
    case ErrorKind::EmptyArchive: return "empty_archive";
    case ErrorKind::NoMutableSite: return "no_mutable_site";
    case ErrorKind::Load: return "load";
    case ErrorKind::Io: return "io";
    case ErrorKind::Config: return "config";
    }
    return "unknown";
}

std::optional<ErrorKind> parse_error_kind(std::string_view name) {
    for (int k = 0; k <= static_cast<int>(ErrorKind::Config); ++k)
        if (to_string(static_cast<ErrorKind>(k)) == name) return static_cast<ErrorKind>(k);
    return std::nullopt;
}

} // namespace evosig
