#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pathcov {

/// Error classes shared by every module. The CLI prints the code name as the
/// first token of its one-line error message.
enum class ErrorCode {
    syntax,
    undeclared_state,
    undeclared_symbol,
    empty_initial,
    empty_final,
    duplicate_transition,
    invalid_state,
    empty_result,
    empty_language,
    uncovered_state,
    conditioning_impossible,
    domain,
    floor_infeasible,
    infeasible_lp,
    numeric_instability,
    unreachable_mass,
    give_up,
    io,
    usage,
};

constexpr std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::syntax: return "syntax-error";
    case ErrorCode::undeclared_state: return "undeclared-state";
    case ErrorCode::undeclared_symbol: return "undeclared-symbol";
    case ErrorCode::empty_initial: return "empty-initial";
    case ErrorCode::empty_final: return "empty-final";
    case ErrorCode::duplicate_transition: return "duplicate-transition";
    case ErrorCode::invalid_state: return "invalid-state";
    case ErrorCode::empty_result: return "empty-result";
    case ErrorCode::empty_language: return "empty-language";
    case ErrorCode::uncovered_state: return "uncovered-state";
    case ErrorCode::conditioning_impossible: return "conditioning-impossible";
    case ErrorCode::domain: return "domain-error";
    case ErrorCode::floor_infeasible: return "floor-infeasible";
    case ErrorCode::infeasible_lp: return "infeasible-lp";
    case ErrorCode::numeric_instability: return "numeric-instability";
    case ErrorCode::unreachable_mass: return "unreachable-mass";
    case ErrorCode::give_up: return "give-up";
    case ErrorCode::io: return "io-error";
    case ErrorCode::usage: return "usage-error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace pathcov
