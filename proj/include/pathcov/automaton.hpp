#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pathcov {

using StateId = std::uint32_t;
using SymbolId = std::uint32_t;

struct Transition {
    StateId source = 0;
    SymbolId symbol = 0;
    StateId target = 0;

    auto operator<=>(const Transition&) const = default;
};

/// Finite automaton (Q, Sigma, E, I, F) over dense state ids 0..n-1.
///
/// Values are immutable once built. Transitions are kept sorted by
/// (source, symbol, target) so the outgoing transitions of a state form a
/// contiguous range. External state names are kept in a side table and used
/// only for I/O and reporting.
class Automaton {
public:
    Automaton() = default;

    /// Validates ids, rejects duplicate transitions, sorts everything.
    /// Throws Error(invalid_state | duplicate_transition | empty_initial |
    /// empty_final).
    Automaton(std::vector<std::string> state_names, std::vector<std::string> alphabet,
              std::vector<Transition> transitions, std::vector<StateId> initials,
              std::vector<StateId> finals);

    std::size_t num_states() const noexcept { return state_names_.size(); }
    std::size_t num_transitions() const noexcept { return transitions_.size(); }

    const std::vector<std::string>& alphabet() const noexcept { return alphabet_; }
    const std::vector<std::string>& state_names() const noexcept { return state_names_; }
    const std::string& state_name(StateId s) const { return state_names_.at(s); }
    const std::string& symbol_name(SymbolId a) const { return alphabet_.at(a); }
    std::optional<StateId> find_state(std::string_view name) const;

    std::span<const Transition> transitions() const noexcept { return transitions_; }
    std::span<const Transition> outgoing(StateId s) const;

    const std::vector<StateId>& initials() const noexcept { return initials_; }
    const std::vector<StateId>& finals() const noexcept { return finals_; }
    bool is_initial(StateId s) const { return initial_flag_.at(s) != 0; }
    bool is_final(StateId s) const { return final_flag_.at(s) != 0; }

private:
    std::vector<std::string> state_names_;
    std::vector<std::string> alphabet_;
    std::vector<Transition> transitions_;
    std::vector<std::size_t> out_begin_; // CSR offsets, size n+1
    std::vector<StateId> initials_;
    std::vector<StateId> finals_;
    std::vector<std::uint8_t> initial_flag_;
    std::vector<std::uint8_t> final_flag_;
};

/// Parses the line-oriented model format:
///
///     alphabet a b c d
///     states 1 2 3 4
///     initial 1
///     final 1 2 3 4
///     trans 1 a 3
///
/// `#` starts a comment. Directives may be repeated; their items accumulate.
/// The result is returned exactly as written (no trimming).
Automaton parse_automaton(std::string_view text);
Automaton load_automaton(const std::string& path);

/// Emits the same format with states, finals and transitions in id order.
std::string serialize_automaton(const Automaton& a);

struct TrimResult {
    Automaton automaton;
    std::vector<StateId> origin; // new id -> id in the input automaton
};

/// Restricts to states that are both accessible and co-accessible.
/// Throws Error(empty_result) when no successful path exists.
TrimResult trim_with_origin(const Automaton& a);
Automaton trim(const Automaton& a);

/// Accessible from some initial state and co-accessible to some final state.
std::vector<bool> useful_states(const Automaton& a);

/// (p, flag) naming of the two copies of Q in the must-visit product.
struct ProductTag {
    StateId base = 0;
    std::uint8_t flag = 0; // 0: q not yet visited, 1: q visited

    auto operator<=>(const ProductTag&) const = default;
};

struct MustVisit {
    Automaton automaton;
    std::vector<ProductTag> tags; // product state id -> tag
};

/// Two-copy product before trimming: state (p, f) has id p + f*n.
MustVisit must_visit_untrimmed(const Automaton& a, StateId q);

/// Trimmed product whose successful paths of each length are in bijection
/// with the successful paths of `a` of that length that visit `q`.
MustVisit must_visit(const Automaton& a, StateId q);

/// Generalisation to "visits some state of `targets`": the flag flips on
/// leaving any target in the 0-copy.
MustVisit must_visit_any_untrimmed(const Automaton& a, std::span<const StateId> targets);
MustVisit must_visit_any(const Automaton& a, std::span<const StateId> targets);

/// Max over states of the BFS distance from the initial-state set.
/// Unreachable states are ignored.
std::size_t eccentricity(const Automaton& a);

/// Chain 0 -> 1 -> ... -> k on a single letter; only k is final.
Automaton chain_automaton(std::size_t k);

} // namespace pathcov
