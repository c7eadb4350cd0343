#pragma once

#include "pathcov/automaton.hpp"
#include "pathcov/rng.hpp"

#include <gmpxx.h>

#include <string>
#include <vector>

namespace pathcov {

/// Exact counts of path completions.
///
/// count(s, l) is the number of paths of length exactly l from s to a final
/// state; total(l) sums count(s, l) over initial states and grand_total()
/// sums total(l) for l in [1, bound]. The empty path is never part of the
/// grand total, even when an initial state is final.
class PathCountTable {
public:
    PathCountTable() = default;
    PathCountTable(const Automaton& a, std::size_t bound);

    std::size_t bound() const noexcept { return bound_; }
    std::size_t num_states() const noexcept { return states_; }

    const mpz_class& count(StateId s, std::size_t length) const
    {
        return counts_[length * states_ + s];
    }
    const mpz_class& total(std::size_t length) const { return totals_.at(length); }
    const mpz_class& grand_total() const noexcept { return grand_total_; }

    /// Largest value anywhere in the table (including the grand total).
    mpz_class max_entry() const;

private:
    std::size_t bound_ = 0;
    std::size_t states_ = 0;
    std::vector<mpz_class> counts_; // [length * states_ + s]
    std::vector<mpz_class> totals_;
    mpz_class grand_total_;
};

/// Throws Error(domain) when bound == 0.
PathCountTable num_paths(const Automaton& a, std::size_t bound);

/// A sequence of chained transitions. `start` is the first state; it only
/// carries information for the empty path (a walk stuck in its start state).
struct Path {
    StateId start = 0;
    std::vector<Transition> steps;

    std::size_t length() const noexcept { return steps.size(); }
    bool empty() const noexcept { return steps.empty(); }
    StateId source() const { return steps.empty() ? start : steps.front().source; }
    StateId target() const { return steps.empty() ? start : steps.back().target; }

    /// Every state on the path, sorted, without repetition.
    std::vector<StateId> visited_states() const;
    bool visits(StateId q) const;
    bool is_successful(const Automaton& a) const;

    auto operator<=>(const Path&) const = default;
};

/// One uniform draw over successful paths of length in [1, table.bound()].
/// Throws Error(empty_language) when the grand total is zero.
Path sample_one(const Automaton& a, const PathCountTable& table, RngHandle& rng);

std::vector<Path> sample_uniform(const Automaton& a, const PathCountTable& table, std::size_t k,
                                 RngHandle& rng);

/// Uniform sampler over the bounded successful paths of `a` that visit a
/// fixed state. Built on the trimmed must-visit product; sampled product
/// paths are projected back through the tag table.
class VisitingSampler {
public:
    /// Throws Error(empty_language) when no path of length <= bound visits q.
    VisitingSampler(const Automaton& a, StateId q, std::size_t bound);

    StateId target_state() const noexcept { return q_; }
    const MustVisit& product() const noexcept { return product_; }
    const PathCountTable& table() const noexcept { return table_; }

    Path sample(RngHandle& rng) const;

private:
    StateId q_;
    MustVisit product_;
    PathCountTable table_;
};

std::vector<Path> sample_visiting(const Automaton& a, StateId q, std::size_t bound, std::size_t k,
                                  RngHandle& rng);

/// Isotropic random walk: uniform initial state, then uniform outgoing
/// transitions until a dead end or `max_length` steps. The endpoint need not
/// be final.
Path random_walk(const Automaton& a, std::size_t max_length, RngHandle& rng);

/// `p a p'` triples separated by spaces, using external names.
std::string format_path(const Automaton& a, const Path& path);

/// Symbol word of the path. Symbols are concatenated when every symbol of
/// the alphabet is one character long, space-separated otherwise.
std::string format_word(const Automaton& a, const Path& path);

} // namespace pathcov
