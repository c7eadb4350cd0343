#include "pathcov/paths.hpp"

#include "pathcov/error.hpp"

#include <algorithm>
#include <sstream>

namespace pathcov {

PathCountTable::PathCountTable(const Automaton& a, std::size_t bound)
    : bound_(bound)
    , states_(a.num_states())
    , counts_((bound + 1) * a.num_states())
    , totals_(bound + 1)
{
    for (auto f : a.finals())
        counts_[f] = 1;
    for (std::size_t len = 1; len <= bound; ++len) {
        auto* row = &counts_[len * states_];
        const auto* prev = &counts_[(len - 1) * states_];
        for (StateId s = 0; s < states_; ++s)
            for (const auto& t : a.outgoing(s))
                row[s] += prev[t.target];
    }
    for (std::size_t len = 0; len <= bound; ++len) {
        for (auto s : a.initials())
            totals_[len] += count(s, len);
        if (len > 0)
            grand_total_ += totals_[len];
    }
}

mpz_class PathCountTable::max_entry() const
{
    mpz_class best = grand_total_;
    for (const auto& c : counts_)
        if (c > best)
            best = c;
    return best;
}

PathCountTable num_paths(const Automaton& a, std::size_t bound)
{
    if (bound == 0)
        throw Error(ErrorCode::domain, "length bound must be at least 1");
    return PathCountTable(a, bound);
}

// ---------------------------------------------------------------------------

std::vector<StateId> Path::visited_states() const
{
    std::vector<StateId> states;
    states.reserve(steps.size() + 1);
    states.push_back(source());
    for (const auto& t : steps)
        states.push_back(t.target);
    std::sort(states.begin(), states.end());
    states.erase(std::unique(states.begin(), states.end()), states.end());
    return states;
}

bool Path::visits(StateId q) const
{
    if (source() == q)
        return true;
    return std::any_of(steps.begin(), steps.end(), [q](const Transition& t) { return t.target == q; });
}

bool Path::is_successful(const Automaton& a) const
{
    if (steps.empty() || !a.is_initial(steps.front().source) || !a.is_final(steps.back().target))
        return false;
    for (std::size_t i = 1; i < steps.size(); ++i)
        if (steps[i].source != steps[i - 1].target)
            return false;
    return true;
}

// ---------------------------------------------------------------------------

Path sample_one(const Automaton& a, const PathCountTable& table, RngHandle& rng)
{
    if (table.grand_total() == 0)
        throw Error(ErrorCode::empty_language, "no successful path of length <= " +
                                                   std::to_string(table.bound()));

    // Pick (initial state, length) with weight count(s, length).
    mpz_class x = rng.uniform_below(table.grand_total());
    StateId state = 0;
    std::size_t remaining = 0;
    for (std::size_t len = 1; len <= table.bound() && remaining == 0; ++len) {
        for (auto s : a.initials()) {
            const auto& w = table.count(s, len);
            if (x < w) {
                state = s;
                remaining = len;
                break;
            }
            x -= w;
        }
    }

    Path path;
    path.start = state;
    path.steps.reserve(remaining);
    while (remaining > 0) {
        x = rng.uniform_below(table.count(state, remaining));
        const Transition* chosen = nullptr;
        for (const auto& t : a.outgoing(state)) {
            const auto& w = table.count(t.target, remaining - 1);
            if (x < w) {
                chosen = &t;
                break;
            }
            x -= w;
        }
        path.steps.push_back(*chosen);
        state = chosen->target;
        --remaining;
    }
    return path;
}

std::vector<Path> sample_uniform(const Automaton& a, const PathCountTable& table, std::size_t k,
                                 RngHandle& rng)
{
    std::vector<Path> paths;
    paths.reserve(k);
    for (std::size_t i = 0; i < k; ++i)
        paths.push_back(sample_one(a, table, rng));
    return paths;
}

// ---------------------------------------------------------------------------

VisitingSampler::VisitingSampler(const Automaton& a, StateId q, std::size_t bound)
    : q_(q), product_(must_visit(a, q)), table_(num_paths(product_.automaton, bound))
{
    if (table_.grand_total() == 0)
        throw Error(ErrorCode::empty_language, "no successful path of length <= " + std::to_string(bound) +
                                                   " visits state " + a.state_name(q));
}

Path VisitingSampler::sample(RngHandle& rng) const
{
    auto path = sample_one(product_.automaton, table_, rng);
    path.start = product_.tags[path.start].base;
    for (auto& t : path.steps) {
        t.source = product_.tags[t.source].base;
        t.target = product_.tags[t.target].base;
    }
    return path;
}

std::vector<Path> sample_visiting(const Automaton& a, StateId q, std::size_t bound, std::size_t k,
                                  RngHandle& rng)
{
    const VisitingSampler sampler(a, q, bound);
    std::vector<Path> paths;
    paths.reserve(k);
    for (std::size_t i = 0; i < k; ++i)
        paths.push_back(sampler.sample(rng));
    return paths;
}

// ---------------------------------------------------------------------------

Path random_walk(const Automaton& a, std::size_t max_length, RngHandle& rng)
{
    const auto& init = a.initials();
    StateId state = init[rng.uniform_below(init.size())];
    Path path;
    path.start = state;
    while (path.length() < max_length) {
        const auto out = a.outgoing(state);
        if (out.empty())
            break;
        const auto& t = out[rng.uniform_below(out.size())];
        path.steps.push_back(t);
        state = t.target;
    }
    return path;
}

std::string format_path(const Automaton& a, const Path& path)
{
    std::ostringstream out;
    for (std::size_t i = 0; i < path.steps.size(); ++i) {
        const auto& t = path.steps[i];
        if (i > 0)
            out << ' ';
        out << a.state_name(t.source) << ' ' << a.symbol_name(t.symbol) << ' ' << a.state_name(t.target);
    }
    return out.str();
}

std::string format_word(const Automaton& a, const Path& path)
{
    const bool compact = std::all_of(a.alphabet().begin(), a.alphabet().end(),
                                     [](const std::string& s) { return s.size() == 1; });
    std::string word;
    for (const auto& t : path.steps) {
        if (!compact && !word.empty())
            word += ' ';
        word += a.symbol_name(t.symbol);
    }
    return word;
}

} // namespace pathcov
