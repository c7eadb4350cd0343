#include "pathcov/automaton.hpp"

#include "pathcov/error.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace pathcov {

namespace {

std::vector<StateId> sorted_unique(std::vector<StateId> v)
{
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

} // namespace

Automaton::Automaton(std::vector<std::string> state_names, std::vector<std::string> alphabet,
                     std::vector<Transition> transitions, std::vector<StateId> initials,
                     std::vector<StateId> finals)
    : state_names_(std::move(state_names))
    , alphabet_(std::move(alphabet))
    , transitions_(std::move(transitions))
    , initials_(sorted_unique(std::move(initials)))
    , finals_(sorted_unique(std::move(finals)))
{
    const auto n = state_names_.size();
    auto check_state = [n](StateId s) {
        if (s >= n)
            throw Error(ErrorCode::invalid_state, "state id " + std::to_string(s) + " out of range");
    };
    for (const auto& t : transitions_) {
        check_state(t.source);
        check_state(t.target);
        if (t.symbol >= alphabet_.size())
            throw Error(ErrorCode::undeclared_symbol,
                        "symbol id " + std::to_string(t.symbol) + " out of range");
    }
    for (auto s : initials_)
        check_state(s);
    for (auto s : finals_)
        check_state(s);
    if (initials_.empty())
        throw Error(ErrorCode::empty_initial, "automaton has no initial state");
    if (finals_.empty())
        throw Error(ErrorCode::empty_final, "automaton has no final state");

    std::sort(transitions_.begin(), transitions_.end());
    auto dup = std::adjacent_find(transitions_.begin(), transitions_.end());
    if (dup != transitions_.end())
        throw Error(ErrorCode::duplicate_transition,
                    "duplicate transition " + state_names_[dup->source] + " " +
                        alphabet_[dup->symbol] + " " + state_names_[dup->target]);

    out_begin_.assign(n + 1, 0);
    for (const auto& t : transitions_)
        ++out_begin_[t.source + 1];
    for (std::size_t s = 0; s < n; ++s)
        out_begin_[s + 1] += out_begin_[s];

    initial_flag_.assign(n, 0);
    final_flag_.assign(n, 0);
    for (auto s : initials_)
        initial_flag_[s] = 1;
    for (auto s : finals_)
        final_flag_[s] = 1;
}

std::optional<StateId> Automaton::find_state(std::string_view name) const
{
    auto it = std::find(state_names_.begin(), state_names_.end(), name);
    if (it == state_names_.end())
        return std::nullopt;
    return static_cast<StateId>(it - state_names_.begin());
}

std::span<const Transition> Automaton::outgoing(StateId s) const
{
    const auto begin = out_begin_.at(s);
    return std::span<const Transition>(transitions_).subspan(begin, out_begin_[s + 1] - begin);
}

// ---------------------------------------------------------------------------
// Text format

namespace {

struct PendingTransition {
    std::string source, symbol, target;
    std::size_t line;
};

struct PendingRef {
    std::string name;
    std::size_t line;
};

std::string at_line(std::size_t line, const std::string& what)
{
    return "line " + std::to_string(line) + ": " + what;
}

} // namespace

Automaton parse_automaton(std::string_view text)
{
    std::vector<std::string> states;
    std::vector<std::string> alphabet;
    std::unordered_map<std::string, StateId> state_ids;
    std::unordered_map<std::string, SymbolId> symbol_ids;
    std::vector<PendingRef> initials, finals;
    std::vector<PendingTransition> trans;

    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos)
            raw.erase(hash);
        std::istringstream words(raw);
        std::string directive;
        if (!(words >> directive))
            continue;
        std::vector<std::string> items;
        for (std::string w; words >> w;)
            items.push_back(std::move(w));

        if (directive == "alphabet") {
            for (auto& w : items) {
                if (symbol_ids.contains(w))
                    throw Error(ErrorCode::syntax, at_line(line_no, "symbol '" + w + "' declared twice"));
                symbol_ids.emplace(w, static_cast<SymbolId>(alphabet.size()));
                alphabet.push_back(std::move(w));
            }
        } else if (directive == "states") {
            for (auto& w : items) {
                if (state_ids.contains(w))
                    throw Error(ErrorCode::syntax, at_line(line_no, "state '" + w + "' declared twice"));
                state_ids.emplace(w, static_cast<StateId>(states.size()));
                states.push_back(std::move(w));
            }
        } else if (directive == "initial") {
            for (auto& w : items)
                initials.push_back({std::move(w), line_no});
        } else if (directive == "final") {
            for (auto& w : items)
                finals.push_back({std::move(w), line_no});
        } else if (directive == "trans") {
            if (items.size() != 3)
                throw Error(ErrorCode::syntax,
                            at_line(line_no, "'trans' expects 3 fields, got " + std::to_string(items.size())));
            trans.push_back({items[0], items[1], items[2], line_no});
        } else {
            throw Error(ErrorCode::syntax, at_line(line_no, "unknown directive '" + directive + "'"));
        }
    }

    auto state = [&](const std::string& name, std::size_t line) {
        auto it = state_ids.find(name);
        if (it == state_ids.end())
            throw Error(ErrorCode::undeclared_state, at_line(line, "undeclared state '" + name + "'"));
        return it->second;
    };

    std::vector<Transition> edges;
    edges.reserve(trans.size());
    for (const auto& t : trans) {
        auto sym = symbol_ids.find(t.symbol);
        if (sym == symbol_ids.end())
            throw Error(ErrorCode::undeclared_symbol, at_line(t.line, "undeclared symbol '" + t.symbol + "'"));
        edges.push_back({state(t.source, t.line), sym->second, state(t.target, t.line)});
    }
    std::vector<StateId> init_ids, final_ids;
    for (const auto& r : initials)
        init_ids.push_back(state(r.name, r.line));
    for (const auto& r : finals)
        final_ids.push_back(state(r.name, r.line));
    if (init_ids.empty())
        throw Error(ErrorCode::empty_initial, "no initial state declared");
    if (final_ids.empty())
        throw Error(ErrorCode::empty_final, "no final state declared");

    return Automaton(std::move(states), std::move(alphabet), std::move(edges), std::move(init_ids),
                     std::move(final_ids));
}

Automaton load_automaton(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::io, "cannot open model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_automaton(buf.str());
}

std::string serialize_automaton(const Automaton& a)
{
    std::ostringstream out;
    auto list = [&](std::string_view directive, const auto& ids, auto name_of) {
        out << directive;
        for (auto id : ids)
            out << ' ' << name_of(id);
        out << '\n';
    };
    out << "alphabet";
    for (const auto& s : a.alphabet())
        out << ' ' << s;
    out << '\n';
    out << "states";
    for (const auto& s : a.state_names())
        out << ' ' << s;
    out << '\n';
    auto name = [&](StateId s) -> const std::string& { return a.state_name(s); };
    list("initial", a.initials(), name);
    list("final", a.finals(), name);
    for (const auto& t : a.transitions())
        out << "trans " << a.state_name(t.source) << ' ' << a.symbol_name(t.symbol) << ' '
            << a.state_name(t.target) << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// Trimming

std::vector<bool> useful_states(const Automaton& a)
{
    const auto n = a.num_states();
    std::vector<std::vector<StateId>> preds(n);
    for (const auto& t : a.transitions())
        preds[t.target].push_back(t.source);

    std::vector<bool> fwd(n, false), bwd(n, false);
    std::vector<StateId> stack;
    for (auto s : a.initials()) {
        if (!fwd[s]) {
            fwd[s] = true;
            stack.push_back(s);
        }
    }
    while (!stack.empty()) {
        auto s = stack.back();
        stack.pop_back();
        for (const auto& t : a.outgoing(s)) {
            if (!fwd[t.target]) {
                fwd[t.target] = true;
                stack.push_back(t.target);
            }
        }
    }
    for (auto s : a.finals()) {
        if (!bwd[s]) {
            bwd[s] = true;
            stack.push_back(s);
        }
    }
    while (!stack.empty()) {
        auto s = stack.back();
        stack.pop_back();
        for (auto p : preds[s]) {
            if (!bwd[p]) {
                bwd[p] = true;
                stack.push_back(p);
            }
        }
    }
    std::vector<bool> useful(n);
    for (std::size_t s = 0; s < n; ++s)
        useful[s] = fwd[s] && bwd[s];
    return useful;
}

TrimResult trim_with_origin(const Automaton& a)
{
    const auto useful = useful_states(a);
    constexpr auto none = std::numeric_limits<StateId>::max();
    std::vector<StateId> renumber(a.num_states(), none);
    std::vector<StateId> origin;
    std::vector<std::string> names;
    for (StateId s = 0; s < a.num_states(); ++s) {
        if (useful[s]) {
            renumber[s] = static_cast<StateId>(origin.size());
            origin.push_back(s);
            names.push_back(a.state_name(s));
        }
    }
    if (origin.empty())
        throw Error(ErrorCode::empty_result, "automaton has no successful path");

    std::vector<Transition> edges;
    for (const auto& t : a.transitions())
        if (useful[t.source] && useful[t.target])
            edges.push_back({renumber[t.source], t.symbol, renumber[t.target]});
    std::vector<StateId> init, fin;
    for (auto s : a.initials())
        if (useful[s])
            init.push_back(renumber[s]);
    for (auto s : a.finals())
        if (useful[s])
            fin.push_back(renumber[s]);

    return {Automaton(std::move(names), a.alphabet(), std::move(edges), std::move(init), std::move(fin)),
            std::move(origin)};
}

Automaton trim(const Automaton& a) { return trim_with_origin(a).automaton; }

// ---------------------------------------------------------------------------
// Must-visit product

MustVisit must_visit_any_untrimmed(const Automaton& a, std::span<const StateId> targets)
{
    const auto n = static_cast<StateId>(a.num_states());
    std::vector<bool> is_target(n, false);
    for (auto q : targets) {
        if (q >= n)
            throw Error(ErrorCode::invalid_state, "state id " + std::to_string(q) + " out of range");
        is_target[q] = true;
    }

    auto id = [n](StateId p, StateId flag) { return p + flag * n; };

    std::vector<std::string> names;
    std::vector<ProductTag> tags;
    names.reserve(2 * n);
    tags.reserve(2 * n);
    for (StateId flag = 0; flag < 2; ++flag) {
        for (StateId p = 0; p < n; ++p) {
            names.push_back("(" + a.state_name(p) + "," + std::to_string(flag) + ")");
            tags.push_back({p, static_cast<std::uint8_t>(flag)});
        }
    }

    std::vector<Transition> edges;
    edges.reserve(2 * a.num_transitions());
    for (const auto& t : a.transitions()) {
        if (!is_target[t.source])
            edges.push_back({id(t.source, 0), t.symbol, id(t.target, 0)});
        else
            edges.push_back({id(t.source, 0), t.symbol, id(t.target, 1)});
        edges.push_back({id(t.source, 1), t.symbol, id(t.target, 1)});
    }

    std::vector<StateId> init, fin;
    for (auto p : a.initials())
        init.push_back(id(p, 0));
    for (auto p : a.finals()) {
        fin.push_back(id(p, 1));
        if (is_target[p])
            fin.push_back(id(p, 0));
    }

    return {Automaton(std::move(names), a.alphabet(), std::move(edges), std::move(init), std::move(fin)),
            std::move(tags)};
}

MustVisit must_visit_any(const Automaton& a, std::span<const StateId> targets)
{
    auto product = must_visit_any_untrimmed(a, targets);
    auto trimmed = trim_with_origin(product.automaton);
    std::vector<ProductTag> tags;
    tags.reserve(trimmed.origin.size());
    for (auto old : trimmed.origin)
        tags.push_back(product.tags[old]);
    return {std::move(trimmed.automaton), std::move(tags)};
}

MustVisit must_visit_untrimmed(const Automaton& a, StateId q)
{
    return must_visit_any_untrimmed(a, std::span<const StateId>(&q, 1));
}

MustVisit must_visit(const Automaton& a, StateId q)
{
    return must_visit_any(a, std::span<const StateId>(&q, 1));
}

// ---------------------------------------------------------------------------

std::size_t eccentricity(const Automaton& a)
{
    constexpr auto unseen = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> dist(a.num_states(), unseen);
    std::deque<StateId> queue;
    for (auto s : a.initials()) {
        dist[s] = 0;
        queue.push_back(s);
    }
    std::size_t ecc = 0;
    while (!queue.empty()) {
        auto s = queue.front();
        queue.pop_front();
        ecc = std::max(ecc, dist[s]);
        for (const auto& t : a.outgoing(s)) {
            if (dist[t.target] == unseen) {
                dist[t.target] = dist[s] + 1;
                queue.push_back(t.target);
            }
        }
    }
    return ecc;
}

Automaton chain_automaton(std::size_t k)
{
    std::vector<std::string> names;
    std::vector<Transition> edges;
    for (std::size_t i = 0; i <= k; ++i)
        names.push_back(std::to_string(i));
    for (std::size_t i = 0; i < k; ++i)
        edges.push_back({static_cast<StateId>(i), 0, static_cast<StateId>(i + 1)});
    return Automaton(std::move(names), {"a"}, std::move(edges), {0}, {static_cast<StateId>(k)});
}

} // namespace pathcov
