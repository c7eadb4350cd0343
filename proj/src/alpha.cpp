#include "pathcov/alpha.hpp"

#include "pathcov/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace pathcov {

namespace {

/// Bounded successful-path counts of `a` with some states deleted.
///
/// Backward recurrence (paths from s of length l to a final state), so every
/// intermediate value is bounded by the matching entry of the unrestricted
/// count table. That bound is what makes the 64-bit instantiation safe once
/// the table's maximum entry fits.
template <class Count>
class AvoidingCounter {
public:
    AvoidingCounter(const Automaton& a, std::size_t bound)
        : a_(a), bound_(bound), removed_(a.num_states(), 0), prev_(a.num_states()), cur_(a.num_states())
    {
    }

    Count count(std::initializer_list<StateId> avoid)
    {
        for (auto s : avoid)
            removed_[s] = 1;
        const auto n = a_.num_states();
        for (StateId s = 0; s < n; ++s)
            prev_[s] = (a_.is_final(s) && !removed_[s]) ? 1 : 0;
        Count total = 0;
        for (std::size_t len = 1; len <= bound_; ++len) {
            for (StateId s = 0; s < n; ++s) {
                Count sum = 0;
                if (!removed_[s])
                    for (const auto& t : a_.outgoing(s))
                        sum += prev_[t.target]; // removed targets hold 0
                cur_[s] = sum;
            }
            for (auto s : a_.initials())
                total += cur_[s];
            std::swap(prev_, cur_);
        }
        for (auto s : avoid)
            removed_[s] = 0;
        return total;
    }

private:
    const Automaton& a_;
    std::size_t bound_;
    std::vector<std::uint8_t> removed_;
    std::vector<Count> prev_, cur_;
};

mpz_class to_mpz(std::uint64_t v)
{
    mpz_class z;
    mpz_import(z.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
    return z;
}
const mpz_class& to_mpz(const mpz_class& v) { return v; }

template <class Count>
std::vector<mpq_class> alpha_by_avoidance(const Automaton& a, std::size_t bound)
{
    const auto n = static_cast<StateId>(a.num_states());
    AvoidingCounter<Count> counter(a, bound);
    const Count total = counter.count({});

    std::vector<Count> visiting(n);
    for (StateId j = 0; j < n; ++j) {
        visiting[j] = total - counter.count({j});
        if (visiting[j] == 0)
            throw Error(ErrorCode::uncovered_state, "no successful path of length <= " + std::to_string(bound) +
                                                        " visits state " + a.state_name(j));
    }

    std::vector<mpq_class> alpha(std::size_t(n) * n);
    for (StateId i = 0; i < n; ++i) {
        alpha[std::size_t(i) * n + i] = 1;
        for (StateId j = i + 1; j < n; ++j) {
            // paths visiting i or j = total - paths avoiding both
            const Count either = total - counter.count({i, j});
            const Count both = visiting[i] + visiting[j] - either;
            const mpz_class both_z = to_mpz(both);
            mpq_class ij(both_z, to_mpz(visiting[j]));
            mpq_class ji(both_z, to_mpz(visiting[i]));
            ij.canonicalize();
            ji.canonicalize();
            alpha[std::size_t(i) * n + j] = std::move(ij);
            alpha[std::size_t(j) * n + i] = std::move(ji);
        }
    }
    return alpha;
}

} // namespace

std::vector<mpq_class> alpha_exact_rational(const Automaton& a, std::size_t bound)
{
    if (bound == 0)
        throw Error(ErrorCode::domain, "length bound must be at least 1");
    const auto table = num_paths(a, bound);
    // visiting[i] + visiting[j] can reach twice the grand total.
    const mpz_class limit = mpz_class(1) << 62;
    if (table.max_entry() < limit)
        return alpha_by_avoidance<std::uint64_t>(a, bound);
    return alpha_by_avoidance<mpz_class>(a, bound);
}

std::vector<mpq_class> alpha_exact_by_product(const Automaton& a, std::size_t bound)
{
    const auto n = static_cast<StateId>(a.num_states());
    std::vector<mpq_class> alpha(std::size_t(n) * n);
    for (StateId j = 0; j < n; ++j) {
        const auto aj = must_visit(a, j);
        const auto denom = num_paths(aj.automaton, bound).grand_total();
        if (denom == 0)
            throw Error(ErrorCode::uncovered_state, "no successful path of length <= " + std::to_string(bound) +
                                                        " visits state " + a.state_name(j));
        for (StateId i = 0; i < n; ++i) {
            if (i == j) {
                alpha[std::size_t(i) * n + j] = 1;
                continue;
            }
            std::vector<StateId> copies;
            for (StateId p = 0; p < aj.tags.size(); ++p)
                if (aj.tags[p].base == i)
                    copies.push_back(p);
            mpz_class numer = 0;
            if (!copies.empty()) {
                try {
                    const auto aji = must_visit_any(aj.automaton, copies);
                    numer = num_paths(aji.automaton, bound).grand_total();
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::empty_result)
                        throw;
                }
            }
            mpq_class q(numer, denom);
            q.canonicalize();
            alpha[std::size_t(i) * n + j] = std::move(q);
        }
    }
    return alpha;
}

AlphaMatrix alpha_exact(const Automaton& a, std::size_t bound)
{
    const auto exact = alpha_exact_rational(a, bound);
    const auto n = a.num_states();
    AlphaMatrix alpha(n);
    for (std::size_t k = 0; k < exact.size(); ++k)
        alpha(static_cast<StateId>(k / n), static_cast<StateId>(k % n)) = exact[k].get_d();
    alpha.provenance = AlphaProvenance::exact;
    alpha.bound = bound;
    alpha.state_names = a.state_names();
    return alpha;
}

// ---------------------------------------------------------------------------

VisitTable::VisitTable(std::size_t rows, std::size_t states)
    : rows_(rows), states_(states), words_((states + 63) / 64), bits_(rows * words_, 0)
{
}

VisitCounts VisitTable::counts() const
{
    VisitCounts c;
    c.samples = rows_;
    c.per_state.assign(states_, 0);
    c.pairwise.assign(states_ * states_, 0);
    std::vector<StateId> visited;
    for (std::size_t row = 0; row < rows_; ++row) {
        visited.clear();
        const auto* words = &bits_[row * words_];
        for (std::size_t w = 0; w < words_; ++w) {
            for (auto bits = words[w]; bits != 0; bits &= bits - 1)
                visited.push_back(static_cast<StateId>(w * 64 + std::countr_zero(bits)));
        }
        for (auto i : visited) {
            ++c.per_state[i];
            auto* pair_row = &c.pairwise[std::size_t(i) * states_];
            for (auto j : visited)
                ++pair_row[j];
        }
    }
    return c;
}

AlphaMatrix alpha_approx(const Automaton& a, std::size_t bound, std::size_t m, std::size_t r, RngHandle& rng)
{
    return alpha_approx(a, num_paths(a, bound), m, r, rng);
}

AlphaMatrix alpha_approx(const Automaton& a, const PathCountTable& table, std::size_t m, std::size_t r,
                         RngHandle& rng)
{
    if (m == 0)
        throw Error(ErrorCode::domain, "sample count m must be at least 1");
    const auto n = static_cast<StateId>(a.num_states());
    const auto bound = table.bound();
    const auto column_seed = rng.seed();

    // m uniform paths into the visit table.
    VisitTable visits(m, n);
    for (std::size_t row = 0; row < m; ++row) {
        const auto path = sample_one(a, table, rng);
        visits.mark(row, path.source());
        for (const auto& t : path.steps)
            visits.mark(row, t.target);
    }

    AlphaMatrix alpha(n);
    alpha.provenance = AlphaProvenance::approx;
    alpha.bound = bound;
    alpha.samples = m;
    alpha.refinement = r;
    alpha.seed = column_seed;
    alpha.state_names = a.state_names();
    alpha.counts = visits.counts();
    const auto& counts = *alpha.counts;

    // Column estimates.
    const RngHandle base(column_seed);
    for (StateId j = 0; j < n; ++j) {
        const auto mj = counts.per_state[j];
        if (mj > r) {
            for (StateId i = 0; i < n; ++i)
                if (i != j)
                    alpha(i, j) = static_cast<double>(counts.pair(i, j)) / static_cast<double>(mj);
        } else if (r == 0) {
            // mj == 0: the column stays zero off the diagonal.
        } else {
            std::optional<VisitingSampler> sampler;
            try {
                sampler.emplace(a, j, bound);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::empty_language && e.code() != ErrorCode::empty_result)
                    throw;
                throw Error(ErrorCode::conditioning_impossible,
                            "cannot refine column " + a.state_name(j) + ": no successful path of length <= " +
                                std::to_string(bound) + " visits it");
            }
            auto column_rng = base.derive(j);
            std::vector<std::uint64_t> hits(n, 0);
            for (std::size_t k = 0; k < r; ++k) {
                const auto path = sampler->sample(column_rng);
                for (auto s : path.visited_states())
                    ++hits[s];
            }
            for (StateId i = 0; i < n; ++i)
                if (i != j)
                    alpha(i, j) = static_cast<double>(hits[i]) / static_cast<double>(r);
            alpha.refined_columns.push_back(j);
        }
    }
    return alpha;
}

// ---------------------------------------------------------------------------

std::size_t required_samples(double epsilon, double delta, SampleBound kind)
{
    if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0))
        throw Error(ErrorCode::domain, "required_samples expects 0 < epsilon < 1 and 0 < delta < 1");
    const double x = kind == SampleBound::chebyshev ? 1.0 / (4.0 * epsilon * epsilon * delta)
                                                    : std::log(2.0 / delta) / (2.0 * epsilon * epsilon);
    // Absorb rounding in x so exact integers (e.g. 500) do not round up.
    return static_cast<std::size_t>(std::ceil(x * (1.0 - 1e-12)));
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string shortest(double v)
{
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string name_of(const AlphaMatrix& alpha, std::size_t s)
{
    return s < alpha.state_names.size() ? alpha.state_names[s] : std::to_string(s);
}

} // namespace

std::string alpha_to_csv(const AlphaMatrix& alpha)
{
    std::string out = "row,column,value\n";
    const auto n = alpha.size();
    for (StateId i = 0; i < n; ++i)
        for (StateId j = 0; j < n; ++j)
            out += name_of(alpha, i) + ',' + name_of(alpha, j) + ',' + shortest(alpha(i, j)) + '\n';
    return out;
}

std::string alpha_to_json(const AlphaMatrix& alpha)
{
    using nlohmann::json;
    json doc;
    const auto n = alpha.size();
    doc["provenance"] = alpha.provenance == AlphaProvenance::exact ? "exact" : "approx";
    doc["bound"] = alpha.bound;
    if (alpha.provenance == AlphaProvenance::approx) {
        doc["m"] = alpha.samples;
        doc["r"] = alpha.refinement;
        doc["seed"] = alpha.seed;
        doc["refined_columns"] = json::array();
        for (auto j : alpha.refined_columns)
            doc["refined_columns"].push_back(name_of(alpha, j));
    }
    doc["states"] = json::array();
    for (std::size_t s = 0; s < n; ++s)
        doc["states"].push_back(name_of(alpha, s));
    doc["entries"] = json::array();
    for (StateId i = 0; i < n; ++i) {
        json row = json::array();
        for (StateId j = 0; j < n; ++j)
            row.push_back(alpha(i, j));
        doc["entries"].push_back(std::move(row));
    }
    return doc.dump(2) + "\n";
}

AlphaMatrix alpha_from_json(const std::string& text)
{
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
        const auto& states = doc.at("states");
        const auto& entries = doc.at("entries");
        const auto n = states.size();
        if (entries.size() != n)
            throw Error(ErrorCode::syntax, "alpha JSON: entries must be " + std::to_string(n) + " rows");
        AlphaMatrix alpha(n);
        for (StateId i = 0; i < n; ++i) {
            if (entries[i].size() != n)
                throw Error(ErrorCode::syntax, "alpha JSON: row " + std::to_string(i) + " has wrong length");
            for (StateId j = 0; j < n; ++j)
                alpha(i, j) = entries[i][j].get<double>();
        }
        for (const auto& s : states)
            alpha.state_names.push_back(s.get<std::string>());
        alpha.provenance = doc.value("provenance", "exact") == "exact" ? AlphaProvenance::exact
                                                                        : AlphaProvenance::approx;
        alpha.bound = doc.value("bound", std::size_t{0});
        alpha.samples = doc.value("m", std::size_t{0});
        alpha.refinement = doc.value("r", std::size_t{0});
        alpha.seed = doc.value("seed", std::uint64_t{0});
        return alpha;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::syntax, std::string("alpha JSON: ") + e.what());
    }
}

AlphaMatrix alpha_from_csv(const std::string& text)
{
    struct Entry {
        std::size_t row, column;
        double value;
    };
    std::vector<std::string> names;
    std::unordered_map<std::string, std::size_t> ids;
    auto id = [&](const std::string& name) {
        auto [it, fresh] = ids.emplace(name, names.size());
        if (fresh)
            names.push_back(name);
        return it->second;
    };

    std::vector<Entry> entries;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || (line_no == 1 && line.rfind("row,", 0) == 0))
            continue;
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string::npos)
            throw Error(ErrorCode::syntax, "alpha CSV line " + std::to_string(line_no) + ": expected row,column,value");
        const auto value_text = line.substr(c2 + 1);
        double value = 0;
        auto [ptr, ec] = std::from_chars(value_text.data(), value_text.data() + value_text.size(), value);
        if (ec != std::errc{} || ptr != value_text.data() + value_text.size())
            throw Error(ErrorCode::syntax, "alpha CSV line " + std::to_string(line_no) + ": bad value");
        const auto row = id(line.substr(0, c1));
        const auto column = id(line.substr(c1 + 1, c2 - c1 - 1));
        entries.push_back({row, column, value});
    }
    AlphaMatrix alpha(names.size());
    for (const auto& e : entries)
        alpha(static_cast<StateId>(e.row), static_cast<StateId>(e.column)) = e.value;
    alpha.state_names = std::move(names);
    return alpha;
}

} // namespace pathcov
