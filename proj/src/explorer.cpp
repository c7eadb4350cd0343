#include "pathcov/explorer.hpp"

#include "pathcov/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

namespace pathcov {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t parse_count(std::string_view text, std::string_view what)
{
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw Error(ErrorCode::usage, "bad " + std::string(what) + " '" + std::string(text) + "'");
    return value;
}

} // namespace

std::string StrategySpec::label() const
{
    switch (kind) {
    case StrategyKind::rw: return "rw";
    case StrategyKind::uniform: return "uniform";
    case StrategyKind::exact_biased: return "exact";
    case StrategyKind::approx_biased: return "approx:" + std::to_string(m_factor) + ":" + std::to_string(r);
    }
    return "?";
}

StrategySpec parse_strategy(std::string_view text)
{
    StrategySpec spec;
    if (text == "rw") {
        spec.kind = StrategyKind::rw;
    } else if (text == "uniform") {
        spec.kind = StrategyKind::uniform;
    } else if (text == "exact") {
        spec.kind = StrategyKind::exact_biased;
    } else if (text.starts_with("approx:")) {
        const auto rest = text.substr(7);
        const auto colon = rest.find(':');
        if (colon == std::string_view::npos)
            throw Error(ErrorCode::usage, "approx strategy expects approx:<m-factor>:<r>");
        spec.kind = StrategyKind::approx_biased;
        spec.m_factor = parse_count(rest.substr(0, colon), "m-factor");
        spec.r = parse_count(rest.substr(colon + 1), "r");
        if (spec.m_factor < 1)
            throw Error(ErrorCode::usage, "approx m-factor must be at least 1");
    } else {
        throw Error(ErrorCode::usage, "unknown strategy '" + std::string(text) + "'");
    }
    return spec;
}

std::size_t default_length_bound(const Automaton& a) { return std::max<std::size_t>(1, 2 * eccentricity(a)); }

// ---------------------------------------------------------------------------

BiasedSampler::BiasedSampler(const Automaton& a, const std::vector<double>& pi, std::size_t bound)
{
    if (pi.size() != a.num_states())
        throw Error(ErrorCode::domain, "distribution size does not match the automaton");
    double acc = 0.0;
    for (StateId i = 0; i < pi.size(); ++i) {
        if (!(pi[i] > 0.0))
            continue;
        try {
            samplers_.push_back(std::make_unique<VisitingSampler>(a, i, bound));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::empty_language && e.code() != ErrorCode::empty_result)
                throw;
            throw Error(ErrorCode::unreachable_mass, "state " + a.state_name(i) +
                                                         " has positive mass but no bounded path visits it");
        }
        acc += pi[i];
        support_.push_back(i);
        cumulative_.push_back(acc);
    }
    if (support_.empty())
        throw Error(ErrorCode::domain, "distribution has no positive mass");
}

Path BiasedSampler::sample(RngHandle& rng) const
{
    const double u = rng.uniform_real() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    auto idx = static_cast<std::size_t>(it - cumulative_.begin());
    idx = std::min(idx, support_.size() - 1);
    return samplers_[idx]->sample(rng);
}

std::vector<Path> generate_biased(const Automaton& a, const CoverageDistribution& dist, std::size_t bound,
                                  std::size_t k, RngHandle& rng)
{
    std::vector<Path> paths;
    if (k == 0)
        return paths;
    const BiasedSampler sampler(a, dist.pi, bound);
    paths.reserve(k);
    for (std::size_t i = 0; i < k; ++i)
        paths.push_back(sampler.sample(rng));
    return paths;
}

// ---------------------------------------------------------------------------

PreparedStrategy::PreparedStrategy(const Automaton& a, const StrategySpec& spec, std::size_t bound,
                                   std::uint64_t seed)
    : a_(&a), spec_(spec), bound_(bound)
{
    if (bound == 0)
        throw Error(ErrorCode::domain, "length bound must be at least 1");
    const auto start = Clock::now();
    switch (spec.kind) {
    case StrategyKind::rw:
        break;
    case StrategyKind::uniform:
        table_.emplace(num_paths(a, bound));
        break;
    case StrategyKind::exact_biased:
        alpha_.emplace(alpha_exact(a, bound));
        break;
    case StrategyKind::approx_biased: {
        table_.emplace(num_paths(a, bound));
        RngHandle rng(seed);
        alpha_.emplace(alpha_approx(a, *table_, spec.m_factor * a.num_states(), spec.r, rng));
        std::size_t unseen = 0;
        for (auto c : alpha_->counts->per_state)
            unseen += c == 0 ? 1 : 0;
        if (unseen > 0 && spec.r == 0)
            warnings_.push_back(std::to_string(unseen) + " of " + std::to_string(a.num_states()) +
                                " states were never sampled; their alpha columns are empty and the biased "
                                "sampler may effectively never reach them");
        break;
    }
    }
    if (alpha_) {
        dist_.emplace(solve_lp(build_lp(*alpha_)));
        biased_ = std::make_unique<BiasedSampler>(a, dist_->pi, bound);
    }
    seconds_ = seconds_since(start);
}

Path PreparedStrategy::next(RngHandle& rng) const
{
    switch (spec_.kind) {
    case StrategyKind::rw: return random_walk(*a_, bound_, rng);
    case StrategyKind::uniform: return sample_one(*a_, *table_, rng);
    default: return biased_->sample(rng);
    }
}

// ---------------------------------------------------------------------------

CoverageTrialResult run_coverage_trial(const Automaton& a, const PreparedStrategy& strategy,
                                       const std::vector<double>& thresholds, std::size_t cap, RngHandle& rng)
{
    if (thresholds.empty() || cap == 0)
        throw Error(ErrorCode::domain, "coverage trial needs thresholds and cap >= 1");
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
        if (!(thresholds[t] > 0.0 && thresholds[t] <= 100.0) || (t > 0 && thresholds[t] < thresholds[t - 1]))
            throw Error(ErrorCode::domain, "thresholds must be ascending within (0, 100]");
    }

    const auto n = a.num_states();
    CoverageTrialResult result;
    result.thresholds = thresholds;
    result.first_hit.assign(thresholds.size(), std::nullopt);
    result.total_states = n;

    std::vector<std::size_t> needed;
    for (auto pct : thresholds)
        needed.push_back(static_cast<std::size_t>(std::ceil(pct * static_cast<double>(n) / 100.0 - 1e-9)));

    std::vector<bool> covered(n, false);
    std::size_t covered_count = 0;
    std::size_t next_threshold = 0;
    while (next_threshold < thresholds.size() && result.paths_generated < cap) {
        const auto path = strategy.next(rng);
        ++result.paths_generated;
        std::vector<StateId> fresh;
        for (auto s : path.visited_states()) {
            if (!covered[s]) {
                covered[s] = true;
                fresh.push_back(s);
            }
        }
        if (!fresh.empty()) {
            covered_count += fresh.size();
            result.trace.emplace_back(result.paths_generated, std::move(fresh));
        }
        while (next_threshold < thresholds.size() && covered_count >= needed[next_threshold])
            result.first_hit[next_threshold++] = result.paths_generated;
    }
    result.exhausted = next_threshold < thresholds.size();
    return result;
}

CoverageTrialResult run_coverage_trial(const Automaton& a, const StrategySpec& spec, std::size_t bound,
                                       const std::vector<double>& thresholds, std::size_t cap, RngHandle& rng)
{
    const PreparedStrategy prepared(a, spec, bound, rng.seed());
    return run_coverage_trial(a, prepared, thresholds, cap, rng);
}

// ---------------------------------------------------------------------------

std::size_t default_cap(const Automaton& a, std::size_t bound, std::uint64_t seed)
{
    constexpr std::size_t floor_cap = 100000;
    constexpr std::size_t calibration_cap = 1000000;
    const PreparedStrategy uniform(a, StrategySpec{StrategyKind::uniform}, bound, seed);
    RngHandle rng(seed);
    const auto trial = run_coverage_trial(a, uniform, {100.0}, calibration_cap, rng);
    if (!trial.first_hit[0])
        return calibration_cap;
    return std::max(floor_cap, 10 * *trial.first_hit[0]);
}

ExperimentReport run_experiment(const Automaton& a, const std::vector<StrategySpec>& strategies,
                                const std::vector<double>& thresholds, std::size_t trials, std::uint64_t seed,
                                const ExperimentOptions& options)
{
    if (trials == 0)
        throw Error(ErrorCode::domain, "trial count must be at least 1");

    ExperimentReport report;
    report.trials = trials;
    report.seed = seed;
    report.thresholds = thresholds;
    const auto bound = options.bound.value_or(default_length_bound(a));
    report.model.name = options.model_name;
    report.model.states = a.num_states();
    report.model.transitions = a.num_transitions();
    report.model.eccentricity = eccentricity(a);
    report.model.bound = bound;
    report.model.paths = num_paths(a, bound).grand_total().get_str();
    report.cap = options.cap.value_or(0);
    if (report.cap == 0)
        report.cap = default_cap(a, bound, seed);

    const auto workers = std::max<std::size_t>(1, options.workers);
    for (const auto& spec : strategies) {
        const PreparedStrategy prepared(a, spec, bound, seed);

        std::vector<CoverageTrialResult> results(trials);
        const auto start = Clock::now();
        auto run_range = [&](std::size_t worker) {
            for (std::size_t t = worker; t < trials; t += workers) {
                RngHandle rng(seed + t);
                results[t] = run_coverage_trial(a, prepared, thresholds, report.cap, rng);
            }
        };
        if (workers == 1) {
            run_range(0);
        } else {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < workers; ++w)
                pool.emplace_back(run_range, w);
        }

        StrategyReport sr;
        sr.spec = spec;
        sr.preprocessing_seconds = prepared.preprocessing_seconds();
        sr.trial_seconds = seconds_since(start);
        sr.warnings = prepared.warnings();
        if (prepared.distribution())
            sr.p_min = prepared.distribution()->p_min;
        for (std::size_t k = 0; k < thresholds.size(); ++k) {
            ThresholdStats st;
            st.threshold = thresholds[k];
            std::size_t sum = 0;
            for (const auto& r : results) {
                if (!r.first_hit[k])
                    continue;
                const auto v = *r.first_hit[k];
                ++st.reached;
                sum += v;
                st.minimum = st.minimum ? std::min(*st.minimum, v) : v;
                st.maximum = st.maximum ? std::max(*st.maximum, v) : v;
            }
            if (st.reached > 0)
                st.average = static_cast<double>(sum) / static_cast<double>(st.reached);
            sr.stats.push_back(st);
        }
        report.strategies.push_back(std::move(sr));
    }
    return report;
}

// ---------------------------------------------------------------------------

namespace {

std::string shortest(double v)
{
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

} // namespace

std::string report_to_csv(const ExperimentReport& report)
{
    std::string out = "strategy,threshold,avg,min,max,reached,trials\n";
    for (const auto& sr : report.strategies) {
        for (const auto& st : sr.stats) {
            out += sr.spec.label() + ',' + shortest(st.threshold) + ',';
            out += st.average ? shortest(*st.average) : std::string();
            out += ',';
            out += st.minimum ? std::to_string(*st.minimum) : std::string();
            out += ',';
            out += st.maximum ? std::to_string(*st.maximum) : std::string();
            out += ',' + std::to_string(st.reached) + ',' + std::to_string(report.trials) + '\n';
        }
    }
    return out;
}

std::string report_to_json(const ExperimentReport& report, bool include_timings)
{
    using nlohmann::json;
    json doc;
    doc["model"] = {{"name", report.model.name},
                    {"states", report.model.states},
                    {"transitions", report.model.transitions},
                    {"eccentricity", report.model.eccentricity},
                    {"length_bound", report.model.bound},
                    {"paths", report.model.paths}};
    doc["config"] = {{"trials", report.trials},
                     {"seed", report.seed},
                     {"cap", report.cap},
                     {"thresholds", report.thresholds}};
    json strategies = json::array();
    for (const auto& sr : report.strategies) {
        json s;
        s["strategy"] = sr.spec.label();
        if (sr.p_min)
            s["p_min"] = *sr.p_min;
        json stats = json::array();
        for (const auto& st : sr.stats) {
            json row = {{"threshold", st.threshold}, {"reached", st.reached}};
            row["avg"] = st.average ? json(*st.average) : json(nullptr);
            row["min"] = st.minimum ? json(*st.minimum) : json(nullptr);
            row["max"] = st.maximum ? json(*st.maximum) : json(nullptr);
            stats.push_back(std::move(row));
        }
        s["results"] = std::move(stats);
        if (!sr.warnings.empty())
            s["warnings"] = sr.warnings;
        if (include_timings)
            s["timings"] = {{"preprocessing_seconds", sr.preprocessing_seconds},
                            {"trial_seconds", sr.trial_seconds}};
        strategies.push_back(std::move(s));
    }
    doc["strategies"] = std::move(strategies);
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

Automaton random_trim_automaton(std::size_t n_target, std::size_t alphabet_size, double final_density,
                                RngHandle& rng)
{
    if (n_target < 1 || alphabet_size < 1 || !(final_density > 0.0 && final_density <= 1.0))
        throw Error(ErrorCode::domain, "random automaton needs n >= 1, k >= 1 and density in (0, 1]");

    std::vector<std::string> alphabet;
    for (std::size_t a = 0; a < alphabet_size; ++a)
        alphabet.push_back(alphabet_size <= 26 ? std::string(1, static_cast<char>('a' + a)) : "x" + std::to_string(a));
    std::vector<std::string> names;
    for (std::size_t s = 0; s < n_target; ++s)
        names.push_back(std::to_string(s));

    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<Transition> edges;
        edges.reserve(n_target * alphabet_size);
        for (std::size_t s = 0; s < n_target; ++s)
            for (std::size_t a = 0; a < alphabet_size; ++a)
                edges.push_back({static_cast<StateId>(s), static_cast<SymbolId>(a),
                                 static_cast<StateId>(rng.uniform_below(n_target))});
        std::vector<StateId> finals;
        for (std::size_t s = 0; s < n_target; ++s)
            if (rng.uniform_real() < final_density)
                finals.push_back(static_cast<StateId>(s));
        if (finals.empty())
            finals.push_back(static_cast<StateId>(rng.uniform_below(n_target)));

        const Automaton full(names, alphabet, std::move(edges), {0}, std::move(finals));
        try {
            return trim(full);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::empty_result)
                throw;
        }
    }
    throw Error(ErrorCode::give_up, "no non-empty trim automaton after 100 attempts");
}

} // namespace pathcov
