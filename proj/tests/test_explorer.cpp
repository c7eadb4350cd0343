#include "oracle.hpp"

#include "pathcov/error.hpp"
#include "pathcov/explorer.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace pathcov;

namespace {

Automaton toy() { return load_automaton(PATHCOV_MODELS_DIR "/toy.aut"); }

CoverageDistribution point_mass(std::size_t n, StateId s)
{
    CoverageDistribution d;
    d.pi.assign(n, 0.0);
    d.pi[s] = 1.0;
    d.p_min = 0.0;
    return d;
}

} // namespace

TEST_CASE("strategy grammar")
{
    CHECK(parse_strategy("rw").kind == StrategyKind::rw);
    CHECK(parse_strategy("uniform").kind == StrategyKind::uniform);
    CHECK(parse_strategy("exact").kind == StrategyKind::exact_biased);
    const auto approx = parse_strategy("approx:1000:10");
    CHECK(approx.kind == StrategyKind::approx_biased);
    CHECK(approx.m_factor == 1000);
    CHECK(approx.r == 10);
    CHECK(approx.label() == "approx:1000:10");
    CHECK_THROWS_AS(parse_strategy("approx:0:1"), Error);
    CHECK_THROWS_AS(parse_strategy("approx:10"), Error);
    CHECK_THROWS_AS(parse_strategy("greedy"), Error);
}

TEST_CASE("default length bound")
{
    CHECK(default_length_bound(toy()) == 4);
    CHECK(default_length_bound(parse_automaton("states s\ninitial s\nfinal s\n")) == 1);
}

TEST_CASE("biased generation on the toy model")
{
    const auto a = toy();
    const auto s2 = *a.find_state("2");
    const auto s4 = *a.find_state("4");

    SUBCASE("support of the optimal distribution")
    {
        CoverageDistribution d;
        d.pi = {0.0, 0.526315, 0.0, 0.473685};
        RngHandle rng(10);
        for (const auto& p : generate_biased(a, d, 3, 500, rng))
            CHECK((p.visits(s2) || p.visits(s4)));
    }

    SUBCASE("point mass on state 2")
    {
        RngHandle rng(11);
        std::set<std::string> words;
        for (const auto& p : generate_biased(a, point_mass(4, s2), 3, 500, rng))
            words.insert(format_word(a, p));
        CHECK(words == std::set<std::string>{"acd", "b", "ba", "baa"});
    }

    SUBCASE("k = 0")
    {
        RngHandle rng;
        CHECK(generate_biased(a, point_mass(4, s2), 3, 0, rng).empty());
    }

    SUBCASE("mass on a state no bounded path visits")
    {
        RngHandle rng;
        try {
            generate_biased(a, point_mass(4, s4), 1, 1, rng);
            FAIL("expected unreachable-mass");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::unreachable_mass);
        }
    }

    SUBCASE("conditional distribution equals the visiting sampler")
    {
        // Point mass on 4: every path must be uniform among paths visiting 4.
        const auto paths = oracle::enumerate_paths(a, 3);
        std::vector<Path> visiting;
        for (const auto& p : paths)
            if (p.visits(s4))
                visiting.push_back(p);
        RngHandle rng(12);
        std::vector<std::size_t> observed(visiting.size(), 0);
        for (const auto& p : generate_biased(a, point_mass(4, s4), 3, 10000, rng)) {
            const auto k = oracle::index_of(visiting, p);
            REQUIRE(k < visiting.size());
            ++observed[k];
        }
        // 5 degrees of freedom at most here; 0.999 quantile for 5 is 20.52.
        REQUIRE(visiting.size() <= 6);
        CHECK(oracle::chi_square_uniform(observed) < 20.52);
    }
}

TEST_CASE("coverage trial bookkeeping")
{
    const auto a = toy();
    RngHandle rng(4);
    const auto r = run_coverage_trial(a, parse_strategy("uniform"), 3, {50, 90, 100}, 10000, rng);
    CHECK(r.total_states == 4);
    CHECK_FALSE(r.exhausted);
    REQUIRE(r.first_hit.size() == 3);
    for (const auto& h : r.first_hit)
        CHECK(h.has_value());
    CHECK(*r.first_hit[0] <= *r.first_hit[1]);
    CHECK(*r.first_hit[1] <= *r.first_hit[2]);
    CHECK(r.paths_generated == *r.first_hit[2]);
    std::set<StateId> covered;
    for (const auto& [index, states] : r.trace) {
        CHECK(index >= 1);
        CHECK(index <= r.paths_generated);
        for (auto s : states)
            CHECK(covered.insert(s).second);
    }
    CHECK(covered.size() == 4);

    CHECK_THROWS_AS(run_coverage_trial(a, parse_strategy("uniform"), 3, {90, 50}, 10, rng), Error);
    CHECK_THROWS_AS(run_coverage_trial(a, parse_strategy("uniform"), 3, {50}, 0, rng), Error);
}

TEST_CASE("one-state automaton is covered by one path")
{
    const auto a = parse_automaton("alphabet a\nstates s\ninitial s\nfinal s\ntrans s a s\n");
    for (auto name : {"rw", "uniform", "exact", "approx:10:0"}) {
        RngHandle rng(1);
        const auto r = run_coverage_trial(a, parse_strategy(name), 1, {50}, 10, rng);
        REQUIRE(r.first_hit[0]);
        CHECK(*r.first_hit[0] == 1);
    }
}

TEST_CASE("exhaustion is recorded")
{
    const auto a = toy();
    RngHandle rng(2);
    // A length-1 bound never reaches state 4.
    const auto r = run_coverage_trial(a, parse_strategy("uniform"), 1, {50, 100}, 50, rng);
    CHECK(r.exhausted);
    CHECK(r.first_hit[0].has_value());
    CHECK_FALSE(r.first_hit[1].has_value());
    CHECK(r.paths_generated == 50);
}

TEST_CASE("experiment report")
{
    const auto a = toy();
    const std::vector<StrategySpec> specs{parse_strategy("uniform"), parse_strategy("exact")};
    ExperimentOptions opts;
    opts.bound = 3;
    opts.cap = 1000;

    SUBCASE("exact beats uniform")
    {
        const auto report = run_experiment(a, specs, {100}, 100, 7, opts);
        REQUIRE(report.strategies.size() == 2);
        const auto uniform = *report.strategies[0].stats[0].average;
        const auto exact = *report.strategies[1].stats[0].average;
        CHECK(exact < 3.0);
        CHECK(exact < uniform);
        REQUIRE(report.strategies[1].p_min);
        CHECK(*report.strategies[1].p_min == doctest::Approx(23.0 / 38.0));
        for (const auto& sr : report.strategies)
            for (const auto& st : sr.stats) {
                CHECK(*st.minimum <= *st.average);
                CHECK(*st.average <= *st.maximum);
                CHECK(st.reached == 100);
            }
    }

    SUBCASE("single trial")
    {
        const auto report = run_experiment(a, specs, {50, 100}, 1, 7, opts);
        for (const auto& sr : report.strategies)
            for (const auto& st : sr.stats) {
                CHECK(static_cast<double>(*st.minimum) == *st.average);
                CHECK(*st.maximum == *st.minimum);
            }
    }

    SUBCASE("determinism and worker independence")
    {
        const auto r1 = run_experiment(a, specs, {50, 90, 100}, 20, 99, opts);
        const auto r2 = run_experiment(a, specs, {50, 90, 100}, 20, 99, opts);
        auto opts4 = opts;
        opts4.workers = 4;
        const auto r3 = run_experiment(a, specs, {50, 90, 100}, 20, 99, opts4);
        CHECK(report_to_csv(r1) == report_to_csv(r2));
        CHECK(report_to_json(r1) == report_to_json(r2));
        CHECK(report_to_json(r1) == report_to_json(r3));
        CHECK(report_to_csv(r1).rfind("strategy,threshold,avg,min,max,reached,trials\n", 0) == 0);
        CHECK(report_to_json(r1, true).find("preprocessing_s") != std::string::npos);
        CHECK(report_to_json(r1).find("preprocessing_s") == std::string::npos);
    }

    SUBCASE("exhausted trials do not report later thresholds")
    {
        auto short_opts = opts;
        short_opts.bound = 1;
        short_opts.cap = 20;
        const auto report = run_experiment(a, {parse_strategy("uniform")}, {50, 100}, 5, 1, short_opts);
        const auto& st = report.strategies[0].stats;
        CHECK(st[0].reached == 5);
        CHECK(st[1].reached == 0);
        CHECK_FALSE(st[1].average.has_value());
    }
}

TEST_CASE("random trim automata")
{
    SUBCASE("single state")
    {
        RngHandle rng(1);
        const auto a = random_trim_automaton(1, 1, 1.0, rng);
        CHECK(a.num_states() == 1);
        CHECK(a.num_transitions() == 1);
    }

    SUBCASE("deterministic")
    {
        RngHandle r1(77), r2(77);
        CHECK(serialize_automaton(random_trim_automaton(300, 3, 0.5, r1)) ==
              serialize_automaton(random_trim_automaton(300, 3, 0.5, r2)));
    }

    SUBCASE("structure")
    {
        RngHandle rng(5);
        const auto a = random_trim_automaton(1000, 2, 0.5, rng);
        CHECK(a.num_states() <= 1000);
        CHECK(a.num_transitions() <= 2 * a.num_states());
        for (StateId s = 0; s < a.num_states(); ++s) {
            CHECK(a.outgoing(s).size() <= 2);
            std::set<SymbolId> letters;
            for (const auto& t : a.outgoing(s))
                CHECK(letters.insert(t.symbol).second);
        }
        CHECK(serialize_automaton(trim(a)) == serialize_automaton(a));
        CHECK(a.initials().size() == 1);
    }

    SUBCASE("bad arguments")
    {
        RngHandle rng;
        CHECK_THROWS_AS(random_trim_automaton(0, 1, 0.5, rng), Error);
        CHECK_THROWS_AS(random_trim_automaton(5, 1, 0.0, rng), Error);
    }
}

TEST_CASE("prepared strategies")
{
    const auto a = toy();
    const PreparedStrategy exact(a, parse_strategy("exact"), 3, 1);
    REQUIRE(exact.distribution());
    CHECK(exact.distribution()->p_min == doctest::Approx(23.0 / 38.0));
    const PreparedStrategy uniform(a, parse_strategy("uniform"), 3, 1);
    CHECK_FALSE(uniform.distribution());
    RngHandle rng(3);
    for (int i = 0; i < 20; ++i)
        CHECK(exact.next(rng).is_successful(a));
}
