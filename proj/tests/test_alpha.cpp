#include "oracle.hpp"

#include "pathcov/alpha.hpp"
#include "pathcov/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace pathcov;

namespace {

Automaton toy() { return load_automaton(PATHCOV_MODELS_DIR "/toy.aut"); }

bool every_state_visited(const Automaton& a, std::size_t bound)
{
    std::vector<bool> seen(a.num_states(), false);
    for (const auto& p : oracle::enumerate_paths(a, bound))
        for (auto s : p.visited_states())
            seen[s] = true;
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

} // namespace

TEST_CASE("exact alpha on the toy model")
{
    const auto a = toy();
    const auto q = alpha_exact_rational(a, 3);
    auto at = [&](int i, int j) { return q[(i - 1) * 4 + (j - 1)]; };
    for (int j = 1; j <= 4; ++j)
        CHECK(at(1, j) == 1);
    CHECK(at(2, 1) == mpq_class(1, 4));
    CHECK(at(2, 3) == mpq_class(1, 13));
    CHECK(at(2, 4) == mpq_class(1, 6));
    CHECK(at(3, 2) == mpq_class(1, 4));
    CHECK(at(4, 2) == mpq_class(1, 4));
    CHECK(at(3, 4) == 1);
    CHECK(at(4, 3) == mpq_class(6, 13));
    CHECK(at(3, 1) == mpq_class(13, 16));
    CHECK(q == oracle::alpha(a, 3));
    CHECK(q == alpha_exact_by_product(a, 3));

    const auto m = alpha_exact(a, 3);
    CHECK(m(1, 2) == doctest::Approx(1.0 / 13));
    CHECK(m(2, 3) != m(3, 2));
}

TEST_CASE("exact alpha matches the oracle on random automata")
{
    std::mt19937 gen(31);
    int checked = 0;
    for (int round = 0; round < 150 && checked < 60; ++round) {
        const auto a = oracle::random_small_trim(gen);
        for (std::size_t bound = 1; bound <= 6; ++bound) {
            if (!every_state_visited(a, bound)) {
                CHECK_THROWS_AS(alpha_exact_rational(a, bound), Error);
                continue;
            }
            const auto expected = oracle::alpha(a, bound);
            CHECK(alpha_exact_rational(a, bound) == expected);
            CHECK(alpha_exact_by_product(a, bound) == expected);
            ++checked;
        }
    }
    CHECK(checked >= 60);
}

TEST_CASE("approximate alpha")
{
    const auto a = toy();
    const auto exact = alpha_exact(a, 3);

    SUBCASE("diagonal and range")
    {
        RngHandle rng(42);
        const auto m = alpha_approx(a, 3, 1000, 0, rng);
        REQUIRE(m.counts);
        for (StateId i = 0; i < 4; ++i) {
            CHECK(m(i, i) == 1.0);
            for (StateId j = 0; j < 4; ++j) {
                CHECK(m(i, j) >= 0.0);
                CHECK(m(i, j) <= 1.0);
                CHECK(m.counts->pair(i, j) == m.counts->pair(j, i));
                CHECK(m.counts->pair(i, j) <= std::min(m.counts->per_state[i], m.counts->per_state[j]));
            }
        }
        CHECK(m.refined_columns.empty());
    }

    SUBCASE("deterministic for a seed")
    {
        RngHandle r1(9), r2(9);
        CHECK(alpha_to_csv(alpha_approx(a, 3, 500, 100, r1)) == alpha_to_csv(alpha_approx(a, 3, 500, 100, r2)));
    }

    SUBCASE("refinement replaces only the deficient column")
    {
        RngHandle r1(2018), r2(2018);
        const auto plain = alpha_approx(a, 3, 1000, 0, r1);
        const auto refined = alpha_approx(a, 3, 1000, 250, r2);
        const StateId s2 = *a.find_state("2");
        REQUIRE(plain.counts->per_state[s2] <= 250);
        CHECK(refined.refined_columns == std::vector<StateId>{s2});
        for (StateId i = 0; i < 4; ++i)
            for (StateId j = 0; j < 4; ++j)
                if (j != s2)
                    CHECK(plain(i, j) == refined(i, j));
        CHECK(plain(*a.find_state("3"), s2) != refined(*a.find_state("3"), s2));
    }

    SUBCASE("larger r refines a superset of columns")
    {
        RngHandle r1(5), r2(5);
        const auto low = alpha_approx(a, 3, 400, 50, r1);
        const auto high = alpha_approx(a, 3, 400, 300, r2);
        for (auto j : low.refined_columns)
            CHECK(std::find(high.refined_columns.begin(), high.refined_columns.end(), j) !=
                  high.refined_columns.end());
    }

    SUBCASE("converges")
    {
        RngHandle rng(1);
        const auto m = alpha_approx(a, 3, 100000, 0, rng);
        double err = 0;
        for (StateId i = 0; i < 4; ++i)
            for (StateId j = 0; j < 4; ++j)
                err = std::max(err, std::abs(m(i, j) - exact(i, j)));
        CHECK(err < 0.02);
    }
}

TEST_CASE("unsampled column with r = 0 stays zero")
{
    // State x is visited by one path among many.
    std::string text = "alphabet a b\nstates s t x\ninitial s\nfinal t x\ntrans s a t\ntrans t a t\ntrans t b t\n"
                       "trans s b x\n";
    const auto a = parse_automaton(text);
    const StateId x = *a.find_state("x");
    RngHandle rng(3);
    const auto m = alpha_approx(a, 8, 1, 0, rng);
    if (m.counts->per_state[x] == 0) {
        for (StateId i = 0; i < a.num_states(); ++i)
            CHECK(m(i, x) == (i == x ? 1.0 : 0.0));
    }
    RngHandle rng2(3);
    const auto refined = alpha_approx(a, 8, 1, 5, rng2);
    CHECK(refined(*a.find_state("s"), x) == 1.0);
}

TEST_CASE("sample-size bounds")
{
    CHECK(required_samples(0.1, 0.05, SampleBound::chebyshev) == 500);
    CHECK(required_samples(0.1, 0.05, SampleBound::hoeffding) == 185);
    CHECK(required_samples(0.34, 0.2, SampleBound::hoeffding) == 10);
    CHECK_THROWS_AS(required_samples(0.0, 0.05, SampleBound::hoeffding), Error);
    CHECK_THROWS_AS(required_samples(0.1, 1.0, SampleBound::chebyshev), Error);
}

TEST_CASE("alpha serialization round trips")
{
    const auto a = toy();
    const auto m = alpha_exact(a, 3);
    const auto csv = alpha_to_csv(m);
    CHECK(csv.rfind("row,column,value\n", 0) == 0);
    CHECK(csv.find("\n2,3,0.07692307692307") != std::string::npos);
    const auto back = alpha_from_csv(csv);
    CHECK(back.entries() == m.entries());
    CHECK(back.state_names == m.state_names);
    const auto from_json = alpha_from_json(alpha_to_json(m));
    CHECK(from_json.entries() == m.entries());
    CHECK_THROWS_AS(alpha_from_csv("row,column,value\n1,1,x\n"), Error);
}

TEST_CASE("visit table counts")
{
    VisitTable table(3, 70);
    table.mark(0, 1);
    table.mark(0, 65);
    table.mark(1, 65);
    table.mark(2, 1);
    const auto c = table.counts();
    CHECK(c.samples == 3);
    CHECK(c.per_state[1] == 2);
    CHECK(c.per_state[65] == 2);
    CHECK(c.pair(1, 65) == 1);
    CHECK(c.pair(65, 1) == 1);
    CHECK(table.test(1, 65));
    CHECK_FALSE(table.test(1, 1));
}
