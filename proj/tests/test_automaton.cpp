#include "oracle.hpp"

#include "pathcov/automaton.hpp"
#include "pathcov/error.hpp"
#include "pathcov/paths.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace pathcov;

namespace {

Automaton toy() { return load_automaton(PATHCOV_MODELS_DIR "/toy.aut"); }

ErrorCode code_of(auto&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::usage;
}

} // namespace

TEST_CASE("toy model model loads")
{
    const auto a = toy();
    CHECK(a.num_states() == 4);
    CHECK(a.num_transitions() == 9);
    REQUIRE(a.initials().size() == 1);
    CHECK(a.state_name(a.initials()[0]) == "1");
    CHECK(a.finals().size() == 4);
    CHECK(a.alphabet() == std::vector<std::string>{"a", "b", "c", "d"});
    CHECK(a.outgoing(*a.find_state("1")).size() == 2);
}

TEST_CASE("parser rejects malformed models")
{
    CHECK(code_of([] {
              parse_automaton("alphabet a\nstates 1\ninitial 1\nfinal 1\ntrans 1 a 5\n");
          }) == ErrorCode::undeclared_state);
    CHECK(code_of([] {
              parse_automaton("alphabet a\nstates 1\ninitial 1\nfinal 1\ntrans 1 z 1\n");
          }) == ErrorCode::undeclared_symbol);
    CHECK(code_of([] { parse_automaton("alphabet a\nstates 1\nfinal 1\n"); }) == ErrorCode::empty_initial);
    CHECK(code_of([] { parse_automaton("alphabet a\nstates 1\ninitial 1\n"); }) == ErrorCode::empty_final);
    CHECK(code_of([] {
              parse_automaton("alphabet a\nstates 1\ninitial 1\nfinal 1\ntrans 1 a 1\ntrans 1 a 1\n");
          }) == ErrorCode::duplicate_transition);
    CHECK(code_of([] { parse_automaton("alphabet a\nbogus 1\n"); }) == ErrorCode::syntax);
    CHECK(code_of([] { parse_automaton("states 1 1\n"); }) == ErrorCode::syntax);
    CHECK(code_of([] { load_automaton("/nonexistent/model.aut"); }) == ErrorCode::io);
}

TEST_CASE("parser error names the line")
{
    try {
        parse_automaton("alphabet a\n\nstates 1\ninitial 2\nfinal 1\n");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
}

TEST_CASE("one state, no transitions")
{
    const auto a = parse_automaton("states s\ninitial s\nfinal s\n");
    CHECK(a.num_states() == 1);
    CHECK(a.num_transitions() == 0);
    CHECK(eccentricity(a) == 0);
}

TEST_CASE("comments and repeated directives")
{
    const auto a = parse_automaton("# model\nalphabet a\nalphabet b # second\nstates p\nstates q\n"
                                   "initial p\nfinal q\ntrans p a q\ntrans p b q\n");
    CHECK(a.alphabet().size() == 2);
    CHECK(a.num_states() == 2);
    CHECK(a.num_transitions() == 2);
}

TEST_CASE("serialization round trip")
{
    const auto a = toy();
    const auto text = serialize_automaton(a);
    const auto b = parse_automaton(text);
    CHECK(serialize_automaton(b) == text);
    CHECK(b.num_transitions() == a.num_transitions());
    CHECK(b.state_names() == a.state_names());
}

TEST_CASE("trim")
{
    const auto a = toy();
    CHECK(serialize_automaton(trim(a)) == serialize_automaton(a));

    const auto dead = parse_automaton("alphabet a\nstates 1 2 3\ninitial 1\nfinal 3\ntrans 1 a 2\n");
    CHECK(code_of([&] { trim(dead); }) == ErrorCode::empty_result);

    const auto partial =
        parse_automaton("alphabet a\nstates 1 2 3 4\ninitial 1\nfinal 2\ntrans 1 a 2\ntrans 1 a 3\ntrans 4 a 2\n");
    const auto r = trim_with_origin(partial);
    CHECK(r.automaton.num_states() == 2);
    CHECK(r.origin == std::vector<StateId>{0, 1});
    CHECK(r.automaton.num_transitions() == 1);
}

TEST_CASE("must-visit product of toy model on state 3")
{
    const auto a = toy();
    const auto q = *a.find_state("3");
    const auto raw = must_visit_untrimmed(a, q);
    CHECK(raw.automaton.num_states() == 8);
    const auto mv = must_visit(a, q);
    CHECK(mv.automaton.num_states() == 5);
    std::set<std::pair<std::string, int>> kept;
    for (const auto& t : mv.tags)
        kept.insert({a.state_name(t.base), t.flag});
    CHECK(kept.count({"4", 0}) == 0);
    CHECK(kept.count({"1", 1}) == 0);
    CHECK(kept.count({"2", 0}) == 0);
}

TEST_CASE("must-visit counts on the toy model")
{
    const auto a = toy();
    const auto full = num_paths(a, 3);
    const auto on1 = num_paths(must_visit(a, *a.find_state("1")).automaton, 3);
    for (std::size_t len = 1; len <= 3; ++len)
        CHECK(on1.total(len) == full.total(len));
    CHECK(num_paths(must_visit(a, *a.find_state("2")).automaton, 3).grand_total() == 4);
}

TEST_CASE("eccentricity")
{
    CHECK(eccentricity(toy()) == 2);
    for (std::size_t k : {1u, 2u, 7u, 40u})
        CHECK(eccentricity(chain_automaton(k)) == k);
}

TEST_CASE("random small automata: bijection, trim and product properties")
{
    std::mt19937 gen(7);
    for (int round = 0; round < 60; ++round) {
        const auto a = oracle::random_small_trim(gen);
        const auto n = a.num_states();
        CHECK(serialize_automaton(trim(a)) == serialize_automaton(a));
        CHECK(eccentricity(a) < n);
        const auto paths = oracle::enumerate_paths(a, 5);
        for (StateId q = 0; q < n; ++q) {
            const auto raw = must_visit_untrimmed(a, q);
            CHECK(raw.automaton.num_states() <= 2 * n);
            CHECK(raw.automaton.num_transitions() <= 3 * a.num_transitions());
            std::size_t expected = 0;
            for (const auto& p : paths)
                expected += p.visits(q) ? 1 : 0;
            mpz_class counted = 0;
            try {
                counted = num_paths(must_visit(a, q).automaton, 5).grand_total();
            } catch (const Error& e) {
                CHECK(e.code() == ErrorCode::empty_result);
            }
            CHECK(counted == expected);
        }
    }
}
