#include <random>
#include <set>
#include <string>

#include "doctest.h"

#include "dcl/errors.hpp"
#include "dcl/nfa.hpp"
#include "test_support.hpp"

using namespace dcl;
using ts::W;
using ts::WS;

namespace {

const char* kAbLoop = R"(
alphabet: a b
state: q0 initial final
state: q1
edge: q0 a q1
edge: q1 b q0
)";

Nfa ab_loop() { return parse_nfa(kAbLoop, "ab_loop"); }

} // namespace

TEST_CASE("nfa parse and membership") {
    Nfa m = ab_loop();
    CHECK(nfa_accepts(m, {}));
    CHECK(nfa_accepts(m, W("ab")));
    CHECK(nfa_accepts(m, W("abab")));
    CHECK_FALSE(nfa_accepts(m, W("a")));
    CHECK_FALSE(nfa_accepts(m, W("ba")));
    CHECK_THROWS_AS(nfa_accepts(m, W("ac")), UnknownLetter);
}

TEST_CASE("nfa parse errors carry location") {
    CHECK_THROWS_AS(parse_nfa("state: q0 initial\n", "x"), ParseError);
    CHECK_THROWS_AS(parse_nfa("alphabet: a\nstate: q0 initial\nedge: q0 a q9\n", "x"),
                    ParseError);
    CHECK_THROWS_AS(parse_nfa("alphabet: a a\nstate: q0 initial\n", "x"), ParseError);
    try {
        parse_nfa("alphabet: a\nstate: q0 initial\nedge: q0 b q0\n", "bad.nfa");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK_EQ(e.file(), "bad.nfa");
        CHECK_EQ(e.line(), 3);
    }
}

TEST_CASE("nfa print round trip") {
    Nfa m = ab_loop();
    Nfa again = parse_nfa(print_nfa(m), "round");
    CHECK(nfa_equivalent(m, again));
}

TEST_CASE("nfa word-labeled edges normalize away") {
    Nfa m = parse_nfa(R"(
alphabet: a b
state: q0 initial
state: q1 final
edge: q0 a b a q1
edge: q1 _ q0
)",
                      "words");
    Nfa n = nfa_normalize(m);
    for (const Edge& e : n.edges) CHECK(e.label.size() <= 1);
    CHECK(nfa_equivalent(m, n));
    CHECK_WORDS(nfa_enumerate(m, 6), WS({"aba", "abaaba"}));
}

TEST_CASE("nfa boolean operations agree with membership") {
    Alphabet ab({"a", "b"});
    std::mt19937 rng(20240817);
    std::set<Word> probes = ts::all_words(ab, 4);
    for (int round = 0; round < 25; ++round) {
        Nfa x = ts::random_nfa(rng, 4, ab);
        Nfa y = ts::random_nfa(rng, 4, ab);
        Nfa prod = nfa_product(x, y);
        Nfa comp = nfa_complement(x, ab);
        for (const Word& w : probes) {
            CHECK_EQ(nfa_accepts(prod, w), nfa_accepts(x, w) && nfa_accepts(y, w));
            CHECK_EQ(nfa_accepts(comp, w), !nfa_accepts(x, w));
        }
        CHECK(nfa_is_empty(nfa_product(x, comp)));
        CHECK(nfa_equivalent(x, x));
    }
}

TEST_CASE("nfa transformations preserve the language") {
    Alphabet ab({"a", "b"});
    std::mt19937 rng(7);
    for (int round = 0; round < 25; ++round) {
        Nfa m = ts::random_nfa(rng, 5, ab);
        CHECK(nfa_equivalent(m, nfa_trim(m)));
        CHECK(nfa_equivalent(m, nfa_remove_epsilon(m)));
        Nfa d = nfa_determinize(m);
        CHECK(nfa_equivalent(m, d));
        // determinism: exactly one successor per state and letter
        for (int s = 0; s < d.state_count(); ++s) {
            for (const Symbol& a : ab) {
                int count = 0;
                for (const Edge& e : d.edges)
                    if (e.from == s && e.label == Word{a}) ++count;
                CHECK_EQ(count, 1);
            }
        }
    }
}

TEST_CASE("nfa downward saturation equals the subword oracle on finite languages") {
    Alphabet ab({"a", "b"});
    Nfa m = nfa_word(ab, W("abab"));
    CHECK_WORDS(nfa_enumerate(nfa_downward_saturate(m), 4), ts::downward_close(WS({"abab"})));
}

TEST_CASE("nfa downward saturation on random automata") {
    Alphabet ab({"a", "b"});
    std::mt19937 rng(99);
    for (int round = 0; round < 20; ++round) {
        Nfa m = ts::random_nfa(rng, 5, ab);
        Nfa sat = nfa_downward_saturate(m);
        std::set<Word> sat_words = nfa_enumerate(sat, 3);
        // everything accepted stays accepted, all subwords of short words appear
        for (const Word& w : ts::downward_close(nfa_enumerate(m, 3)))
            CHECK(sat_words.count(w));
        // and saturated words embed into some accepted word
        std::set<Word> long_words = nfa_enumerate(m, 8);
        for (const Word& w : sat_words) {
            bool embeds = false;
            for (const Word& v : long_words) embeds = embeds || ts::is_subword(w, v);
            CHECK_MESSAGE(embeds, "no superword for " << format_word(w));
        }
    }
}

TEST_CASE("nfa constructors") {
    Alphabet ab({"a", "b"});
    CHECK(nfa_is_empty(nfa_empty(ab)));
    CHECK(nfa_accepts(nfa_universal(ab), W("bab")));
    CHECK(nfa_accepts(nfa_word(ab, W("ab")), W("ab")));
    CHECK_FALSE(nfa_accepts(nfa_word(ab, W("ab")), W("a")));
    Nfa chain = nfa_letter_chain(ab);
    CHECK(nfa_accepts(chain, W("aabb")));
    CHECK(nfa_accepts(chain, {}));
    CHECK_FALSE(nfa_accepts(chain, W("ba")));
    Nfa has_b = nfa_containing_letter(ab, "b");
    CHECK(nfa_accepts(has_b, W("aba")));
    CHECK_FALSE(nfa_accepts(has_b, W("aa")));
}

TEST_CASE("nfa dot output is stable") {
    Nfa m = ab_loop();
    std::string d1 = nfa_to_dot(m);
    std::string d2 = nfa_to_dot(m);
    CHECK_EQ(d1, d2);
    CHECK(d1.find("digraph") != std::string::npos);
}
