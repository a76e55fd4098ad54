#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"

#include "dcl/errors.hpp"
#include "dcl/nfa.hpp"
#include "dcl/semilinear.hpp"
#include "dcl/sre.hpp"
#include "test_support.hpp"

using namespace dcl;
using ts::W;

namespace {

const Alphabet kAb({"a", "b"});

Nfa chain_nfa(const char* text) { return sre_to_nfa(parse_sre(text), kAb); }

} // namespace

TEST_CASE("parikh word counts letters by alphabet position") {
    CHECK_EQ(parikh_word(W("aab"), kAb), CountVec({2, 1}));
    CHECK_EQ(parikh_word(W(""), kAb), CountVec({0, 0}));
    CHECK_EQ(parikh_word(W("bbb"), kAb), CountVec({0, 3}));
    CHECK_THROWS_AS(parikh_word(W("ac"), kAb), UnknownLetter);
}

TEST_CASE("linear set membership on a hand-built set") {
    SemilinearSet s;
    s.alphabet = kAb;
    s.parts.push_back(LinearSet{{1, 0}, {{0, 2}}}); // a b^(2k)
    CHECK(sls_contains(s, {1, 0}, 8));
    CHECK(sls_contains(s, {1, 4}, 8));
    CHECK_FALSE(sls_contains(s, {1, 3}, 8));
    CHECK_FALSE(sls_contains(s, {0, 0}, 8));
    CHECK_FALSE(sls_contains(s, {2, 2}, 8));
    CHECK_THROWS_AS(sls_contains(s, {1, 0, 0}, 8), ArityMismatch);
}

TEST_CASE("parikh image of a single word and of a loop") {
    SemilinearSet one = parikh_nfa(nfa_word(kAb, W("abab")));
    CHECK(sls_contains(one, {2, 2}, 8));
    CHECK_FALSE(sls_contains(one, {1, 1}, 8));
    CHECK_FALSE(sls_contains(one, {2, 1}, 8));

    // (ab)* has Parikh image {(k, k)}.
    Nfa loop(kAb);
    int p = loop.add_state(true);
    int q = loop.add_state(false);
    loop.initial = p;
    loop.add_edge(p, W("a"), q);
    loop.add_edge(q, W("b"), p);
    SemilinearSet s = parikh_nfa(loop);
    for (long long k = 0; k <= 3; ++k) CHECK(sls_contains(s, {k, k}, 8));
    CHECK_FALSE(sls_contains(s, {1, 0}, 8));
    CHECK_FALSE(sls_contains(s, {2, 3}, 8));
    CHECK_EQ(print_semilinear(parikh_nfa(nfa_empty(kAb))), "# empty\n");
}

TEST_CASE("parikh image agrees with word enumeration on random machines") {
    // Over two letters a count vector with L1 norm <= 4 can only come from a
    // word of length <= 4, so enumeration gives the exact reference set.
    std::mt19937 rng(424242);
    for (int round = 0; round < 20; ++round) {
        Nfa m = ts::random_nfa(rng, 4, kAb);
        SemilinearSet s = parikh_nfa(m);
        std::set<CountVec> reachable;
        for (const Word& w : nfa_enumerate(m, 4)) reachable.insert(parikh_word(w, kAb));
        for (long long na = 0; na <= 4; ++na) {
            for (long long nb = 0; na + nb <= 4; ++nb) {
                CountVec v{na, nb};
                CHECK_EQ(sls_contains(s, v, 4), reachable.count(v) == 1);
            }
        }
    }
}

TEST_CASE("unboundedness criterion on chain-shaped languages") {
    CHECK(sup_from_semilinear(parikh_nfa(chain_nfa("a* b*")), kAb));
    CHECK(sup_from_semilinear(parikh_nfa(chain_nfa("(a|b)*")), kAb));
    CHECK_FALSE(sup_from_semilinear(parikh_nfa(chain_nfa("a* | b*")), kAb));
    CHECK_FALSE(sup_from_semilinear(parikh_nfa(chain_nfa("a? b*")), kAb));
    CHECK_FALSE(sup_from_semilinear(parikh_nfa(chain_nfa("a? b?")), kAb));
    CHECK_FALSE(sup_from_semilinear(parikh_nfa(nfa_empty(kAb)), kAb));

    SemilinearSet s = parikh_nfa(chain_nfa("a* b*"));
    CHECK_THROWS_AS(sup_from_semilinear(s, Alphabet()), ArityMismatch);
    CHECK_THROWS_AS(sup_from_semilinear(s, Alphabet({"b", "a"})), AlphabetMismatch);
}

TEST_CASE("printed form lists bases and periods") {
    SemilinearSet s;
    s.alphabet = kAb;
    s.parts.push_back(LinearSet{{1, 0}, {{0, 2}}});
    CHECK_EQ(print_semilinear(s), "base {a:1 b:0} periods {a:0 b:2}\n");
}
