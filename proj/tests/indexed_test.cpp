#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"

#include "dcl/errors.hpp"
#include "dcl/indexed.hpp"
#include "dcl/nfa.hpp"
#include "dcl/sre.hpp"
#include "dcl/transducer.hpp"
#include "test_support.hpp"

using namespace dcl;
using ts::W;
using ts::WS;

namespace {

constexpr long long kBudget = 2000000;

const Alphabet kAb({"a", "b"});

// L = { w w : w over {a, b} }, spelled by pushing a choice word onto the
// index and reading it back twice.
const char* kDoubling =
    "terminals: a b\n"
    "indices: f g\n"
    "start: S\n"
    "S -> S ^f\n"
    "S -> S ^g\n"
    "S -> U U\n"
    "U ?f -> a U\n"
    "U ?g -> b U\n"
    "U -> _\n";

// L = { a^k b^k }, with the count pushed onto the index first.
const char* kAnbn =
    "terminals: a b\n"
    "indices: f\n"
    "start: S\n"
    "S -> S ^f\n"
    "S -> T\n"
    "T ?f -> a T b\n"
    "T -> _\n";

// A pop whose right-hand side is all-terminal discards the remaining index.
const char* kDiscard =
    "terminals: a b\n"
    "indices: f g\n"
    "start: S\n"
    "S -> T ^g\n"
    "T -> T2 ^f\n"
    "T2 ?f -> a b\n"
    "T2 -> b\n";

// Index depth at most one and no recursion; L = {aa, ab, abb, bbb}.
const char* kFinite =
    "terminals: a b\n"
    "indices: f g\n"
    "start: S\n"
    "S -> T ^f\n"
    "S -> T ^g\n"
    "T ?f -> a T2\n"
    "T ?g -> T2 b\n"
    "T2 -> a\n"
    "T2 -> U U\n"
    "U -> b\n";

bool normal_shapes(const IndexedGrammar& g) {
    for (const IProduction& p : g.productions) {
        if (p.push_index || p.pop_index) {
            if (p.push_index && p.pop_index) return false;
            if (p.rhs.size() != 1 || p.rhs[0].is_terminal) return false;
            continue;
        }
        std::size_t nts = 0;
        for (const CfgSym& s : p.rhs)
            if (!s.is_terminal) ++nts;
        if (nts > 2) return false;
        if (nts == 2 && p.rhs.size() != 2) return false;
    }
    return true;
}

std::set<Word> words_of(const IndexedGrammar& g, int max_len, bool require_exhaustive) {
    BoundedWords bw = bounded_language(g, max_len, kBudget);
    if (require_exhaustive) CHECK(bw.exhaustive);
    return bw.words;
}

} // namespace

TEST_CASE("indexed parse and print round trip") {
    IndexedGrammar g = parse_indexed(kDoubling);
    CHECK_EQ(g.start, "S");
    CHECK_EQ(g.terminals, kAb);
    CHECK_EQ(g.indices, Alphabet({"f", "g"}));
    CHECK_EQ(g.nonterminals(), std::vector<std::string>({"S", "U"}));
    CHECK_EQ(print_indexed(parse_indexed(print_indexed(g))), print_indexed(g));

    IndexedFile file = parse_indexed_file(
        "terminals: a b\nindices: f\nstart: S\nS -> _\ninterval: S 1 2\ndirect: b\n");
    CHECK_EQ(file.iota.at("S"), std::make_pair(1, 2));
    CHECK_EQ(file.direct, std::set<Symbol>({"b"}));
}

TEST_CASE("indexed parse rejects malformed input") {
    CHECK_THROWS_AS(parse_indexed("terminals: a\nindices: f\nS -> a\n"), ParseError);
    CHECK_THROWS_AS(parse_indexed("terminals: a\nindices: a\nstart: S\n"), ParseError);
    CHECK_THROWS_AS(parse_indexed("terminals: a\nindices: f\nstart: S\nS ?f -> S ^f\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_indexed("terminals: a\nindices: f\nstart: S\nS -> S ^h\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_indexed("terminals: a\nindices: f\nstart: S\nS -> a f\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_indexed("terminals: a\nindices: f\nstart: S\na -> a\n"), ParseError);
    CHECK_THROWS_AS(parse_indexed("terminals: a\nindices: f\nstart: S\nS -> a S ^f\n"),
                    ParseError);
    try {
        parse_indexed("terminals: a\nindices: f\nstart: S\nS -> T\nT ?g -> a\n", "g.ix");
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK_EQ(e.file(), "g.ix");
        CHECK_EQ(e.line(), 5);
    }
}

TEST_CASE("one derivation step from a sentential form") {
    IndexedGrammar g = parse_indexed(kDoubling);

    std::set<SententialForm> from_start = derive_step(g, sf_start(g));
    std::set<SententialForm> expect_start{
        {sf_nonterminal("S", W("f"))},
        {sf_nonterminal("S", W("g"))},
        {sf_nonterminal("U"), sf_nonterminal("U")},
    };
    CHECK_EQ(from_start, expect_start);

    // The index word is read from the front; the rest flows to the body.
    std::set<SententialForm> from_u = derive_step(g, {sf_nonterminal("U", W("gf"))});
    std::set<SententialForm> expect_u{{sf_terminal("b"), sf_nonterminal("U", W("f"))}};
    CHECK_EQ(from_u, expect_u);

    // Terminal productions require an empty index word.
    CHECK_EQ(derive_step(g, {sf_nonterminal("U", W("f"))}),
             std::set<SententialForm>{{sf_terminal("a"), sf_nonterminal("U")}});
    CHECK_EQ(derive_step(g, {sf_nonterminal("U")}), std::set<SententialForm>{{}});
}

TEST_CASE("bounded words of the doubling grammar") {
    BoundedWords bw = bounded_language(parse_indexed(kDoubling), 4, kBudget);
    CHECK(bw.exhaustive);
    CHECK_WORDS(bw.words, WS({"", "aa", "bb", "aaaa", "abab", "baba", "bbbb"}));
}

TEST_CASE("bounded search stays sound when it cannot close") {
    // The push loop stays cheap forever because the pop discards the index,
    // so no length bound ever empties the frontier.
    IndexedGrammar g = parse_indexed(
        "terminals: a b\n"
        "indices: f\n"
        "start: S\n"
        "S -> S ^f\n"
        "S -> T\n"
        "T ?f -> a\n"
        "T -> b\n");
    BoundedWords bw = bounded_language(g, 4, 200000);
    CHECK_FALSE(bw.exhaustive);
    CHECK_WORDS(bw.words, WS({"a", "b"}));
}

TEST_CASE("index discarding on all-terminal pops") {
    BoundedWords bw = bounded_language(parse_indexed(kDiscard), 4, kBudget);
    CHECK(bw.exhaustive);
    CHECK_WORDS(bw.words, WS({"ab"}));
}

TEST_CASE("normal form rewrites keep the bounded language") {
    std::vector<std::pair<const char*, int>> cases = {
        {kDoubling, 4},
        {kAnbn, 6},
        {kDiscard, 4},
        {kFinite, 4},
        {"terminals: a b\nindices: f\nstart: S\nS -> a S b T a\nS -> _\nT -> b\n", 6},
    };
    for (const auto& [text, len] : cases) {
        IndexedGrammar g = parse_indexed(text);
        IndexedGrammar n = normalize(g);
        CHECK(normal_shapes(n));
        CHECK_EQ(ts::dump(words_of(n, len, true)), ts::dump(words_of(g, len, true)));
    }
}

TEST_CASE("interval form keeps the language of a chain-bounded grammar") {
    IntervalGrammar iv = to_interval(normalize(parse_indexed(kAnbn)));
    CHECK(normal_shapes(iv.grammar));
    CHECK_EQ(iv.iota.at(iv.grammar.start), std::make_pair(1, 2));
    for (const std::string& nt : iv.grammar.nonterminals()) {
        auto [i, j] = iv.iota.at(nt);
        CHECK(1 <= i);
        CHECK(i <= j);
        CHECK(j <= 2);
    }
    CHECK_WORDS(words_of(iv.grammar, 6, true), WS({"", "ab", "aabb", "aaabbb"}));

    std::string text = print_interval(iv);
    IndexedFile file = parse_indexed_file(text);
    CHECK_EQ(file.iota, iv.iota);
    CHECK_EQ(print_indexed(file.grammar), print_indexed(iv.grammar));

    CHECK_THROWS_AS(to_interval(parse_indexed("terminals:\nindices:\nstart: S\nS -> _\n")),
                    NotBoundedForm);
}

TEST_CASE("productive form drops exactly the empty word") {
    auto productive_of = [](const char* text) {
        return to_productive(to_interval(normalize(parse_indexed(text))));
    };

    IntervalGrammar pr = productive_of(kAnbn);
    for (const IProduction& p : pr.grammar.productions) CHECK_FALSE(p.rhs.empty());
    CHECK_WORDS(words_of(pr.grammar, 6, true), WS({"ab", "aabb", "aaabbb"}));

    // An inner nonterminal that only erases: the surrounding letters must
    // survive without it.
    IntervalGrammar gap = productive_of("terminals: a b\nindices:\nstart: S\nS -> a B b\nB -> _\n");
    for (const IProduction& p : gap.grammar.productions) CHECK_FALSE(p.rhs.empty());
    CHECK_WORDS(words_of(gap.grammar, 4, true), WS({"ab"}));

    CHECK_WORDS(words_of(productive_of(kDiscard).grammar, 4, true), WS({"ab"}));

    // A language of only the empty word becomes empty.
    IntervalGrammar none = productive_of("terminals: a b\nindices:\nstart: S\nS -> _\n");
    CHECK_WORDS(words_of(none.grammar, 4, true), WS({}));

    IntervalGrammar missing = to_interval(normalize(parse_indexed(kAnbn)));
    missing.iota.clear();
    CHECK_THROWS_AS(to_productive(missing), ParseError);
}

TEST_CASE("transduction images of an indexed grammar") {
    IndexedGrammar g = normalize(parse_indexed(kFinite));
    std::set<Word> language = words_of(g, 4, true);
    CHECK_EQ(ts::dump(language), ts::dump(WS({"aa", "ab", "abb", "bbb"})));

    IndexedGrammar same = triple_construct(g, identity_transduction(kAb));
    CHECK_EQ(ts::dump(words_of(same, 4, true)), ts::dump(language));

    IndexedGrammar closed = triple_construct(g, subword_transduction(kAb));
    CHECK_EQ(ts::dump(words_of(closed, 4, true)),
             ts::dump(ts::transducer_image(subword_transduction(kAb), language, 4)));

    Transducer erase_b = parse_transducer(
        "alphabet: a b\noutput: a\nstate: q initial final\nedge: q a a q\nedge: q b _ q\n");
    IndexedGrammar erased = triple_construct(g, erase_b);
    CHECK_EQ(ts::dump(words_of(erased, 4, false)),
             ts::dump(ts::transducer_image(erase_b, language, 4)));

    CHECK_THROWS_AS(triple_construct(g, subword_transduction(Alphabet({"a"}))),
                    AlphabetMismatch);
}

TEST_CASE("index words that reach a regular target") {
    IndexedGrammar ww = parse_indexed(kDoubling);
    Alphabet fg({"f", "g"});

    // From U every index word is consumed letter by letter, so anything works.
    Nfa all = iw_automaton(ww, "U", nfa_universal(kAb));
    CHECK(nfa_equivalent(all, sre_to_nfa(parse_sre("(f|g)*"), fg)));

    // The image of the index word must spell the target word exactly.
    Nfa ab_only = iw_automaton(ww, "U", nfa_word(kAb, W("ab")));
    CHECK(nfa_equivalent(ab_only, nfa_word(fg, W("fg"))));

    // From S the accepted index words are the suffixes of the witnesses.
    Nfa aa_start = iw_automaton(ww, "S", nfa_word(kAb, W("aa")));
    CHECK(nfa_equivalent(aa_start, sre_to_nfa(parse_sre("f?"), fg)));

    // An unused index letter shrinks the accepted set accordingly.
    IndexedGrammar fstar = parse_indexed(
        "terminals: a\nindices: f g\nstart: U\nU ?f -> A\nA -> U\nU -> _\n");
    Nfa only_f = iw_automaton(fstar, "U", nfa_universal(Alphabet({"a"})));
    CHECK(nfa_equivalent(only_f, sre_to_nfa(parse_sre("f*"), fg)));
}

TEST_CASE("index automaton agrees with direct derivation search") {
    IndexedGrammar ww = parse_indexed(kDoubling);
    Nfa target = nfa_word(kAb, W("abab"));
    Nfa iw = iw_automaton(ww, "S", target);
    for (const Word& x : ts::all_words(Alphabet({"f", "g"}), 3)) {
        BoundedWords bw = bounded_language_from(ww, {sf_nonterminal("S", x)}, 4, kBudget);
        CHECK(bw.exhaustive);
        bool reaches = false;
        for (const Word& w : bw.words)
            if (nfa_accepts(target, w)) reaches = true;
        CHECK_EQ(nfa_accepts(iw, x), reaches);
    }
}

TEST_CASE("partitioned family covers the interval grammar") {
    IntervalGrammar iv = to_interval(normalize(parse_indexed(kAnbn)));
    std::vector<PartitionedGrammar> family = partitioned_family(iv);
    REQUIRE_EQ(family.size(), 4);
    CHECK_EQ(family[0].direct, std::set<Symbol>({}));
    CHECK_EQ(family[1].direct, std::set<Symbol>({"a"}));
    CHECK_EQ(family[2].direct, std::set<Symbol>({"b"}));
    CHECK_EQ(family[3].direct, std::set<Symbol>({"a", "b"}));

    std::set<Word> source = bounded_language(iv.grammar, 12, kBudget).words;
    for (const PartitionedGrammar& member : family) {
        for (const std::string& nt : member.grammar.grammar.nonterminals())
            CHECK(member.grammar.iota.count(nt) == 1);
        std::set<Word> words = bounded_language(member.grammar.grammar, 6, kBudget).words;
        for (const Word& w : words) {
            bool dominated = false;
            for (const Word& s : source)
                if (ts::is_subword(w, s)) dominated = true;
            CHECK(dominated);
        }
    }

    std::string text = print_partitioned(family[1]);
    IndexedFile file = parse_indexed_file(text);
    CHECK_EQ(file.direct, family[1].direct);
    CHECK_EQ(file.iota, family[1].grammar.iota);
}

TEST_CASE("partitioned family edge cases") {
    IntervalGrammar one = to_interval(normalize(parse_indexed(
        "terminals: a\nindices: f\nstart: S\nS -> S ^f\nS -> T\nT ?f -> a T\nT -> _\n")));
    std::vector<PartitionedGrammar> family = partitioned_family(one);
    REQUIRE_EQ(family.size(), 1);
    CHECK(family[0].direct.empty());
    CHECK_EQ(print_interval(family[0].grammar), print_interval(one));

    IntervalGrammar missing = to_interval(normalize(parse_indexed(kAnbn)));
    missing.iota.erase(missing.iota.begin());
    CHECK_THROWS_AS(partitioned_family(missing), ParseError);

    std::vector<Symbol> nine;
    for (int i = 1; i <= 9; ++i) nine.push_back("t" + std::to_string(i));
    IndexedGrammar g9(Alphabet(nine), Alphabet(), "S");
    g9.productions.push_back(IProduction{"S", std::nullopt, std::nullopt, {}});
    IntervalGrammar ig9{g9, {{"S", {1, 9}}}};
    CHECK_THROWS_AS(partitioned_family(ig9), BudgetExhausted);
}

TEST_CASE("2-adic values enumerate nonempty digit words") {
    CHECK_EQ(nu(W("")), 0);
    CHECK_EQ(nu(W("1")), 1);
    CHECK_EQ(nu(W("2")), 2);
    CHECK_EQ(nu(W("11")), 3);
    CHECK_EQ(nu(W("12")), 4);
    CHECK_EQ(nu(W("21")), 5);
    CHECK_EQ(nu(W("22")), 6);
    CHECK_EQ(nu(W("111")), 7);
    CHECK_THROWS_AS(nu(W("13")), UnknownLetter);

    std::set<long long> seen;
    for (const Word& w : ts::all_words(Alphabet({"1", "2"}), 6)) CHECK(seen.insert(nu(w)).second);
}

TEST_CASE("correspondence grammar pairs the two 2-adic counts") {
    Alphabet x({"x"});
    std::map<Symbol, Word> alpha{{"x", W("1")}};
    IndexedGrammar pg = pcp_grammar(x, alpha, alpha);
    BoundedWords bw = bounded_language(pg, 8, kBudget);
    CHECK_WORDS(bw.words, WS({"ab", "aaabbb"}));

    CHECK_THROWS_AS(pcp_grammar(Alphabet({"1"}), {{"1", W("1")}}, {{"1", W("1")}}),
                    AlphabetMismatch);
    CHECK_THROWS_AS(pcp_grammar(x, {}, alpha), ArityMismatch);
    CHECK_THROWS_AS(pcp_grammar(x, {{"x", W("3")}}, alpha), UnknownLetter);
}
