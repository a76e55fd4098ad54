// acceptance_main.cpp -- one pass/fail line per shipping criterion
#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dcl/cfg.hpp"
#include "dcl/closure.hpp"
#include "dcl/errors.hpp"
#include "dcl/indexed.hpp"
#include "dcl/nfa.hpp"
#include "dcl/semilinear.hpp"
#include "dcl/sre.hpp"
#include "dcl/transducer.hpp"
#include "test_support.hpp"

using namespace dcl;
using ts::W;

namespace {

constexpr long long kSearchBudget = 4000000;

const Alphabet kAb({"a", "b"});

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string describe_words(const std::set<Word>& ws) {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (const Word& w : ws) {
        if (!first) os << ", ";
        first = false;
        os << format_word(w);
    }
    os << "}";
    return os.str();
}

// Exhaustive bounded words, failing loudly when the search cannot close.
std::set<Word> closed_words(const IndexedGrammar& g, int max_len, const std::string& what) {
    BoundedWords bw = bounded_language(g, max_len, kSearchBudget);
    if (!bw.exhaustive) throw std::runtime_error(what + ": bounded search did not close");
    return bw.words;
}

// --- grammar corpus -----------------------------------------------------------

const char* kDoubling = // { w w : w over {a, b} }
    "terminals: a b\nindices: f g\nstart: S\n"
    "S -> S ^f\nS -> S ^g\nS -> U U\nU ?f -> a U\nU ?g -> b U\nU -> _\n";

const char* kAnbnIx = // { a^k b^k }
    "terminals: a b\nindices: f\nstart: S\n"
    "S -> S ^f\nS -> T\nT ?f -> a T b\nT -> _\n";

const char* kDiscardIx = // { ab }, via an index-discarding pop
    "terminals: a b\nindices: f g\nstart: S\n"
    "S -> T ^g\nT -> T2 ^f\nT2 ?f -> a b\nT2 -> b\n";

const char* kFiniteIx = // { aa, ab, abb, bbb }, no recursion
    "terminals: a b\nindices: f g\nstart: S\n"
    "S -> T ^f\nS -> T ^g\nT ?f -> a T2\nT ?g -> T2 b\n"
    "T2 -> a\nT2 -> U U\nU -> b\n";

const char* kStretchIx = // { a^k a b^2k }
    "terminals: a b\nindices: f\nstart: S\n"
    "S -> S ^f\nS -> T\nT ?f -> a T b b\nT -> a\n";

const char* kMessyIx = // { eps, abba, a abba b b a, ... }, exercises word splitting
    "terminals: a b\nindices: f\nstart: S\nS -> a S b T a\nS -> _\nT -> b\n";

// Members whose language sits inside a* b* (the interval-form contract).
std::vector<const char*> chain_corpus() {
    return {kAnbnIx, kDiscardIx, kFiniteIx, kStretchIx};
}

// --- criteria -----------------------------------------------------------------

// 1: engine vs saturation oracle on random machines.
std::optional<std::string> criterion_regular_end_to_end() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(1729);
    for (int round = 0; round < 200; ++round) {
        Alphabet alpha = (round % 2 == 0) ? kAb : Alphabet({"a", "b", "c"});
        Nfa m = nfa_normalize(ts::random_nfa(rng, 5, alpha));
        ClosureResult r = downward_closure_nfa(m, 100000);
        if (!nfa_equivalent(sre_to_nfa(r.sre, alpha), nfa_downward_saturate(m)))
            return "round " + std::to_string(round) + ": engine disagrees with saturation, got " +
                   print_sre(r.sre);
    }
    double secs = seconds_since(t0);
    if (secs >= 300.0) return "took " + std::to_string(secs) + "s, limit is 300s";
    return std::nullopt;
}

// 2: the showcase inputs, each equivalent to its published closure.
std::optional<std::string> criterion_showcase() {
    struct Case {
        std::string name;
        std::function<Sre()> compute;
        const char* expect;
    };
    std::vector<Case> cases = {
        {"S->aSb|eps",
         [] {
             return downward_closure_cfg(
                        parse_cfg("terminals: a b\nstart: S\nS -> a S b\nS -> _\n"), 100000)
                 .sre;
         },
         "a* b*"},
        {"S->aS|b",
         [] {
             return downward_closure_cfg(
                        parse_cfg("terminals: a b\nstart: S\nS -> a S\nS -> b\n"), 100000)
                 .sre;
         },
         "a* b?"},
        {"(ab)* automaton",
         [] {
             Nfa m(kAb);
             int p = m.add_state(true);
             int q = m.add_state(false);
             m.initial = p;
             m.add_edge(p, W("a"), q);
             m.add_edge(q, W("b"), p);
             return downward_closure_nfa(m, 100000).sre;
         },
         "(a|b)*"},
        {"finite {ab}",
         [] { return downward_closure_nfa(nfa_word(kAb, W("ab")), 100000).sre; },
         "a? b?"},
    };
    for (const Case& c : cases) {
        auto t0 = std::chrono::steady_clock::now();
        Sre got = c.compute();
        double secs = seconds_since(t0);
        if (secs >= 60.0) return c.name + " took " + std::to_string(secs) + "s, limit is 60s";
        if (!nfa_equivalent(sre_to_nfa(got, kAb), sre_to_nfa(parse_sre(c.expect), kAb)))
            return c.name + ": expected an SRE equivalent to " + std::string(c.expect) +
                   ", got " + print_sre(got);
    }
    return std::nullopt;
}

// 3: curated unboundedness answers; regular rows re-derived from saturation.
std::optional<std::string> criterion_sup_table() {
    const Alphabet abc({"a", "b", "c"});
    struct RegularRow {
        std::string name;
        Nfa machine;
        Alphabet order;
        bool expect;
    };
    auto sre_nfa = [](const char* text, const Alphabet& alpha) {
        return sre_to_nfa(parse_sre(text), alpha);
    };
    // (aa)*(bb)*: not downward closed, closure is the full chain a*b*.
    Nfa even_blocks(kAb);
    {
        int p = even_blocks.add_state(true);
        int p1 = even_blocks.add_state(false);
        int q1 = even_blocks.add_state(false);
        int q = even_blocks.add_state(true);
        even_blocks.initial = p;
        even_blocks.add_edge(p, W("a"), p1);
        even_blocks.add_edge(p1, W("a"), p);
        even_blocks.add_edge(p, W("b"), q1);
        even_blocks.add_edge(q1, W("b"), q);
        even_blocks.add_edge(q, W("b"), q1);
    }
    std::vector<RegularRow> regular = {
        {"a*b* chain", nfa_letter_chain(kAb), kAb, true},
        {"single word ab", nfa_word(kAb, W("ab")), kAb, false},
        {"a* union b*", sre_nfa("a* | b*", kAb), kAb, false},
        {"a? b*", sre_nfa("a? b*", kAb), kAb, false},
        {"a* alone", sre_nfa("a*", Alphabet({"a"})), Alphabet({"a"}), true},
        {"empty language", nfa_empty(kAb), kAb, false},
        {"even blocks (aa)*(bb)*", even_blocks, kAb, true},
        {"a*b*c* chain", nfa_letter_chain(abc), abc, true},
        {"a* b? c*", sre_nfa("a* b? c*", abc), abc, false},
        {"single word aabb", nfa_word(kAb, W("aabb")), kAb, false},
        {"a* c* skips b", sre_nfa("a* c*", abc), abc, false},
    };
    for (const RegularRow& row : regular) {
        bool oracle = nfa_equivalent(nfa_downward_saturate(row.machine),
                                     nfa_letter_chain(row.order));
        if (oracle != row.expect)
            return row.name + ": saturation oracle contradicts the curated answer";
        if (decide_sup_regular(row.machine, row.order) != row.expect)
            return row.name + ": decide_sup_regular answered " + (row.expect ? "no" : "yes");
    }

    struct CfgRow {
        std::string name;
        const char* grammar;
        bool expect; // fixed by hand proof, cross-checked by bounded enumeration
    };
    std::vector<CfgRow> cfgs = {
        {"a^n b^n", "terminals: a b\nstart: S\nS -> a S b\nS -> _\n", true},
        {"finite {ab}", "terminals: a b\nstart: S\nS -> a b\n", false},
        {"a* only", "terminals: a b\nstart: S\nS -> a S\nS -> _\n", false},
        {"two pumps", "terminals: a b\nstart: S\nS -> A B\nA -> a A\nA -> _\nB -> b B\nB -> _\n",
         true},
        {"bounded b", "terminals: a b\nstart: S\nS -> a S\nS -> b\n", false},
    };
    for (const CfgRow& row : cfgs) {
        Cfg g = parse_cfg(row.grammar);
        if (decide_sup_cfg(g, kAb) != row.expect)
            return row.name + std::string(": decide_sup_cfg answered ") +
                   (row.expect ? "no" : "yes");
        // Enumeration consistency: a full closure must exhibit subwords of
        // a^2 b^2 style corners; a non-full one must miss some chain word.
        std::set<Word> closure = ts::downward_close(cfg_enumerate(g, 8));
        bool corner = closure.count(W("aabb")) == 1;
        if (row.expect && !corner)
            return row.name + ": claimed full but aabb is not a bounded subword";
    }
    return std::nullopt;
}

// 4: the grammar Parikh image against plain word enumeration.
std::optional<std::string> criterion_parikh_two_sided() {
    std::vector<const char*> texts = {
        "terminals: a b\nstart: S\nS -> a S b\nS -> _\n",
        "terminals: a b\nstart: S\nS -> a S b\nS -> a\n",
        "terminals: a b\nstart: S\nS -> a S b\nS -> b\n",
        "terminals: a b\nstart: S\nS -> a S a\nS -> b\n",
        "terminals: a b\nstart: S\nS -> a S\nS -> b S\nS -> _\n",
        "terminals: a b\nstart: S\nS -> a b S\nS -> b S\nS -> _\n",
        "terminals: a b\nstart: S\nS -> a S\nS -> _\n",
        "terminals: a b\nstart: S\nS -> a S\nS -> b\n",
        "terminals: a b\nstart: S\nS -> a\n",
        "terminals: a b\nstart: S\nS -> a b\nS -> b a\n",
        "terminals: a b\nstart: S\nS -> a a S\nS -> b\n",
        "terminals: a b\nstart: S\nS -> a S b b\nS -> _\n",
        "terminals: a b\nstart: S\nS -> A B\nA -> a A\nA -> _\nB -> b B\nB -> _\n",
        "terminals: a b\nstart: S\nS -> A B\nA -> a A\nA -> a\nB -> b\n",
        "terminals: a b\nstart: S\nS -> A A\nA -> a A b\nA -> _\n",
        "terminals: a b\nstart: S\nS -> a S a\nS -> b S b\nS -> _\n",
        "terminals: a b\nstart: S\nS -> a T\nT -> b S\nS -> _\n",
        "terminals: a b\nstart: S\nS -> T T\nT -> a T a\nT -> b\n",
        "terminals: a b\nstart: S\nS -> a\nS -> b\nS -> a S\nS -> b S\n",
        "terminals: a b\nstart: S\nS -> A\nA -> B\nB -> a B b\nB -> a\n",
        "terminals: a b\nstart: S\nS -> _\n",
        "terminals: a b\nstart: S\nS -> a b a b\n",
    };
    for (std::size_t i = 0; i < texts.size(); ++i) {
        Cfg g = parse_cfg(texts[i]);
        SemilinearSet s = cfg_parikh(g);
        std::set<CountVec> reachable;
        for (const Word& w : cfg_enumerate(g, 8)) reachable.insert(parikh_word(w, kAb));
        for (long long na = 0; na <= 8; ++na) {
            for (long long nb = 0; na + nb <= 8; ++nb) {
                CountVec v{na, nb};
                bool in_set = sls_contains(s, v, 8);
                bool realized = reachable.count(v) == 1;
                if (in_set != realized)
                    return "grammar " + std::to_string(i) + ", vector (" + std::to_string(na) +
                           "," + std::to_string(nb) + "): parikh says " +
                           (in_set ? "yes" : "no") + ", enumeration says " +
                           (realized ? "yes" : "no");
            }
        }
    }
    return std::nullopt;
}

// 5: the grammar transformations preserve bounded languages.
std::optional<std::string> criterion_indexed_transforms() {
    // The doubling grammar's frozen bounded set.
    std::set<Word> ww = closed_words(parse_indexed(kDoubling), 4, "doubling grammar");
    std::set<Word> frozen;
    for (const char* w : {"", "aa", "bb", "aaaa", "abab", "baba", "bbbb"}) frozen.insert(W(w));
    if (ww != frozen)
        return "doubling grammar at length 4: got " + describe_words(ww);

    // normalize preserves bounded languages on the whole corpus.
    for (const char* text :
         {kDoubling, kAnbnIx, kDiscardIx, kFiniteIx, kStretchIx, kMessyIx}) {
        IndexedGrammar g = parse_indexed(text);
        std::set<Word> before = closed_words(g, 5, "corpus grammar");
        std::set<Word> after = closed_words(normalize(g), 5, "normalized grammar");
        if (before != after)
            return std::string("normalize changed the bounded language: ") +
                   describe_words(before) + " vs " + describe_words(after);
    }

    // to_interval preserves bounded languages where its contract holds, and
    // to_productive then drops exactly the empty word.
    for (const char* text : chain_corpus()) {
        IndexedGrammar g = parse_indexed(text);
        std::set<Word> before = closed_words(g, 5, "chain corpus grammar");
        IntervalGrammar iv = to_interval(normalize(g));
        std::set<Word> after = closed_words(iv.grammar, 5, "interval grammar");
        if (before != after)
            return std::string("to_interval changed the bounded language: ") +
                   describe_words(before) + " vs " + describe_words(after);

        IntervalGrammar pr = to_productive(iv);
        std::set<Word> nonempty = before;
        nonempty.erase(Word{});
        std::set<Word> productive = closed_words(pr.grammar, 5, "productive grammar");
        if (productive != nonempty)
            return std::string("to_productive is not original minus epsilon: ") +
                   describe_words(productive) + " vs " + describe_words(nonempty);
    }

    // triple_construct against the direct transducer-image oracle.
    IndexedGrammar fin = normalize(parse_indexed(kFiniteIx));
    std::set<Word> base = closed_words(fin, 4, "finite grammar");
    std::vector<Transducer> transducers = {identity_transduction(kAb),
                                           subword_transduction(kAb)};
    for (const Transducer& t : transducers) {
        std::set<Word> got = closed_words(triple_construct(fin, t), 4, "triple grammar");
        std::set<Word> want = ts::transducer_image(t, base, 4);
        if (got != want)
            return "triple image mismatch: got " + describe_words(got) + ", oracle " +
                   describe_words(want);
    }
    return std::nullopt;
}

// 6: the index-word automaton against exhaustive derivation search.
std::optional<std::string> criterion_index_words() {
    struct Probe {
        std::string name;
        const char* grammar;
        std::string from;
        std::function<Nfa()> target;
        int search_len;
        const char* expect_sre; // empty: no closed form pinned
    };
    Alphabet fg({"f", "g"});
    std::vector<Probe> probes = {
        {"doubling from U, any target", kDoubling, "U",
         [] { return nfa_universal(kAb); }, 4, "(f|g)*"},
        {"g-blocking variant from U", // only f can be consumed
         "terminals: a\nindices: f g\nstart: U\nU ?f -> A\nA -> U\nU -> _\n", "U",
         [] { return nfa_universal(Alphabet({"a"})); }, 2, "f*"},
        {"doubling from S to abab", kDoubling, "S",
         [] { return nfa_word(kAb, W("abab")); }, 4, ""},
        {"counting grammar from T to aabb", kAnbnIx, "T",
         [] { return nfa_word(kAb, W("aabb")); }, 4, ""},
        {"discarding grammar from T2 to ab", kDiscardIx, "T2",
         [] { return nfa_word(kAb, W("ab")); }, 2, ""},
    };
    for (const Probe& probe : probes) {
        IndexedGrammar g = parse_indexed(probe.grammar);
        Nfa target = probe.target();
        Nfa iw = iw_automaton(g, probe.from, target);
        if (probe.expect_sre[0] != '\0') {
            if (!nfa_equivalent(iw, sre_to_nfa(parse_sre(probe.expect_sre), g.indices)))
                return probe.name + ": automaton differs from " + probe.expect_sre;
        }
        for (const Word& x : ts::all_words(g.indices, 3)) {
            BoundedWords bw = bounded_language_from(g, {sf_nonterminal(probe.from, x)},
                                                    probe.search_len, kSearchBudget);
            if (!bw.exhaustive)
                return probe.name + ": derivation search did not close at " + format_word(x);
            bool reaches = false;
            for (const Word& w : bw.words)
                if (nfa_accepts(target, w)) reaches = true;
            if (nfa_accepts(iw, x) != reaches)
                return probe.name + ": disagreement at index word " + format_word(x);
        }
    }
    return std::nullopt;
}

// 7: the correspondence-instance generator and the 2-adic encoding.
std::optional<std::string> criterion_pcp() {
    std::map<Symbol, Word> one{{"x", W("1")}};
    IndexedGrammar pg = pcp_grammar(Alphabet({"x"}), one, one);
    BoundedWords bw = bounded_language(pg, 8, kSearchBudget);
    std::set<Word> expect{W("ab"), W("aaabbb")};
    if (bw.words != expect)
        return "bounded words at length 8: got " + describe_words(bw.words);

    std::set<long long> seen;
    for (const Word& w : ts::all_words(Alphabet({"1", "2"}), 6)) {
        if (!seen.insert(nu(w)).second) return "2-adic value repeats at word " + format_word(w);
    }
    return std::nullopt;
}

// 8: partitioned members never invent new subword content.
std::optional<std::string> criterion_partition_domination() {
    for (const char* text : chain_corpus()) {
        IntervalGrammar iv = to_interval(normalize(parse_indexed(text)));
        std::set<Word> source = bounded_language(iv.grammar, 12, kSearchBudget).words;
        for (const PartitionedGrammar& member : partitioned_family(iv)) {
            std::set<Word> words =
                bounded_language(member.grammar.grammar, 6, kSearchBudget).words;
            for (const Word& w : words) {
                bool dominated = false;
                for (const Word& s : source)
                    if (ts::is_subword(w, s)) dominated = true;
                if (!dominated)
                    return format_word(w) + " from a member of " +
                           std::string(text).substr(0, 24) + "... embeds in no source word";
            }
        }
    }
    return std::nullopt;
}

} // namespace

int main() {
    struct Criterion {
        std::string name;
        std::function<std::optional<std::string>()> run;
    };
    std::vector<Criterion> criteria = {
        {"random regular closures match the saturation oracle", criterion_regular_end_to_end},
        {"showcase closures are exact", criterion_showcase},
        {"unboundedness table matches its oracles", criterion_sup_table},
        {"grammar Parikh images are two-sided exact", criterion_parikh_two_sided},
        {"indexed transformations preserve bounded languages", criterion_indexed_transforms},
        {"index-word automata match derivation search", criterion_index_words},
        {"correspondence generator and 2-adic encoding", criterion_pcp},
        {"partitioned members are subword-dominated", criterion_partition_domination},
    };

    bool all_pass = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        std::string label = "criterion-" + std::to_string(i + 1);
        std::optional<std::string> failure;
        try {
            failure = criteria[i].run();
        } catch (const std::exception& e) {
            failure = std::string("exception: ") + e.what();
        }
        if (failure) {
            all_pass = false;
            std::cout << "FAIL " << label << ": " << criteria[i].name << " -- " << *failure
                      << "\n";
        } else {
            std::cout << "PASS " << label << ": " << criteria[i].name << "\n";
        }
    }
    return all_pass ? 0 : 1;
}
