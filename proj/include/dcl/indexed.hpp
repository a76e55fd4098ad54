// indexed.hpp -- indexed grammars: derivations, transformations, generators
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dcl/alphabet.hpp"
#include "dcl/cfg.hpp"
#include "dcl/nfa.hpp"
#include "dcl/transducer.hpp"

namespace dcl {

// One indexed production. Exactly one of these shapes:
//   general:  A -> w          (w over nonterminals and terminals)
//   push:     A -> B ^f       (pop_index empty, push_index set, rhs = B)
//   pop:      A ?f -> w       (pop_index set, push_index empty)
// Terminal productions (w all-terminal) apply only to nonterminals whose
// index word is empty.
struct IProduction {
    std::string lhs;
    std::optional<Symbol> pop_index;
    std::optional<Symbol> push_index;
    std::vector<CfgSym> rhs;
};

class IndexedGrammar {
public:
    IndexedGrammar() = default;
    IndexedGrammar(Alphabet t, Alphabet i, std::string s)
        : terminals(std::move(t)), indices(std::move(i)), start(std::move(s)) {}

    Alphabet terminals;
    Alphabet indices;
    std::string start = "S";
    std::vector<IProduction> productions;

    // Start symbol, then left-hand sides, then right-hand-side names, in
    // first-appearance order.
    std::vector<std::string> nonterminals() const;
};

// An item of a sentential form: a terminal letter, or a nonterminal
// carrying an index word (top of the index at the front).
struct SfItem {
    bool is_terminal = false;
    Symbol letter;    // set when is_terminal
    std::string nt;   // set otherwise
    Word index;

    friend bool operator<(const SfItem& a, const SfItem& b) {
        if (a.is_terminal != b.is_terminal) return a.is_terminal < b.is_terminal;
        if (a.letter != b.letter) return a.letter < b.letter;
        if (a.nt != b.nt) return a.nt < b.nt;
        return a.index < b.index;
    }
    friend bool operator==(const SfItem& a, const SfItem& b) {
        return a.is_terminal == b.is_terminal && a.letter == b.letter && a.nt == b.nt &&
               a.index == b.index;
    }
};
using SententialForm = std::vector<SfItem>;

SfItem sf_terminal(const Symbol& a);
SfItem sf_nonterminal(const std::string& nt, Word index = {});
SententialForm sf_start(const IndexedGrammar& g);

// All one-step successors. Terminal productions never fire on a
// nonterminal with a nonempty index word.
std::set<SententialForm> derive_step(const IndexedGrammar& g, const SententialForm& sf);

struct BoundedWords {
    std::set<Word> words;
    bool exhaustive = false;
};

// Terminal words of length <= max_len found by breadth-first derivation
// search from the start form. Forms are pruned by an exact per-item lower
// bound on derivable word length, so push loops whose yields are forced
// past max_len close out. exhaustive is true only when the search frontier
// emptied without hitting the expansion budget, the sentential-length cap,
// or the index-depth cap.
BoundedWords bounded_language(const IndexedGrammar& g, int max_len, long long budget);
BoundedWords bounded_language_from(const IndexedGrammar& g, const SententialForm& init,
                                   int max_len, long long budget);

// Rewrites every production into one of the five shapes push A->B^f,
// pop A?f->B, output A->uBv, split A->BC, terminal A->w.
IndexedGrammar normalize(const IndexedGrammar& g);

// Image of L(g) under the transduction, as an indexed grammar over the
// transducer's output alphabet. g must be in normal form and share its
// terminal alphabet with t's input side.
IndexedGrammar triple_construct(const IndexedGrammar& g, const Transducer& t);

// Automaton over g's index alphabet accepting { x : exists y in L(r) with
// A x =>* y }. r must be over g's terminal alphabet.
Nfa iw_automaton(const IndexedGrammar& g, const std::string& a, const Nfa& r);

// An indexed grammar in normal form whose nonterminals are confined to
// letter intervals: every word derivable from A lies in ai*...aj* for
// iota(A) = (i, j), 1-based over the terminal order.
struct IntervalGrammar {
    IndexedGrammar grammar;
    std::map<std::string, std::pair<int, int>> iota;
};

// Equivalent interval grammar for a normal-form g with L(g) inside the
// chain of its own terminal order (caller contract).
IntervalGrammar to_interval(const IndexedGrammar& g);

// Language-preserving up to the empty word: L(result) = L(g) minus {eps},
// and the result is productive (no production erases, and every reachable
// nonterminal derives a nonempty terminal word for the index it carries).
IntervalGrammar to_productive(const IntervalGrammar& g);

// An interval grammar together with its direct letters: a direct letter is
// never produced below a unary nonterminal, a non-direct letter only below
// one occurrence of one.
struct PartitionedGrammar {
    IntervalGrammar grammar;
    std::set<Symbol> direct;
};

// One partitioned grammar per subset D of the terminals. Every bounded
// word of each family member embeds as a scattered subword into a word of
// g; conversely the closure of L(g) fills the chain iff some member's
// does.
std::vector<PartitionedGrammar> partitioned_family(const IntervalGrammar& g);

// The 2-adic value: nu(eps) = 0, nu(w1) = 2 nu(w) + 1, nu(w2) = 2 nu(w) + 2.
long long nu(const Word& w);

// Grammar over {a, b} with L = { a^nu(alpha(w)) b^nu(beta(w)) : w in X+ }
// for morphisms alpha, beta: X -> {1,2}*. Solutions of the Post
// correspondence instance (alpha, beta) appear as words a^k b^k.
IndexedGrammar pcp_grammar(const Alphabet& x, const std::map<Symbol, Word>& alpha,
                           const std::map<Symbol, Word>& beta);

// Text format:
//   terminals: a b
//   indices: f g
//   start: S
//   S -> S ^f        # push
//   U ?f -> A        # pop
//   A -> a B b       # general word, '_' for the empty word
// Interval and partitioned grammars add extension lines:
//   interval: A 1 2
//   direct: a b
struct IndexedFile {
    IndexedGrammar grammar;
    std::map<std::string, std::pair<int, int>> iota;
    std::set<Symbol> direct;
};
IndexedFile parse_indexed_file(const std::string& text,
                               const std::string& filename = "<input>");
IndexedGrammar parse_indexed(const std::string& text,
                             const std::string& filename = "<input>");
std::string print_indexed(const IndexedGrammar& g);
std::string print_interval(const IntervalGrammar& g);
std::string print_partitioned(const PartitionedGrammar& g);

} // namespace dcl
