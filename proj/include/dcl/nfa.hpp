// nfa.hpp -- finite automata with word-labeled edges
#pragma once

#include <set>
#include <string>
#include <vector>

#include "dcl/alphabet.hpp"

namespace dcl {

// An edge reads a (possibly empty) word. Normalized automata carry labels
// of length at most one; the empty label is an epsilon move.
struct Edge {
    int from = 0;
    Word label;
    int to = 0;
};

class Nfa {
public:
    Nfa() = default;
    explicit Nfa(Alphabet alpha) : alphabet(std::move(alpha)) {}

    Alphabet alphabet;
    int initial = 0;
    std::vector<bool> finals; // indexed by state
    std::vector<Edge> edges;

    int state_count() const { return static_cast<int>(finals.size()); }
    int add_state(bool is_final = false) {
        finals.push_back(is_final);
        return state_count() - 1;
    }
    void add_edge(int from, Word label, int to) {
        edges.push_back(Edge{from, std::move(label), to});
    }
};

// Splits multi-letter labels into chains of single-letter edges.
Nfa nfa_normalize(const Nfa& m);

// Membership; throws UnknownLetter for letters outside m's alphabet.
bool nfa_accepts(const Nfa& m, const Word& w);

bool nfa_is_empty(const Nfa& m);

// Intersection. Both arguments must share one alphabet.
Nfa nfa_product(const Nfa& a, const Nfa& b);

// Complement within alpha*, via subset construction. alpha must equal
// m's alphabet.
Nfa nfa_complement(const Nfa& m, const Alphabet& alpha);

bool nfa_equivalent(const Nfa& a, const Nfa& b);

// Adds, for every letter edge, a parallel epsilon edge. The result accepts
// exactly the scattered subwords of words of m.
Nfa nfa_downward_saturate(const Nfa& m);

// All accepted words of length <= max_len, sorted.
std::set<Word> nfa_enumerate(const Nfa& m, int max_len);

// Constructors for common automata.
Nfa nfa_empty(const Alphabet& alpha);            // empty language
Nfa nfa_universal(const Alphabet& alpha);        // alpha*
Nfa nfa_word(const Alphabet& alpha, const Word& w);
Nfa nfa_letter_chain(const Alphabet& alpha);     // a1*a2*...an*
Nfa nfa_containing_letter(const Alphabet& alpha, const Symbol& s); // alpha* s alpha*

// Removes states not on an initial-to-final path. Keeps at least the
// initial state so the result is well formed.
Nfa nfa_trim(const Nfa& m);

// Complete DFA over the same alphabet (subset construction).
Nfa nfa_determinize(const Nfa& m);

// Language-preserving epsilon-edge elimination; result is normalized with
// single-letter labels only.
Nfa nfa_remove_epsilon(const Nfa& m);

// Text format:
//   alphabet: a b
//   state: q0 initial
//   state: q1 final
//   edge: q0 a q1
//   edge: q1 _ q0        # epsilon
//   edge: q0 a b q1      # word label "a b"
// '#' starts a comment.
Nfa parse_nfa(const std::string& text, const std::string& filename = "<input>");
std::string print_nfa(const Nfa& m);
std::string nfa_to_dot(const Nfa& m);

} // namespace dcl
