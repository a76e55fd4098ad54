// transducer.hpp -- rational transducers over word-labeled edges
#pragma once

#include <string>
#include <vector>

#include "dcl/alphabet.hpp"
#include "dcl/nfa.hpp"

namespace dcl {

// An edge reads `in` and writes `out`; either side may be empty. Normalized
// transducers have edges that read at most one letter or write at most one
// letter, never both, and a single final state.
struct TEdge {
    int from = 0;
    Word in;
    Word out;
    int to = 0;
};

class Transducer {
public:
    Transducer() = default;
    Transducer(Alphabet input, Alphabet output)
        : input_alphabet(std::move(input)), output_alphabet(std::move(output)) {}

    Alphabet input_alphabet;
    Alphabet output_alphabet;
    int initial = 0;
    std::vector<bool> finals;
    std::vector<TEdge> edges;

    int state_count() const { return static_cast<int>(finals.size()); }
    int add_state(bool is_final = false) {
        finals.push_back(is_final);
        return state_count() - 1;
    }
    void add_edge(int from, Word in, Word out, int to) {
        edges.push_back(TEdge{from, std::move(in), std::move(out), to});
    }
};

// Splits edges so each one reads one letter, writes one letter, or moves
// silently; collapses to a single final state.
Transducer transducer_normalize(const Transducer& t);

// Image of L(m) under t, as an automaton over t's output alphabet.
// m must be over t's input alphabet.
Nfa apply_to_nfa(const Transducer& t, const Nfa& m);

// Relation composition: first a, then b. a's output alphabet must equal
// b's input alphabet.
Transducer compose(const Transducer& a, const Transducer& b);

// {(w, w) : w over alpha}
Transducer identity_transduction(const Alphabet& alpha);

// {(w, v) : v a scattered subword of w}
Transducer subword_transduction(const Alphabet& alpha);

// {(w, w) : w accepted by r}
Transducer regular_intersection_transduction(const Nfa& r);

// {(w, c^k) : w over alpha, k >= 0}; used to turn emptiness into a
// one-letter unboundedness question.
Transducer projection_transduction(const Alphabet& alpha, const Symbol& out_letter);

// Maps w0 u1^x1 w1 ... un^xn wn to c1^x1 ... cn^xn. gaps holds w0..wn,
// star_words holds u1..un, out_letters holds c1..cn.
Transducer block_counting_transduction(const Alphabet& input,
                                       const std::vector<Word>& gaps,
                                       const std::vector<Word>& star_words,
                                       const Alphabet& out_letters);

// Text format:
//   alphabet: a b        # input letters
//   output: c d          # output letters (defaults to the input alphabet)
//   state: p initial
//   state: q final
//   edge: p a c q        # reads a, writes c; '_' on either side for epsilon
Transducer parse_transducer(const std::string& text,
                            const std::string& filename = "<input>");
std::string print_transducer(const Transducer& t);

} // namespace dcl
