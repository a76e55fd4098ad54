// semilinear.hpp -- Parikh images as finite unions of linear sets
#pragma once

#include <string>
#include <vector>

#include "dcl/alphabet.hpp"
#include "dcl/nfa.hpp"

namespace dcl {

// A vector of letter counts, indexed by alphabet position.
using CountVec = std::vector<long long>;

struct LinearSet {
    CountVec base;
    std::vector<CountVec> periods;
};

struct SemilinearSet {
    Alphabet alphabet;
    std::vector<LinearSet> parts; // empty means the empty set
};

CountVec parikh_word(const Word& w, const Alphabet& alpha);

// Exact Parikh image of L(m). Walks factor into a simple path per strongly
// connected component plus attached simple cycles; each connected choice of
// cycles yields one linear set. Throws BudgetExhausted if the cycle or path
// structure exceeds desk-scale guards.
SemilinearSet parikh_nfa(const Nfa& m);

// Membership by bounded coefficient search; exact whenever the L1 norm of v
// is at most bound.
bool sls_contains(const SemilinearSet& s, const CountVec& v, long long bound);

// The unboundedness criterion: some linear set owns, for every letter of
// order, a period with a positive count of it. Applied to the Parikh image
// of a downward-closed language inside a1*...an*, this decides whether that
// language is all of a1*...an*.
bool sup_from_semilinear(const SemilinearSet& s, const Alphabet& order);

std::string print_semilinear(const SemilinearSet& s);

} // namespace dcl
