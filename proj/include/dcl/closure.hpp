// closure.hpp -- downward closures as simple regular expressions
#pragma once

#include <any>
#include <cstddef>

#include "dcl/alphabet.hpp"
#include "dcl/cfg.hpp"
#include "dcl/nfa.hpp"
#include "dcl/sre.hpp"
#include "dcl/transducer.hpp"

namespace dcl {

// A language class usable by the closure engine: opaque language handles
// plus the three capabilities the algorithm needs. apply_transduction must
// realize exactly T(L); decide_sup answers "is the downward closure of the
// handle's language all of a1*...an*?" for a handle promised to lie inside
// a1*...an*.
class ClassAdapter {
public:
    using Handle = std::any;

    virtual ~ClassAdapter() = default;
    virtual Handle apply_transduction(const Handle& h, const Transducer& t) const = 0;
    virtual bool is_empty(const Handle& h) const = 0;
    virtual bool decide_sup(const Handle& h, const Alphabet& order) const = 0;
};

// Handles are Nfa values.
class RegularAdapter : public ClassAdapter {
public:
    Handle apply_transduction(const Handle& h, const Transducer& t) const override;
    bool is_empty(const Handle& h) const override;
    bool decide_sup(const Handle& h, const Alphabet& order) const override;
};

// Handles are Cfg values.
class CfgAdapter : public ClassAdapter {
public:
    Handle apply_transduction(const Handle& h, const Transducer& t) const override;
    bool is_empty(const Handle& h) const override;
    bool decide_sup(const Handle& h, const Alphabet& order) const override;
};

struct ClosureResult {
    Sre sre;
    std::size_t candidates_tested = 0;
};

// Does the downward closure of L(m) equal a1*...an* for order = a1..an?
// Requires L(m) inside a1*...an*; the containment is verified by product
// with the complement of the letter chain. Decided through the Parikh
// image of the saturated automaton.
bool decide_sup_regular(const Nfa& m, const Alphabet& order);

// Same question for a context-free grammar. Containment violations raise
// NotBoundedForm. Decided by a pump-coverage analysis of the trimmed
// grammar: the closure is full iff some derivation tree carries, for every
// letter, a repeatable section that emits that letter.
bool decide_sup_cfg(const Cfg& g, const Alphabet& order);

// closed is a handle for an already downward-closed language D over x.
// True iff D is contained in L(r): intersect with the complement of r and
// test emptiness.
bool sre_upper_inclusion(const ClassAdapter& c, const ClassAdapter::Handle& closed,
                         const Sre& r, const Alphabet& x);

// True iff L(r) is contained in D: each product w0 Y1* w1 ... Yn* wn is
// checked by one simultaneous-unboundedness query over fresh letters after
// a block-counting transduction; star-free products degenerate to a
// membership-gated non-emptiness query.
bool sre_lower_inclusion(const ClassAdapter& c, const ClassAdapter::Handle& closed,
                         const Sre& r, const Alphabet& x);

// Computes the canonical SRE denoting the downward closure of the handle's
// language over alphabet x. The closed handle is computed once and shared
// by every candidate test. budget caps the number of candidate inclusion
// tests; exceeding it raises BudgetExhausted.
ClosureResult downward_closure(const ClassAdapter& c, const ClassAdapter::Handle& language,
                               const Alphabet& x, std::size_t budget);

// Convenience fronts for the two shipped adapters.
ClosureResult downward_closure_nfa(const Nfa& m, std::size_t budget);
ClosureResult downward_closure_cfg(const Cfg& g, std::size_t budget);

} // namespace dcl
