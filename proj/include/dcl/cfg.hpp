#pragma once

#include <set>
#include <string>
#include <vector>

#include "dcl/alphabet.hpp"
#include "dcl/semilinear.hpp"
#include "dcl/transducer.hpp"

namespace dcl {

// A grammar symbol: either a terminal letter or a nonterminal name.
struct CfgSym {
    bool is_terminal = false;
    std::string name;

    friend bool operator==(const CfgSym& a, const CfgSym& b) {
        return a.is_terminal == b.is_terminal && a.name == b.name;
    }
    friend bool operator<(const CfgSym& a, const CfgSym& b) {
        if (a.is_terminal != b.is_terminal) return a.is_terminal < b.is_terminal;
        return a.name < b.name;
    }
};

struct CfgProduction {
    std::string lhs;
    std::vector<CfgSym> rhs;
};

// Context-free grammar. Nonterminals are implicit: every production
// left-hand side, the start symbol, and every non-terminal right-hand-side
// symbol counts.
struct Cfg {
    Alphabet terminals;
    std::string start;
    std::vector<CfgProduction> productions;

    explicit Cfg(Alphabet t = Alphabet(), std::string s = "S")
        : terminals(std::move(t)), start(std::move(s)) {}

    std::vector<std::string> nonterminals() const;
};

CfgSym t_sym(const Symbol& a);
CfgSym n_sym(const std::string& name);

// Removes unproductive and unreachable nonterminals (the start symbol is
// always kept so the grammar stays well formed).
Cfg cfg_trim(const Cfg& g);

// Rewrites the grammar so every right-hand side has at most two symbols.
Cfg cfg_binarize(const Cfg& g);

bool cfg_is_empty(const Cfg& g);

// All words of length <= max_len, by bounded leftmost expansion. Throws
// BudgetExhausted when the expansion exceeds its step guard (for example on
// grammars with unbounded chains of erasing productions).
std::set<Word> cfg_enumerate(const Cfg& g, int max_len);

// Image of the grammar's language under a rational transduction, again as a
// grammar. Built from state-pair nonterminals over the normalized transducer,
// with auxiliary nonterminals for its writing-only paths.
Cfg cfg_apply_transduction(const Cfg& g, const Transducer& t);

// Parikh image. Uses a bounded-index word automaton whose states are
// multisets of nonterminals (at most n+1 of them for n nonterminals), which
// has the same Parikh image as the grammar, then extracts the semilinear set
// from that automaton.
SemilinearSet cfg_parikh(const Cfg& g);

// { alph(w) : w in L(g) } for small terminal alphabets.
std::set<std::set<Symbol>> alph_sets_cfg(const Cfg& g);

Cfg parse_cfg(const std::string& text, const std::string& filename = "<input>");
std::string print_cfg(const Cfg& g);

} // namespace dcl
