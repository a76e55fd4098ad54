// closure.cpp -- the downward-closure engine and its two class adapters
#include "dcl/closure.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcl/errors.hpp"

namespace dcl {

namespace {

constexpr std::size_t kMaxSupLetters = 16;
constexpr std::size_t kMaxCoverMasks = 2000000;

// a1*...an* over a possibly larger working alphabet.
Nfa chain_over(const Alphabet& work, const Alphabet& order) {
    Nfa m(work);
    int n = static_cast<int>(order.size());
    for (int i = 0; i <= n; ++i) m.add_state(true);
    m.initial = 0;
    for (int i = 1; i <= n; ++i) {
        const Symbol& a = order.at(i - 1);
        m.add_edge(i, {a}, i);
        for (int j = 0; j < i; ++j) m.add_edge(j, {a}, i);
    }
    return m;
}

// The input's letters together with the order's letters, order first.
Alphabet working_alphabet(const Alphabet& order, const Alphabet& own) {
    std::vector<Symbol> letters = order.letters();
    for (const Symbol& s : own)
        if (!order.contains(s)) letters.push_back(s);
    return Alphabet(letters);
}

Nfa nfa_with_alphabet(const Nfa& m, const Alphabet& alpha) {
    Nfa out(alpha);
    out.initial = m.initial;
    out.finals = m.finals;
    for (const Edge& e : m.edges) {
        require_letters(alpha, e.label, "automaton edge");
        out.add_edge(e.from, e.label, e.to);
    }
    return out;
}

Cfg cfg_with_alphabet(const Cfg& g, const Alphabet& alpha) {
    Cfg out(alpha, g.start);
    for (const CfgProduction& p : g.productions) {
        for (const CfgSym& s : p.rhs)
            if (s.is_terminal) require_letters(alpha, {s.name}, "grammar production");
        out.productions.push_back(p);
    }
    return out;
}

Symbol fresh_letter(const Alphabet& avoid, const std::string& base) {
    Symbol s = base;
    while (avoid.contains(s)) s += "'";
    return s;
}

// --- pump-coverage analysis for decide_sup_cfg ------------------------------
//
// On a trimmed grammar with L(g) inside a1*...an*, the closure of L(g) is
// all of a1*...an* iff some derivation tree owns, for every letter, a
// repeatable grammar cycle that emits it. Repeating each such cycle in
// round-robin fashion pumps all letters at once; conversely unbounded
// letter counts force repeated nonterminals whose cycle emits the letter.

struct CoverAnalysis {
    std::vector<std::string> nts;
    std::map<std::string, int> id;
    std::vector<std::uint32_t> letters_of;  // letters derivable from each nt
    std::vector<std::uint32_t> pump_of;     // letters on cycles through the nt's scc
};

std::uint32_t term_mask(const std::vector<CfgSym>& rhs, const Alphabet& order) {
    std::uint32_t m = 0;
    for (const CfgSym& s : rhs)
        if (s.is_terminal) m |= 1u << order.index_of(s.name);
    return m;
}

CoverAnalysis analyze_pumps(const Cfg& g, const Alphabet& order) {
    CoverAnalysis a;
    a.nts = g.nonterminals();
    for (std::size_t i = 0; i < a.nts.size(); ++i) a.id[a.nts[i]] = static_cast<int>(i);
    int n = static_cast<int>(a.nts.size());
    a.letters_of.assign(n, 0);

    bool changed = true;
    while (changed) {
        changed = false;
        for (const CfgProduction& p : g.productions) {
            std::uint32_t m = term_mask(p.rhs, order);
            for (const CfgSym& s : p.rhs)
                if (!s.is_terminal) m |= a.letters_of[a.id.at(s.name)];
            std::uint32_t& slot = a.letters_of[a.id.at(p.lhs)];
            if ((slot | m) != slot) {
                slot |= m;
                changed = true;
            }
        }
    }

    // Context graph: one edge per nonterminal occurrence, labeled with the
    // terminals of the production plus everything its sibling nonterminals
    // can derive.
    struct CEdge {
        int from, to;
        std::uint32_t label;
    };
    std::vector<CEdge> edges;
    std::vector<std::vector<int>> adj(n);
    for (const CfgProduction& p : g.productions) {
        int from = a.id.at(p.lhs);
        for (std::size_t i = 0; i < p.rhs.size(); ++i) {
            if (p.rhs[i].is_terminal) continue;
            std::uint32_t label = term_mask(p.rhs, order);
            for (std::size_t j = 0; j < p.rhs.size(); ++j)
                if (j != i && !p.rhs[j].is_terminal)
                    label |= a.letters_of[a.id.at(p.rhs[j].name)];
            adj[from].push_back(static_cast<int>(edges.size()));
            edges.push_back(CEdge{from, a.id.at(p.rhs[i].name), label});
        }
    }

    // Tarjan strongly connected components, iterative.
    std::vector<int> comp(n, -1), low(n, 0), disc(n, -1), stck;
    std::vector<bool> on(n, false);
    int timer = 0, ncomp = 0;
    struct Frame {
        int v;
        std::size_t next;
    };
    for (int root = 0; root < n; ++root) {
        if (disc[root] != -1) continue;
        std::vector<Frame> call{{root, 0}};
        disc[root] = low[root] = timer++;
        stck.push_back(root);
        on[root] = true;
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.next < adj[f.v].size()) {
                int w = edges[adj[f.v][f.next++]].to;
                if (disc[w] == -1) {
                    disc[w] = low[w] = timer++;
                    stck.push_back(w);
                    on[w] = true;
                    call.push_back({w, 0});
                } else if (on[w]) {
                    low[f.v] = std::min(low[f.v], disc[w]);
                }
            } else {
                if (low[f.v] == disc[f.v]) {
                    while (true) {
                        int w = stck.back();
                        stck.pop_back();
                        on[w] = false;
                        comp[w] = ncomp;
                        if (w == f.v) break;
                    }
                    ++ncomp;
                }
                int v = f.v;
                call.pop_back();
                if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
            }
        }
    }

    std::vector<std::uint32_t> comp_pump(ncomp, 0);
    for (const CEdge& e : edges)
        if (comp[e.from] == comp[e.to]) comp_pump[comp[e.from]] |= e.label;
    a.pump_of.assign(n, 0);
    for (int v = 0; v < n; ++v) a.pump_of[v] = comp_pump[comp[v]];
    return a;
}

bool pump_coverage_full(const Cfg& g, const Alphabet& order) {
    Cfg t = cfg_trim(cfg_binarize(cfg_trim(g)));
    if (cfg_is_empty(t)) return false;
    CoverAnalysis a = analyze_pumps(t, order);
    std::uint32_t full = order.size() >= 32 ? 0 : (1u << order.size()) - 1;

    std::vector<std::set<std::uint32_t>> cover(a.nts.size());
    std::size_t total = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const CfgProduction& p : t.productions) {
            int lhs = a.id.at(p.lhs);
            std::uint32_t base = a.pump_of[lhs];
            std::vector<int> kids;
            for (const CfgSym& s : p.rhs)
                if (!s.is_terminal) kids.push_back(a.id.at(s.name));
            std::vector<std::uint32_t> cands;
            if (kids.empty()) {
                cands.push_back(base);
            } else if (kids.size() == 1) {
                for (std::uint32_t m : cover[kids[0]]) cands.push_back(base | m);
            } else {
                for (std::uint32_t m1 : cover[kids[0]])
                    for (std::uint32_t m2 : cover[kids[1]]) cands.push_back(base | m1 | m2);
            }
            for (std::uint32_t m : cands) {
                if (cover[lhs].insert(m).second) {
                    changed = true;
                    if (++total > kMaxCoverMasks)
                        throw BudgetExhausted("sup pump analysis exceeded its mask budget");
                }
            }
        }
    }
    return cover[a.id.at(t.start)].count(full) != 0;
}

// --- cycle-coverage analysis for decide_sup_regular --------------------------
//
// On a trimmed automaton with L(m) inside a1*...an*, the closure of L(m) is
// all of a1*...an* iff some accepting path visits, for every letter, a
// strongly connected component whose internal edges emit it. Pumping one
// internal cycle per letter raises every count at once; conversely unbounded
// letter counts force a repeated state whose loop emits the letter.

std::vector<int> condensation(int n, const std::vector<Edge>& edges) {
    std::vector<std::vector<int>> fwd(n), rev(n);
    for (const Edge& e : edges) {
        fwd[e.from].push_back(e.to);
        rev[e.to].push_back(e.from);
    }
    std::vector<int> order;
    std::vector<char> seen(n, 0);
    for (int s = 0; s < n; ++s) {
        if (seen[s]) continue;
        seen[s] = 1;
        std::vector<std::pair<int, std::size_t>> stack{{s, 0}};
        while (!stack.empty()) {
            auto& [u, i] = stack.back();
            if (i < fwd[u].size()) {
                int v = fwd[u][i++];
                if (!seen[v]) {
                    seen[v] = 1;
                    stack.push_back({v, 0});
                }
            } else {
                order.push_back(u);
                stack.pop_back();
            }
        }
    }
    std::vector<int> comp(n, -1);
    int c = 0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (comp[*it] >= 0) continue;
        comp[*it] = c;
        std::vector<int> work{*it};
        while (!work.empty()) {
            int u = work.back();
            work.pop_back();
            for (int v : rev[u])
                if (comp[v] < 0) {
                    comp[v] = c;
                    work.push_back(v);
                }
        }
        ++c;
    }
    return comp;
}

} // namespace

// --- adapters ---------------------------------------------------------------

ClassAdapter::Handle RegularAdapter::apply_transduction(const Handle& h, const Transducer& t) const {
    return apply_to_nfa(t, std::any_cast<const Nfa&>(h));
}

bool RegularAdapter::is_empty(const Handle& h) const {
    return nfa_is_empty(std::any_cast<const Nfa&>(h));
}

bool RegularAdapter::decide_sup(const Handle& h, const Alphabet& order) const {
    return decide_sup_regular(std::any_cast<const Nfa&>(h), order);
}

ClassAdapter::Handle CfgAdapter::apply_transduction(const Handle& h, const Transducer& t) const {
    return cfg_apply_transduction(std::any_cast<const Cfg&>(h), t);
}

bool CfgAdapter::is_empty(const Handle& h) const {
    return cfg_is_empty(std::any_cast<const Cfg&>(h));
}

bool CfgAdapter::decide_sup(const Handle& h, const Alphabet& order) const {
    return decide_sup_cfg(std::any_cast<const Cfg&>(h), order);
}

// --- SUP deciders -----------------------------------------------------------

bool decide_sup_regular(const Nfa& m, const Alphabet& order) {
    if (order.empty()) throw ArityMismatch("sup needs a nonempty letter order");
    if (order.size() > kMaxSupLetters)
        throw BudgetExhausted("sup pump analysis supports at most 16 letters");
    Alphabet work = working_alphabet(order, m.alphabet);
    Nfa mw = nfa_with_alphabet(m, work);
    Nfa bad = nfa_product(mw, nfa_complement(chain_over(work, order), work));
    if (!nfa_is_empty(bad))
        throw NotBoundedForm("language is not contained in the letter chain of " +
                             format_word(order.letters()));
    Nfa t = nfa_trim(nfa_remove_epsilon(mw));
    if (nfa_is_empty(t)) return false;

    int n = t.state_count();
    std::vector<int> comp = condensation(n, t.edges);
    int nc = 1 + *std::max_element(comp.begin(), comp.end());
    std::vector<std::uint32_t> pump(nc, 0);
    for (const Edge& e : t.edges)
        if (comp[e.from] == comp[e.to] && !e.label.empty() && order.contains(e.label.front()))
            pump[comp[e.from]] |= 1u << order.index_of(e.label.front());

    std::vector<std::vector<int>> succ(n);
    for (const Edge& e : t.edges) succ[e.from].push_back(e.to);
    std::uint32_t full = (1u << order.size()) - 1;
    std::vector<std::set<std::uint32_t>> seen(n);
    std::deque<std::pair<int, std::uint32_t>> queue;
    std::size_t total = 0;
    auto visit = [&](int s, std::uint32_t mask) {
        mask |= pump[comp[s]];
        if (!seen[s].insert(mask).second) return;
        if (++total > kMaxCoverMasks)
            throw BudgetExhausted("sup pump analysis exceeded its mask budget");
        queue.push_back({s, mask});
    };
    visit(t.initial, 0);
    while (!queue.empty()) {
        auto [s, mask] = queue.front();
        queue.pop_front();
        if (mask == full && t.finals[s]) return true;
        for (int v : succ[s]) visit(v, mask);
    }
    return false;
}

bool decide_sup_cfg(const Cfg& g, const Alphabet& order) {
    if (order.empty()) throw ArityMismatch("sup needs a nonempty letter order");
    if (order.size() > kMaxSupLetters)
        throw BudgetExhausted("sup pump analysis supports at most 16 letters");
    Alphabet work = working_alphabet(order, g.terminals);
    Cfg gw = cfg_with_alphabet(g, work);
    Nfa bad_nfa = nfa_complement(chain_over(work, order), work);
    Cfg bad = cfg_apply_transduction(gw, regular_intersection_transduction(bad_nfa));
    if (!cfg_is_empty(bad))
        throw NotBoundedForm("language is not contained in the letter chain of " +
                             format_word(order.letters()));
    Cfg trimmed = cfg_trim(gw);
    if (cfg_is_empty(trimmed)) return false;
    return pump_coverage_full(cfg_with_alphabet(trimmed, order), order);
}

// --- inclusion tests ---------------------------------------------------------

bool sre_upper_inclusion(const ClassAdapter& c, const ClassAdapter::Handle& closed,
                         const Sre& r, const Alphabet& x) {
    Nfa outside = nfa_complement(sre_to_nfa(r, x), x);
    return c.is_empty(c.apply_transduction(closed, regular_intersection_transduction(outside)));
}

namespace {

bool product_lower_inclusion(const ClassAdapter& c, const ClassAdapter::Handle& closed,
                             const Product& p, const Alphabet& x) {
    BlockForm bf = product_block_form(p, x);
    std::size_t n = bf.stars.size();
    if (n == 0) {
        // Pure ideal of one word: gate on membership, then project onto a
        // single fresh letter so that non-emptiness becomes a one-letter
        // unboundedness question.
        Symbol cc = fresh_letter(x, "c");
        Transducer gate = block_counting_transduction(x, bf.gaps, {}, Alphabet());
        ClassAdapter::Handle gated = c.apply_transduction(closed, gate);
        ClassAdapter::Handle projected =
            c.apply_transduction(gated, projection_transduction(Alphabet(), cc));
        return c.decide_sup(projected, Alphabet({cc}));
    }
    std::vector<Symbol> fresh;
    for (std::size_t i = 0; i < n; ++i)
        fresh.push_back(fresh_letter(x, "c" + std::to_string(i + 1)));
    Alphabet out(fresh);
    Transducer counter = block_counting_transduction(x, bf.gaps, bf.star_words, out);
    return c.decide_sup(c.apply_transduction(closed, counter), out);
}

} // namespace

bool sre_lower_inclusion(const ClassAdapter& c, const ClassAdapter::Handle& closed,
                         const Sre& r, const Alphabet& x) {
    for (const Product& p : r.products)
        if (!product_lower_inclusion(c, closed, p, x)) return false;
    return true;
}

// --- the engine ---------------------------------------------------------------

namespace {

struct ProductOrder {
    bool operator()(const Product& a, const Product& b) const { return product_less(a, b); }
};

} // namespace

ClosureResult downward_closure(const ClassAdapter& c, const ClassAdapter::Handle& language,
                               const Alphabet& x, std::size_t budget) {
    if (budget == 0) throw BudgetExhausted("candidate budget 0 admits no candidate");
    if (x.size() > kMaxSupLetters)
        throw BudgetExhausted("closure engine supports at most 16 letters");
    ClosureResult result;
    if (c.is_empty(language)) return result; // empty union

    ClassAdapter::Handle closed = c.apply_transduction(language, subword_transduction(x));

    // Candidate products grow one atom at a time; a product can only denote
    // part of the closure if every product obtained by dropping one atom
    // does, so the passing set is explored level by level. After each level
    // the maximal passing products are assembled and checked from above.
    std::set<Product, ProductOrder> passed;
    std::map<Product, bool, ProductOrder> verdict;
    auto product_passes = [&](const Product& p) {
        auto it = verdict.find(p);
        if (it != verdict.end()) return it->second;
        bool ok = product_lower_inclusion(c, closed, p, x);
        verdict.emplace(p, ok);
        return ok;
    };

    std::vector<Product> current{Product{}}; // the {epsilon} ideal
    passed.insert(Product{});

    // Atoms whose singleton products pass; no larger passing product can
    // use any other atom.
    std::vector<Atom> universe;
    {
        std::vector<Atom> atoms;
        for (const Symbol& a : x) atoms.push_back(OptLetter{a});
        std::size_t n = x.size();
        for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
            StarSet y;
            for (std::size_t i = 0; i < n; ++i)
                if (mask & (1u << i)) y.letters.push_back(x.at(i));
            std::sort(y.letters.begin(), y.letters.end());
            atoms.push_back(y);
        }
        std::sort(atoms.begin(), atoms.end(), atom_less);
        for (const Atom& a : atoms)
            if (product_passes(Product{a})) universe.push_back(a);
    }

    for (std::size_t level = 0;; ++level) {
        // Assemble the maximal passing products and test from above.
        Sre candidate;
        candidate.products.assign(passed.begin(), passed.end());
        candidate = canonicalize(candidate);
        if (result.candidates_tested >= budget)
            throw BudgetExhausted("no candidate within budget " + std::to_string(budget));
        ++result.candidates_tested;
        if (sre_upper_inclusion(c, closed, candidate, x)) {
            result.sre = candidate;
            return result;
        }

        // Grow: extend each passing product of this level by one atom.
        std::set<Product, ProductOrder> next_seen;
        std::vector<Product> next;
        for (const Product& p : current) {
            for (std::size_t pos = 0; pos <= p.size(); ++pos) {
                for (const Atom& a : universe) {
                    Product q = p;
                    q.insert(q.begin() + static_cast<std::ptrdiff_t>(pos), a);
                    q = canonicalize_product(std::move(q));
                    if (q.size() != level + 1) continue; // merged away
                    if (!next_seen.insert(q).second) continue;
                    bool all_subs_pass = true;
                    for (std::size_t j = 0; j < q.size() && all_subs_pass; ++j) {
                        Product sub = q;
                        sub.erase(sub.begin() + static_cast<std::ptrdiff_t>(j));
                        sub = canonicalize_product(std::move(sub));
                        if (passed.count(sub) == 0) all_subs_pass = false;
                    }
                    if (!all_subs_pass) continue;
                    if (product_passes(q)) next.push_back(q);
                }
            }
        }
        if (next.empty())
            throw std::logic_error("downward closure growth stalled before covering the language");
        for (const Product& q : next) passed.insert(q);
        current = std::move(next);
    }
}

ClosureResult downward_closure_nfa(const Nfa& m, std::size_t budget) {
    RegularAdapter adapter;
    return downward_closure(adapter, nfa_remove_epsilon(m), m.alphabet, budget);
}

ClosureResult downward_closure_cfg(const Cfg& g, std::size_t budget) {
    CfgAdapter adapter;
    return downward_closure(adapter, g, g.terminals, budget);
}

} // namespace dcl
