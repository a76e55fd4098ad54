// indexed.cpp -- indexed grammars: derivations, transformations, generators
#include "dcl/indexed.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dcl/errors.hpp"

namespace dcl {

namespace {

constexpr int kMaxSubsetStates = 4096;
constexpr long long kMaxErasureKeys = 200000;
constexpr long long kMaxErasureRounds = 100000;

std::string fresh_name(std::string base, std::set<std::string>& used) {
    while (used.count(base)) base += "'";
    used.insert(base);
    return base;
}

bool rhs_all_terminal(const std::vector<CfgSym>& rhs) {
    for (const CfgSym& s : rhs)
        if (!s.is_terminal) return false;
    return true;
}

int rhs_terminal_count(const std::vector<CfgSym>& rhs) {
    int c = 0;
    for (const CfgSym& s : rhs)
        if (s.is_terminal) ++c;
    return c;
}

enum class PKind { push, pop, general };

PKind kind_of(const IProduction& p) {
    if (p.push_index) return PKind::push;
    if (p.pop_index) return PKind::pop;
    return PKind::general;
}

IProduction make_push(std::string lhs, std::string rhs_nt, Symbol f) {
    IProduction p;
    p.lhs = std::move(lhs);
    p.push_index = std::move(f);
    p.rhs = {n_sym(rhs_nt)};
    return p;
}

IProduction make_pop(std::string lhs, Symbol f, std::vector<CfgSym> rhs) {
    IProduction p;
    p.lhs = std::move(lhs);
    p.pop_index = std::move(f);
    p.rhs = std::move(rhs);
    return p;
}

IProduction make_general(std::string lhs, std::vector<CfgSym> rhs) {
    IProduction p;
    p.lhs = std::move(lhs);
    p.rhs = std::move(rhs);
    return p;
}

std::set<std::string> all_names(const IndexedGrammar& g) {
    std::set<std::string> used;
    for (const std::string& n : g.nonterminals()) used.insert(n);
    for (const Symbol& s : g.terminals) used.insert(s);
    for (const Symbol& s : g.indices) used.insert(s);
    return used;
}

} // namespace

std::vector<std::string> IndexedGrammar::nonterminals() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    auto add = [&](const std::string& n) {
        if (seen.insert(n).second) out.push_back(n);
    };
    add(start);
    for (const IProduction& p : productions) {
        add(p.lhs);
        for (const CfgSym& s : p.rhs)
            if (!s.is_terminal) add(s.name);
    }
    return out;
}

SfItem sf_terminal(const Symbol& a) {
    SfItem it;
    it.is_terminal = true;
    it.letter = a;
    return it;
}

SfItem sf_nonterminal(const std::string& nt, Word index) {
    SfItem it;
    it.nt = nt;
    it.index = std::move(index);
    return it;
}

SententialForm sf_start(const IndexedGrammar& g) { return {sf_nonterminal(g.start)}; }

// --- one-step derivation ------------------------------------------------------

namespace {

// Successor items when production p rewrites an item carrying index x, or
// nothing when p does not apply there.
std::optional<std::vector<SfItem>> apply_production(const IProduction& p, const Word& x) {
    switch (kind_of(p)) {
    case PKind::push: {
        Word y;
        y.push_back(*p.push_index);
        y.insert(y.end(), x.begin(), x.end());
        return std::vector<SfItem>{sf_nonterminal(p.rhs.front().name, std::move(y))};
    }
    case PKind::pop: {
        if (x.empty() || x.front() != *p.pop_index) return std::nullopt;
        Word rest(x.begin() + 1, x.end());
        std::vector<SfItem> out;
        for (const CfgSym& s : p.rhs)
            out.push_back(s.is_terminal ? sf_terminal(s.name) : sf_nonterminal(s.name, rest));
        return out;
    }
    case PKind::general: {
        if (rhs_all_terminal(p.rhs) && !x.empty()) return std::nullopt;
        std::vector<SfItem> out;
        for (const CfgSym& s : p.rhs)
            out.push_back(s.is_terminal ? sf_terminal(s.name) : sf_nonterminal(s.name, x));
        return out;
    }
    }
    return std::nullopt;
}

} // namespace

std::set<SententialForm> derive_step(const IndexedGrammar& g, const SententialForm& sf) {
    std::set<SententialForm> out;
    for (std::size_t i = 0; i < sf.size(); ++i) {
        if (sf[i].is_terminal) continue;
        for (const IProduction& p : g.productions) {
            if (p.lhs != sf[i].nt) continue;
            auto items = apply_production(p, sf[i].index);
            if (!items) continue;
            SententialForm next(sf.begin(), sf.begin() + static_cast<std::ptrdiff_t>(i));
            next.insert(next.end(), items->begin(), items->end());
            next.insert(next.end(), sf.begin() + static_cast<std::ptrdiff_t>(i) + 1, sf.end());
            out.insert(std::move(next));
        }
    }
    return out;
}

// --- minimal-yield analysis ----------------------------------------------------
//
// An exact lower bound on the length of any terminal word derivable from a
// nonterminal with a concrete index word: the cheapest root-to-leaf branch
// of any derivation tree, counting the terminals emitted along it. Every
// branch must consume the whole index before it may end in a terminal
// production (or end early through an index-discarding pop whose right side
// is all terminal), which is what forces long yields out of deep indices.

namespace {

class MinYield {
public:
    MinYield(const IndexedGrammar& g, int max_len) : inf_(max_len + 2) {
        nts_ = g.nonterminals();
        n_ = static_cast<int>(nts_.size());
        for (int i = 0; i < n_; ++i) id_[nts_[i]] = i;
        for (const Symbol& f : g.indices) letters_.push_back(f);

        struct PopRule {
            int lhs;
            std::vector<int> rhs_nts;
            int tcost;
            bool all_terminal;
        };
        std::map<Symbol, std::vector<PopRule>> pops;
        std::vector<std::pair<int, std::pair<int, Symbol>>> pushes; // lhs -> (rhs, f)

        out_clo_.assign(n_, std::vector<int>(n_, inf_));
        for (int i = 0; i < n_; ++i) out_clo_[i][i] = 0;
        std::vector<int> eps_base(n_, inf_);

        for (const IProduction& p : g.productions) {
            int lhs = id_.at(p.lhs);
            int tc = std::min(rhs_terminal_count(p.rhs), inf_);
            switch (kind_of(p)) {
            case PKind::push:
                pushes.push_back({lhs, {id_.at(p.rhs.front().name), *p.push_index}});
                break;
            case PKind::pop: {
                PopRule r;
                r.lhs = lhs;
                r.tcost = tc;
                r.all_terminal = rhs_all_terminal(p.rhs);
                for (const CfgSym& s : p.rhs)
                    if (!s.is_terminal) r.rhs_nts.push_back(id_.at(s.name));
                pops[*p.pop_index].push_back(std::move(r));
                break;
            }
            case PKind::general:
                if (rhs_all_terminal(p.rhs)) {
                    eps_base[lhs] = std::min(eps_base[lhs], tc);
                } else {
                    for (const CfgSym& s : p.rhs)
                        if (!s.is_terminal)
                            out_clo_[lhs][id_.at(s.name)] =
                                std::min(out_clo_[lhs][id_.at(s.name)], tc);
                }
                break;
            }
        }

        for (int k = 0; k < n_; ++k)
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j)
                    out_clo_[i][j] = std::min(out_clo_[i][j], add(out_clo_[i][k], out_clo_[k][j]));

        std::map<Symbol, std::vector<std::vector<int>>> pop_direct;
        std::map<Symbol, std::vector<int>> disc_direct;
        for (const Symbol& f : letters_) {
            pop_direct[f].assign(n_, std::vector<int>(n_, inf_));
            disc_direct[f].assign(n_, inf_);
            for (const PopRule& r : pops[f]) {
                for (int c : r.rhs_nts)
                    pop_direct[f][r.lhs][c] = std::min(pop_direct[f][r.lhs][c], r.tcost);
                if (r.all_terminal)
                    disc_direct[f][r.lhs] = std::min(disc_direct[f][r.lhs], r.tcost);
            }
            pmat_[f].assign(n_, std::vector<int>(n_, inf_));
            pdisc_[f].assign(n_, inf_);
        }

        // Value iteration; conservative fallback (no pruning) if it fails
        // to settle within the pass cap.
        bool changed = true;
        int passes = 0;
        while (changed && passes < 200) {
            changed = false;
            ++passes;
            for (const Symbol& f : letters_) {
                std::vector<std::vector<int>> step(n_, std::vector<int>(n_, inf_));
                std::vector<int> dstep(n_, inf_);
                for (int a = 0; a < n_; ++a)
                    for (int c = 0; c < n_; ++c) step[a][c] = pop_direct[f][a][c];
                for (int a = 0; a < n_; ++a) dstep[a] = disc_direct[f][a];
                for (const auto& pu : pushes) {
                    int a = pu.first, b = pu.second.first;
                    const Symbol& gg = pu.second.second;
                    dstep[a] = std::min(dstep[a], pdisc_[gg][b]);
                    for (int d = 0; d < n_; ++d) {
                        if (pmat_[gg][b][d] >= inf_) continue;
                        dstep[a] = std::min(dstep[a], add(pmat_[gg][b][d], pdisc_[f][d]));
                        for (int c = 0; c < n_; ++c)
                            step[a][c] = std::min(step[a][c], add(pmat_[gg][b][d], pmat_[f][d][c]));
                    }
                }
                for (int a = 0; a < n_; ++a) {
                    for (int a2 = 0; a2 < n_; ++a2) {
                        if (out_clo_[a][a2] >= inf_) continue;
                        int base = out_clo_[a][a2];
                        if (add(base, dstep[a2]) < pdisc_[f][a]) {
                            pdisc_[f][a] = add(base, dstep[a2]);
                            changed = true;
                        }
                        for (int c = 0; c < n_; ++c) {
                            if (add(base, step[a2][c]) < pmat_[f][a][c]) {
                                pmat_[f][a][c] = add(base, step[a2][c]);
                                changed = true;
                            }
                        }
                    }
                }
            }
        }
        sound_ = !changed;

        // Cheapest termination from an item whose index is empty: reach an
        // all-terminal rule, or push a letter and consume or discard it
        // again. Decreasing value iteration; must reach the fixpoint or the
        // values overestimate and pruning would be unsound.
        term_.assign(n_, inf_);
        for (int pass = 0; sound_; ++pass) {
            bool tchanged = false;
            std::vector<int> raw = eps_base;
            for (const auto& pu : pushes) {
                int a = pu.first, b = pu.second.first;
                const Symbol& f = pu.second.second;
                raw[a] = std::min(raw[a], pdisc_.at(f)[b]);
                for (int d = 0; d < n_; ++d)
                    raw[a] = std::min(raw[a], add(pmat_.at(f)[b][d], term_[d]));
            }
            for (int a = 0; a < n_; ++a)
                for (int a2 = 0; a2 < n_; ++a2) {
                    int v = add(out_clo_[a][a2], raw[a2]);
                    if (v < term_[a]) {
                        term_[a] = v;
                        tchanged = true;
                    }
                }
            if (!tchanged) break;
            if (pass > n_ * inf_ + 2) {
                sound_ = false;
                break;
            }
        }
    }

    // Lower bound on |w| over terminal words w derivable from the item.
    int item_bound(int nt, const Word& x) {
        if (!sound_) return 0;
        auto key = std::make_pair(nt, x);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        std::vector<int> d(n_, inf_);
        d[nt] = 0;
        int best = inf_;
        for (const Symbol& f : x) {
            auto pm = pmat_.find(f);
            if (pm == pmat_.end()) { // letter without rules: item is stuck
                best = inf_;
                d.assign(n_, inf_);
                break;
            }
            for (int c = 0; c < n_; ++c)
                best = std::min(best, add(d[c], pdisc_.at(f)[c]));
            std::vector<int> nd(n_, inf_);
            for (int c = 0; c < n_; ++c) {
                if (d[c] >= inf_) continue;
                for (int e = 0; e < n_; ++e) nd[e] = std::min(nd[e], add(d[c], pm->second[c][e]));
            }
            d = std::move(nd);
        }
        for (int c = 0; c < n_; ++c) best = std::min(best, add(d[c], term_[c]));
        memo_.emplace(key, best);
        return best;
    }

    int id(const std::string& nt) const { return id_.at(nt); }
    int inf() const { return inf_; }

private:
    int add(int a, int b) const { return std::min(a + b, inf_); }

    int inf_;
    int n_ = 0;
    bool sound_ = true;
    std::vector<std::string> nts_;
    std::map<std::string, int> id_;
    std::vector<Symbol> letters_;
    std::vector<std::vector<int>> out_clo_;
    std::vector<int> term_;
    std::map<Symbol, std::vector<std::vector<int>>> pmat_;
    std::map<Symbol, std::vector<int>> pdisc_;
    std::map<std::pair<int, Word>, int> memo_;
};

} // namespace

// --- bounded derivation search --------------------------------------------------

BoundedWords bounded_language_from(const IndexedGrammar& g, const SententialForm& init,
                                   int max_len, long long budget) {
    BoundedWords result;
    if (max_len < 0) {
        result.exhaustive = true;
        return result;
    }
    MinYield my(g, max_len);
    int len_cap = max_len + 2 * static_cast<int>(g.nonterminals().size()) + 2;
    int idx_cap = max_len + 4 + static_cast<int>(std::min<long long>(24, budget / 100000));

    bool cutoff = false;
    long long expansions = 0;
    std::set<SententialForm> seen;
    std::deque<SententialForm> frontier;

    auto admit = [&](SententialForm sf) {
        long long total = 0;
        int items = 0;
        for (const SfItem& it : sf) {
            ++items;
            if (it.is_terminal) {
                ++total;
            } else {
                if (static_cast<int>(it.index.size()) > idx_cap) {
                    cutoff = true;
                    return;
                }
                total += my.item_bound(my.id(it.nt), it.index);
            }
            if (total > max_len) return; // provably too long
        }
        if (items > len_cap) {
            cutoff = true;
            return;
        }
        if (!seen.insert(sf).second) return;
        frontier.push_back(std::move(sf));
    };

    admit(init);
    while (!frontier.empty()) {
        if (expansions >= budget) {
            cutoff = true;
            break;
        }
        SententialForm sf = std::move(frontier.front());
        frontier.pop_front();

        std::size_t pos = sf.size();
        for (std::size_t i = 0; i < sf.size(); ++i) {
            if (!sf[i].is_terminal) {
                pos = i;
                break;
            }
        }
        if (pos == sf.size()) {
            Word w;
            for (const SfItem& it : sf) w.push_back(it.letter);
            if (static_cast<int>(w.size()) <= max_len) result.words.insert(std::move(w));
            continue;
        }
        ++expansions;
        for (const IProduction& p : g.productions) {
            if (p.lhs != sf[pos].nt) continue;
            auto items = apply_production(p, sf[pos].index);
            if (!items) continue;
            SententialForm next(sf.begin(), sf.begin() + static_cast<std::ptrdiff_t>(pos));
            next.insert(next.end(), items->begin(), items->end());
            next.insert(next.end(), sf.begin() + static_cast<std::ptrdiff_t>(pos) + 1, sf.end());
            admit(std::move(next));
        }
    }
    result.exhaustive = !cutoff;
    return result;
}

BoundedWords bounded_language(const IndexedGrammar& g, int max_len, long long budget) {
    return bounded_language_from(g, sf_start(g), max_len, budget);
}

// --- normal form ------------------------------------------------------------------

namespace {

// Adds productions that emit w from any index: pop loops erase the index
// letter by letter, then a terminal production fires.
std::string ensure_emitter(const Word& w, IndexedGrammar& out, std::set<std::string>& used,
                           std::map<Word, std::string>& memo) {
    auto it = memo.find(w);
    if (it != memo.end()) return it->second;
    std::string base = "emit";
    for (const Symbol& s : w) base += "." + s;
    std::string name = fresh_name(base, used);
    memo.emplace(w, name);
    for (const Symbol& f : out.indices)
        out.productions.push_back(make_pop(name, f, {n_sym(name)}));
    std::vector<CfgSym> rhs;
    for (const Symbol& s : w) rhs.push_back(t_sym(s));
    out.productions.push_back(make_general(name, std::move(rhs)));
    return name;
}

} // namespace

IndexedGrammar normalize(const IndexedGrammar& g) {
    IndexedGrammar out(g.terminals, g.indices, g.start);
    std::set<std::string> used = all_names(g);
    std::map<Word, std::string> emitters;

    // Lowers a general word production into output/split/terminal shapes.
    std::deque<std::pair<std::string, std::vector<CfgSym>>> pending;
    auto lower_general = [&](const std::string& lhs, const std::vector<CfgSym>& rhs) {
        pending.push_back({lhs, rhs});
    };

    for (const IProduction& p : g.productions) {
        switch (kind_of(p)) {
        case PKind::push:
            out.productions.push_back(p);
            break;
        case PKind::pop:
            if (p.rhs.size() == 1 && !p.rhs.front().is_terminal) {
                out.productions.push_back(p);
            } else if (rhs_all_terminal(p.rhs)) {
                // The popped item may still carry more index; route through
                // an index-erasing emitter so the rest is discarded.
                Word w;
                for (const CfgSym& s : p.rhs) w.push_back(s.name);
                std::string e = ensure_emitter(w, out, used, emitters);
                out.productions.push_back(make_pop(p.lhs, *p.pop_index, {n_sym(e)}));
            } else {
                std::string z = fresh_name(p.lhs + "'", used);
                out.productions.push_back(make_pop(p.lhs, *p.pop_index, {n_sym(z)}));
                lower_general(z, p.rhs);
            }
            break;
        case PKind::general:
            lower_general(p.lhs, p.rhs);
            break;
        }
    }

    while (!pending.empty()) {
        auto [lhs, rhs] = pending.front();
        pending.pop_front();
        int nts = static_cast<int>(rhs.size()) - rhs_terminal_count(rhs);
        if (nts <= 1) {
            out.productions.push_back(make_general(lhs, rhs)); // terminal or output
            continue;
        }
        // u1 B1 rest -> split, peeling the first nonterminal off.
        std::size_t b1 = 0;
        while (rhs[b1].is_terminal) ++b1;
        std::vector<CfgSym> head(rhs.begin(), rhs.begin() + static_cast<std::ptrdiff_t>(b1) + 1);
        std::vector<CfgSym> rest(rhs.begin() + static_cast<std::ptrdiff_t>(b1) + 1, rhs.end());
        std::string left;
        if (head.size() == 1) {
            left = head.front().name;
        } else {
            left = fresh_name(lhs + "'", used);
            pending.push_back({left, head});
        }
        int rest_nts = static_cast<int>(rest.size()) - rhs_terminal_count(rest);
        std::string right;
        if (rest.size() == 1 && rest_nts == 1) {
            right = rest.front().name;
        } else {
            right = fresh_name(lhs + "'", used);
            pending.push_back({right, rest});
        }
        out.productions.push_back(make_general(lhs, {n_sym(left), n_sym(right)}));
    }
    return out;
}

// --- syntactic cleanup --------------------------------------------------------------

namespace {

IndexedGrammar indexed_cleanup(const IndexedGrammar& g) {
    std::vector<IProduction> prods = g.productions;
    // Drop productions mentioning nonterminals that have no productions at
    // all (they can never be rewritten), until stable.
    while (true) {
        std::set<std::string> has;
        for (const IProduction& p : prods) has.insert(p.lhs);
        std::vector<IProduction> keep;
        for (const IProduction& p : prods) {
            bool ok = true;
            for (const CfgSym& s : p.rhs)
                if (!s.is_terminal && !has.count(s.name)) ok = false;
            if (ok) keep.push_back(p);
        }
        if (keep.size() == prods.size()) break;
        prods = std::move(keep);
    }
    // Keep only productions reachable from the start symbol.
    std::map<std::string, std::vector<const IProduction*>> by_lhs;
    for (const IProduction& p : prods) by_lhs[p.lhs].push_back(&p);
    std::set<std::string> reach{g.start};
    std::deque<std::string> work{g.start};
    while (!work.empty()) {
        std::string a = std::move(work.front());
        work.pop_front();
        for (const IProduction* p : by_lhs[a])
            for (const CfgSym& s : p->rhs)
                if (!s.is_terminal && reach.insert(s.name).second) work.push_back(s.name);
    }
    IndexedGrammar out(g.terminals, g.indices, g.start);
    for (const IProduction& p : prods)
        if (reach.count(p.lhs)) out.productions.push_back(p);
    return out;
}

} // namespace

// --- triple construction --------------------------------------------------------------

namespace {

struct TripleResult {
    IndexedGrammar g;
    int q0 = 0;
    int qf = 0;
};

std::string triple_name(const std::string& a, int p, int q) {
    return a + "@" + std::to_string(p) + "." + std::to_string(q);
}

TripleResult triple_impl(const IndexedGrammar& g_in, const Transducer& t, bool cleanup) {
    if (g_in.terminals != t.input_alphabet)
        throw AlphabetMismatch("triple construction needs the grammar terminals to equal "
                               "the transducer input alphabet");
    IndexedGrammar gn = normalize(g_in);
    Transducer tn = transducer_normalize(t);
    int nq = tn.state_count();
    int qf = -1;
    for (int i = 0; i < nq; ++i)
        if (tn.finals[i]) qf = i;

    // Lower emitting outputs A -> u B v so only units, pushes, pops, splits
    // and terminal productions remain; the emitters erase their index and
    // then produce their word.
    std::set<std::string> used = all_names(gn);
    IndexedGrammar gl(gn.terminals, gn.indices, gn.start);
    std::map<Word, std::string> emitters;
    for (const IProduction& p : gn.productions) {
        if (kind_of(p) != PKind::general || rhs_all_terminal(p.rhs)) {
            gl.productions.push_back(p);
            continue;
        }
        int nts = static_cast<int>(p.rhs.size()) - rhs_terminal_count(p.rhs);
        if (nts >= 2 || rhs_terminal_count(p.rhs) == 0) {
            gl.productions.push_back(p); // split or unit
            continue;
        }
        Word u, v;
        std::string b;
        bool before = true;
        for (const CfgSym& s : p.rhs) {
            if (!s.is_terminal) {
                b = s.name;
                before = false;
            } else {
                (before ? u : v).push_back(s.name);
            }
        }
        std::string head = b, tail = b;
        if (!u.empty()) head = ensure_emitter(u, gl, used, emitters);
        if (!v.empty()) tail = ensure_emitter(v, gl, used, emitters);
        if (!u.empty() && !v.empty()) {
            std::string m = fresh_name(p.lhs + "'", used);
            gl.productions.push_back(make_general(p.lhs, {n_sym(head), n_sym(m)}));
            gl.productions.push_back(make_general(m, {n_sym(b), n_sym(tail)}));
        } else if (!u.empty()) {
            gl.productions.push_back(make_general(p.lhs, {n_sym(head), n_sym(b)}));
        } else {
            gl.productions.push_back(make_general(p.lhs, {n_sym(b), n_sym(tail)}));
        }
    }

    TripleResult res;
    res.q0 = tn.initial;
    res.qf = qf;
    res.g = IndexedGrammar(tn.output_alphabet, g_in.indices, triple_name(gl.start, tn.initial, qf));
    if (qf < 0) return res; // transduction with empty domain

    auto pair_name = [](int r, int s) {
        return "%" + std::to_string(r) + "." + std::to_string(s);
    };

    // Word-path automaton: for each terminal production B -> u, states
    // (transducer state, consumed prefix of u); its paths from (p, 0) to
    // (q, |u|) spell exactly the outputs the transducer can write while
    // reading u from p to q.
    int next_uid = 0;
    struct TermProd {
        std::vector<std::vector<int>> uid; // [pos][state]
        std::vector<std::tuple<int, Symbol, int>> edges; // from, written letter ('' = none), to
        int len = 0;
    };
    std::vector<TermProd> terms;
    std::vector<std::pair<std::string, int>> term_owner; // nonterminal, index into terms

    for (const IProduction& p : gl.productions) {
        if (kind_of(p) != PKind::general || !rhs_all_terminal(p.rhs)) continue;
        Word u;
        for (const CfgSym& s : p.rhs) u.push_back(s.name);
        TermProd tp;
        tp.len = static_cast<int>(u.size());
        tp.uid.assign(tp.len + 1, std::vector<int>(nq, 0));
        for (int i = 0; i <= tp.len; ++i)
            for (int s = 0; s < nq; ++s) tp.uid[i][s] = next_uid++;
        for (const TEdge& e : tn.edges) {
            if (e.in.empty()) {
                Symbol wrote = e.out.empty() ? Symbol() : e.out.front();
                for (int i = 0; i <= tp.len; ++i)
                    tp.edges.emplace_back(tp.uid[i][e.from], wrote, tp.uid[i][e.to]);
            } else {
                for (int i = 0; i < tp.len; ++i)
                    if (u[static_cast<std::size_t>(i)] == e.in.front())
                        tp.edges.emplace_back(tp.uid[i][e.from], Symbol(), tp.uid[i + 1][e.to]);
            }
        }
        term_owner.emplace_back(p.lhs, static_cast<int>(terms.size()));
        terms.push_back(std::move(tp));
    }

    IndexedGrammar& out = res.g;
    for (const IProduction& p : gl.productions) {
        switch (kind_of(p)) {
        case PKind::push:
            for (int a = 0; a < nq; ++a)
                for (int b = 0; b < nq; ++b)
                    out.productions.push_back(make_push(triple_name(p.lhs, a, b),
                                                        triple_name(p.rhs.front().name, a, b),
                                                        *p.push_index));
            break;
        case PKind::pop:
            for (int a = 0; a < nq; ++a)
                for (int b = 0; b < nq; ++b)
                    out.productions.push_back(
                        make_pop(triple_name(p.lhs, a, b), *p.pop_index,
                                 {n_sym(triple_name(p.rhs.front().name, a, b))}));
            break;
        case PKind::general:
            if (rhs_all_terminal(p.rhs)) break; // handled through the word-path automaton
            if (p.rhs.size() == 1) {
                for (int a = 0; a < nq; ++a)
                    for (int b = 0; b < nq; ++b)
                        out.productions.push_back(
                            make_general(triple_name(p.lhs, a, b),
                                         {n_sym(triple_name(p.rhs.front().name, a, b))}));
            } else {
                for (int a = 0; a < nq; ++a)
                    for (int b = 0; b < nq; ++b)
                        for (int r = 0; r < nq; ++r)
                            out.productions.push_back(make_general(
                                triple_name(p.lhs, a, b),
                                {n_sym(triple_name(p.rhs[0].name, a, r)),
                                 n_sym(triple_name(p.rhs[1].name, r, b))}));
            }
            break;
        }
    }
    for (const auto& [owner, ti] : term_owner) {
        const TermProd& tp = terms[static_cast<std::size_t>(ti)];
        for (int a = 0; a < nq; ++a) {
            for (int b = 0; b < nq; ++b) {
                int target = tp.uid[tp.len][b];
                out.productions.push_back(
                    make_general(triple_name(owner, a, b),
                                 {n_sym(pair_name(tp.uid[0][a], target))}));
            }
        }
        for (int b = 0; b < nq; ++b) {
            int target = tp.uid[tp.len][b];
            out.productions.push_back(make_general(pair_name(target, target), {}));
            for (const auto& [from, wrote, to] : tp.edges) {
                std::vector<CfgSym> rhs;
                if (!wrote.empty()) rhs.push_back(t_sym(wrote));
                rhs.push_back(n_sym(pair_name(to, target)));
                out.productions.push_back(make_general(pair_name(from, target), std::move(rhs)));
            }
        }
    }
    if (cleanup) res.g = indexed_cleanup(res.g);
    return res;
}

} // namespace

IndexedGrammar triple_construct(const IndexedGrammar& g, const Transducer& t) {
    return triple_impl(g, t, true).g;
}

// --- erasure analysis -----------------------------------------------------------------
//
// Works on the grammar with terminals discarded: which nonterminals can
// derive the empty word from a given index word? Erasability only depends on
// the set of nonterminals erasable at the index below, so it is a
// deterministic automaton question over index letters read bottom-up. The
// transition function is the least solution of
//
//   V[X, f] = close( pops into X  +  { B : B -> C ^g, C in V[V[X, f], g] } )
//
// where close saturates under index-copying rules; push rules consult the
// value at the very set being defined, so the table is grown by chaotic
// iteration with a join (values never shrink) until nothing changes.

namespace {

class ErasureAnalysis {
public:
    explicit ErasureAnalysis(const IndexedGrammar& g) {
        nts_ = g.nonterminals();
        n_ = static_cast<int>(nts_.size());
        for (int i = 0; i < n_; ++i) id_[nts_[i]] = i;
        for (const Symbol& f : g.indices) letters_.push_back(f);

        for (const IProduction& p : g.productions) {
            int lhs = id_.at(p.lhs);
            std::vector<int> rhs;
            for (const CfgSym& s : p.rhs)
                if (!s.is_terminal) rhs.push_back(id_.at(s.name));
            switch (kind_of(p)) {
            case PKind::push:
                pushes_.push_back({lhs, rhs.front(), *p.push_index});
                break;
            case PKind::pop:
                pops_[*p.pop_index].push_back({lhs, rhs});
                break;
            case PKind::general:
                if (rhs.empty())
                    eps_.insert(lhs); // empty-index terminal production
                else
                    words_.push_back({lhs, rhs});
                break;
            }
        }
    }

    int id(const std::string& nt) const { return id_.at(nt); }
    bool knows(const std::string& nt) const { return id_.count(nt) != 0; }

    // Nonterminals that erase from the empty index.
    std::set<int> eps_set() const {
        Key k{{}, Symbol()};
        ensure(k);
        stabilize();
        return to_set(table_.at(k));
    }

    // { B : B consumes f and lands, in every branch, inside X }.
    std::set<int> step(const std::set<int>& x, const Symbol& f) const {
        Key k{to_mask(x), f};
        ensure(k);
        stabilize();
        return to_set(table_.at(k));
    }

private:
    struct WordRule {
        int lhs;
        std::vector<int> rhs;
    };
    struct PushRule {
        int lhs, rhs;
        Symbol f;
    };
    // An empty letter marks the empty-index query; the mask is unused there.
    using Mask = std::vector<char>;
    using Key = std::pair<Mask, Symbol>;

    Mask to_mask(const std::set<int>& x) const {
        Mask m(static_cast<std::size_t>(n_), 0);
        for (int a : x) m[static_cast<std::size_t>(a)] = 1;
        return m;
    }

    std::set<int> to_set(const Mask& m) const {
        std::set<int> out;
        for (int i = 0; i < n_; ++i)
            if (m[static_cast<std::size_t>(i)]) out.insert(i);
        return out;
    }

    void close_words(std::vector<char>& in) const {
        bool changed = true;
        while (changed) {
            changed = false;
            for (const WordRule& w : words_) {
                if (in[static_cast<std::size_t>(w.lhs)]) continue;
                bool all = true;
                for (int c : w.rhs)
                    if (!in[static_cast<std::size_t>(c)]) {
                        all = false;
                        break;
                    }
                if (all) {
                    in[static_cast<std::size_t>(w.lhs)] = 1;
                    changed = true;
                }
            }
        }
    }

    const Mask& ensure(const Key& k) const {
        auto it = table_.find(k);
        if (it != table_.end()) return it->second;
        if (static_cast<long long>(table_.size()) >= kMaxErasureKeys)
            throw BudgetExhausted("erasure analysis exceeded its table budget");
        return table_.emplace(k, Mask(static_cast<std::size_t>(n_), 0)).first->second;
    }

    // One application of the defining equation, reading sub-queries for push
    // rules from the key's current value.
    Mask eval(const Key& k) const {
        const Mask yprev = table_.at(k); // copy: ensure() below may rehash nothing, but keep it simple
        Mask z(static_cast<std::size_t>(n_), 0);
        if (k.second.empty()) {
            for (int a : eps_) z[static_cast<std::size_t>(a)] = 1;
        } else {
            auto it = pops_.find(k.second);
            if (it != pops_.end()) {
                for (const WordRule& r : it->second) {
                    bool all = true;
                    for (int c : r.rhs)
                        if (!k.first[static_cast<std::size_t>(c)]) {
                            all = false;
                            break;
                        }
                    if (all) z[static_cast<std::size_t>(r.lhs)] = 1;
                }
            }
        }
        for (const PushRule& pu : pushes_) {
            if (z[static_cast<std::size_t>(pu.lhs)]) continue;
            const Mask& sub = ensure(Key{yprev, pu.f});
            if (sub[static_cast<std::size_t>(pu.rhs)]) z[static_cast<std::size_t>(pu.lhs)] = 1;
        }
        close_words(z);
        return z;
    }

    void stabilize() const {
        for (long long round = 0;; ++round) {
            if (round > kMaxErasureRounds)
                throw BudgetExhausted("erasure analysis exceeded its round budget");
            bool changed = false;
            std::vector<Key> keys;
            keys.reserve(table_.size());
            for (const auto& kv : table_) keys.push_back(kv.first);
            for (const Key& k : keys) {
                Mask next = eval(k);
                Mask& cur = table_.at(k);
                for (std::size_t i = 0; i < cur.size(); ++i) { // join; never shrink
                    if (next[i] && !cur[i]) {
                        cur[i] = 1;
                        changed = true;
                    }
                }
            }
            if (!changed && keys.size() == table_.size()) break;
        }
    }

    int n_ = 0;
    std::vector<std::string> nts_;
    std::map<std::string, int> id_;
    std::vector<Symbol> letters_;
    std::vector<WordRule> words_;
    std::map<Symbol, std::vector<WordRule>> pops_;
    std::vector<PushRule> pushes_;
    std::set<int> eps_;
    mutable std::map<Key, Mask> table_;
};

// Deterministic automaton over index letters, read from the bottom of the
// index word upward: state = set of erasable nonterminals.
struct SubsetAutomaton {
    std::vector<std::set<int>> states;
    std::map<std::set<int>, int> ids;
    std::map<std::pair<int, Symbol>, int> delta;
    int start = 0;

    int intern(const std::set<int>& s) {
        auto it = ids.find(s);
        if (it != ids.end()) return it->second;
        int id = static_cast<int>(states.size());
        if (id >= kMaxSubsetStates)
            throw BudgetExhausted("erasure automaton exceeded its state budget");
        states.push_back(s);
        ids.emplace(s, id);
        return id;
    }
};

SubsetAutomaton forward_subsets(const ErasureAnalysis& ea, const Alphabet& indices) {
    SubsetAutomaton fa;
    fa.start = fa.intern(ea.eps_set());
    std::deque<int> work{fa.start};
    std::set<int> done;
    while (!work.empty()) {
        int s = work.front();
        work.pop_front();
        if (!done.insert(s).second) continue;
        for (const Symbol& f : indices) {
            std::set<int> next = ea.step(fa.states[static_cast<std::size_t>(s)], f);
            int t = fa.intern(next);
            fa.delta[{s, f}] = t;
            if (!done.count(t)) work.push_back(t);
        }
    }
    return fa;
}

} // namespace

Nfa iw_automaton(const IndexedGrammar& g, const std::string& a, const Nfa& r) {
    if (g.terminals != r.alphabet)
        throw AlphabetMismatch("index-word analysis needs the target automaton over the "
                               "grammar's terminal alphabet");
    IndexedGrammar gs = g;
    gs.start = a;
    TripleResult tg = triple_impl(gs, regular_intersection_transduction(r), true);
    ErasureAnalysis ea(tg.g);
    SubsetAutomaton fa = forward_subsets(ea, g.indices);

    int goal = ea.knows(tg.g.start) ? ea.id(tg.g.start) : -1;
    // The forward automaton reads index words bottom-up; reverse it.
    Nfa out(g.indices);
    for (std::size_t i = 0; i < fa.states.size(); ++i) out.add_state(false);
    int init = out.add_state(false);
    out.initial = init;
    out.finals[static_cast<std::size_t>(fa.start)] = true;
    for (std::size_t i = 0; i < fa.states.size(); ++i)
        if (goal >= 0 && fa.states[i].count(goal)) out.add_edge(init, {}, static_cast<int>(i));
    for (const auto& [key, to] : fa.delta) out.add_edge(to, {key.second}, key.first);
    return nfa_trim(nfa_remove_epsilon(out));
}

// --- interval grammars -------------------------------------------------------------

namespace {

// u in ai* ... aj* (1-based interval over the terminal order)?
bool in_chain(const Word& u, const Alphabet& t, int i, int j) {
    int prev = i;
    for (const Symbol& s : u) {
        int p = t.index_of(s) + 1;
        if (p < prev || p > j) return false;
        prev = p;
    }
    return true;
}

} // namespace

IntervalGrammar to_interval(const IndexedGrammar& g_in) {
    IndexedGrammar g = normalize(g_in);
    int n = static_cast<int>(g.terminals.size());
    if (n == 0) throw NotBoundedForm("interval form needs at least one terminal letter");

    auto name = [&](int i, const std::string& a, int j) {
        return a + "@" + std::to_string(i) + "." + std::to_string(j);
    };

    IndexedGrammar out(g.terminals, g.indices, name(1, g.start, n));
    for (int i = 1; i <= n; ++i) {
        for (int j = i; j <= n; ++j) {
            for (const IProduction& p : g.productions) {
                switch (kind_of(p)) {
                case PKind::push:
                    out.productions.push_back(make_push(name(i, p.lhs, j),
                                                        name(i, p.rhs.front().name, j),
                                                        *p.push_index));
                    break;
                case PKind::pop:
                    out.productions.push_back(make_pop(name(i, p.lhs, j), *p.pop_index,
                                                       {n_sym(name(i, p.rhs.front().name, j))}));
                    break;
                case PKind::general: {
                    if (rhs_all_terminal(p.rhs)) {
                        Word w;
                        for (const CfgSym& s : p.rhs) w.push_back(s.name);
                        if (in_chain(w, g.terminals, i, j))
                            out.productions.push_back(make_general(name(i, p.lhs, j), p.rhs));
                        break;
                    }
                    int nts = static_cast<int>(p.rhs.size()) - rhs_terminal_count(p.rhs);
                    if (nts == 1) {
                        Word u, v;
                        std::string b;
                        bool before = true;
                        for (const CfgSym& s : p.rhs) {
                            if (!s.is_terminal) {
                                b = s.name;
                                before = false;
                            } else {
                                (before ? u : v).push_back(s.name);
                            }
                        }
                        for (int r = i; r <= j; ++r) {
                            for (int s = r; s <= j; ++s) {
                                if (!in_chain(u, g.terminals, i, r)) continue;
                                if (!in_chain(v, g.terminals, s, j)) continue;
                                std::vector<CfgSym> rhs;
                                for (const Symbol& x : u) rhs.push_back(t_sym(x));
                                rhs.push_back(n_sym(name(r, b, s)));
                                for (const Symbol& x : v) rhs.push_back(t_sym(x));
                                out.productions.push_back(
                                    make_general(name(i, p.lhs, j), std::move(rhs)));
                            }
                        }
                    } else {
                        for (int k = i; k <= j; ++k)
                            out.productions.push_back(
                                make_general(name(i, p.lhs, j),
                                             {n_sym(name(i, p.rhs[0].name, k)),
                                              n_sym(name(k, p.rhs[1].name, j))}));
                    }
                    break;
                }
                }
            }
        }
    }
    out = indexed_cleanup(out);

    IntervalGrammar res;
    res.grammar = out;
    for (const std::string& nt : out.nonterminals()) {
        // Recover (i, j) from the name suffix "@i.j".
        std::size_t at = nt.rfind('@');
        std::size_t dot = nt.rfind('.');
        res.iota[nt] = {std::stoi(nt.substr(at + 1, dot - at - 1)), std::stoi(nt.substr(dot + 1))};
    }
    return res;
}

// --- productive grammars -------------------------------------------------------------

namespace {

Nfa nfa_eps_only(const Alphabet& t) {
    Nfa m(t);
    m.add_state(true);
    m.initial = 0;
    return m;
}

Nfa nfa_nonempty_words(const Alphabet& t) {
    Nfa m(t);
    m.add_state(false);
    m.add_state(true);
    m.initial = 0;
    for (const Symbol& a : t) {
        m.add_edge(0, {a}, 1);
        m.add_edge(1, {a}, 1);
    }
    return m;
}

} // namespace

IntervalGrammar to_productive(const IntervalGrammar& ig) {
    const IndexedGrammar& g = ig.grammar;
    for (const std::string& nt : g.nonterminals())
        if (!ig.iota.count(nt))
            throw ParseError("<interval-grammar>", 0, "missing interval for nonterminal " + nt);

    // Two erasure machines over all state-annotated nonterminals: can A
    // erase entirely, and can A produce a nonempty word, for the index the
    // machine state stands for? Triples are built without reachability
    // cleanup because every nonterminal is queried.
    TripleResult t0 = triple_impl(g, regular_intersection_transduction(nfa_eps_only(g.terminals)),
                                  false);
    TripleResult tp = triple_impl(
        g, regular_intersection_transduction(nfa_nonempty_words(g.terminals)), false);
    ErasureAnalysis ea0(t0.g);
    ErasureAnalysis eap(tp.g);
    SubsetAutomaton fa0 = forward_subsets(ea0, g.indices);
    SubsetAutomaton fap = forward_subsets(eap, g.indices);

    // Product machine, states interned as pairs.
    std::map<std::pair<int, int>, int> sid;
    std::vector<std::pair<int, int>> sval;
    auto intern = [&](int a, int b) {
        auto key = std::make_pair(a, b);
        auto it = sid.find(key);
        if (it != sid.end()) return it->second;
        int id = static_cast<int>(sval.size());
        sid.emplace(key, id);
        sval.push_back(key);
        return id;
    };
    int q0 = intern(fa0.start, fap.start);
    std::deque<int> work{q0};
    std::set<int> seen{q0};
    std::map<std::pair<int, Symbol>, int> adv;
    while (!work.empty()) {
        int q = work.front();
        work.pop_front();
        for (const Symbol& f : g.indices) {
            auto [a, b] = sval[static_cast<std::size_t>(q)];
            int nq = intern(fa0.delta.at({a, f}), fap.delta.at({b, f}));
            adv[{q, f}] = nq;
            if (seen.insert(nq).second) work.push_back(nq);
        }
    }

    auto erases = [&](const std::string& a, int q) {
        std::string tn = triple_name(a, t0.q0, t0.qf);
        if (!ea0.knows(tn)) return false;
        return fa0.states[static_cast<std::size_t>(sval[static_cast<std::size_t>(q)].first)].count(
                   ea0.id(tn)) != 0;
    };
    auto produces = [&](const std::string& a, int q) {
        std::string tn = triple_name(a, tp.q0, tp.qf);
        if (!eap.knows(tn)) return false;
        return fap.states[static_cast<std::size_t>(sval[static_cast<std::size_t>(q)].second)]
                   .count(eap.id(tn)) != 0;
    };

    auto nt_name = [](const std::string& a, int q) { return a + "@" + std::to_string(q); };
    auto ix_name = [](const Symbol& f, int q) { return f + "@" + std::to_string(q); };

    std::vector<Symbol> new_indices;
    for (const Symbol& f : g.indices)
        for (int q = 0; q < static_cast<int>(sval.size()); ++q)
            new_indices.push_back(ix_name(f, q));

    IndexedGrammar out(g.terminals, Alphabet(new_indices), nt_name(g.start, q0));
    IntervalGrammar res;

    std::set<std::string> used;
    for (const std::string& nt : g.nonterminals())
        for (int q = 0; q < static_cast<int>(sval.size()); ++q) used.insert(nt_name(nt, q));
    std::map<std::pair<Word, std::pair<int, int>>, std::string> emit_memo;
    auto emitter = [&](const Word& w, std::pair<int, int> interval) {
        auto key = std::make_pair(w, interval);
        auto it = emit_memo.find(key);
        if (it != emit_memo.end()) return it->second;
        std::string base = "emit";
        for (const Symbol& s : w) base += "." + s;
        std::string name = fresh_name(base, used);
        emit_memo.emplace(key, name);
        for (const Symbol& f : new_indices)
            out.productions.push_back(make_pop(name, f, {n_sym(name)}));
        std::vector<CfgSym> rhs;
        for (const Symbol& s : w) rhs.push_back(t_sym(s));
        out.productions.push_back(make_general(name, std::move(rhs)));
        res.iota[name] = interval;
        return name;
    };

    int nstates = static_cast<int>(sval.size());
    for (const IProduction& p : g.productions) {
        switch (kind_of(p)) {
        case PKind::push: {
            const std::string& b = p.rhs.front().name;
            for (int q = 0; q < nstates; ++q) {
                int q2 = adv.at({q, *p.push_index});
                if (!produces(b, q2)) continue;
                IProduction np;
                np.lhs = nt_name(p.lhs, q);
                np.push_index = ix_name(*p.push_index, q);
                np.rhs = {n_sym(nt_name(b, q2))};
                out.productions.push_back(std::move(np));
            }
            break;
        }
        case PKind::pop: {
            const std::string& b = p.rhs.front().name;
            for (int q = 0; q < nstates; ++q) { // q is the state below the popped letter
                if (!produces(b, q)) continue;
                int qa = adv.at({q, *p.pop_index});
                out.productions.push_back(make_pop(nt_name(p.lhs, qa), ix_name(*p.pop_index, q),
                                                   {n_sym(nt_name(b, q))}));
            }
            break;
        }
        case PKind::general: {
            if (rhs_all_terminal(p.rhs)) {
                if (!p.rhs.empty())
                    out.productions.push_back(make_general(nt_name(p.lhs, q0), p.rhs));
                break;
            }
            int nts = static_cast<int>(p.rhs.size()) - rhs_terminal_count(p.rhs);
            if (nts == 1) {
                Word uv;
                std::string b;
                for (const CfgSym& s : p.rhs) {
                    if (s.is_terminal)
                        uv.push_back(s.name);
                    else
                        b = s.name;
                }
                for (int q = 0; q < nstates; ++q) {
                    if (produces(b, q)) {
                        std::vector<CfgSym> rhs;
                        for (const CfgSym& s : p.rhs)
                            rhs.push_back(s.is_terminal ? s : n_sym(nt_name(b, q)));
                        out.productions.push_back(make_general(nt_name(p.lhs, q), std::move(rhs)));
                    }
                    if (!uv.empty() && erases(b, q)) {
                        // The inner nonterminal only vanishes; the word
                        // around it survives, so emit it while erasing the
                        // index.
                        std::string e = emitter(uv, ig.iota.at(p.lhs));
                        out.productions.push_back(
                            make_general(nt_name(p.lhs, q), {n_sym(e)}));
                    }
                }
            } else {
                const std::string& b = p.rhs[0].name;
                const std::string& c = p.rhs[1].name;
                for (int q = 0; q < nstates; ++q) {
                    bool bp = produces(b, q), cp = produces(c, q);
                    bool bz = erases(b, q), cz = erases(c, q);
                    if (bp && cp)
                        out.productions.push_back(
                            make_general(nt_name(p.lhs, q),
                                         {n_sym(nt_name(b, q)), n_sym(nt_name(c, q))}));
                    if (bp && cz)
                        out.productions.push_back(
                            make_general(nt_name(p.lhs, q), {n_sym(nt_name(b, q))}));
                    if (bz && cp)
                        out.productions.push_back(
                            make_general(nt_name(p.lhs, q), {n_sym(nt_name(c, q))}));
                }
            }
            break;
        }
        }
    }

    out = indexed_cleanup(out);
    res.grammar = out;
    std::map<std::string, std::pair<int, int>> iota;
    for (const std::string& nt : out.nonterminals()) {
        auto it = res.iota.find(nt);
        if (it != res.iota.end()) {
            iota[nt] = it->second;
            continue;
        }
        std::size_t at = nt.rfind('@');
        iota[nt] = ig.iota.at(nt.substr(0, at));
    }
    res.iota = std::move(iota);
    return res;
}

// --- partitioned grammars ------------------------------------------------------------

std::vector<PartitionedGrammar> partitioned_family(const IntervalGrammar& ig) {
    const Alphabet& t = ig.grammar.terminals;
    int n = static_cast<int>(t.size());
    for (const std::string& nt : ig.grammar.nonterminals())
        if (!ig.iota.count(nt))
            throw ParseError("<interval-grammar>", 0, "missing interval for nonterminal " + nt);
    if (n <= 1) return {PartitionedGrammar{ig, {}}};
    if (n > 8) throw BudgetExhausted("partitioned family supports at most 8 letters");

    // Strengthen: drop interval-inconsistent productions, then make pushes
    // and pops interval-preserving through intermediate nonterminals.
    IndexedGrammar base(ig.grammar.terminals, ig.grammar.indices, ig.grammar.start);
    std::map<std::string, std::pair<int, int>> iota = ig.iota;
    std::set<std::string> used = all_names(ig.grammar);
    auto nested = [&](const std::string& a, const std::string& b) {
        auto [i, j] = iota.at(a);
        auto [r, s] = iota.at(b);
        return i <= r && r <= s && s <= j;
    };
    for (const IProduction& p : ig.grammar.productions) {
        auto [i, j] = iota.at(p.lhs);
        switch (kind_of(p)) {
        case PKind::push:
        case PKind::pop: {
            if (p.rhs.size() != 1 || p.rhs.front().is_terminal) break; // not normal: drop
            const std::string& b = p.rhs.front().name;
            if (!nested(p.lhs, b)) break;
            if (iota.at(p.lhs) == iota.at(b)) {
                base.productions.push_back(p);
            } else {
                std::string mid = fresh_name(p.lhs + "'", used);
                iota[mid] = iota.at(p.lhs);
                IProduction q = p;
                q.rhs = {n_sym(mid)};
                base.productions.push_back(std::move(q));
                base.productions.push_back(make_general(mid, {n_sym(b)}));
            }
            break;
        }
        case PKind::general: {
            if (rhs_all_terminal(p.rhs)) {
                Word w;
                for (const CfgSym& s : p.rhs) w.push_back(s.name);
                if (in_chain(w, t, i, j)) base.productions.push_back(p);
                break;
            }
            int nts = static_cast<int>(p.rhs.size()) - rhs_terminal_count(p.rhs);
            if (nts == 1) {
                Word u, v;
                std::string b;
                bool before = true;
                for (const CfgSym& s : p.rhs) {
                    if (!s.is_terminal) {
                        b = s.name;
                        before = false;
                    } else {
                        (before ? u : v).push_back(s.name);
                    }
                }
                auto [r, s] = iota.at(b);
                if (nested(p.lhs, b) && in_chain(u, t, i, r) && in_chain(v, t, s, j))
                    base.productions.push_back(p);
            } else if (nts == 2 && p.rhs.size() == 2) {
                auto [bp, bq] = iota.at(p.rhs[0].name);
                auto [cr, cs] = iota.at(p.rhs[1].name);
                if (i <= bp && bp <= bq && bq <= cr && cr <= cs && cs <= j)
                    base.productions.push_back(p);
            }
            break;
        }
        }
    }

    auto unary_letter = [&](const std::string& a) -> int { // 0-based letter, or -1
        auto [i, j] = iota.at(a);
        return i == j ? i - 1 : -1;
    };

    std::vector<PartitionedGrammar> family;
    for (std::uint32_t dmask = 0; dmask < (1u << n); ++dmask) {
        std::set<Symbol> direct;
        for (int i = 0; i < n; ++i)
            if (dmask & (1u << i)) direct.insert(t.at(static_cast<std::size_t>(i)));

        // Stage one: direct-unary subtrees collapse to their letter.
        std::set<std::string> used_d = used;
        std::map<std::string, std::pair<int, int>> iota_d = iota;
        auto unary_letter_d = [&](const std::string& a) -> int { // 0-based letter, or -1
            auto [i, j] = iota_d.at(a);
            return i == j ? i - 1 : -1;
        };
        IndexedGrammar gd1(base.terminals, base.indices, base.start);
        auto is_direct_unary = [&](const std::string& a) {
            int l = unary_letter(a);
            return l >= 0 && (dmask & (1u << l));
        };
        for (const IProduction& p : base.productions) {
            if (is_direct_unary(p.lhs)) continue;
            if (kind_of(p) != PKind::general) {
                gd1.productions.push_back(p);
                continue;
            }
            bool replaced = false;
            std::vector<CfgSym> rhs;
            for (const CfgSym& s : p.rhs) {
                if (!s.is_terminal && is_direct_unary(s.name)) {
                    rhs.push_back(t_sym(t.at(static_cast<std::size_t>(unary_letter(s.name)))));
                    replaced = true;
                } else {
                    rhs.push_back(s);
                }
            }
            if (!replaced) {
                gd1.productions.push_back(p);
                continue;
            }
            if (!rhs_all_terminal(rhs)) {
                gd1.productions.push_back(make_general(p.lhs, std::move(rhs)));
            } else {
                // The production lost its nonterminals; erase the pending
                // index before emitting.
                std::string e = fresh_name(p.lhs + "!", used_d);
                iota_d[e] = iota.at(p.lhs);
                gd1.productions.push_back(make_general(p.lhs, {n_sym(e)}));
                for (const Symbol& f : base.indices)
                    gd1.productions.push_back(make_pop(e, f, {n_sym(e)}));
                gd1.productions.push_back(make_general(e, std::move(rhs)));
            }
        }

        // Stage two: permission bits choose the one subtree per non-direct
        // letter.
        std::vector<int> nd_letters; // 0-based positions of non-direct letters
        for (int i = 0; i < n; ++i)
            if (!(dmask & (1u << i))) nd_letters.push_back(i);
        int m = static_cast<int>(nd_letters.size());
        std::map<int, int> bit_of; // letter -> bit
        for (int bpos = 0; bpos < m; ++bpos) bit_of[nd_letters[static_cast<std::size_t>(bpos)]] = bpos;

        auto ann = [&](const std::string& a, std::uint32_t bits) {
            std::string s = a + "&";
            for (int bpos = 0; bpos < m; ++bpos) s += (bits & (1u << bpos)) ? '1' : '0';
            return s;
        };

        IndexedGrammar gd(gd1.terminals, gd1.indices,
                          ann(gd1.start, m ? (1u << m) - 1 : 0));
        std::map<std::string, std::pair<int, int>> iota_out;
        std::set<std::string> used_g;
        for (const std::string& nt : gd1.nonterminals())
            for (std::uint32_t bits = 0; bits < (1u << m); ++bits) used_g.insert(ann(nt, bits));
        std::map<std::pair<Word, std::pair<int, int>>, std::string> esc_memo;
        auto escape = [&](const Word& w, std::pair<int, int> interval) {
            auto key = std::make_pair(w, interval);
            auto it = esc_memo.find(key);
            if (it != esc_memo.end()) return it->second;
            std::string base_name = "one";
            for (const Symbol& s : w) base_name += "." + s;
            std::string name = fresh_name(base_name, used_g);
            esc_memo.emplace(key, name);
            for (const Symbol& f : gd1.indices)
                gd.productions.push_back(make_pop(name, f, {n_sym(name)}));
            std::vector<CfgSym> rhs;
            for (const Symbol& s : w) rhs.push_back(t_sym(s));
            gd.productions.push_back(make_general(name, std::move(rhs)));
            iota_out[name] = interval;
            return name;
        };

        iota_out[gd.start] = iota_d.at(gd1.start);
        if (unary_letter_d(gd1.start) >= 0)
            gd.productions.push_back(make_general(gd.start, {n_sym(gd1.start)}));

        for (const IProduction& p : gd1.productions) {
            int lu = unary_letter_d(p.lhs);
            if (lu >= 0) { // unary non-direct: part of its letter's one subtree
                gd.productions.push_back(p);
                iota_out[p.lhs] = iota_d.at(p.lhs);
                continue;
            }
            if (kind_of(p) != PKind::general) {
                const std::string& b = p.rhs.front().name;
                for (std::uint32_t bits = 0; bits < (1u << m); ++bits) {
                    IProduction q;
                    q.lhs = ann(p.lhs, bits);
                    q.pop_index = p.pop_index;
                    q.push_index = p.push_index;
                    q.rhs = {n_sym(ann(b, bits))};
                    gd.productions.push_back(std::move(q));
                    iota_out[ann(p.lhs, bits)] = iota_d.at(p.lhs);
                    iota_out[ann(b, bits)] = iota_d.at(b);
                }
                continue;
            }

            // Claimer slots: positions producing one non-direct letter.
            struct Slot {
                std::size_t pos;
                int letter; // 0-based
            };
            std::vector<Slot> claimers;
            std::vector<std::size_t> open_children; // non-unary nonterminals
            for (std::size_t i = 0; i < p.rhs.size(); ++i) {
                const CfgSym& s = p.rhs[i];
                if (s.is_terminal) {
                    int li = t.index_of(s.name);
                    if (!(dmask & (1u << li))) claimers.push_back({i, li});
                } else {
                    int l = unary_letter_d(s.name);
                    if (l >= 0)
                        claimers.push_back({i, l});
                    else
                        open_children.push_back(i);
                }
            }

            for (std::uint32_t bits = 0; bits < (1u << m); ++bits) {
                // Route each owned bit: keep one claimer slot or hand the
                // bit to one open child.
                std::vector<std::vector<int>> routes; // per bit: -1 none, slot id, or ~child id
                std::vector<int> owned;
                for (int bpos = 0; bpos < m; ++bpos) {
                    if (!(bits & (1u << bpos))) continue;
                    owned.push_back(bpos);
                    std::vector<int> r;
                    int letter = nd_letters[static_cast<std::size_t>(bpos)];
                    for (std::size_t ci = 0; ci < claimers.size(); ++ci)
                        if (claimers[ci].letter == letter) r.push_back(static_cast<int>(ci));
                    for (std::size_t oc = 0; oc < open_children.size(); ++oc)
                        r.push_back(~static_cast<int>(oc));
                    if (r.empty()) r.push_back(-1);
                    routes.push_back(std::move(r));
                }
                std::vector<std::size_t> pick(routes.size(), 0);
                while (true) {
                    std::set<std::size_t> kept_claimers;
                    std::vector<std::uint32_t> child_bits(open_children.size(), 0);
                    for (std::size_t bi = 0; bi < routes.size(); ++bi) {
                        int r = routes[bi][pick[bi]];
                        if (r >= 0)
                            kept_claimers.insert(claimers[static_cast<std::size_t>(r)].pos);
                        else if (r != -1)
                            child_bits[static_cast<std::size_t>(~r)] |=
                                1u << owned[static_cast<std::size_t>(bi)];
                    }
                    std::vector<CfgSym> rhs;
                    for (std::size_t i = 0; i < p.rhs.size(); ++i) {
                        const CfgSym& s = p.rhs[i];
                        if (s.is_terminal) {
                            int li = t.index_of(s.name);
                            if ((dmask & (1u << li)) || kept_claimers.count(i))
                                rhs.push_back(s);
                            continue;
                        }
                        int l = unary_letter_d(s.name);
                        if (l >= 0) {
                            if (kept_claimers.count(i)) {
                                rhs.push_back(s); // plain: inside its one subtree
                                iota_out[s.name] = iota_d.at(s.name);
                            }
                            continue;
                        }
                        std::size_t oc = 0;
                        while (open_children[oc] != i) ++oc;
                        rhs.push_back(n_sym(ann(s.name, child_bits[oc])));
                        iota_out[ann(s.name, child_bits[oc])] = iota_d.at(s.name);
                    }
                    bool had_nt = !rhs_all_terminal(p.rhs);
                    bool has_nt = !rhs_all_terminal(rhs) && !rhs.empty();
                    std::string lhs = ann(p.lhs, bits);
                    iota_out[lhs] = iota_d.at(p.lhs);
                    if (had_nt && !has_nt) {
                        Word w;
                        for (const CfgSym& s : rhs) w.push_back(s.name);
                        gd.productions.push_back(
                            make_general(lhs, {n_sym(escape(w, iota_d.at(p.lhs)))}));
                    } else {
                        gd.productions.push_back(make_general(lhs, std::move(rhs)));
                    }
                    // Next routing combination.
                    std::size_t bi = 0;
                    while (bi < pick.size() && ++pick[bi] == routes[bi].size()) {
                        pick[bi] = 0;
                        ++bi;
                    }
                    if (bi == pick.size()) break;
                    if (pick.empty()) break;
                }
            }
        }

        gd = indexed_cleanup(gd);
        PartitionedGrammar member;
        member.grammar.grammar = gd;
        for (const std::string& nt : gd.nonterminals())
            member.grammar.iota[nt] = iota_out.at(nt);
        member.direct = direct;
        family.push_back(std::move(member));
    }
    return family;
}

// --- the 2-adic encoding and the correspondence-problem generator ----------------------

long long nu(const Word& w) {
    long long v = 0;
    for (const Symbol& s : w) {
        if (s == "1")
            v = 2 * v + 1;
        else if (s == "2")
            v = 2 * v + 2;
        else
            throw UnknownLetter("the 2-adic value is defined over letters 1 and 2, got " + s);
    }
    return v;
}

IndexedGrammar pcp_grammar(const Alphabet& x, const std::map<Symbol, Word>& alpha,
                           const std::map<Symbol, Word>& beta) {
    if (x.contains("1") || x.contains("2"))
        throw AlphabetMismatch("correspondence alphabet must avoid the digits 1 and 2");
    for (const Symbol& s : x) {
        if (!alpha.count(s) || !beta.count(s))
            throw ArityMismatch("both morphisms must be defined on letter " + s);
        for (const Word* w : {&alpha.at(s), &beta.at(s)})
            for (const Symbol& d : *w)
                if (d != "1" && d != "2")
                    throw UnknownLetter("morphism images must use letters 1 and 2, got " + d);
    }

    std::vector<Symbol> index_letters = x.letters();
    index_letters.push_back("1");
    index_letters.push_back("2");
    Alphabet indices(index_letters);
    Alphabet terminals({"a", "b"});

    std::set<std::string> used;
    for (const Symbol& s : indices) used.insert(s);
    used.insert("a");
    used.insert("b");
    auto nt = [&used](const std::string& base) { return fresh_name(base, used); };
    std::string s_ = nt("S"), u_ = nt("U");
    std::string a_ = nt("A"), abar = nt("Abar"), b_ = nt("B"), bbar = nt("Bbar");

    IndexedGrammar g(terminals, indices, s_);
    for (const Symbol& xl : x) {
        g.productions.push_back(make_push(s_, u_, xl));
        g.productions.push_back(make_push(u_, u_, xl));
    }
    g.productions.push_back(make_general(u_, {n_sym(a_), n_sym(b_)}));

    // C ?x -> C with the morphism image pushed on top, via a chain of fresh
    // nonterminals pushing the image from its last letter to its first.
    auto chain = [&](const std::string& c, const Symbol& xl, const Word& image) {
        if (image.empty()) {
            g.productions.push_back(make_pop(c, xl, {n_sym(c)}));
            return;
        }
        std::vector<std::string> z;
        for (std::size_t i = 0; i <= image.size(); ++i) z.push_back(nt(c + "'"));
        g.productions.push_back(make_pop(c, xl, {n_sym(z[image.size()])}));
        for (std::size_t i = image.size(); i >= 1; --i)
            g.productions.push_back(make_push(z[i], z[i - 1], image[i - 1]));
        g.productions.push_back(make_general(z[0], {n_sym(c)}));
    };
    for (const Symbol& xl : x) {
        chain(a_, xl, alpha.at(xl));
        chain(abar, xl, alpha.at(xl));
        chain(b_, xl, beta.at(xl));
        chain(bbar, xl, beta.at(xl));
    }

    // Dyadic unfolding: popping digit d doubles (and adjusts) the count.
    for (const auto& [c, cbar] : {std::pair{a_, abar}, std::pair{b_, bbar}}) {
        g.productions.push_back(make_pop(c, "1", {n_sym(c), n_sym(cbar)}));
        g.productions.push_back(make_pop(c, "2", {n_sym(c), n_sym(cbar), n_sym(cbar)}));
        for (const Symbol& d : {Symbol("1"), Symbol("2")})
            g.productions.push_back(make_pop(cbar, d, {n_sym(cbar), n_sym(cbar)}));
    }
    g.productions.push_back(make_general(a_, {}));
    g.productions.push_back(make_general(abar, {t_sym("a")}));
    g.productions.push_back(make_general(b_, {}));
    g.productions.push_back(make_general(bbar, {t_sym("b")}));
    return g;
}

// --- text format ------------------------------------------------------------------------

namespace {

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

} // namespace

IndexedFile parse_indexed_file(const std::string& text, const std::string& filename) {
    IndexedFile file;
    std::vector<Symbol> terminals, indices;
    bool have_start = false;
    std::string start;
    struct RawProd {
        int line;
        std::vector<std::string> lhs, rhs;
    };
    std::vector<RawProd> raw;
    std::vector<std::tuple<int, std::string, int, int>> intervals;
    std::vector<std::pair<int, std::string>> directs;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::vector<std::string> toks = split_ws(line);
        if (toks.empty()) continue;
        if (toks[0] == "terminals:") {
            terminals.insert(terminals.end(), toks.begin() + 1, toks.end());
            continue;
        }
        if (toks[0] == "indices:") {
            indices.insert(indices.end(), toks.begin() + 1, toks.end());
            continue;
        }
        if (toks[0] == "start:") {
            if (toks.size() != 2) throw ParseError(filename, lineno, "start: needs one name");
            start = toks[1];
            have_start = true;
            continue;
        }
        if (toks[0] == "interval:") {
            if (toks.size() != 4)
                throw ParseError(filename, lineno, "interval: needs a name and two numbers");
            try {
                intervals.emplace_back(lineno, toks[1], std::stoi(toks[2]), std::stoi(toks[3]));
            } catch (const std::exception&) {
                throw ParseError(filename, lineno, "interval: bounds must be integers");
            }
            continue;
        }
        if (toks[0] == "direct:") {
            for (std::size_t i = 1; i < toks.size(); ++i) directs.emplace_back(lineno, toks[i]);
            continue;
        }
        auto arrow = std::find(toks.begin(), toks.end(), "->");
        if (arrow == toks.end())
            throw ParseError(filename, lineno, "expected a production or a header line");
        RawProd rp;
        rp.line = lineno;
        rp.lhs.assign(toks.begin(), arrow);
        rp.rhs.assign(arrow + 1, toks.end());
        if (rp.lhs.empty()) throw ParseError(filename, lineno, "missing left-hand side");
        raw.push_back(std::move(rp));
    }
    if (!have_start) throw ParseError(filename, lineno, "missing start: declaration");

    try {
        file.grammar = IndexedGrammar(Alphabet(terminals), Alphabet(indices), start);
    } catch (const std::exception& e) {
        throw ParseError(filename, lineno, e.what());
    }
    const Alphabet& t = file.grammar.terminals;
    const Alphabet& ix = file.grammar.indices;
    for (const Symbol& s : t)
        if (ix.contains(s))
            throw ParseError(filename, lineno, "letter declared both terminal and index: " + s);

    for (const RawProd& rp : raw) {
        IProduction p;
        if (rp.lhs.size() == 1) {
            p.lhs = rp.lhs[0];
        } else if (rp.lhs.size() == 2 && rp.lhs[1].size() > 1 && rp.lhs[1][0] == '?') {
            p.lhs = rp.lhs[0];
            Symbol f = rp.lhs[1].substr(1);
            if (!ix.contains(f))
                throw ParseError(filename, rp.line, "undeclared index letter: " + f);
            p.pop_index = f;
        } else {
            throw ParseError(filename, rp.line, "left-hand side must be A or A ?f");
        }
        if (t.contains(p.lhs) || ix.contains(p.lhs))
            throw ParseError(filename, rp.line, "left-hand side must be a nonterminal: " + p.lhs);

        std::vector<std::string> rhs = rp.rhs;
        if (rhs.size() == 1 && rhs[0] == "_") rhs.clear();
        if (!rhs.empty() && rhs.back().size() > 1 && rhs.back()[0] == '^') {
            Symbol f = rhs.back().substr(1);
            if (!ix.contains(f))
                throw ParseError(filename, rp.line, "undeclared index letter: " + f);
            if (p.pop_index)
                throw ParseError(filename, rp.line, "a production cannot both pop and push");
            if (rhs.size() != 2 || t.contains(rhs[0]))
                throw ParseError(filename, rp.line, "a push must be of the form A -> B ^f");
            p.push_index = f;
            rhs.pop_back();
        }
        for (const std::string& tok : rhs) {
            if (tok == "_" || (tok.size() > 1 && (tok[0] == '^' || tok[0] == '?')))
                throw ParseError(filename, rp.line, "unexpected token " + tok);
            if (ix.contains(tok))
                throw ParseError(filename, rp.line,
                                 "index letter used as a grammar symbol: " + tok);
            p.rhs.push_back(t.contains(tok) ? t_sym(tok) : n_sym(tok));
        }
        file.grammar.productions.push_back(std::move(p));
    }

    std::set<std::string> nts;
    for (const std::string& a : file.grammar.nonterminals()) nts.insert(a);
    for (const std::string& a : nts)
        if (t.contains(a) || ix.contains(a))
            throw ParseError(filename, 0, "name used both as nonterminal and letter: " + a);
    for (const auto& [ln, name, i, j] : intervals) {
        if (!nts.count(name))
            throw ParseError(filename, ln, "interval for unknown nonterminal: " + name);
        if (i < 1 || j < i) throw ParseError(filename, ln, "interval bounds must satisfy 1 <= i <= j");
        file.iota[name] = {i, j};
    }
    for (const auto& [ln, s] : directs) {
        if (!t.contains(s)) throw ParseError(filename, ln, "direct letter not a terminal: " + s);
        file.direct.insert(s);
    }
    return file;
}

IndexedGrammar parse_indexed(const std::string& text, const std::string& filename) {
    return parse_indexed_file(text, filename).grammar;
}

std::string print_indexed(const IndexedGrammar& g) {
    std::ostringstream out;
    out << "terminals:";
    for (const Symbol& s : g.terminals) out << " " << s;
    out << "\n";
    out << "indices:";
    for (const Symbol& s : g.indices) out << " " << s;
    out << "\n";
    out << "start: " << g.start << "\n";
    for (const IProduction& p : g.productions) {
        out << p.lhs;
        if (p.pop_index) out << " ?" << *p.pop_index;
        out << " ->";
        if (p.rhs.empty() && !p.push_index) {
            out << " _";
        } else {
            for (const CfgSym& s : p.rhs) out << " " << s.name;
            if (p.push_index) out << " ^" << *p.push_index;
        }
        out << "\n";
    }
    return out.str();
}

std::string print_interval(const IntervalGrammar& g) {
    std::ostringstream out;
    out << print_indexed(g.grammar);
    for (const auto& [name, ij] : g.iota)
        out << "interval: " << name << " " << ij.first << " " << ij.second << "\n";
    return out.str();
}

std::string print_partitioned(const PartitionedGrammar& g) {
    std::ostringstream out;
    out << print_interval(g.grammar);
    out << "direct:";
    for (const Symbol& s : g.direct) out << " " << s;
    out << "\n";
    return out.str();
}

} // namespace dcl
