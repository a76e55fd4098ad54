#include "dcl/cfg.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "dcl/errors.hpp"

namespace dcl {

namespace {

constexpr long long kInf = std::numeric_limits<long long>::max() / 4;
constexpr std::size_t kEnumerateStepCap = 500000;
constexpr std::size_t kAlphSetCombinationCap = 100000;

std::string fresh(const std::string& base, std::set<std::string>& used) {
    std::string name = base;
    while (used.count(name)) name += "'";
    used.insert(name);
    return name;
}

std::map<std::string, long long> min_lengths(const Cfg& g) {
    std::map<std::string, long long> len;
    for (const std::string& n : g.nonterminals()) len[n] = kInf;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const CfgProduction& p : g.productions) {
            long long total = 0;
            for (const CfgSym& s : p.rhs) {
                if (s.is_terminal)
                    total += 1;
                else
                    total += len[s.name];
                if (total >= kInf) {
                    total = kInf;
                    break;
                }
            }
            if (total < len[p.lhs]) {
                len[p.lhs] = total;
                changed = true;
            }
        }
    }
    return len;
}

} // namespace

std::vector<std::string> Cfg::nonterminals() const {
    std::vector<std::string> order;
    std::set<std::string> seen;
    auto push = [&](const std::string& n) {
        if (seen.insert(n).second) order.push_back(n);
    };
    push(start);
    for (const CfgProduction& p : productions) {
        push(p.lhs);
        for (const CfgSym& s : p.rhs)
            if (!s.is_terminal) push(s.name);
    }
    return order;
}

CfgSym t_sym(const Symbol& a) { return CfgSym{true, a}; }
CfgSym n_sym(const std::string& name) { return CfgSym{false, name}; }

Cfg cfg_trim(const Cfg& g) {
    std::map<std::string, long long> len = min_lengths(g);
    auto productive = [&](const std::string& n) { return len[n] < kInf; };

    std::set<std::string> reach{g.start};
    bool changed = true;
    while (changed) {
        changed = false;
        for (const CfgProduction& p : g.productions) {
            if (!reach.count(p.lhs) || !productive(p.lhs)) continue;
            bool ok = true;
            for (const CfgSym& s : p.rhs)
                if (!s.is_terminal && !productive(s.name)) ok = false;
            if (!ok) continue;
            for (const CfgSym& s : p.rhs)
                if (!s.is_terminal && reach.insert(s.name).second) changed = true;
        }
    }

    Cfg out(g.terminals, g.start);
    for (const CfgProduction& p : g.productions) {
        if (!reach.count(p.lhs) || !productive(p.lhs)) continue;
        bool ok = true;
        for (const CfgSym& s : p.rhs)
            if (!s.is_terminal && !productive(s.name)) ok = false;
        if (ok) out.productions.push_back(p);
    }
    return out;
}

Cfg cfg_binarize(const Cfg& g) {
    std::set<std::string> used;
    for (const std::string& n : g.nonterminals()) used.insert(n);
    Cfg out(g.terminals, g.start);
    for (const CfgProduction& p : g.productions) {
        if (p.rhs.size() <= 2) {
            out.productions.push_back(p);
            continue;
        }
        std::string lhs = p.lhs;
        for (std::size_t i = 0; i + 2 < p.rhs.size(); ++i) {
            std::string next = fresh(p.lhs + "_b", used);
            out.productions.push_back({lhs, {p.rhs[i], n_sym(next)}});
            lhs = next;
        }
        out.productions.push_back({lhs, {p.rhs[p.rhs.size() - 2], p.rhs.back()}});
    }
    return out;
}

bool cfg_is_empty(const Cfg& g) {
    std::map<std::string, long long> len = min_lengths(g);
    return len[g.start] >= kInf;
}

std::set<Word> cfg_enumerate(const Cfg& g_in, int max_len) {
    // Grow the word sets of every nonterminal bottom-up; within the finite
    // universe of words up to max_len the iteration reaches a fixpoint that
    // is exactly the language cut at that length.
    Cfg g = cfg_trim(g_in);
    std::map<std::string, std::set<Word>> words;
    for (const std::string& n : g.nonterminals()) words[n];
    std::size_t steps = 0;
    auto charge = [&steps] {
        if (++steps > kEnumerateStepCap)
            throw BudgetExhausted("cfg_enumerate: expansion exceeded its step guard");
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (const CfgProduction& p : g.productions) {
            std::set<Word>& into = words[p.lhs];
            Word acc;
            auto grow = [&](auto&& self, std::size_t i) -> void {
                charge();
                if (i == p.rhs.size()) {
                    if (into.insert(acc).second) changed = true;
                    return;
                }
                const CfgSym& s = p.rhs[i];
                if (s.is_terminal) {
                    if (static_cast<int>(acc.size()) + 1 > max_len) return;
                    acc.push_back(s.name);
                    self(self, i + 1);
                    acc.pop_back();
                    return;
                }
                for (const Word& w : words[s.name]) {
                    charge();
                    if (static_cast<int>(acc.size() + w.size()) > max_len) continue;
                    acc.insert(acc.end(), w.begin(), w.end());
                    self(self, i + 1);
                    acc.resize(acc.size() - w.size());
                }
            };
            grow(grow, 0);
        }
    }
    return words[g.start];
}

Cfg cfg_apply_transduction(const Cfg& g_in, const Transducer& t_in) {
    if (g_in.terminals != t_in.input_alphabet)
        throw AlphabetMismatch(
            "cfg_apply_transduction: grammar terminals differ from the transducer input "
            "alphabet");
    Transducer t = transducer_normalize(t_in);
    Cfg g = cfg_binarize(cfg_trim(g_in));
    Cfg out(t.output_alphabet, "S");
    if (cfg_is_empty(g)) return out;

    int qf = -1;
    for (int s = 0; s < t.state_count(); ++s)
        if (t.finals[s]) qf = s;
    if (qf < 0) return out;

    std::set<std::string> used;
    for (const std::string& n : g.nonterminals()) used.insert(n);

    // Wrap terminals that appear in two-symbol right-hand sides so every
    // production has one of the shapes: empty, single letter, B, or B C.
    std::map<Symbol, std::string> wrapper;
    for (CfgProduction& p : g.productions) {
        if (p.rhs.size() != 2) continue;
        for (CfgSym& s : p.rhs) {
            if (!s.is_terminal) continue;
            auto it = wrapper.find(s.name);
            if (it == wrapper.end())
                it = wrapper.emplace(s.name, fresh("Lift_" + s.name, used)).first;
            s = n_sym(it->second);
        }
    }
    for (auto& [letter, name] : wrapper) g.productions.push_back({name, {t_sym(letter)}});

    int states = t.state_count();
    std::map<std::pair<int, int>, std::string> writer; // outputs along reading-free paths
    std::map<std::tuple<int, std::string, int>, std::string> trip;
    auto writer_name = [&](int p, int q) {
        auto it = writer.find({p, q});
        if (it == writer.end())
            it = writer
                     .emplace(std::make_pair(p, q),
                              fresh("W" + std::to_string(p) + "_" + std::to_string(q), used))
                     .first;
        return it->second;
    };
    auto trip_name = [&](int p, const std::string& a, int q) {
        auto key = std::make_tuple(p, a, q);
        auto it = trip.find(key);
        if (it == trip.end())
            it = trip.emplace(key, fresh("P" + std::to_string(p) + "_" + a + "_" +
                                             std::to_string(q),
                                         used))
                     .first;
        return it->second;
    };

    Cfg res(t.output_alphabet, fresh("S", used));
    for (int p = 0; p < states; ++p) res.productions.push_back({writer_name(p, p), {}});
    for (const TEdge& e : t.edges) {
        if (!e.in.empty()) continue;
        for (int p = 0; p < states; ++p) {
            std::vector<CfgSym> rhs{n_sym(writer_name(p, e.from))};
            for (const Symbol& y : e.out) rhs.push_back(t_sym(y));
            res.productions.push_back({writer_name(p, e.to), std::move(rhs)});
        }
    }
    for (const CfgProduction& p : g.productions) {
        if (p.rhs.empty()) {
            for (int x = 0; x < states; ++x)
                for (int y = 0; y < states; ++y)
                    res.productions.push_back(
                        {trip_name(x, p.lhs, y), {n_sym(writer_name(x, y))}});
        } else if (p.rhs.size() == 1 && p.rhs[0].is_terminal) {
            for (const TEdge& e : t.edges) {
                if (e.in.size() != 1 || e.in[0] != p.rhs[0].name) continue;
                for (int x = 0; x < states; ++x)
                    for (int y = 0; y < states; ++y)
                        res.productions.push_back({trip_name(x, p.lhs, y),
                                                   {n_sym(writer_name(x, e.from)),
                                                    n_sym(writer_name(e.to, y))}});
            }
        } else if (p.rhs.size() == 1) {
            for (int x = 0; x < states; ++x)
                for (int y = 0; y < states; ++y)
                    res.productions.push_back(
                        {trip_name(x, p.lhs, y), {n_sym(trip_name(x, p.rhs[0].name, y))}});
        } else {
            for (int x = 0; x < states; ++x)
                for (int y = 0; y < states; ++y)
                    for (int r = 0; r < states; ++r)
                        res.productions.push_back({trip_name(x, p.lhs, y),
                                                   {n_sym(trip_name(x, p.rhs[0].name, r)),
                                                    n_sym(trip_name(r, p.rhs[1].name, y))}});
        }
    }
    res.productions.push_back({res.start, {n_sym(trip_name(t.initial, g.start, qf))}});
    return cfg_trim(res);
}

namespace {

constexpr std::size_t kInlineSizeCap = 20000;

// Shrink the grammar without changing its language: drop duplicate
// productions, merge nonterminals whose production bodies coincide (up to
// their own name), and inline nonterminals that have a single production
// not mentioning themselves. Transduction images are full of such wrapper
// names; every variable removed here spares the elimination below.
Cfg cfg_inline_units(const Cfg& g_in) {
    Cfg g = g_in;
    auto total_size = [](const Cfg& c) {
        std::size_t s = 0;
        for (const CfgProduction& p : c.productions) s += 1 + p.rhs.size();
        return s;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        {
            std::set<std::pair<std::string, std::vector<std::pair<bool, std::string>>>> seen;
            Cfg out(g.terminals, g.start);
            for (const CfgProduction& p : g.productions) {
                std::vector<std::pair<bool, std::string>> key;
                for (const CfgSym& s : p.rhs) key.emplace_back(s.is_terminal, s.name);
                if (seen.insert({p.lhs, std::move(key)}).second)
                    out.productions.push_back(p);
                else
                    changed = true;
            }
            g = std::move(out);
        }
        {
            // Bodies as signatures, occurrences of the owner marked
            // uniformly: equal signatures mean equal least solutions.
            using Row = std::vector<std::pair<int, std::string>>;
            std::map<std::string, std::set<Row>> sig;
            for (const CfgProduction& p : g.productions) {
                Row row;
                for (const CfgSym& s : p.rhs) {
                    if (s.is_terminal)
                        row.emplace_back(0, s.name);
                    else if (s.name == p.lhs)
                        row.emplace_back(1, "");
                    else
                        row.emplace_back(2, s.name);
                }
                sig[p.lhs].insert(std::move(row));
            }
            std::map<std::set<Row>, std::string> rep;
            std::map<std::string, std::string> alias;
            if (sig.count(g.start)) rep[sig[g.start]] = g.start;
            for (const auto& [nt, s] : sig) {
                auto [it, fresh] = rep.try_emplace(s, nt);
                if (!fresh && it->second != nt) alias[nt] = it->second;
            }
            if (!alias.empty()) {
                changed = true;
                Cfg out(g.terminals, g.start);
                for (const CfgProduction& p : g.productions) {
                    if (alias.count(p.lhs)) continue;
                    CfgProduction r{p.lhs, p.rhs};
                    for (CfgSym& s : r.rhs)
                        if (!s.is_terminal && alias.count(s.name)) s.name = alias[s.name];
                    out.productions.push_back(std::move(r));
                }
                g = std::move(out);
                continue;
            }
        }
        std::map<std::string, std::size_t> count;
        std::map<std::string, const CfgProduction*> sole;
        for (const CfgProduction& p : g.productions) {
            ++count[p.lhs];
            sole[p.lhs] = &p;
        }
        for (const auto& [name, p] : sole) {
            if (name == g.start || count[name] != 1) continue;
            bool self = false;
            for (const CfgSym& s : p->rhs)
                if (!s.is_terminal && s.name == name) self = true;
            if (self) continue;
            if (total_size(g) + p->rhs.size() > kInlineSizeCap) continue;
            std::vector<CfgSym> body = p->rhs;
            Cfg next(g.terminals, g.start);
            for (const CfgProduction& q : g.productions) {
                if (q.lhs == name) continue;
                CfgProduction r{q.lhs, {}};
                for (const CfgSym& s : q.rhs) {
                    if (!s.is_terminal && s.name == name)
                        r.rhs.insert(r.rhs.end(), body.begin(), body.end());
                    else
                        r.rhs.push_back(s);
                }
                next.productions.push_back(std::move(r));
            }
            g = std::move(next);
            changed = true;
            break;
        }
    }
    return g;
}

// --- Parikh image by commutative elimination --------------------------------
//
// Each production is read as a commutative monomial counting letters and
// nonterminal occurrences, so a grammar becomes a system of equations
// X_i = E_i over semilinear sets. Variables are eliminated one at a time:
// the least solution of X = E(X) in the X dimension collects derivation
// trees whose nodes each pick a monomial of E, and the picked X-degrees are
// children counts, so they satisfy one linear Diophantine balance equation
// (children = nodes - 1). Minimal solutions of that equation come from a
// Contejean-Devie style search; the nonempty choice of monomials pins down
// which periods the resulting linear sets may use.

constexpr std::size_t kParikhPartsCap = 6000;
constexpr std::size_t kParikhSearchCap = 400000;
constexpr std::size_t kParikhUnionCap = 16;
constexpr std::size_t kParikhConeFuel = 4000;
constexpr std::size_t kParikhCoverCap = 4096;
constexpr std::size_t kParikhSubstCap = 5000000;
constexpr std::size_t kParikhSweepCap = 2000;

using Poly = std::vector<LinearSet>;

[[noreturn]] void parikh_overrun() {
    throw BudgetExhausted("cfg_parikh: elimination exceeded its budget");
}

CountVec vec_add(const CountVec& a, const CountVec& b) {
    CountVec r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    return r;
}

void canon_part(LinearSet& ls) {
    std::vector<CountVec> ps;
    for (CountVec& p : ls.periods) {
        bool zero = true;
        for (long long x : p)
            if (x != 0) {
                zero = false;
                break;
            }
        if (!zero) ps.push_back(std::move(p));
    }
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
    ls.periods = std::move(ps);
}

// Can the target be written as a nonnegative combination of the periods?
// Bounded search; giving up is sound because subsumption only prunes.
bool cone_member(const CountVec& target, const std::vector<CountVec>& periods,
                 std::set<CountVec>& visited, std::size_t* fuel) {
    bool zero = true;
    for (long long x : target) {
        if (x < 0) return false;
        if (x != 0) zero = false;
    }
    if (zero) return true;
    if (*fuel == 0) return false;
    if (!visited.insert(target).second) return false;
    --*fuel;
    for (const CountVec& p : periods) {
        CountVec rest = target;
        bool ok = true;
        for (std::size_t i = 0; i < rest.size(); ++i) {
            rest[i] -= p[i];
            if (rest[i] < 0) {
                ok = false;
                break;
            }
        }
        if (ok && cone_member(rest, periods, visited, fuel)) return true;
    }
    return false;
}

// Sufficient test for a's set lying inside b's: the base offset and every
// period of a must be nonnegative combinations of b's periods.
bool part_subsumed(const LinearSet& a, const LinearSet& b) {
    CountVec diff = a.base;
    for (std::size_t i = 0; i < diff.size(); ++i) {
        diff[i] -= b.base[i];
        if (diff[i] < 0) return false;
    }
    std::size_t fuel = kParikhConeFuel;
    std::set<CountVec> visited;
    if (!cone_member(diff, b.periods, visited, &fuel)) return false;
    for (const CountVec& p : a.periods) {
        if (std::binary_search(b.periods.begin(), b.periods.end(), p)) continue;
        visited.clear();
        if (!cone_member(p, b.periods, visited, &fuel)) return false;
    }
    return true;
}

void compact(Poly& e) {
    for (LinearSet& ls : e) canon_part(ls);
    std::sort(e.begin(), e.end(), [](const LinearSet& x, const LinearSet& y) {
        return std::tie(x.base, x.periods) < std::tie(y.base, y.periods);
    });
    e.erase(std::unique(e.begin(), e.end(),
                        [](const LinearSet& x, const LinearSet& y) {
                            return x.base == y.base && x.periods == y.periods;
                        }),
            e.end());
    if (e.size() > kParikhPartsCap) parikh_overrun();
    if (e.size() > kParikhSweepCap) return;
    std::vector<char> drop(e.size(), 0);
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (drop[i]) continue;
        for (std::size_t j = 0; j < e.size() && !drop[i]; ++j) {
            if (i == j || drop[j]) continue;
            if (part_subsumed(e[i], e[j]) && (j < i || !part_subsumed(e[j], e[i])))
                drop[i] = 1;
        }
    }
    Poly kept;
    for (std::size_t i = 0; i < e.size(); ++i)
        if (!drop[i]) kept.push_back(std::move(e[i]));
    e = std::move(kept);
}

// Minimal nonnegative solutions of coeffs . y = rhs: `inhom` gets the
// minimal solutions themselves, `homog` the minimal nonzero solutions of
// the homogeneous equation (every solution is one of the former plus a sum
// of the latter). Works on the homogenized equation coeffs . y - rhs * z = 0
// with the slack z capped at one, walking toward zero along signs.
void cd_minimal(const std::vector<long long>& coeffs, long long rhs,
                std::vector<std::vector<long long>>& inhom,
                std::vector<std::vector<long long>>& homog) {
    std::size_t q = coeffs.size();
    std::vector<long long> ext = coeffs;
    ext.push_back(-rhs);
    std::vector<std::vector<long long>> sols;
    auto minimal = [&](const std::vector<long long>& y) {
        for (const auto& s : sols) {
            bool leq = true;
            for (std::size_t i = 0; i <= q; ++i)
                if (s[i] > y[i]) {
                    leq = false;
                    break;
                }
            if (leq) return false;
        }
        return true;
    };
    std::set<std::vector<long long>> seen;
    std::deque<std::pair<std::vector<long long>, long long>> frontier;
    for (std::size_t i = 0; i <= q; ++i) {
        std::vector<long long> y(q + 1, 0);
        y[i] = 1;
        seen.insert(y);
        frontier.emplace_back(std::move(y), ext[i]);
    }
    std::size_t steps = 0;
    while (!frontier.empty()) {
        if (++steps > kParikhSearchCap) parikh_overrun();
        auto [y, dot] = std::move(frontier.front());
        frontier.pop_front();
        if (!minimal(y)) continue;
        if (dot == 0) {
            sols.push_back(std::move(y));
            continue;
        }
        for (std::size_t i = 0; i <= q; ++i) {
            if (dot > 0 ? ext[i] >= 0 : ext[i] <= 0) continue;
            if (i == q && y[q] >= 1) continue;
            std::vector<long long> next = y;
            ++next[i];
            if (!seen.insert(next).second) continue;
            frontier.emplace_back(std::move(next), dot + ext[i]);
        }
    }
    for (auto& s : sols) {
        long long z = s.back();
        s.pop_back();
        (z == 1 ? inhom : homog).push_back(std::move(s));
    }
}

// Least solution of X = union of `e` in the `dim` coordinate. A derivation
// tree picks one part per node and draws some of its periods; summed over
// the tree, the drawn `dim` degrees must equal the node count minus one.
// A period is available once any part granting it appears in the tree, so
// it suffices to union over irredundant covers: sets of parts in which
// each member appears once mandatorily and grants a period the other
// members do not. All parts additionally join every balance equation as
// free variables.
Poly solve_variable(const Poly& e, std::size_t dim) {
    if (e.empty()) return {};
    std::size_t width = e[0].base.size();
    std::vector<std::size_t> rich;
    for (std::size_t j = 0; j < e.size(); ++j)
        if (!e[j].periods.empty()) rich.push_back(j);

    std::vector<std::vector<std::size_t>> covers;
    std::vector<std::size_t> cur;
    auto irredundant = [&](const std::vector<std::size_t>& sigma) {
        for (std::size_t drop : sigma) {
            std::set<CountVec> rest;
            for (std::size_t j : sigma)
                if (j != drop)
                    rest.insert(e[j].periods.begin(), e[j].periods.end());
            bool contributes = false;
            for (const CountVec& p : e[drop].periods)
                if (!rest.count(p)) contributes = true;
            if (!contributes) return false;
        }
        return true;
    };
    auto enumerate = [&](auto&& self, std::size_t lo, std::set<CountVec>& granted) -> void {
        if (irredundant(cur)) {
            covers.push_back(cur);
            if (covers.size() > kParikhCoverCap) parikh_overrun();
        }
        for (std::size_t ix = lo; ix < rich.size(); ++ix) {
            std::size_t j = rich[ix];
            std::vector<CountVec> added;
            for (const CountVec& p : e[j].periods)
                if (granted.insert(p).second) added.push_back(p);
            if (!added.empty()) {
                cur.push_back(j);
                self(self, ix + 1, granted);
                cur.pop_back();
            }
            for (const CountVec& p : added) granted.erase(p);
        }
    };
    std::set<CountVec> granted;
    enumerate(enumerate, 0, granted);

    Poly out;
    std::size_t next_compact = kParikhSweepCap;
    for (const std::vector<std::size_t>& sigma : covers) {
        std::set<std::size_t> in_sigma(sigma.begin(), sigma.end());
        std::set<CountVec> avail;
        for (std::size_t j : sigma)
            avail.insert(e[j].periods.begin(), e[j].periods.end());
        // One variable per mandatory part (extra uses beyond the first),
        // one per remaining part (used any number of times), then one per
        // available period.
        std::vector<long long> coeffs;
        std::vector<const CountVec*> gens;
        long long rhs = -1;
        for (std::size_t j : sigma) {
            long long deg = e[j].base[dim];
            coeffs.push_back(deg - 1);
            gens.push_back(&e[j].base);
            rhs -= deg - 1;
        }
        for (std::size_t j = 0; j < e.size(); ++j) {
            if (in_sigma.count(j)) continue;
            coeffs.push_back(e[j].base[dim] - 1);
            gens.push_back(&e[j].base);
        }
        for (const CountVec& p : avail) {
            coeffs.push_back(p[dim]);
            gens.push_back(&p);
        }
        std::vector<std::vector<long long>> inhom, homog;
        cd_minimal(coeffs, rhs, inhom, homog);
        if (inhom.empty()) continue;
        LinearSet shape;
        shape.base.assign(width, 0);
        for (std::size_t j : sigma) shape.base = vec_add(shape.base, e[j].base);
        for (const auto& h : homog) {
            CountVec per(width, 0);
            for (std::size_t v = 0; v < h.size(); ++v)
                for (long long k = 0; k < h[v]; ++k) per = vec_add(per, *gens[v]);
            per[dim] = 0;
            shape.periods.push_back(std::move(per));
        }
        for (const auto& h : inhom) {
            LinearSet ls = shape;
            for (std::size_t v = 0; v < h.size(); ++v)
                for (long long k = 0; k < h[v]; ++k) ls.base = vec_add(ls.base, *gens[v]);
            ls.base[dim] = 0;
            out.push_back(std::move(ls));
            if (out.size() >= next_compact) {
                compact(out);
                next_compact = std::max(out.size() * 2, kParikhSweepCap);
            }
        }
    }
    return out;
}

// Replace every occurrence counted in the `dim` coordinate of `f` by a
// vector from the closed set `c`. Each part of `f` draws its base's
// occurrences from some components of `c` and may pump periods that
// mention the variable, provided each drawn component really contributes;
// that keeps the used components' own periods available exactly when a
// vector of theirs is present.
Poly substitute_variable(const Poly& f, std::size_t dim, const Poly& c) {
    Poly out;
    std::size_t next_compact = kParikhSweepCap;
    std::size_t steps = 0;
    auto charge = [&steps] {
        if (++steps > kParikhSubstCap) parikh_overrun();
    };
    std::size_t r = c.size();
    if (r > kParikhUnionCap * 8) parikh_overrun();
    for (const LinearSet& part : f) {
        long long k0 = part.base[dim];
        std::vector<CountVec> plain, carry;
        for (const CountVec& p : part.periods)
            (p[dim] != 0 ? carry : plain).push_back(p);
        if (k0 == 0 && carry.empty()) {
            out.push_back(part);
            continue;
        }
        if (c.empty()) {
            // Nothing can fill the occurrences. Parts whose base needs the
            // variable vanish; pumping periods that need it just drop out.
            if (k0 != 0) continue;
            out.push_back({part.base, plain});
            continue;
        }
        CountVec base0 = part.base;
        base0[dim] = 0;

        // All draw patterns of one period `p` within the used components.
        auto period_variants = [&](const CountVec& p, const std::vector<std::size_t>& comps,
                                   std::vector<CountVec>& into) {
            CountVec head = p;
            long long need = head[dim];
            head[dim] = 0;
            auto rec = [&](auto&& self, CountVec cur, long long left, std::size_t lo) -> void {
                charge();
                if (left == 0) {
                    into.push_back(std::move(cur));
                    return;
                }
                for (std::size_t ix = lo; ix < comps.size(); ++ix)
                    self(self, vec_add(cur, c[comps[ix]].base), left - 1, ix);
            };
            if (need == 0 || !comps.empty()) rec(rec, head, need, 0);
        };

        auto emit = [&](std::uint64_t used, const CountVec& mand) {
            charge();
            std::vector<std::size_t> comps;
            for (std::size_t ix = 0; ix < r; ++ix)
                if (used >> ix & 1) comps.push_back(ix);
            LinearSet ls;
            ls.base = vec_add(base0, mand);
            ls.periods = plain;
            for (std::size_t ix : comps)
                for (const CountVec& qp : c[ix].periods) ls.periods.push_back(qp);
            for (const CountVec& p : carry) period_variants(p, comps, ls.periods);
            out.push_back(std::move(ls));
            if (out.size() >= next_compact) {
                compact(out);
                next_compact = std::max(out.size() * 2, kParikhSweepCap);
            }
        };

        // Extra components may enter only through a pumping period that
        // draws from them; each such mandatory use must introduce at least
        // one new component, smallest-first to visit every set once.
        auto cover = [&](auto&& self, std::uint64_t used, CountVec acc,
                         std::size_t floor_comp) -> void {
            charge();
            emit(used, acc);
            for (const CountVec& p : carry) {
                std::vector<std::size_t> picks;
                auto rec = [&](auto&& rself, long long left, std::size_t lo) -> void {
                    charge();
                    if (left == 0) {
                        std::uint64_t mask = 0;
                        for (std::size_t ix : picks) mask |= std::uint64_t(1) << ix;
                        std::uint64_t fresh = mask & ~used;
                        if (fresh == 0) return;
                        std::size_t lowest = std::countr_zero(fresh);
                        if (lowest < floor_comp) return;
                        CountVec add = p;
                        add[dim] = 0;
                        for (std::size_t ix : picks) add = vec_add(add, c[ix].base);
                        self(self, used | mask, vec_add(acc, add), lowest + 1);
                        return;
                    }
                    for (std::size_t ix = lo; ix < r; ++ix) {
                        picks.push_back(ix);
                        rself(rself, left - 1, ix);
                        picks.pop_back();
                    }
                };
                rec(rec, p[dim], 0);
            }
        };

        // Component choices for the base's own draws, as a multiset.
        auto draw = [&](auto&& self, long long left, std::size_t lo, std::uint64_t used,
                        CountVec acc) -> void {
            charge();
            if (left == 0) {
                cover(cover, used, std::move(acc), 0);
                return;
            }
            for (std::size_t ix = lo; ix < r; ++ix)
                self(self, left - 1, ix, used | (std::uint64_t(1) << ix),
                     vec_add(acc, c[ix].base));
        };
        draw(draw, k0, 0, 0, CountVec(base0.size(), 0));
    }
    return out;
}

} // namespace

SemilinearSet cfg_parikh(const Cfg& g_in) {
    Cfg g = cfg_inline_units(cfg_trim(g_in));
    SemilinearSet res;
    res.alphabet = g.terminals;
    if (cfg_is_empty(g)) return res;

    std::vector<std::string> nts = g.nonterminals();
    std::size_t d = g.terminals.size();
    std::size_t n = nts.size();
    std::size_t width = d + n;
    std::map<std::string, std::size_t> vid;
    for (std::size_t i = 0; i < n; ++i) vid[nts[i]] = d + i;

    std::vector<Poly> eq(n);
    for (const CfgProduction& p : g.productions) {
        LinearSet mono;
        mono.base.assign(width, 0);
        for (const CfgSym& s : p.rhs)
            ++mono.base[s.is_terminal ? std::size_t(g.terminals.index_of(s.name))
                                      : vid[s.name]];
        eq[vid[p.lhs] - d].push_back(std::move(mono));
    }
    for (Poly& e : eq) compact(e);

    // Close the narrowest equation, substitute it everywhere, repeat; the
    // start symbol (variable 0) is closed last and projected to letters.
    std::vector<char> done(n, 0);
    for (std::size_t round = 1; round < n; ++round) {
        std::size_t pick = 1;
        bool first = true;
        for (std::size_t i = 1; i < n; ++i) {
            if (!done[i] && (first || eq[i].size() < eq[pick].size())) {
                pick = i;
                first = false;
            }
        }
        done[pick] = 1;
        Poly closed = solve_variable(eq[pick], d + pick);
        compact(closed);
        for (std::size_t i = 0; i < n; ++i) {
            if (i == pick || done[i]) continue;
            eq[i] = substitute_variable(eq[i], d + pick, closed);
            compact(eq[i]);
        }
    }
    Poly root = solve_variable(eq[0], d);
    compact(root);
    for (const LinearSet& ls : root) {
        LinearSet cut;
        cut.base.assign(ls.base.begin(), ls.base.begin() + d);
        for (const CountVec& p : ls.periods)
            cut.periods.emplace_back(p.begin(), p.begin() + d);
        res.parts.push_back(std::move(cut));
    }
    compact(res.parts);
    return res;
}

std::set<std::set<Symbol>> alph_sets_cfg(const Cfg& g_in) {
    Cfg g = cfg_trim(g_in);
    std::set<std::set<Symbol>> result;
    if (cfg_is_empty(g)) return result;
    if (g.terminals.size() > 20)
        throw BudgetExhausted("alph_sets_cfg: alphabet too large for letter-set analysis");

    std::map<std::string, std::set<std::uint32_t>> masks;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const CfgProduction& p : g.productions) {
            std::uint32_t base = 0;
            std::vector<const std::set<std::uint32_t>*> parts;
            bool ready = true;
            for (const CfgSym& s : p.rhs) {
                if (s.is_terminal) {
                    base |= 1u << g.terminals.index_of(s.name);
                } else {
                    auto it = masks.find(s.name);
                    if (it == masks.end() || it->second.empty()) {
                        ready = false;
                        break;
                    }
                    parts.push_back(&it->second);
                }
            }
            if (!ready) continue;
            std::set<std::uint32_t> combos{base};
            for (const auto* part : parts) {
                std::set<std::uint32_t> next;
                for (std::uint32_t c : combos)
                    for (std::uint32_t m : *part) {
                        next.insert(c | m);
                        if (next.size() > kAlphSetCombinationCap)
                            throw BudgetExhausted(
                                "alph_sets_cfg: letter-set combination exceeded its guard");
                    }
                combos = std::move(next);
            }
            for (std::uint32_t c : combos)
                if (masks[p.lhs].insert(c).second) changed = true;
        }
    }
    for (std::uint32_t mask : masks[g.start]) {
        std::set<Symbol> letters;
        for (std::size_t i = 0; i < g.terminals.size(); ++i)
            if (mask & (1u << i)) letters.insert(g.terminals.at(i));
        result.insert(std::move(letters));
    }
    return result;
}

Cfg parse_cfg(const std::string& text, const std::string& filename) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool have_terminals = false;
    bool have_start = false;
    std::vector<Symbol> letters;
    std::string start;
    std::vector<std::pair<int, std::vector<std::string>>> productions;

    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<std::string> toks;
        std::string t;
        while (ls >> t) toks.push_back(t);
        if (toks.empty()) continue;
        if (toks[0] == "terminals:") {
            if (have_terminals) throw ParseError(filename, lineno, "duplicate terminals line");
            have_terminals = true;
            for (std::size_t i = 1; i < toks.size(); ++i) {
                if (std::find(letters.begin(), letters.end(), toks[i]) != letters.end())
                    throw ParseError(filename, lineno, "terminal declared twice: " + toks[i]);
                letters.push_back(toks[i]);
            }
            continue;
        }
        if (toks[0] == "start:") {
            if (have_start) throw ParseError(filename, lineno, "duplicate start line");
            if (toks.size() != 2) throw ParseError(filename, lineno, "start line needs one symbol");
            have_start = true;
            start = toks[1];
            continue;
        }
        if (toks.size() < 2 || toks[1] != "->")
            throw ParseError(filename, lineno, "expected a production of the form 'A -> ...'");
        if (!have_terminals)
            throw ParseError(filename, lineno, "productions must come after the terminals line");
        productions.push_back({lineno, toks});
    }
    if (!have_terminals) throw ParseError(filename, 1, "missing terminals line");
    if (!have_start) throw ParseError(filename, 1, "missing start line");

    Alphabet alpha(letters);
    if (alpha.contains(start))
        throw ParseError(filename, 1, "start symbol must not be a terminal");
    Cfg g(alpha, start);
    for (auto& [lno, toks] : productions) {
        if (alpha.contains(toks[0]))
            throw ParseError(filename, lno, "production left side must not be a terminal");
        CfgProduction p;
        p.lhs = toks[0];
        if (toks.size() == 3 && toks[2] == "_") {
            g.productions.push_back(std::move(p));
            continue;
        }
        for (std::size_t i = 2; i < toks.size(); ++i) {
            if (toks[i] == "_")
                throw ParseError(filename, lno, "'_' must be the only right-side symbol");
            if (alpha.contains(toks[i]))
                p.rhs.push_back(t_sym(toks[i]));
            else
                p.rhs.push_back(n_sym(toks[i]));
        }
        if (p.rhs.empty())
            throw ParseError(filename, lno, "empty right side must be written as '_'");
        g.productions.push_back(std::move(p));
    }
    return g;
}

std::string print_cfg(const Cfg& g) {
    std::ostringstream out;
    out << "terminals:";
    for (const Symbol& a : g.terminals) out << ' ' << a;
    out << '\n';
    out << "start: " << g.start << '\n';
    for (const CfgProduction& p : g.productions) {
        out << p.lhs << " ->";
        if (p.rhs.empty()) {
            out << " _";
        } else {
            for (const CfgSym& s : p.rhs) out << ' ' << s.name;
        }
        out << '\n';
    }
    return out.str();
}

} // namespace dcl
