#include "dcl/semilinear.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "dcl/errors.hpp"

namespace dcl {

namespace {

constexpr std::size_t kMaxCyclesPerScc = 4000;
constexpr std::size_t kMaxPathsPerCall = 20000;
constexpr std::size_t kMaxLinearSets = 400000;

CountVec add(const CountVec& a, const CountVec& b) {
    CountVec r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    return r;
}

void normalize_part(LinearSet& ls) {
    std::sort(ls.periods.begin(), ls.periods.end());
    ls.periods.erase(std::unique(ls.periods.begin(), ls.periods.end()), ls.periods.end());
}

bool part_less(const LinearSet& a, const LinearSet& b) {
    return std::tie(a.base, a.periods) < std::tie(b.base, b.periods);
}

bool part_equal(const LinearSet& a, const LinearSet& b) {
    return a.base == b.base && a.periods == b.periods;
}

void dedupe(std::vector<LinearSet>& parts) {
    for (LinearSet& p : parts) normalize_part(p);
    std::sort(parts.begin(), parts.end(), part_less);
    parts.erase(std::unique(parts.begin(), parts.end(), part_equal), parts.end());
}

// Iterative Tarjan; returns component ids.
std::vector<int> scc_ids(int n, const std::vector<std::vector<int>>& succ, int& comp_count) {
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> on_stack(n, false);
    std::vector<int> stack;
    int next_index = 0;
    comp_count = 0;

    struct Frame {
        int v;
        std::size_t child;
    };
    for (int root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        std::vector<Frame> call{{root, 0}};
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.child < succ[f.v].size()) {
                int w = succ[f.v][f.child++];
                if (index[w] == -1) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                if (low[f.v] == index[f.v]) {
                    while (true) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        comp[w] = comp_count;
                        if (w == f.v) break;
                    }
                    ++comp_count;
                }
                int v = f.v;
                call.pop_back();
                if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
            }
        }
    }
    return comp;
}

struct SimpleCycle {
    CountVec psi;
    std::set<int> states;
};

struct ParikhBuilder {
    const Nfa& m;
    int k;
    std::vector<int> comp;
    std::vector<std::vector<std::pair<int, int>>> inner; // per state: (letter, to) inside comp
    std::vector<CountVec> letter_vecs;
    std::map<int, std::vector<SimpleCycle>> cycles_by_comp;
    std::map<std::pair<int, int>, std::vector<LinearSet>> suffix_memo;
    std::size_t produced = 0;

    ParikhBuilder(const Nfa& m_, std::vector<int> comp_) : m(m_), comp(std::move(comp_)) {
        k = static_cast<int>(m.alphabet.size());
        inner.assign(m.state_count(), {});
        for (const Edge& e : m.edges)
            if (comp[e.from] == comp[e.to])
                inner[e.from].push_back({m.alphabet.index_of(e.label[0]), e.to});
        for (int x = 0; x < k; ++x) {
            CountVec v(k, 0);
            v[x] = 1;
            letter_vecs.push_back(v);
        }
    }

    void count(std::size_t n) {
        produced += n;
        if (produced > kMaxLinearSets)
            throw BudgetExhausted("parikh_nfa: linear set construction exceeded its guard");
    }

    const std::vector<SimpleCycle>& cycles_of(int c) {
        auto it = cycles_by_comp.find(c);
        if (it != cycles_by_comp.end()) return it->second;
        std::vector<int> members;
        for (int s = 0; s < m.state_count(); ++s)
            if (comp[s] == c) members.push_back(s);
        std::vector<SimpleCycle> cycles;
        // Each simple cycle is found once, rooted at its smallest member.
        for (int root : members) {
            std::vector<std::pair<int, std::size_t>> path; // (state, next edge index)
            std::vector<bool> on_path(m.state_count(), false);
            CountVec psi(k, 0);
            path.push_back({root, 0});
            on_path[root] = true;
            while (!path.empty()) {
                auto& [v, child] = path.back();
                if (child < inner[v].size()) {
                    auto [x, w] = inner[v][child++];
                    if (w == root) {
                        SimpleCycle sc;
                        sc.psi = add(psi, letter_vecs[x]);
                        for (auto& [s, ignored] : path) {
                            (void)ignored;
                            sc.states.insert(s);
                        }
                        cycles.push_back(std::move(sc));
                        if (cycles.size() > kMaxCyclesPerScc)
                            throw BudgetExhausted("parikh_nfa: too many simple cycles");
                    } else if (w > root && !on_path[w]) {
                        psi = add(psi, letter_vecs[x]);
                        on_path[w] = true;
                        path.push_back({w, 0});
                    }
                } else {
                    on_path[v] = false;
                    path.pop_back();
                    if (!path.empty()) {
                        auto [x, ignored] = inner[path.back().first][path.back().second - 1];
                        (void)ignored;
                        for (std::size_t i = 0; i < psi.size(); ++i)
                            psi[i] -= letter_vecs[x][i] /* remove last edge */;
                        // The popped edge is the one that led into v; recompute
                        // is handled by subtracting its letter.
                    }
                }
            }
        }
        return cycles_by_comp.emplace(c, std::move(cycles)).first->second;
    }

    // Parikh images of walks from u to v staying inside component c.
    std::vector<LinearSet> local(int u, int v, int c) {
        struct PathRec {
            CountVec psi;
            std::set<int> states;
        };
        std::vector<PathRec> paths;
        // Simple paths u -> v inside c.
        {
            std::vector<std::pair<int, std::size_t>> stk;
            std::vector<bool> on_path(m.state_count(), false);
            CountVec psi(k, 0);
            stk.push_back({u, 0});
            on_path[u] = true;
            if (u == v) paths.push_back({psi, {u}});
            while (!stk.empty()) {
                auto& [s, child] = stk.back();
                if (child < inner[s].size()) {
                    auto [x, w] = inner[s][child++];
                    if (on_path[w]) continue;
                    if (w == v) {
                        PathRec pr;
                        pr.psi = add(psi, letter_vecs[x]);
                        for (auto& [st, ig] : stk) {
                            (void)ig;
                            pr.states.insert(st);
                        }
                        pr.states.insert(v);
                        paths.push_back(std::move(pr));
                        if (paths.size() > kMaxPathsPerCall)
                            throw BudgetExhausted("parikh_nfa: too many simple paths");
                        continue;
                    }
                    psi = add(psi, letter_vecs[x]);
                    on_path[w] = true;
                    stk.push_back({w, 0});
                } else {
                    on_path[s] = false;
                    stk.pop_back();
                    if (!stk.empty()) {
                        auto [x, ig] = inner[stk.back().first][stk.back().second - 1];
                        (void)ig;
                        for (std::size_t i = 0; i < psi.size(); ++i) psi[i] -= letter_vecs[x][i];
                    }
                }
            }
        }

        const std::vector<SimpleCycle>& cycles = cycles_of(c);
        // Distinct cycle Parikh images; periods are recorded as indices here.
        std::vector<CountVec> period_pool;
        std::vector<int> cycle_period(cycles.size());
        for (std::size_t ci = 0; ci < cycles.size(); ++ci) {
            auto it = std::find(period_pool.begin(), period_pool.end(), cycles[ci].psi);
            if (it == period_pool.end()) {
                period_pool.push_back(cycles[ci].psi);
                cycle_period[ci] = static_cast<int>(period_pool.size()) - 1;
            } else {
                cycle_period[ci] = static_cast<int>(it - period_pool.begin());
            }
        }

        std::vector<LinearSet> out;
        for (const PathRec& pr : paths) {
            // Attach cycles to the walk, growing a connected region. A
            // configuration is (touched states, period set, base); adding a
            // cycle whose image is already a period without reaching new
            // states only shifts the base by that period, so it is skipped as
            // subsumed. This keeps the search polynomial in the number of
            // distinct cycle images rather than exponential in cycle count.
            struct Config {
                std::set<int> active;
                std::set<int> period_ids;
                CountVec base;
            };
            std::set<std::tuple<std::set<int>, std::set<int>, CountVec>> seen;
            std::vector<Config> queue{{pr.states, {}, pr.psi}};
            seen.insert({pr.states, {}, pr.psi});
            while (!queue.empty()) {
                Config cfg = std::move(queue.back());
                queue.pop_back();
                LinearSet ls;
                ls.base = cfg.base;
                for (int pid : cfg.period_ids) ls.periods.push_back(period_pool[pid]);
                out.push_back(std::move(ls));
                count(1);
                for (std::size_t ci = 0; ci < cycles.size(); ++ci) {
                    const SimpleCycle& sc = cycles[ci];
                    bool touches = false;
                    bool grows = false;
                    for (int st : sc.states) {
                        if (cfg.active.count(st))
                            touches = true;
                        else
                            grows = true;
                    }
                    if (!touches) continue;
                    bool known_period = cfg.period_ids.count(cycle_period[ci]) > 0;
                    if (known_period && !grows) continue;
                    Config next = cfg;
                    next.active.insert(sc.states.begin(), sc.states.end());
                    next.period_ids.insert(cycle_period[ci]);
                    next.base = add(next.base, sc.psi);
                    auto key = std::make_tuple(next.active, next.period_ids, next.base);
                    if (seen.insert(std::move(key)).second) queue.push_back(std::move(next));
                }
            }
        }
        dedupe(out);
        return out;
    }

    std::vector<LinearSet> combine(const std::vector<LinearSet>& a, const CountVec& mid,
                                   const std::vector<LinearSet>& b) {
        std::vector<LinearSet> out;
        for (const LinearSet& x : a)
            for (const LinearSet& y : b) {
                LinearSet ls;
                ls.base = add(add(x.base, mid), y.base);
                ls.periods = x.periods;
                ls.periods.insert(ls.periods.end(), y.periods.begin(), y.periods.end());
                out.push_back(std::move(ls));
                count(1);
            }
        dedupe(out);
        return out;
    }

    const std::vector<LinearSet>& suffix(int c, int entry) {
        auto key = std::make_pair(c, entry);
        auto it = suffix_memo.find(key);
        if (it != suffix_memo.end()) return it->second;
        std::vector<LinearSet> out;
        for (int f = 0; f < m.state_count(); ++f) {
            if (!m.finals[f] || comp[f] != c) continue;
            auto ls = local(entry, f, c);
            out.insert(out.end(), ls.begin(), ls.end());
        }
        for (const Edge& e : m.edges) {
            if (comp[e.from] != c || comp[e.to] == c) continue;
            auto a = local(entry, e.from, c);
            if (a.empty()) continue;
            const auto& b = suffix(comp[e.to], e.to);
            if (b.empty()) continue;
            auto joined = combine(a, letter_vecs[m.alphabet.index_of(e.label[0])], b);
            out.insert(out.end(), joined.begin(), joined.end());
        }
        dedupe(out);
        return suffix_memo.emplace(key, std::move(out)).first->second;
    }
};

} // namespace

CountVec parikh_word(const Word& w, const Alphabet& alpha) {
    require_letters(alpha, w, "parikh_word");
    CountVec v(alpha.size(), 0);
    for (const Symbol& s : w) ++v[alpha.index_of(s)];
    return v;
}

SemilinearSet parikh_nfa(const Nfa& m_in) {
    Nfa m = nfa_trim(nfa_remove_epsilon(m_in));
    SemilinearSet s;
    s.alphabet = m.alphabet;
    if (nfa_is_empty(m)) return s;

    std::vector<std::vector<int>> succ(m.state_count());
    for (const Edge& e : m.edges) succ[e.from].push_back(e.to);
    int comp_count = 0;
    std::vector<int> comp = scc_ids(m.state_count(), succ, comp_count);

    ParikhBuilder builder(m, comp);
    s.parts = builder.suffix(comp[m.initial], m.initial);
    dedupe(s.parts);
    return s;
}

bool sls_contains(const SemilinearSet& s, const CountVec& v, long long bound) {
    if (v.size() != s.alphabet.size())
        throw ArityMismatch("sls_contains: vector length differs from alphabet size");
    for (const LinearSet& part : s.parts) {
        CountVec residual(v.size(), 0);
        bool feasible = true;
        for (std::size_t i = 0; i < v.size(); ++i) {
            residual[i] = v[i] - part.base[i];
            if (residual[i] < 0) {
                feasible = false;
                break;
            }
        }
        if (!feasible) continue;
        // Depth-first coefficient search; every nonzero period consumes at
        // least one unit of the residual's L1 norm.
        std::vector<CountVec> periods;
        for (const CountVec& p : part.periods) {
            bool zero = true;
            for (long long x : p)
                if (x != 0) zero = false;
            if (!zero) periods.push_back(p);
        }
        auto rec = [&](auto&& self, std::size_t idx, CountVec rem) -> bool {
            bool all_zero = true;
            for (long long x : rem)
                if (x != 0) all_zero = false;
            if (all_zero) return true;
            if (idx == periods.size()) return false;
            const CountVec& p = periods[idx];
            long long max_coeff = bound;
            for (std::size_t i = 0; i < rem.size(); ++i)
                if (p[i] > 0) max_coeff = std::min(max_coeff, rem[i] / p[i]);
            for (long long c = 0; c <= max_coeff; ++c) {
                CountVec next = rem;
                bool ok = true;
                for (std::size_t i = 0; i < next.size(); ++i) {
                    next[i] -= c * p[i];
                    if (next[i] < 0) ok = false;
                }
                if (ok && self(self, idx + 1, next)) return true;
            }
            return false;
        };
        if (rec(rec, 0, residual)) return true;
    }
    return false;
}

bool sup_from_semilinear(const SemilinearSet& s, const Alphabet& order) {
    if (order.empty())
        throw ArityMismatch("sup_from_semilinear: the letter sequence must be nonempty");
    if (s.alphabet != order)
        throw AlphabetMismatch("sup_from_semilinear: alphabet differs from the letter order");
    for (const LinearSet& part : s.parts) {
        bool all_covered = true;
        for (std::size_t i = 0; i < order.size(); ++i) {
            bool covered = false;
            for (const CountVec& p : part.periods)
                if (p[i] > 0) covered = true;
            if (!covered) {
                all_covered = false;
                break;
            }
        }
        if (all_covered) return true;
    }
    return false;
}

std::string print_semilinear(const SemilinearSet& s) {
    if (s.parts.empty()) return "# empty\n";
    std::ostringstream out;
    auto print_vec = [&](const CountVec& v) {
        out << '{';
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out << ' ';
            out << s.alphabet.at(i) << ':' << v[i];
        }
        out << '}';
    };
    std::vector<LinearSet> parts = s.parts;
    dedupe(parts);
    for (const LinearSet& part : parts) {
        out << "base ";
        print_vec(part.base);
        if (!part.periods.empty()) {
            out << " periods";
            for (const CountVec& p : part.periods) {
                out << ' ';
                print_vec(p);
            }
        }
        out << '\n';
    }
    return out.str();
}

} // namespace dcl
