#include "dcl/nfa.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <sstream>

#include "dcl/errors.hpp"

namespace dcl {

namespace {

void check_state(const Nfa& m, int s, const char* what) {
    if (s < 0 || s >= m.state_count())
        throw std::invalid_argument(std::string(what) + ": state out of range");
}

void validate(const Nfa& m) {
    if (m.state_count() == 0)
        throw std::invalid_argument("automaton has no states");
    check_state(m, m.initial, "initial");
    for (const Edge& e : m.edges) {
        check_state(m, e.from, "edge");
        check_state(m, e.to, "edge");
        require_letters(m.alphabet, e.label, "edge label");
    }
}

// Adjacency grouped by letter; index -1 holds epsilon edges. Expects a
// normalized automaton.
struct Adjacency {
    // per state: per letter index, list of targets
    std::vector<std::vector<std::vector<int>>> by_letter;
    std::vector<std::vector<int>> eps;

    Adjacency(const Nfa& m) {
        int n = m.state_count();
        int k = static_cast<int>(m.alphabet.size());
        by_letter.assign(n, std::vector<std::vector<int>>(k));
        eps.assign(n, {});
        for (const Edge& e : m.edges) {
            if (e.label.empty())
                eps[e.from].push_back(e.to);
            else
                by_letter[e.from][m.alphabet.index_of(e.label[0])].push_back(e.to);
        }
    }
};

std::set<int> epsilon_closure(const Adjacency& adj, std::set<int> states) {
    std::vector<int> stack(states.begin(), states.end());
    while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        for (int t : adj.eps[s]) {
            if (states.insert(t).second) stack.push_back(t);
        }
    }
    return states;
}

std::set<int> step(const Adjacency& adj, const std::set<int>& states, int letter) {
    std::set<int> next;
    for (int s : states)
        for (int t : adj.by_letter[s][letter]) next.insert(t);
    return next;
}

bool any_final(const Nfa& m, const std::set<int>& states) {
    for (int s : states)
        if (m.finals[s]) return true;
    return false;
}

} // namespace

Nfa nfa_normalize(const Nfa& m) {
    validate(m);
    Nfa out(m.alphabet);
    out.finals = m.finals;
    out.initial = m.initial;
    for (const Edge& e : m.edges) {
        if (e.label.size() <= 1) {
            out.add_edge(e.from, e.label, e.to);
            continue;
        }
        int prev = e.from;
        for (std::size_t i = 0; i + 1 < e.label.size(); ++i) {
            int next = out.add_state(false);
            out.add_edge(prev, {e.label[i]}, next);
            prev = next;
        }
        out.add_edge(prev, {e.label.back()}, e.to);
    }
    return out;
}

bool nfa_accepts(const Nfa& m, const Word& w) {
    require_letters(m.alphabet, w, "nfa_accepts");
    Nfa n = nfa_normalize(m);
    Adjacency adj(n);
    std::set<int> cur = epsilon_closure(adj, {n.initial});
    for (const Symbol& s : w) {
        cur = epsilon_closure(adj, step(adj, cur, n.alphabet.index_of(s)));
        if (cur.empty()) return false;
    }
    return any_final(n, cur);
}

bool nfa_is_empty(const Nfa& m) {
    validate(m);
    std::vector<std::vector<int>> succ(m.state_count());
    for (const Edge& e : m.edges) succ[e.from].push_back(e.to);
    std::vector<bool> seen(m.state_count(), false);
    std::vector<int> stack{m.initial};
    seen[m.initial] = true;
    while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        if (m.finals[s]) return false;
        for (int t : succ[s])
            if (!seen[t]) {
                seen[t] = true;
                stack.push_back(t);
            }
    }
    return true;
}

Nfa nfa_product(const Nfa& a_in, const Nfa& b_in) {
    if (a_in.alphabet != b_in.alphabet)
        throw AlphabetMismatch("nfa_product: alphabets differ");
    Nfa a = nfa_normalize(a_in);
    Nfa b = nfa_normalize(b_in);
    Adjacency adj_a(a), adj_b(b);
    int k = static_cast<int>(a.alphabet.size());

    Nfa out(a.alphabet);
    std::map<std::pair<int, int>, int> ids;
    std::queue<std::pair<int, int>> work;
    auto id_of = [&](int p, int q) {
        auto key = std::make_pair(p, q);
        auto it = ids.find(key);
        if (it != ids.end()) return it->second;
        int id = out.add_state(a.finals[p] && b.finals[q]);
        ids.emplace(key, id);
        work.push(key);
        return id;
    };
    out.initial = id_of(a.initial, b.initial);
    while (!work.empty()) {
        auto [p, q] = work.front();
        work.pop();
        int from = ids.at({p, q});
        for (int t : adj_a.eps[p]) out.add_edge(from, {}, id_of(t, q));
        for (int t : adj_b.eps[q]) out.add_edge(from, {}, id_of(p, t));
        for (int x = 0; x < k; ++x) {
            for (int ta : adj_a.by_letter[p][x])
                for (int tb : adj_b.by_letter[q][x])
                    out.add_edge(from, {a.alphabet.at(x)}, id_of(ta, tb));
        }
    }
    return out;
}

Nfa nfa_determinize(const Nfa& m_in) {
    Nfa m = nfa_normalize(m_in);
    Adjacency adj(m);
    int k = static_cast<int>(m.alphabet.size());

    Nfa out(m.alphabet);
    std::map<std::set<int>, int> ids;
    std::queue<std::set<int>> work;
    auto id_of = [&](const std::set<int>& ss) {
        auto it = ids.find(ss);
        if (it != ids.end()) return it->second;
        int id = out.add_state(any_final(m, ss));
        ids.emplace(ss, id);
        work.push(ss);
        return id;
    };
    out.initial = id_of(epsilon_closure(adj, {m.initial}));
    while (!work.empty()) {
        std::set<int> ss = work.front();
        work.pop();
        int from = ids.at(ss);
        for (int x = 0; x < k; ++x) {
            std::set<int> next = epsilon_closure(adj, step(adj, ss, x));
            out.add_edge(from, {m.alphabet.at(x)}, id_of(next));
        }
    }
    return out;
}

Nfa nfa_complement(const Nfa& m, const Alphabet& alpha) {
    if (m.alphabet != alpha)
        throw AlphabetMismatch("nfa_complement: alphabet differs from the requested one");
    Nfa d = nfa_determinize(m);
    for (std::size_t i = 0; i < d.finals.size(); ++i) d.finals[i] = !d.finals[i];
    return d;
}

bool nfa_equivalent(const Nfa& a, const Nfa& b) {
    if (a.alphabet != b.alphabet)
        throw AlphabetMismatch("nfa_equivalent: alphabets differ");
    return nfa_is_empty(nfa_product(a, nfa_complement(b, b.alphabet))) &&
           nfa_is_empty(nfa_product(b, nfa_complement(a, a.alphabet)));
}

Nfa nfa_downward_saturate(const Nfa& m_in) {
    Nfa m = nfa_normalize(m_in);
    Nfa out = m;
    for (const Edge& e : m.edges) {
        if (!e.label.empty()) out.add_edge(e.from, {}, e.to);
    }
    return out;
}

std::set<Word> nfa_enumerate(const Nfa& m_in, int max_len) {
    Nfa m = nfa_normalize(m_in);
    Adjacency adj(m);
    int k = static_cast<int>(m.alphabet.size());

    std::set<Word> accepted;
    std::vector<std::pair<Word, std::set<int>>> frontier;
    frontier.emplace_back(Word{}, epsilon_closure(adj, {m.initial}));
    for (int len = 0; len <= max_len; ++len) {
        std::vector<std::pair<Word, std::set<int>>> next;
        for (auto& [w, ss] : frontier) {
            if (any_final(m, ss)) accepted.insert(w);
            if (len == max_len) continue;
            for (int x = 0; x < k; ++x) {
                std::set<int> ns = epsilon_closure(adj, step(adj, ss, x));
                if (ns.empty()) continue;
                Word nw = w;
                nw.push_back(m.alphabet.at(x));
                next.emplace_back(std::move(nw), std::move(ns));
            }
        }
        frontier = std::move(next);
    }
    return accepted;
}

Nfa nfa_empty(const Alphabet& alpha) {
    Nfa m(alpha);
    m.initial = m.add_state(false);
    return m;
}

Nfa nfa_universal(const Alphabet& alpha) {
    Nfa m(alpha);
    m.initial = m.add_state(true);
    for (const Symbol& s : alpha) m.add_edge(m.initial, {s}, m.initial);
    return m;
}

Nfa nfa_word(const Alphabet& alpha, const Word& w) {
    require_letters(alpha, w, "nfa_word");
    Nfa m(alpha);
    int prev = m.add_state(w.empty());
    m.initial = prev;
    for (std::size_t i = 0; i < w.size(); ++i) {
        int next = m.add_state(i + 1 == w.size());
        m.add_edge(prev, {w[i]}, next);
        prev = next;
    }
    return m;
}

Nfa nfa_letter_chain(const Alphabet& alpha) {
    Nfa m(alpha);
    int n = static_cast<int>(alpha.size());
    if (n == 0) {
        m.initial = m.add_state(true);
        return m;
    }
    for (int i = 0; i < n; ++i) {
        int s = m.add_state(true);
        m.add_edge(s, {alpha.at(i)}, s);
        if (i > 0) m.add_edge(i - 1, {}, i);
        (void)s;
    }
    m.initial = 0;
    return m;
}

Nfa nfa_containing_letter(const Alphabet& alpha, const Symbol& s) {
    require_letters(alpha, {s}, "nfa_containing_letter");
    Nfa m(alpha);
    int p = m.add_state(false);
    int q = m.add_state(true);
    m.initial = p;
    for (const Symbol& x : alpha) {
        m.add_edge(p, {x}, p);
        m.add_edge(q, {x}, q);
    }
    m.add_edge(p, {s}, q);
    return m;
}

Nfa nfa_trim(const Nfa& m) {
    validate(m);
    int n = m.state_count();
    std::vector<std::vector<int>> succ(n), pred(n);
    for (const Edge& e : m.edges) {
        succ[e.from].push_back(e.to);
        pred[e.to].push_back(e.from);
    }
    auto reach = [n](const std::vector<std::vector<int>>& g, std::vector<int> seeds) {
        std::vector<bool> seen(n, false);
        for (int s : seeds) seen[s] = true;
        while (!seeds.empty()) {
            int s = seeds.back();
            seeds.pop_back();
            for (int t : g[s])
                if (!seen[t]) {
                    seen[t] = true;
                    seeds.push_back(t);
                }
        }
        return seen;
    };
    std::vector<bool> fwd = reach(succ, {m.initial});
    std::vector<int> final_seeds;
    for (int s = 0; s < n; ++s)
        if (m.finals[s]) final_seeds.push_back(s);
    std::vector<bool> bwd = reach(pred, final_seeds);

    std::vector<int> remap(n, -1);
    Nfa out(m.alphabet);
    for (int s = 0; s < n; ++s) {
        if ((fwd[s] && bwd[s]) || s == m.initial)
            remap[s] = out.add_state(m.finals[s] && fwd[s] && bwd[s]);
    }
    out.initial = remap[m.initial];
    for (const Edge& e : m.edges) {
        if (remap[e.from] >= 0 && remap[e.to] >= 0 && fwd[e.from] && bwd[e.to] &&
            fwd[e.to] && bwd[e.from])
            out.add_edge(remap[e.from], e.label, remap[e.to]);
    }
    return out;
}

Nfa nfa_remove_epsilon(const Nfa& m_in) {
    Nfa m = nfa_normalize(m_in);
    Adjacency adj(m);
    int n = m.state_count();
    Nfa out(m.alphabet);
    out.finals.assign(n, false);
    out.initial = m.initial;
    for (int s = 0; s < n; ++s) {
        std::set<int> cl = epsilon_closure(adj, {s});
        out.finals[s] = any_final(m, cl);
        std::set<std::pair<int, int>> added; // (letter, target)
        for (int c : cl) {
            for (int x = 0; x < static_cast<int>(m.alphabet.size()); ++x)
                for (int t : adj.by_letter[c][x])
                    if (added.insert({x, t}).second)
                        out.add_edge(s, {m.alphabet.at(x)}, t);
        }
    }
    return out;
}

namespace {

// Shared line scanner for the text formats: strips comments, splits tokens.
std::vector<std::vector<std::string>> tokenize_lines(const std::string& text,
                                                     std::vector<int>& line_numbers) {
    std::vector<std::vector<std::string>> lines;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<std::string> toks;
        std::string t;
        while (ls >> t) toks.push_back(t);
        if (toks.empty()) continue;
        lines.push_back(std::move(toks));
        line_numbers.push_back(lineno);
    }
    return lines;
}

} // namespace

Nfa parse_nfa(const std::string& text, const std::string& filename) {
    std::vector<int> lnos;
    auto lines = tokenize_lines(text, lnos);

    Nfa m;
    bool have_alphabet = false;
    bool have_initial = false;
    std::map<std::string, int> states;

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& toks = lines[i];
        int ln = lnos[i];
        if (toks[0] == "alphabet:") {
            if (have_alphabet) throw ParseError(filename, ln, "duplicate alphabet line");
            try {
                m.alphabet = Alphabet(std::vector<Symbol>(toks.begin() + 1, toks.end()));
            } catch (const std::invalid_argument& e) {
                throw ParseError(filename, ln, e.what());
            }
            have_alphabet = true;
        } else if (toks[0] == "state:") {
            if (toks.size() < 2) throw ParseError(filename, ln, "state line needs a name");
            const std::string& name = toks[1];
            if (states.count(name)) throw ParseError(filename, ln, "duplicate state: " + name);
            bool is_final = false, is_initial = false;
            for (std::size_t j = 2; j < toks.size(); ++j) {
                if (toks[j] == "final") is_final = true;
                else if (toks[j] == "initial") is_initial = true;
                else throw ParseError(filename, ln, "unknown state attribute: " + toks[j]);
            }
            int id = m.add_state(is_final);
            states.emplace(name, id);
            if (is_initial) {
                if (have_initial) throw ParseError(filename, ln, "second initial state: " + name);
                m.initial = id;
                have_initial = true;
            }
        } else if (toks[0] == "edge:") {
            if (!have_alphabet) throw ParseError(filename, ln, "edge before alphabet line");
            if (toks.size() < 4)
                throw ParseError(filename, ln, "edge needs: source, label, target");
            auto src = states.find(toks[1]);
            if (src == states.end())
                throw ParseError(filename, ln, "undeclared state: " + toks[1]);
            auto dst = states.find(toks.back());
            if (dst == states.end())
                throw ParseError(filename, ln, "undeclared state: " + toks.back());
            Word label;
            std::size_t mid = toks.size() - 1;
            if (mid - 2 == 1 && toks[2] == "_") {
                // epsilon
            } else {
                for (std::size_t j = 2; j < mid; ++j) {
                    if (toks[j] == "_")
                        throw ParseError(filename, ln, "'_' cannot appear inside a word label");
                    if (!m.alphabet.contains(toks[j]))
                        throw ParseError(filename, ln, "letter not in alphabet: " + toks[j]);
                    label.push_back(toks[j]);
                }
            }
            m.add_edge(src->second, std::move(label), dst->second);
        } else {
            throw ParseError(filename, ln, "unknown directive: " + toks[0]);
        }
    }
    if (!have_alphabet) throw ParseError(filename, 1, "missing alphabet line");
    if (m.state_count() == 0) throw ParseError(filename, 1, "automaton has no states");
    if (!have_initial) throw ParseError(filename, 1, "no initial state declared");
    return m;
}

std::string print_nfa(const Nfa& m) {
    validate(m);
    std::ostringstream out;
    out << "alphabet:";
    for (const Symbol& s : m.alphabet) out << ' ' << s;
    out << '\n';
    for (int s = 0; s < m.state_count(); ++s) {
        out << "state: q" << s;
        if (s == m.initial) out << " initial";
        if (m.finals[s]) out << " final";
        out << '\n';
    }
    std::vector<Edge> edges = m.edges;
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.from, a.label, a.to) < std::tie(b.from, b.label, b.to);
    });
    for (const Edge& e : edges) {
        out << "edge: q" << e.from;
        if (e.label.empty()) out << " _";
        else
            for (const Symbol& s : e.label) out << ' ' << s;
        out << " q" << e.to << '\n';
    }
    return out.str();
}

std::string nfa_to_dot(const Nfa& m) {
    validate(m);
    std::ostringstream out;
    out << "digraph nfa {\n  rankdir=LR;\n  __start [shape=point];\n";
    for (int s = 0; s < m.state_count(); ++s) {
        out << "  q" << s << " [shape=" << (m.finals[s] ? "doublecircle" : "circle")
            << "];\n";
    }
    out << "  __start -> q" << m.initial << ";\n";
    std::vector<Edge> edges = m.edges;
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.from, a.label, a.to) < std::tie(b.from, b.label, b.to);
    });
    for (const Edge& e : edges) {
        std::string label = e.label.empty() ? std::string("eps") : std::string();
        for (std::size_t i = 0; i < e.label.size(); ++i) {
            if (i) label += ' ';
            label += e.label[i];
        }
        out << "  q" << e.from << " -> q" << e.to << " [label=\"" << label << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

} // namespace dcl
