#include "dcl/transducer.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <sstream>

#include "dcl/errors.hpp"

namespace dcl {

namespace {

void validate(const Transducer& t) {
    if (t.state_count() == 0)
        throw std::invalid_argument("transducer has no states");
    if (t.initial < 0 || t.initial >= t.state_count())
        throw std::invalid_argument("transducer initial state out of range");
    for (const TEdge& e : t.edges) {
        if (e.from < 0 || e.from >= t.state_count() || e.to < 0 || e.to >= t.state_count())
            throw std::invalid_argument("transducer edge state out of range");
        require_letters(t.input_alphabet, e.in, "transducer input label");
        require_letters(t.output_alphabet, e.out, "transducer output label");
    }
}

// Grouped view of a normalized transducer.
struct TAdjacency {
    // reading edges per input letter, writing edges per output letter,
    // silent edges
    std::vector<std::vector<std::vector<int>>> read;
    std::vector<std::vector<std::vector<int>>> write;
    std::vector<std::vector<int>> silent;

    TAdjacency(const Transducer& t) {
        int n = t.state_count();
        read.assign(n, std::vector<std::vector<int>>(t.input_alphabet.size()));
        write.assign(n, std::vector<std::vector<int>>(t.output_alphabet.size()));
        silent.assign(n, {});
        for (const TEdge& e : t.edges) {
            if (!e.in.empty())
                read[e.from][t.input_alphabet.index_of(e.in[0])].push_back(e.to);
            else if (!e.out.empty())
                write[e.from][t.output_alphabet.index_of(e.out[0])].push_back(e.to);
            else
                silent[e.from].push_back(e.to);
        }
    }
};

} // namespace

Transducer transducer_normalize(const Transducer& t) {
    validate(t);
    Transducer out(t.input_alphabet, t.output_alphabet);
    out.finals.assign(t.finals.size(), false);
    out.initial = t.initial;
    for (const TEdge& e : t.edges) {
        std::size_t pieces = e.in.size() + e.out.size();
        if (pieces <= 1) {
            out.add_edge(e.from, e.in, e.out, e.to);
            continue;
        }
        // Chain: read the input word letter by letter, then write the output.
        int prev = e.from;
        std::size_t done = 0;
        for (const Symbol& s : e.in) {
            ++done;
            int next = (done == pieces) ? e.to : out.add_state(false);
            out.add_edge(prev, {s}, {}, next);
            prev = next;
        }
        for (const Symbol& s : e.out) {
            ++done;
            int next = (done == pieces) ? e.to : out.add_state(false);
            out.add_edge(prev, {}, {s}, next);
            prev = next;
        }
    }
    // Single final state.
    int nfinals = 0, last_final = -1;
    for (int s = 0; s < static_cast<int>(t.finals.size()); ++s)
        if (t.finals[s]) {
            ++nfinals;
            last_final = s;
        }
    if (nfinals == 1) {
        out.finals[last_final] = true;
    } else {
        int f = out.add_state(true);
        for (int s = 0; s < static_cast<int>(t.finals.size()); ++s)
            if (t.finals[s]) out.add_edge(s, {}, {}, f);
    }
    return out;
}

Nfa apply_to_nfa(const Transducer& t_in, const Nfa& m_in) {
    if (t_in.input_alphabet != m_in.alphabet)
        throw AlphabetMismatch("apply_to_nfa: automaton alphabet differs from input alphabet");
    Transducer t = transducer_normalize(t_in);
    Nfa m = nfa_normalize(m_in);
    TAdjacency tadj(t);

    std::vector<std::vector<std::pair<int, int>>> m_by_letter(m.state_count());
    std::vector<std::vector<int>> m_eps(m.state_count());
    for (const Edge& e : m.edges) {
        if (e.label.empty())
            m_eps[e.from].push_back(e.to);
        else
            m_by_letter[e.from].push_back({m.alphabet.index_of(e.label[0]), e.to});
    }

    Nfa out(t.output_alphabet);
    std::map<std::pair<int, int>, int> ids;
    std::queue<std::pair<int, int>> work;
    auto id_of = [&](int p, int q) {
        auto key = std::make_pair(p, q);
        auto it = ids.find(key);
        if (it != ids.end()) return it->second;
        int id = out.add_state(t.finals[p] && m.finals[q]);
        ids.emplace(key, id);
        work.push(key);
        return id;
    };
    out.initial = id_of(t.initial, m.initial);
    while (!work.empty()) {
        auto [p, q] = work.front();
        work.pop();
        int from = ids.at({p, q});
        for (auto [x, qt] : m_by_letter[q])
            for (int pt : tadj.read[p][x]) out.add_edge(from, {}, id_of(pt, qt));
        for (int qt : m_eps[q]) out.add_edge(from, {}, id_of(p, qt));
        for (int pt : tadj.silent[p]) out.add_edge(from, {}, id_of(pt, q));
        for (int y = 0; y < static_cast<int>(t.output_alphabet.size()); ++y)
            for (int pt : tadj.write[p][y])
                out.add_edge(from, {t.output_alphabet.at(y)}, id_of(pt, q));
    }
    return nfa_trim(out);
}

Transducer compose(const Transducer& a_in, const Transducer& b_in) {
    if (a_in.output_alphabet != b_in.input_alphabet)
        throw AlphabetMismatch("compose: output alphabet of the first transducer "
                               "differs from input alphabet of the second");
    Transducer a = transducer_normalize(a_in);
    Transducer b = transducer_normalize(b_in);
    TAdjacency aadj(a), badj(b);

    Transducer out(a.input_alphabet, b.output_alphabet);
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
        for (int x = 0; x < static_cast<int>(a.input_alphabet.size()); ++x)
            for (int pt : aadj.read[p][x])
                out.add_edge(from, {a.input_alphabet.at(x)}, {}, id_of(pt, q));
        for (int pt : aadj.silent[p]) out.add_edge(from, {}, {}, id_of(pt, q));
        for (int y = 0; y < static_cast<int>(a.output_alphabet.size()); ++y)
            for (int pt : aadj.write[p][y])
                for (int qt : badj.read[q][y]) out.add_edge(from, {}, {}, id_of(pt, qt));
        for (int z = 0; z < static_cast<int>(b.output_alphabet.size()); ++z)
            for (int qt : badj.write[q][z])
                out.add_edge(from, {}, {b.output_alphabet.at(z)}, id_of(p, qt));
        for (int qt : badj.silent[q]) out.add_edge(from, {}, {}, id_of(p, qt));
    }
    return out;
}

Transducer identity_transduction(const Alphabet& alpha) {
    Transducer t(alpha, alpha);
    t.initial = t.add_state(true);
    for (const Symbol& s : alpha) t.add_edge(t.initial, {s}, {s}, t.initial);
    return t;
}

Transducer subword_transduction(const Alphabet& alpha) {
    Transducer t(alpha, alpha);
    t.initial = t.add_state(true);
    for (const Symbol& s : alpha) {
        t.add_edge(t.initial, {s}, {s}, t.initial); // copy
        t.add_edge(t.initial, {s}, {}, t.initial);  // drop
    }
    return t;
}

Transducer regular_intersection_transduction(const Nfa& r_in) {
    Nfa r = nfa_normalize(r_in);
    Transducer t(r.alphabet, r.alphabet);
    t.finals = r.finals;
    t.initial = r.initial;
    for (const Edge& e : r.edges) t.add_edge(e.from, e.label, e.label, e.to);
    return t;
}

Transducer projection_transduction(const Alphabet& alpha, const Symbol& out_letter) {
    Transducer t(alpha, Alphabet({out_letter}));
    t.initial = t.add_state(true);
    for (const Symbol& s : alpha) t.add_edge(t.initial, {s}, {}, t.initial);
    t.add_edge(t.initial, {}, {out_letter}, t.initial);
    return t;
}

Transducer block_counting_transduction(const Alphabet& input,
                                       const std::vector<Word>& gaps,
                                       const std::vector<Word>& star_words,
                                       const Alphabet& out_letters) {
    if (gaps.size() != star_words.size() + 1)
        throw ArityMismatch("block_counting_transduction: need one more gap than star word");
    if (out_letters.size() != star_words.size())
        throw ArityMismatch("block_counting_transduction: one output letter per star word");
    for (const Word& g : gaps) require_letters(input, g, "block gap");
    for (const Word& u : star_words) {
        require_letters(input, u, "block star word");
        if (u.empty())
            throw ArityMismatch("block_counting_transduction: star words must be nonempty");
    }

    Transducer t(input, out_letters);
    int prev = t.add_state(false);
    t.initial = prev;
    std::size_t n = star_words.size();
    for (std::size_t i = 0; i < n; ++i) {
        int block = t.add_state(false);
        t.add_edge(prev, gaps[i], {}, block);
        t.add_edge(block, star_words[i], {out_letters.at(i)}, block);
        prev = block;
    }
    int fin = t.add_state(true);
    t.add_edge(prev, gaps[n], {}, fin);
    return t;
}

Transducer parse_transducer(const std::string& text, const std::string& filename) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;

    Transducer t;
    bool have_input = false, have_output = false, have_initial = false;
    std::map<std::string, int> states;
    struct PendingEdge {
        int ln;
        std::string from, in, out, to;
    };
    std::vector<PendingEdge> pending;

    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<std::string> toks;
        std::string tok;
        while (ls >> tok) toks.push_back(tok);
        if (toks.empty()) continue;

        if (toks[0] == "alphabet:") {
            if (have_input) throw ParseError(filename, lineno, "duplicate alphabet line");
            try {
                t.input_alphabet = Alphabet(std::vector<Symbol>(toks.begin() + 1, toks.end()));
            } catch (const std::invalid_argument& e) {
                throw ParseError(filename, lineno, e.what());
            }
            have_input = true;
        } else if (toks[0] == "output:") {
            if (have_output) throw ParseError(filename, lineno, "duplicate output line");
            try {
                t.output_alphabet = Alphabet(std::vector<Symbol>(toks.begin() + 1, toks.end()));
            } catch (const std::invalid_argument& e) {
                throw ParseError(filename, lineno, e.what());
            }
            have_output = true;
        } else if (toks[0] == "state:") {
            if (toks.size() < 2) throw ParseError(filename, lineno, "state line needs a name");
            const std::string& name = toks[1];
            if (states.count(name))
                throw ParseError(filename, lineno, "duplicate state: " + name);
            bool is_final = false, is_initial = false;
            for (std::size_t j = 2; j < toks.size(); ++j) {
                if (toks[j] == "final") is_final = true;
                else if (toks[j] == "initial") is_initial = true;
                else throw ParseError(filename, lineno, "unknown state attribute: " + toks[j]);
            }
            int id = t.add_state(is_final);
            states.emplace(name, id);
            if (is_initial) {
                if (have_initial)
                    throw ParseError(filename, lineno, "second initial state: " + name);
                t.initial = id;
                have_initial = true;
            }
        } else if (toks[0] == "edge:") {
            if (toks.size() != 5)
                throw ParseError(filename, lineno, "edge needs: source, input, output, target");
            pending.push_back({lineno, toks[1], toks[2], toks[3], toks[4]});
        } else {
            throw ParseError(filename, lineno, "unknown directive: " + toks[0]);
        }
    }
    if (!have_input) throw ParseError(filename, 1, "missing alphabet line");
    if (!have_output) t.output_alphabet = t.input_alphabet;
    if (t.state_count() == 0) throw ParseError(filename, 1, "transducer has no states");
    if (!have_initial) throw ParseError(filename, 1, "no initial state declared");

    for (const PendingEdge& pe : pending) {
        auto src = states.find(pe.from);
        if (src == states.end()) throw ParseError(filename, pe.ln, "undeclared state: " + pe.from);
        auto dst = states.find(pe.to);
        if (dst == states.end()) throw ParseError(filename, pe.ln, "undeclared state: " + pe.to);
        Word in_w, out_w;
        if (pe.in != "_") {
            if (!t.input_alphabet.contains(pe.in))
                throw ParseError(filename, pe.ln, "letter not in input alphabet: " + pe.in);
            in_w.push_back(pe.in);
        }
        if (pe.out != "_") {
            if (!t.output_alphabet.contains(pe.out))
                throw ParseError(filename, pe.ln, "letter not in output alphabet: " + pe.out);
            out_w.push_back(pe.out);
        }
        t.add_edge(src->second, std::move(in_w), std::move(out_w), dst->second);
    }
    return t;
}

std::string print_transducer(const Transducer& t) {
    validate(t);
    // The file format carries one letter per side, so print the normalized
    // machine.
    Transducer n = transducer_normalize(t);
    std::ostringstream out;
    out << "alphabet:";
    for (const Symbol& s : n.input_alphabet) out << ' ' << s;
    out << "\noutput:";
    for (const Symbol& s : n.output_alphabet) out << ' ' << s;
    out << '\n';
    for (int s = 0; s < n.state_count(); ++s) {
        out << "state: q" << s;
        if (s == n.initial) out << " initial";
        if (n.finals[s]) out << " final";
        out << '\n';
    }
    std::vector<TEdge> edges = n.edges;
    std::sort(edges.begin(), edges.end(), [](const TEdge& a, const TEdge& b) {
        return std::tie(a.from, a.in, a.out, a.to) < std::tie(b.from, b.in, b.out, b.to);
    });
    for (const TEdge& e : edges) {
        out << "edge: q" << e.from << ' ' << (e.in.empty() ? "_" : e.in[0]) << ' '
            << (e.out.empty() ? "_" : e.out[0]) << " q" << e.to << '\n';
    }
    return out.str();
}

} // namespace dcl
