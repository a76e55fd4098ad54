// cli.cpp -- command dispatch, file plumbing, artifact emission
#include "dcl/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dcl/cfg.hpp"
#include "dcl/closure.hpp"
#include "dcl/errors.hpp"
#include "dcl/indexed.hpp"
#include "dcl/nfa.hpp"
#include "dcl/sre.hpp"
#include "dcl/transducer.hpp"

namespace dcl {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, 0, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ParseError(out_path, 0, "cannot open output file");
    out << text;
}

Alphabet parse_order(const std::string& flag, const Alphabet& fallback) {
    if (flag.empty()) return fallback;
    std::istringstream in(flag);
    std::vector<Symbol> letters;
    std::string tok;
    while (in >> tok) letters.push_back(tok);
    return Alphabet(letters);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

Word digit_word(const std::string& s, const std::string& pair) {
    Word w;
    for (char c : s) {
        if (c != '1' && c != '2')
            throw ParseError("<pair>", 0, "morphism images use digits 1 and 2 only: " + pair);
        w.push_back(std::string(1, c));
    }
    return w;
}

} // namespace

int run_cli(std::vector<std::string> args) {
    CLI::App app{"downward closures of regular and context-free languages, with an "
                 "indexed-grammar workbench"};
    app.require_subcommand(1);

    std::string cls = "nfa";
    std::string input, order, out, format = "text";
    std::string transducer_path, target_path, nonterminal, dot_path;
    std::vector<std::string> pairs;
    int max_len = 0;
    long long search_budget = 2000000;
    std::size_t candidate_budget = 100000;

    CLI::App* dc = app.add_subcommand("dc", "write the downward closure as a simple "
                                            "regular expression");
    dc->add_option("--class", cls, "input class")->check(CLI::IsMember({"nfa", "cfg"}));
    dc->add_option("--input", input, "automaton or grammar file")->required();
    dc->add_option("--budget", candidate_budget, "candidate expressions to test");
    dc->add_option("--out", out, "output path (default: standard output)");
    dc->add_option("--dot", dot_path, "also write the result automaton in DOT form");

    CLI::App* sup = app.add_subcommand("sup", "is the downward closure all of a1*...an*?");
    sup->add_option("--class", cls, "input class")->check(CLI::IsMember({"nfa", "cfg"}));
    sup->add_option("--input", input, "automaton or grammar file")->required();
    sup->add_option("--order", order, "letter order (default: declaration order)");

    CLI::App* oracle = app.add_subcommand("oracle-dc", "saturate an automaton under "
                                                       "letter deletion");
    oracle->add_option("--input", input, "automaton file")->required();
    oracle->add_option("--out", out, "output path (default: standard output)");
    oracle->add_option("--format", format, "text or dot")
        ->check(CLI::IsMember({"text", "dot"}));

    CLI::App* enumerate = app.add_subcommand("enumerate", "list generated words up to a "
                                                          "length bound");
    enumerate->add_option("--class", cls, "input class")
        ->check(CLI::IsMember({"indexed", "nfa", "cfg"}));
    enumerate->add_option("--input", input, "grammar or automaton file")->required();
    enumerate->add_option("--max-len", max_len, "maximum word length")->required();
    enumerate->add_option("--budget", search_budget, "derivation expansion budget");
    enumerate->add_option("--out", out, "output path (default: standard output)");

    CLI::App* norm = app.add_subcommand("indexed-normalize", "rewrite an indexed grammar "
                                                             "into normal form");
    norm->add_option("--input", input, "indexed grammar file")->required();
    norm->add_option("--out", out, "output path (default: standard output)");

    CLI::App* interval = app.add_subcommand("indexed-interval", "annotate with terminal "
                                                                "intervals");
    interval->add_option("--input", input, "indexed grammar file")->required();
    interval->add_option("--out", out, "output path (default: standard output)");

    CLI::App* productive = app.add_subcommand("indexed-productive", "make every "
                                                                    "nonterminal produce a word");
    productive->add_option("--input", input, "interval grammar file")->required();
    productive->add_option("--out", out, "output path (default: standard output)");

    CLI::App* partition = app.add_subcommand("indexed-partition", "emit the family of "
                                                                  "letter-partitioned grammars");
    partition->add_option("--input", input, "interval grammar file")->required();
    partition->add_option("--out", out, "output path (default: standard output)");

    CLI::App* triple = app.add_subcommand("indexed-triple", "intersect with a rational "
                                                            "transduction");
    triple->add_option("--input", input, "indexed grammar file")->required();
    triple->add_option("--transducer", transducer_path, "transducer file")->required();
    triple->add_option("--out", out, "output path (default: standard output)");

    CLI::App* iw = app.add_subcommand("iw", "index words whose derivations reach a "
                                            "regular target");
    iw->add_option("--input", input, "indexed grammar file")->required();
    iw->add_option("--nonterminal", nonterminal, "nonterminal to start from")->required();
    iw->add_option("--target", target_path, "automaton file for the target language")
        ->required();
    iw->add_option("--out", out, "output path (default: standard output)");
    iw->add_option("--format", format, "text or dot")->check(CLI::IsMember({"text", "dot"}));

    CLI::App* pcp = app.add_subcommand("pcp-grammar", "indexed grammar encoding a word "
                                                      "correspondence instance");
    pcp->add_option("--pair", pairs, "letter:alpha:beta with digit images, repeatable")
        ->required();
    pcp->add_option("--out", out, "output path (default: standard output)");

    std::vector<std::string> argv_store;
    argv_store.push_back("dcl");
    for (std::string& a : args) argv_store.push_back(std::move(a));
    std::vector<const char*> argv;
    for (const std::string& a : argv_store) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    if (enumerate->parsed() && enumerate->get_option("--class")->empty()) cls = "indexed";

    try {
        if (dc->parsed()) {
            std::string text = read_file(input);
            ClosureResult r;
            Alphabet alpha;
            if (cls == "cfg") {
                Cfg g = parse_cfg(text, input);
                alpha = g.terminals;
                r = downward_closure_cfg(g, candidate_budget);
            } else {
                Nfa m = parse_nfa(text, input);
                alpha = m.alphabet;
                r = downward_closure_nfa(m, candidate_budget);
            }
            write_output(out, print_sre(r.sre));
            if (!dot_path.empty()) write_output(dot_path, nfa_to_dot(sre_to_nfa(r.sre, alpha)));
            return 0;
        }
        if (sup->parsed()) {
            std::string text = read_file(input);
            bool yes;
            if (cls == "cfg") {
                Cfg g = parse_cfg(text, input);
                yes = decide_sup_cfg(g, parse_order(order, g.terminals));
            } else {
                Nfa m = parse_nfa(text, input);
                yes = decide_sup_regular(m, parse_order(order, m.alphabet));
            }
            std::cout << (yes ? "yes" : "no") << "\n";
            return yes ? 0 : 1;
        }
        if (oracle->parsed()) {
            Nfa sat = nfa_downward_saturate(parse_nfa(read_file(input), input));
            write_output(out, format == "dot" ? nfa_to_dot(sat) : print_nfa(sat));
            return 0;
        }
        if (enumerate->parsed()) {
            std::string text = read_file(input);
            std::set<Word> words;
            bool exhaustive = true;
            if (cls == "nfa") {
                words = nfa_enumerate(parse_nfa(text, input), max_len);
            } else if (cls == "cfg") {
                words = cfg_enumerate(parse_cfg(text, input), max_len);
            } else {
                BoundedWords bw =
                    bounded_language(parse_indexed(text, input), max_len, search_budget);
                words = std::move(bw.words);
                exhaustive = bw.exhaustive;
            }
            std::ostringstream os;
            for (const Word& w : words) os << format_word(w) << "\n";
            os << "# exhaustive: " << (exhaustive ? "true" : "false") << "\n";
            write_output(out, os.str());
            return 0;
        }
        if (norm->parsed()) {
            write_output(out, print_indexed(normalize(parse_indexed(read_file(input), input))));
            return 0;
        }
        if (interval->parsed()) {
            write_output(out, print_interval(to_interval(parse_indexed(read_file(input), input))));
            return 0;
        }
        if (productive->parsed()) {
            IndexedFile f = parse_indexed_file(read_file(input), input);
            IntervalGrammar ig;
            ig.grammar = std::move(f.grammar);
            ig.iota = std::move(f.iota);
            write_output(out, print_interval(to_productive(ig)));
            return 0;
        }
        if (partition->parsed()) {
            IndexedFile f = parse_indexed_file(read_file(input), input);
            IntervalGrammar ig;
            ig.grammar = std::move(f.grammar);
            ig.iota = std::move(f.iota);
            std::ostringstream os;
            bool first = true;
            for (const PartitionedGrammar& pg : partitioned_family(ig)) {
                if (!first) os << "%%\n";
                first = false;
                os << print_partitioned(pg);
            }
            write_output(out, os.str());
            return 0;
        }
        if (triple->parsed()) {
            IndexedGrammar g = parse_indexed(read_file(input), input);
            Transducer t = parse_transducer(read_file(transducer_path), transducer_path);
            write_output(out, print_indexed(triple_construct(g, t)));
            return 0;
        }
        if (iw->parsed()) {
            IndexedGrammar g = parse_indexed(read_file(input), input);
            Nfa target = parse_nfa(read_file(target_path), target_path);
            Nfa result = iw_automaton(g, nonterminal, target);
            write_output(out, format == "dot" ? nfa_to_dot(result) : print_nfa(result));
            return 0;
        }
        if (pcp->parsed()) {
            std::vector<Symbol> letters;
            std::map<Symbol, Word> alpha, beta;
            for (const std::string& p : pairs) {
                std::vector<std::string> parts = split_on(p, ':');
                if (parts.size() != 3 || parts[0].empty())
                    throw ParseError("<pair>", 0, "--pair must be letter:alpha:beta: " + p);
                letters.push_back(parts[0]);
                alpha[parts[0]] = digit_word(parts[1], p);
                beta[parts[0]] = digit_word(parts[2], p);
            }
            write_output(out, print_indexed(pcp_grammar(Alphabet(letters), alpha, beta)));
            return 0;
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const BudgetExhausted& e) {
        std::cerr << "error: budget exhausted: " << e.what() << "\n";
        return 2;
    } catch (const NotBoundedForm& e) {
        std::cerr << "error: not in bounded form: " << e.what() << "\n";
        return 2;
    } catch (const AlphabetMismatch& e) {
        std::cerr << "error: alphabet mismatch: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace dcl
