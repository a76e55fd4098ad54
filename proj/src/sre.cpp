#include "dcl/sre.hpp"

#include <algorithm>
#include <sstream>

#include "dcl/errors.hpp"

namespace dcl {

namespace {

bool is_opt(const Atom& a) { return std::holds_alternative<OptLetter>(a); }

const OptLetter& as_opt(const Atom& a) { return std::get<OptLetter>(a); }
const StarSet& as_star(const Atom& a) { return std::get<StarSet>(a); }

bool subset(const std::vector<Symbol>& a, const std::vector<Symbol>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

bool star_contains(const StarSet& y, const Symbol& x) {
    return std::binary_search(y.letters.begin(), y.letters.end(), x);
}

StarSet star_union(const StarSet& a, const StarSet& b) {
    StarSet r;
    std::set_union(a.letters.begin(), a.letters.end(), b.letters.begin(), b.letters.end(),
                   std::back_inserter(r.letters));
    return r;
}

// Can two adjacent atoms be reduced to one?
bool mergeable(const Atom& a, const Atom& b) {
    if (!is_opt(a) && !is_opt(b)) {
        const auto& ya = as_star(a).letters;
        const auto& yb = as_star(b).letters;
        return subset(ya, yb) || subset(yb, ya);
    }
    if (is_opt(a) && !is_opt(b)) return star_contains(as_star(b), as_opt(a).letter);
    if (!is_opt(a) && is_opt(b)) return star_contains(as_star(a), as_opt(b).letter);
    return false;
}

} // namespace

bool atom_less(const Atom& a, const Atom& b) {
    if (is_opt(a) != is_opt(b)) return is_opt(a);
    if (is_opt(a)) return as_opt(a).letter < as_opt(b).letter;
    return as_star(a).letters < as_star(b).letters;
}

bool atom_equal(const Atom& a, const Atom& b) {
    if (is_opt(a) != is_opt(b)) return false;
    if (is_opt(a)) return as_opt(a).letter == as_opt(b).letter;
    return as_star(a).letters == as_star(b).letters;
}

bool product_less(const Product& a, const Product& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), atom_less);
}

bool product_equal(const Product& a, const Product& b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), atom_equal);
}

std::size_t product_size(const Product& p) { return p.size() + 1; }

std::size_t sre_size(const Sre& r) {
    std::size_t s = 0;
    for (const Product& p : r.products) s += product_size(p);
    return s;
}

bool product_includes(const Product& outer, const Product& inner) {
    std::size_t j = 0;
    for (const Atom& a : inner) {
        if (is_opt(a)) {
            const Symbol& x = as_opt(a).letter;
            for (;; ++j) {
                if (j == outer.size()) return false;
                if (is_opt(outer[j]) && as_opt(outer[j]).letter == x) {
                    ++j; // a one-shot atom is consumed
                    break;
                }
                if (!is_opt(outer[j]) && star_contains(as_star(outer[j]), x))
                    break; // stay on the star, it may absorb more
            }
        } else {
            const StarSet& y = as_star(a);
            for (;; ++j) {
                if (j == outer.size()) return false;
                if (!is_opt(outer[j]) && subset(y.letters, as_star(outer[j]).letters))
                    break;
            }
        }
    }
    return true;
}

Product canonicalize_product(Product p) {
    for (Atom& a : p) {
        if (!is_opt(a)) {
            auto& ls = std::get<StarSet>(a).letters;
            std::sort(ls.begin(), ls.end());
            ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
        }
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i + 1 < p.size(); ++i) {
            if (!mergeable(p[i], p[i + 1])) continue;
            if (!is_opt(p[i]) && !is_opt(p[i + 1])) {
                p[i] = star_union(as_star(p[i]), as_star(p[i + 1]));
                p.erase(p.begin() + i + 1);
            } else if (is_opt(p[i])) {
                p.erase(p.begin() + i);
            } else {
                p.erase(p.begin() + i + 1);
            }
            changed = true;
            break;
        }
    }
    return p;
}

Sre canonicalize(Sre r) {
    for (Product& p : r.products) p = canonicalize_product(std::move(p));
    std::sort(r.products.begin(), r.products.end(), product_less);
    r.products.erase(std::unique(r.products.begin(), r.products.end(), product_equal),
                     r.products.end());
    std::vector<bool> drop(r.products.size(), false);
    for (std::size_t i = 0; i < r.products.size(); ++i) {
        for (std::size_t j = 0; j < r.products.size(); ++j) {
            if (i == j || drop[j]) continue;
            if (!product_includes(r.products[j], r.products[i])) continue;
            // Strictly subsumed, or tied with an earlier representative.
            if (!product_includes(r.products[i], r.products[j]) || j < i) {
                drop[i] = true;
                break;
            }
        }
    }
    Sre out;
    for (std::size_t i = 0; i < r.products.size(); ++i)
        if (!drop[i]) out.products.push_back(std::move(r.products[i]));
    return out;
}

std::set<Symbol> sre_letters(const Sre& r) {
    std::set<Symbol> ls;
    for (const Product& p : r.products)
        for (const Atom& a : p) {
            if (is_opt(a)) ls.insert(as_opt(a).letter);
            else
                ls.insert(as_star(a).letters.begin(), as_star(a).letters.end());
        }
    return ls;
}

Nfa sre_to_nfa(const Sre& r, const Alphabet& alpha) {
    for (const Symbol& s : sre_letters(r))
        if (!alpha.contains(s))
            throw UnknownLetter("sre_to_nfa: letter '" + s + "' is not in the alphabet");

    Nfa m(alpha);
    m.initial = m.add_state(false);
    for (const Product& p : r.products) {
        int cur = m.add_state(false);
        m.add_edge(m.initial, {}, cur);
        for (const Atom& a : p) {
            int next = m.add_state(false);
            if (is_opt(a)) {
                m.add_edge(cur, {as_opt(a).letter}, next);
                m.add_edge(cur, {}, next);
            } else {
                for (const Symbol& y : as_star(a).letters) m.add_edge(cur, {y}, cur);
                m.add_edge(cur, {}, next);
            }
            cur = next;
        }
        m.finals[cur] = true;
    }
    return m;
}

BlockForm product_block_form(const Product& p, const Alphabet& alpha) {
    BlockForm bf;
    bf.gaps.emplace_back();
    for (const Atom& a : p) {
        if (is_opt(a)) {
            if (!alpha.contains(as_opt(a).letter))
                throw UnknownLetter("product_block_form: letter '" + as_opt(a).letter +
                                    "' is not in the alphabet");
            bf.gaps.back().push_back(as_opt(a).letter);
        } else {
            std::vector<Symbol> ys = as_star(a).letters;
            std::sort(ys.begin(), ys.end(), [&](const Symbol& l, const Symbol& r) {
                return alpha.index_of(l) < alpha.index_of(r);
            });
            bf.star_words.emplace_back(ys.begin(), ys.end());
            bf.stars.push_back(std::move(ys));
            bf.gaps.emplace_back();
        }
    }
    return bf;
}

SreEnumerator::SreEnumerator(Alphabet alpha) : alpha_(std::move(alpha)) {
    std::size_t k = alpha_.size();
    for (std::size_t i = 0; i < k; ++i) atoms_.push_back(OptLetter{alpha_.at(i)});
    // Nonempty letter subsets by size, then by index sequence.
    for (std::size_t size = 1; size <= k; ++size) {
        std::vector<std::size_t> pick(size);
        for (std::size_t i = 0; i < size; ++i) pick[i] = i;
        while (true) {
            StarSet ss;
            for (std::size_t i : pick) ss.letters.push_back(alpha_.at(i));
            std::sort(ss.letters.begin(), ss.letters.end());
            atoms_.push_back(std::move(ss));
            // next combination
            std::size_t i = size;
            while (i > 0 && pick[i - 1] == k - size + i - 1) --i;
            if (i == 0) break;
            ++pick[i - 1];
            for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
        }
    }
}

const std::vector<Product>& SreEnumerator::products_of_length(std::size_t len) {
    while (products_by_len_.size() <= len) {
        std::size_t m = products_by_len_.size();
        std::vector<Product> out;
        if (m == 0) {
            out.push_back(Product{});
        } else {
            for (const Product& p : products_by_len_[m - 1]) {
                for (const Atom& a : atoms_) {
                    if (!p.empty() && mergeable(p.back(), a)) continue;
                    Product q = p;
                    q.push_back(a);
                    out.push_back(std::move(q));
                }
            }
        }
        products_by_len_.push_back(std::move(out));
    }
    return products_by_len_[len];
}

void SreEnumerator::fill_size(std::size_t size) {
    pending_.clear();
    pending_pos_ = 0;
    if (size == 0) {
        pending_.push_back(Sre{});
        return;
    }
    // Flat product list must cover every product of size <= size.
    while (flat_filled_len_ < size) {
        const auto& ps = products_of_length(flat_filled_len_);
        products_flat_.insert(products_flat_.end(), ps.begin(), ps.end());
        ++flat_filled_len_;
    }

    std::vector<const Product*> chosen;
    auto antichain_ok = [&](const Product& p) {
        for (const Product* q : chosen)
            if (product_includes(*q, p) || product_includes(p, *q)) return false;
        return true;
    };
    // Index sequences are strictly increasing, so each product set appears
    // once; sizes in the flat list are nondecreasing.
    auto rec = [&](auto&& self, std::size_t start, std::size_t remaining) -> void {
        for (std::size_t i = start; i < products_flat_.size(); ++i) {
            const Product& p = products_flat_[i];
            std::size_t sz = product_size(p);
            if (sz > remaining) break;
            if (!antichain_ok(p)) continue;
            if (sz == remaining) {
                Sre r;
                for (const Product* q : chosen) r.products.push_back(*q);
                r.products.push_back(p);
                std::sort(r.products.begin(), r.products.end(), product_less);
                pending_.push_back(std::move(r));
            } else {
                chosen.push_back(&p);
                self(self, i + 1, remaining - sz);
                chosen.pop_back();
            }
        }
    };
    rec(rec, 0, size);
}

Sre SreEnumerator::next() {
    while (pending_pos_ >= pending_.size()) {
        fill_size(current_size_);
        ++current_size_;
    }
    return pending_[pending_pos_++];
}

Sre parse_sre(const std::string& text, const std::string& filename) {
    // Tokenize, dropping comments.
    std::vector<std::string> toks;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string t;
        while (ls >> t) toks.push_back(t);
    }
    Sre r;
    if (toks.empty()) return r;

    Product cur;
    bool cur_is_epsilon = false;
    bool cur_started = false;
    auto flush = [&]() {
        if (!cur_started)
            throw ParseError(filename, 1, "empty product; write '_' for the empty product");
        if (cur_is_epsilon && !cur.empty())
            throw ParseError(filename, 1, "'_' must stand alone in a product");
        r.products.push_back(cur);
        cur.clear();
        cur_is_epsilon = false;
        cur_started = false;
    };
    for (const std::string& t : toks) {
        if (t == "|") {
            flush();
            continue;
        }
        cur_started = true;
        if (t == "_") {
            if (!cur.empty())
                throw ParseError(filename, 1, "'_' must stand alone in a product");
            cur_is_epsilon = true;
            continue;
        }
        if (cur_is_epsilon)
            throw ParseError(filename, 1, "'_' must stand alone in a product");
        if (t.size() >= 2 && t.back() == '?') {
            std::string letter = t.substr(0, t.size() - 1);
            cur.push_back(OptLetter{letter});
        } else if (t.size() >= 2 && t.back() == '*') {
            std::string core = t.substr(0, t.size() - 1);
            StarSet ss;
            if (core.size() >= 2 && core.front() == '(' && core.back() == ')') {
                core = core.substr(1, core.size() - 2);
                std::string piece;
                std::istringstream cs(core);
                while (std::getline(cs, piece, '|')) {
                    if (piece.empty())
                        throw ParseError(filename, 1, "empty letter in star set: " + t);
                    ss.letters.push_back(piece);
                }
                if (ss.letters.empty())
                    throw ParseError(filename, 1, "empty star set: " + t);
            } else if (!core.empty()) {
                ss.letters.push_back(core);
            } else {
                throw ParseError(filename, 1, "malformed atom: " + t);
            }
            std::sort(ss.letters.begin(), ss.letters.end());
            ss.letters.erase(std::unique(ss.letters.begin(), ss.letters.end()),
                             ss.letters.end());
            cur.push_back(std::move(ss));
        } else {
            throw ParseError(filename, 1, "malformed atom: " + t);
        }
    }
    flush();
    return r;
}

std::string print_sre(const Sre& r) {
    if (r.products.empty()) return "# empty\n";
    std::ostringstream out;
    for (std::size_t i = 0; i < r.products.size(); ++i) {
        if (i) out << " | ";
        const Product& p = r.products[i];
        if (p.empty()) {
            out << "_";
            continue;
        }
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (j) out << ' ';
            if (is_opt(p[j])) {
                out << as_opt(p[j]).letter << '?';
            } else {
                const auto& ls = as_star(p[j]).letters;
                if (ls.size() == 1) {
                    out << ls[0] << '*';
                } else {
                    out << '(';
                    for (std::size_t c = 0; c < ls.size(); ++c) {
                        if (c) out << '|';
                        out << ls[c];
                    }
                    out << ")*";
                }
            }
        }
    }
    out << '\n';
    return out.str();
}

} // namespace dcl
