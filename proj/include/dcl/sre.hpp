// sre.hpp -- simple regular expressions: unions of products of atoms
#pragma once

#include <set>
#include <string>
#include <variant>
#include <vector>

#include "dcl/alphabet.hpp"
#include "dcl/nfa.hpp"

namespace dcl {

// (x | epsilon)
struct OptLetter {
    Symbol letter;
};

// (x1 | ... | xk)* ; letters kept sorted and distinct
struct StarSet {
    std::vector<Symbol> letters;
};

using Atom = std::variant<OptLetter, StarSet>;
using Product = std::vector<Atom>;

// A finite union of products. Canonical form keeps products reduced,
// distinct, mutually non-subsuming, and sorted.
struct Sre {
    std::vector<Product> products;
};

// Fixed total orders used for canonical forms and enumeration:
// OptLetter before StarSet, then contents lexicographically.
bool atom_less(const Atom& a, const Atom& b);
bool atom_equal(const Atom& a, const Atom& b);
bool product_less(const Product& a, const Product& b);
bool product_equal(const Product& a, const Product& b);

// size = number of atoms + number of products
std::size_t product_size(const Product& p);
std::size_t sre_size(const Sre& r);

// Language inclusion L(inner) <= L(outer) between products, decided
// syntactically by greedy embedding.
bool product_includes(const Product& outer, const Product& inner);

// Reduces each product (merges comparable adjacent star sets, absorbs
// optional letters into adjacent star sets), drops duplicate and subsumed
// products, sorts the rest.
Product canonicalize_product(Product p);
Sre canonicalize(Sre r);

// All letters mentioned anywhere in r.
std::set<Symbol> sre_letters(const Sre& r);

// Automaton over alpha accepting exactly L(r). Letters of r must lie in
// alpha.
Nfa sre_to_nfa(const Sre& r, const Alphabet& alpha);

// The product as w0 Y1* w1 ... Yn* wn: gaps w0..wn are the maximal runs of
// optional letters, stars Y1..Yn the star sets in between. star_words
// holds each Yi's letters concatenated in alphabet order.
struct BlockForm {
    std::vector<Word> gaps;
    std::vector<std::vector<Symbol>> stars;
    std::vector<Word> star_words;
};
BlockForm product_block_form(const Product& p, const Alphabet& alpha);

// Streams every canonical SRE over alpha exactly once, ordered by
// nondecreasing size; within one size the order is fixed (lexicographic on
// the chosen product indices). The first element is the empty union.
class SreEnumerator {
public:
    explicit SreEnumerator(Alphabet alpha);
    Sre next();

    // Canonical products of a given atom count, in enumeration order.
    const std::vector<Product>& products_of_length(std::size_t len);

private:
    void fill_size(std::size_t size);

    Alphabet alpha_;
    std::vector<Atom> atoms_; // enumeration order
    std::vector<std::vector<Product>> products_by_len_;
    std::vector<Product> products_flat_; // global order: by (size, position)
    std::size_t flat_filled_len_ = 0;
    std::size_t current_size_ = 0;
    std::vector<Sre> pending_;
    std::size_t pending_pos_ = 0;
};

// Text format: products of whitespace-separated atoms, '|' between
// products. Atoms: "x?", "x*", "(x|y)*". "_" is the empty product. An
// empty file denotes the empty union.
Sre parse_sre(const std::string& text, const std::string& filename = "<input>");
std::string print_sre(const Sre& r);

} // namespace dcl
