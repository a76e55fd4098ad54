// alphabet.hpp -- ordered alphabets and words over them
#pragma once

#include <map>
#include <string>
#include <vector>

namespace dcl {

// Letters are opaque tokens; multi-character names are fine.
using Symbol = std::string;
using Word = std::vector<Symbol>;

// An ordered set of letters. Declaration order is significant: it fixes
// the sequence a1, ..., an used by bounded-form and SUP operations.
class Alphabet {
public:
    Alphabet() = default;
    explicit Alphabet(std::vector<Symbol> letters);

    std::size_t size() const { return letters_.size(); }
    bool empty() const { return letters_.empty(); }
    bool contains(const Symbol& s) const { return index_.count(s) != 0; }
    // Position of a letter in declaration order; throws UnknownLetter.
    int index_of(const Symbol& s) const;
    const Symbol& at(std::size_t i) const { return letters_.at(i); }
    const std::vector<Symbol>& letters() const { return letters_; }

    bool operator==(const Alphabet& other) const { return letters_ == other.letters_; }
    bool operator!=(const Alphabet& other) const { return !(*this == other); }

    auto begin() const { return letters_.begin(); }
    auto end() const { return letters_.end(); }

private:
    std::vector<Symbol> letters_;
    std::map<Symbol, int> index_;
};

// Checks that every letter of w belongs to alpha; throws UnknownLetter.
void require_letters(const Alphabet& alpha, const Word& w, const std::string& context);

// Renders a word for messages and file output: letters joined by spaces,
// the empty word as "_".
std::string format_word(const Word& w);

// Concatenation helper.
Word concat(const Word& a, const Word& b);

} // namespace dcl
