#include "dcl/alphabet.hpp"

#include <stdexcept>

#include "dcl/errors.hpp"

namespace dcl {

Alphabet::Alphabet(std::vector<Symbol> letters) : letters_(std::move(letters)) {
    for (std::size_t i = 0; i < letters_.size(); ++i) {
        if (letters_[i].empty())
            throw std::invalid_argument("alphabet letter must be a nonempty token");
        auto [it, inserted] = index_.emplace(letters_[i], static_cast<int>(i));
        (void)it;
        if (!inserted)
            throw std::invalid_argument("duplicate alphabet letter: " + letters_[i]);
    }
}

int Alphabet::index_of(const Symbol& s) const {
    auto it = index_.find(s);
    if (it == index_.end())
        throw UnknownLetter("letter '" + s + "' is not in the alphabet");
    return it->second;
}

void require_letters(const Alphabet& alpha, const Word& w, const std::string& context) {
    for (const Symbol& s : w) {
        if (!alpha.contains(s))
            throw UnknownLetter(context + ": letter '" + s + "' is not in the alphabet");
    }
}

std::string format_word(const Word& w) {
    if (w.empty()) return "_";
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) out += ' ';
        out += w[i];
    }
    return out;
}

Word concat(const Word& a, const Word& b) {
    Word r = a;
    r.insert(r.end(), b.begin(), b.end());
    return r;
}

} // namespace dcl
