// errors.hpp -- exception types shared across the library
#pragma once

#include <stdexcept>
#include <string>

namespace dcl {

// Raised by the text-format readers. Carries the offending file and line.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string file, int line, const std::string& message)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + message),
          file_(std::move(file)),
          line_(line) {}

    const std::string& file() const { return file_; }
    int line() const { return line_; }

private:
    std::string file_;
    int line_;
};

// Binary operation applied to objects over different alphabets.
class AlphabetMismatch : public std::runtime_error {
public:
    explicit AlphabetMismatch(const std::string& message)
        : std::runtime_error(message) {}
};

// A word mentions a letter outside the relevant alphabet.
class UnknownLetter : public std::runtime_error {
public:
    explicit UnknownLetter(const std::string& message)
        : std::runtime_error(message) {}
};

// Parallel sequences whose lengths must agree do not.
class ArityMismatch : public std::runtime_error {
public:
    explicit ArityMismatch(const std::string& message)
        : std::runtime_error(message) {}
};

// A bounded search ran out of its step or candidate budget.
class BudgetExhausted : public std::runtime_error {
public:
    explicit BudgetExhausted(const std::string& message)
        : std::runtime_error(message) {}
};

// An operation expecting a language inside a1*...an* got something else.
class NotBoundedForm : public std::runtime_error {
public:
    explicit NotBoundedForm(const std::string& message)
        : std::runtime_error(message) {}
};

} // namespace dcl
