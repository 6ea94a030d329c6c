#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sioshift {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset, std::vector<std::string> expected)
        : Error(what), offset_(offset), expected_(std::move(expected)) {}

    /// Byte offset into the source text.
    std::size_t offset() const noexcept { return offset_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

class UnknownIdentifierError : public ParseError {
public:
    UnknownIdentifierError(const std::string& name, std::size_t offset)
        : ParseError("unknown identifier '" + name + "' at offset " + std::to_string(offset),
                     offset, {}),
          name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class DomainError : public Error {
public:
    DomainError(const std::string& what, std::string subexpression)
        : Error(what + " in '" + subexpression + "'"), subexpression_(std::move(subexpression)) {}
    const std::string& subexpression() const noexcept { return subexpression_; }

private:
    std::string subexpression_;
};

class NotDifferentiableError : public Error { using Error::Error; };
class NotSlowlyOscillatingError : public Error { using Error::Error; };
class InvalidShiftError : public Error { using Error::Error; };
class BracketNotFoundError : public Error { using Error::Error; };
class OverflowError : public Error { using Error::Error; };
class ExtrapolationError : public Error { using Error::Error; };
class GridExhaustedError : public Error { using Error::Error; };
class NonDecayingError : public Error { using Error::Error; };
class NotInvertibleError : public Error { using Error::Error; };
class BudgetError : public Error { using Error::Error; };
class InvalidInstanceError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };

}  // namespace sioshift
