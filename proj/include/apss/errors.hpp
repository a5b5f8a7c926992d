#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace apss {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyVector : public Error {
public:
    EmptyVector() : Error("vector has no entries") {}
};

class InvalidVector : public Error {
public:
    using Error::Error;
};

class InvalidParams : public Error {
public:
    using Error::Error;
};

class UnknownVariant : public Error {
public:
    explicit UnknownVariant(const std::string& name) : Error("unknown variant: " + name) {}
};

/// Dataset file errors carry the 1-based line number they occurred on.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class NegativeWeight : public ParseError {
public:
    explicit NegativeWeight(std::size_t line) : ParseError(line, "non-positive weight") {}
};

class DuplicateDim : public ParseError {
public:
    DuplicateDim(std::size_t line, std::size_t dim)
        : ParseError(line, "duplicate dimension " + std::to_string(dim)) {}
};

class InvalidRoot : public Error {
public:
    using Error::Error;
};

class NotPowerOfTwo : public Error {
public:
    explicit NotPowerOfTwo(int p) : Error("communicator size " + std::to_string(p) + " is not a power of two") {}
};

class SizeMismatch : public Error {
public:
    using Error::Error;
};

/// A collective could not complete: a rank exited or called a different collective.
class DeadlockError : public Error {
public:
    using Error::Error;
};

/// A rank program threw; the rank id is preserved.
class RankPanic : public Error {
public:
    RankPanic(int rank, const std::string& what)
        : Error("rank " + std::to_string(rank) + " failed: " + what), rank_(rank) {}
    int rank() const { return rank_; }

private:
    int rank_;
};

} // namespace apss
