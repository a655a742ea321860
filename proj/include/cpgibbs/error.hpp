#pragma once

#include <stdexcept>
#include <string>

namespace cpgibbs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DeadSymbolError : public Error {
public:
    explicit DeadSymbolError(int symbol)
        : Error("dead symbol " + std::to_string(symbol) +
                " (no allowed successor or predecessor)"),
          symbol_(symbol) {}
    int symbol() const noexcept { return symbol_; }

private:
    int symbol_;
};

class ResourceLimitError : public Error {
public:
    using Error::Error;
};

class NonConvergenceError : public Error {
public:
    using Error::Error;
};

class NonIrreducibleError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DisallowedWordError : public Error {
public:
    using Error::Error;
};

class ZeroProbabilityWindow : public Error {
public:
    using Error::Error;
};

class MultiplicativeDependenceError : public Error {
public:
    using Error::Error;
};

}  // namespace cpgibbs
