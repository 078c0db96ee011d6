#pragma once

#include <stdexcept>
#include <string>

namespace gsrcv {

/// Failure classes. The CLI maps each class to its own exit status.
enum class ErrorKind {
    invalid_argument, ///< precondition violated by the caller
    infeasible,       ///< request cannot be satisfied (e.g. odd n*d)
    numerical,        ///< solver failure or rank collapse
    parse,            ///< malformed input file
    io                ///< file could not be opened or written
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

inline void require(bool cond, const std::string& what) {
    if (!cond) {
        throw Error(ErrorKind::invalid_argument, what);
    }
}

} // namespace gsrcv
