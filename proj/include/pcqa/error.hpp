#pragma once

#include <stdexcept>
#include <string>

namespace pcqa {

/// Base for every error raised by the toolkit. Carries a human-readable
/// diagnostic; callers at the CLI boundary print `what()` and exit 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw PreconditionError(msg);
}

}  // namespace pcqa
