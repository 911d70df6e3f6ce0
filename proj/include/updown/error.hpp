#pragma once

#include <stdexcept>
#include <string>

namespace updown {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input, parameter out of range, or a precondition violated by the caller.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Requested exact level exceeds the configured enumeration cap.
class LevelCapExceeded : public Error {
public:
    LevelCapExceeded(int level, int cap)
        : Error("level " + std::to_string(level) + " exceeds the exact-enumeration cap " +
                std::to_string(cap)),
          level_(level),
          cap_(cap) {}

    int level() const { return level_; }
    int cap() const { return cap_; }

private:
    int level_;
    int cap_;
};

/// A floating-point evaluation whose error bound exceeded its budget.
class PrecisionLoss : public Error {
public:
    using Error::Error;
};

}  // namespace updown
