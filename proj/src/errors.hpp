#pragma once

#include <stdexcept>
#include <string>

namespace autotuner {

enum class ErrorKind {
    Config,
    Io,
    Numeric,
    Format,
    Unsupported,
    Size,
    Range,
    Shape,
    Domain,
    State,
    Checkpoint,
    Corrupt,
    NoMarks,
    Degenerate,
    Invariant,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace autotuner
