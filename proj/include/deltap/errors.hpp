#pragma once

#include <stdexcept>
#include <string>

namespace deltap {

// All library failures derive from math_error and carry a short machine
// readable kind ("division-by-zero", "not-symmetric", ...) next to the
// human readable message.  The CLI maps kinds to exit codes.
class math_error : public std::runtime_error {
public:
    math_error(std::string kind, const std::string& msg)
        : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}

    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

[[noreturn]] inline void fail(const std::string& kind, const std::string& msg) {
    throw math_error(kind, msg);
}

inline void require(bool ok, const std::string& kind, const std::string& msg) {
    if (!ok) fail(kind, msg);
}

} // namespace deltap
