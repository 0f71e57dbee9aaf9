#pragma once

#include <stdexcept>
#include <string>

namespace famstream {

// Broad failure classes; the CLI maps them onto exit codes 1, 2 and 3.
enum class ErrorKind { usage, data, runtime };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_usage(const std::string& what) { throw Error(ErrorKind::usage, what); }
[[noreturn]] inline void throw_data(const std::string& what) { throw Error(ErrorKind::data, what); }
[[noreturn]] inline void throw_runtime(const std::string& what) { throw Error(ErrorKind::runtime, what); }

}  // namespace famstream
