#pragma once

#include <stdexcept>
#include <string>

namespace badbox {

enum class ErrorCode {
    io = 1,
    parse = 2,
    invalid_argument = 3,
    not_found = 4,
    schema = 5,
    conflict = 6,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace badbox
