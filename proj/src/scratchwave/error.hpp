#pragma once

#include <stdexcept>
#include <string>

namespace scratchwave {

enum class ErrorCode {
    InvalidArgument = 1,
    DegenerateSegment,
    ParseError,
    UnsupportedFeature,
    BelowHorizon,
    Validation,
    Io,
    WindowTruncation,
    Internal,
};

// Every failure raised by the core carries one of the codes above; the C
// layer translates them one-to-one.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace scratchwave
