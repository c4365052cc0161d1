#pragma once

#include <stdexcept>
#include <string>

namespace salco {

// Error categories map 1:1 onto CLI exit codes: argument errors exit 2,
// numeric errors exit 3, IO/format errors exit 4.
class ArgumentError : public std::invalid_argument {
public:
    explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed file contents (bad magic, truncated payload, overflowing dims).
class FormatError : public IoError {
public:
    explicit FormatError(const std::string& what) : IoError(what) {}
};

enum ExitCode : int {
    kExitOk = 0,
    kExitArgument = 2,
    kExitNumeric = 3,
    kExitIo = 4,
};

}  // namespace salco
