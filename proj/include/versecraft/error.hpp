#pragma once

#include <stdexcept>
#include <string>

namespace versecraft {

// Malformed input data or artifact files. Maps to CLI exit code 2.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Artifact was produced against a different vocabulary. Maps to exit code 3.
class HashMismatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Violated precondition on an API call (empty input, bad shape, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace versecraft
