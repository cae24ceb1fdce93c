#pragma once

#include <stdexcept>
#include <string>

namespace sweepalign {

// Bad argument to a geometric or numeric operation (non-finite input,
// alpha outside [0,1], non-unit quaternion, zero-area box, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Index or query outside the valid domain (sweep index, BEV query).
class OutOfRange : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Input too small or rank deficient for the requested estimate.
class DegenerateInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptySceneError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed file content. The message carries line/field context.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class VersionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sweepalign
