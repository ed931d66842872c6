#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace titl {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class EncodingError : public Error {
public:
    EncodingError(const std::string& what, std::size_t byte_offset)
        : Error(what), byte_offset_(byte_offset) {}

    std::size_t byte_offset() const noexcept { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

// Malformed model/index/snapshot file. field() names the offending part.
class FormatError : public Error {
public:
    FormatError(const std::string& field, const std::string& detail)
        : Error("format error in '" + field + "': " + detail), field_(field) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

// Caller supplied a value outside an operation's accepted domain.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Programming error: a documented precondition was broken.
class ContractViolation : public Error {
public:
    using Error::Error;
};

}  // namespace titl
