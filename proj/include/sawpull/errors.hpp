#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sawpull {

// Base for all library errors. `code` is a stable machine-readable tag; the
// CLI emits it verbatim in error records, so existing codes must not change.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class MalformedWalkError : public Error {
public:
    explicit MalformedWalkError(const std::string& m) : Error("malformed-walk", m) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& m) : Error("bad-argument", m) {}
};

class ClassMismatchError : public Error {
public:
    explicit ClassMismatchError(const std::string& m) : Error("class-mismatch", m) {}
};

// Raised on checked 64-bit accumulation; names the offending cell.
class OverflowError : public Error {
public:
    OverflowError(int n, int v, int h)
        : Error("count-overflow",
                "count overflow at cell (n=" + std::to_string(n) + ", v=" + std::to_string(v) +
                    ", h=" + std::to_string(h) + ")"),
          n_(n), v_(v), h_(h) {}

    int n() const noexcept { return n_; }
    int v() const noexcept { return v_; }
    int h() const noexcept { return h_; }

private:
    int n_, v_, h_;
};

class ResourceLimitError : public Error {
public:
    explicit ResourceLimitError(const std::string& m) : Error("resource-limit", m) {}
};

class ExtrapolationError : public Error {
public:
    explicit ExtrapolationError(const std::string& m) : Error("extrapolation", m) {}
};

class BracketError : public Error {
public:
    explicit BracketError(const std::string& m) : Error("bracket-failure", m) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& m) : Error("parse", m) {}
};

class ChecksumError : public Error {
public:
    explicit ChecksumError(const std::string& m) : Error("checksum", m) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& m) : Error("io", m) {}
};

}  // namespace sawpull
