#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wg {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad arguments: sites outside a box, missing values, malformed schemes.
class DomainError : public Error {
public:
    using Error::Error;
};

// Enumeration would exceed a configured size cap.
class CapExceeded : public Error {
public:
    CapExceeded(const std::string& what, std::size_t requested, std::size_t cap)
        : Error(what + ": size " + std::to_string(requested) + " exceeds cap " +
                std::to_string(cap)),
          requested_(requested),
          cap_(cap) {}
    std::size_t requested() const { return requested_; }
    std::size_t cap() const { return cap_; }

private:
    std::size_t requested_;
    std::size_t cap_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace wg
