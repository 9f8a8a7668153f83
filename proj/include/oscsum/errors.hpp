#pragma once

#include <stdexcept>
#include <string>

namespace oscsum {

// Bad input: malformed parameters, violated preconditions. CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical certificate (truncation tail, quadrature budget, ...) could not
// be established. CLI exit code 3.
class CertificateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw ValidationError(what);
}

}  // namespace oscsum
