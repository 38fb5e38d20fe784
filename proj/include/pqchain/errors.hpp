#pragma once

#include <stdexcept>

namespace pqchain {

// The CLI maps each of these to its own exit code.
class CryptoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pqchain
