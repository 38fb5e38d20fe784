#pragma once

#include <array>
#include <cstddef>

#include "pqchain/bytes.hpp"
#include "pqchain/errors.hpp"

// Thin wrappers over OpenSSL for the classical pieces: X25519, SHA-256, HMAC.
namespace pqchain::crypto {

using pqchain::CryptoError;

inline constexpr std::size_t kX25519Bytes = 32;
inline constexpr std::size_t kSha256Bytes = 32;

struct X25519KeyPair {
    Bytes private_key;
    Bytes public_key;
};

X25519KeyPair x25519_from_private(ByteView private_key);
Bytes x25519_shared(ByteView private_key, ByteView peer_public);

Bytes sha256(ByteView data);
Bytes hmac_sha256(ByteView key, ByteView data);

/// Incremental SHA-256; `peek` returns the digest so far without finalizing.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    Sha256& update(ByteView data);
    Bytes peek() const;

private:
    void* ctx_;
};

bool constant_time_equal(ByteView a, ByteView b);

/// Throws CryptoError when PQCHAINLAB_CRYPTO_FAULT is set; called at the
/// entry of key generation so a broken backend can be simulated end to end.
void check_fault_injection();

}  // namespace pqchain::crypto
