#pragma once

#include <cstddef>

#include "pqchain/bytes.hpp"

// SLH-DSA-SHAKE-192s (FIPS 205), pure mode.
namespace pqchain::crypto::slhdsa192s {

inline constexpr std::size_t kN = 24;
inline constexpr std::size_t kPublicKeyBytes = 2 * kN;
inline constexpr std::size_t kSecretKeyBytes = 4 * kN;
inline constexpr std::size_t kSignatureBytes = 16224;
inline constexpr std::size_t kSeedBytes = 3 * kN;  // sk_seed || sk_prf || pk_seed

struct KeyPair {
    Bytes public_key;
    Bytes secret_key;
};

KeyPair keygen_from_seed(ByteView seed);

/// Empty `addrnd` selects the deterministic variant (opt_rand = pk_seed).
Bytes sign(ByteView secret_key, ByteView message, ByteView context = {}, ByteView addrnd = {});
bool verify(ByteView public_key, ByteView message, ByteView signature, ByteView context = {});

}  // namespace pqchain::crypto::slhdsa192s
