#pragma once

#include <array>
#include <cstddef>

#include "pqchain/bytes.hpp"

// ML-KEM-768 (FIPS 203), internal deterministic interfaces plus the usual
// randomized wrappers.
namespace pqchain::crypto::mlkem768 {

inline constexpr std::size_t kEncapsKeyBytes = 1184;
inline constexpr std::size_t kDecapsKeyBytes = 2400;
inline constexpr std::size_t kCiphertextBytes = 1088;
inline constexpr std::size_t kSharedSecretBytes = 32;
inline constexpr std::size_t kSeedBytes = 64;  // d || z

struct KeyPair {
    Bytes encaps_key;
    Bytes decaps_key;
};

struct Encapsulation {
    Bytes shared_secret;
    Bytes ciphertext;
};

/// Deterministic key generation from the 64-byte seed d || z.
KeyPair keygen_from_seed(ByteView seed);

/// Deterministic encapsulation with explicit message m (32 bytes).
/// Throws std::invalid_argument when the encapsulation key fails the modulus check.
Encapsulation encapsulate_with(ByteView encaps_key, ByteView message);

/// Implicit-rejection decapsulation; never fails on a well-sized ciphertext.
Bytes decapsulate(ByteView decaps_key, ByteView ciphertext);

}  // namespace pqchain::crypto::mlkem768
