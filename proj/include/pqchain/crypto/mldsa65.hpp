#pragma once

#include <cstddef>
#include <memory>

#include "pqchain/bytes.hpp"

// ML-DSA-65 (FIPS 204). Pure signing with an empty context string; the
// deterministic variant (rnd = 0^32) is used unless a caller supplies rnd.
namespace pqchain::crypto::mldsa65 {

inline constexpr std::size_t kPublicKeyBytes = 1952;
inline constexpr std::size_t kSecretKeyBytes = 4032;
inline constexpr std::size_t kSignatureBytes = 3309;
inline constexpr std::size_t kSeedBytes = 32;

struct KeyPair {
    Bytes public_key;
    Bytes secret_key;
};

KeyPair keygen_from_seed(ByteView xi);

Bytes sign(ByteView secret_key, ByteView message, ByteView context = {}, ByteView rnd = {});
bool verify(ByteView public_key, ByteView message, ByteView signature, ByteView context = {});

/// Secret key with the matrix and NTT-domain vectors expanded once; signing
/// with it skips the per-call expansion.
class ExpandedSigner {
public:
    explicit ExpandedSigner(ByteView secret_key);
    ~ExpandedSigner();
    ExpandedSigner(ExpandedSigner&&) noexcept;
    ExpandedSigner& operator=(ExpandedSigner&&) noexcept;

    Bytes sign(ByteView message, ByteView context = {}, ByteView rnd = {}) const;

private:
    struct State;
    std::unique_ptr<State> state_;
};

}  // namespace pqchain::crypto::mldsa65
