#include "pqchain/crypto/classic.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>

#include <cstdlib>
#include <memory>

#include "pqchain/crypto/keccak.hpp"
#include "pqchain/crypto/rng.hpp"

namespace pqchain::crypto {
namespace {

struct PkeyDeleter {
    void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct PkeyCtxDeleter {
    void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter>;

PkeyPtr load_private(ByteView key) {
    if (key.size() != kX25519Bytes) throw CryptoError("X25519 private key must be 32 bytes");
    PkeyPtr p(EVP_PKEY_new_raw_private_key(EVP_PKEY_X25519, nullptr, key.data(), key.size()));
    if (!p) throw CryptoError("X25519 private key rejected");
    return p;
}

}  // namespace

X25519KeyPair x25519_from_private(ByteView private_key) {
    PkeyPtr p = load_private(private_key);
    X25519KeyPair kp;
    kp.private_key.assign(private_key.begin(), private_key.end());
    kp.public_key.resize(kX25519Bytes);
    std::size_t len = kp.public_key.size();
    if (EVP_PKEY_get_raw_public_key(p.get(), kp.public_key.data(), &len) != 1 || len != kX25519Bytes)
        throw CryptoError("X25519 public key derivation failed");
    return kp;
}

Bytes x25519_shared(ByteView private_key, ByteView peer_public) {
    if (peer_public.size() != kX25519Bytes) throw CryptoError("X25519 peer key must be 32 bytes");
    PkeyPtr self = load_private(private_key);
    PkeyPtr peer(EVP_PKEY_new_raw_public_key(EVP_PKEY_X25519, nullptr, peer_public.data(), peer_public.size()));
    if (!peer) throw CryptoError("X25519 peer key rejected");
    PkeyCtxPtr ctx(EVP_PKEY_CTX_new(self.get(), nullptr));
    Bytes out(kX25519Bytes);
    std::size_t len = out.size();
    if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 || EVP_PKEY_derive_set_peer(ctx.get(), peer.get()) != 1 ||
        EVP_PKEY_derive(ctx.get(), out.data(), &len) != 1 || len != kX25519Bytes)
        throw CryptoError("X25519 derivation failed");
    return out;
}

Bytes sha256(ByteView data) {
    Bytes out(kSha256Bytes);
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1)
        throw CryptoError("SHA-256 failed");
    return out;
}

Bytes hmac_sha256(ByteView key, ByteView data) {
    Bytes out(kSha256Bytes);
    unsigned int len = 0;
    if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(), out.data(), &len))
        throw CryptoError("HMAC-SHA256 failed");
    return out;
}

Sha256::Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr) != 1)
        throw CryptoError("SHA-256 init failed");
}

Sha256::~Sha256() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

Sha256& Sha256::update(ByteView data) {
    if (EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(), data.size()) != 1)
        throw CryptoError("SHA-256 update failed");
    return *this;
}

Bytes Sha256::peek() const {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> copy(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    Bytes out(kSha256Bytes);
    unsigned int len = 0;
    if (!copy || EVP_MD_CTX_copy_ex(copy.get(), static_cast<EVP_MD_CTX*>(ctx_)) != 1 ||
        EVP_DigestFinal_ex(copy.get(), out.data(), &len) != 1)
        throw CryptoError("SHA-256 finalize failed");
    return out;
}

bool constant_time_equal(ByteView a, ByteView b) {
    return a.size() == b.size() && CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

void check_fault_injection() {
    const char* v = std::getenv("PQCHAINLAB_CRYPTO_FAULT");
    if (v && *v && std::string_view(v) != "0") throw CryptoError("crypto backend failure (PQCHAINLAB_CRYPTO_FAULT set)");
}

void OsRng::fill(std::uint8_t* out, std::size_t len) {
    if (RAND_bytes(out, static_cast<int>(len)) != 1) throw CryptoError("RAND_bytes failed");
}

struct SeededRng::State {
    Shake256 xof;
};

SeededRng::SeededRng(ByteView seed) : state_(std::make_unique<State>()) {
    state_->xof.absorb(as_bytes("pqchainlab-rng")).absorb(seed);
}

SeededRng::~SeededRng() = default;

void SeededRng::fill(std::uint8_t* out, std::size_t len) { state_->xof.squeeze(out, len); }

}  // namespace pqchain::crypto
