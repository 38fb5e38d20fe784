#include "pqchain/crypto/mlkem768.hpp"

#include <stdexcept>

#include "pqchain/crypto/keccak.hpp"

namespace pqchain::crypto::mlkem768 {
namespace {

constexpr int kN = 256;
constexpr std::uint32_t kQ = 3329;
constexpr int kK = 3;
constexpr int kEta1 = 2;
constexpr int kEta2 = 2;
constexpr int kDu = 10;
constexpr int kDv = 4;
constexpr std::size_t kPolyBytes = 384;

using Poly = std::array<std::uint16_t, kN>;
using PolyVec = std::array<Poly, kK>;

constexpr std::uint32_t pow_mod(std::uint32_t base, std::uint32_t exp) {
    std::uint32_t result = 1;
    base %= kQ;
    while (exp > 0) {
        if (exp & 1) result = result * base % kQ;
        base = base * base % kQ;
        exp >>= 1;
    }
    return result;
}

constexpr std::uint32_t bitrev7(std::uint32_t v) {
    std::uint32_t r = 0;
    for (int i = 0; i < 7; ++i) r |= ((v >> i) & 1) << (6 - i);
    return r;
}

struct ZetaTables {
    std::array<std::uint16_t, 128> ntt{};
    std::array<std::uint16_t, 128> gamma{};
};

constexpr ZetaTables make_tables() {
    ZetaTables t;
    for (std::uint32_t i = 0; i < 128; ++i) {
        t.ntt[i] = static_cast<std::uint16_t>(pow_mod(17, bitrev7(i)));
        t.gamma[i] = static_cast<std::uint16_t>(pow_mod(17, 2 * bitrev7(i) + 1));
    }
    return t;
}

constexpr ZetaTables kZetas = make_tables();

inline std::uint16_t add(std::uint32_t a, std::uint32_t b) { return static_cast<std::uint16_t>((a + b) % kQ); }
inline std::uint16_t sub(std::uint32_t a, std::uint32_t b) { return static_cast<std::uint16_t>((a + kQ - b) % kQ); }
inline std::uint16_t mul(std::uint32_t a, std::uint32_t b) { return static_cast<std::uint16_t>(a * b % kQ); }

void ntt(Poly& f) {
    int i = 1;
    for (int len = 128; len >= 2; len /= 2) {
        for (int start = 0; start < kN; start += 2 * len) {
            const std::uint32_t zeta = kZetas.ntt[i++];
            for (int j = start; j < start + len; ++j) {
                const std::uint16_t t = mul(zeta, f[j + len]);
                f[j + len] = sub(f[j], t);
                f[j] = add(f[j], t);
            }
        }
    }
}

void inv_ntt(Poly& f) {
    int i = 127;
    for (int len = 2; len <= 128; len *= 2) {
        for (int start = 0; start < kN; start += 2 * len) {
            const std::uint32_t zeta = kZetas.ntt[i--];
            for (int j = start; j < start + len; ++j) {
                const std::uint16_t t = f[j];
                f[j] = add(t, f[j + len]);
                f[j + len] = mul(zeta, sub(f[j + len], t));
            }
        }
    }
    for (auto& c : f) c = mul(c, 3303);
}

Poly multiply_ntts(const Poly& f, const Poly& g) {
    Poly h{};
    for (int i = 0; i < 128; ++i) {
        const std::uint32_t a0 = f[2 * i], a1 = f[2 * i + 1];
        const std::uint32_t b0 = g[2 * i], b1 = g[2 * i + 1];
        h[2 * i] = add(mul(a0, b0), mul(mul(a1, b1), kZetas.gamma[i]));
        h[2 * i + 1] = add(mul(a0, b1), mul(a1, b0));
    }
    return h;
}

void poly_add_into(Poly& acc, const Poly& p) {
    for (int i = 0; i < kN; ++i) acc[i] = add(acc[i], p[i]);
}

Poly sample_ntt(ByteView rho, std::uint8_t j, std::uint8_t i) {
    Shake128 xof;
    xof.absorb(rho).absorb_byte(j).absorb_byte(i);
    Poly a{};
    int count = 0;
    std::uint8_t buf[168];
    while (count < kN) {
        xof.squeeze(buf, sizeof buf);
        for (std::size_t p = 0; p + 3 <= sizeof buf && count < kN; p += 3) {
            const std::uint32_t d1 = buf[p] | (std::uint32_t{buf[p + 1]} & 0x0f) << 8;
            const std::uint32_t d2 = (buf[p + 1] >> 4) | std::uint32_t{buf[p + 2]} << 4;
            if (d1 < kQ) a[count++] = static_cast<std::uint16_t>(d1);
            if (d2 < kQ && count < kN) a[count++] = static_cast<std::uint16_t>(d2);
        }
    }
    return a;
}

Poly sample_cbd(ByteView bytes, int eta) {
    Poly f{};
    auto bit = [&](int idx) { return (bytes[idx / 8] >> (idx % 8)) & 1; };
    for (int i = 0; i < kN; ++i) {
        int x = 0, y = 0;
        for (int j = 0; j < eta; ++j) x += bit(2 * i * eta + j);
        for (int j = 0; j < eta; ++j) y += bit(2 * i * eta + eta + j);
        f[i] = sub(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y));
    }
    return f;
}

Bytes prf(ByteView seed, std::uint8_t nonce, int eta) {
    Shake256 h;
    h.absorb(seed).absorb_byte(nonce);
    return h.squeeze(64 * static_cast<std::size_t>(eta));
}

void byte_encode(const Poly& f, int d, Bytes& out) {
    std::uint32_t acc = 0;
    int bits = 0;
    for (int i = 0; i < kN; ++i) {
        acc |= std::uint32_t{f[i]} << bits;
        bits += d;
        while (bits >= 8) {
            out.push_back(static_cast<std::uint8_t>(acc));
            acc >>= 8;
            bits -= 8;
        }
    }
}

Poly byte_decode(ByteView in, int d) {
    Poly f{};
    std::uint32_t acc = 0;
    int bits = 0;
    std::size_t pos = 0;
    const std::uint32_t mask = (1u << d) - 1;
    for (int i = 0; i < kN; ++i) {
        while (bits < d) {
            acc |= std::uint32_t{in[pos++]} << bits;
            bits += 8;
        }
        std::uint32_t v = acc & mask;
        acc >>= d;
        bits -= d;
        if (d == 12) v %= kQ;
        f[i] = static_cast<std::uint16_t>(v);
    }
    return f;
}

std::uint16_t compress(std::uint32_t x, int d) {
    return static_cast<std::uint16_t>((((x << d) + kQ / 2) / kQ) & ((1u << d) - 1));
}

std::uint16_t decompress(std::uint32_t y, int d) {
    return static_cast<std::uint16_t>((y * kQ + (1u << (d - 1))) >> d);
}

std::array<PolyVec, kK> expand_matrix(ByteView rho) {
    std::array<PolyVec, kK> a{};
    for (int i = 0; i < kK; ++i)
        for (int j = 0; j < kK; ++j)
            a[i][j] = sample_ntt(rho, static_cast<std::uint8_t>(j), static_cast<std::uint8_t>(i));
    return a;
}

Bytes pke_encrypt(ByteView ek, ByteView m, ByteView r) {
    PolyVec t_hat;
    for (int i = 0; i < kK; ++i) t_hat[i] = byte_decode(ek.subspan(kPolyBytes * i, kPolyBytes), 12);
    const ByteView rho = ek.subspan(kPolyBytes * kK, 32);
    const auto a_hat = expand_matrix(rho);

    std::uint8_t nonce = 0;
    PolyVec y, e1;
    for (auto& p : y) p = sample_cbd(prf(r, nonce++, kEta1), kEta1);
    for (auto& p : e1) p = sample_cbd(prf(r, nonce++, kEta2), kEta2);
    const Poly e2 = sample_cbd(prf(r, nonce++, kEta2), kEta2);
    for (auto& p : y) ntt(p);

    Bytes c;
    c.reserve(kCiphertextBytes);
    for (int i = 0; i < kK; ++i) {
        Poly u{};
        for (int j = 0; j < kK; ++j) poly_add_into(u, multiply_ntts(a_hat[j][i], y[j]));
        inv_ntt(u);
        poly_add_into(u, e1[i]);
        for (auto& coeff : u) coeff = compress(coeff, kDu);
        byte_encode(u, kDu, c);
    }
    Poly v{};
    for (int j = 0; j < kK; ++j) poly_add_into(v, multiply_ntts(t_hat[j], y[j]));
    inv_ntt(v);
    poly_add_into(v, e2);
    const Poly mu = byte_decode(m, 1);
    for (int i = 0; i < kN; ++i) v[i] = add(v[i], decompress(mu[i], 1));
    for (auto& coeff : v) coeff = compress(coeff, kDv);
    byte_encode(v, kDv, c);
    return c;
}

Bytes pke_decrypt(ByteView dk_pke, ByteView c) {
    constexpr std::size_t kUBytes = 32 * kDu;
    PolyVec u;
    for (int i = 0; i < kK; ++i) {
        u[i] = byte_decode(c.subspan(kUBytes * i, kUBytes), kDu);
        for (auto& coeff : u[i]) coeff = decompress(coeff, kDu);
        ntt(u[i]);
    }
    Poly v = byte_decode(c.subspan(kUBytes * kK, 32 * kDv), kDv);
    for (auto& coeff : v) coeff = decompress(coeff, kDv);

    Poly inner{};
    for (int i = 0; i < kK; ++i) {
        const Poly s_hat = byte_decode(dk_pke.subspan(kPolyBytes * i, kPolyBytes), 12);
        poly_add_into(inner, multiply_ntts(s_hat, u[i]));
    }
    inv_ntt(inner);
    Poly w;
    for (int i = 0; i < kN; ++i) w[i] = compress(sub(v[i], inner[i]), 1);
    Bytes m;
    m.reserve(32);
    byte_encode(w, 1, m);
    return m;
}

}  // namespace

KeyPair keygen_from_seed(ByteView seed) {
    if (seed.size() != kSeedBytes) throw std::invalid_argument("ML-KEM-768 seed must be 64 bytes");
    const ByteView d = seed.first(32);
    const ByteView z = seed.subspan(32, 32);

    const Bytes g = Sha3_512{}.absorb(d).absorb_byte(kK).squeeze(64);
    const ByteView rho(g.data(), 32);
    const ByteView sigma(g.data() + 32, 32);

    const auto a_hat = expand_matrix(rho);
    std::uint8_t nonce = 0;
    PolyVec s, e;
    for (auto& p : s) p = sample_cbd(prf(sigma, nonce++, kEta1), kEta1);
    for (auto& p : e) p = sample_cbd(prf(sigma, nonce++, kEta1), kEta1);
    for (auto& p : s) ntt(p);
    for (auto& p : e) ntt(p);

    Bytes ek;
    ek.reserve(kEncapsKeyBytes);
    for (int i = 0; i < kK; ++i) {
        Poly t = e[i];
        for (int j = 0; j < kK; ++j) poly_add_into(t, multiply_ntts(a_hat[i][j], s[j]));
        byte_encode(t, 12, ek);
    }
    append(ek, rho);

    Bytes dk;
    dk.reserve(kDecapsKeyBytes);
    for (const auto& p : s) byte_encode(p, 12, dk);
    append(dk, ek);
    append(dk, sha3_256(ek));
    append(dk, z);
    return {std::move(ek), std::move(dk)};
}

Encapsulation encapsulate_with(ByteView encaps_key, ByteView message) {
    if (encaps_key.size() != kEncapsKeyBytes) throw std::invalid_argument("ML-KEM-768 encapsulation key has wrong length");
    if (message.size() != 32) throw std::invalid_argument("ML-KEM-768 message must be 32 bytes");
    Bytes reencoded;
    reencoded.reserve(kPolyBytes * kK);
    for (int i = 0; i < kK; ++i) byte_encode(byte_decode(encaps_key.subspan(kPolyBytes * i, kPolyBytes), 12), 12, reencoded);
    if (!std::equal(reencoded.begin(), reencoded.end(), encaps_key.begin()))
        throw std::invalid_argument("ML-KEM-768 encapsulation key failed modulus check");

    const Bytes h = sha3_256(encaps_key);
    const Bytes g = Sha3_512{}.absorb(message).absorb(h).squeeze(64);
    Encapsulation out;
    out.shared_secret.assign(g.begin(), g.begin() + 32);
    out.ciphertext = pke_encrypt(encaps_key, message, ByteView(g.data() + 32, 32));
    return out;
}

Bytes decapsulate(ByteView decaps_key, ByteView ciphertext) {
    if (decaps_key.size() != kDecapsKeyBytes) throw std::invalid_argument("ML-KEM-768 decapsulation key has wrong length");
    if (ciphertext.size() != kCiphertextBytes) throw std::invalid_argument("ML-KEM-768 ciphertext has wrong length");
    const ByteView dk_pke = decaps_key.first(kPolyBytes * kK);
    const ByteView ek_pke = decaps_key.subspan(kPolyBytes * kK, kEncapsKeyBytes);
    const ByteView h = decaps_key.subspan(kPolyBytes * kK + kEncapsKeyBytes, 32);
    const ByteView z = decaps_key.subspan(kPolyBytes * kK + kEncapsKeyBytes + 32, 32);

    const Bytes m_prime = pke_decrypt(dk_pke, ciphertext);
    const Bytes g = Sha3_512{}.absorb(m_prime).absorb(h).squeeze(64);
    const Bytes k_bar = Shake256{}.absorb(z).absorb(ciphertext).squeeze(32);
    const Bytes c_prime = pke_encrypt(ek_pke, m_prime, ByteView(g.data() + 32, 32));

    // Constant-time select between K' and K-bar.
    std::uint8_t diff = 0;
    for (std::size_t i = 0; i < kCiphertextBytes; ++i) diff |= static_cast<std::uint8_t>(c_prime[i] ^ ciphertext[i]);
    const std::uint32_t differs = (std::uint32_t{diff} + 0xffu) >> 8;
    const auto mask = static_cast<std::uint8_t>(0u - differs);
    Bytes key(32);
    for (int i = 0; i < 32; ++i) key[i] = static_cast<std::uint8_t>((g[i] & ~mask) | (k_bar[i] & mask));
    return key;
}

}  // namespace pqchain::crypto::mlkem768
