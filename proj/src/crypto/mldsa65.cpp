#include "pqchain/crypto/mldsa65.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

#include "pqchain/crypto/keccak.hpp"

namespace pqchain::crypto::mldsa65 {
namespace {

constexpr int kN = 256;
constexpr std::int32_t kQ = 8380417;
constexpr int kD = 13;
constexpr int kTau = 49;
constexpr std::size_t kCTildeBytes = 48;
constexpr std::int32_t kGamma1 = 1 << 19;
constexpr std::int32_t kGamma2 = (kQ - 1) / 32;
constexpr int kK = 6;
constexpr int kL = 5;
constexpr std::int32_t kEta = 4;
constexpr std::int32_t kBeta = kTau * kEta;
constexpr int kOmega = 55;

using Poly = std::array<std::int32_t, kN>;  // coefficients kept in [0, q)
template <int Len>
using PolyVec = std::array<Poly, Len>;
using Matrix = std::array<PolyVec<kL>, kK>;

constexpr std::int32_t reduce(std::int64_t x) {
    std::int64_t r = x % kQ;
    return static_cast<std::int32_t>(r < 0 ? r + kQ : r);
}

constexpr std::int32_t centered(std::int32_t x) { return x > (kQ - 1) / 2 ? x - kQ : x; }

constexpr std::int32_t pow_mod(std::int64_t base, std::uint32_t exp) {
    std::int64_t result = 1;
    while (exp > 0) {
        if (exp & 1) result = result * base % kQ;
        base = base * base % kQ;
        exp >>= 1;
    }
    return static_cast<std::int32_t>(result);
}

constexpr std::uint32_t bitrev8(std::uint32_t v) {
    std::uint32_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> i) & 1) << (7 - i);
    return r;
}

constexpr std::array<std::int32_t, 256> make_zetas() {
    std::array<std::int32_t, 256> z{};
    for (std::uint32_t m = 0; m < 256; ++m) z[m] = pow_mod(1753, bitrev8(m));
    return z;
}

constexpr std::array<std::int32_t, 256> kZetas = make_zetas();

void ntt(Poly& w) {
    int m = 0;
    for (int len = 128; len >= 1; len /= 2) {
        for (int start = 0; start < kN; start += 2 * len) {
            const std::int64_t z = kZetas[++m];
            for (int j = start; j < start + len; ++j) {
                const std::int32_t t = reduce(z * w[j + len]);
                w[j + len] = reduce(std::int64_t{w[j]} - t);
                w[j] = reduce(std::int64_t{w[j]} + t);
            }
        }
    }
}

void inv_ntt(Poly& w) {
    int m = 256;
    for (int len = 1; len < kN; len *= 2) {
        for (int start = 0; start < kN; start += 2 * len) {
            const std::int64_t z = kQ - kZetas[--m];
            for (int j = start; j < start + len; ++j) {
                const std::int32_t t = w[j];
                w[j] = reduce(std::int64_t{t} + w[j + len]);
                w[j + len] = reduce(z * reduce(std::int64_t{t} - w[j + len]));
            }
        }
    }
    for (auto& c : w) c = reduce(std::int64_t{c} * 8347681);
}

Poly pointwise(const Poly& a, const Poly& b) {
    Poly c;
    for (int i = 0; i < kN; ++i) c[i] = reduce(std::int64_t{a[i]} * b[i]);
    return c;
}

void add_into(Poly& acc, const Poly& p) {
    for (int i = 0; i < kN; ++i) acc[i] = reduce(std::int64_t{acc[i]} + p[i]);
}

Poly sub_poly(const Poly& a, const Poly& b) {
    Poly c;
    for (int i = 0; i < kN; ++i) c[i] = reduce(std::int64_t{a[i]} - b[i]);
    return c;
}

std::int32_t inf_norm(const Poly& p) {
    std::int32_t m = 0;
    for (auto c : p) {
        const std::int32_t v = centered(c);
        m = std::max(m, v < 0 ? -v : v);
    }
    return m;
}

Poly rej_ntt_poly(ByteView rho, std::uint8_t s, std::uint8_t r) {
    Shake128 xof;
    xof.absorb(rho).absorb_byte(s).absorb_byte(r);
    Poly a{};
    int j = 0;
    std::uint8_t buf[168];
    while (j < kN) {
        xof.squeeze(buf, sizeof buf);
        for (std::size_t p = 0; p + 3 <= sizeof buf && j < kN; p += 3) {
            const std::int32_t v = buf[p] | (buf[p + 1] << 8) | ((buf[p + 2] & 0x7f) << 16);
            if (v < kQ) a[j++] = v;
        }
    }
    return a;
}

Poly rej_bounded_poly(ByteView rho, std::uint16_t index) {
    Shake256 h;
    h.absorb(rho).absorb_byte(static_cast<std::uint8_t>(index)).absorb_byte(static_cast<std::uint8_t>(index >> 8));
    Poly a{};
    int j = 0;
    std::uint8_t buf[136];
    while (j < kN) {
        h.squeeze(buf, sizeof buf);
        for (std::size_t p = 0; p < sizeof buf && j < kN; ++p) {
            const int z0 = buf[p] & 0x0f;
            const int z1 = buf[p] >> 4;
            if (z0 < 9) a[j++] = reduce(kEta - z0);
            if (z1 < 9 && j < kN) a[j++] = reduce(kEta - z1);
        }
    }
    return a;
}

Matrix expand_a(ByteView rho) {
    Matrix a;
    for (int r = 0; r < kK; ++r)
        for (int s = 0; s < kL; ++s) a[r][s] = rej_ntt_poly(rho, static_cast<std::uint8_t>(s), static_cast<std::uint8_t>(r));
    return a;
}

// Packs (b - w_i) with `bits` bits per coefficient, little-endian bit order.
void bit_pack(const Poly& w, std::int32_t b, int bits, Bytes& out) {
    std::uint64_t acc = 0;
    int filled = 0;
    for (auto c : w) {
        acc |= static_cast<std::uint64_t>(b - centered(c)) << filled;
        filled += bits;
        while (filled >= 8) {
            out.push_back(static_cast<std::uint8_t>(acc));
            acc >>= 8;
            filled -= 8;
        }
    }
}

void simple_bit_pack(const Poly& w, int bits, Bytes& out) {
    std::uint64_t acc = 0;
    int filled = 0;
    for (auto c : w) {
        acc |= static_cast<std::uint64_t>(c) << filled;
        filled += bits;
        while (filled >= 8) {
            out.push_back(static_cast<std::uint8_t>(acc));
            acc >>= 8;
            filled -= 8;
        }
    }
}

// Inverse of bit_pack: coefficient = b - packed value, reduced into [0, q).
Poly bit_unpack(ByteView in, std::int32_t b, int bits) {
    Poly w;
    std::uint64_t acc = 0;
    int filled = 0;
    std::size_t pos = 0;
    const std::uint64_t mask = (std::uint64_t{1} << bits) - 1;
    for (auto& c : w) {
        while (filled < bits) {
            acc |= std::uint64_t{in[pos++]} << filled;
            filled += 8;
        }
        c = reduce(std::int64_t{b} - static_cast<std::int64_t>(acc & mask));
        acc >>= bits;
        filled -= bits;
    }
    return w;
}

Poly simple_bit_unpack(ByteView in, int bits) {
    Poly w;
    std::uint64_t acc = 0;
    int filled = 0;
    std::size_t pos = 0;
    const std::uint64_t mask = (std::uint64_t{1} << bits) - 1;
    for (auto& c : w) {
        while (filled < bits) {
            acc |= std::uint64_t{in[pos++]} << filled;
            filled += 8;
        }
        c = static_cast<std::int32_t>(acc & mask);
        acc >>= bits;
        filled -= bits;
    }
    return w;
}

struct Decomposed {
    std::int32_t high;
    std::int32_t low;  // centered
};

Decomposed decompose(std::int32_t r) {
    std::int32_t r0 = r % (2 * kGamma2);
    if (r0 > kGamma2) r0 -= 2 * kGamma2;
    if (r - r0 == kQ - 1) return {0, r0 - 1};
    return {(r - r0) / (2 * kGamma2), r0};
}

std::int32_t use_hint(bool hint, std::int32_t r) {
    constexpr std::int32_t m = (kQ - 1) / (2 * kGamma2);
    const auto [r1, r0] = decompose(r);
    if (!hint) return r1;
    if (r0 > 0) return (r1 + 1) % m;
    return (r1 - 1 + m) % m;
}

Bytes w1_encode(const PolyVec<kK>& w1) {
    Bytes out;
    out.reserve(kK * 128);
    for (const auto& p : w1) simple_bit_pack(p, 4, out);
    return out;
}

Poly sample_in_ball(ByteView seed) {
    Shake256 h;
    h.absorb(seed);
    std::uint8_t sign_bytes[8];
    h.squeeze(sign_bytes, 8);
    std::uint64_t signs = 0;
    for (int i = 7; i >= 0; --i) signs = (signs << 8) | sign_bytes[i];
    Poly c{};
    for (int i = kN - kTau; i < kN; ++i) {
        std::uint8_t j;
        do {
            h.squeeze(&j, 1);
        } while (j > i);
        c[i] = c[j];
        c[j] = (signs & 1) ? kQ - 1 : 1;
        signs >>= 1;
    }
    return c;
}

Bytes message_representative(ByteView tr, ByteView message, ByteView context) {
    if (context.size() > 255) throw std::invalid_argument("ML-DSA context longer than 255 bytes");
    Shake256 h;
    h.absorb(tr).absorb_byte(0).absorb_byte(static_cast<std::uint8_t>(context.size())).absorb(context).absorb(message);
    return h.squeeze(64);
}

struct PublicParts {
    Bytes rho;
    PolyVec<kK> t1;
};

PublicParts decode_public(ByteView pk) {
    if (pk.size() != kPublicKeyBytes) throw std::invalid_argument("ML-DSA-65 public key has wrong length");
    PublicParts parts;
    parts.rho.assign(pk.begin(), pk.begin() + 32);
    for (int i = 0; i < kK; ++i) parts.t1[i] = simple_bit_unpack(pk.subspan(32 + 320 * i, 320), 10);
    return parts;
}

}  // namespace

struct ExpandedSigner::State {
    Bytes key_seed;  // K
    Bytes tr;
    Matrix a_hat;
    PolyVec<kL> s1_hat;
    PolyVec<kK> s2_hat;
    PolyVec<kK> t0_hat;
};

KeyPair keygen_from_seed(ByteView xi) {
    if (xi.size() != kSeedBytes) throw std::invalid_argument("ML-DSA-65 seed must be 32 bytes");
    const Bytes expanded = Shake256{}.absorb(xi).absorb_byte(kK).absorb_byte(kL).squeeze(128);
    const ByteView rho(expanded.data(), 32);
    const ByteView rho_prime(expanded.data() + 32, 64);
    const ByteView key_seed(expanded.data() + 96, 32);

    const Matrix a_hat = expand_a(rho);
    PolyVec<kL> s1;
    PolyVec<kK> s2;
    for (int r = 0; r < kL; ++r) s1[r] = rej_bounded_poly(rho_prime, static_cast<std::uint16_t>(r));
    for (int r = 0; r < kK; ++r) s2[r] = rej_bounded_poly(rho_prime, static_cast<std::uint16_t>(r + kL));

    PolyVec<kL> s1_hat = s1;
    for (auto& p : s1_hat) ntt(p);

    PolyVec<kK> t1, t0;
    for (int i = 0; i < kK; ++i) {
        Poly t{};
        for (int j = 0; j < kL; ++j) add_into(t, pointwise(a_hat[i][j], s1_hat[j]));
        inv_ntt(t);
        add_into(t, s2[i]);
        for (int n = 0; n < kN; ++n) {
            std::int32_t r0 = t[n] % (1 << kD);
            if (r0 > (1 << (kD - 1))) r0 -= 1 << kD;
            t1[i][n] = (t[n] - r0) >> kD;
            t0[i][n] = reduce(r0);
        }
    }

    KeyPair kp;
    kp.public_key.assign(rho.begin(), rho.end());
    for (const auto& p : t1) simple_bit_pack(p, 10, kp.public_key);
    const Bytes tr = shake256(kp.public_key, 64);

    Bytes& sk = kp.secret_key;
    sk.reserve(kSecretKeyBytes);
    append(sk, rho);
    append(sk, key_seed);
    append(sk, tr);
    for (const auto& p : s1) bit_pack(p, kEta, 4, sk);
    for (const auto& p : s2) bit_pack(p, kEta, 4, sk);
    for (const auto& p : t0) bit_pack(p, 1 << (kD - 1), kD, sk);
    return kp;
}

ExpandedSigner::ExpandedSigner(ByteView sk) : state_(std::make_unique<State>()) {
    if (sk.size() != kSecretKeyBytes) throw std::invalid_argument("ML-DSA-65 secret key has wrong length");
    Reader in(sk);
    const ByteView rho = in.take(32);
    const ByteView key_seed = in.take(32);
    state_->key_seed.assign(key_seed.begin(), key_seed.end());
    const ByteView tr = in.take(64);
    state_->tr.assign(tr.begin(), tr.end());
    for (auto& p : state_->s1_hat) {
        p = bit_unpack(in.take(128), kEta, 4);
        ntt(p);
    }
    for (auto& p : state_->s2_hat) {
        p = bit_unpack(in.take(128), kEta, 4);
        ntt(p);
    }
    for (auto& p : state_->t0_hat) {
        p = bit_unpack(in.take(416), 1 << (kD - 1), kD);
        ntt(p);
    }
    state_->a_hat = expand_a(rho);
}

ExpandedSigner::~ExpandedSigner() = default;
ExpandedSigner::ExpandedSigner(ExpandedSigner&&) noexcept = default;
ExpandedSigner& ExpandedSigner::operator=(ExpandedSigner&&) noexcept = default;

Bytes ExpandedSigner::sign(ByteView message, ByteView context, ByteView rnd) const {
    const State& st = *state_;
    static const std::array<std::uint8_t, 32> kZeroRnd{};
    if (rnd.empty()) rnd = kZeroRnd;
    if (rnd.size() != 32) throw std::invalid_argument("ML-DSA rnd must be 32 bytes");

    const Bytes mu = message_representative(st.tr, message, context);
    const Bytes rho_pp = Shake256{}.absorb(st.key_seed).absorb(rnd).absorb(mu).squeeze(64);

    for (std::uint32_t kappa = 0;; kappa += kL) {
        PolyVec<kL> y;
        for (int r = 0; r < kL; ++r) {
            const std::uint32_t idx = kappa + static_cast<std::uint32_t>(r);
            Shake256 h;
            h.absorb(rho_pp).absorb_byte(static_cast<std::uint8_t>(idx)).absorb_byte(static_cast<std::uint8_t>(idx >> 8));
            y[r] = bit_unpack(h.squeeze(640), kGamma1, 20);
        }
        PolyVec<kL> y_hat = y;
        for (auto& p : y_hat) ntt(p);

        PolyVec<kK> w, w1;
        for (int i = 0; i < kK; ++i) {
            Poly acc{};
            for (int j = 0; j < kL; ++j) add_into(acc, pointwise(st.a_hat[i][j], y_hat[j]));
            inv_ntt(acc);
            w[i] = acc;
            for (int n = 0; n < kN; ++n) w1[i][n] = decompose(acc[n]).high;
        }

        Bytes c_tilde = Shake256{}.absorb(mu).absorb(w1_encode(w1)).squeeze(kCTildeBytes);
        Poly c_hat = sample_in_ball(c_tilde);
        ntt(c_hat);

        PolyVec<kL> z;
        bool reject = false;
        for (int j = 0; j < kL && !reject; ++j) {
            Poly cs1 = pointwise(c_hat, st.s1_hat[j]);
            inv_ntt(cs1);
            z[j] = y[j];
            add_into(z[j], cs1);
            reject = inf_norm(z[j]) >= kGamma1 - kBeta;
        }
        if (reject) continue;

        std::array<std::array<bool, kN>, kK> hint{};
        int ones = 0;
        for (int i = 0; i < kK && !reject; ++i) {
            Poly cs2 = pointwise(c_hat, st.s2_hat[i]);
            inv_ntt(cs2);
            const Poly w_minus_cs2 = sub_poly(w[i], cs2);
            for (int n = 0; n < kN && !reject; ++n) {
                const std::int32_t low = decompose(w_minus_cs2[n]).low;
                reject = (low < 0 ? -low : low) >= kGamma2 - kBeta;
            }
            if (reject) break;
            Poly ct0 = pointwise(c_hat, st.t0_hat[i]);
            inv_ntt(ct0);
            if (inf_norm(ct0) >= kGamma2) {
                reject = true;
                break;
            }
            for (int n = 0; n < kN; ++n) {
                // MakeHint(-ct0, w - cs2 + ct0) compares HighBits(w - cs2 + ct0) with HighBits(w - cs2).
                const std::int32_t r = reduce(std::int64_t{w_minus_cs2[n]} + ct0[n]);
                hint[i][n] = decompose(r).high != decompose(w_minus_cs2[n]).high;
                ones += hint[i][n];
            }
        }
        if (reject || ones > kOmega) continue;

        Bytes sig = std::move(c_tilde);
        sig.reserve(kSignatureBytes);
        for (const auto& p : z) bit_pack(p, kGamma1, 20, sig);
        std::array<std::uint8_t, kOmega + kK> packed{};
        int index = 0;
        for (int i = 0; i < kK; ++i) {
            for (int n = 0; n < kN; ++n)
                if (hint[i][n]) packed[index++] = static_cast<std::uint8_t>(n);
            packed[kOmega + i] = static_cast<std::uint8_t>(index);
        }
        append(sig, packed);
        return sig;
    }
}

Bytes sign(ByteView secret_key, ByteView message, ByteView context, ByteView rnd) {
    return ExpandedSigner(secret_key).sign(message, context, rnd);
}

bool verify(ByteView public_key, ByteView message, ByteView signature, ByteView context) {
    if (signature.size() != kSignatureBytes || public_key.size() != kPublicKeyBytes || context.size() > 255) return false;
    const PublicParts pk = decode_public(public_key);

    const ByteView c_tilde = signature.first(kCTildeBytes);
    PolyVec<kL> z;
    for (int j = 0; j < kL; ++j) {
        z[j] = bit_unpack(signature.subspan(kCTildeBytes + 640 * j, 640), kGamma1, 20);
        if (inf_norm(z[j]) >= kGamma1 - kBeta) return false;
    }

    const ByteView packed = signature.subspan(kCTildeBytes + 640 * kL);
    std::array<std::array<bool, kN>, kK> hint{};
    int index = 0;
    for (int i = 0; i < kK; ++i) {
        const int end = packed[kOmega + i];
        if (end < index || end > kOmega) return false;
        const int first = index;
        for (; index < end; ++index) {
            if (index > first && packed[index - 1] >= packed[index]) return false;
            hint[i][packed[index]] = true;
        }
    }
    for (int i = index; i < kOmega; ++i)
        if (packed[i] != 0) return false;

    const Matrix a_hat = expand_a(pk.rho);
    const Bytes tr = shake256(public_key, 64);
    const Bytes mu = message_representative(tr, message, context);

    Poly c_hat = sample_in_ball(c_tilde);
    ntt(c_hat);
    for (auto& p : z) ntt(p);

    PolyVec<kK> w1;
    for (int i = 0; i < kK; ++i) {
        Poly acc{};
        for (int j = 0; j < kL; ++j) add_into(acc, pointwise(a_hat[i][j], z[j]));
        Poly t1_scaled;
        for (int n = 0; n < kN; ++n) t1_scaled[n] = reduce(std::int64_t{pk.t1[i][n]} << kD);
        ntt(t1_scaled);
        acc = sub_poly(acc, pointwise(c_hat, t1_scaled));
        inv_ntt(acc);
        for (int n = 0; n < kN; ++n) w1[i][n] = use_hint(hint[i][n], acc[n]);
    }
    const Bytes expected = Shake256{}.absorb(mu).absorb(w1_encode(w1)).squeeze(kCTildeBytes);
    return std::equal(expected.begin(), expected.end(), c_tilde.begin());
}

}  // namespace pqchain::crypto::mldsa65
