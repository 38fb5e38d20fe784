#include "pqchain/crypto/slhdsa192s.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "pqchain/crypto/keccak.hpp"

namespace pqchain::crypto::slhdsa192s {
namespace {

constexpr int kH = 63;
constexpr int kD = 7;
constexpr int kHPrime = 9;
constexpr int kA = 14;
constexpr int kK = 17;
constexpr int kLgW = 4;
constexpr int kW = 16;
constexpr int kLen1 = 48;
constexpr int kLen2 = 3;
constexpr int kLen = kLen1 + kLen2;
constexpr std::size_t kM = 39;
constexpr std::size_t kMdBytes = (kK * kA + 7) / 8;
constexpr std::size_t kTreeIdxBytes = (kH - kH / kD + 7) / 8;
constexpr std::size_t kLeafIdxBytes = (kH / kD + 7) / 8;

using Node = std::array<std::uint8_t, kN>;

enum AdrsType : std::uint32_t {
    kWotsHash = 0,
    kWotsPk = 1,
    kTree = 2,
    kForsTree = 3,
    kForsRoots = 4,
    kWotsPrf = 5,
    kForsPrf = 6,
};

struct Adrs {
    std::array<std::uint8_t, 32> b{};

    void put32(std::size_t off, std::uint32_t v) {
        for (int i = 0; i < 4; ++i) b[off + i] = static_cast<std::uint8_t>(v >> (24 - 8 * i));
    }
    std::uint32_t get32(std::size_t off) const {
        return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
               b[off + 3];
    }

    void set_layer(std::uint32_t v) { put32(0, v); }
    void set_tree(std::uint64_t v) {
        put32(4, 0);
        put32(8, static_cast<std::uint32_t>(v >> 32));
        put32(12, static_cast<std::uint32_t>(v));
    }
    void set_type_and_clear(AdrsType t) {
        put32(16, t);
        std::fill(b.begin() + 20, b.end(), 0);
    }
    void set_keypair(std::uint32_t v) { put32(20, v); }
    std::uint32_t keypair() const { return get32(20); }
    void set_chain(std::uint32_t v) { put32(24, v); }
    void set_tree_height(std::uint32_t v) { put32(24, v); }
    void set_hash(std::uint32_t v) { put32(28, v); }
    void set_tree_index(std::uint32_t v) { put32(28, v); }
    std::uint32_t tree_index() const { return get32(28); }
};

// One-block SHAKE256 of pk_seed || adrs || parts, for inputs below the rate.
template <std::size_t Parts>
Node hash_block(const Node& pk_seed, const Adrs& adrs, const std::array<const std::uint8_t*, Parts>& parts) {
    std::array<std::uint8_t, 136> block{};
    std::size_t pos = 0;
    std::memcpy(block.data(), pk_seed.data(), kN);
    pos += kN;
    std::memcpy(block.data() + pos, adrs.b.data(), 32);
    pos += 32;
    for (const auto* p : parts) {
        std::memcpy(block.data() + pos, p, kN);
        pos += kN;
    }
    block[pos] ^= 0x1f;
    block[135] ^= 0x80;
    std::array<std::uint64_t, 25> state{};
    for (std::size_t lane = 0; lane < 17; ++lane) {
        std::uint64_t v = 0;
        for (int k = 7; k >= 0; --k) v = (v << 8) | block[8 * lane + k];
        state[lane] = v;
    }
    keccak_f1600(state);
    Node out;
    for (std::size_t i = 0; i < kN; ++i) out[i] = static_cast<std::uint8_t>(state[i / 8] >> (8 * (i % 8)));
    return out;
}

struct Context {
    Node pk_seed;
    Node sk_seed;

    Node f(const Adrs& adrs, const std::uint8_t* m) const { return hash_block<1>(pk_seed, adrs, {m}); }
    Node h(const Adrs& adrs, const Node& l, const Node& r) const {
        return hash_block<2>(pk_seed, adrs, {l.data(), r.data()});
    }
    Node prf(const Adrs& adrs) const { return hash_block<1>(pk_seed, adrs, {sk_seed.data()}); }
    Node t(const Adrs& adrs, const std::vector<Node>& nodes) const {
        Shake256 s;
        s.absorb(pk_seed).absorb(adrs.b);
        for (const auto& n : nodes) s.absorb(n);
        Node out;
        s.squeeze(out.data(), kN);
        return out;
    }
};

std::vector<std::uint32_t> base_2b(ByteView x, int b, int out_len) {
    std::vector<std::uint32_t> out(out_len);
    std::size_t in = 0;
    int bits = 0;
    std::uint64_t total = 0;
    for (auto& o : out) {
        while (bits < b) {
            total = (total << 8) | x[in++];
            bits += 8;
        }
        bits -= b;
        o = static_cast<std::uint32_t>((total >> bits) & ((1u << b) - 1));
    }
    return out;
}

std::uint64_t to_int(ByteView x) {
    std::uint64_t v = 0;
    for (auto c : x) v = (v << 8) | c;
    return v;
}

Node chain(const Context& ctx, Node x, std::uint32_t start, std::uint32_t steps, Adrs& adrs) {
    for (std::uint32_t j = start; j < start + steps; ++j) {
        adrs.set_hash(j);
        x = ctx.f(adrs, x.data());
    }
    return x;
}

std::vector<std::uint32_t> wots_digits(const Node& msg) {
    auto digits = base_2b(msg, kLgW, kLen1);
    std::uint32_t csum = 0;
    for (auto d : digits) csum += kW - 1 - d;
    csum <<= (8 - ((kLen2 * kLgW) % 8)) % 8;
    const std::array<std::uint8_t, 2> csum_bytes{static_cast<std::uint8_t>(csum >> 8), static_cast<std::uint8_t>(csum)};
    const auto tail = base_2b(csum_bytes, kLgW, kLen2);
    digits.insert(digits.end(), tail.begin(), tail.end());
    return digits;
}

Node wots_pk_gen(const Context& ctx, Adrs adrs) {
    Adrs sk_adrs = adrs;
    sk_adrs.set_type_and_clear(kWotsPrf);
    sk_adrs.set_keypair(adrs.keypair());
    std::vector<Node> tips(kLen);
    for (int i = 0; i < kLen; ++i) {
        sk_adrs.set_chain(i);
        adrs.set_chain(i);
        tips[i] = chain(ctx, ctx.prf(sk_adrs), 0, kW - 1, adrs);
    }
    Adrs pk_adrs = adrs;
    pk_adrs.set_type_and_clear(kWotsPk);
    pk_adrs.set_keypair(adrs.keypair());
    return ctx.t(pk_adrs, tips);
}

void wots_sign(const Context& ctx, const Node& msg, Adrs adrs, Bytes& out) {
    const auto digits = wots_digits(msg);
    Adrs sk_adrs = adrs;
    sk_adrs.set_type_and_clear(kWotsPrf);
    sk_adrs.set_keypair(adrs.keypair());
    for (int i = 0; i < kLen; ++i) {
        sk_adrs.set_chain(i);
        adrs.set_chain(i);
        const Node s = chain(ctx, ctx.prf(sk_adrs), 0, digits[i], adrs);
        out.insert(out.end(), s.begin(), s.end());
    }
}

Node wots_pk_from_sig(const Context& ctx, const std::uint8_t* sig, const Node& msg, Adrs adrs) {
    const auto digits = wots_digits(msg);
    std::vector<Node> tips(kLen);
    for (int i = 0; i < kLen; ++i) {
        adrs.set_chain(i);
        Node s;
        std::memcpy(s.data(), sig + i * kN, kN);
        tips[i] = chain(ctx, s, digits[i], kW - 1 - digits[i], adrs);
    }
    Adrs pk_adrs = adrs;
    pk_adrs.set_type_and_clear(kWotsPk);
    pk_adrs.set_keypair(adrs.keypair());
    return ctx.t(pk_adrs, tips);
}

// All levels of one XMSS tree; levels[0] are the leaves, levels[h'] the root.
std::vector<std::vector<Node>> xmss_tree(const Context& ctx, Adrs adrs) {
    std::vector<std::vector<Node>> levels(kHPrime + 1);
    levels[0].resize(1u << kHPrime);
    for (std::uint32_t i = 0; i < (1u << kHPrime); ++i) {
        adrs.set_type_and_clear(kWotsHash);
        adrs.set_keypair(i);
        levels[0][i] = wots_pk_gen(ctx, adrs);
    }
    adrs.set_type_and_clear(kTree);
    for (int z = 1; z <= kHPrime; ++z) {
        levels[z].resize(levels[z - 1].size() / 2);
        adrs.set_tree_height(z);
        for (std::uint32_t i = 0; i < levels[z].size(); ++i) {
            adrs.set_tree_index(i);
            levels[z][i] = ctx.h(adrs, levels[z - 1][2 * i], levels[z - 1][2 * i + 1]);
        }
    }
    return levels;
}

// Appends the XMSS signature of `msg` and returns the tree root.
Node xmss_sign(const Context& ctx, const Node& msg, std::uint32_t idx, Adrs adrs, Bytes& out) {
    const auto levels = xmss_tree(ctx, adrs);
    adrs.set_type_and_clear(kWotsHash);
    adrs.set_keypair(idx);
    wots_sign(ctx, msg, adrs, out);
    for (int j = 0; j < kHPrime; ++j) {
        const Node& sibling = levels[j][(idx >> j) ^ 1];
        out.insert(out.end(), sibling.begin(), sibling.end());
    }
    return levels[kHPrime][0];
}

Node climb(const Context& ctx, Node node, std::uint32_t leaf, int height, const std::uint8_t* auth, Adrs& adrs,
           std::uint32_t index_base) {
    adrs.set_tree_index(index_base + leaf);
    for (int k = 0; k < height; ++k) {
        adrs.set_tree_height(k + 1);
        Node sibling;
        std::memcpy(sibling.data(), auth + k * kN, kN);
        if (((leaf >> k) & 1) == 0) {
            adrs.set_tree_index(adrs.tree_index() / 2);
            node = ctx.h(adrs, node, sibling);
        } else {
            adrs.set_tree_index((adrs.tree_index() - 1) / 2);
            node = ctx.h(adrs, sibling, node);
        }
    }
    return node;
}

Node xmss_pk_from_sig(const Context& ctx, std::uint32_t idx, const std::uint8_t* sig, const Node& msg, Adrs adrs) {
    adrs.set_type_and_clear(kWotsHash);
    adrs.set_keypair(idx);
    const Node leaf = wots_pk_from_sig(ctx, sig, msg, adrs);
    adrs.set_type_and_clear(kTree);
    return climb(ctx, leaf, idx, kHPrime, sig + kLen * kN, adrs, 0);
}

void ht_sign(const Context& ctx, const Node& msg, std::uint64_t idx_tree, std::uint32_t idx_leaf, Bytes& out) {
    Adrs adrs;
    Node root = msg;
    for (int j = 0; j < kD; ++j) {
        adrs.set_layer(j);
        adrs.set_tree(idx_tree);
        root = xmss_sign(ctx, root, idx_leaf, adrs, out);
        idx_leaf = static_cast<std::uint32_t>(idx_tree & ((1u << kHPrime) - 1));
        idx_tree >>= kHPrime;
    }
}

bool ht_verify(const Context& ctx, const Node& msg, const std::uint8_t* sig, std::uint64_t idx_tree,
               std::uint32_t idx_leaf, const Node& pk_root) {
    Adrs adrs;
    Node node = msg;
    constexpr std::size_t kXmssBytes = (kLen + kHPrime) * kN;
    for (int j = 0; j < kD; ++j) {
        adrs.set_layer(j);
        adrs.set_tree(idx_tree);
        node = xmss_pk_from_sig(ctx, idx_leaf, sig + j * kXmssBytes, node, adrs);
        idx_leaf = static_cast<std::uint32_t>(idx_tree & ((1u << kHPrime) - 1));
        idx_tree >>= kHPrime;
    }
    return node == pk_root;
}

Node fors_sk(const Context& ctx, const Adrs& adrs, std::uint32_t idx) {
    Adrs sk_adrs = adrs;
    sk_adrs.set_type_and_clear(kForsPrf);
    sk_adrs.set_keypair(adrs.keypair());
    sk_adrs.set_tree_index(idx);
    return ctx.prf(sk_adrs);
}

void fors_sign(const Context& ctx, ByteView md, Adrs adrs, Bytes& out) {
    const auto indices = base_2b(md, kA, kK);
    std::vector<Node> level;
    for (int i = 0; i < kK; ++i) {
        const std::uint32_t base = static_cast<std::uint32_t>(i) << kA;
        const Node sk = fors_sk(ctx, adrs, base + indices[i]);
        out.insert(out.end(), sk.begin(), sk.end());

        level.resize(1u << kA);
        adrs.set_tree_height(0);
        for (std::uint32_t leaf = 0; leaf < (1u << kA); ++leaf) {
            adrs.set_tree_index(base + leaf);
            level[leaf] = ctx.f(adrs, fors_sk(ctx, adrs, base + leaf).data());
        }
        for (int z = 0; z < kA; ++z) {
            const Node& sibling = level[(indices[i] >> z) ^ 1];
            out.insert(out.end(), sibling.begin(), sibling.end());
            adrs.set_tree_height(z + 1);
            const std::uint32_t width = static_cast<std::uint32_t>(level.size() / 2);
            for (std::uint32_t n = 0; n < width; ++n) {
                adrs.set_tree_index((static_cast<std::uint32_t>(i) << (kA - z - 1)) + n);
                level[n] = ctx.h(adrs, level[2 * n], level[2 * n + 1]);
            }
            level.resize(width);
        }
    }
}

Node fors_pk_from_sig(const Context& ctx, const std::uint8_t* sig, ByteView md, Adrs adrs) {
    const auto indices = base_2b(md, kA, kK);
    std::vector<Node> roots(kK);
    for (int i = 0; i < kK; ++i) {
        const std::uint8_t* part = sig + i * (kA + 1) * kN;
        const std::uint32_t base = static_cast<std::uint32_t>(i) << kA;
        adrs.set_tree_height(0);
        adrs.set_tree_index(base + indices[i]);
        const Node leaf = ctx.f(adrs, part);
        roots[i] = climb(ctx, leaf, indices[i], kA, part + kN, adrs, base);
    }
    Adrs pk_adrs = adrs;
    pk_adrs.set_type_and_clear(kForsRoots);
    pk_adrs.set_keypair(adrs.keypair());
    return ctx.t(pk_adrs, roots);
}

struct Digest {
    Bytes md;
    std::uint64_t idx_tree;
    std::uint32_t idx_leaf;
};

Digest hash_message(ByteView r, ByteView pk_seed, ByteView pk_root, ByteView prefix, ByteView message) {
    const Bytes digest = Shake256{}.absorb(r).absorb(pk_seed).absorb(pk_root).absorb(prefix).absorb(message).squeeze(kM);
    const ByteView view(digest);
    Digest d;
    d.md.assign(digest.begin(), digest.begin() + kMdBytes);
    d.idx_tree = to_int(view.subspan(kMdBytes, kTreeIdxBytes)) & ((std::uint64_t{1} << (kH - kH / kD)) - 1);
    d.idx_leaf = static_cast<std::uint32_t>(to_int(view.subspan(kMdBytes + kTreeIdxBytes, kLeafIdxBytes)) &
                                            ((1u << (kH / kD)) - 1));
    return d;
}

Bytes domain_prefix(ByteView context) {
    if (context.size() > 255) throw std::invalid_argument("SLH-DSA context longer than 255 bytes");
    Bytes prefix{0x00, static_cast<std::uint8_t>(context.size())};
    append(prefix, context);
    return prefix;
}

Node to_node(ByteView v) {
    Node n;
    std::copy(v.begin(), v.begin() + kN, n.begin());
    return n;
}

}  // namespace

KeyPair keygen_from_seed(ByteView seed) {
    if (seed.size() != kSeedBytes) throw std::invalid_argument("SLH-DSA-SHAKE-192s seed must be 72 bytes");
    Context ctx{to_node(seed.subspan(2 * kN)), to_node(seed.first(kN))};
    Adrs adrs;
    adrs.set_layer(kD - 1);
    const Node root = xmss_tree(ctx, adrs)[kHPrime][0];
    KeyPair kp;
    kp.secret_key.assign(seed.begin(), seed.end());
    kp.secret_key.insert(kp.secret_key.end(), root.begin(), root.end());
    kp.public_key.assign(seed.begin() + 2 * kN, seed.end());
    kp.public_key.insert(kp.public_key.end(), root.begin(), root.end());
    return kp;
}

Bytes sign(ByteView secret_key, ByteView message, ByteView context, ByteView addrnd) {
    if (secret_key.size() != kSecretKeyBytes) throw std::invalid_argument("SLH-DSA secret key has wrong length");
    const ByteView sk_prf = secret_key.subspan(kN, kN);
    const ByteView pk_seed = secret_key.subspan(2 * kN, kN);
    const ByteView pk_root = secret_key.subspan(3 * kN, kN);
    if (addrnd.empty()) addrnd = pk_seed;
    if (addrnd.size() != kN) throw std::invalid_argument("SLH-DSA addrnd must be n bytes");
    const Bytes prefix = domain_prefix(context);

    Context ctx{to_node(pk_seed), to_node(secret_key.first(kN))};
    Bytes sig;
    sig.reserve(kSignatureBytes);
    Node r;
    Shake256{}.absorb(sk_prf).absorb(addrnd).absorb(prefix).absorb(message).squeeze(r.data(), kN);
    sig.insert(sig.end(), r.begin(), r.end());

    const Digest d = hash_message(r, pk_seed, pk_root, prefix, message);
    Adrs adrs;
    adrs.set_tree(d.idx_tree);
    adrs.set_type_and_clear(kForsTree);
    adrs.set_keypair(d.idx_leaf);
    fors_sign(ctx, d.md, adrs, sig);
    const Node pk_fors = fors_pk_from_sig(ctx, sig.data() + kN, d.md, adrs);
    ht_sign(ctx, pk_fors, d.idx_tree, d.idx_leaf, sig);
    return sig;
}

bool verify(ByteView public_key, ByteView message, ByteView signature, ByteView context) {
    if (public_key.size() != kPublicKeyBytes || signature.size() != kSignatureBytes || context.size() > 255)
        return false;
    const Bytes prefix = domain_prefix(context);
    const ByteView pk_seed = public_key.first(kN);
    const ByteView pk_root = public_key.subspan(kN);
    Context ctx{to_node(pk_seed), Node{}};

    const Digest d = hash_message(signature.first(kN), pk_seed, pk_root, prefix, message);
    Adrs adrs;
    adrs.set_tree(d.idx_tree);
    adrs.set_type_and_clear(kForsTree);
    adrs.set_keypair(d.idx_leaf);
    constexpr std::size_t kForsBytes = kK * (kA + 1) * kN;
    const Node pk_fors = fors_pk_from_sig(ctx, signature.data() + kN, d.md, adrs);
    return ht_verify(ctx, pk_fors, signature.data() + kN + kForsBytes, d.idx_tree, d.idx_leaf, to_node(pk_root));
}

}  // namespace pqchain::crypto::slhdsa192s
