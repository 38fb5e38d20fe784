#include "pqchain/pki.hpp"

#include <chrono>
#include <fstream>
#include <iterator>

#include "pqchain/crypto/classic.hpp"
#include "pqchain/crypto/keccak.hpp"
#include "pqchain/crypto/mldsa65.hpp"
#include "pqchain/crypto/rng.hpp"
#include "pqchain/crypto/slhdsa192s.hpp"
#include "pqchain/errors.hpp"

namespace pqchain::pki {
namespace {

namespace mldsa = crypto::mldsa65;
namespace slh = crypto::slhdsa192s;

enum Tag : std::uint8_t {
    kTagVersion = 0x01,
    kTagSerial = 0x02,
    kTagSubject = 0x03,
    kTagIssuer = 0x04,
    kTagSigAlg = 0x05,
    kTagPkAlg = 0x06,
    kTagPublicKey = 0x07,
    kTagNotBefore = 0x08,
    kTagNotAfter = 0x09,
    kTagIsCa = 0x0A,
    kTagTbs = 0x20,
    kTagSignature = 0x21,
};

void put_tlv(Bytes& out, std::uint8_t tag, ByteView value) {
    if (value.size() > UINT32_MAX) throw std::length_error("TLV field too large");
    put_u8(out, tag);
    put_u32(out, static_cast<std::uint32_t>(value.size()));
    append(out, value);
}

template <typename Int>
Bytes int_bytes(Int v) {
    Bytes b;
    if constexpr (sizeof(Int) == 1) put_u8(b, v);
    if constexpr (sizeof(Int) == 2) put_u16(b, v);
    if constexpr (sizeof(Int) == 8) put_u64(b, v);
    return b;
}

ByteView take_tlv(Reader& in, std::uint8_t tag) {
    if (in.u8() != tag) throw DecodeError("unexpected certificate field tag");
    return in.take(in.u32());
}

ByteView take_fixed(Reader& in, std::uint8_t tag, std::size_t len) {
    ByteView v = take_tlv(in, tag);
    if (v.size() != len) throw DecodeError("certificate field has wrong length");
    return v;
}

std::uint64_t be(ByteView v) {
    std::uint64_t r = 0;
    for (auto b : v) r = (r << 8) | b;
    return r;
}

Bytes tbs_digest(const TbsFields& tbs) { return crypto::sha256(encode_tbs(tbs)); }

SigFamily family_of(std::uint16_t alg_id) {
    const auto f = family_from_algorithm_id(alg_id);
    if (!f) throw DecodeError("unknown algorithm identifier");
    return *f;
}

Bytes position_seed(ByteView seed, std::string_view scenario_id, std::string_view position, SigFamily f) {
    crypto::Shake256 xof;
    xof.absorb(as_bytes("pqchainlab-pki")).absorb(seed).absorb_byte(0).absorb(as_bytes(scenario_id)).absorb_byte(0);
    xof.absorb(as_bytes(position));
    return xof.squeeze(seed_size(f));
}

Bytes read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    return Bytes(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& p, ByteView data) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw std::runtime_error("cannot write " + p.string());
}

}  // namespace

std::size_t public_key_size(SigFamily f) {
    return f == SigFamily::ML_DSA_65 ? mldsa::kPublicKeyBytes : slh::kPublicKeyBytes;
}
std::size_t secret_key_size(SigFamily f) {
    return f == SigFamily::ML_DSA_65 ? mldsa::kSecretKeyBytes : slh::kSecretKeyBytes;
}
std::size_t signature_size(SigFamily f) {
    return f == SigFamily::ML_DSA_65 ? mldsa::kSignatureBytes : slh::kSignatureBytes;
}
std::size_t seed_size(SigFamily f) { return f == SigFamily::ML_DSA_65 ? mldsa::kSeedBytes : slh::kSeedBytes; }

KeyPair generate_keypair(SigFamily alg, std::optional<ByteView> seed) {
    crypto::check_fault_injection();
    Bytes fresh;
    if (!seed) {
        fresh = crypto::OsRng{}.bytes(seed_size(alg));
        seed = ByteView(fresh);
    }
    if (seed->size() != seed_size(alg)) throw std::invalid_argument("key seed has wrong length for the algorithm");
    if (alg == SigFamily::ML_DSA_65) {
        auto kp = mldsa::keygen_from_seed(*seed);
        return make_keypair(alg, std::move(kp.public_key), std::move(kp.secret_key));
    }
    auto kp = slh::keygen_from_seed(*seed);
    return make_keypair(alg, std::move(kp.public_key), std::move(kp.secret_key));
}

KeyPair make_keypair(SigFamily alg, Bytes public_key, Bytes secret_key) {
    if (public_key.size() != public_key_size(alg) || secret_key.size() != secret_key_size(alg))
        throw CryptoError(std::string("key length mismatch for ") + std::string(family_name(alg)));
    return KeyPair{alg, std::move(public_key), std::move(secret_key)};
}

Bytes sign_message(const KeyPair& key, ByteView message) { return Signer(key).sign(message); }

bool verify_message(SigFamily alg, ByteView public_key, ByteView message, ByteView signature) {
    if (alg == SigFamily::ML_DSA_65) return mldsa::verify(public_key, message, signature);
    return slh::verify(public_key, message, signature);
}

struct Signer::Impl {
    std::optional<mldsa::ExpandedSigner> ml;
    Bytes slh_secret;
};

Signer::Signer(const KeyPair& key) : algorithm_(key.algorithm), impl_(std::make_unique<Impl>()) {
    if (algorithm_ == SigFamily::ML_DSA_65)
        impl_->ml.emplace(key.secret_key);
    else
        impl_->slh_secret = key.secret_key;
}

Signer::~Signer() = default;
Signer::Signer(Signer&&) noexcept = default;
Signer& Signer::operator=(Signer&&) noexcept = default;

Bytes Signer::sign(ByteView message, crypto::Rng* rng) const {
    if (algorithm_ == SigFamily::ML_DSA_65) {
        const Bytes rnd = rng ? rng->bytes(32) : Bytes{};
        return impl_->ml->sign(message, {}, rnd);
    }
    const Bytes addrnd = rng ? rng->bytes(slh::kN) : Bytes{};
    return slh::sign(impl_->slh_secret, message, {}, addrnd);
}

Bytes encode_tbs(const TbsFields& tbs) {
    Bytes out;
    out.reserve(64 + tbs.subject.size() + tbs.issuer.size() + tbs.public_key.size());
    put_tlv(out, kTagVersion, int_bytes(tbs.version));
    put_tlv(out, kTagSerial, int_bytes(tbs.serial));
    put_tlv(out, kTagSubject, as_bytes(tbs.subject));
    put_tlv(out, kTagIssuer, as_bytes(tbs.issuer));
    put_tlv(out, kTagSigAlg, int_bytes(tbs.sig_alg_id));
    put_tlv(out, kTagPkAlg, int_bytes(tbs.pk_alg_id));
    put_tlv(out, kTagPublicKey, tbs.public_key);
    put_tlv(out, kTagNotBefore, int_bytes(tbs.not_before));
    put_tlv(out, kTagNotAfter, int_bytes(tbs.not_after));
    put_tlv(out, kTagIsCa, int_bytes(static_cast<std::uint8_t>(tbs.is_ca ? 1 : 0)));
    return out;
}

Bytes encode_certificate(const TbsFields& tbs, ByteView signature) {
    Bytes out;
    put_tlv(out, kTagTbs, encode_tbs(tbs));
    put_tlv(out, kTagSignature, signature);
    return out;
}

CertificateRecord decode_certificate(ByteView encoded) {
    Reader outer(encoded);
    Reader in(take_tlv(outer, kTagTbs));
    CertificateRecord c;
    TbsFields& t = c.tbs;
    t.version = take_fixed(in, kTagVersion, 1)[0];
    if (t.version != kCertVersion) throw DecodeError("unsupported certificate version");
    t.serial = be(take_fixed(in, kTagSerial, 8));
    const ByteView subject = take_tlv(in, kTagSubject);
    t.subject.assign(subject.begin(), subject.end());
    const ByteView issuer = take_tlv(in, kTagIssuer);
    t.issuer.assign(issuer.begin(), issuer.end());
    t.sig_alg_id = static_cast<std::uint16_t>(be(take_fixed(in, kTagSigAlg, 2)));
    t.pk_alg_id = static_cast<std::uint16_t>(be(take_fixed(in, kTagPkAlg, 2)));
    const ByteView pk = take_tlv(in, kTagPublicKey);
    t.public_key.assign(pk.begin(), pk.end());
    t.not_before = be(take_fixed(in, kTagNotBefore, 8));
    t.not_after = be(take_fixed(in, kTagNotAfter, 8));
    const std::uint8_t ca = take_fixed(in, kTagIsCa, 1)[0];
    if (ca > 1) throw DecodeError("non-canonical boolean");
    t.is_ca = ca == 1;
    in.expect_end();

    const ByteView sig = take_tlv(outer, kTagSignature);
    c.signature.assign(sig.begin(), sig.end());
    outer.expect_end();

    if (t.public_key.size() != public_key_size(family_of(t.pk_alg_id)))
        throw DecodeError("public key length does not match its algorithm");
    if (c.signature.size() != signature_size(family_of(t.sig_alg_id)))
        throw DecodeError("signature length does not match its algorithm");
    c.encoded.assign(encoded.begin(), encoded.end());
    return c;
}

CertificateRecord issue_certificate(TbsFields tbs, const KeyPair& issuer_key, std::string_view issuer_name) {
    tbs.issuer = std::string(issuer_name);
    if (tbs.sig_alg_id != algorithm_id(issuer_key.algorithm))
        throw std::invalid_argument("sig_alg_id does not match the issuer key");
    CertificateRecord c;
    c.signature = sign_message(issuer_key, tbs_digest(tbs));
    c.encoded = encode_certificate(tbs, c.signature);
    c.tbs = std::move(tbs);
    return c;
}

bool verify_certificate(const CertificateRecord& cert, ByteView issuer_public_key) {
    const auto alg = family_from_algorithm_id(cert.tbs.sig_alg_id);
    if (!alg || issuer_public_key.size() != public_key_size(*alg)) return false;
    return verify_message(*alg, issuer_public_key, tbs_digest(cert.tbs), cert.signature);
}

std::uint64_t utc_day_start_now() {
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(
                          std::chrono::system_clock::now().time_since_epoch())
                          .count();
    return static_cast<std::uint64_t>(secs) / kSecondsPerDay * kSecondsPerDay;
}

HierarchyMaterial build_hierarchy(const Scenario& scenario, ByteView seed, std::uint64_t issued_at) {
    const Placement& p = scenario.placement;
    auto make_tbs = [&](std::uint64_t serial, std::string_view subject, const KeyPair& subject_key,
                        SigFamily issuer_family, bool is_ca) {
        TbsFields t;
        t.serial = serial;
        t.subject = std::string(subject);
        t.sig_alg_id = algorithm_id(issuer_family);
        t.pk_alg_id = algorithm_id(subject_key.algorithm);
        t.public_key = subject_key.public_key;
        t.not_before = issued_at - kSecondsPerDay;
        t.not_after = issued_at + 365 * kSecondsPerDay;
        t.is_ca = is_ca;
        return t;
    };

    HierarchyMaterial h;
    KeyPair root_key = generate_keypair(p.root, position_seed(seed, scenario.scenario_id, "root", p.root));
    h.root.cert = issue_certificate(make_tbs(1, kRootSubject, root_key, p.root, true), root_key, kRootSubject);
    h.root.key = std::move(root_key);

    const KeyPair* leaf_issuer = &h.root.key;
    std::string_view leaf_issuer_name = kRootSubject;
    if (p.intermediate) {
        KeyPair key = generate_keypair(*p.intermediate,
                                       position_seed(seed, scenario.scenario_id, "int", *p.intermediate));
        Issued inter;
        inter.cert = issue_certificate(make_tbs(2, kIntermediateSubject, key, p.root, true), h.root.key, kRootSubject);
        inter.key = std::move(key);
        h.intermediate = std::move(inter);
        leaf_issuer = &h.intermediate->key;
        leaf_issuer_name = kIntermediateSubject;
    }

    KeyPair leaf_key = generate_keypair(p.leaf, position_seed(seed, scenario.scenario_id, "leaf", p.leaf));
    h.leaf.cert = issue_certificate(make_tbs(3, scenario.scenario_id, leaf_key, leaf_issuer->algorithm, false),
                                    *leaf_issuer, leaf_issuer_name);
    h.leaf.key = std::move(leaf_key);
    h.trust_store.push_back(h.root.cert);
    return h;
}

std::string_view policy_name(ServedChainPolicy p) {
    switch (p) {
        case ServedChainPolicy::MIRROR_PAPER: return "mirror";
        case ServedChainPolicy::FULL_CHAIN: return "full";
        case ServedChainPolicy::LEAF_ONLY: return "leaf";
    }
    return "";
}

std::optional<ServedChainPolicy> policy_from_name(std::string_view name) {
    for (auto p : {ServedChainPolicy::MIRROR_PAPER, ServedChainPolicy::FULL_CHAIN, ServedChainPolicy::LEAF_ONLY})
        if (policy_name(p) == name) return p;
    return std::nullopt;
}

std::vector<CertificateRecord> served_chain(const HierarchyMaterial& h, ServedChainPolicy policy) {
    std::vector<CertificateRecord> out{h.leaf.cert};
    switch (policy) {
        case ServedChainPolicy::LEAF_ONLY:
            break;
        case ServedChainPolicy::MIRROR_PAPER:
            out.push_back(h.intermediate ? h.intermediate->cert : h.root.cert);
            break;
        case ServedChainPolicy::FULL_CHAIN:
            if (h.intermediate) out.push_back(h.intermediate->cert);
            out.push_back(h.root.cert);
            break;
    }
    return out;
}

std::vector<CertificateRecord> client_trust_store(const HierarchyMaterial& h, ServedChainPolicy policy) {
    std::vector<CertificateRecord> out = h.trust_store;
    if (policy == ServedChainPolicy::LEAF_ONLY && h.intermediate) out.push_back(h.intermediate->cert);
    return out;
}

std::string describe(const PathError& e) {
    switch (e.kind) {
        case PathErrorKind::BadSignature: return "bad signature at position " + std::to_string(e.position);
        case PathErrorKind::UnknownAnchor: return "no trust anchor for the top of the chain";
        case PathErrorKind::Expired: return "certificate expired at position " + std::to_string(e.position);
        case PathErrorKind::NotYetValid: return "certificate not yet valid at position " + std::to_string(e.position);
        case PathErrorKind::NotCA: return "non-CA issuer at position " + std::to_string(e.position);
    }
    return "path error";
}

std::optional<PathError> validate_chain(const std::vector<CertificateRecord>& served,
                                        const std::vector<CertificateRecord>& trust_store, std::uint64_t now) {
    if (served.empty()) return PathError{PathErrorKind::UnknownAnchor, 0};
    const std::size_t top = served.size() - 1;

    const CertificateRecord* anchor = nullptr;
    for (const auto& t : trust_store)
        if (t.tbs.subject == served[top].tbs.issuer) anchor = &t;
    if (!anchor) return PathError{PathErrorKind::UnknownAnchor, top};

    for (std::size_t i = 0; i < top; ++i) {
        if (served[i].tbs.issuer != served[i + 1].tbs.subject ||
            !verify_certificate(served[i], served[i + 1].tbs.public_key))
            return PathError{PathErrorKind::BadSignature, i};
    }
    if (!verify_certificate(served[top], anchor->tbs.public_key)) return PathError{PathErrorKind::BadSignature, top};

    for (std::size_t i = 0; i <= top; ++i) {
        if (now < served[i].tbs.not_before) return PathError{PathErrorKind::NotYetValid, i};
        if (now > served[i].tbs.not_after) return PathError{PathErrorKind::Expired, i};
    }
    for (std::size_t i = 1; i <= top; ++i)
        if (!served[i].tbs.is_ca) return PathError{PathErrorKind::NotCA, i};
    if (!anchor->tbs.is_ca) return PathError{PathErrorKind::NotCA, top + 1};
    return std::nullopt;
}

void write_hierarchy(const HierarchyMaterial& h, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto write_pair = [&](const Issued& issued, std::string_view stem) {
        write_file(dir / (std::string(stem) + ".cert"), issued.cert.encoded);
        Bytes key;
        put_u16(key, algorithm_id(issued.key.algorithm));
        append(key, issued.key.secret_key);
        write_file(dir / (std::string(stem) + ".key"), key);
    };
    write_pair(h.root, "root");
    if (h.intermediate) {
        write_pair(*h.intermediate, "int");
    } else {
        std::filesystem::remove(dir / "int.cert");
        std::filesystem::remove(dir / "int.key");
    }
    write_pair(h.leaf, "leaf");
}

HierarchyMaterial read_hierarchy(const std::filesystem::path& dir) {
    auto read_pair = [&](std::string_view stem) {
        Issued issued;
        issued.cert = decode_certificate(read_file(dir / (std::string(stem) + ".cert")));
        const Bytes key = read_file(dir / (std::string(stem) + ".key"));
        Reader in(key);
        const SigFamily alg = family_of(in.u16());
        if (alg != family_of(issued.cert.tbs.pk_alg_id)) throw DecodeError("key file algorithm does not match cert");
        const ByteView sk = in.take(in.remaining());
        issued.key = make_keypair(alg, issued.cert.tbs.public_key, Bytes(sk.begin(), sk.end()));
        return issued;
    };
    HierarchyMaterial h;
    h.root = read_pair("root");
    if (std::filesystem::exists(dir / "int.cert")) h.intermediate = read_pair("int");
    h.leaf = read_pair("leaf");
    h.trust_store.push_back(h.root.cert);
    return h;
}

}  // namespace pqchain::pki
