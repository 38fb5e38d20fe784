#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pqchain/bytes.hpp"
#include "pqchain/scenario.hpp"

namespace pqchain::crypto {
class Rng;
}

namespace pqchain::pki {

struct KeyPair {
    SigFamily algorithm;
    Bytes public_key;
    Bytes secret_key;
};

std::size_t public_key_size(SigFamily f);
std::size_t secret_key_size(SigFamily f);
std::size_t signature_size(SigFamily f);
std::size_t seed_size(SigFamily f);

/// Without a seed, key material comes from the OS RNG.
KeyPair generate_keypair(SigFamily alg, std::optional<ByteView> seed = std::nullopt);

/// Rebuilds a KeyPair after checking both lengths against the parameter set.
KeyPair make_keypair(SigFamily alg, Bytes public_key, Bytes secret_key);

Bytes sign_message(const KeyPair& key, ByteView message);
bool verify_message(SigFamily alg, ByteView public_key, ByteView message, ByteView signature);

/// Signing handle for repeated use with one key; ML-DSA keys are expanded once.
class Signer {
public:
    explicit Signer(const KeyPair& key);
    ~Signer();
    Signer(Signer&&) noexcept;
    Signer& operator=(Signer&&) noexcept;

    SigFamily algorithm() const { return algorithm_; }
    /// `rng` adds hedging randomness; null signs deterministically.
    Bytes sign(ByteView message, crypto::Rng* rng = nullptr) const;

private:
    struct Impl;
    SigFamily algorithm_;
    std::unique_ptr<Impl> impl_;
};

inline constexpr std::uint8_t kCertVersion = 1;
inline constexpr std::uint64_t kSecondsPerDay = 86400;

struct TbsFields {
    std::uint8_t version = kCertVersion;
    std::uint64_t serial = 0;
    std::string subject;
    std::string issuer;
    std::uint16_t sig_alg_id = 0;
    std::uint16_t pk_alg_id = 0;
    Bytes public_key;
    std::uint64_t not_before = 0;
    std::uint64_t not_after = 0;
    bool is_ca = false;

    bool operator==(const TbsFields&) const = default;
};

struct CertificateRecord {
    TbsFields tbs;
    Bytes signature;
    Bytes encoded;

    bool operator==(const CertificateRecord& o) const { return encoded == o.encoded; }
};

Bytes encode_tbs(const TbsFields& tbs);
Bytes encode_certificate(const TbsFields& tbs, ByteView signature);

/// Strict decoder: rejects unknown tags, reordered fields, bad lengths and trailing bytes.
CertificateRecord decode_certificate(ByteView encoded);

/// Signs SHA-256(encode_tbs(tbs)); tbs.issuer is overwritten with issuer_name.
CertificateRecord issue_certificate(TbsFields tbs, const KeyPair& issuer_key, std::string_view issuer_name);

bool verify_certificate(const CertificateRecord& cert, ByteView issuer_public_key);

struct Issued {
    CertificateRecord cert;
    KeyPair key;
};

struct HierarchyMaterial {
    Issued root;
    std::optional<Issued> intermediate;
    Issued leaf;
    std::vector<CertificateRecord> trust_store;

    int depth() const { return intermediate ? 3 : 2; }
};

inline constexpr std::string_view kRootSubject = "Root CA";
inline constexpr std::string_view kIntermediateSubject = "Intermediate CA";

/// Start of the current UTC day, the default issuance time.
std::uint64_t utc_day_start_now();

/// Deterministic in (scenario, seed, issued_at).
HierarchyMaterial build_hierarchy(const Scenario& scenario, ByteView seed, std::uint64_t issued_at);

enum class ServedChainPolicy { MIRROR_PAPER, FULL_CHAIN, LEAF_ONLY };

std::string_view policy_name(ServedChainPolicy p);  // "mirror" / "full" / "leaf"
std::optional<ServedChainPolicy> policy_from_name(std::string_view name);

std::vector<CertificateRecord> served_chain(const HierarchyMaterial& h, ServedChainPolicy policy);

/// Trust configuration a client needs to validate the given serving. It is the
/// root, plus the preloaded intermediate when LEAF_ONLY serves a depth-3 leaf.
std::vector<CertificateRecord> client_trust_store(const HierarchyMaterial& h, ServedChainPolicy policy);

enum class PathErrorKind { BadSignature, UnknownAnchor, Expired, NotYetValid, NotCA };

struct PathError {
    PathErrorKind kind;
    std::size_t position = 0;  // index into the served list

    bool operator==(const PathError&) const = default;
};

std::string describe(const PathError& e);

/// nullopt means the path is valid. A served certificate that is itself a
/// trust anchor still has its self-signature checked.
std::optional<PathError> validate_chain(const std::vector<CertificateRecord>& served,
                                        const std::vector<CertificateRecord>& trust_store, std::uint64_t now);

/// pki/<scenario_id>/{root,int,leaf}.{cert,key}
void write_hierarchy(const HierarchyMaterial& h, const std::filesystem::path& scenario_dir);
HierarchyMaterial read_hierarchy(const std::filesystem::path& scenario_dir);

}  // namespace pqchain::pki
