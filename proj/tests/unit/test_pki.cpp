#include <gtest/gtest.h>

#include "pqchain/errors.hpp"
#include "pqchain/pki.hpp"
#include "support.hpp"

using namespace pqchain;
using pki::PathErrorKind;
using pki::ServedChainPolicy;

namespace {

constexpr std::uint64_t kIssuedAt = 1767225600;  // 2026-01-01
constexpr std::uint64_t kNow = kIssuedAt + 3600;
const Bytes kSeed(32, 0x11);

const pki::HierarchyMaterial& ml3() {
    static const auto h =
        pki::build_hierarchy(*find_scenario("x25519mlkem768__ml_root__ml_int__ml_leaf"), kSeed, kIssuedAt);
    return h;
}

const pki::HierarchyMaterial& ml2() {
    static const auto h = pki::build_hierarchy(*find_scenario("x25519mlkem768__ml_root__ml_leaf"), kSeed, kIssuedAt);
    return h;
}

}  // namespace

TEST(Pki, KeySizesPerFamily) {
    EXPECT_EQ(pki::public_key_size(SigFamily::ML_DSA_65), 1952u);
    EXPECT_EQ(pki::signature_size(SigFamily::ML_DSA_65), 3309u);
    EXPECT_EQ(pki::public_key_size(SigFamily::SLH_DSA_SHAKE_192S), 48u);
    EXPECT_EQ(pki::signature_size(SigFamily::SLH_DSA_SHAKE_192S), 16224u);
}

TEST(Pki, CertificateEncodingRoundTrips) {
    const auto& c = ml3().leaf.cert;
    const auto back = pki::decode_certificate(c.encoded);
    EXPECT_EQ(back.tbs, c.tbs);
    EXPECT_EQ(back.signature, c.signature);
    EXPECT_EQ(pki::encode_certificate(back.tbs, back.signature), c.encoded);
}

TEST(Pki, DecodeRejectsTruncationAndTrailingBytes) {
    const Bytes& enc = ml3().root.cert.encoded;
    EXPECT_THROW(pki::decode_certificate(ByteView(enc).first(enc.size() - 1)), DecodeError);
    Bytes longer = enc;
    longer.push_back(0);
    EXPECT_THROW(pki::decode_certificate(longer), DecodeError);
}

TEST(Pki, HierarchyShape) {
    const auto& h = ml3();
    EXPECT_EQ(h.depth(), 3);
    EXPECT_EQ(h.root.cert.tbs.subject, pki::kRootSubject);
    EXPECT_EQ(h.intermediate->cert.tbs.issuer, pki::kRootSubject);
    EXPECT_EQ(h.leaf.cert.tbs.issuer, pki::kIntermediateSubject);
    EXPECT_EQ(h.leaf.cert.tbs.subject, "x25519mlkem768__ml_root__ml_int__ml_leaf");
    EXPECT_TRUE(h.root.cert.tbs.is_ca);
    EXPECT_FALSE(h.leaf.cert.tbs.is_ca);
    EXPECT_EQ(h.trust_store.size(), 1u);
    EXPECT_EQ(ml2().depth(), 2);
}

TEST(Pki, ServedChainPolicies) {
    EXPECT_EQ(pki::served_chain(ml3(), ServedChainPolicy::MIRROR_PAPER).size(), 2u);
    EXPECT_EQ(pki::served_chain(ml3(), ServedChainPolicy::FULL_CHAIN).size(), 3u);
    EXPECT_EQ(pki::served_chain(ml3(), ServedChainPolicy::LEAF_ONLY).size(), 1u);
    EXPECT_EQ(pki::served_chain(ml2(), ServedChainPolicy::MIRROR_PAPER).size(), 2u);
    EXPECT_EQ(pki::served_chain(ml2(), ServedChainPolicy::FULL_CHAIN).size(), 2u);
    EXPECT_EQ(pki::client_trust_store(ml3(), ServedChainPolicy::LEAF_ONLY).size(), 2u);
    EXPECT_EQ(pki::client_trust_store(ml2(), ServedChainPolicy::LEAF_ONLY).size(), 1u);
}

TEST(Pki, ValidChainsUnderEveryPolicy) {
    for (const auto* h : {&ml2(), &ml3()})
        for (auto p : {ServedChainPolicy::MIRROR_PAPER, ServedChainPolicy::FULL_CHAIN, ServedChainPolicy::LEAF_ONLY})
            EXPECT_FALSE(pki::validate_chain(pki::served_chain(*h, p), pki::client_trust_store(*h, p), kNow))
                << h->depth() << " " << pki::policy_name(p);
}

TEST(Pki, SameSeedGivesIdenticalBytes) {
    const auto again =
        pki::build_hierarchy(*find_scenario("x25519mlkem768__ml_root__ml_int__ml_leaf"), kSeed, kIssuedAt);
    EXPECT_EQ(again.root.cert.encoded, ml3().root.cert.encoded);
    EXPECT_EQ(again.leaf.cert.encoded, ml3().leaf.cert.encoded);
    EXPECT_EQ(again.leaf.key.secret_key, ml3().leaf.key.secret_key);
    const auto other =
        pki::build_hierarchy(*find_scenario("x25519mlkem768__ml_root__ml_int__ml_leaf"), Bytes(32, 0x12), kIssuedAt);
    EXPECT_NE(other.leaf.cert.encoded, ml3().leaf.cert.encoded);
}

TEST(Pki, ValidityWindow) {
    const auto served = pki::served_chain(ml3(), ServedChainPolicy::MIRROR_PAPER);
    const auto& ts = ml3().trust_store;
    const auto& tbs = ml3().leaf.cert.tbs;
    EXPECT_FALSE(pki::validate_chain(served, ts, tbs.not_before));
    EXPECT_FALSE(pki::validate_chain(served, ts, tbs.not_after));
    EXPECT_EQ(pki::validate_chain(served, ts, tbs.not_before - 1)->kind, PathErrorKind::NotYetValid);
    EXPECT_EQ(pki::validate_chain(served, ts, tbs.not_after + 1)->kind, PathErrorKind::Expired);
}

TEST(Pki, UnknownAnchor) {
    const auto served = pki::served_chain(ml3(), ServedChainPolicy::MIRROR_PAPER);
    EXPECT_EQ(pki::validate_chain(served, {}, kNow)->kind, PathErrorKind::UnknownAnchor);
    EXPECT_EQ(pki::validate_chain({}, ml3().trust_store, kNow)->kind, PathErrorKind::UnknownAnchor);
    // Leaf-only at depth 3 needs the intermediate preloaded.
    EXPECT_EQ(pki::validate_chain(pki::served_chain(ml3(), ServedChainPolicy::LEAF_ONLY), ml3().trust_store, kNow)
                  ->kind,
              PathErrorKind::UnknownAnchor);
}

TEST(Pki, AnchorFromAnotherHierarchyFailsSignature) {
    const auto served = pki::served_chain(ml3(), ServedChainPolicy::MIRROR_PAPER);
    EXPECT_EQ(pki::validate_chain(served, ml2().trust_store, kNow)->kind, PathErrorKind::BadSignature);
}

TEST(Pki, EverySingleByteSignatureTamperIsCaught) {
    const auto served = pki::served_chain(ml3(), ServedChainPolicy::FULL_CHAIN);
    for (std::size_t pos = 0; pos < served.size(); ++pos) {
        for (std::size_t off : {std::size_t{0}, std::size_t{100}, std::size_t{3308}}) {
            auto tampered = served;
            tampered[pos].signature[off] ^= 0x80;
            const auto err = pki::validate_chain(tampered, ml3().trust_store, kNow);
            ASSERT_TRUE(err) << pos << "/" << off;
            EXPECT_EQ(err->kind, PathErrorKind::BadSignature);
            EXPECT_EQ(err->position, pos);
        }
    }
}

TEST(Pki, TamperedServedRootIsRejected) {
    auto served = pki::served_chain(ml2(), ServedChainPolicy::MIRROR_PAPER);
    ASSERT_EQ(served.size(), 2u);
    served[1].signature[7] ^= 1;
    const auto err = pki::validate_chain(served, ml2().trust_store, kNow);
    ASSERT_TRUE(err);
    EXPECT_EQ(err->kind, PathErrorKind::BadSignature);
}

TEST(Pki, NonCaIntermediateIsRejected) {
    const auto& h = ml3();
    pki::TbsFields t = h.intermediate->cert.tbs;
    t.is_ca = false;
    const auto fake_int = pki::issue_certificate(t, h.root.key, pki::kRootSubject);
    const auto err = pki::validate_chain({h.leaf.cert, fake_int}, h.trust_store, kNow);
    ASSERT_TRUE(err);
    EXPECT_EQ(err->kind, PathErrorKind::NotCA);
    EXPECT_EQ(err->position, 1u);
}

TEST(Pki, WriteReadHierarchyRoundTrip) {
    testsupport::TempDir dir("pki");
    pki::write_hierarchy(ml3(), dir.path / "a");
    pki::write_hierarchy(ml2(), dir.path / "b");
    EXPECT_TRUE(std::filesystem::exists(dir.path / "a" / "int.cert"));
    EXPECT_FALSE(std::filesystem::exists(dir.path / "b" / "int.cert"));
    EXPECT_FALSE(std::filesystem::exists(dir.path / "b" / "int.key"));
    const auto back = pki::read_hierarchy(dir.path / "a");
    EXPECT_EQ(back.leaf.cert, ml3().leaf.cert);
    EXPECT_EQ(back.leaf.key.secret_key, ml3().leaf.key.secret_key);
    EXPECT_EQ(back.intermediate->cert, ml3().intermediate->cert);
    EXPECT_EQ(back.trust_store.size(), 1u);
}

TEST(Pki, SignerMatchesOneShotSigning) {
    const auto& key = ml3().leaf.key;
    const pki::Signer s(key);
    const ByteView msg = as_bytes("transcript");
    EXPECT_EQ(s.sign(msg), pki::sign_message(key, msg));
    EXPECT_TRUE(pki::verify_message(key.algorithm, key.public_key, msg, s.sign(msg)));
}

TEST(Pki, MakeKeypairChecksLengths) {
    const auto& key = ml3().leaf.key;
    EXPECT_THROW(pki::make_keypair(SigFamily::ML_DSA_65, Bytes(10), key.secret_key), std::exception);
    EXPECT_THROW(pki::make_keypair(SigFamily::SLH_DSA_SHAKE_192S, key.public_key, key.secret_key), std::exception);
}

// Every provisioned scenario passes full-chain validation. Slow: SLH issuers.
TEST(PkiSlow, AllScenariosValidateUnderFullChain) {
    for (const auto& s : enumerate_matrix()) {
        const auto h = pki::build_hierarchy(s, kSeed, kIssuedAt);
        EXPECT_EQ(h.depth(), s.depth());
        EXPECT_EQ(h.leaf.key.algorithm, s.placement.leaf);
        EXPECT_FALSE(pki::validate_chain(pki::served_chain(h, ServedChainPolicy::FULL_CHAIN), h.trust_store, kNow))
            << s.scenario_id;
    }
}
