#include "pqchain/handshake/protocol.hpp"

#include <set>

#include "pqchain/crypto/classic.hpp"
#include "pqchain/crypto/rng.hpp"

namespace pqchain::handshake {
namespace {

namespace kem = crypto::mlkem768;

constexpr std::string_view kCvContext = "pqchainlab-cv";
constexpr std::string_view kMasterLabel = "ms";
constexpr std::string_view kFinishedLabel = "pqchainlab finished";

bool uses_x25519(KexMode k) { return k != KexMode::PURE_PQC; }
bool uses_mlkem(KexMode k) { return k != KexMode::CLASSICAL; }

std::size_t client_share_size(KexMode k) {
    return (uses_x25519(k) ? crypto::kX25519Bytes : 0) + (uses_mlkem(k) ? kem::kEncapsKeyBytes : 0);
}

std::size_t server_share_size(KexMode k) {
    return (uses_x25519(k) ? crypto::kX25519Bytes : 0) + (uses_mlkem(k) ? kem::kCiphertextBytes : 0);
}

SessionSecrets derive_secrets(std::optional<Bytes> classical, std::optional<Bytes> kem_ss, ByteView transcript_hash) {
    SessionSecrets s;
    Bytes input(kMasterLabel.begin(), kMasterLabel.end());
    if (classical) append(input, *classical);
    if (kem_ss) append(input, *kem_ss);
    append(input, transcript_hash);
    s.master_secret = crypto::sha256(input);
    s.finished_key = crypto::hmac_sha256(s.master_secret, as_bytes(kFinishedLabel));
    s.classical_ss = std::move(classical);
    s.kem_ss = std::move(kem_ss);
    return s;
}

Bytes cert_verify_digest(ByteView transcript_hash) {
    Bytes input(kCvContext.begin(), kCvContext.end());
    append(input, transcript_hash);
    return crypto::sha256(input);
}

WireMessage parse_or_malformed(ByteView framed, MsgType expected) {
    try {
        return parse_frame(framed, expected);
    } catch (const DecodeError& e) {
        throw HandshakeError(HandshakeErrorKind::Malformed, e.what());
    }
}

}  // namespace

std::uint16_t group_id(KexMode k) {
    switch (k) {
        case KexMode::CLASSICAL: return kGroupX25519;
        case KexMode::HYBRID: return kGroupX25519MlKem768;
        case KexMode::PURE_PQC: return kGroupMlKem768;
    }
    return 0;
}

std::optional<KexMode> kex_from_group_id(std::uint16_t id) {
    for (KexMode k : {KexMode::CLASSICAL, KexMode::HYBRID, KexMode::PURE_PQC})
        if (group_id(k) == id) return k;
    return std::nullopt;
}

Bytes frame(MsgType type, ByteView body) {
    if (body.size() > kMaxBodyBytes) throw std::length_error("handshake message too large");
    Bytes out;
    out.reserve(kFrameHeaderBytes + body.size());
    put_u8(out, static_cast<std::uint8_t>(type));
    put_u32(out, static_cast<std::uint32_t>(body.size()));
    append(out, body);
    return out;
}

WireMessage parse_frame(ByteView framed, MsgType expected) {
    Reader in(framed);
    const auto type = static_cast<MsgType>(in.u8());
    if (type != expected) throw DecodeError("unexpected handshake message type");
    const std::uint32_t len = in.u32();
    if (len > kMaxBodyBytes) throw DecodeError("handshake message too large");
    const ByteView body = in.take(len);
    in.expect_end();
    return WireMessage{type, Bytes(body.begin(), body.end())};
}

std::string_view error_kind_name(HandshakeErrorKind k) {
    switch (k) {
        case HandshakeErrorKind::PathError: return "PathError";
        case HandshakeErrorKind::BadCertVerify: return "BadCertVerify";
        case HandshakeErrorKind::BadFinished: return "BadFinished";
        case HandshakeErrorKind::Malformed: return "Malformed";
        case HandshakeErrorKind::UnsupportedGroup: return "UnsupportedGroup";
    }
    return "";
}

ClientHelloResult client_begin(KexMode kex, crypto::Rng& rng) {
    ClientHelloResult r;
    r.state.kex = kex;
    Bytes body = rng.bytes(kRandomBytes);
    put_u16(body, group_id(kex));
    if (uses_x25519(kex)) {
        r.state.x25519_private = rng.bytes(crypto::kX25519Bytes);
        append(body, crypto::x25519_from_private(r.state.x25519_private).public_key);
    }
    if (uses_mlkem(kex)) {
        auto kp = kem::keygen_from_seed(rng.bytes(kem::kSeedBytes));
        append(body, kp.encaps_key);
        r.state.mlkem_decaps_key = std::move(kp.decaps_key);
    }
    r.client_hello = frame(MsgType::ClientHello, body);
    r.state.client_hello = r.client_hello;
    return r;
}

Bytes encode_certificate_body(const std::vector<pki::CertificateRecord>& chain) {
    if (chain.size() > 255) throw std::length_error("too many certificates");
    Bytes out;
    put_u8(out, static_cast<std::uint8_t>(chain.size()));
    for (const auto& c : chain) {
        put_u32(out, static_cast<std::uint32_t>(c.encoded.size()));
        append(out, c.encoded);
    }
    return out;
}

std::vector<pki::CertificateRecord> decode_certificate_body(ByteView body) {
    Reader in(body);
    const std::uint8_t count = in.u8();
    if (count == 0) throw DecodeError("empty certificate list");
    std::vector<pki::CertificateRecord> chain;
    for (int i = 0; i < count; ++i) chain.push_back(pki::decode_certificate(in.take(in.u32())));
    in.expect_end();
    return chain;
}

ServerIdentity::ServerIdentity(std::vector<pki::CertificateRecord> chain, const pki::KeyPair& leaf_key)
    : served(std::move(chain)), certificate_body(encode_certificate_body(served)), signer(leaf_key) {}

Bytes ServerFlight::concatenated() const {
    Bytes out;
    out.reserve(server_hello.size() + certificate.size() + certificate_verify.size() + server_finished.size());
    append(out, server_hello);
    append(out, certificate);
    append(out, certificate_verify);
    append(out, server_finished);
    return out;
}

ServerFlight server_respond(ByteView client_hello, const ServerIdentity& identity, crypto::Rng& rng,
                            crypto::Rng* hedge) {
    const WireMessage ch = parse_or_malformed(client_hello, MsgType::ClientHello);
    Reader in(ch.body);
    KexMode kex;
    ByteView x_share, kem_share;
    try {
        in.take(kRandomBytes);
        const auto k = kex_from_group_id(in.u16());
        if (!k) throw HandshakeError(HandshakeErrorKind::UnsupportedGroup, "unsupported key-exchange group");
        kex = *k;
        if (in.remaining() != client_share_size(kex)) throw DecodeError("key share has wrong length");
        if (uses_x25519(kex)) x_share = in.take(crypto::kX25519Bytes);
        if (uses_mlkem(kex)) kem_share = in.take(kem::kEncapsKeyBytes);
    } catch (const DecodeError& e) {
        throw HandshakeError(HandshakeErrorKind::Malformed, std::string("ClientHello: ") + e.what());
    }

    Bytes sh_body = rng.bytes(kRandomBytes);
    std::optional<Bytes> classical, kem_ss;
    try {
        if (uses_x25519(kex)) {
            const auto kp = crypto::x25519_from_private(rng.bytes(crypto::kX25519Bytes));
            classical = crypto::x25519_shared(kp.private_key, x_share);
            append(sh_body, kp.public_key);
        }
        if (uses_mlkem(kex)) {
            auto enc = kem::encapsulate_with(kem_share, rng.bytes(32));
            append(sh_body, enc.ciphertext);
            kem_ss = std::move(enc.shared_secret);
        }
    } catch (const std::invalid_argument& e) {
        throw HandshakeError(HandshakeErrorKind::Malformed, std::string("ClientHello key share: ") + e.what());
    } catch (const CryptoError& e) {
        throw HandshakeError(HandshakeErrorKind::Malformed, std::string("ClientHello key share: ") + e.what());
    }

    ServerFlight f;
    crypto::Sha256 transcript;
    transcript.update(client_hello);
    f.server_hello = frame(MsgType::ServerHello, sh_body);
    transcript.update(f.server_hello);
    f.secrets = derive_secrets(std::move(classical), std::move(kem_ss), transcript.peek());

    f.certificate = frame(MsgType::Certificate, identity.certificate_body);
    transcript.update(f.certificate);
    f.certificate_verify =
        frame(MsgType::CertificateVerify, identity.signer.sign(cert_verify_digest(transcript.peek()), hedge));
    transcript.update(f.certificate_verify);
    f.server_finished = frame(MsgType::ServerFinished, crypto::hmac_sha256(f.secrets.finished_key, transcript.peek()));
    transcript.update(f.server_finished);
    f.expected_client_finished =
        frame(MsgType::ClientFinished, crypto::hmac_sha256(f.secrets.finished_key, transcript.peek()));
    return f;
}

void server_finish(const ServerFlight& flight, ByteView client_finished) {
    if (!crypto::constant_time_equal(flight.expected_client_finished, client_finished))
        throw HandshakeError(HandshakeErrorKind::BadFinished, "client Finished does not verify");
}

ServerMessages split_server_flight(ByteView stream) {
    ServerMessages m;
    Reader in(stream);
    auto next = [&](MsgType type) {
        const std::size_t start = in.position();
        try {
            if (in.u8() != static_cast<std::uint8_t>(type)) throw DecodeError("unexpected message order");
            in.take(in.u32());
        } catch (const DecodeError& e) {
            throw HandshakeError(HandshakeErrorKind::Malformed, e.what());
        }
        const ByteView f = stream.subspan(start, in.position() - start);
        return Bytes(f.begin(), f.end());
    };
    m.server_hello = next(MsgType::ServerHello);
    m.certificate = next(MsgType::Certificate);
    m.certificate_verify = next(MsgType::CertificateVerify);
    m.server_finished = next(MsgType::ServerFinished);
    if (!in.empty()) throw HandshakeError(HandshakeErrorKind::Malformed, "trailing bytes after ServerFinished");
    return m;
}

ClientResult client_complete(const ServerMessages& messages, const ClientState& state,
                             const std::vector<pki::CertificateRecord>& trust_store, std::uint64_t now) {
    crypto::Sha256 transcript;
    transcript.update(state.client_hello);

    const WireMessage sh = parse_or_malformed(messages.server_hello, MsgType::ServerHello);
    if (sh.body.size() != kRandomBytes + server_share_size(state.kex))
        throw HandshakeError(HandshakeErrorKind::Malformed, "ServerHello key share has wrong length");
    std::optional<Bytes> classical, kem_ss;
    ByteView share = ByteView(sh.body).subspan(kRandomBytes);
    try {
        if (uses_x25519(state.kex)) {
            classical = crypto::x25519_shared(state.x25519_private, share.first(crypto::kX25519Bytes));
            share = share.subspan(crypto::kX25519Bytes);
        }
    } catch (const CryptoError& e) {
        throw HandshakeError(HandshakeErrorKind::Malformed, std::string("ServerHello key share: ") + e.what());
    }
    if (uses_mlkem(state.kex)) kem_ss = kem::decapsulate(state.mlkem_decaps_key, share);
    transcript.update(messages.server_hello);

    ClientResult r;
    r.secrets = derive_secrets(std::move(classical), std::move(kem_ss), transcript.peek());

    const WireMessage cert = parse_or_malformed(messages.certificate, MsgType::Certificate);
    std::vector<pki::CertificateRecord> chain;
    try {
        chain = decode_certificate_body(cert.body);
    } catch (const DecodeError& e) {
        throw HandshakeError(HandshakeErrorKind::Malformed, std::string("Certificate: ") + e.what());
    }
    std::set<Bytes> unique;
    for (const auto& c : chain) {
        if (unique.insert(c.encoded).second) r.observation.chain_bytes_unique += c.encoded.size();
    }
    r.observation.chain_len_unique = unique.size();
    r.observation.served_chain_der_bytes = cert.body.size();

    if (const auto err = pki::validate_chain(chain, trust_store, now))
        throw HandshakeError(HandshakeErrorKind::PathError, pki::describe(*err), err);
    transcript.update(messages.certificate);

    const WireMessage cv = parse_or_malformed(messages.certificate_verify, MsgType::CertificateVerify);
    const auto& leaf = chain.front().tbs;
    const auto leaf_alg = family_from_algorithm_id(leaf.pk_alg_id);
    if (!leaf_alg ||
        !pki::verify_message(*leaf_alg, leaf.public_key, cert_verify_digest(transcript.peek()), cv.body))
        throw HandshakeError(HandshakeErrorKind::BadCertVerify, "CertificateVerify does not verify");
    transcript.update(messages.certificate_verify);

    const WireMessage sf = parse_or_malformed(messages.server_finished, MsgType::ServerFinished);
    if (!crypto::constant_time_equal(sf.body, crypto::hmac_sha256(r.secrets.finished_key, transcript.peek())))
        throw HandshakeError(HandshakeErrorKind::BadFinished, "ServerFinished does not verify");
    transcript.update(messages.server_finished);

    r.client_finished =
        frame(MsgType::ClientFinished, crypto::hmac_sha256(r.secrets.finished_key, transcript.peek()));
    return r;
}

}  // namespace pqchain::handshake
