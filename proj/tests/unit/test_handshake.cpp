#include <gtest/gtest.h>

#include <memory>

#include "pqchain/crypto/rng.hpp"
#include "pqchain/errors.hpp"
#include "pqchain/handshake/protocol.hpp"
#include "pqchain/handshake/transport.hpp"
#include "pqchain/pki.hpp"

using namespace pqchain;
using namespace pqchain::handshake;
using pki::ServedChainPolicy;

namespace {

constexpr std::uint64_t kIssuedAt = 1767225600;
constexpr std::uint64_t kNow = kIssuedAt + 3600;
constexpr KexMode kAllKex[] = {KexMode::CLASSICAL, KexMode::HYBRID, KexMode::PURE_PQC};

const pki::HierarchyMaterial& ml3() {
    static const auto h =
        pki::build_hierarchy(*find_scenario("x25519mlkem768__ml_root__ml_int__ml_leaf"), Bytes(32, 3), kIssuedAt);
    return h;
}

ServerIdentity identity(ServedChainPolicy p = ServedChainPolicy::MIRROR_PAPER) {
    return ServerIdentity(pki::served_chain(ml3(), p), ml3().leaf.key);
}

struct InProcess {
    ServerFlight flight;
    ClientResult client;
};

InProcess run_in_process(KexMode kex, const ServerIdentity& id, crypto::Rng& rng,
                    const std::vector<pki::CertificateRecord>& trust) {
    const auto ch = client_begin(kex, rng);
    auto flight = server_respond(ch.client_hello, id, rng);
    auto client = client_complete(split_server_flight(flight.concatenated()), ch.state, trust, kNow);
    return {std::move(flight), std::move(client)};
}

HandshakeErrorKind rejection(KexMode kex, MsgType target, std::size_t offset) {
    crypto::SeededRng rng(as_bytes("tamper"));
    const auto id = identity();
    const auto ch = client_begin(kex, rng);
    const auto flight = server_respond(ch.client_hello, id, rng);
    auto msgs = split_server_flight(flight.concatenated());
    Bytes* m = target == MsgType::Certificate         ? &msgs.certificate
               : target == MsgType::CertificateVerify ? &msgs.certificate_verify
               : target == MsgType::ServerFinished    ? &msgs.server_finished
                                                      : &msgs.server_hello;
    (*m)[5 + offset % (m->size() - 5)] ^= 0x01;
    try {
        client_complete(msgs, ch.state, ml3().trust_store, kNow);
    } catch (const HandshakeError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "tampered handshake accepted";
    return HandshakeErrorKind::Malformed;
}

}  // namespace

TEST(Protocol, FrameRoundTrip) {
    const Bytes body{0x61, 0x62, 0x63};
    const Bytes f = frame(MsgType::Certificate, body);
    ASSERT_EQ(f.size(), 8u);
    EXPECT_EQ(f[0], 3);
    EXPECT_EQ(f[4], 3);
    EXPECT_EQ(parse_frame(f, MsgType::Certificate).body, body);
    EXPECT_THROW(parse_frame(f, MsgType::ServerHello), DecodeError);
    EXPECT_THROW(parse_frame(ByteView(f).first(6), MsgType::Certificate), DecodeError);
}

TEST(Protocol, ClientHelloKeyshareSizes) {
    crypto::SeededRng rng(as_bytes("ch"));
    // header + random + group + keyshare
    EXPECT_EQ(client_begin(KexMode::CLASSICAL, rng).client_hello.size(), 5u + 32 + 2 + 32);
    EXPECT_EQ(client_begin(KexMode::PURE_PQC, rng).client_hello.size(), 5u + 32 + 2 + 1184);
    EXPECT_EQ(client_begin(KexMode::HYBRID, rng).client_hello.size(), 5u + 32 + 2 + 32 + 1184);
}

TEST(Protocol, SecretsAgreeForEveryKexOverRandomSeeds) {
    const auto id = identity();
    for (auto kex : kAllKex) {
        for (int i = 0; i < 5; ++i) {
            crypto::SeededRng rng(Bytes{static_cast<std::uint8_t>(kex), static_cast<std::uint8_t>(i)});
            const auto r = run_in_process(kex, id, rng, ml3().trust_store);
            EXPECT_EQ(r.client.secrets.master_secret, r.flight.secrets.master_secret);
            EXPECT_EQ(r.client.secrets.master_secret.size(), 32u);
            EXPECT_NO_THROW(server_finish(r.flight, r.client.client_finished));
            EXPECT_EQ(r.client.secrets.classical_ss.has_value(), kex != KexMode::PURE_PQC);
            EXPECT_EQ(r.client.secrets.kem_ss.has_value(), kex != KexMode::CLASSICAL);
        }
    }
}

TEST(Protocol, ChainObservationPerPolicy) {
    crypto::SeededRng rng(as_bytes("obs"));
    for (auto [p, len] : {std::pair{ServedChainPolicy::MIRROR_PAPER, 2u}, {ServedChainPolicy::FULL_CHAIN, 3u},
                          {ServedChainPolicy::LEAF_ONLY, 1u}}) {
        const auto id = identity(p);
        const auto r = run_in_process(KexMode::HYBRID, id, rng, pki::client_trust_store(ml3(), p));
        EXPECT_EQ(r.client.observation.chain_len_unique, len);
        std::size_t unique = 0;
        for (const auto& c : pki::served_chain(ml3(), p)) unique += c.encoded.size();
        EXPECT_EQ(r.client.observation.chain_bytes_unique, unique);
        EXPECT_EQ(r.client.observation.served_chain_der_bytes, id.certificate_body.size());
        EXPECT_EQ(r.flight.certificate.size(), id.certificate_body.size() + 5);
    }
}

TEST(Protocol, DuplicateCertificatesCountOnce) {
    const auto& h = ml3();
    const auto id = ServerIdentity({h.leaf.cert, h.intermediate->cert, h.root.cert, h.root.cert}, h.leaf.key);
    crypto::SeededRng rng(as_bytes("dup"));
    const auto r = run_in_process(KexMode::CLASSICAL, id, rng, h.trust_store);
    EXPECT_EQ(r.client.observation.chain_len_unique, 3u);
    EXPECT_EQ(r.client.observation.chain_bytes_unique,
              h.leaf.cert.encoded.size() + h.intermediate->cert.encoded.size() + h.root.cert.encoded.size());
    EXPECT_EQ(r.client.observation.served_chain_der_bytes, id.certificate_body.size());
}

TEST(Protocol, CertificateBodyRoundTrip) {
    const auto chain = pki::served_chain(ml3(), ServedChainPolicy::FULL_CHAIN);
    EXPECT_EQ(decode_certificate_body(encode_certificate_body(chain)), chain);
}

TEST(Protocol, TamperedCertificateIsRejected) {
    for (std::size_t off : {0, 1, 17, 500, 4000, 9000, 12345})
        EXPECT_NE(rejection(KexMode::HYBRID, MsgType::Certificate, off), HandshakeErrorKind::BadFinished) << off;
}

TEST(Protocol, TamperedCertificateVerifyIsRejected) {
    for (std::size_t off : {0, 1, 2, 3, 4, 100, 3000, 3312})
        EXPECT_EQ(rejection(KexMode::PURE_PQC, MsgType::CertificateVerify, off), HandshakeErrorKind::BadCertVerify)
            << off;
}

TEST(Protocol, TamperedServerFinishedIsRejected) {
    EXPECT_EQ(rejection(KexMode::CLASSICAL, MsgType::ServerFinished, 3), HandshakeErrorKind::BadFinished);
}

TEST(Protocol, TamperedServerHelloIsRejected) {
    // Changing the server share or random alters the keys or transcript.
    for (std::size_t off : {0, 40, 60})
        EXPECT_NO_FATAL_FAILURE(rejection(KexMode::HYBRID, MsgType::ServerHello, off));
}

TEST(Protocol, WrongClientFinishedIsRejectedByServer) {
    crypto::SeededRng rng(as_bytes("cf"));
    const auto id = identity();
    auto r = run_in_process(KexMode::HYBRID, id, rng, ml3().trust_store);
    r.client.client_finished.back() ^= 1;
    try {
        server_finish(r.flight, r.client.client_finished);
        FAIL();
    } catch (const HandshakeError& e) {
        EXPECT_EQ(e.kind(), HandshakeErrorKind::BadFinished);
    }
}

TEST(Protocol, UnknownGroupIsRejected) {
    crypto::SeededRng rng(as_bytes("grp"));
    auto ch = client_begin(KexMode::CLASSICAL, rng);
    ch.client_hello[5 + 32] = 0x7f;
    try {
        server_respond(ch.client_hello, identity(), rng);
        FAIL();
    } catch (const HandshakeError& e) {
        EXPECT_EQ(e.kind(), HandshakeErrorKind::UnsupportedGroup);
    }
}

TEST(Protocol, ExpiredChainIsPathError) {
    crypto::SeededRng rng(as_bytes("exp"));
    const auto ch = client_begin(KexMode::HYBRID, rng);
    const auto flight = server_respond(ch.client_hello, identity(), rng);
    try {
        client_complete(split_server_flight(flight.concatenated()), ch.state, ml3().trust_store,
                        ml3().leaf.cert.tbs.not_after + 1);
        FAIL();
    } catch (const HandshakeError& e) {
        EXPECT_EQ(e.kind(), HandshakeErrorKind::PathError);
        ASSERT_TRUE(e.path_error());
        EXPECT_EQ(e.path_error()->kind, pki::PathErrorKind::Expired);
    }
}

TEST(Protocol, DeterministicSigningIsRepeatable) {
    const auto id = identity();
    crypto::SeededRng a(as_bytes("x")), b(as_bytes("x"));
    const auto ra = run_in_process(KexMode::HYBRID, id, a, ml3().trust_store);
    const auto rb = run_in_process(KexMode::HYBRID, id, b, ml3().trust_store);
    EXPECT_EQ(ra.flight.concatenated(), rb.flight.concatenated());
}

TEST(Transport, ControlRecordJsonRoundTrip) {
    ServerRecord r{7, 1.25, 100, 2000, false, "bad \"thing\""};
    const auto back = record_from_json_line(record_to_json_line(r));
    EXPECT_EQ(back.connection_index, 7u);
    EXPECT_DOUBLE_EQ(back.server_cpu_ms, 1.25);
    EXPECT_EQ(back.bytes_out, 2000u);
    EXPECT_FALSE(back.ok);
    EXPECT_EQ(back.error, r.error);
    EXPECT_THROW(record_from_json_line("{"), SchemaError);
}

TEST(Transport, SequentialConnectionsProduceOneRecordEach) {
    auto id = std::make_shared<const ServerIdentity>(identity());
    HandshakeServer server(id, ServerOptions{});
    ControlClient control(server.control_port());
    crypto::OsRng rng;
    constexpr int kRuns = 12;
    for (int i = 0; i < kRuns; ++i) {
        const auto kex = kAllKex[i % 3];
        const auto out = run_client(server.port(), kex, ml3().trust_store, kNow, rng);
        const auto rec = control.next();
        EXPECT_TRUE(rec.ok) << rec.error;
        EXPECT_EQ(rec.connection_index, static_cast<std::uint64_t>(i));
        EXPECT_GT(rec.server_cpu_ms, 0.0);
        // The client reads exactly what the server wrote, and vice versa.
        EXPECT_EQ(rec.bytes_out, out.bytes_read);
        EXPECT_EQ(rec.bytes_in, out.bytes_written);
        EXPECT_LE(out.client_cpu_ms, out.elapsed_ms * 1.05);
        EXPECT_EQ(out.result.observation.chain_len_unique, 2u);
    }
    server.stop();
}

TEST(Transport, BytesReadIsDeterministicPerKex) {
    auto id = std::make_shared<const ServerIdentity>(identity());
    HandshakeServer server(id, ServerOptions{});
    ControlClient control(server.control_port());
    crypto::OsRng rng;
    for (auto kex : kAllKex) {
        const auto a = run_client(server.port(), kex, ml3().trust_store, kNow, rng);
        control.next();
        const auto b = run_client(server.port(), kex, ml3().trust_store, kNow, rng);
        control.next();
        EXPECT_EQ(a.bytes_read, b.bytes_read);
        EXPECT_EQ(a.bytes_written, b.bytes_written);
    }
}

TEST(Transport, TamperingClientRejectsAndServerCompletesItsSend) {
    auto id = std::make_shared<const ServerIdentity>(identity());
    HandshakeServer server(id, ServerOptions{});
    ControlClient control(server.control_port());
    crypto::OsRng rng;
    const TamperHook flip = [](MsgType t, Bytes& framed) {
        if (t == MsgType::CertificateVerify) framed[framed.size() / 2] ^= 0x40;
    };
    EXPECT_THROW(run_client(server.port(), KexMode::HYBRID, ml3().trust_store, kNow, rng, flip), HandshakeError);
    const auto rec = control.next();
    EXPECT_FALSE(rec.ok);
    EXPECT_GT(rec.bytes_out, 0u);
    // The server keeps serving afterwards.
    EXPECT_NO_THROW(run_client(server.port(), KexMode::HYBRID, ml3().trust_store, kNow, rng));
    EXPECT_TRUE(control.next().ok);
}

TEST(Transport, ConnectToClosedPortFails) {
    std::uint16_t port;
    {
        auto s = listen_loopback(0);
        port = local_port(s);
    }
    EXPECT_THROW(connect_loopback(port), TransportError);
}
