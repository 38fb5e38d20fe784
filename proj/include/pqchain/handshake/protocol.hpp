#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pqchain/bytes.hpp"
#include "pqchain/crypto/mlkem768.hpp"
#include "pqchain/pki.hpp"
#include "pqchain/scenario.hpp"

namespace pqchain::crypto {
class Rng;
}

namespace pqchain::handshake {

enum class MsgType : std::uint8_t {
    ClientHello = 1,
    ServerHello = 2,
    Certificate = 3,
    CertificateVerify = 4,
    ServerFinished = 5,
    ClientFinished = 6,
};

inline constexpr std::size_t kFrameHeaderBytes = 5;
inline constexpr std::size_t kRandomBytes = 32;
inline constexpr std::uint32_t kMaxBodyBytes = 1u << 20;

inline constexpr std::uint16_t kGroupX25519 = 0x001D;
inline constexpr std::uint16_t kGroupX25519MlKem768 = 0x11EC;
inline constexpr std::uint16_t kGroupMlKem768 = 0x0201;

std::uint16_t group_id(KexMode k);
std::optional<KexMode> kex_from_group_id(std::uint16_t id);

struct WireMessage {
    MsgType type;
    Bytes body;
};

Bytes frame(MsgType type, ByteView body);

/// Parses exactly one frame; throws DecodeError on truncation, trailing data or a type mismatch.
WireMessage parse_frame(ByteView framed, MsgType expected);

enum class HandshakeErrorKind { PathError, BadCertVerify, BadFinished, Malformed, UnsupportedGroup };

class HandshakeError : public std::runtime_error {
public:
    HandshakeError(HandshakeErrorKind kind, std::string what, std::optional<pki::PathError> path = std::nullopt)
        : std::runtime_error(std::move(what)), kind_(kind), path_(path) {}

    HandshakeErrorKind kind() const { return kind_; }
    const std::optional<pki::PathError>& path_error() const { return path_; }

private:
    HandshakeErrorKind kind_;
    std::optional<pki::PathError> path_;
};

std::string_view error_kind_name(HandshakeErrorKind k);

struct SessionSecrets {
    std::optional<Bytes> classical_ss;
    std::optional<Bytes> kem_ss;
    Bytes master_secret;
    Bytes finished_key;
};

struct ChainObservation {
    std::size_t chain_len_unique = 0;
    std::size_t chain_bytes_unique = 0;
    std::size_t served_chain_der_bytes = 0;  // length of the Certificate message body
};

struct ClientState {
    KexMode kex;
    Bytes client_hello;  // framed
    Bytes x25519_private;
    Bytes mlkem_decaps_key;
};

struct ClientHelloResult {
    Bytes client_hello;  // framed
    ClientState state;
};

ClientHelloResult client_begin(KexMode kex, crypto::Rng& rng);

/// Server-side identity material, prepared once per scenario.
struct ServerIdentity {
    ServerIdentity(std::vector<pki::CertificateRecord> served, const pki::KeyPair& leaf_key);

    std::vector<pki::CertificateRecord> served;
    Bytes certificate_body;
    pki::Signer signer;
};

Bytes encode_certificate_body(const std::vector<pki::CertificateRecord>& chain);
std::vector<pki::CertificateRecord> decode_certificate_body(ByteView body);

struct ServerFlight {
    Bytes server_hello;  // each message framed
    Bytes certificate;
    Bytes certificate_verify;
    Bytes server_finished;
    SessionSecrets secrets;
    Bytes expected_client_finished;

    Bytes concatenated() const;
};

/// `hedge` supplies signing randomness; null signs deterministically.
ServerFlight server_respond(ByteView client_hello, const ServerIdentity& identity, crypto::Rng& rng,
                            crypto::Rng* hedge = nullptr);

/// Throws HandshakeError(BadFinished) when the client's Finished does not match.
void server_finish(const ServerFlight& flight, ByteView client_finished);

struct ServerMessages {
    Bytes server_hello;
    Bytes certificate;
    Bytes certificate_verify;
    Bytes server_finished;
};

struct ClientResult {
    Bytes client_finished;  // framed
    SessionSecrets secrets;
    ChainObservation observation;
};

ClientResult client_complete(const ServerMessages& messages, const ClientState& state,
                             const std::vector<pki::CertificateRecord>& trust_store, std::uint64_t now);

/// Splits a byte stream holding the server's four frames.
ServerMessages split_server_flight(ByteView stream);

}  // namespace pqchain::handshake
