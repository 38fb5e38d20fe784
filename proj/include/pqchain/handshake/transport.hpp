#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "pqchain/handshake/protocol.hpp"

namespace pqchain::handshake {

/// Owning TCP socket with byte counters.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    ~Socket();
    Socket(Socket&& o) noexcept;
    Socket& operator=(Socket&& o) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;

    int fd() const { return fd_; }
    bool valid() const { return fd_ >= 0; }
    void close();

    void write_all(ByteView data);
    void read_exact(std::uint8_t* out, std::size_t len);
    /// Returns one framed message (header included).
    Bytes read_frame();
    /// Reads up to and excluding '\n'; nullopt on orderly EOF before any byte.
    std::optional<std::string> read_line();

    std::uint64_t bytes_read() const { return bytes_read_; }
    std::uint64_t bytes_written() const { return bytes_written_; }

private:
    int fd_ = -1;
    std::uint64_t bytes_read_ = 0;
    std::uint64_t bytes_written_ = 0;
};

/// Listens on 127.0.0.1; port 0 picks an ephemeral port.
Socket listen_loopback(std::uint16_t port);
std::uint16_t local_port(const Socket& s);
Socket connect_loopback(std::uint16_t port);

/// CPU time consumed by the calling thread, in milliseconds.
double thread_cpu_ms();

/// One line on the control channel per served connection.
struct ServerRecord {
    std::uint64_t connection_index = 0;
    double server_cpu_ms = 0;
    std::uint64_t bytes_in = 0;
    std::uint64_t bytes_out = 0;
    bool ok = false;
    std::string error;
};

std::string record_to_json_line(const ServerRecord& r);
ServerRecord record_from_json_line(std::string_view line);

struct ServerOptions {
    std::uint16_t port = 0;
    std::uint16_t control_port = 0;
    /// Seeds the server's ephemeral randomness; unset uses the OS RNG.
    std::optional<Bytes> deterministic_seed;
};

/// Handshake server on its own thread. Connections are served strictly one
/// at a time; each finished connection produces one ServerRecord on the
/// control channel.
class HandshakeServer {
public:
    HandshakeServer(std::shared_ptr<const ServerIdentity> identity, ServerOptions options);
    ~HandshakeServer();
    HandshakeServer(const HandshakeServer&) = delete;
    HandshakeServer& operator=(const HandshakeServer&) = delete;

    std::uint16_t port() const { return port_; }
    std::uint16_t control_port() const { return control_port_; }
    void stop();

private:
    void run();

    std::shared_ptr<const ServerIdentity> identity_;
    ServerOptions options_;
    Socket listener_;
    Socket control_listener_;
    std::uint16_t port_ = 0;
    std::uint16_t control_port_ = 0;
    std::atomic<bool> stopping_{false};
    std::thread thread_;
};

/// Control-channel reader for the bench runner.
class ControlClient {
public:
    explicit ControlClient(std::uint16_t control_port);
    ServerRecord next();

private:
    Socket socket_;
};

using TamperHook = std::function<void(MsgType, Bytes& framed)>;

struct ClientOutcome {
    double elapsed_ms = 0;
    double client_cpu_ms = 0;
    std::uint64_t bytes_read = 0;
    std::uint64_t bytes_written = 0;
    ClientResult result;
};

/// Full client handshake over a fresh connection. Throws HandshakeError on
/// protocol failure and TransportError on socket failure.
ClientOutcome run_client(std::uint16_t port, KexMode kex, const std::vector<pki::CertificateRecord>& trust_store,
                         std::uint64_t now, crypto::Rng& rng, const TamperHook& tamper = {});

}  // namespace pqchain::handshake
