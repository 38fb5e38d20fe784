#include "pqchain/handshake/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <iostream>

#include "json.hpp"
#include "pqchain/crypto/rng.hpp"
#include "pqchain/errors.hpp"

namespace pqchain::handshake {
namespace {

[[noreturn]] void fail(const std::string& what) { throw TransportError(what + ": " + std::strerror(errno)); }

void set_nodelay(int fd) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

sockaddr_in loopback(std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    return addr;
}

// Waits for a pending connection; false when the timeout expires first.
bool wait_readable(int fd, int timeout_ms) {
    pollfd p{fd, POLLIN, 0};
    const int rc = ::poll(&p, 1, timeout_ms);
    return rc > 0;
}

Socket accept_on(const Socket& listener) {
    const int fd = ::accept(listener.fd(), nullptr, nullptr);
    if (fd < 0) fail("accept");
    set_nodelay(fd);
    return Socket(fd);
}

}  // namespace

Socket::~Socket() { close(); }

Socket::Socket(Socket&& o) noexcept
    : fd_(std::exchange(o.fd_, -1)), bytes_read_(o.bytes_read_), bytes_written_(o.bytes_written_) {}

Socket& Socket::operator=(Socket&& o) noexcept {
    if (this != &o) {
        close();
        fd_ = std::exchange(o.fd_, -1);
        bytes_read_ = o.bytes_read_;
        bytes_written_ = o.bytes_written_;
    }
    return *this;
}

void Socket::close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
}

void Socket::write_all(ByteView data) {
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail("send");
        }
        off += static_cast<std::size_t>(n);
    }
    bytes_written_ += data.size();
}

void Socket::read_exact(std::uint8_t* out, std::size_t len) {
    std::size_t off = 0;
    while (off < len) {
        const ssize_t n = ::recv(fd_, out + off, len - off, 0);
        if (n == 0) throw TransportError("connection closed by peer");
        if (n < 0) {
            if (errno == EINTR) continue;
            fail("recv");
        }
        off += static_cast<std::size_t>(n);
        bytes_read_ += static_cast<std::uint64_t>(n);
    }
}

Bytes Socket::read_frame() {
    Bytes out(kFrameHeaderBytes);
    read_exact(out.data(), kFrameHeaderBytes);
    const std::uint32_t len = (std::uint32_t{out[1]} << 24) | (std::uint32_t{out[2]} << 16) |
                              (std::uint32_t{out[3]} << 8) | out[4];
    if (len > kMaxBodyBytes) throw HandshakeError(HandshakeErrorKind::Malformed, "frame length too large");
    out.resize(kFrameHeaderBytes + len);
    read_exact(out.data() + kFrameHeaderBytes, len);
    return out;
}

std::optional<std::string> Socket::read_line() {
    std::string line;
    char c;
    while (true) {
        const ssize_t n = ::recv(fd_, &c, 1, 0);
        if (n == 0) {
            if (line.empty()) return std::nullopt;
            throw TransportError("control channel closed mid-line");
        }
        if (n < 0) {
            if (errno == EINTR) continue;
            fail("recv");
        }
        ++bytes_read_;
        if (c == '\n') return line;
        line.push_back(c);
    }
}

Socket listen_loopback(std::uint16_t port) {
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s.valid()) fail("socket");
    int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    const sockaddr_in addr = loopback(port);
    if (::bind(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) fail("bind");
    if (::listen(s.fd(), 16) != 0) fail("listen");
    return s;
}

std::uint16_t local_port(const Socket& s) {
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    if (::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len) != 0) fail("getsockname");
    return ntohs(addr.sin_port);
}

Socket connect_loopback(std::uint16_t port) {
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s.valid()) fail("socket");
    const sockaddr_in addr = loopback(port);
    if (::connect(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) fail("connect");
    set_nodelay(s.fd());
    return s;
}

double thread_cpu_ms() {
    timespec ts{};
    ::clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
    return static_cast<double>(ts.tv_sec) * 1e3 + static_cast<double>(ts.tv_nsec) / 1e6;
}

std::string record_to_json_line(const ServerRecord& r) {
    nlohmann::ordered_json j{{"connection_index", r.connection_index},
                             {"server_cpu_ms", r.server_cpu_ms},
                             {"bytes_in", r.bytes_in},
                             {"bytes_out", r.bytes_out},
                             {"ok", r.ok}};
    if (!r.error.empty()) j["error"] = r.error;
    return j.dump() + "\n";
}

ServerRecord record_from_json_line(std::string_view line) {
    try {
        const auto j = nlohmann::json::parse(line);
        ServerRecord r;
        r.connection_index = j.at("connection_index").get<std::uint64_t>();
        r.server_cpu_ms = j.at("server_cpu_ms").get<double>();
        r.bytes_in = j.at("bytes_in").get<std::uint64_t>();
        r.bytes_out = j.at("bytes_out").get<std::uint64_t>();
        r.ok = j.at("ok").get<bool>();
        r.error = j.value("error", "");
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("control record: ") + e.what());
    }
}

HandshakeServer::HandshakeServer(std::shared_ptr<const ServerIdentity> identity, ServerOptions options)
    : identity_(std::move(identity)), options_(std::move(options)) {
    listener_ = listen_loopback(options_.port);
    control_listener_ = listen_loopback(options_.control_port);
    port_ = local_port(listener_);
    control_port_ = local_port(control_listener_);
    thread_ = std::thread([this] { run(); });
}

HandshakeServer::~HandshakeServer() { stop(); }

void HandshakeServer::stop() {
    stopping_ = true;
    if (thread_.joinable()) thread_.join();
}

void HandshakeServer::run() {
    Socket control;
    std::uint64_t index = 0;
    crypto::OsRng os_rng;
    while (!stopping_) {
        if (!control.valid() && wait_readable(control_listener_.fd(), 0)) control = accept_on(control_listener_);
        if (!wait_readable(listener_.fd(), 50)) continue;

        ServerRecord rec;
        rec.connection_index = index++;
        try {
            Socket conn = accept_on(listener_);
            std::unique_ptr<crypto::SeededRng> seeded;
            crypto::Rng* rng = &os_rng;
            if (options_.deterministic_seed) {
                Bytes s = *options_.deterministic_seed;
                put_u64(s, rec.connection_index);
                seeded = std::make_unique<crypto::SeededRng>(s);
                rng = seeded.get();
            }
            const double cpu_start = thread_cpu_ms();
            try {
                const Bytes ch = conn.read_frame();
                const ServerFlight flight = server_respond(ch, *identity_, *rng);
                conn.write_all(flight.concatenated());
                const Bytes cf = conn.read_frame();
                server_finish(flight, cf);
                rec.ok = true;
            } catch (const std::exception& e) {
                rec.error = e.what();
            }
            rec.server_cpu_ms = thread_cpu_ms() - cpu_start;
            rec.bytes_in = conn.bytes_read();
            rec.bytes_out = conn.bytes_written();
        } catch (const std::exception& e) {
            rec.error = e.what();
        }

        if (!control.valid() && wait_readable(control_listener_.fd(), 1000)) control = accept_on(control_listener_);
        if (control.valid()) {
            try {
                control.write_all(as_bytes(record_to_json_line(rec)));
            } catch (const std::exception& e) {
                std::cerr << "control channel write failed: " << e.what() << "\n";
                control.close();
            }
        }
    }
}

ControlClient::ControlClient(std::uint16_t control_port) : socket_(connect_loopback(control_port)) {}

ServerRecord ControlClient::next() {
    const auto line = socket_.read_line();
    if (!line) throw TransportError("control channel closed");
    return record_from_json_line(*line);
}

ClientOutcome run_client(std::uint16_t port, KexMode kex, const std::vector<pki::CertificateRecord>& trust_store,
                         std::uint64_t now, crypto::Rng& rng, const TamperHook& tamper) {
    ClientOutcome out;
    const auto t0 = std::chrono::steady_clock::now();
    const double cpu_start = thread_cpu_ms();

    Socket conn = connect_loopback(port);
    const ClientHelloResult hello = client_begin(kex, rng);
    conn.write_all(hello.client_hello);

    ServerMessages m;
    Bytes* slots[] = {&m.server_hello, &m.certificate, &m.certificate_verify, &m.server_finished};
    const MsgType types[] = {MsgType::ServerHello, MsgType::Certificate, MsgType::CertificateVerify,
                             MsgType::ServerFinished};
    for (int i = 0; i < 4; ++i) {
        *slots[i] = conn.read_frame();
        if (tamper) tamper(types[i], *slots[i]);
    }
    out.result = client_complete(m, hello.state, trust_store, now);
    conn.write_all(out.result.client_finished);

    out.client_cpu_ms = thread_cpu_ms() - cpu_start;
    const auto t1 = std::chrono::steady_clock::now();
    out.elapsed_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    out.bytes_read = conn.bytes_read();
    out.bytes_written = conn.bytes_written();
    return out;
}

}  // namespace pqchain::handshake
