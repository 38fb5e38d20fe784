#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pqchain {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline void append(Bytes& out, ByteView in) { out.insert(out.end(), in.begin(), in.end()); }

inline void put_u8(Bytes& out, std::uint8_t v) { out.push_back(v); }

inline void put_u16(Bytes& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_u32(Bytes& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

inline void put_u64(Bytes& out, std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Big-endian cursor over a byte buffer; every read is bounds-checked.
class Reader {
public:
    explicit Reader(ByteView data) : data_(data) {}

    std::size_t remaining() const { return data_.size() - pos_; }
    bool empty() const { return remaining() == 0; }
    std::size_t position() const { return pos_; }

    ByteView take(std::size_t n) {
        if (n > remaining()) throw DecodeError("truncated input");
        ByteView out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    std::uint8_t u8() { return take(1)[0]; }

    std::uint16_t u16() {
        auto b = take(2);
        return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
    }

    std::uint32_t u32() {
        auto b = take(4);
        return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
    }

    std::uint64_t u64() {
        std::uint64_t hi = u32();
        return (hi << 32) | u32();
    }

    void expect_end() const {
        if (!empty()) throw DecodeError("trailing bytes");
    }

private:
    ByteView data_;
    std::size_t pos_ = 0;
};

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

}  // namespace pqchain
