#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "pqchain/bytes.hpp"

namespace pqchain::crypto {

void keccak_f1600(std::array<std::uint64_t, 25>& state);

/// Incremental Keccak sponge. `Rate` is in bytes; `Pad` is the domain
/// separation byte (0x1f for SHAKE, 0x06 for SHA3).
template <std::size_t Rate, std::uint8_t Pad>
class KeccakSponge {
public:
    static constexpr std::size_t rate = Rate;

    KeccakSponge& absorb(ByteView in) {
        std::size_t i = 0;
        while (i < in.size()) {
            if (offset_ == 0 && in.size() - i >= Rate) {
                for (std::size_t lane = 0; lane < Rate / 8; ++lane) state_[lane] ^= load64(in.data() + i + 8 * lane);
                keccak_f1600(state_);
                i += Rate;
                continue;
            }
            xor_byte(offset_++, in[i++]);
            if (offset_ == Rate) {
                keccak_f1600(state_);
                offset_ = 0;
            }
        }
        return *this;
    }

    KeccakSponge& absorb_byte(std::uint8_t b) { return absorb(ByteView(&b, 1)); }

    void squeeze(std::uint8_t* out, std::size_t len) {
        if (!finalized_) finalize();
        while (len > 0) {
            if (offset_ == Rate) {
                keccak_f1600(state_);
                offset_ = 0;
            }
            std::size_t take = Rate - offset_;
            if (take > len) take = len;
            for (std::size_t j = 0; j < take; ++j) *out++ = get_byte(offset_ + j);
            offset_ += take;
            len -= take;
        }
    }

    Bytes squeeze(std::size_t len) {
        Bytes out(len);
        squeeze(out.data(), len);
        return out;
    }

private:
    static std::uint64_t load64(const std::uint8_t* p) {
        std::uint64_t v = 0;
        for (int k = 7; k >= 0; --k) v = (v << 8) | p[k];
        return v;
    }

    void xor_byte(std::size_t pos, std::uint8_t b) { state_[pos / 8] ^= std::uint64_t{b} << (8 * (pos % 8)); }
    std::uint8_t get_byte(std::size_t pos) const {
        return static_cast<std::uint8_t>(state_[pos / 8] >> (8 * (pos % 8)));
    }

    void finalize() {
        xor_byte(offset_, Pad);
        xor_byte(Rate - 1, 0x80);
        keccak_f1600(state_);
        offset_ = 0;
        finalized_ = true;
    }

    std::array<std::uint64_t, 25> state_{};
    std::size_t offset_ = 0;
    bool finalized_ = false;
};

using Shake128 = KeccakSponge<168, 0x1f>;
using Shake256 = KeccakSponge<136, 0x1f>;
using Sha3_256 = KeccakSponge<136, 0x06>;
using Sha3_512 = KeccakSponge<72, 0x06>;

inline Bytes shake256(ByteView in, std::size_t out_len) { return Shake256{}.absorb(in).squeeze(out_len); }
inline Bytes shake128(ByteView in, std::size_t out_len) { return Shake128{}.absorb(in).squeeze(out_len); }
inline Bytes sha3_256(ByteView in) { return Sha3_256{}.absorb(in).squeeze(32); }
inline Bytes sha3_512(ByteView in) { return Sha3_512{}.absorb(in).squeeze(64); }

}  // namespace pqchain::crypto
