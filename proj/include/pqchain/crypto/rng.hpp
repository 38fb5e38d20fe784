#pragma once

#include <memory>

#include "pqchain/bytes.hpp"

namespace pqchain::crypto {

class Rng {
public:
    virtual ~Rng() = default;
    virtual void fill(std::uint8_t* out, std::size_t len) = 0;

    Bytes bytes(std::size_t len) {
        Bytes out(len);
        fill(out.data(), len);
        return out;
    }
};

/// Operating-system randomness (OpenSSL RAND_bytes).
class OsRng final : public Rng {
public:
    void fill(std::uint8_t* out, std::size_t len) override;
};

/// SHAKE256 stream keyed by a seed; for tests and --deterministic runs.
class SeededRng final : public Rng {
public:
    explicit SeededRng(ByteView seed);
    ~SeededRng() override;
    void fill(std::uint8_t* out, std::size_t len) override;

private:
    struct State;
    std::unique_ptr<State> state_;
};

}  // namespace pqchain::crypto
