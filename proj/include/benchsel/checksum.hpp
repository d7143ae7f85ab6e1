#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace benchsel {

/// 64-bit FNV-1a. Used to fingerprint input files and datasets so that model
/// files can be matched to the normalization table they were fitted against.
/// Not a cryptographic hash.
class fnv1a64 {
public:
    void update(std::string_view bytes) noexcept {
        for (unsigned char c : bytes) {
            state_ ^= c;
            state_ *= 0x100000001b3ULL;
        }
    }

    void update(double value) noexcept {
        const auto bits = std::bit_cast<std::uint64_t>(value);
        for (int i = 0; i < 8; ++i) {
            state_ ^= (bits >> (8 * i)) & 0xffU;
            state_ *= 0x100000001b3ULL;
        }
    }

    std::uint64_t value() const noexcept { return state_; }

    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(state_));
        return buf;
    }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string checksum_hex(std::string_view bytes) {
    fnv1a64 h;
    h.update(bytes);
    return h.hex();
}

}  // namespace benchsel
