#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>

namespace lbctl {

// 64-bit FNV-1a; used for config/grid fingerprints embedded in artifacts.
class Fnv1a {
public:
    Fnv1a& add(std::string_view bytes) noexcept {
        for (unsigned char c : bytes) {
            state_ ^= c;
            state_ *= 0x100000001b3ULL;
        }
        return *this;
    }
    Fnv1a& add(double x) noexcept {
        unsigned char buf[sizeof(double)];
        std::memcpy(buf, &x, sizeof x);
        return add(std::string_view(reinterpret_cast<const char*>(buf), sizeof buf));
    }
    Fnv1a& add(std::uint64_t x) noexcept {
        unsigned char buf[sizeof x];
        std::memcpy(buf, &x, sizeof x);
        return add(std::string_view(reinterpret_cast<const char*>(buf), sizeof buf));
    }
    Fnv1a& add(std::span<const double> xs) noexcept {
        for (double x : xs) add(x);
        return *this;
    }
    std::uint64_t value() const noexcept { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace lbctl
