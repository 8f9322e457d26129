#pragma once

#include <cstdint>
#include <cstring>
#include <string_view>

namespace prodmp::detail {

class Fnv1a {
public:
    void add(const void* data, std::size_t size) noexcept {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            state_ ^= bytes[i];
            state_ *= 0x100000001b3ULL;
        }
    }
    void add(std::string_view s) noexcept { add(s.data(), s.size()); }
    void add(double v) noexcept {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        add(&bits, sizeof bits);
    }
    void add(std::uint64_t v) noexcept { add(&v, sizeof v); }
    std::uint64_t value() const noexcept { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace prodmp::detail
