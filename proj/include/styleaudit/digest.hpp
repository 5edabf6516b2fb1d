#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace styleaudit {

// Streaming FNV-1a (64-bit). Used for content addressing of weights,
// tap plans and manifests; not a cryptographic hash.
class Digest {
public:
    Digest& update(const void* data, std::size_t size) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            hash_ ^= bytes[i];
            hash_ *= 0x100000001b3ull;
        }
        return *this;
    }

    Digest& update(std::string_view s) { return update(s.data(), s.size()); }

    template <typename T>
    Digest& update_value(const T& value) {
        static_assert(std::is_trivially_copyable_v<T>);
        return update(&value, sizeof(value));
    }

    std::uint64_t value() const { return hash_; }

    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(hash_));
        return std::string(buf);
    }

private:
    std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

inline std::string digest_hex(const void* data, std::size_t size) {
    return Digest().update(data, size).hex();
}

inline std::string digest_hex(std::string_view s) {
    return Digest().update(s).hex();
}

}  // namespace styleaudit
