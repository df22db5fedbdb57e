// Seedless 64-bit hashing used for feature ids and file digests. Values are
// stable across runs, builds and platforms.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace dlmparse {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

constexpr std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = kFnvOffset) noexcept {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

// Incremental hasher over a sequence of fields. Fields are length-prefixed so
// ("ab","c") and ("a","bc") differ.
class FieldHasher {
 public:
  constexpr FieldHasher() = default;
  constexpr explicit FieldHasher(std::uint64_t seed) : h_(mix64(seed ^ kFnvOffset)) {}

  constexpr FieldHasher& add(std::string_view field) noexcept {
    add(static_cast<std::uint64_t>(field.size()));
    h_ = fnv1a(field, h_);
    return *this;
  }
  constexpr FieldHasher& add(std::uint64_t value) noexcept {
    h_ = mix64(h_ ^ (value + 0x9e3779b97f4a7c15ULL));
    return *this;
  }
  constexpr std::uint64_t value() const noexcept { return mix64(h_); }

 private:
  std::uint64_t h_ = kFnvOffset;
};

// 16 lowercase hex digits of a 64-bit value.
std::string to_hex(std::uint64_t v);

// Digest of a byte string, rendered as hex (FNV-1a 64 with a final mix).
std::string digest_hex(std::string_view bytes);

}  // namespace dlmparse
