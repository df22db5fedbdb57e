#include "dlmparse/hashing.hpp"

namespace dlmparse {

std::string to_hex(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
    v >>= 4;
  }
  return out;
}

std::string digest_hex(std::string_view bytes) { return to_hex(mix64(fnv1a(bytes))); }

}  // namespace dlmparse
