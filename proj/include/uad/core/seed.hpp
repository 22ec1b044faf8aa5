#ifndef UAD_CORE_SEED_HPP
#define UAD_CORE_SEED_HPP

#include <cstdint>
#include <string_view>

namespace uad {

/// FNV-1a over bytes. Stable across platforms and runs, unlike std::hash.
constexpr std::uint64_t fnv1a(std::string_view s,
                              std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Module seed derived from the root seed and a module name.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view module) {
  return splitmix64(fnv1a(module, splitmix64(root)));
}

}  // namespace uad

#endif  // UAD_CORE_SEED_HPP
