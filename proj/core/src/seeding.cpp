#include "rsf/seeding.hpp"

namespace rsf {

std::uint64_t mix_seed(std::uint64_t value) noexcept {
  value += 0x9e3779b97f4a7c15ULL;
  value = (value ^ (value >> 30)) * 0xbf58476d1ce4e5b9ULL;
  value = (value ^ (value >> 27)) * 0x94d049bb133111ebULL;
  return value ^ (value >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t state = mix_seed(base);
  for (std::uint64_t index : path) {
    state = mix_seed(state ^ mix_seed(index + 0x632be59bd9b4e019ULL));
  }
  return state;
}

Rng make_rng(std::uint64_t seed) { return Rng(mix_seed(seed)); }

}  // namespace rsf
