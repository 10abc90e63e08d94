#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace scaffpd {

// Counter-based stream generator. The full key (seed, client, round, call)
// determines every draw, so the order in which clients are evaluated -- or
// whether they run on different threads -- cannot change any result.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t client, std::uint64_t round,
            std::uint64_t call)
      : state_(derive_key(seed, client, round, call)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return finalize(state_);
  }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // standard normal via Box-Muller; consumes exactly two draws
  double normal() {
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // uniform on {0, ..., n-1}, rejection-free modulo bias negligible at 64 bit
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  static std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t client,
                                  std::uint64_t round, std::uint64_t call) {
    std::uint64_t k = finalize(seed + 0x9e3779b97f4a7c15ULL);
    k = finalize(k ^ (client + 0xbf58476d1ce4e5b9ULL));
    k = finalize(k ^ (round + 0x94d049bb133111ebULL));
    k = finalize(k ^ (call + 0x2545f4914f6cdd1dULL));
    return k;
  }

  std::uint64_t state_;
};

// Reserved "round" tags for draws that happen outside the round loop.
namespace rng_tag {
inline constexpr std::uint64_t kFeatures = 0xffff'ffff'0000'0001ULL;
inline constexpr std::uint64_t kGroundTruth = 0xffff'ffff'0000'0002ULL;
inline constexpr std::uint64_t kConceptShift = 0xffff'ffff'0000'0003ULL;
}  // namespace rng_tag

}  // namespace scaffpd
