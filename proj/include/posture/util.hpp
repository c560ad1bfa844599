#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace posture {

// 64-bit FNV-1a. Used for content fingerprints; not cryptographic.
class Fnv1a {
 public:
  Fnv1a& update(std::string_view bytes) noexcept {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  std::uint64_t value() const noexcept { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string fingerprint_hex(std::string_view bytes);

// Shortest decimal that parses back to the same double.
std::string format_double(double v);

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seeded generator whose outputs are fully specified (mt19937_64 plus our own
// transforms), so streams are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  // Independent stream for sub-task `stream` of a run seeded with `master`.
  static Rng derive(std::uint64_t master, std::uint64_t stream) {
    return Rng(splitmix64(master ^ splitmix64(stream + 0x9e3779b97f4a7c15ULL)));
  }

  std::uint64_t next() { return engine_(); }
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  std::size_t below(std::size_t n);      // [0, n), unbiased
  double normal();                       // standard normal

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace posture
