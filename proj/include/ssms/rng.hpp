#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ssms {

// splitmix64 step; used to derive independent stream seeds from one master
// seed so that per-chain streams stay identical regardless of thread count.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives a stream seed from (master, tag, index). The tag keeps streams for
// different purposes (starts, chain k, side 2) disjoint by construction.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t index = 0) {
  std::uint64_t s = master;
  splitmix64(s);
  for (unsigned char c : tag) {
    s ^= c;
    splitmix64(s);
  }
  s ^= 0x9e3779b97f4a7c15ULL * (index + 1);
  std::uint64_t t = s;
  return splitmix64(t);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return uni_(engine_); }
  double normal() { return norm_(engine_); }
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uni_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
};

}  // namespace ssms
