#pragma once

#include <cstdint>
#include <random>

namespace mixlab {

// The repository fixes one normal-generation method so that fixtures are
// reproducible bit for bit:
//   * per-stream engine: std::mt19937_64 (output fully specified by the
//     standard), seeded by stream_seed(master_seed, stream_id);
//   * uniforms: top 53 bits scaled, shifted into (0,1] for the log argument;
//   * normals: Box-Muller, consuming exactly two 64-bit draws per pair,
//     pair emitted cos-component first.
// Identical (seed, stream_id, count) therefore reproduce identical samples.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives the engine seed for a substream.  Streams are decorrelated by
// hashing (master, stream_id) through two SplitMix64 steps.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream_id) {
  std::uint64_t state = master ^ (0xD1B54A32D192ED03ULL * (stream_id + 1));
  (void)splitmix64(state);
  return splitmix64(state);
}

class NormalStream {
 public:
  explicit NormalStream(std::uint64_t engine_seed) : eng_(engine_seed) {}

  double next() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = to_unit_positive(eng_());
    double u2 = to_unit(eng_());
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

 private:
  static double to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
  }
  static double to_unit_positive(std::uint64_t x) {
    return (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53;
  }

  std::mt19937_64 eng_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace mixlab
