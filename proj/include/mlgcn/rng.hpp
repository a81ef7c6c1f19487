#pragma once

#include <cstdint>
#include <initializer_list>

namespace mlgcn {

// Small counter-based PRNG (splitmix64). Used instead of the <random> engines
// because the standard distributions are implementation-defined: seeded runs
// here must be bit-reproducible across compilers, and training needs cheap
// substreams derived from integer keys such as (seed, epoch, node, pair).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
  }

  // Unbiased integer in [0, bound); bound must be positive.
  std::uint64_t next_below(std::uint64_t bound);

  // Standard normal deviate (Box-Muller, second value of each pair cached).
  double next_normal();

 private:
  std::uint64_t state_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

// Collapses an ordered integer key into a seed for an independent substream.
std::uint64_t derive_stream(std::initializer_list<std::uint64_t> key);

// Every consumer of randomness owns one tag so substreams never collide.
enum StreamTag : std::uint64_t {
  kStreamInitW0 = 1,
  kStreamInitW1 = 2,
  kStreamInitZ = 3,
  kStreamNodeLabelNegatives = 4,
  kStreamLabelLabelNegatives = 5,
  kStreamSynthLabels = 6,
  kStreamSynthEdges = 7,
  kStreamSynthFeatures = 8,
  kStreamSynthMasks = 9,
  kStreamSweepSubsample = 10,
};

}  // namespace mlgcn
