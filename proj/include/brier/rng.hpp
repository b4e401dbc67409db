#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace brier {

// Stable 64-bit stream derivation: FNV-1a over (master_seed, cell_key, stage)
// followed by a splitmix64 finalizer. Platform independent, so a run is
// reproducible bit for bit from the config alone.
std::uint64_t derive_stream_id(std::uint64_t master_seed, std::uint64_t cell_key,
                               std::string_view stage);

// Stable hash of an arbitrary string, used to key cells by their parameters
// rather than by position in a sweep.
std::uint64_t stable_hash(std::string_view text);

// xoshiro256++ stream with hand-rolled distributions. The standard library
// distributions are implementation defined, which would break the
// byte-identical-output contract across toolchains.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();                     // [0, 1)
  double uniform(double lo, double hi);
  bool bernoulli(double p);
  int categorical(std::span<const double> probs);
  void dirichlet_unit(std::span<double> out);  // Dirichlet(1, ..., 1)

 private:
  std::uint64_t s_[4];
};

}  // namespace brier
