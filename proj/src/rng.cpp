#include "brier/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace brier {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t h = fnv1a(kFnvOffset, text.data(), text.size());
  return splitmix64(h);
}

std::uint64_t derive_stream_id(std::uint64_t master_seed, std::uint64_t cell_key,
                               std::string_view stage) {
  std::uint64_t h = kFnvOffset;
  h = fnv1a(h, &master_seed, sizeof(master_seed));
  h = fnv1a(h, &cell_key, sizeof(cell_key));
  h = fnv1a(h, stage.data(), stage.size());
  return splitmix64(h);
}

RngStream::RngStream(std::uint64_t seed) {
  for (auto& s : s_) s = splitmix64(seed);
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

bool RngStream::bernoulli(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("bernoulli: p outside [0,1]");
  return uniform() < p;
}

int RngStream::categorical(std::span<const double> probs) {
  if (probs.empty()) throw std::invalid_argument("categorical: empty support");
  const double u = uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;  // rounding residue
}

void RngStream::dirichlet_unit(std::span<double> out) {
  double sum = 0.0;
  for (auto& x : out) {
    // Exp(1) draws normalized; 1-u keeps the argument strictly positive.
    x = -std::log(1.0 - uniform());
    if (x <= 0.0) x = 1e-300;
    sum += x;
  }
  for (auto& x : out) x /= sum;
}

}  // namespace brier
