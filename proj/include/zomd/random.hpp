#pragma once

#include <cstdint>
#include <limits>
#include <random>

#include <Eigen/Core>

namespace zomd {

using Vector = Eigen::VectorXd;

/// Keyed random stream with named sub-streams.
///
/// Every stream is identified by a 64-bit key. `substream(id)` derives a
/// child key by hashing, so a tree such as master -> trial -> iteration ->
/// call-index gives each oracle call its own independent, replayable source.
/// The generator itself is SplitMix64, which is cheap to seed; that matters
/// because a new stream is created for every call of every iteration.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t key) : key_(key), state_(Mix(key ^ 0x6a09e667f3bcc909ULL)) {}

  RandomStream substream(std::uint64_t id) const {
    return RandomStream(Mix(key_ + 0x9e3779b97f4a7c15ULL * (id + 1)) ^ Mix(id ^ 0xbb67ae8584caa73bULL));
  }

  std::uint64_t key() const { return key_; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return Mix(state_);
  }

  double normal() { return normal_(*this); }

  double uniform() { return std::generate_canonical<double, 53>(*this); }

  Vector normal_vector(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

 private:
  static std::uint64_t Mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t state_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Sub-stream ids used inside one iteration of the solver.
enum class CallStream : std::uint64_t { kDirection = 0, kFarNoise = 1, kNearNoise = 2 };

inline RandomStream call_stream(const RandomStream& iteration, CallStream which) {
  return iteration.substream(static_cast<std::uint64_t>(which));
}

}  // namespace zomd
