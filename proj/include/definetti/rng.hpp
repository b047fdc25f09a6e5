#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include <boost/random/normal_distribution.hpp>

namespace definetti {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The key holds the master seed and the counter's upper half the path index,
/// so every path owns an independent stream that does not depend on which
/// worker simulates it or in what order.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using counter_type = std::array<std::uint32_t, 4>;
  using key_type = std::array<std::uint32_t, 2>;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  Philox4x32(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        counter_{0, 0, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

  result_type operator()() {
    if (index_ == 4) {
      block_ = generate(counter_, key_);
      increment();
      index_ = 0;
    }
    return block_[index_++];
  }

  /// Skips `blocks` 128-bit blocks ahead in the stream.
  void discard_blocks(std::uint64_t blocks) {
    const std::uint64_t low = (static_cast<std::uint64_t>(counter_[1]) << 32 | counter_[0]) + blocks;
    counter_[0] = static_cast<std::uint32_t>(low);
    counter_[1] = static_cast<std::uint32_t>(low >> 32);
    index_ = 4;
  }

  /// One application of the bijection; exposed for known-answer tests.
  static counter_type generate(counter_type ctr, key_type key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

  void increment() {
    if (++counter_[0] == 0) {
      ++counter_[1];
    }
  }

  key_type key_;
  counter_type counter_;
  counter_type block_{};
  int index_ = 4;
};

/// Per-path random source: standard normals for the Brownian increments and
/// uniforms for the Bernoulli type and the randomisation variable.
///
/// Block 0 of each stream is reserved for the two game-level uniforms so that
/// they do not depend on the number of time steps drawn afterwards.
class PathStream {
 public:
  PathStream(std::uint64_t seed, std::uint64_t path_index) : uniforms_(seed, path_index), normals_(seed, path_index) {
    const auto first = uniforms_();
    const auto second = uniforms_();
    const auto third = uniforms_();
    const auto fourth = uniforms_();
    type_uniform_ = to_open_unit(first, second);
    stop_uniform_ = to_open_unit(third, fourth);
    normals_.discard_blocks(1);
  }

  double normal() { return gaussian_(normals_); }

  /// Uniform on (0, 1) used to draw theta ~ Bernoulli(p).
  double type_uniform() const { return type_uniform_; }
  /// Uniform on (0, 1) compared against Gamma to realise the stopping time.
  double stop_uniform() const { return stop_uniform_; }

 private:
  static double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;  // 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  Philox4x32 uniforms_;
  Philox4x32 normals_;
  boost::random::normal_distribution<double> gaussian_;
  double type_uniform_ = 0.5;
  double stop_uniform_ = 0.5;
};

}  // namespace definetti
