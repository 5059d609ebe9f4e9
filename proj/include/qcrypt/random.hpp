#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qcrypt/errors.hpp"

namespace qcrypt {

// Uniform randomness consumed by every stochastic operation. Protocol code
// never owns a generator; callers inject one source per role (Alice, Bob,
// channel, eavesdropper) so any run can be replayed from a scripted sequence
// of choices.
class RandomSource {
 public:
  virtual ~RandomSource() = default;

  // Uniform double in [0, 1).
  virtual double uniform01() = 0;

  // Uniform bit: 0 when the underlying draw is < 0.5. Exactly one draw.
  int bit() { return uniform01() < 0.5 ? 0 : 1; }

  // Uniform integer in [0, n), n > 0. Exactly one draw.
  int uniform_int(int n);

  // k distinct indices from [0, n), in selection order. Fixed algorithm so
  // scripted replays can target specific picks: k rounds, each drawing
  // j = uniform_int(m) over the m indices not yet taken, listed ascending,
  // and removing the j-th.
  std::vector<int> sample_without_replacement(int n, int k);
};

// Deterministic pseudo-random stream. uniform01 maps the top 53 bits of each
// 64-bit output onto [0, 1) so the draw sequence is identical on every
// platform for a given seed.
class SeededRng final : public RandomSource {
 public:
  explicit SeededRng(std::uint64_t seed) : gen_(seed) {}

  double uniform01() override {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 gen_;
};

// Replays a fixed list of draws; throws ScriptExhaustedError when asked for
// more than it holds. push_bit encodes a bit as 0.25 / 0.75, which lands the
// draw in the intended half for bit() and in the intended outcome bucket for
// any measurement whose branch probabilities are 1/2 or 1.
class ScriptedSource final : public RandomSource {
 public:
  ScriptedSource() = default;
  explicit ScriptedSource(std::vector<double> draws) : draws_(std::move(draws)) {}

  void push(double u) { draws_.push_back(u); }
  void push_bit(int b) { draws_.push_back(b ? 0.75 : 0.25); }

  std::size_t remaining() const { return draws_.size() - next_; }

  double uniform01() override {
    if (next_ >= draws_.size())
      throw ScriptExhaustedError("scripted random source exhausted");
    return draws_[next_++];
  }

 private:
  std::vector<double> draws_;
  std::size_t next_ = 0;
};

// SplitMix64 mixing step; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

// Seed for sub-stream `stream` of a master seed. Distinct streams (per role,
// per trial) never share generator state.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace qcrypt
