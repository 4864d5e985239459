// Copyright 2026 The SurvONS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SURVONS_RNG_HPP
#define SURVONS_RNG_HPP

#include <array>
#include <cstdint>

namespace survons {

/// Philox4x32-10 counter-based generator.
///
/// The 64-bit key selects a stream; the 128-bit counter indexes blocks of four
/// 32-bit outputs inside it. `split(id)` derives an independent child stream
/// by hashing (key, id) into a new key, so replication r of a run can be
/// simulated from `Philox(seed).split(r)` on any thread with identical output.
///
/// Variate transforms (uniform, exponential, normal) are implemented here
/// rather than taken from <random> so that streams are bit-identical across
/// standard library implementations.
class Philox {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox(std::uint64_t seed = 0);
  Philox(Key key, Block counter);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xFFFFFFFFu; }

  result_type operator()();
  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform();
  /// Exp(rate) by inversion.
  double exponential(double rate);
  /// Standard normal (Box-Muller, caches the second variate).
  double normal();

  /// Independent child stream keyed by (this key, stream_id).
  Philox split(std::uint64_t stream_id) const;

  const Key& key() const { return key_; }

  /// Raw block function, exposed for known-answer tests.
  static Block bijection(Block counter, Key key);

 private:
  void refill();

  Key key_;
  Block counter_{};
  Block buffer_{};
  int buffered_ = 0;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace survons

#endif  // SURVONS_RNG_HPP
