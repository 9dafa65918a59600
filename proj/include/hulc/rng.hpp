#pragma once

#include <cstdint>

namespace hulc {

/// Counter-based random stream.
///
/// A stream is identified by `(base_seed, stream_id)`; the n-th 64-bit draw
/// is a pure function of that pair and n, so results never depend on which
/// thread consumes a stream or in what order streams are created. Draw n is
/// `mix64(key + (n + 1) * kGoldenGamma)` (the SplitMix64 output function),
/// where `key` is derived from the identifying pair by two rounds of `mix64`.
///
/// Child streams (`child(id)`) are keyed by the parent key and `id`, which
/// gives the harness its (replication, bucket, role) hierarchy.
class RngStream {
 public:
  static constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kStreamSalt = 0xD1B54A32D192ED03ULL;

  RngStream(std::uint64_t base_seed, std::uint64_t stream_id);

  /// Independent stream keyed by this stream's key and `id`.
  [[nodiscard]] RngStream child(std::uint64_t id) const;

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal via Box-Muller; consumes exactly two 64-bit draws.
  double normal();

  std::uint64_t base_seed() const { return base_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t base_seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace hulc
