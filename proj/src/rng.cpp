#include "hulc/rng.hpp"

#include <cmath>
#include <numbers>

namespace hulc {

RngStream::RngStream(std::uint64_t base_seed, std::uint64_t stream_id)
    : base_seed_(base_seed), stream_id_(stream_id) {
  key_ = mix64(mix64(base_seed + kGoldenGamma) ^ mix64(stream_id + kStreamSalt));
}

RngStream RngStream::child(std::uint64_t id) const { return RngStream(key_, id); }

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGoldenGamma);
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace hulc
