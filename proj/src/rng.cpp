#include "coupledpf/rng.hpp"

#include <cmath>
#include <numbers>

namespace coupledpf {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t hash_key(const SeedKey& key) {
  std::uint64_t h = splitmix64(key.seed);
  h = splitmix64(h ^ splitmix64(key.replicate ^ 0x5851F42D4C957F2Dull));
  h = splitmix64(h ^ splitmix64(key.sweep ^ 0x14057B7EF767814Full));
  return h;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kPhiloxW0;
    k[1] += kPhiloxW1;
  }
  return c;
}

Stream::Stream(const SeedKey& key) {
  const std::uint64_t h = hash_key(key);
  key_ = {static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  // counter = (block, particle, time, role); block advances as the stream is read
  counter_ = {0u, key.particle, key.time, static_cast<std::uint32_t>(key.role)};
}

void Stream::refill() {
  buffer_ = philox4x32(counter_, key_);
  ++counter_[0];
  used_ = 0;
}

std::uint32_t Stream::next_u32() {
  if (used_ == 4) refill();
  return buffer_[used_++];
}

double Stream::uniform() {
  const std::uint32_t a = next_u32() >> 5;
  const std::uint32_t b = next_u32() >> 6;
  return (a * 67108864.0 + b) * (1.0 / 9007199254740992.0);
}

double Stream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::vector<double> unit_normals(const SeedKey& key, std::size_t n) {
  std::vector<double> out(n);
  Stream stream(key);
  for (auto& v : out) v = stream.normal();
  return out;
}

std::vector<double> uniforms(const SeedKey& key, std::size_t n) {
  std::vector<double> out(n);
  Stream stream(key);
  for (auto& v : out) v = stream.uniform();
  return out;
}

std::vector<double> crn_shift(ConstSpan u, double rho, ConstSpan xi) {
  detail::require_dims(u.size() == xi.size(), "crn_shift: U and xi lengths differ");
  detail::require(rho >= 0.0 && rho <= 1.0, "crn_shift: rho must lie in [0, 1]");
  const double scale = std::sqrt(1.0 - rho * rho);
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = rho * u[i] + scale * xi[i];
  return out;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace coupledpf
