#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "coupledpf/types.hpp"

namespace coupledpf {

/// Purpose of a random stream. Streams with different roles never overlap.
enum class Role : std::uint8_t {
  init,
  propagate,
  measure,
  resample,
  mcmc,
  truncation,
};

/// Address of a random stream: (seed, replicate, sweep, time, particle, role).
///
/// `sweep` separates repeated filter runs inside one replicate (CPF iterations,
/// MCMC iterations). Identical keys give identical streams; any differing field
/// gives a statistically independent stream.
struct SeedKey {
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
  std::uint64_t sweep = 0;
  std::uint32_t time = 0;
  std::uint32_t particle = 0;
  Role role = Role::init;

  [[nodiscard]] SeedKey with_replicate(std::uint64_t r) const { auto k = *this; k.replicate = r; return k; }
  [[nodiscard]] SeedKey with_sweep(std::uint64_t s) const { auto k = *this; k.sweep = s; return k; }
  [[nodiscard]] SeedKey with_time(std::uint32_t t) const { auto k = *this; k.time = t; return k; }
  [[nodiscard]] SeedKey with_particle(std::uint32_t p) const { auto k = *this; k.particle = p; return k; }
  [[nodiscard]] SeedKey with_role(Role r) const { auto k = *this; k.role = r; return k; }

  friend bool operator==(const SeedKey&, const SeedKey&) = default;
};

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Sequential reader over the counter-based stream addressed by a SeedKey.
/// Cheap to construct; no state is shared between streams.
class Stream {
 public:
  explicit Stream(const SeedKey& key);

  std::uint32_t next_u32();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via the Box-Muller transform.
  double normal();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// n standard normal variates, deterministic in the key.
std::vector<double> unit_normals(const SeedKey& key, std::size_t n);

/// n uniforms on [0, 1), deterministic in the key.
std::vector<double> uniforms(const SeedKey& key, std::size_t n);

/// Autoregressive refresh rho * U + sqrt(1 - rho^2) * xi; leaves N(0, I) invariant.
std::vector<double> crn_shift(ConstSpan u, double rho, ConstSpan xi);

/// Standard normal CDF, used to turn a process-noise coordinate into a uniform.
double normal_cdf(double z);

}  // namespace coupledpf
