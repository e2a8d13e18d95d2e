#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "loadshift/grid/case.hpp"

namespace loadshift::scenario {

/// Deterministic random source for scenario sampling.  Every consumer gets
/// its own stream derived from (master seed, stream index) so adding or
/// removing one consumer never perturbs the draws seen by another.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  /// Mixes a master seed and a stream index into an independent stream
  /// seed (splitmix64 finalizer over master xor index*odd-constant).
  static std::uint64_t derive(std::uint64_t master, std::uint64_t stream);

  static Rng stream(std::uint64_t master, std::uint64_t stream_index) {
    return Rng(derive(master, stream_index));
  }

  std::uint64_t seed() const { return seed_; }

  /// Uniform draw in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal draw (Box-Muller, one value per call).
  double normal();

  /// Uniform integer in [0, n).  Requires n > 0.
  int uniform_int(int n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

/// A daily load shape: 24 hourly factors normalized so the peak equals 1,
/// scaled by an anchor magnitude.  Realized series repeat the day across
/// the horizon with optional multiplicative Gaussian noise.
struct ProfileTemplate {
  std::string category;
  std::vector<double> shape;  // 24 factors in [0, 1], max exactly 1
  double anchor_mw = 0.0;
};

/// Built-in shape categories: "residential" (evening peak), "commercial"
/// (business-hours plateau), "industrial" (flat with day shifts), "pv"
/// (midday bell, zero at night).
const std::vector<std::string>& builtin_categories();
ProfileTemplate builtin_template(const std::string& category,
                                 double anchor_mw);

/// Realizes `slots` values: anchor * shape[hour-of-day] * max(0, 1 + eps)
/// with eps ~ N(0, sigma^2) drawn per slot.  sigma = 0 reproduces the
/// template exactly.  Slots map to hours via slot_hours.
std::vector<double> realize_series(const ProfileTemplate& tpl, int slots,
                                   double sigma, Rng& rng,
                                   double slot_hours = 1.0);

/// Samples `count` distinct candidate buses for data-center placement:
/// load buses (PQ) with no in-service generator attached.  The draw is a
/// partial Fisher-Yates shuffle over the candidates in case order, so the
/// same seed always yields the same placement and `count` equal to the
/// candidate total yields a permutation of the full set.
std::vector<int> sample_placement(const grid::NetworkCase& net, int count,
                                  std::uint64_t seed);

}  // namespace loadshift::scenario
