#include "loadshift/scenario/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "loadshift/core/errors.hpp"

namespace loadshift::scenario {

std::uint64_t Rng::derive(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master ^ (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::normal() {
  double u1 = static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

int Rng::uniform_int(int n) {
  if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
  return static_cast<int>(gen_() % static_cast<std::uint64_t>(n));
}

namespace {

const std::vector<double>& shape_for(const std::string& category) {
  static const std::vector<double> residential = {
      0.52, 0.48, 0.45, 0.44, 0.45, 0.50, 0.62, 0.72, 0.70, 0.64, 0.60, 0.58,
      0.57, 0.56, 0.58, 0.63, 0.72, 0.85, 0.95, 1.00, 0.97, 0.88, 0.74, 0.60};
  static const std::vector<double> commercial = {
      0.38, 0.36, 0.35, 0.35, 0.36, 0.40, 0.52, 0.70, 0.88, 0.97, 1.00, 1.00,
      0.98, 0.98, 0.99, 0.97, 0.92, 0.82, 0.70, 0.58, 0.50, 0.45, 0.42, 0.40};
  static const std::vector<double> industrial = {
      0.80, 0.78, 0.78, 0.78, 0.80, 0.84, 0.90, 0.96, 1.00, 1.00, 0.99, 0.98,
      0.97, 0.98, 0.99, 1.00, 0.98, 0.94, 0.90, 0.88, 0.86, 0.84, 0.82, 0.80};
  static const std::vector<double> pv = {
      0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.05, 0.18, 0.38, 0.60, 0.80, 0.94,
      1.00, 0.98, 0.88, 0.72, 0.52, 0.30, 0.12, 0.02, 0.00, 0.00, 0.00, 0.00};
  if (category == "residential") return residential;
  if (category == "commercial") return commercial;
  if (category == "industrial") return industrial;
  if (category == "pv") return pv;
  throw ConfigError("unknown profile category: " + category);
}

}  // namespace

const std::vector<std::string>& builtin_categories() {
  static const std::vector<std::string> names = {"residential", "commercial",
                                                 "industrial", "pv"};
  return names;
}

ProfileTemplate builtin_template(const std::string& category,
                                 double anchor_mw) {
  ProfileTemplate tpl;
  tpl.category = category;
  tpl.shape = shape_for(category);
  tpl.anchor_mw = anchor_mw;
  return tpl;
}

std::vector<double> realize_series(const ProfileTemplate& tpl, int slots,
                                   double sigma, Rng& rng,
                                   double slot_hours) {
  if (slots < 0) throw ConfigError("realize_series: negative slot count");
  if (sigma < 0) throw ConfigError("realize_series: negative sigma");
  if (slot_hours <= 0) throw ConfigError("realize_series: slot_hours <= 0");
  if (tpl.shape.size() != 24)
    throw ConfigError("profile shape must have 24 hourly factors, got " +
                      std::to_string(tpl.shape.size()));
  for (double f : tpl.shape)
    if (f < 0.0 || f > 1.0)
      throw ConfigError("profile shape factor outside [0, 1]");

  std::vector<double> out(static_cast<size_t>(slots));
  for (int t = 0; t < slots; ++t) {
    int hour = static_cast<int>(std::floor(t * slot_hours)) % 24;
    double eps = sigma * rng.normal();
    out[static_cast<size_t>(t)] =
        tpl.anchor_mw * tpl.shape[static_cast<size_t>(hour)] *
        std::max(0.0, 1.0 + eps);
  }
  return out;
}

std::vector<int> sample_placement(const grid::NetworkCase& net, int count,
                                  std::uint64_t seed) {
  if (count < 0) throw ConfigError("sample_placement: negative count");
  std::vector<int> candidates;
  for (const auto& bus : net.buses) {
    if (bus.type != grid::BusType::pq) continue;
    bool hosts_gen = false;
    for (const auto& gen : net.generators)
      if (gen.in_service && gen.bus == bus.id) hosts_gen = true;
    if (!hosts_gen) candidates.push_back(bus.id);
  }
  if (count > static_cast<int>(candidates.size()))
    throw StructuralError(
        "sample_placement: requested " + std::to_string(count) +
        " sites but only " + std::to_string(candidates.size()) +
        " load buses without generation exist");

  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    int j = i + rng.uniform_int(static_cast<int>(candidates.size()) - i);
    std::swap(candidates[static_cast<size_t>(i)],
              candidates[static_cast<size_t>(j)]);
  }
  candidates.resize(static_cast<size_t>(count));
  return candidates;
}

}  // namespace loadshift::scenario
