#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lvs/rng.hpp"

namespace lvs {

/// Speed of light in meters per nanosecond. Units are fixed project-wide:
/// meters for space, nanoseconds for time.
inline constexpr double kSpeedOfLightMPerNs = 0.299792458;

struct BaseStation {
  int id = 0;  // 1-based index within the scenario
  double x = 0.0;
  double y = 0.0;
};

enum class LocationRole { Claimed, True };

struct Location {
  double x = 0.0;
  double y = 0.0;
  LocationRole role = LocationRole::Claimed;
};

struct Rect {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }
  bool contains(double x, double y) const {
    return x >= xmin && x <= xmax && y >= ymin && y <= ymax;
  }
};

/// Planar deployment: N verifier base stations plus the rectangle the
/// claimant vehicles report locations from.
struct Scenario {
  std::vector<BaseStation> base_stations;
  Rect claimant_region;
  double speed_of_light = kSpeedOfLightMPerNs;

  std::size_t n_bs() const { return base_stations.size(); }

  /// Throws std::invalid_argument when any structural invariant is broken:
  /// fewer than 2 BSs, non-finite or duplicate BS positions, empty claimant
  /// region, or a region outside the BS bounding box.
  void validate() const {
    if (base_stations.size() < 2) {
      throw std::invalid_argument("scenario needs at least 2 base stations");
    }
    for (const auto& bs : base_stations) {
      if (!std::isfinite(bs.x) || !std::isfinite(bs.y)) {
        throw std::invalid_argument("base station position must be finite");
      }
    }
    for (std::size_t i = 0; i < base_stations.size(); ++i) {
      for (std::size_t j = i + 1; j < base_stations.size(); ++j) {
        if (base_stations[i].x == base_stations[j].x &&
            base_stations[i].y == base_stations[j].y) {
          throw std::invalid_argument("base station positions must be pairwise distinct");
        }
      }
    }
    if (!(claimant_region.width() > 0.0) || !(claimant_region.height() > 0.0)) {
      throw std::invalid_argument("claimant region must have positive area");
    }
    Rect bbox{std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity(),
              -std::numeric_limits<double>::infinity(),
              -std::numeric_limits<double>::infinity()};
    for (const auto& bs : base_stations) {
      bbox.xmin = std::min(bbox.xmin, bs.x);
      bbox.ymin = std::min(bbox.ymin, bs.y);
      bbox.xmax = std::max(bbox.xmax, bs.x);
      bbox.ymax = std::max(bbox.ymax, bs.y);
    }
    if (claimant_region.xmin < bbox.xmin || claimant_region.xmax > bbox.xmax ||
        claimant_region.ymin < bbox.ymin || claimant_region.ymax > bbox.ymax) {
      throw std::invalid_argument("claimant region must lie within the BS bounding box");
    }
    if (!(speed_of_light > 0.0)) {
      throw std::invalid_argument("speed of light must be > 0");
    }
  }

  /// 4 BSs at the corners of a 1000 m x 500 m deployment; claimants report
  /// from the central 500 m x 500 m strip.
  static Scenario corners4() {
    Scenario sc;
    sc.base_stations = {{1, 0.0, 0.0},
                        {2, 1000.0, 0.0},
                        {3, 0.0, 500.0},
                        {4, 1000.0, 500.0}};
    sc.claimant_region = {250.0, 0.0, 750.0, 500.0};
    return sc;
  }

  /// corners4 plus mid-edge BSs at (500,0) and (500,500).
  static Scenario corners6() {
    Scenario sc = corners4();
    sc.base_stations.push_back({5, 500.0, 0.0});
    sc.base_stations.push_back({6, 500.0, 500.0});
    return sc;
  }
};

/// Euclidean distance in meters between a location and a base station.
inline double distance(const Location& loc, const BaseStation& bs) {
  return std::hypot(loc.x - bs.x, loc.y - bs.y);
}

/// Noiseless ToA vector U (ns) anticipated from the claimed location:
/// U_i = distance(claimed, bs_i) / c, in BS index order.
inline std::vector<double> claimed_toa_vector(const Scenario& sc,
                                              const Location& claimed) {
  std::vector<double> u;
  u.reserve(sc.base_stations.size());
  for (const auto& bs : sc.base_stations) {
    u.push_back(distance(claimed, bs) / sc.speed_of_light);
  }
  return u;
}

/// Constant vector holding the mean of the input. An all-equal input maps to
/// itself exactly, so a geometry-symmetric claim yields V identical to U bit
/// for bit.
inline std::vector<double> constant_mean_vector(const std::vector<double>& u) {
  if (u.empty()) {
    throw std::invalid_argument("cannot take the mean of an empty vector");
  }
  bool all_equal = true;
  for (double ui : u) {
    if (ui != u.front()) {
      all_equal = false;
      break;
    }
  }
  if (all_equal) return u;
  double sum = 0.0;
  for (double ui : u) sum += ui;
  return std::vector<double>(u.size(), sum / static_cast<double>(u.size()));
}

/// Mean ToA vector V of a far-field attacker spoofing the claimed location:
/// constant across BSs, equal to mean(U). In the far-field limit the
/// attacker's per-BS propagation delays coincide and its timing offset is
/// tuned so the common value matches the claimed timings on average; neither
/// piece is individually observable here.
inline std::vector<double> attacker_mean_vector(const Scenario& sc,
                                                const Location& claimed) {
  return constant_mean_vector(claimed_toa_vector(sc, claimed));
}

/// Diagnostic route to the attacker mean vector: explicit true location plus
/// transmit offset, V_i = distance(true, bs_i)/c + tx_offset. Exists so tests
/// can cross-check the collapsed far-field form against the two-term one.
inline std::vector<double> attacker_vector_from_true(const Scenario& sc,
                                                     const Location& true_loc,
                                                     double tx_offset_ns) {
  std::vector<double> v;
  v.reserve(sc.base_stations.size());
  for (const auto& bs : sc.base_stations) {
    v.push_back(distance(true_loc, bs) / sc.speed_of_light + tx_offset_ns);
  }
  return v;
}

/// Uniform draw over the claimant region; consumes x then y.
inline Location sample_claimed_location(const Scenario& sc, Rng& rng) {
  Location loc;
  loc.x = rng.uniform_in(sc.claimant_region.xmin, sc.claimant_region.xmax);
  loc.y = rng.uniform_in(sc.claimant_region.ymin, sc.claimant_region.ymax);
  loc.role = LocationRole::Claimed;
  return loc;
}

// --- JSON serialization -----------------------------------------------------
// {"bs": [[x,y],...], "region": [xmin,ymin,xmax,ymax]}, coordinates in meters.

inline nlohmann::json scenario_to_json(const Scenario& sc) {
  nlohmann::json j;
  j["bs"] = nlohmann::json::array();
  for (const auto& bs : sc.base_stations) {
    j["bs"].push_back({bs.x, bs.y});
  }
  j["region"] = {sc.claimant_region.xmin, sc.claimant_region.ymin,
                 sc.claimant_region.xmax, sc.claimant_region.ymax};
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario sc;
  if (!j.contains("bs") || !j.contains("region")) {
    throw std::invalid_argument("scenario JSON needs 'bs' and 'region'");
  }
  int next_id = 1;
  for (const auto& pos : j.at("bs")) {
    if (!pos.is_array() || pos.size() != 2) {
      throw std::invalid_argument("scenario 'bs' entries must be [x,y] pairs");
    }
    sc.base_stations.push_back(
        {next_id++, pos.at(0).get<double>(), pos.at(1).get<double>()});
  }
  const auto& region = j.at("region");
  if (!region.is_array() || region.size() != 4) {
    throw std::invalid_argument("scenario 'region' must be [xmin,ymin,xmax,ymax]");
  }
  sc.claimant_region = {region.at(0).get<double>(), region.at(1).get<double>(),
                        region.at(2).get<double>(), region.at(3).get<double>()};
  sc.validate();
  return sc;
}

}  // namespace lvs
