#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lvs/metrics.hpp"
#include "lvs/rng.hpp"
#include "lvs/scenario.hpp"

namespace lvs {

/// Noise model of the ToA channel, all values in nanoseconds.
///
/// nlos_std is the exponential NLoS bias mean (= its standard deviation,
/// = 1/rate); 0 disables the bias. attacker_common_bias_std adds a single
/// per-sample exponential bias common to all BSs for a non-calibrating
/// attacker; the default 0 models an attacker whose timing offset already
/// absorbs its own NLoS delay.
struct ChannelParams {
  double thermal_noise_std = 300.0;
  double nlos_std = 0.0;
  double attacker_common_bias_std = 0.0;

  void validate() const {
    if (!(thermal_noise_std > 0.0) || !std::isfinite(thermal_noise_std)) {
      throw std::invalid_argument("thermal_noise_std must be > 0");
    }
    if (!(nlos_std >= 0.0) || !std::isfinite(nlos_std)) {
      throw std::invalid_argument("nlos_std must be >= 0");
    }
    if (!(attacker_common_bias_std >= 0.0) ||
        !std::isfinite(attacker_common_bias_std)) {
      throw std::invalid_argument("attacker_common_bias_std must be >= 0");
    }
  }
};

struct LabeledSample {
  Location claimed;
  std::vector<double> claimed_toa;   // U, ns
  std::vector<double> observed_toa;  // Y, ns
  Verdict label = Verdict::Legitimate;
};

struct Dataset {
  std::vector<LabeledSample> samples;
  ChannelParams params;
  Scenario scenario;
  std::uint64_t seed = 0;
  double malicious_fraction = 0.0;

  std::size_t size() const { return samples.size(); }

  std::size_t malicious_count() const {
    std::size_t n = 0;
    for (const auto& s : samples) n += s.label == Verdict::Malicious ? 1 : 0;
    return n;
  }

  std::vector<Verdict> labels() const {
    std::vector<Verdict> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.label);
    return out;
  }
};

/// Exponential draw with the given rate (1/ns); thin wrapper kept for the
/// channel vocabulary. Throws on rate <= 0.
inline double sample_exponential(double rate, Rng& rng) {
  return rng.exponential(rate);
}

/// Observation from a legitimate vehicle at its claimed location:
/// Y_i = U_i + phi_i + X_i with phi_i i.i.d. exponential(mean = nlos_std)
/// and X_i i.i.d. Gaussian(0, thermal_noise_std^2), independent across BSs.
/// Draw order per BS: phi (when nlos_std > 0), then X.
inline std::vector<double> observe_legitimate(const Scenario& sc,
                                              const ChannelParams& params,
                                              const Location& claimed,
                                              Rng& rng) {
  params.validate();
  std::vector<double> y = claimed_toa_vector(sc, claimed);
  for (double& yi : y) {
    if (params.nlos_std > 0.0) {
      yi += rng.exponential(1.0 / params.nlos_std);
    }
    yi += rng.gaussian(0.0, params.thermal_noise_std);
  }
  return y;
}

/// Observation from a far-field spoofer of the claimed location:
/// Y_i = mean(U) + b + X_i where b is one common exponential bias per sample
/// (mean = attacker_common_bias_std; b = 0 under the default of 0).
/// Draw order: b (when enabled), then X per BS.
inline std::vector<double> observe_malicious(const Scenario& sc,
                                             const ChannelParams& params,
                                             const Location& claimed,
                                             Rng& rng) {
  params.validate();
  std::vector<double> y = attacker_mean_vector(sc, claimed);
  double common_bias = 0.0;
  if (params.attacker_common_bias_std > 0.0) {
    common_bias = rng.exponential(1.0 / params.attacker_common_bias_std);
  }
  for (double& yi : y) {
    yi += common_bias + rng.gaussian(0.0, params.thermal_noise_std);
  }
  return y;
}

/// Synthesizes n_samples labeled samples. Per sample the stream is consumed
/// in a fixed order: label uniform, location (x,y), then the observation
/// draws; identical (seed, params, scenario) reproduce the dataset bit for
/// bit. Labels are i.i.d. Bernoulli(malicious_fraction), so sample order is
/// already randomized with respect to the label.
inline Dataset generate_dataset(const Scenario& sc, const ChannelParams& params,
                                std::size_t n_samples,
                                double malicious_fraction, Rng& rng,
                                std::uint64_t seed_for_record = 0) {
  sc.validate();
  params.validate();
  if (n_samples < 1) {
    throw std::invalid_argument("n_samples must be >= 1");
  }
  if (!(malicious_fraction >= 0.0 && malicious_fraction <= 1.0)) {
    throw std::invalid_argument("malicious_fraction must lie in [0,1]");
  }

  Dataset ds;
  ds.params = params;
  ds.scenario = sc;
  ds.seed = seed_for_record;
  ds.malicious_fraction = malicious_fraction;
  ds.samples.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    LabeledSample s;
    s.label = rng.uniform() < malicious_fraction ? Verdict::Malicious
                                                 : Verdict::Legitimate;
    s.claimed = sample_claimed_location(sc, rng);
    s.claimed_toa = claimed_toa_vector(sc, s.claimed);
    s.observed_toa = s.label == Verdict::Malicious
                         ? observe_malicious(sc, params, s.claimed, rng)
                         : observe_legitimate(sc, params, s.claimed, rng);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

/// Convenience overload: owns the stream, records the seed in the dataset.
inline Dataset generate_dataset(const Scenario& sc, const ChannelParams& params,
                                std::size_t n_samples,
                                double malicious_fraction, std::uint64_t seed) {
  Rng rng(seed);
  return generate_dataset(sc, params, n_samples, malicious_fraction, rng, seed);
}

// --- file I/O ---------------------------------------------------------------

namespace detail {

/// Writes via a temp file in the same directory, then renames, so a partially
/// written file is never observable under the final name.
inline void atomic_write_file(const std::string& path,
                              const std::string& contents) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) {
    std::filesystem::create_directories(target.parent_path());
  }
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open for writing: " + tmp.string());
    }
    out << contents;
    if (!out.good()) {
      throw std::runtime_error("write failed: " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace detail

/// Dataset CSV: `idx,label,x_c,y_c,u_1..u_N,y_1..y_N`, coordinates and ToA to
/// 6 decimal places. Optional leading `#` comment lines carry provenance;
/// optional per-sample LRT decisions append an `lrt_decision` column.
inline void write_dataset_csv(const Dataset& ds, const std::string& path,
                              const std::vector<std::string>& comment_lines = {},
                              const std::vector<Verdict>* lrt_decisions = nullptr) {
  if (ds.samples.empty()) {
    throw std::invalid_argument("refusing to write empty dataset: " + path);
  }
  if (lrt_decisions && lrt_decisions->size() != ds.samples.size()) {
    throw std::invalid_argument("lrt_decisions length does not match dataset");
  }
  const std::size_t n_bs = ds.samples.front().claimed_toa.size();
  std::string out;
  for (const auto& line : comment_lines) {
    out += "# " + line + "\n";
  }
  out += "idx,label,x_c,y_c";
  for (std::size_t i = 1; i <= n_bs; ++i) out += ",u_" + std::to_string(i);
  for (std::size_t i = 1; i <= n_bs; ++i) out += ",y_" + std::to_string(i);
  if (lrt_decisions) out += ",lrt_decision";
  out += "\n";

  char buf[64];
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& s = ds.samples[i];
    if (s.claimed_toa.size() != n_bs || s.observed_toa.size() != n_bs) {
      throw std::invalid_argument("ragged dataset row at idx " + std::to_string(i));
    }
    out += std::to_string(i);
    out += ',' + std::to_string(static_cast<int>(s.label));
    std::snprintf(buf, sizeof(buf), ",%.6f,%.6f", s.claimed.x, s.claimed.y);
    out += buf;
    for (double u : s.claimed_toa) {
      std::snprintf(buf, sizeof(buf), ",%.6f", u);
      out += buf;
    }
    for (double y : s.observed_toa) {
      std::snprintf(buf, sizeof(buf), ",%.6f", y);
      out += buf;
    }
    if (lrt_decisions) {
      out += ',' + std::to_string(static_cast<int>((*lrt_decisions)[i]));
    }
    out += '\n';
  }
  detail::atomic_write_file(path, out);
}

/// Sidecar metadata for a dataset CSV.
struct DatasetMeta {
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double malicious_fraction = 0.0;
  double thermal_noise_std_ns = 0.0;
  double nlos_std_ns = 0.0;
  std::size_t n_bs = 0;
};

inline void write_dataset_meta(const Dataset& ds, const std::string& path) {
  nlohmann::json j;
  j["seed"] = ds.seed;
  j["n"] = ds.samples.size();
  j["malicious_fraction"] = ds.malicious_fraction;
  j["thermal_noise_std_ns"] = ds.params.thermal_noise_std;
  j["nlos_std_ns"] = ds.params.nlos_std;
  j["n_bs"] = ds.samples.empty() ? 0 : ds.samples.front().claimed_toa.size();
  detail::atomic_write_file(path, j.dump(2) + "\n");
}

inline DatasetMeta read_dataset_meta(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open dataset metadata: " + path);
  }
  nlohmann::json j = nlohmann::json::parse(in);
  DatasetMeta m;
  m.seed = j.at("seed").get<std::uint64_t>();
  m.n = j.at("n").get<std::size_t>();
  m.malicious_fraction = j.at("malicious_fraction").get<double>();
  m.thermal_noise_std_ns = j.at("thermal_noise_std_ns").get<double>();
  m.nlos_std_ns = j.at("nlos_std_ns").get<double>();
  m.n_bs = j.at("n_bs").get<std::size_t>();
  return m;
}

/// Reads a dataset CSV written by write_dataset_csv. Leading `#` comments and
/// a trailing lrt_decision column are tolerated. Channel parameters and the
/// scenario are not stored in the CSV and stay default-initialized.
inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open dataset CSV: " + path);
  }
  std::string line;
  // skip comments, find header
  do {
    if (!std::getline(in, line)) {
      throw std::runtime_error("dataset CSV has no header: " + path);
    }
  } while (!line.empty() && line[0] == '#');
  if (line.rfind("idx,label,x_c,y_c", 0) != 0) {
    throw std::runtime_error("unexpected dataset CSV header in " + path);
  }
  std::size_t n_cols = 1;
  for (char c : line) n_cols += c == ',' ? 1 : 0;
  const bool has_decision =
      line.size() >= 13 && line.substr(line.size() - 13) == ",lrt_decision";
  const std::size_t n_bs = (n_cols - 4 - (has_decision ? 1 : 0)) / 2;
  if (4 + 2 * n_bs + (has_decision ? 1 : 0) != n_cols || n_bs == 0) {
    throw std::runtime_error("malformed dataset CSV header in " + path);
  }

  Dataset ds;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<double> fields;
    while (std::getline(ss, field, ',')) {
      fields.push_back(std::stod(field));
    }
    if (fields.size() != n_cols) {
      throw std::runtime_error("malformed dataset CSV row in " + path);
    }
    LabeledSample s;
    s.label = fields[1] != 0.0 ? Verdict::Malicious : Verdict::Legitimate;
    s.claimed = {fields[2], fields[3], LocationRole::Claimed};
    s.claimed_toa.assign(fields.begin() + 4, fields.begin() + 4 + n_bs);
    s.observed_toa.assign(fields.begin() + 4 + n_bs,
                          fields.begin() + 4 + 2 * n_bs);
    ds.samples.push_back(std::move(s));
  }
  if (ds.samples.empty()) {
    throw std::runtime_error("dataset CSV has no rows: " + path);
  }
  return ds;
}

}  // namespace lvs
