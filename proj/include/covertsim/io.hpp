//
// Copyright 2026 The covertsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// File formats: JSON configs, factor tables and codebooks; CSV results.

#pragma once

#include "covertsim/analysis.hpp"
#include "covertsim/codebook.hpp"
#include "covertsim/duc.hpp"
#include "covertsim/experiment.hpp"

#include <nlohmann/json.hpp>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace covertsim {

/// Filesystem failures; message carries the path and the OS reason.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::ordered_json;

/// Shortest-safe round-trip formatting (17 significant digits).
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------- SystemParams

inline Json to_json(const SystemParams& p) {
  Json j;
  j["M"] = p.M;
  j["N"] = p.N;
  j["T"] = p.T;
  if (p.W) j["W"] = *p.W;
  j["B"] = p.B;
  j["K"] = p.K;
  j["snr_db_grid"] = p.snr_db_grid;
  j["alpha"] = p.alpha;
  j["I_max"] = p.I_max;
  if (p.overhead_target) j["overhead_target"] = *p.overhead_target;
  j["frames"] = p.frames;
  j["master_seed"] = p.master_seed;
  j["scheme"] = std::string(to_string(p.scheme));
  return j;
}

/// Parses a config object. Unknown keys are errors. `seed_given` reports
/// whether master_seed was present.
inline SystemParams params_from_json(const Json& j, bool* seed_given = nullptr) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {
      "M", "N", "T", "W", "B", "K", "snr_db_grid", "alpha", "I_max",
      "overhead_target", "frames", "master_seed", "scheme"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  SystemParams p;
  auto get_int = [&](const char* key, int& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer()) throw ConfigError(std::string(key) + " must be an integer");
    out = j[key].get<int>();
  };
  try {
    get_int("M", p.M);
    get_int("N", p.N);
    get_int("T", p.T);
    get_int("B", p.B);
    get_int("K", p.K);
    get_int("I_max", p.I_max);
    get_int("frames", p.frames);
    if (j.contains("W")) {
      int w = 0;
      get_int("W", w);
      p.W = w;
    } else {
      p.W.reset();
    }
    if (j.contains("snr_db_grid")) p.snr_db_grid = j["snr_db_grid"].get<std::vector<double>>();
    if (j.contains("alpha")) p.alpha = j["alpha"].get<double>();
    if (j.contains("overhead_target")) p.overhead_target = j["overhead_target"].get<double>();
    if (j.contains("master_seed")) {
      if (!j["master_seed"].is_number_integer()) throw ConfigError("master_seed must be an integer");
      p.master_seed = j["master_seed"].get<std::uint64_t>();
    }
    if (j.contains("scheme")) p.scheme = parse_scheme(j["scheme"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (seed_given) *seed_given = j.contains("master_seed");
  return p;
}

// ------------------------------------------------------------------ factors

inline Json to_json(const DucFactors& f) {
  Json j;
  j["B"] = f.bits;
  j["M"] = f.antennas();
  j["u"] = f.u;
  j["diversity_product"] = diversity_product(f);
  return j;
}

/// Reads {B, M, u[, diversity_product]}; rejects infeasible factors and a
/// stated diversity product that disagrees with the recomputed one.
inline DucFactors factors_from_json(const Json& j) {
  try {
    DucFactors f;
    f.bits = j.at("B").get<int>();
    f.u = j.at("u").get<std::vector<int>>();
    if (j.contains("M") && j["M"].get<int>() != f.antennas()) {
      throw ConfigError("factor JSON: M does not match length of u");
    }
    if (!f.feasible()) throw ConfigError("factor JSON: infeasible factors");
    if (j.contains("diversity_product")) {
      const double stated = j["diversity_product"].get<double>();
      if (std::abs(stated - diversity_product(f)) > 1e-9) {
        throw ConfigError("factor JSON: diversity_product does not match u");
      }
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed factor JSON: ") + e.what());
  }
}

// ----------------------------------------------------------------- codebook

/// Codewords as nested [row][col] arrays of [re, im] pairs.
inline Json to_json(const Codebook& cb) {
  Json j;
  j["scheme"] = std::string(to_string(cb.scheme));
  j["B"] = cb.bits;
  j["M"] = cb.antennas;
  j["cols"] = cb.cols;
  Json words = Json::array();
  for (const auto& w : cb.codewords) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      Json row = Json::array();
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        row.push_back(Json::array({w(r, c).real(), w(r, c).imag()}));
      }
      rows.push_back(std::move(row));
    }
    words.push_back(std::move(rows));
  }
  j["codewords"] = std::move(words);
  return j;
}

inline Codebook codebook_from_json(const Json& j) {
  try {
    Codebook cb;
    const auto scheme = j.at("scheme").get<std::string>();
    if (scheme == "DUC") {
      cb.scheme = Scheme::kDuc;
    } else if (scheme == "CMIMO") {
      cb.scheme = Scheme::kCmimo;
    } else {
      throw ConfigError("codebook JSON: unknown scheme '" + scheme + "'");
    }
    cb.bits = j.at("B").get<int>();
    cb.antennas = j.at("M").get<int>();
    cb.cols = j.at("cols").get<int>();
    for (const auto& w : j.at("codewords")) {
      ComplexMatrix x(cb.antennas, cb.cols);
      if (static_cast<int>(w.size()) != cb.antennas) {
        throw ConfigError("codebook JSON: codeword row count mismatch");
      }
      for (int r = 0; r < cb.antennas; ++r) {
        if (static_cast<int>(w[static_cast<std::size_t>(r)].size()) != cb.cols) {
          throw ConfigError("codebook JSON: codeword column count mismatch");
        }
        for (int c = 0; c < cb.cols; ++c) {
          const auto& z = w[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
          x(r, c) = {z.at(0).get<double>(), z.at(1).get<double>()};
        }
      }
      cb.codewords.push_back(std::move(x));
    }
    if (cb.codewords.size() != (std::size_t{1} << cb.bits)) {
      throw ConfigError("codebook JSON: expected 2^B codewords");
    }
    return cb;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed codebook JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------- file I/O

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "': " + std::strerror(errno));
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write '" + path.string() + "': " + std::strerror(errno));
  }
  out << text;
  out.flush();
  if (!out) {
    throw IoError("write failed for '" + path.string() + "': " + std::strerror(errno));
  }
}

inline Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

// --------------------------------------------------------------------- CSV

inline std::string ber_csv(const std::vector<BerRecord>& records) {
  std::string out = "scheme,snr_db,frames,bits_total,bit_errors,ber,ci_low,ci_high\n";
  for (const auto& r : records) {
    out += r.scheme + ',' + format_double(r.snr_db) + ',' + std::to_string(r.frames) +
           ',' + std::to_string(r.bits_total) + ',' + std::to_string(r.bit_errors) +
           ',' + format_double(r.ber) + ',' + format_double(r.ci_low) + ',' +
           format_double(r.ci_high) + '\n';
  }
  return out;
}

inline std::string ber_timing_csv(const std::vector<BerRecord>& records) {
  std::string out = "scheme,snr_db,frames,seconds\n";
  for (const auto& r : records) {
    out += r.scheme + ',' + format_double(r.snr_db) + ',' + std::to_string(r.frames) +
           ',' + format_double(r.seconds) + '\n';
  }
  return out;
}

inline std::string security_csv(const std::vector<SecurityPoint>& rows) {
  std::string out = "snr_db,M,kl,xi_min,xi_min_clamped\n";
  for (const auto& p : rows) {
    out += format_double(p.snr_db) + ',' + std::to_string(p.antennas) + ',' +
           format_double(p.kl) + ',' + format_double(p.xi_min) + ',' +
           format_double(p.xi_min_clamped) + '\n';
  }
  return out;
}

/// Long format: one row per (scheme, M).
inline std::string coding_gain_csv(const std::vector<CodingGainPoint>& rows) {
  std::string out = "scheme,M,gain,trials\n";
  for (const auto& p : rows) {
    const std::string m = std::to_string(p.antennas);
    out += "NGS," + m + ',' + format_double(p.ngs) + ',' + std::to_string(p.ngs_trials) + '\n';
    out += "CMIMO," + m + ',' + format_double(p.cmimo) + ',' + std::to_string(p.cmimo_keys) + '\n';
    out += "SPATIAL_MUX," + m + ',' + format_double(p.spatial_mux) + ",1\n";
  }
  return out;
}

/// Writes `csv` to path and `sidecar` (pretty JSON) next to it as
/// <stem>.params.json.
inline void emit_csv(const std::string& csv, const std::filesystem::path& path,
                     const Json& sidecar) {
  write_text_file(path, csv);
  std::filesystem::path side = path;
  side.replace_extension(".params.json");
  write_text_file(side, sidecar.dump(2) + "\n");
}

inline Json ber_sidecar(const SystemParams& p, const DucFactors& factors) {
  Json j;
  j["tool"] = "covertsim";
  j["version"] = std::string(kToolVersion);
  j["params"] = to_json(p);
  j["W"] = p.frame_blocks();
  if (p.scheme != ExperimentScheme::kCmimoSemiBlind) j["duc_factors"] = to_json(factors);
  return j;
}

}  // namespace covertsim
