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

// covertsim command-line driver.
//
//   covertsim ber         --config cfg.json --out results/ [--scheme NGS]
//   covertsim security    --m 1,2,4,8 --out results/
//   covertsim coding-gain --m-min 1 --m-max 4 --out results/
//   covertsim codebook    --scheme DUC --bits 2 --m 2 --out results/
//
// Exit status: 0 success, 2 configuration error, 1 runtime error.

#include "covertsim/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

namespace fs = std::filesystem;
using namespace covertsim;

namespace {

struct CommonFlags {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::optional<int> frames;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", f.seed, "master seed (overrides config and COVERTSIM_SEED)");
  cmd->add_option("--threads", f.threads, "worker threads (0 = hardware concurrency)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--frames", f.frames, "frames per SNR point (overrides config)")
      ->check(CLI::PositiveNumber);
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("COVERTSIM_SEED");
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t used = 0;
    const std::uint64_t s = std::stoull(v, &used, 0);
    if (used != std::strlen(v)) throw std::invalid_argument("trailing characters");
    return s;
  } catch (const std::exception&) {
    throw ConfigError(std::string("COVERTSIM_SEED is not an unsigned integer: '") + v + "'");
  }
}

// Flag, then config, then environment, then 0.
std::uint64_t resolve_seed(const CommonFlags& f, std::optional<std::uint64_t> from_config) {
  if (f.seed) return *f.seed;
  if (from_config) return *from_config;
  if (auto e = env_seed()) return *e;
  return 0;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
  return fs::path(dir);
}

Json sidecar_base() {
  Json j;
  j["tool"] = "covertsim";
  j["version"] = std::string(kToolVersion);
  return j;
}

// ---------------------------------------------------------------- ber

struct BerFlags {
  CommonFlags common;
  std::string scheme;
  std::string factors;
  bool quiet = false;
};

void run_ber(const BerFlags& f) {
  SystemParams p;
  bool seed_in_config = false;
  if (!f.common.config.empty()) {
    p = params_from_json(read_json_file(f.common.config), &seed_in_config);
  } else {
    p.W.reset();
    p.overhead_target = 0.05;
  }
  if (!f.scheme.empty()) p.scheme = parse_scheme(f.scheme);
  if (f.common.frames) p.frames = *f.common.frames;
  p.master_seed = resolve_seed(
      f.common, seed_in_config ? std::optional<std::uint64_t>(p.master_seed) : std::nullopt);
  p.validate();

  const DucFactors factors = f.factors.empty()
                                 ? default_factors(p)
                                 : factors_from_json(read_json_file(f.factors));
  if (p.scheme != ExperimentScheme::kCmimoSemiBlind &&
      (factors.bits != p.B || factors.antennas() != p.M)) {
    throw ConfigError("factor file does not match B and M of the config");
  }

  RunOptions opts;
  opts.threads = resolve_threads(f.common.threads);
  if (!f.quiet) {
    opts.progress = [last = std::make_shared<std::atomic<int>>(-1)](std::size_t done,
                                                                    std::size_t total) {
      const int pct = static_cast<int>(100 * done / total);
      if (pct / 10 != last->exchange(pct) / 10 || done == total) {
        std::fprintf(stderr, "\r  %3d%% (%zu/%zu cells)", pct, done, total);
        if (done == total) std::fputc('\n', stderr);
      }
    };
  }

  std::fprintf(stderr, "ber: scheme=%s M=%d N=%d T=%d B=%d K=%d W=%d frames=%d seed=%llu threads=%d\n",
               std::string(to_string(p.scheme)).c_str(), p.M, p.N, p.T, p.B, p.K,
               p.frame_blocks(), p.frames, static_cast<unsigned long long>(p.master_seed),
               opts.threads);
  const auto records = run_ber_experiment(p, opts, factors);

  const fs::path out = prepare_out(f.common.out);
  Json side = ber_sidecar(p, factors);
  emit_csv(ber_csv(records), out / "ber.csv", side);
  write_text_file(out / "ber_timing.csv", ber_timing_csv(records));

  std::printf("%-16s %8s %12s %12s\n", "scheme", "snr_db", "bit_errors", "ber");
  for (const auto& r : records) {
    std::printf("%-16s %8.2f %12lld %12.4e\n", r.scheme.c_str(), r.snr_db,
                static_cast<long long>(r.bit_errors), r.ber);
  }
  std::printf("wrote %s\n", (out / "ber.csv").string().c_str());
}

// ----------------------------------------------------------- security

struct SecurityFlags {
  CommonFlags common;
  std::vector<int> m_list{1, 2, 4, 8};
  double snr_min = -40.0;
  double snr_max = 9.0;
  int points = 50;
};

void run_security(const SecurityFlags& f) {
  if (!f.common.config.empty()) {
    throw ConfigError("security takes no config file; use --m, --snr-min, --snr-max, --points");
  }
  if (!(f.snr_max >= f.snr_min)) throw ConfigError("--snr-max must be >= --snr-min");
  for (int m : f.m_list) {
    if (m < 1) throw ConfigError("--m entries must be positive");
  }
  const auto grid = linear_grid(f.snr_min, f.snr_max, f.points);
  const auto rows = run_security_sweep(f.m_list, grid);
  const fs::path out = prepare_out(f.common.out);
  Json side = sidecar_base();
  side["M_list"] = f.m_list;
  side["snr_db_grid"] = grid;
  emit_csv(security_csv(rows), out / "security.csv", side);
  std::printf("%zu rows -> %s\n", rows.size(), (out / "security.csv").string().c_str());
}

// -------------------------------------------------------- coding-gain

struct CodingGainFlags {
  CommonFlags common;
  int m_min = 1;
  int m_max = 4;
  int trials = 10000;
  int keys = 100;
};

void run_coding_gain(const CodingGainFlags& f) {
  if (!f.common.config.empty()) {
    throw ConfigError("coding-gain takes no config file; use --m-min, --m-max, --trials, --keys");
  }
  if (f.m_min < 1 || f.m_max < f.m_min) throw ConfigError("need 1 <= --m-min <= --m-max");
  std::vector<int> range;
  for (int m = f.m_min; m <= f.m_max; ++m) range.push_back(m);
  const std::uint64_t seed = resolve_seed(f.common, std::nullopt);
  const auto rows = run_coding_gain_sweep(range, f.trials, f.keys, seed);
  const fs::path out = prepare_out(f.common.out);
  Json side = sidecar_base();
  side["M_range"] = range;
  side["B"] = "M";
  side["N"] = 1;
  side["T"] = 1;
  side["trials"] = f.trials;
  side["keys"] = f.keys;
  side["master_seed"] = seed;
  Json factors = Json::array();
  for (const auto& r : rows) factors.push_back(to_json(r.factors));
  side["duc_factors"] = std::move(factors);
  emit_csv(coding_gain_csv(rows), out / "coding_gain.csv", side);

  std::printf("%3s %12s %12s %12s\n", "M", "NGS", "CMIMO", "SPATIAL_MUX");
  for (const auto& r : rows) {
    std::printf("%3d %12.6f %12.6f %12.6f\n", r.antennas, r.ngs, r.cmimo, r.spatial_mux);
  }
}

// ----------------------------------------------------------- codebook

struct CodebookFlags {
  CommonFlags common;
  std::string scheme = "DUC";
  int bits = 2;
  int antennas = 2;
  int slots = 1;
  std::string factors;
  double key_re = 0.3;
  double key_im = 0.4;
  int transitions = 100;
  std::uint64_t budget = kDefaultSearchBudget;
};

void run_codebook(const CodebookFlags& f) {
  if (!f.common.config.empty()) throw ConfigError("codebook takes no config file");
  const fs::path out = prepare_out(f.common.out);
  Json side = sidecar_base();
  Codebook cb;
  if (f.scheme == "DUC") {
    DucFactors factors;
    if (!f.factors.empty()) {
      factors = factors_from_json(read_json_file(f.factors));
      side["source"] = f.factors;
    } else {
      const auto res = optimize_factors_detailed(f.bits, f.antennas, f.budget);
      factors = res.factors;
      side["search"] = {{"exhaustive", res.exhaustive}, {"evaluated", res.evaluated}};
      std::printf("B=%d M=%d u=[", f.bits, f.antennas);
      for (std::size_t i = 0; i < factors.u.size(); ++i) {
        std::printf("%s%d", i ? "," : "", factors.u[i]);
      }
      std::printf("] zeta=%.12f (%s)\n", res.diversity_product,
                  res.exhaustive ? "exhaustive" : "random restarts");
    }
    write_text_file(out / "factors.json", to_json(factors).dump(2) + "\n");
    cb = duc_codebook(factors);
  } else if (f.scheme == "CMIMO") {
    const ChaosKey key{{f.key_re, f.key_im}, f.transitions};
    try {
      key.validate();
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
    if (f.bits != f.antennas * f.slots) throw ConfigError("CMIMO requires --bits == M*T");
    cb = cmimo_codebook(key, f.antennas, f.slots);
    side["key"] = {{"c0", {f.key_re, f.key_im}}, {"transitions", f.transitions}};
  } else {
    throw ConfigError("--scheme must be DUC or CMIMO");
  }
  write_text_file(out / "codebook.json", to_json(cb).dump(2) + "\n");
  write_text_file(out / "codebook.params.json", side.dump(2) + "\n");
  std::printf("%zu codewords -> %s\n", cb.size(), (out / "codebook.json").string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covertsim: link-level LPD MIMO simulations"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  BerFlags ber;
  auto* ber_cmd = app.add_subcommand("ber", "Monte Carlo BER sweep");
  add_common(ber_cmd, ber.common);
  ber_cmd->add_option("--scheme", ber.scheme, "NGS, CMIMO_SEMIBLIND or NGS_PERFECT_CSI");
  ber_cmd->add_option("--factors", ber.factors, "DUC factor JSON")->check(CLI::ExistingFile);
  ber_cmd->add_flag("--quiet", ber.quiet, "no progress output");

  SecurityFlags sec;
  auto* sec_cmd = app.add_subcommand("security", "Warden detection-error lower bound");
  add_common(sec_cmd, sec.common);
  sec_cmd->add_option("--m", sec.m_list, "antenna counts")->delimiter(',')->capture_default_str();
  sec_cmd->add_option("--snr-min", sec.snr_min)->capture_default_str();
  sec_cmd->add_option("--snr-max", sec.snr_max)->capture_default_str();
  sec_cmd->add_option("--points", sec.points)->check(CLI::PositiveNumber)->capture_default_str();

  CodingGainFlags cg;
  auto* cg_cmd = app.add_subcommand("coding-gain", "Coding gains with B=M, N=1, T=1");
  add_common(cg_cmd, cg.common);
  cg_cmd->add_option("--m-min", cg.m_min)->capture_default_str();
  cg_cmd->add_option("--m-max", cg.m_max)->capture_default_str();
  cg_cmd->add_option("--trials", cg.trials, "projections per M")->check(CLI::PositiveNumber)->capture_default_str();
  cg_cmd->add_option("--keys", cg.keys, "chaos keys per M")->check(CLI::PositiveNumber)->capture_default_str();

  CodebookFlags cbf;
  auto* cb_cmd = app.add_subcommand("codebook", "DUC factor search or codebook export");
  add_common(cb_cmd, cbf.common);
  cb_cmd->add_option("--scheme", cbf.scheme, "DUC or CMIMO")->capture_default_str();
  cb_cmd->add_option("--bits", cbf.bits)->check(CLI::Range(1, 16))->capture_default_str();
  cb_cmd->add_option("--m", cbf.antennas)->check(CLI::Range(1, 16))->capture_default_str();
  cb_cmd->add_option("--t", cbf.slots)->check(CLI::PositiveNumber)->capture_default_str();
  cb_cmd->add_option("--factors", cbf.factors, "import DUC factors instead of searching")
      ->check(CLI::ExistingFile);
  cb_cmd->add_option("--key-re", cbf.key_re)->capture_default_str();
  cb_cmd->add_option("--key-im", cbf.key_im)->capture_default_str();
  cb_cmd->add_option("--transitions", cbf.transitions)->capture_default_str();
  cb_cmd->add_option("--budget", cbf.budget, "exhaustive search budget")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*ber_cmd) run_ber(ber);
    if (*sec_cmd) run_security(sec);
    if (*cg_cmd) run_coding_gain(cg);
    if (*cb_cmd) run_codebook(cbf);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const ParameterError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const CapacityError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
