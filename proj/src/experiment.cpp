// Copyright 2026 The popmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "popmc/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <system_error>

#include "io.hpp"
#include "json.hpp"
#include "popmc/diagnostics.hpp"
#include "popmc/error.hpp"
#include "popmc/models.hpp"
#include "popmc/popmcmc.hpp"
#include "popmc/smc.hpp"

namespace popmc {
namespace {

using Defaults = std::vector<std::pair<const char*, const char*>>;

const Defaults kCommon = {{"seed", "1"}, {"workers", "1"}, {"precision", "double"}, {"generator", "mrg32k3a"}};

const Defaults kMixtureData = {{"data", ""},        {"data_seed", "1"},        {"obs", "100"},
                               {"sigma", "0.55"},   {"true_means", "-3,0,3,6"}, {"bound", "10"}};

const Defaults kFsv = {{"factor_dim", "3"},
                       {"loadings", "1,0,0,0.5,1,0,0.5,0.5,1,0.2,0.6,0.3,0.8,0.7,0.5"},
                       {"obs_variances", "0.5,0.5,0.5,0.5,0.5"},
                       {"ar_coefficients", "0.9,0.9,0.9"},
                       {"innovation_cov", "0.5,0.2,0.1,0.2,0.5,0.2,0.1,0.2,0.5"},
                       {"initial_state", "0,0,0"}};

Defaults defaults_for(ExperimentKind kind) {
  Defaults d = kCommon;
  auto add = [&d](const Defaults& more) { d.insert(d.end(), more.begin(), more.end()); };
  switch (kind) {
    case ExperimentKind::istoy:
      add({{"particles", "16777216"}, {"out", "estimate.csv"}});
      break;
    case ExperimentKind::popmcmc:
      add(kMixtureData);
      add({{"chains", "200"},
           {"iterations", "8192"},
           {"burn_in", "0"},
           {"rwm_scale", "1"},
           {"capture_radius", "1"},
           {"dump_all_chains", "false"},
           {"out", "samples.csv"},
           {"trace", "trace.csv"},
           {"all_chains_out", "all_chains.csv"},
           {"modes", "modes.csv"},
           {"marginal_modes", "marginal_modes.csv"},
           {"traversal", "traversal.json"},
           {"density", "density.csv"}});
      break;
    case ExperimentKind::smc_sampler:
      add(kMixtureData);
      add({{"particles", "8192"},
           {"temperatures", "200"},
           {"mcmc_steps", "10"},
           {"ess_threshold", "0.5"},
           {"resampler", "multinomial"},
           {"rwm_scale", "1"},
           {"capture_radius", "1"},
           {"out", "particles.csv"},
           {"ess", "ess.csv"},
           {"modes", "modes.csv"},
           {"marginal_modes", "marginal_modes.csv"},
           {"density", "density.csv"},
           {"summary", "summary.json"}});
      break;
    case ExperimentKind::pfilter:
      add(kFsv);
      add({{"data", ""},
           {"data_seed", "1"},
           {"length", "200"},
           {"particles", "8192"},
           {"ess_threshold", "0.5"},
           {"resampler", "multinomial"},
           {"out", "means.csv"},
           {"stds", "stds.csv"},
           {"ess", "ess.csv"},
           {"summary", "summary.json"},
           {"observations_out", "observations.csv"},
           {"truth", "truth.csv"}});
      break;
    case ExperimentKind::gendata:
      add(kFsv);
      add({{"model", "mixture"},
           {"data_seed", "1"},
           {"obs", "100"},
           {"sigma", "0.55"},
           {"true_means", "-3,0,3,6"},
           {"length", "200"},
           {"out", "data.csv"},
           {"truth", "truth.csv"}});
      break;
    case ExperimentKind::bench:
      add(kMixtureData);
      add(kFsv);
      add({{"experiment", "popmcmc"},
           {"sizes", "16,32,64,128"},
           {"workers_list", "1,2"},
           {"repetitions", "3"},
           {"iterations", "1024"},
           {"temperatures", "50"},
           {"mcmc_steps", "10"},
           {"length", "50"},
           {"ess_threshold", "0.5"},
           {"resampler", "multinomial"},
           {"rwm_scale", "1"},
           {"out", "bench.csv"}});
      break;
  }
  return d;
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(',', start);
    auto item = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    out.push_back(item);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::uint64_t parse_uint(std::string_view key, std::string_view text) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || r.ec != std::errc() || r.ptr != text.data() + text.size()) {
    throw ConfigError(std::string(key) + ": '" + std::string(text) + "' is not a non-negative integer");
  }
  return v;
}

double parse_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || r.ec != std::errc() || r.ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError(std::string(key) + ": '" + std::string(text) + "' is not a finite number");
  }
  return v;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Common settings, typed.
struct Common {
  std::uint64_t seed;
  unsigned workers;
  Precision precision;
  GeneratorKind generator;
};

unsigned to_workers(std::uint64_t w) {
  if (w == 0 || w > 4096) throw ConfigError("workers must be in [1, 4096]");
  return static_cast<unsigned>(w);
}

Common common(const ExperimentConfig& c) {
  return {c.get_uint("seed"), to_workers(c.get_uint("workers")), parse_precision(c.get("precision")),
          parse_generator(c.get("generator"))};
}

std::size_t to_size(std::uint64_t v) { return static_cast<std::size_t>(v); }

MixtureModel mixture_model(const ExperimentConfig& c) {
  MixtureModel model;
  const auto means = c.get_doubles("true_means");
  model.k = means.size();
  model.sigma = c.get_double("sigma");
  if (c.has("bound")) model.bound = c.get_double("bound");
  if (model.k < 1 || model.k > kMaxMixtureComponents) throw ConfigError("true_means: need 1 to 16 components");
  if (!(model.sigma > 0.0)) throw ConfigError("sigma must be positive");
  const std::string& path = c.has("data") ? c.get("data") : std::string();
  if (!path.empty()) {
    const auto table = io::read_csv(path);
    if (table.header.size() != 1) throw ConfigError(path + ": mixture data must have a single column");
    model.y = table.values;
  } else {
    const auto m = c.get_uint("obs");
    if (m < 1) throw ConfigError("obs must be at least 1");
    auto rng = data_stream(c.get_uint("data_seed"));
    model.y = simulate_mixture_data(means, to_size(m), model.sigma, rng);
  }
  model.validate();
  return model;
}

FsvParams fsv_params(const ExperimentConfig& c) {
  FsvParams p;
  p.factor_dim = to_size(c.get_uint("factor_dim"));
  p.loadings = c.get_doubles("loadings");
  if (p.factor_dim == 0 || p.loadings.size() % p.factor_dim != 0) {
    throw ConfigError("loadings: length must be a multiple of factor_dim");
  }
  p.obs_dim = p.loadings.size() / p.factor_dim;
  p.obs_variances = c.get_doubles("obs_variances");
  p.ar_coefficients = c.get_doubles("ar_coefficients");
  p.innovation_cov = c.get_doubles("innovation_cov");
  p.initial_state = c.get_doubles("initial_state");
  return p;
}

std::vector<std::string> numbered(const char* prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= n; ++i) out.push_back(std::string(prefix) + std::to_string(i));
  return out;
}

std::string matrix_csv(const char* prefix, std::span<const double> values, std::size_t cols) {
  io::CsvWriter w(numbered(prefix, cols));
  for (std::size_t r = 0; r < values.size() / cols; ++r) {
    w.add_numeric_row(std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(r * cols),
                                          values.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols)));
  }
  return w.text();
}

std::string histogram_csv(const ModeHistogram& h) {
  io::CsvWriter w({"mode_id", "count_or_weight"});
  for (std::size_t i = 0; i < h.mass.size(); ++i) w.add_row({std::to_string(i), io::format_double(h.mass[i])});
  w.add_row({"-1", io::format_double(h.unassigned)});
  return w.text();
}

std::string density_csv(const DensityGrid& g) {
  io::CsvWriter w({"mu_1", "mu_2", "density"});
  for (std::size_t iy = 0; iy < g.points; ++iy) {
    for (std::size_t ix = 0; ix < g.points; ++ix) {
      w.add_numeric_row({g.coordinate(ix), g.coordinate(iy), g.density[iy * g.points + ix]});
    }
  }
  return w.text();
}

std::string json_text(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

// Collects artifacts in memory, then writes them and the manifest.
class ArtifactSet {
 public:
  void add(const std::string& name, std::string bytes) {
    if (name.empty()) throw ConfigError("output file names must not be empty");
    for (const auto& [n, b] : files_) {
      if (n == name) throw ConfigError("two outputs share the file name '" + name + "'");
    }
    files_.emplace_back(name, std::move(bytes));
  }

  RunSummary write(const ExperimentConfig& config, const std::filesystem::path& out_dir, double seconds) const {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());
    RunSummary summary;
    summary.wall_clock_seconds = seconds;
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto& [name, bytes] : files_) {
      const std::filesystem::path path = out_dir / name;
      if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
      io::write_file(path, bytes);
      summary.files.push_back(name);
      files.push_back({{"name", name}, {"bytes", bytes.size()}, {"fnv1a64", io::hex64(io::fnv1a64(bytes))}});
    }
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    for (const auto& [k, v] : config.values()) cfg[k] = v;
    nlohmann::ordered_json manifest;
    manifest["kind"] = std::string(to_string(config.kind()));
    manifest["config_hash"] = io::hex64(config.hash());
    manifest["config"] = cfg;
    manifest["wall_clock_seconds"] = seconds;
    manifest["workers"] = config.get_uint("workers");
    manifest["files"] = files;
    summary.manifest = out_dir / "manifest.json";
    io::write_file(summary.manifest, json_text(manifest));
    return summary;
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

void run_istoy_experiment(const ExperimentConfig& c, ArtifactSet& out) {
  const auto cm = common(c);
  IsToyConfig cfg{c.get_uint("particles"), cm.seed, cm.workers, cm.precision, cm.generator};
  const auto r = run_istoy(cfg);
  io::CsvWriter w({"estimate", "standard_error", "ess", "particles"});
  w.add_row({io::format_double(r.estimate), io::format_double(r.standard_error), io::format_double(r.ess),
             io::format_uint(cfg.particles)});
  out.add(c.get("out"), w.text());
}

void add_mode_outputs(const ExperimentConfig& c, ArtifactSet& out, std::span<const double> samples, std::size_t dim,
                      std::span<const double> weights, const ModeAtlas* atlas) {
  if (atlas != nullptr) {
    out.add(c.get("modes"), histogram_csv(mode_counts(samples, dim, *atlas, false, weights)));
    out.add(c.get("marginal_modes"), histogram_csv(mode_counts(samples, dim, *atlas, true, weights)));
  }
  if (dim >= 2) out.add(c.get("density"), density_csv(marginal_density_grid(samples, dim, weights)));
}

std::optional<ModeAtlas> atlas_for(const ExperimentConfig& c, const MixtureModel& model) {
  if (model.k != 4) return std::nullopt;
  const auto means = c.get_doubles("true_means");
  std::array<double, 4> sorted{means[0], means[1], means[2], means[3]};
  std::sort(sorted.begin(), sorted.end());
  return ModeAtlas::make(sorted, c.get_double("capture_radius"));
}

PopMcmcConfig popmcmc_config(const ExperimentConfig& c, const Common& cm) {
  PopMcmcConfig cfg;
  cfg.chains = to_size(c.get_uint("chains"));
  cfg.iterations = to_size(c.get_uint("iterations"));
  cfg.burn_in = c.has("burn_in") ? to_size(c.get_uint("burn_in")) : 0;
  cfg.rwm_scale = c.get_double("rwm_scale");
  cfg.seed = cm.seed;
  cfg.workers = cm.workers;
  cfg.precision = cm.precision;
  cfg.generator = cm.generator;
  cfg.record_all_chains = c.has("dump_all_chains") && c.get_bool("dump_all_chains");
  return cfg;
}

void run_popmcmc_experiment(const ExperimentConfig& c, ArtifactSet& out) {
  const auto cm = common(c);
  const auto cfg = popmcmc_config(c, cm);
  const MixturePosterior target(mixture_model(c));
  const auto r = run_popmcmc(cfg, target);
  const std::size_t dim = r.dim;
  out.add(c.get("out"), matrix_csv("mu_", r.samples, dim));

  io::CsvWriter trace({"chain", "beta", "acceptance_rate", "swap_attempts", "swap_accepts", "swap_rate"});
  for (std::size_t i = 0; i < cfg.chains; ++i) {
    const double rate = r.swap_attempts[i] > 0
                            ? static_cast<double>(r.swap_accepts[i]) / static_cast<double>(r.swap_attempts[i])
                            : 0.0;
    trace.add_row({std::to_string(i + 1), io::format_double(r.final_population.ladder.betas[i]),
                   io::format_double(r.acceptance_rates[i]), io::format_uint(r.swap_attempts[i]),
                   io::format_uint(r.swap_accepts[i]), io::format_double(rate)});
  }
  out.add(c.get("trace"), trace.text());

  if (cfg.record_all_chains) {
    std::vector<std::string> header{"iteration", "chain"};
    for (auto& h : numbered("mu_", dim)) header.push_back(h);
    io::CsvWriter all(header);
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
      for (std::size_t ch = 0; ch < cfg.chains; ++ch) {
        std::vector<std::string> row{std::to_string(it + 1), std::to_string(ch + 1)};
        for (std::size_t d = 0; d < dim; ++d) {
          row.push_back(io::format_double(r.all_chains[(it * cfg.chains + ch) * dim + d]));
        }
        all.add_row(row);
      }
    }
    out.add(c.get("all_chains_out"), all.text());
  }

  const auto atlas = atlas_for(c, target.model());
  add_mode_outputs(c, out, r.samples, dim, {}, atlas ? &*atlas : nullptr);
  if (atlas) {
    const auto ids = assign_modes(r.samples, dim, *atlas);
    const auto hist = mode_counts(r.samples, dim, *atlas, false);
    const auto t = traversal_time(ids, atlas->full_modes.size());
    nlohmann::ordered_json j;
    j["traversed"] = t.has_value();
    j["traversal_time"] = t ? nlohmann::ordered_json(*t) : nlohmann::ordered_json(nullptr);
    j["modes_visited"] = hist.occupied();
    j["mode_count"] = atlas->full_modes.size();
    j["coupon_expectation"] = coupon_expectation(atlas->full_modes.size());
    j["max_min_ratio"] = std::isfinite(hist.max_min_ratio()) ? nlohmann::ordered_json(hist.max_min_ratio())
                                                             : nlohmann::ordered_json(nullptr);
    j["samples"] = cfg.iterations;
    j["unassigned"] = hist.unassigned;
    out.add(c.get("traversal"), json_text(j));
  }
}

SmcSamplerConfig smc_config(const ExperimentConfig& c, const Common& cm) {
  SmcSamplerConfig cfg;
  if (c.has("particles")) cfg.particles = to_size(c.get_uint("particles"));
  cfg.temperatures = to_size(c.get_uint("temperatures"));
  cfg.mcmc_steps = to_size(c.get_uint("mcmc_steps"));
  cfg.ess_threshold = c.get_double("ess_threshold");
  cfg.resampler = parse_resampler(c.get("resampler"));
  cfg.rwm_scale = c.get_double("rwm_scale");
  cfg.seed = cm.seed;
  cfg.workers = cm.workers;
  cfg.precision = cm.precision;
  cfg.generator = cm.generator;
  return cfg;
}

void run_smc_experiment(const ExperimentConfig& c, ArtifactSet& out) {
  const auto cm = common(c);
  const auto cfg = smc_config(c, cm);
  const MixturePosterior target(mixture_model(c));
  const auto r = smc_sampler_run(cfg, target);
  const std::size_t dim = r.population.dim;

  auto header = numbered("mu_", dim);
  header.push_back("weight");
  io::CsvWriter particles(header);
  for (std::size_t i = 0; i < r.population.size(); ++i) {
    std::vector<double> row(r.population.particles.begin() + static_cast<std::ptrdiff_t>(i * dim),
                            r.population.particles.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
    row.push_back(r.weights[i]);
    particles.add_numeric_row(row);
  }
  out.add(c.get("out"), particles.text());

  const auto betas = make_ladder(cfg.temperatures).betas;
  io::CsvWriter ess_csv({"t", "beta", "ess_ratio", "resampled", "log_evidence_increment"});
  std::size_t next_event = 0;
  for (std::size_t t = 1; t <= cfg.temperatures; ++t) {
    const bool resampled = next_event < r.resample_events.size() && r.resample_events[next_event] == t;
    if (resampled) ++next_event;
    ess_csv.add_row({std::to_string(t), io::format_double(betas[t - 1]), io::format_double(r.ess_trace[t - 1]),
                     resampled ? "1" : "0", io::format_double(r.log_evidence_increments[t - 1])});
  }
  out.add(c.get("ess"), ess_csv.text());

  const auto atlas = atlas_for(c, target.model());
  add_mode_outputs(c, out, r.population.particles, dim, r.weights, atlas ? &*atlas : nullptr);
  nlohmann::ordered_json j;
  j["log_evidence"] = r.log_evidence;
  j["acceptance_rate"] = r.acceptance_rate;
  j["resample_events"] = r.resample_events.size();
  j["final_ess_ratio"] = r.ess_trace.back();
  if (atlas) {
    const auto marginal = mode_counts(r.population.particles, dim, *atlas, true, r.weights);
    j["min_marginal_mode_mass"] = *std::min_element(marginal.mass.begin(), marginal.mass.end());
  }
  out.add(c.get("summary"), json_text(j));
}

PfilterConfig pfilter_config(const ExperimentConfig& c, const Common& cm) {
  PfilterConfig cfg;
  cfg.particles = to_size(c.get_uint("particles"));
  cfg.ess_threshold = c.get_double("ess_threshold");
  cfg.resampler = parse_resampler(c.get("resampler"));
  cfg.seed = cm.seed;
  cfg.workers = cm.workers;
  cfg.precision = cm.precision;
  cfg.generator = cm.generator;
  return cfg;
}

void run_pfilter_experiment(const ExperimentConfig& c, ArtifactSet& out) {
  const auto cm = common(c);
  const auto cfg = pfilter_config(c, cm);
  const FsvModel model(fsv_params(c));
  const std::size_t k = model.state_dim();
  const std::size_t m = model.obs_dim();
  SimulatedPath path;
  const std::string& data = c.get("data");
  const bool simulated = data.empty();
  if (simulated) {
    auto rng = data_stream(c.get_uint("data_seed"));
    path = model.simulate(to_size(c.get_uint("length")), rng);
  } else {
    const auto table = io::read_csv(data);
    if (table.header.size() != m) throw ConfigError(data + ": expected " + std::to_string(m) + " columns");
    if (table.rows == 0) throw ConfigError(data + ": no observations");
    path.length = table.rows;
    path.observations = table.values;
  }
  const auto r = particle_filter_run(cfg, model, path.observations, path.length);
  out.add(c.get("out"), matrix_csv("x_", r.means, k));
  out.add(c.get("stds"), matrix_csv("x_", r.stds, k));
  io::CsvWriter ess_csv({"t", "ess_ratio", "resampled"});
  std::size_t next_event = 0;
  for (std::size_t t = 1; t <= path.length; ++t) {
    const bool resampled = next_event < r.resample_events.size() && r.resample_events[next_event] == t;
    if (resampled) ++next_event;
    ess_csv.add_row({std::to_string(t), io::format_double(r.ess_trace[t - 1]), resampled ? "1" : "0"});
  }
  out.add(c.get("ess"), ess_csv.text());
  nlohmann::ordered_json j;
  j["log_likelihood"] = r.log_likelihood;
  j["resample_events"] = r.resample_events.size();
  j["length"] = path.length;
  if (simulated) {
    std::size_t covered = 0;
    for (std::size_t i = 0; i < path.length * k; ++i) {
      if (std::abs(path.states[i] - r.means[i]) <= r.stds[i]) ++covered;
    }
    j["band_coverage"] = static_cast<double>(covered) / static_cast<double>(path.length * k);
    out.add(c.get("observations_out"), matrix_csv("y_", path.observations, m));
    out.add(c.get("truth"), matrix_csv("x_", path.states, k));
  }
  out.add(c.get("summary"), json_text(j));
}

void run_gendata_experiment(const ExperimentConfig& c, ArtifactSet& out) {
  const std::string& model_name = c.get("model");
  auto rng = data_stream(c.get_uint("data_seed"));
  if (model_name == "mixture") {
    const auto means = c.get_doubles("true_means");
    if (means.empty()) throw ConfigError("true_means must not be empty");
    const auto y = simulate_mixture_data(means, to_size(c.get_uint("obs")), c.get_double("sigma"), rng);
    io::CsvWriter w({"y"});
    for (double v : y) w.add_numeric_row({v});
    out.add(c.get("out"), w.text());
  } else if (model_name == "fsv") {
    const FsvModel model(fsv_params(c));
    const auto path = model.simulate(to_size(c.get_uint("length")), rng);
    out.add(c.get("out"), matrix_csv("y_", path.observations, model.obs_dim()));
    out.add(c.get("truth"), matrix_csv("x_", path.states, model.state_dim()));
  } else {
    throw ConfigError("model: expected mixture or fsv, got '" + model_name + "'");
  }
}

void run_bench_experiment(const ExperimentConfig& c, ArtifactSet& out) {
  const auto rows = bench(c);
  io::CsvWriter w({"experiment", "size", "workers", "median_seconds", "speedup"});
  for (const auto& row : rows) {
    w.add_row({row.experiment, io::format_uint(row.size), std::to_string(row.workers),
               io::format_double(row.median_seconds), io::format_double(row.speedup)});
  }
  out.add(c.get("out"), w.text());
}

}  // namespace

ExperimentKind parse_experiment(std::string_view name) {
  if (name == "istoy") return ExperimentKind::istoy;
  if (name == "popmcmc") return ExperimentKind::popmcmc;
  if (name == "smc-sampler") return ExperimentKind::smc_sampler;
  if (name == "pfilter") return ExperimentKind::pfilter;
  if (name == "gendata") return ExperimentKind::gendata;
  if (name == "bench") return ExperimentKind::bench;
  throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

std::string_view to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::istoy: return "istoy";
    case ExperimentKind::popmcmc: return "popmcmc";
    case ExperimentKind::smc_sampler: return "smc-sampler";
    case ExperimentKind::pfilter: return "pfilter";
    case ExperimentKind::gendata: return "gendata";
    case ExperimentKind::bench: return "bench";
  }
  return "unknown";
}

ExperimentConfig::ExperimentConfig(ExperimentKind kind) : kind_(kind) {
  for (const auto& [k, v] : defaults_for(kind)) values_.emplace(k, v);
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw ConfigError("unknown key '" + std::string(key) + "' for experiment " + std::string(to_string(kind_)));
  }
  it->second = std::string(value);
}

bool ExperimentConfig::has(std::string_view key) const { return values_.find(key) != values_.end(); }

const std::string& ExperimentConfig::get(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing key '" + std::string(key) + "'");
  return it->second;
}

void ExperimentConfig::load_file(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    set(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
  }
}

std::string ExperimentConfig::canonical() const {
  std::string s = "experiment=" + std::string(to_string(kind_)) + "\n";
  for (const auto& [k, v] : values_) s += k + "=" + v + "\n";
  return s;
}

std::uint64_t ExperimentConfig::hash() const { return io::fnv1a64(canonical()); }

std::uint64_t ExperimentConfig::get_uint(std::string_view key) const { return parse_uint(key, get(key)); }

double ExperimentConfig::get_double(std::string_view key) const { return parse_double(key, get(key)); }

bool ExperimentConfig::get_bool(std::string_view key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(std::string(key) + ": '" + v + "' is not a boolean");
}

std::vector<double> ExperimentConfig::get_doubles(std::string_view key) const {
  std::vector<double> out;
  for (auto item : split_list(get(key))) out.push_back(parse_double(key, item));
  return out;
}

std::vector<std::uint64_t> ExperimentConfig::get_uints(std::string_view key) const {
  std::vector<std::uint64_t> out;
  for (auto item : split_list(get(key))) out.push_back(parse_uint(key, item));
  return out;
}

RandomStream data_stream(std::uint64_t data_seed) {
  return RandomStream(skip_ahead(seed_state(data_seed), kDataStreamOffset));
}

ImportanceEstimate run_istoy(const IsToyConfig& config) {
  if (config.particles < 1) throw ConfigError("istoy: particles must be at least 1");
  if (config.workers == 0) throw ConfigError("istoy: workers must be at least 1");
  const std::uint64_t n = config.particles;
  const std::uint64_t blocks = (n + kIsToyBlock - 1) / kIsToyBlock;
  auto streams = make_streams(config.generator, config.seed, blocks);
  std::vector<double> log_weights(n);
  std::vector<double> values(n);
  const bool single = config.precision == Precision::f32;
  parallel_for_each(to_size(blocks), config.workers, [&](std::size_t b) {
    const std::uint64_t begin = b * kIsToyBlock;
    const std::uint64_t end = std::min(n, begin + kIsToyBlock);
    for (std::uint64_t i = begin; i < end; ++i) {
      const double x = streams[b].normal();
      if (single) {
        const auto xf = static_cast<float>(x);
        log_weights[i] = static_cast<double>(toy_log_target(xf) - toy_log_proposal(xf));
        values[i] = static_cast<double>(xf * xf);
      } else {
        log_weights[i] = toy_log_target(x) - toy_log_proposal(x);
        values[i] = x * x;
      }
    }
  });
  return importance_estimate_from_terms(log_weights, values, config.precision, config.workers);
}

std::vector<BenchRow> bench(const ExperimentConfig& c) {
  const auto cm = common(c);
  const ExperimentKind kind = parse_experiment(c.get("experiment"));
  const auto sizes = c.get_uints("sizes");
  const auto workers_list = c.get_uints("workers_list");
  const auto reps = c.get_uint("repetitions");
  if (sizes.empty()) throw ConfigError("sizes must list at least one size");
  if (workers_list.size() < 2) throw ConfigError("workers_list must list at least two worker counts");
  if (reps < 3) throw ConfigError("repetitions must be at least 3");

  std::function<void(std::uint64_t, unsigned)> job;
  std::optional<MixturePosterior> mixture;
  std::optional<FsvModel> fsv;
  SimulatedPath path;
  switch (kind) {
    case ExperimentKind::istoy:
      job = [&](std::uint64_t size, unsigned w) {
        (void)run_istoy({size, cm.seed, w, cm.precision, cm.generator});
      };
      break;
    case ExperimentKind::popmcmc:
      mixture.emplace(mixture_model(c));
      job = [&](std::uint64_t size, unsigned w) {
        PopMcmcConfig cfg;
        cfg.chains = to_size(size);
        cfg.iterations = to_size(c.get_uint("iterations"));
        cfg.rwm_scale = c.get_double("rwm_scale");
        cfg.seed = cm.seed;
        cfg.workers = w;
        cfg.precision = cm.precision;
        cfg.generator = cm.generator;
        (void)run_popmcmc(cfg, *mixture);
      };
      break;
    case ExperimentKind::smc_sampler:
      mixture.emplace(mixture_model(c));
      job = [&](std::uint64_t size, unsigned w) {
        auto cfg = smc_config(c, cm);
        cfg.particles = to_size(size);
        cfg.workers = w;
        (void)smc_sampler_run(cfg, *mixture);
      };
      break;
    case ExperimentKind::pfilter: {
      fsv.emplace(fsv_params(c));
      auto rng = data_stream(c.get_uint("data_seed"));
      path = fsv->simulate(to_size(c.get_uint("length")), rng);
      job = [&](std::uint64_t size, unsigned w) {
        PfilterConfig cfg;
        cfg.particles = to_size(size);
        cfg.ess_threshold = c.get_double("ess_threshold");
        cfg.resampler = parse_resampler(c.get("resampler"));
        cfg.seed = cm.seed;
        cfg.workers = w;
        cfg.precision = cm.precision;
        cfg.generator = cm.generator;
        (void)particle_filter_run(cfg, *fsv, path.observations, path.length);
      };
      break;
    }
    default:
      throw ConfigError("bench: experiment must be istoy, popmcmc, smc-sampler or pfilter");
  }

  // Repetitions run round-robin over every (size, workers) pair so slow
  // periods on a shared host are spread across all entries.
  const std::size_t pairs = sizes.size() * workers_list.size();
  std::vector<std::vector<double>> times(pairs);
  for (std::uint64_t r = 0; r < reps; ++r) {
    for (std::size_t p = 0; p < pairs; ++p) {
      const auto size = sizes[p / workers_list.size()];
      const unsigned w = to_workers(workers_list[p % workers_list.size()]);
      const auto start = std::chrono::steady_clock::now();
      job(size, w);
      times[p].push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
  }

  std::vector<BenchRow> rows;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const std::size_t first = rows.size();
    for (std::size_t wi = 0; wi < workers_list.size(); ++wi) {
      auto& t = times[si * workers_list.size() + wi];
      std::sort(t.begin(), t.end());
      const std::size_t mid = t.size() / 2;
      const double median = t.size() % 2 == 1 ? t[mid] : 0.5 * (t[mid - 1] + t[mid]);
      rows.push_back({std::string(to_string(kind)), sizes[si], to_workers(workers_list[wi]), median, 1.0});
    }
    double base = rows[first].median_seconds;
    for (std::size_t i = first; i < rows.size(); ++i) {
      if (rows[i].workers == 1) {
        base = rows[i].median_seconds;
        break;
      }
    }
    for (std::size_t i = first; i < rows.size(); ++i) {
      rows[i].speedup = rows[i].median_seconds > 0.0 ? base / rows[i].median_seconds : 1.0;
    }
  }
  return rows;
}

RunSummary run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  ArtifactSet out;
  switch (config.kind()) {
    case ExperimentKind::istoy: run_istoy_experiment(config, out); break;
    case ExperimentKind::popmcmc: run_popmcmc_experiment(config, out); break;
    case ExperimentKind::smc_sampler: run_smc_experiment(config, out); break;
    case ExperimentKind::pfilter: run_pfilter_experiment(config, out); break;
    case ExperimentKind::gendata: run_gendata_experiment(config, out); break;
    case ExperimentKind::bench: run_bench_experiment(config, out); break;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out.write(config, out_dir, seconds);
}

}  // namespace popmc
