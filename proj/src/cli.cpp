#include "cdegan/cli.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cdegan/config.hpp"
#include "cdegan/evolution.hpp"
#include "cdegan/metrics.hpp"

namespace fs = std::filesystem;

namespace cdegan {

namespace {

bool verbose() {
  const char* v = std::getenv("CDEGAN_VERBOSE");
  return v != nullptr && *v != '\0' && std::string(v) != "0";
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " +
                        ec.message());
}

// Exclusive lockfile; holding process removes it on destruction. A stale
// file from a killed run must be removed by hand, which beats two writers
// interleaving checkpoints.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".lock") {
    f_ = std::fopen(path_.string().c_str(), "wx");
    if (!f_)
      throw IoError("output directory " + dir.string() +
                    " is locked by another run (remove " + path_.string() +
                    " if stale)");
    std::fprintf(f_, "pid %ld\n", static_cast<long>(getpid()));
    std::fflush(f_);
  }
  ~DirLock() {
    if (f_) {
      std::fclose(f_);
      std::error_code ec;
      fs::remove(path_, ec);
    }
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
  std::FILE* f_ = nullptr;
};

void write_json_file(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("cannot write " + path.string());
}

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::string write_checkpoint(const fs::path& out_dir,
                             const ExperimentConfig& cfg,
                             const PopulationState& pop, int64_t iteration,
                             const std::deque<std::pair<int64_t, double>>&
                                 fitness_tail) {
  fs::path dir =
      out_dir / "checkpoints" / ("iter_" + std::to_string(iteration));
  ensure_dir(dir);
  nlohmann::json manifest;
  manifest["iteration"] = iteration;
  manifest["config"] = resolved_config(cfg);
  manifest["rng_state"] = {{"seed", cfg.seed}, {"iteration", iteration}};

  auto dump_side = [&](const std::vector<Individual>& side, const char* tag,
                       const MlpSpec& spec) {
    std::vector<std::string> names;
    for (size_t i = 0; i < side.size(); ++i) {
      std::string name = std::string(tag) + std::to_string(i) + ".json";
      NetCheckpoint ck;
      ck.spec = spec;
      ck.params = side[i].params;
      ck.adam = side[i].adam;
      ck.rng_seed = cfg.seed;
      ck.rng_counter = static_cast<uint64_t>(iteration);
      save_net_checkpoint((dir / name).string(), ck);
      names.push_back(name);
    }
    return names;
  };
  ExperimentConfig specs = cfg;
  manifest["generators"] = dump_side(pop.g_parents, "g", generator_spec(specs));
  manifest["discriminators"] =
      dump_side(pop.d_parents, "d", discriminator_spec(specs));
  // parents are stored in rank order; slot 0 is the selection winner
  manifest["best_generator"] = "g0.json";
  nlohmann::json tail = nlohmann::json::array();
  for (const auto& [it, f] : fitness_tail) tail.push_back({it, f});
  manifest["fitness_tail"] = tail;
  write_json_file(dir / "manifest.json", manifest);
  return dir.string();
}

nlohmann::json mode_report_json(const ModeReport& mr) {
  nlohmann::json j;
  j["covered_modes"] = mr.covered_modes;
  j["hq_ratio"] = mr.hq_ratio;
  j["hq_count"] = mr.hq_count;
  j["total"] = mr.total;
  j["per_mode_counts"] = mr.per_mode_counts;
  return j;
}

struct CheckpointedGen {
  NetCheckpoint net;
  ExperimentConfig cfg;  // defaults unless a manifest supplied one
};

// Accepts a checkpoint directory, a manifest path, or a single net file.
CheckpointedGen load_generator(const std::string& checkpoint) {
  fs::path p = checkpoint;
  if (fs::is_directory(p)) p /= "manifest.json";
  CheckpointedGen out;
  if (p.filename() == "manifest.json") {
    nlohmann::json manifest = read_json_file(p);
    if (!manifest.contains("best_generator") || !manifest.contains("config"))
      throw IoError(p.string() +
                    ": manifest lacks best_generator/config members");
    try {
      out.cfg = config_from_json(manifest.at("config"));
    } catch (const ConfigError& e) {
      throw IoError(p.string() + ": embedded config: " + e.what());
    }
    fs::path net_path =
        p.parent_path() / manifest.at("best_generator").get<std::string>();
    out.net = load_net_checkpoint(net_path.string());
  } else {
    out.net = load_net_checkpoint(p.string());
  }
  if (out.net.spec.role != Role::generator)
    throw IoError(checkpoint + ": checkpoint is not a generator");
  return out;
}

Matrix generator_samples(const CheckpointedGen& g, int n, uint64_t seed) {
  RngStream rng = RngStream(seed).child("cli_eval");
  NoiseSpec noise{g.net.spec.layers.front().in};
  Matrix z = sample_noise(noise, n, rng);
  return eval_generator(g.net.spec, g.net.params, z);
}

int cmd_train(const ExperimentConfig& cfg) {
  TrainSetup setup = make_setup(cfg);
  fs::path out_dir = cfg.out_dir;
  ensure_dir(out_dir);
  DirLock lock(out_dir);

  std::ofstream metrics_out(out_dir / "metrics.csv");
  if (!metrics_out)
    throw IoError("cannot write " + (out_dir / "metrics.csv").string());
  MetricsCsv csv(metrics_out, cfg.train.g_parents * cfg.train.g_offspring,
                 cfg.train.d_parents * cfg.train.d_offspring);
  csv.write_header();

  std::deque<std::pair<int64_t, double>> fitness_tail;
  std::string last_checkpoint;
  TrainHooks hooks;
  hooks.on_metrics = [&](const MetricsRecord& rec) {
    csv.write(rec);
    metrics_out.flush();
    if (!metrics_out)
      throw IoError("metrics stream failed" +
                    (last_checkpoint.empty()
                         ? std::string()
                         : "; last checkpoint " + last_checkpoint));
    double best = rec.g_fitness.empty()
                      ? 0.0
                      : *std::max_element(rec.g_fitness.begin(),
                                          rec.g_fitness.end());
    fitness_tail.emplace_back(rec.iter, best);
    while (fitness_tail.size() > 16) fitness_tail.pop_front();
  };
  hooks.on_checkpoint = [&](const PopulationState& pop, int64_t t) {
    last_checkpoint = write_checkpoint(out_dir, cfg, pop, t, fitness_tail);
  };
  if (verbose())
    hooks.on_progress = [](const std::string& line) {
      std::cerr << line << '\n';
    };

  TrainResult res = train(setup, hooks);

  nlohmann::json summary;
  summary["covered_modes"] = res.final_coverage.covered_modes;
  summary["hq_ratio"] = res.final_coverage.hq_ratio;
  summary["iterations"] = res.completed;
  if (res.first_covered_iter)
    summary["first_covered_iter"] = *res.first_covered_iter;
  if (res.halted) {
    summary["halted"] = {{"iteration", res.halted->iteration},
                         {"what", res.halted->what}};
  }
  summary["config"] = resolved_config(cfg);
  write_json_file(out_dir / "summary.json", summary);

  if (res.halted) {
    std::cerr << "numeric failure at iteration " << res.halted->iteration
              << ": " << res.halted->what << "\nlast checkpoint: "
              << last_checkpoint << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

int cmd_eval(const std::string& checkpoint, int n, uint64_t seed) {
  if (n <= 0) throw ConfigError("--n must be >= 1");
  CheckpointedGen g = load_generator(checkpoint);
  Matrix samples = generator_samples(g, n, seed);
  ModeReport mr = mode_coverage(samples, g.cfg.ring, g.cfg.threshold_sigmas);
  std::cout << mode_report_json(mr).dump(2) << '\n';
  return kExitOk;
}

int cmd_sample(const ExperimentConfig& cfg, const std::string& checkpoint,
               int n, uint64_t seed, const std::string& out_dir) {
  if (n <= 0) throw ConfigError("--n must be >= 1");
  ensure_dir(out_dir);
  Matrix samples;
  if (checkpoint.empty()) {
    RngStream rng = RngStream(seed).child("cli_sample");
    samples = sample_real(cfg.ring, n, rng);
  } else {
    samples = generator_samples(load_generator(checkpoint), n, seed);
  }
  fs::path path = fs::path(out_dir) / "samples.csv";
  std::ofstream out(path);
  write_matrix_csv(out, samples);
  if (!out) throw IoError("cannot write " + path.string());
  return kExitOk;
}

int cmd_plot_data(const std::string& checkpoint, int n, uint64_t seed,
                  const std::string& out_dir) {
  if (n <= 0) throw ConfigError("--n must be >= 1");
  CheckpointedGen g = load_generator(checkpoint);
  Matrix samples = generator_samples(g, n, seed);
  ensure_dir(out_dir);

  fs::path sp = fs::path(out_dir) / "samples.csv";
  std::ofstream sout(sp);
  write_matrix_csv(sout, samples);
  if (!sout) throw IoError("cannot write " + sp.string());

  KdeGrid grid =
      kde_grid(samples, g.cfg.ring, g.cfg.kde.resolution, g.cfg.kde.bandwidth);
  fs::path gp = fs::path(out_dir) / "kde_grid.csv";
  std::ofstream gout(gp);
  write_kde_csv(gout, grid);
  if (!gout) throw IoError("cannot write " + gp.string());
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"cooperative dual-evolution GAN on the 8-gaussian ring"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string checkpoint;
  std::vector<std::string> overrides;
  uint64_t seed = 0;
  bool seed_set = false;
  int n = 512;

  auto add_config_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file (key = value)");
    cmd->add_option("--override", overrides, "KEY=VAL, repeatable")
        ->take_all();
    cmd->add_option_function<uint64_t>(
        "--seed", [&](uint64_t s) { seed = s; seed_set = true; }, "rng seed");
  };

  CLI::App* tr = app.add_subcommand("train", "run evolutionary training");
  add_config_flags(tr);
  tr->add_option("--out-dir", out_dir, "output directory");

  CLI::App* ev = app.add_subcommand("eval", "score a checkpointed generator");
  ev->add_option("--checkpoint", checkpoint, "checkpoint dir, manifest, or net file")
      ->required();
  ev->add_option("--n", n, "sample count");
  ev->add_option_function<uint64_t>(
      "--seed", [&](uint64_t s) { seed = s; seed_set = true; }, "rng seed");

  CLI::App* sa = app.add_subcommand("sample", "dump data or generator samples");
  add_config_flags(sa);
  sa->add_option("--checkpoint", checkpoint,
                 "sample this generator instead of the dataset");
  sa->add_option("--n", n, "sample count");
  sa->add_option("--out-dir", out_dir, "output directory");

  CLI::App* pl = app.add_subcommand("plot-data",
                                    "write samples.csv and kde_grid.csv");
  pl->add_option("--checkpoint", checkpoint, "checkpoint dir, manifest, or net file")
      ->required();
  pl->add_option("--n", n, "sample count");
  pl->add_option_function<uint64_t>(
      "--seed", [&](uint64_t s) { seed = s; seed_set = true; }, "rng seed");
  pl->add_option("--out-dir", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    for (const std::string& ov : overrides) apply_override(cfg, ov);
    if (seed_set) cfg.seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;

    if (tr->parsed()) return cmd_train(cfg);
    if (ev->parsed())
      return cmd_eval(checkpoint, n, seed_set ? seed : cfg.seed);
    if (sa->parsed())
      return cmd_sample(cfg, checkpoint, n, seed_set ? seed : cfg.seed,
                        out_dir.empty() ? cfg.out_dir : out_dir);
    if (pl->parsed())
      return cmd_plot_data(checkpoint, n, seed_set ? seed : cfg.seed,
                           out_dir.empty() ? cfg.out_dir : out_dir);
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace cdegan
