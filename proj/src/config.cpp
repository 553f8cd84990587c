#include "cdegan/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace cdegan {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an integer: '" + v + "'");
  }
}

uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    uint64_t x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an unsigned integer: '" +
                      v + "'");
  }
}

double to_real(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': not a boolean: '" + v + "'");
}

GMutation to_g_mutation(const std::string& key, const std::string& v) {
  if (v == "minimax") return GMutation::minimax;
  if (v == "heuristic") return GMutation::heuristic;
  if (v == "least_squares") return GMutation::least_squares;
  throw ConfigError("config key '" + key + "': unknown mutation '" + v +
                    "' (minimax|heuristic|least_squares)");
}

DMutation to_d_mutation(const std::string& key, const std::string& v) {
  if (v == "minimax") return DMutation::minimax;
  if (v == "least_squares") return DMutation::least_squares;
  throw ConfigError("config key '" + key + "': unknown mutation '" + v +
                    "' (minimax|least_squares)");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(v);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) parts.push_back(cur);
  }
  return parts;
}

template <typename M>
std::string join_menu(const std::vector<M>& menu) {
  std::string s;
  for (size_t i = 0; i < menu.size(); ++i) {
    if (i) s += ',';
    s += to_string(menu[i]);
  }
  return s;
}

}  // namespace

void apply_assignment(ExperimentConfig& cfg, const std::string& key,
                      const std::string& value) {
  const std::string v = trim(value);
  auto as_int = [&] { return static_cast<int>(to_int(key, v)); };
  auto as_i64 = [&] { return static_cast<int64_t>(to_int(key, v)); };

  if (key == "arch" || key == "architecture") {
    if (v != "mlp3" && v != "mlp4")
      throw ConfigError("config key '" + key + "': unknown architecture '" +
                        v + "' (mlp3|mlp4)");
    cfg.arch = v;
  } else if (key == "T" || key == "iterations") {
    cfg.train.iterations = as_int();
  } else if (key == "K" || key == "d_rounds") {
    cfg.train.d_rounds = as_int();
  } else if (key == "J" || key == "g_parents") {
    cfg.train.g_parents = as_int();
  } else if (key == "I" || key == "d_parents") {
    cfg.train.d_parents = as_int();
  } else if (key == "M" || key == "g_offspring") {
    cfg.train.g_offspring = as_int();
  } else if (key == "N" || key == "d_offspring") {
    cfg.train.d_offspring = as_int();
  } else if (key == "B" || key == "batch") {
    cfg.train.batch = as_int();
  } else if (key == "gamma") {
    cfg.train.gamma = to_real(key, v);
  } else if (key == "delta") {
    cfg.train.delta = to_real(key, v);
  } else if (key == "gp_lambda") {
    cfg.train.gp_lambda = to_real(key, v);
  } else if (key == "d_select") {
    if (v == "min")
      cfg.train.d_select = DSelect::min;
    else if (v == "max")
      cfg.train.d_select = DSelect::max;
    else
      throw ConfigError("config key '" + key + "': expected min|max, got '" +
                        v + "'");
  } else if (key == "g_menu") {
    std::vector<GMutation> menu;
    for (const auto& p : split_list(v)) menu.push_back(to_g_mutation(key, p));
    if (menu.empty()) throw ConfigError("config key 'g_menu': empty menu");
    cfg.train.g_menu = std::move(menu);
  } else if (key == "d_menu") {
    std::vector<DMutation> menu;
    for (const auto& p : split_list(v)) menu.push_back(to_d_mutation(key, p));
    if (menu.empty()) throw ConfigError("config key 'd_menu': empty menu");
    cfg.train.d_menu = std::move(menu);
  } else if (key == "adam.alpha") {
    cfg.train.adam.alpha = to_real(key, v);
  } else if (key == "adam.beta1") {
    cfg.train.adam.beta1 = to_real(key, v);
  } else if (key == "adam.beta2") {
    cfg.train.adam.beta2 = to_real(key, v);
  } else if (key == "adam.eps") {
    cfg.train.adam.eps = to_real(key, v);
  } else if (key == "seed") {
    cfg.seed = to_u64(key, v);
  } else if (key == "out_dir") {
    cfg.out_dir = v;
  } else if (key == "metrics_interval") {
    cfg.metrics_interval = as_i64();
  } else if (key == "checkpoint_interval") {
    cfg.checkpoint_interval = as_i64();
  } else if (key == "eval_samples") {
    cfg.eval_samples = as_int();
  } else if (key == "threshold_sigmas") {
    cfg.threshold_sigmas = to_real(key, v);
  } else if (key == "kde.resolution") {
    cfg.kde.resolution = as_int();
  } else if (key == "kde.bandwidth") {
    cfg.kde.bandwidth = to_real(key, v);
  } else if (key == "ring.modes") {
    cfg.ring.modes = as_int();
  } else if (key == "ring.radius") {
    cfg.ring.radius = to_real(key, v);
  } else if (key == "ring.sigma") {
    cfg.ring.sigma = to_real(key, v);
  } else if (key == "noise.dim") {
    cfg.noise.dim = as_int();
  } else if (key == "stop_on_coverage") {
    cfg.stop_on_coverage = to_bool(key, v);
  } else if (key == "stop_hq") {
    cfg.stop_hq = to_real(key, v);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override '" + assignment + "' is not KEY=VAL");
  apply_assignment(cfg, trim(assignment.substr(0, eq)),
                   assignment.substr(eq + 1));
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();

  size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file " + path + ": " + e.what());
    }
    if (j.contains("config")) j = j.at("config");
    return config_from_json(j);
  }

  ExperimentConfig cfg;
  std::string section;
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(path + ":" + std::to_string(lineno) +
                          ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    apply_assignment(cfg, key, line.substr(eq + 1));
  }
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  validate(cfg.train);
  if (cfg.arch != "mlp3" && cfg.arch != "mlp4")
    throw ConfigError("unknown architecture '" + cfg.arch + "'");
  if (cfg.ring.modes < 1) throw ConfigError("ring.modes must be >= 1");
  if (!(cfg.ring.radius > 0.0)) throw ConfigError("ring.radius must be > 0");
  if (cfg.ring.sigma < 0.0) throw ConfigError("ring.sigma must be >= 0");
  if (cfg.noise.dim < 1) throw ConfigError("noise.dim must be >= 1");
  if (cfg.metrics_interval < 1)
    throw ConfigError("metrics_interval must be >= 1");
  if (cfg.checkpoint_interval < 0)
    throw ConfigError("checkpoint_interval must be >= 0");
  if (cfg.eval_samples < 1) throw ConfigError("eval_samples must be >= 1");
  if (!(cfg.threshold_sigmas > 0.0))
    throw ConfigError("threshold_sigmas must be > 0");
  if (cfg.kde.resolution < 1) throw ConfigError("kde.resolution must be >= 1");
  if (!(cfg.kde.bandwidth > 0.0))
    throw ConfigError("kde.bandwidth must be > 0");
  if (cfg.stop_hq < 0.0 || cfg.stop_hq > 1.0)
    throw ConfigError("stop_hq must lie in [0, 1]");
}

nlohmann::json resolved_config(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["arch"] = cfg.arch;
  j["T"] = cfg.train.iterations;
  j["K"] = cfg.train.d_rounds;
  j["J"] = cfg.train.g_parents;
  j["I"] = cfg.train.d_parents;
  j["M"] = cfg.train.g_offspring;
  j["N"] = cfg.train.d_offspring;
  j["B"] = cfg.train.batch;
  j["gamma"] = cfg.train.gamma;
  j["delta"] = cfg.train.delta;
  j["gp_lambda"] = cfg.train.gp_lambda;
  j["d_select"] = cfg.train.d_select == DSelect::min ? "min" : "max";
  j["g_menu"] = join_menu(cfg.train.g_menu);
  j["d_menu"] = join_menu(cfg.train.d_menu);
  j["adam.alpha"] = cfg.train.adam.alpha;
  j["adam.beta1"] = cfg.train.adam.beta1;
  j["adam.beta2"] = cfg.train.adam.beta2;
  j["adam.eps"] = cfg.train.adam.eps;
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  j["metrics_interval"] = cfg.metrics_interval;
  j["checkpoint_interval"] = cfg.checkpoint_interval;
  j["eval_samples"] = cfg.eval_samples;
  j["threshold_sigmas"] = cfg.threshold_sigmas;
  j["kde.resolution"] = cfg.kde.resolution;
  j["kde.bandwidth"] = cfg.kde.bandwidth;
  j["ring.modes"] = cfg.ring.modes;
  j["ring.radius"] = cfg.ring.radius;
  j["ring.sigma"] = cfg.ring.sigma;
  j["noise.dim"] = cfg.noise.dim;
  j["stop_on_coverage"] = cfg.stop_on_coverage;
  j["stop_hq"] = cfg.stop_hq;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config JSON must be an object");
  ExperimentConfig cfg;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const nlohmann::json& v = it.value();
    std::string s;
    if (v.is_string())
      s = v.get<std::string>();
    else if (v.is_boolean())
      s = v.get<bool>() ? "true" : "false";
    else if (v.is_number())
      s = v.dump();  // shortest round-trip form
    else
      throw ConfigError("config key '" + it.key() +
                        "': unsupported JSON value");
    apply_assignment(cfg, it.key(), s);
  }
  return cfg;
}

MlpSpec generator_spec(const ExperimentConfig& cfg) {
  return cfg.arch == "mlp4" ? mlp4_generator(cfg.noise.dim)
                            : mlp3_generator(cfg.noise.dim);
}

MlpSpec discriminator_spec(const ExperimentConfig& cfg) {
  return cfg.arch == "mlp4" ? mlp4_discriminator() : mlp3_discriminator();
}

TrainSetup make_setup(const ExperimentConfig& cfg) {
  validate(cfg);
  TrainSetup setup;
  setup.g_spec = generator_spec(cfg);
  setup.d_spec = discriminator_spec(cfg);
  setup.ring = cfg.ring;
  setup.noise = cfg.noise;
  setup.cfg = cfg.train;
  setup.seed = cfg.seed;
  setup.metrics_interval = static_cast<int>(cfg.metrics_interval);
  setup.checkpoint_interval = static_cast<int>(cfg.checkpoint_interval);
  setup.eval_samples = cfg.eval_samples;
  setup.threshold_sigmas = cfg.threshold_sigmas;
  setup.stop_on_coverage = cfg.stop_on_coverage;
  setup.stop_hq = cfg.stop_hq;
  return setup;
}

}  // namespace cdegan
