#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cdegan/fitness.hpp"
#include "cdegan/metrics.hpp"

namespace cdegan {

enum class DSelect { min, max };

// Population and schedule knobs. Letters in comments follow the usual
// population-method naming so logs stay short.
struct TrainConfig {
  int iterations = 10000;   // T, generator iterations
  int d_rounds = 3;         // K, discriminator rounds per iteration
  int g_parents = 1;        // J
  int d_parents = 2;        // I
  int g_offspring = 3;      // M, offspring per generator parent
  int d_offspring = 2;      // N, offspring per discriminator parent
  int batch = 32;           // B
  double gamma = 0.1;       // diversity weight in generator fitness
  double delta = 1.0;       // soft-weight temperature
  double gp_lambda = 0.0;   // gradient penalty, 0 disables
  AdamHyper adam;
  DSelect d_select = DSelect::min;
  // Mutation menus; offspring m draws menu[m % menu.size()]. The defaults
  // are the full menus; trimming one to a single entry pins every offspring
  // to that mutation.
  std::vector<GMutation> g_menu = {GMutation::minimax, GMutation::heuristic,
                                   GMutation::least_squares};
  std::vector<DMutation> d_menu = {DMutation::minimax,
                                   DMutation::least_squares};
};

void validate(const TrainConfig& cfg);

struct Individual {
  ParamSet params;
  AdamState adam;
  std::optional<double> fitness;
  int lineage = -1;  // parent slot this came from
  std::optional<GMutation> g_origin;
  std::optional<DMutation> d_origin;
};

struct PopulationState {
  std::vector<Individual> g_parents;
  std::vector<Individual> d_parents;
  TrainConfig config;
  int64_t iteration = 0;
};

struct TrainSetup {
  MlpSpec g_spec;
  MlpSpec d_spec;
  GaussianRingSpec ring;
  NoiseSpec noise;
  TrainConfig cfg;
  uint64_t seed = 1;
  int metrics_interval = 1;
  int checkpoint_interval = 0;  // 0: only the final checkpoint hook fires
  int eval_samples = 512;
  double threshold_sigmas = 3.0;
  // Optional early exit once a metrics row reaches full coverage at or
  // above stop_hq.
  bool stop_on_coverage = false;
  double stop_hq = 0.8;
};

// Offspring appear parent-major in menu order, so index -> (parent, menu
// slot) is fixed; survivor lists hold pool indices in rank order.
struct DRoundReport {
  std::vector<double> var_losses;   // training loss at the variation step
  std::vector<double> fitness;
  std::vector<double> grad_norms;
  std::vector<DMutation> mutations;
  std::vector<int> survivors;
};

struct GRoundReport {
  std::vector<double> var_losses;
  std::vector<double> fitness;
  std::vector<double> quality;
  std::vector<double> diversity;
  std::vector<GMutation> mutations;
  std::vector<int> survivors;
};

// Deterministic stream labels. Tests and oracles rebuild the exact batches a
// round consumed by asking for the same child.
namespace streams {
RngStream init_g(const RngStream& root, int j);
RngStream init_d(const RngStream& root, int i);
// group = offspring / menu size; offspring sharing a group share batches
RngStream d_var(const RngStream& root, int64_t t, int k, int i, int group);
RngStream d_eval(const RngStream& root, int64_t t, int k);
RngStream g_var(const RngStream& root, int64_t t, int j, int group);
RngStream g_eval(const RngStream& root, int64_t t);
RngStream gp_draw(const RngStream& root, int64_t t, int k, int i, int n);
RngStream metrics_eval(const RngStream& root, int64_t t);
// a (real, noise) pair drawn from one stream's children
Matrix real_of(const RngStream& s, const GaussianRingSpec& ring, int n);
Matrix noise_of(const RngStream& s, const NoiseSpec& noise, int n);
}  // namespace streams

// Noise rows routed through the generator parents in contiguous,
// near-equal shares (first shares take the remainder).
Matrix make_fake(const MlpSpec& g_spec, const std::vector<Individual>& gens,
                 const Matrix& z);

PopulationState init_population(const TrainSetup& setup);

// One discriminator generation: clone each parent per menu entry, take one
// optimizer step on that entry's loss against fresh batches, score everyone
// on a shared evaluation batch, keep the configured end of the order.
DRoundReport d_evolution_round(PopulationState& pop, const TrainSetup& setup,
                               int64_t t, int k);

// One generator generation against the current discriminator parents;
// survivors are the top combined-fitness offspring.
GRoundReport g_evolution_round(PopulationState& pop, const TrainSetup& setup,
                               int64_t t);

struct HaltInfo {
  int64_t iteration = 0;
  std::string what;
};

struct TrainHooks {
  std::function<void(const MetricsRecord&)> on_metrics;
  std::function<void(const PopulationState&, int64_t)> on_checkpoint;
  std::function<void(const std::string&)> on_progress;
};

struct TrainResult {
  PopulationState pop;
  int64_t completed = 0;
  std::optional<HaltInfo> halted;
  std::optional<int64_t> first_covered_iter;
  ModeReport final_coverage;
};

// K discriminator rounds then one generator round, T times. Emits metrics
// every metrics_interval iterations (and at the last one), checkpoints on
// its own interval plus once at the end; a non-finite loss or fitness
// checkpoints and returns with halted set.
TrainResult train(const TrainSetup& setup, const TrainHooks& hooks = {});

}  // namespace cdegan
