#include "cdegan/evolution.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace cdegan {

void validate(const TrainConfig& cfg) {
  if (cfg.iterations < 0) throw ConfigError("iterations must be >= 0");
  if (cfg.d_rounds < 1) throw ConfigError("d_rounds must be >= 1");
  if (cfg.g_parents < 1) throw ConfigError("g_parents must be >= 1");
  if (cfg.d_parents < 1) throw ConfigError("d_parents must be >= 1");
  if (cfg.g_offspring < 1) throw ConfigError("g_offspring must be >= 1");
  if (cfg.d_offspring < 1) throw ConfigError("d_offspring must be >= 1");
  if (cfg.batch < 1) throw ConfigError("batch must be >= 1");
  if (!(cfg.gamma > 0.0) || cfg.gamma > 1.0)
    throw ConfigError("gamma must lie in (0, 1]");
  if (cfg.delta < 0.0) throw ConfigError("delta must be >= 0");
  if (cfg.gp_lambda < 0.0) throw ConfigError("gp_lambda must be >= 0");
  if (cfg.g_menu.empty() || cfg.d_menu.empty())
    throw ConfigError("mutation menus must not be empty");
  if (!(cfg.adam.alpha > 0.0)) throw ConfigError("adam.alpha must be positive");
  if (cfg.adam.beta1 < 0.0 || cfg.adam.beta1 >= 1.0 || cfg.adam.beta2 < 0.0 ||
      cfg.adam.beta2 >= 1.0)
    throw ConfigError("adam betas must lie in [0, 1)");
}

namespace streams {

RngStream init_g(const RngStream& root, int j) {
  return root.child("init_g").child(static_cast<uint64_t>(j));
}

RngStream init_d(const RngStream& root, int i) {
  return root.child("init_d").child(static_cast<uint64_t>(i));
}

RngStream d_var(const RngStream& root, int64_t t, int k, int i, int group) {
  return root.child("d_var")
      .child(static_cast<uint64_t>(t))
      .child(static_cast<uint64_t>(k))
      .child(static_cast<uint64_t>(i))
      .child(static_cast<uint64_t>(group));
}

RngStream d_eval(const RngStream& root, int64_t t, int k) {
  return root.child("d_eval")
      .child(static_cast<uint64_t>(t))
      .child(static_cast<uint64_t>(k));
}

RngStream g_var(const RngStream& root, int64_t t, int j, int group) {
  return root.child("g_var")
      .child(static_cast<uint64_t>(t))
      .child(static_cast<uint64_t>(j))
      .child(static_cast<uint64_t>(group));
}

RngStream g_eval(const RngStream& root, int64_t t) {
  return root.child("g_eval").child(static_cast<uint64_t>(t));
}

RngStream gp_draw(const RngStream& root, int64_t t, int k, int i, int n) {
  return root.child("gp")
      .child(static_cast<uint64_t>(t))
      .child(static_cast<uint64_t>(k))
      .child(static_cast<uint64_t>(i))
      .child(static_cast<uint64_t>(n));
}

RngStream metrics_eval(const RngStream& root, int64_t t) {
  return root.child("metrics").child(static_cast<uint64_t>(t));
}

Matrix real_of(const RngStream& s, const GaussianRingSpec& ring, int n) {
  RngStream r = s.child("real");
  return sample_real(ring, n, r);
}

Matrix noise_of(const RngStream& s, const NoiseSpec& noise, int n) {
  RngStream r = s.child("noise");
  return sample_noise(noise, n, r);
}

}  // namespace streams

Matrix make_fake(const MlpSpec& g_spec, const std::vector<Individual>& gens,
                 const Matrix& z) {
  if (gens.empty()) throw ContractError("make_fake: no generators");
  const Eigen::Index B = z.rows();
  const Eigen::Index J = static_cast<Eigen::Index>(gens.size());
  Matrix out(B, g_spec.layers.back().out);
  Eigen::Index base = B / J;
  Eigen::Index extra = B % J;
  Eigen::Index row = 0;
  for (Eigen::Index j = 0; j < J; ++j) {
    Eigen::Index share = base + (j < extra ? 1 : 0);
    if (share == 0) continue;
    out.middleRows(row, share) = eval_generator(
        g_spec, gens[static_cast<size_t>(j)].params, z.middleRows(row, share));
    row += share;
  }
  return out;
}

PopulationState init_population(const TrainSetup& setup) {
  validate(setup.cfg);
  validate(setup.g_spec);
  validate(setup.d_spec);
  RngStream root(setup.seed);
  PopulationState pop;
  pop.config = setup.cfg;
  for (int j = 0; j < setup.cfg.g_parents; ++j) {
    Individual ind;
    RngStream s = streams::init_g(root, j);
    ind.params = build_mlp(setup.g_spec, s);
    ind.adam = AdamState::init_like(ind.params, setup.cfg.adam);
    ind.lineage = j;
    pop.g_parents.push_back(std::move(ind));
  }
  for (int i = 0; i < setup.cfg.d_parents; ++i) {
    Individual ind;
    RngStream s = streams::init_d(root, i);
    ind.params = build_mlp(setup.d_spec, s);
    ind.adam = AdamState::init_like(ind.params, setup.cfg.adam);
    ind.lineage = i;
    pop.d_parents.push_back(std::move(ind));
  }
  return pop;
}

namespace {

void take_grads(Tape& tape, const std::vector<Var>& vars, ParamSet& p) {
  p.grads.clear();
  p.grads.reserve(vars.size());
  for (Var v : vars) p.grads.push_back(tape.grad(v));
}

void check_finite(double v, const std::string& where) {
  if (!std::isfinite(v)) throw NumericError(where + " is not finite");
}

}  // namespace

DRoundReport d_evolution_round(PopulationState& pop, const TrainSetup& setup,
                               int64_t t, int k) {
  const TrainConfig& cfg = pop.config;
  RngStream root(setup.seed);
  const int menu = static_cast<int>(cfg.d_menu.size());
  DRoundReport rep;
  std::vector<Individual> pool;
  pool.reserve(static_cast<size_t>(cfg.d_parents) * cfg.d_offspring);

  for (int i = 0; i < static_cast<int>(pop.d_parents.size()); ++i) {
    // variation batches are fresh per parent and per menu cycle
    std::vector<std::pair<Matrix, Matrix>> batches;  // (real, fake) per group
    for (int n = 0; n < cfg.d_offspring; ++n) {
      DMutation kind = cfg.d_menu[static_cast<size_t>(n % menu)];
      int group = n / menu;
      while (static_cast<int>(batches.size()) <= group) {
        RngStream s = streams::d_var(root, t, k, i,
                                     static_cast<int>(batches.size()));
        Matrix real = streams::real_of(s, setup.ring, cfg.batch);
        Matrix z = streams::noise_of(s, setup.noise, cfg.batch);
        batches.emplace_back(std::move(real),
                             make_fake(setup.g_spec, pop.g_parents, z));
      }
      const auto& [real, fake] = batches[static_cast<size_t>(group)];

      Individual off = pop.d_parents[static_cast<size_t>(i)];
      off.lineage = i;
      off.d_origin = kind;
      off.g_origin.reset();
      off.fitness.reset();

      Tape tape;
      tape.reserve(64);
      DLossResult dl = d_loss(tape, kind, setup.d_spec, off.params, real, fake);
      Var target = dl.train_loss;
      if (cfg.gp_lambda > 0.0) {
        RngStream gs = streams::gp_draw(root, t, k, i, n);
        target = add(target,
                     gradient_penalty(tape, setup.d_spec, off.params,
                                      dl.disc_params, real, fake, gs,
                                      cfg.gp_lambda));
      }
      double lv = tape.value(target)(0, 0);
      check_finite(lv, "iteration " + std::to_string(t) +
                           ": discriminator variation loss");
      rep.var_losses.push_back(lv);
      rep.mutations.push_back(kind);

      tape.backward(target);
      take_grads(tape, dl.disc_params, off.params);
      adam_step(off.params, off.adam);
      pool.push_back(std::move(off));
    }
  }

  RngStream es = streams::d_eval(root, t, k);
  Matrix real_e = streams::real_of(es, setup.ring, cfg.batch);
  Matrix fake_e = make_fake(setup.g_spec, pop.g_parents,
                            streams::noise_of(es, setup.noise, cfg.batch));
  for (Individual& off : pool) {
    DFitness fd = fitness_discriminator(setup.d_spec, off.params, real_e, fake_e);
    check_finite(fd.fitness,
                 "iteration " + std::to_string(t) + ": discriminator fitness");
    off.fitness = fd.fitness;
    rep.fitness.push_back(fd.fitness);
    rep.grad_norms.push_back(fd.grad_norm);
  }

  std::vector<int> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  // ties keep construction order: parent index, then menu slot
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    double fa = *pool[static_cast<size_t>(a)].fitness;
    double fb = *pool[static_cast<size_t>(b)].fitness;
    return cfg.d_select == DSelect::min ? fa < fb : fa > fb;
  });
  rep.survivors.assign(order.begin(), order.begin() + pop.d_parents.size());
  std::vector<Individual> next;
  next.reserve(pop.d_parents.size());
  for (int idx : rep.survivors)
    next.push_back(std::move(pool[static_cast<size_t>(idx)]));
  pop.d_parents = std::move(next);
  return rep;
}

GRoundReport g_evolution_round(PopulationState& pop, const TrainSetup& setup,
                               int64_t t) {
  const TrainConfig& cfg = pop.config;
  RngStream root(setup.seed);
  const int menu = static_cast<int>(cfg.g_menu.size());
  GRoundReport rep;
  std::vector<Individual> pool;
  pool.reserve(static_cast<size_t>(cfg.g_parents) * cfg.g_offspring);

  // the committee the offspring train and score against, frozen at entry
  std::vector<ParamSet> discs;
  discs.reserve(pop.d_parents.size());
  for (const Individual& d : pop.d_parents) discs.push_back(d.params);

  for (int j = 0; j < static_cast<int>(pop.g_parents.size()); ++j) {
    std::vector<Matrix> zs;  // noise per menu cycle
    for (int m = 0; m < cfg.g_offspring; ++m) {
      GMutation kind = cfg.g_menu[static_cast<size_t>(m % menu)];
      int group = m / menu;
      while (static_cast<int>(zs.size()) <= group) {
        RngStream s =
            streams::g_var(root, t, j, static_cast<int>(zs.size()));
        zs.push_back(streams::noise_of(s, setup.noise, cfg.batch));
      }
      const Matrix& z = zs[static_cast<size_t>(group)];

      Individual off = pop.g_parents[static_cast<size_t>(j)];
      off.lineage = j;
      off.g_origin = kind;
      off.d_origin.reset();
      off.fitness.reset();

      Tape tape;
      tape.reserve(64 + 24 * static_cast<int>(discs.size()));
      GLossResult gl = g_loss(tape, kind, setup.g_spec, off.params,
                              setup.d_spec, discs, z, cfg.delta);
      double lv = tape.value(gl.loss)(0, 0);
      check_finite(lv, "iteration " + std::to_string(t) +
                           ": generator variation loss");
      rep.var_losses.push_back(lv);
      rep.mutations.push_back(kind);

      tape.backward(gl.loss);
      take_grads(tape, gl.gen_params, off.params);
      adam_step(off.params, off.adam);
      pool.push_back(std::move(off));
    }
  }

  RngStream es = streams::g_eval(root, t);
  Matrix real_e = streams::real_of(es, setup.ring, cfg.batch);
  Matrix z_e = streams::noise_of(es, setup.noise, cfg.batch);
  for (Individual& off : pool) {
    GFitness gf = fitness_generator(setup.g_spec, off.params, setup.d_spec,
                                    discs, real_e, z_e, cfg.gamma, cfg.delta);
    check_finite(gf.combined,
                 "iteration " + std::to_string(t) + ": generator fitness");
    off.fitness = gf.combined;
    rep.fitness.push_back(gf.combined);
    rep.quality.push_back(gf.quality);
    rep.diversity.push_back(gf.diversity);
  }

  std::vector<int> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return *pool[static_cast<size_t>(a)].fitness >
           *pool[static_cast<size_t>(b)].fitness;
  });
  rep.survivors.assign(order.begin(), order.begin() + pop.g_parents.size());
  std::vector<Individual> next;
  next.reserve(pop.g_parents.size());
  for (int idx : rep.survivors)
    next.push_back(std::move(pool[static_cast<size_t>(idx)]));
  pop.g_parents = std::move(next);
  return rep;
}

namespace {

ModeReport coverage_at(const TrainSetup& setup, const PopulationState& pop,
                       int64_t t) {
  RngStream root(setup.seed);
  Matrix z = streams::noise_of(streams::metrics_eval(root, t), setup.noise,
                               setup.eval_samples);
  Matrix samples =
      eval_generator(setup.g_spec, pop.g_parents.front().params, z);
  return mode_coverage(samples, setup.ring, setup.threshold_sigmas);
}

}  // namespace

TrainResult train(const TrainSetup& setup, const TrainHooks& hooks) {
  TrainResult res;
  res.pop = init_population(setup);
  const TrainConfig& cfg = res.pop.config;
  auto wall0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         wall0)
        .count();
  };

  DRoundReport last_d;
  GRoundReport last_g;
  try {
    for (int64_t t = 1; t <= cfg.iterations; ++t) {
      for (int k = 1; k <= cfg.d_rounds; ++k)
        last_d = d_evolution_round(res.pop, setup, t, k);
      last_g = g_evolution_round(res.pop, setup, t);
      res.pop.iteration = t;
      res.completed = t;

      bool metrics_due =
          (setup.metrics_interval > 0 && t % setup.metrics_interval == 0) ||
          t == cfg.iterations;
      bool stop_hit = false;
      if (metrics_due) {
        ModeReport mr = coverage_at(setup, res.pop, t);
        MetricsRecord rec;
        rec.iter = t;
        rec.t_wall_s = elapsed();
        rec.g_fitness = last_g.fitness;
        rec.g_mutations = last_g.mutations;
        for (int s : last_g.survivors)
          rec.g_survivor_muts.push_back(
              last_g.mutations[static_cast<size_t>(s)]);
        rec.d_fitness = last_d.fitness;
        rec.d_survivor_idx = last_d.survivors;
        rec.covered_modes = mr.covered_modes;
        rec.hq_ratio = mr.hq_ratio;
        if (!last_d.grad_norms.empty())
          rec.d_grad_norm_mean =
              std::accumulate(last_d.grad_norms.begin(),
                              last_d.grad_norms.end(), 0.0) /
              static_cast<double>(last_d.grad_norms.size());
        if (hooks.on_metrics) hooks.on_metrics(rec);
        if (hooks.on_progress) {
          hooks.on_progress("iter " + std::to_string(t) + " covered " +
                            std::to_string(mr.covered_modes) + " hq " +
                            std::to_string(mr.hq_ratio));
        }
        if (setup.stop_on_coverage && mr.covered_modes == setup.ring.modes &&
            mr.hq_ratio >= setup.stop_hq) {
          res.first_covered_iter = t;
          stop_hit = true;
        }
      }
      if (setup.checkpoint_interval > 0 &&
          t % setup.checkpoint_interval == 0 && hooks.on_checkpoint)
        hooks.on_checkpoint(res.pop, t);
      if (stop_hit) break;
    }
  } catch (const NumericError& e) {
    if (hooks.on_checkpoint) hooks.on_checkpoint(res.pop, res.completed);
    res.halted = HaltInfo{res.completed + 1, e.what()};
    res.final_coverage = coverage_at(setup, res.pop, res.completed);
    return res;
  }

  res.final_coverage = coverage_at(setup, res.pop, res.completed);
  if (hooks.on_checkpoint) hooks.on_checkpoint(res.pop, res.completed);
  return res;
}

}  // namespace cdegan
