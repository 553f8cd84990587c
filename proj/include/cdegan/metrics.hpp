#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cdegan/data.hpp"
#include "cdegan/objectives.hpp"

namespace cdegan {

// A sample is high quality when its nearest ring center lies within
// threshold_sigmas * sigma. A mode counts as covered once it holds at least
// ceil(1% of n) high-quality samples.
struct ModeReport {
  int covered_modes = 0;
  double hq_ratio = 0.0;
  int hq_count = 0;
  int total = 0;
  std::vector<int> per_mode_counts;
};

ModeReport mode_coverage(const Matrix& samples, const GaussianRingSpec& ring,
                         double threshold_sigmas = 3.0);

// Isotropic gaussian KDE on a square midpoint grid over
// [-(radius+0.5), radius+0.5]^2, normalized so density * cell_area sums
// to one. density(i, j) is the cell centered at (x_i, y_j).
struct KdeGrid {
  int resolution = 0;
  double bandwidth = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  Matrix density;

  double cell() const { return (hi - lo) / resolution; }
  double x_center(int i) const { return lo + (i + 0.5) * cell(); }
  double y_center(int j) const { return lo + (j + 0.5) * cell(); }
};

KdeGrid kde_grid(const Matrix& samples, const GaussianRingSpec& ring,
                 int resolution = 200, double bandwidth = 0.1);

// One metrics row per emitting iteration.
struct MetricsRecord {
  int64_t iter = 0;
  double t_wall_s = 0.0;
  std::vector<double> g_fitness;           // all generator offspring, in order
  std::vector<GMutation> g_mutations;
  std::vector<GMutation> g_survivor_muts;  // tags of the selected generators
  std::vector<double> d_fitness;           // last discriminator round
  std::vector<int> d_survivor_idx;
  int covered_modes = 0;
  double hq_ratio = 0.0;
  double d_grad_norm_mean = 0.0;
};

// Fixed column schema; offspring column counts come from the population
// shape. Doubles are written so they parse back exactly.
class MetricsCsv {
 public:
  MetricsCsv(std::ostream& out, int g_offspring, int d_offspring);
  void write_header();
  void write(const MetricsRecord& r);

 private:
  std::ostream& out_;
  int g_offspring_;
  int d_offspring_;
};

void write_matrix_csv(std::ostream& out, const Matrix& m);

void write_kde_csv(std::ostream& out, const KdeGrid& grid);

}  // namespace cdegan
