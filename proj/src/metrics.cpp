#include "cdegan/metrics.hpp"

#include <cmath>
#include <ostream>

namespace cdegan {

ModeReport mode_coverage(const Matrix& samples, const GaussianRingSpec& ring,
                         double threshold_sigmas) {
  if (samples.cols() != 2 && samples.rows() > 0)
    throw ContractError("mode_coverage: samples must be n x 2");
  Matrix centers = ring_centers(ring);
  ModeReport rep;
  rep.total = static_cast<int>(samples.rows());
  rep.per_mode_counts.assign(ring.modes, 0);
  double threshold = threshold_sigmas * ring.sigma;

  for (Eigen::Index s = 0; s < samples.rows(); ++s) {
    int nearest = 0;
    double best = (samples.row(s) - centers.row(0)).norm();
    for (int k = 1; k < ring.modes; ++k) {
      double d = (samples.row(s) - centers.row(k)).norm();
      if (d < best) {
        best = d;
        nearest = k;
      }
    }
    if (best <= threshold) {
      ++rep.hq_count;
      ++rep.per_mode_counts[nearest];
    }
  }

  if (rep.total > 0) {
    int floor_count = (rep.total + 99) / 100;  // ceil of 1%
    for (int c : rep.per_mode_counts)
      if (c >= floor_count) ++rep.covered_modes;
    rep.hq_ratio = static_cast<double>(rep.hq_count) / rep.total;
  }
  return rep;
}

KdeGrid kde_grid(const Matrix& samples, const GaussianRingSpec& ring,
                 int resolution, double bandwidth) {
  if (resolution < 1) throw ConfigError("kde: resolution must be >= 1");
  if (bandwidth <= 0.0) throw ConfigError("kde: bandwidth must be positive");
  if (samples.cols() != 2 && samples.rows() > 0)
    throw ContractError("kde_grid: samples must be n x 2");

  KdeGrid g;
  g.resolution = resolution;
  g.bandwidth = bandwidth;
  g.hi = ring.radius + 0.5;
  g.lo = -g.hi;
  g.density = Matrix::Zero(resolution, resolution);

  const double cell = g.cell();
  Vector centers(resolution);
  for (int i = 0; i < resolution; ++i) centers(i) = g.lo + (i + 0.5) * cell;

  const double inv2h2 = 1.0 / (2.0 * bandwidth * bandwidth);
  Vector ex(resolution), ey(resolution);
  for (Eigen::Index s = 0; s < samples.rows(); ++s) {
    for (int i = 0; i < resolution; ++i) {
      double dx = centers(i) - samples(s, 0);
      double dy = centers(i) - samples(s, 1);
      ex(i) = std::exp(-dx * dx * inv2h2);
      ey(i) = std::exp(-dy * dy * inv2h2);
    }
    g.density.noalias() += ex * ey.transpose();
  }

  double mass = g.density.sum() * cell * cell;
  if (mass > 0.0) g.density /= mass;
  return g;
}

MetricsCsv::MetricsCsv(std::ostream& out, int g_offspring, int d_offspring)
    : out_(out), g_offspring_(g_offspring), d_offspring_(d_offspring) {}

void MetricsCsv::write_header() {
  out_ << "iter,t_wall_s";
  for (int i = 1; i <= g_offspring_; ++i) out_ << ",g_fit_" << i;
  for (int i = 1; i <= g_offspring_; ++i) out_ << ",g_mut_" << i;
  out_ << ",g_survivor_muts";
  for (int i = 1; i <= d_offspring_; ++i) out_ << ",d_fit_" << i;
  out_ << ",d_survivor_idx,covered_modes,hq_ratio,d_grad_norm_mean\n";
  out_.flush();
}

void MetricsCsv::write(const MetricsRecord& r) {
  if (static_cast<int>(r.g_fitness.size()) != g_offspring_ ||
      static_cast<int>(r.g_mutations.size()) != g_offspring_ ||
      static_cast<int>(r.d_fitness.size()) != d_offspring_)
    throw ContractError("metrics row does not match the column schema");
  out_ << r.iter << ',' << format_double(r.t_wall_s);
  for (double f : r.g_fitness) out_ << ',' << format_double(f);
  for (GMutation m : r.g_mutations) out_ << ',' << to_string(m);
  out_ << ',';
  for (size_t i = 0; i < r.g_survivor_muts.size(); ++i)
    out_ << (i ? "|" : "") << to_string(r.g_survivor_muts[i]);
  for (double f : r.d_fitness) out_ << ',' << format_double(f);
  out_ << ',';
  for (size_t i = 0; i < r.d_survivor_idx.size(); ++i)
    out_ << (i ? "|" : "") << r.d_survivor_idx[i];
  out_ << ',' << r.covered_modes << ',' << format_double(r.hq_ratio) << ','
       << format_double(r.d_grad_norm_mean) << '\n';
  out_.flush();
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      out << (c ? "," : "") << format_double(m(r, c));
    out << '\n';
  }
}

void write_kde_csv(std::ostream& out, const KdeGrid& g) {
  out << "x,y,density\n";
  for (int i = 0; i < g.resolution; ++i)
    for (int j = 0; j < g.resolution; ++j)
      out << format_double(g.x_center(i)) << ',' << format_double(g.y_center(j))
          << ',' << format_double(g.density(i, j)) << '\n';
}

}  // namespace cdegan
