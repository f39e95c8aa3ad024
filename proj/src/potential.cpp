#include "kamred/potential.hpp"

#include <cmath>
#include <cstdlib>

#include "kamred/errors.hpp"

namespace kamred {

double cosine_coupling(int j, int l, int k) {
  if (j < 0 || l < 1 || k < 1) return 0.0;
  double c = 0.0;
  // difference branch; at j = 0 both signs of l - k coincide and the two
  // quarter contributions merge into pi/2 on the diagonal
  if (std::abs(l - k) == 2 * j) c += (j == 0) ? M_PI / 2.0 : M_PI / 4.0;
  // sum branch; never active for j = 0 since l + k >= 2
  if (l + k == 2 * j) c -= M_PI / 4.0;
  return c;
}

int Potential::support_radius() const {
  int r = 0;
  for (const auto& prof : profiles)
    for (const auto& [k, v] : prof) r = std::max(r, l1_norm(k));
  return r;
}

double Potential::reality_defect() const {
  double worst = 0.0;
  for (const auto& prof : profiles) {
    for (const auto& [k, v] : prof) {
      auto it = prof.find(negated(k));
      std::complex<double> other = it == prof.end() ? std::complex<double>(0, 0) : it->second;
      worst = std::max(worst, std::abs(std::conj(v) - other));
    }
  }
  return worst;
}

FourierMatrix<double> assemble_matrix(const Potential& w, Eigen::Index dim) {
  if (dim < 1) throw ConfigError("assemble_matrix: dimension must be positive");
  FourierMatrix<double> r = fm_zero<double>(dim, w.nfreq);
  r.symmetric = true;
  for (int j = 0; j <= w.max_x_mode(); ++j) {
    const auto& prof = w.profiles[static_cast<std::size_t>(j)];
    if (prof.empty()) continue;
    // overlap pattern of cos(2jx): band |row - col| = 2j plus the
    // anti-diagonal row + col = 2j, all within the retained modes
    for (Eigen::Index row = 1; row <= dim; ++row) {
      for (Eigen::Index col = 1; col <= dim; ++col) {
        double c = cosine_coupling(j, static_cast<int>(col), static_cast<int>(row));
        if (c == 0.0) continue;
        for (const auto& [k, v] : prof) r.at_or_insert(k).val(row - 1, col - 1) += c * v;
      }
    }
  }
  return r;
}

Potential potential_from_grid(const Eigen::MatrixXd& samples, int max_x, int k_cutoff) {
  const Eigen::Index P = samples.rows();
  const Eigen::Index Q = samples.cols();
  if (P < 2 || Q < 2) throw ConfigError("potential grid: need at least 2x2 samples");
  if (max_x < 0 || 2 * max_x >= Q)
    throw ConfigError("potential grid: x-harmonic count exceeds grid resolution");
  if (2 * k_cutoff >= P) throw ConfigError("potential grid: angular cutoff exceeds grid resolution");

  Potential w;
  w.nfreq = 1;
  w.profiles.resize(static_cast<std::size_t>(max_x) + 1);

  // cosine analysis on the midpoint grid, exact for harmonics below Q
  Eigen::MatrixXd vj(P, max_x + 1);
  for (int j = 0; j <= max_x; ++j) {
    double scale = (j == 0 ? 1.0 : 2.0) / static_cast<double>(Q);
    for (Eigen::Index p = 0; p < P; ++p) {
      double acc = 0.0;
      for (Eigen::Index q = 0; q < Q; ++q) {
        double x = M_PI * (static_cast<double>(q) + 0.5) / static_cast<double>(Q);
        acc += samples(p, q) * std::cos(2.0 * j * x);
      }
      vj(p, j) = scale * acc;
    }
  }

  // plain discrete Fourier analysis in the angle
  for (int j = 0; j <= max_x; ++j) {
    for (int k = -k_cutoff; k <= k_cutoff; ++k) {
      std::complex<double> acc(0, 0);
      for (Eigen::Index p = 0; p < P; ++p) {
        double th = 2.0 * M_PI * static_cast<double>(p) / static_cast<double>(P);
        acc += vj(p, j) * std::exp(std::complex<double>(0, -k * th));
      }
      acc /= static_cast<double>(P);
      if (std::abs(acc) > 1e-14) w.profiles[static_cast<std::size_t>(j)][mode1(k)] = acc;
    }
  }
  return w;
}

}  // namespace kamred
