#include "qfactory/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace qf {

Estimate wilson(i64 successes, i64 trials, double z) {
  if (trials <= 0 || successes < 0 || successes > trials) throw std::invalid_argument("wilson: bad counts");
  Estimate e;
  e.successes = successes;
  e.trials = trials;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  e.value = p;
  e.sigma = std::sqrt(p * (1.0 - p) / n);
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  e.lo = std::max(0.0, centre - half);
  e.hi = std::min(1.0, centre + half);
  return e;
}

double tv_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) throw std::invalid_argument("tv_distance: size mismatch");
  const double sp = p.sum(), sq = q.sum();
  if (sp <= 0 || sq <= 0) throw std::invalid_argument("tv_distance: empty distribution");
  return 0.5 * (p / sp - q / sq).cwiseAbs().sum();
}

}  // namespace qf
