#pragma once

#include "qfactory/core.hpp"

namespace qf {

// A Bernoulli proportion with its sample size and a Wilson score interval.
struct Estimate {
  i64 successes = 0;
  i64 trials = 0;
  double value = 0.0;
  double sigma = 0.0;  // binomial standard error sqrt(p(1-p)/n)
  double lo = 0.0;
  double hi = 1.0;
};

Estimate wilson(i64 successes, i64 trials, double z = 1.96);

// Total-variation distance between two count vectors of equal length.
double tv_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

}  // namespace qf
