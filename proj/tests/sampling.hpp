#pragma once

// Seeded test inputs. Uses the standard distributions on purpose: test data
// should not come from the generator under test.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace testdata {

inline std::vector<double> contaminated(std::mt19937_64& gen, std::size_t n, double mu, double s2, double eps,
                                        double tau2) {
  std::bernoulli_distribution outlier(eps);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> out(n);
  for (double& v : out) v = mu + std::sqrt(outlier(gen) ? tau2 : s2) * z(gen);
  return out;
}

inline std::vector<double> normal(std::mt19937_64& gen, std::size_t n, double mu = 0.0, double sd = 1.0) {
  std::normal_distribution<double> z(mu, sd);
  std::vector<double> out(n);
  for (double& v : out) v = z(gen);
  return out;
}

inline std::vector<double> shifted(std::vector<double> x, double c) {
  for (double& v : x) v += c;
  return x;
}

}  // namespace testdata
