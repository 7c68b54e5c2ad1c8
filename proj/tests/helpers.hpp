#pragma once

#include <random>
#include <string>
#include <vector>

#include "rotorbar/dataset.hpp"
#include "rotorbar/signals.hpp"

namespace testutil {

using rotorbar::Condition;
using rotorbar::Dataset;

inline std::vector<std::string> names(std::size_t p) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < p; ++j) out.push_back("f" + std::to_string(j));
  return out;
}

inline Dataset make(const std::vector<std::vector<double>>& x, const std::vector<int>& y) {
  Dataset d(names(x.empty() ? 0 : x[0].size()));
  for (std::size_t i = 0; i < x.size(); ++i)
    d.add_row(x[i], y[i] ? Condition::Faulty : Condition::Healthy, {static_cast<int>(i)});
  return d;
}

// Two Gaussian blobs; only the first `informative` columns carry the shift.
inline Dataset blobs(std::size_t n_per_class, std::size_t p, std::size_t informative, double shift,
                     unsigned seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < n_per_class; ++i) {
      std::vector<double> row(p);
      for (std::size_t j = 0; j < p; ++j) row[j] = z(g) + (c && j < informative ? shift : 0.0);
      x.push_back(row);
      y.push_back(c);
    }
  return make(x, y);
}

}  // namespace testutil
