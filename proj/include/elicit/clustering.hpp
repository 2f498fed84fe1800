// Copyright 2026 The Elicit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Fuzzy c-means over normalized service attribute vectors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "elicit/error.hpp"
#include "elicit/matrix.hpp"
#include "elicit/util.hpp"

namespace elicit {

enum class ColumnKind { numeric, ordinal, nominal };

inline const char* to_string(ColumnKind k) {
  switch (k) {
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::ordinal: return "ordinal";
    case ColumnKind::nominal: return "nominal";
  }
  return "numeric";
}

inline ColumnKind column_kind_from_string(const std::string& s) {
  if (s == "numeric") return ColumnKind::numeric;
  if (s == "ordinal") return ColumnKind::ordinal;
  if (s == "nominal") return ColumnKind::nominal;
  throw FormatError("unknown column kind '" + s + "'");
}

// Normalization record for one attribute column. Categorical columns are
// stored as integer codes (index into `categories`) before scaling.
struct ColumnMeta {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  double min = 0.0;
  double max = 0.0;
  std::vector<std::string> categories;

  bool categorical() const { return kind != ColumnKind::numeric; }

  double normalize(double raw) const {
    double span = max - min;
    if (span <= 0.0) return 0.0;
    return std::clamp((raw - min) / span, 0.0, 1.0);
  }

  double denormalize(double norm) const { return min + norm * (max - min); }

  // Integer code of a category label, or -1.
  int code_of(const std::string& label) const {
    auto it = std::find(categories.begin(), categories.end(), label);
    return it == categories.end() ? -1 : static_cast<int>(it - categories.begin());
  }

  std::string category(double raw) const {
    auto idx = static_cast<std::size_t>(std::llround(raw));
    return idx < categories.size() ? categories[idx] : format_number(raw);
  }
};

// n services x N_a attributes, every value in [0, 1].
struct AttributeMatrix {
  std::vector<std::string> row_ids;
  std::vector<ColumnMeta> columns;
  Matrix values;

  std::size_t n() const { return values.rows(); }
  std::size_t attributes() const { return values.cols(); }

  std::size_t column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i].name == name) return i;
    throw NotFound("unknown attribute '" + name + "'");
  }

  double raw(std::size_t row, std::size_t col) const {
    return columns[col].denormalize(values(row, col));
  }
};

// Result of one fuzzy c-means run.
struct GranulePartition {
  Matrix memberships;  // p x n
  Matrix centroids;    // p x N_a
  double objective = 0.0;
  int p = 0;
  double fuzzifier = 2.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> objective_history;
};

struct FcmOptions {
  double fuzzifier = 2.0;
  double epsilon = 1e-6;
  int max_iter = 300;
  std::uint64_t seed = 1;
};

namespace detail {

inline void check_fuzzifier(double m) {
  if (!(m > 1.0)) throw ConfigError("fuzzifier must be > 1");
}

}  // namespace detail

// Euclidean distance from every centroid (rows of `centroids`) to every data
// row; result is p x n.
inline Matrix centroid_distances(const Matrix& data, const Matrix& centroids) {
  if (data.cols() != centroids.cols())
    throw ShapeError("data and centroids disagree on attribute count");
  Matrix d(centroids.rows(), data.rows());
  for (std::size_t i = 0; i < centroids.rows(); ++i) {
    for (std::size_t j = 0; j < data.rows(); ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < data.cols(); ++t) {
        double diff = data(j, t) - centroids(i, t);
        acc += diff * diff;
      }
      d(i, j) = std::sqrt(acc);
    }
  }
  return d;
}

// Membership degrees from a p x n distance matrix
//   mu_ij = ( sum_t (d_ij / d_tj)^(2/(m-1)) )^-1.
// A column holding a zero distance is made crisp on the lowest such cluster.
inline Matrix membership(const Matrix& distances, double fuzzifier) {
  detail::check_fuzzifier(fuzzifier);
  const std::size_t p = distances.rows();
  const std::size_t n = distances.cols();
  const double exponent = 2.0 / (fuzzifier - 1.0);
  Matrix mu(p, n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t zero = p;
    for (std::size_t i = 0; i < p; ++i) {
      if (distances(i, j) < 0.0) throw ConfigError("negative distance");
      if (distances(i, j) == 0.0 && zero == p) zero = i;
    }
    if (zero != p) {
      mu(zero, j) = 1.0;
      continue;
    }
    for (std::size_t i = 0; i < p; ++i) {
      double sum = 0.0;
      for (std::size_t t = 0; t < p; ++t) sum += std::pow(distances(i, j) / distances(t, j), exponent);
      mu(i, j) = 1.0 / sum;
    }
  }
  return mu;
}

// Goal = sum_j sum_i mu_ij^m d_ij^2.
inline double objective(const Matrix& mu, const Matrix& distances, double fuzzifier) {
  if (mu.rows() != distances.rows() || mu.cols() != distances.cols())
    throw ShapeError("membership and distance matrices disagree");
  double goal = 0.0;
  for (std::size_t j = 0; j < mu.cols(); ++j)
    for (std::size_t i = 0; i < mu.rows(); ++i)
      goal += std::pow(mu(i, j), fuzzifier) * distances(i, j) * distances(i, j);
  return goal;
}

// Centroid update m_i = sum_j mu_ij^m y_j / sum_j mu_ij^m. A cluster with no
// weight keeps its previous position.
inline Matrix update_centroids(const Matrix& data, const Matrix& mu, double fuzzifier,
                               const Matrix& previous) {
  Matrix c(mu.rows(), data.cols(), 0.0);
  for (std::size_t i = 0; i < mu.rows(); ++i) {
    double wsum = 0.0;
    for (std::size_t j = 0; j < data.rows(); ++j) {
      double w = std::pow(mu(i, j), fuzzifier);
      wsum += w;
      for (std::size_t t = 0; t < data.cols(); ++t) c(i, t) += w * data(j, t);
    }
    for (std::size_t t = 0; t < data.cols(); ++t)
      c(i, t) = wsum > 0.0 ? c(i, t) / wsum : previous(i, t);
  }
  return c;
}

// Fuzzy partition coefficient (1/n) sum_i sum_j mu_ij^2, in [1/p, 1].
inline double fpc(const Matrix& mu) {
  if (mu.cols() == 0) return 0.0;
  double s = 0.0;
  for (double v : mu.data()) s += v * v;
  return s / static_cast<double>(mu.cols());
}

// Max-membership cluster of each column; ties go to the lower cluster index.
inline std::vector<std::size_t> hard_assignment(const Matrix& mu) {
  std::vector<std::size_t> labels(mu.cols(), 0);
  for (std::size_t j = 0; j < mu.cols(); ++j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < mu.rows(); ++i)
      if (mu(i, j) > mu(best, j)) best = i;
    labels[j] = best;
  }
  return labels;
}

// Seeded choice of p row indices, preferring rows with distinct values.
inline std::vector<std::size_t> sample_initial_rows(const Matrix& data, std::size_t p,
                                                    std::uint64_t seed) {
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::size_t> chosen;
  std::vector<bool> used(data.rows(), false);
  for (std::size_t idx : order) {
    if (chosen.size() == p) break;
    bool duplicate = std::any_of(chosen.begin(), chosen.end(), [&](std::size_t c) {
      return std::equal(data.row(c).begin(), data.row(c).end(), data.row(idx).begin());
    });
    if (!duplicate) {
      chosen.push_back(idx);
      used[idx] = true;
    }
  }
  for (std::size_t idx : order) {
    if (chosen.size() == p) break;
    if (!used[idx]) chosen.push_back(idx);
  }
  return chosen;
}

// Alternating optimization from explicit starting centroids. Stops when the
// objective moves by less than epsilon between iterations.
inline GranulePartition fcm_from(const Matrix& data, Matrix centroids, const FcmOptions& opt) {
  detail::check_fuzzifier(opt.fuzzifier);
  if (data.rows() == 0) throw ConfigError("fcm on empty data");
  if (!(opt.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (centroids.rows() == 0 || centroids.rows() > data.rows())
    throw ConfigError("granule count must satisfy 1 <= p <= n");

  GranulePartition part;
  part.p = static_cast<int>(centroids.rows());
  part.fuzzifier = opt.fuzzifier;

  Matrix dist = centroid_distances(data, centroids);
  Matrix mu = membership(dist, opt.fuzzifier);
  double goal = objective(mu, dist, opt.fuzzifier);
  part.objective_history.push_back(goal);

  for (int it = 0; it < opt.max_iter; ++it) {
    centroids = update_centroids(data, mu, opt.fuzzifier, centroids);
    dist = centroid_distances(data, centroids);
    mu = membership(dist, opt.fuzzifier);
    double next = objective(mu, dist, opt.fuzzifier);
    part.objective_history.push_back(next);
    part.iterations = it + 1;
    bool stable = std::fabs(goal - next) < opt.epsilon;
    goal = next;
    if (stable) {
      part.converged = true;
      break;
    }
  }
  part.memberships = std::move(mu);
  part.centroids = std::move(centroids);
  part.objective = goal;
  return part;
}

inline GranulePartition fcm(const Matrix& data, int p, const FcmOptions& opt) {
  if (data.rows() == 0) throw ConfigError("fcm on empty data");
  if (p < 1 || static_cast<std::size_t>(p) > data.rows())
    throw ConfigError("granule count must satisfy 1 <= p <= n");
  auto rows = sample_initial_rows(data, static_cast<std::size_t>(p), opt.seed);
  Matrix init(rows.size(), data.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t t = 0; t < data.cols(); ++t) init(i, t) = data(rows[i], t);
  return fcm_from(data, std::move(init), opt);
}

inline GranulePartition fcm(const AttributeMatrix& data, int p, const FcmOptions& opt) {
  return fcm(data.values, p, opt);
}

struct PSelection {
  int p = 2;
  bool degenerate = false;
  std::vector<std::pair<int, double>> sweep;  // (p, fpc)
};

// Index of the largest score; earlier entries win ties.
inline std::size_t argmax_first(const std::vector<std::pair<int, double>>& sweep) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < sweep.size(); ++i)
    if (sweep[i].second > sweep[best].second) best = i;
  return best;
}

// Sweeps p over [2, floor(sqrt(n))] and keeps the p of maximal fpc.
inline PSelection select_p(const Matrix& data, const FcmOptions& opt) {
  PSelection sel;
  const std::size_t n = data.rows();
  if (n < 4) {
    sel.p = 2;
    sel.degenerate = true;
    return sel;
  }
  auto upper = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
  while (static_cast<std::size_t>(upper + 1) * static_cast<std::size_t>(upper + 1) <= n) ++upper;
  while (static_cast<std::size_t>(upper) * static_cast<std::size_t>(upper) > n) --upper;
  for (int p = 2; p <= upper; ++p) {
    FcmOptions o = opt;
    o.seed = mix_seed(opt.seed, static_cast<std::uint64_t>(p));
    auto part = fcm(data, p, o);
    sel.sweep.emplace_back(p, fpc(part.memberships));
  }
  sel.p = sel.sweep[argmax_first(sel.sweep)].first;
  return sel;
}

inline PSelection select_p(const AttributeMatrix& data, const FcmOptions& opt) {
  return select_p(data.values, opt);
}

}  // namespace elicit
