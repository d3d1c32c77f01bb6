// include/forager/complexity.hpp
//
// Configurational complexity of a stream from the spatial spread of its
// interest points, and the categorical stream choice built on it.

#pragma once

#include <span>
#include <vector>

#include "forager/perception.hpp"
#include "forager/rng.hpp"

namespace forager {

/// Partition of the frame into n_rows x n_cols rectangular cells.
struct CellGrid {
  int n_rows = 8;
  int n_cols = 8;
  int width = 64;
  int height = 48;

  int count() const { return n_rows * n_cols; }
  int cell_index(Vec2 p) const;
  void validate() const;
};

struct ComplexityIndex {
  double H = 0.0;      // nats
  double H_sup = 0.0;  // log N_w
  double delta = 0.0;  // disorder H / H_sup
  double omega = 1.0;  // order 1 - delta
  double C = 0.0;      // delta * omega
  int stream = 0;
  int tick = 0;
};

/// Shannon entropy of IP occupancy over the cells (k_B = 1, 0 ln 0 = 0).
/// Throws DomainError on an empty IP list.
double spatial_entropy(std::span<const InterestPoint> ips, const CellGrid& grid);

/// Complexity of an IP configuration; an empty configuration has C = 0.
ComplexityIndex complexity(std::span<const InterestPoint> ips, const CellGrid& grid, int stream = 0, int tick = 0);

struct StreamChoice {
  std::vector<double> p;
  bool fallback = false;  // every complexity was zero; p is uniform
};

/// P(k) = C_k / sum C.
StreamChoice stream_choice_distribution(std::span<const double> complexities);
StreamChoice stream_choice_distribution(std::span<const ComplexityIndex> complexities);

/// One categorical draw. Throws DomainError on an invalid distribution.
int select_stream(std::span<const double> distribution, Rng& rng);

}  // namespace forager
