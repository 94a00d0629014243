#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lgt/distance.hpp"
#include "lgt/unrooted_tree.hpp"

namespace lgt {

// Reversible 4-state substitution model: Q built from a stationary
// distribution and symmetric exchangeabilities, normalized to one expected
// substitution per unit branch length, with a precomputed spectral form for
// transition matrices.
class GtrModel {
 public:
  // `rates` covers the upper triangle in (0,1),(0,2),(0,3),(1,2),(1,3),(2,3)
  // order. All rates must lie within [r_min, r_max].
  GtrModel(const std::array<double, 4>& pi, const std::array<double, 6>& rates,
           double r_min = 0.0,
           double r_max = std::numeric_limits<double>::infinity());

  static GtrModel jukes_cantor();

  const std::array<double, 4>& pi() const { return pi_; }
  const std::array<double, 16>& q() const { return q_; }  // row-major

  // exp(t*Q), row-major; rows are probability distributions.
  std::array<double, 16> transition(double t) const;

 private:
  std::array<double, 4> pi_;
  std::array<double, 16> q_;
  std::array<double, 4> eigenvalues_;
  std::array<double, 16> left_, right_;  // P(t) = left * exp(Lambda t) * right
};

struct Alignment {
  std::vector<Taxon> taxa;  // sorted ascending
  std::vector<std::vector<std::uint8_t>> seq;  // states 0..3, parallel to taxa
  int gene_id = -1;

  int length() const { return seq.empty() ? 0 : static_cast<int>(seq[0].size()); }
  int index_of(Taxon t) const;
};

// Sites i.i.d.: state at the stored root drawn from pi, child states via the
// per-edge transition matrices. Branch lengths must be nonnegative.
Alignment evolve_sequences(const GeneTree& gene, const GtrModel& model, int k,
                           std::mt19937_64& rng);
Alignment evolve_sequences(const GeneTree& gene, const GtrModel& model, int k,
                           std::uint64_t seed);

// Paralinear (log-det) distance from the empirical joint frequency matrix:
//   -(1/4) * [ log det F - (1/2) log( prod marginals(a) * prod marginals(b) ) ]
// Under the normalized model this is consistent for the path length; under
// the equal-rates special case it targets it exactly. Throws
// saturation_error when det F <= 0 (undefined at this sequence length).
double logdet_distance(const Alignment& aln, Taxon a, Taxon b);

// All pairs; saturated pairs become NaN entries and are counted.
DistanceMatrix logdet_matrix(const Alignment& aln, int* n_saturated = nullptr);

// Relaxed PHYLIP: count/length header, then one "name sequence" line per
// taxon. `names` is the taxon-indexed name table.
std::string phylip(const Alignment& aln, const std::vector<std::string>& names);
Alignment parse_phylip(const std::string& text,
                       const std::vector<std::string>& names);

}  // namespace lgt
