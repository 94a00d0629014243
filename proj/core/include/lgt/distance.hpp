#pragma once

#include <cmath>
#include <vector>

#include "lgt/errors.hpp"
#include "lgt/taxon_set.hpp"
#include "lgt/unrooted_tree.hpp"

namespace lgt {

// Symmetric pairwise distance matrix over a sorted taxon list. Entries may
// be NaN ("missing": the pair is not estimable from this source); defined
// entries are nonnegative with a zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::vector<Taxon> taxa, double init = 0.0);

  int size() const { return static_cast<int>(taxa_.size()); }
  const std::vector<Taxon>& taxa() const { return taxa_; }
  int index_of(Taxon t) const;  // -1 if absent

  double at(int i, int j) const { return d_[i * size() + j]; }
  void set(int i, int j, double v) {
    d_[i * size() + j] = v;
    d_[j * size() + i] = v;
  }
  bool has(int i, int j) const { return !std::isnan(at(i, j)); }
  double at_taxa(Taxon a, Taxon b) const;

  // Checks symmetry, zero diagonal, nonnegative defined entries.
  void validate() const;
  bool complete() const;  // no NaN entries

 private:
  std::vector<Taxon> taxa_;
  std::vector<double> d_;
};

// Leaf-to-leaf path-length sums. With `unit_lengths`, every edge of the
// suppressed topology counts 1 (graph distance).
DistanceMatrix tree_distance_matrix(const UnrootedTree& t,
                                    bool unit_lengths = false);

// Resolve a quartet by the four-point condition on a distance matrix:
// the split with the strictly smallest pair-sum. Ties -> degenerate.
// `x` must be sorted; returns the split index, or -1 if unresolved.
int four_point_split(const DistanceMatrix& d, const std::array<Taxon, 4>& x);

// CSV round-trip (square matrix with a header row of taxon names).
class SpeciesPhylogeny;
std::string distance_matrix_csv(const DistanceMatrix& d,
                                const std::vector<std::string>& names);
DistanceMatrix parse_distance_matrix_csv(const std::string& text,
                                         std::vector<std::string>* names_out);

}  // namespace lgt
