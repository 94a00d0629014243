#pragma once

#include <vector>

#include "lgt/distance.hpp"
#include "lgt/unrooted_tree.hpp"

namespace lgt {

// Per-pair median of gene distances plus how many genes supported each
// pair. `support.at(i,j)`-style counts share the matrix's taxon indexing.
struct MedianDistance {
  DistanceMatrix matrix;
  std::vector<int> support;  // row-major size() x size()
  int support_at(int i, int j) const {
    return support[i * matrix.size() + j];
  }
};

// Median over the genes displaying each pair; an even count takes the lower
// middle order statistic, so a strict majority of equal values fixes the
// median exactly. Missing (NaN) entries in per-gene matrices are skipped.
// Throws unsupported_pair_error when no gene displays some pair.
MedianDistance median_matrix(const std::vector<DistanceMatrix>& per_gene,
                             const std::vector<Taxon>& taxa);
MedianDistance median_matrix(const std::vector<GeneTree>& genes,
                             const std::vector<Taxon>& taxa);

// Neighbor joining. Exact on additive binary-tree metrics; fewer than four
// taxa produce the trivial topologies. NaN or infinite entries are
// rejected.
UnrootedTree build_distance_tree(const DistanceMatrix& d);

// Median aggregation followed by neighbor joining.
UnrootedTree median_tree(const std::vector<GeneTree>& genes,
                         const std::vector<Taxon>& taxa);

}  // namespace lgt
