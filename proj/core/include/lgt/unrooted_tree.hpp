#pragma once

#include <array>
#include <string>
#include <vector>

#include "lgt/errors.hpp"
#include "lgt/taxon_set.hpp"

namespace lgt {

// A resolved four-taxon split. `taxa` is sorted ascending; `split` selects
// the partner of taxa[0]: 0 -> taxa[1], 1 -> taxa[2], 2 -> taxa[3]. The
// three splits in this order are the canonical q1 < q2 < q3 enumeration.
struct Quartet {
  std::array<Taxon, 4> taxa{};
  int split = 0;
  bool operator==(const Quartet&) const = default;
};

// Split index for sorted four-tuple `x` given one pair of the split.
int split_index(const std::array<Taxon, 4>& x, Taxon p, Taxon q);

// Unrooted leaf-labelled tree with branch lengths, stored with an arbitrary
// internal rooting (node 0 unless stated otherwise). Used for gene trees and
// for reconstructed topologies. Nodes of unrooted degree 2 (including a
// stored root with two children) are allowed; `suppressed()` removes them.
class UnrootedTree {
 public:
  struct Node {
    int parent = -1;
    std::vector<int> child;
    double length = 0.0;  // edge to parent; unused at stored root
    Taxon taxon = 0;      // leaves only
  };

  UnrootedTree() = default;
  // Nodes must form a tree rooted at `root` (parent/child cross-linked).
  UnrootedTree(std::vector<Node> nodes, int root);

  int stored_root() const { return root_; }
  int n_nodes() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int i) const { return nodes_[i]; }
  bool is_leaf(int i) const { return nodes_[i].child.empty(); }

  int n_leaves() const { return static_cast<int>(leaves_.size()); }
  const std::vector<int>& leaf_nodes() const { return leaves_; }
  std::vector<Taxon> taxa() const;  // sorted ascending
  bool has_taxon(Taxon t) const;
  int node_of(Taxon t) const;

  // Unrooted degree: children + (1 if non-root).
  int degree(int i) const;

  // Remove all unrooted-degree-2 nodes, summing lengths; the result is
  // stored rooted at its smallest-taxon leaf. Single-leaf trees pass
  // through unchanged.
  UnrootedTree suppressed() const;

  // Restriction to a taxon subset (paths connecting kept leaves), suppressed
  // by default.
  UnrootedTree restricted(const std::vector<Taxon>& keep,
                          bool suppress = true) const;

  // Canonical sides of all non-trivial bipartitions (internal edges of the
  // suppressed topology). `universe` must cover all taxa.
  std::vector<TaxonSet> bipartitions(int universe) const;

  // Canonical topology key: shape and labels only, lengths ignored.
  // Equal strings iff equal unrooted leaf-labelled topologies.
  std::string topology_key() const;

 private:
  std::vector<Node> nodes_;
  int root_ = 0;
  std::vector<int> leaves_;
};

using GeneTree = UnrootedTree;

// Robinson-Foulds distance: bipartitions present in exactly one tree.
// Requires identical leaf sets.
int rf_distance(const UnrootedTree& a, const UnrootedTree& b);

// The resolved split displayed by a topology on four leaves.
Quartet quartet_of(const UnrootedTree& t, std::array<Taxon, 4> x);

class SpeciesPhylogeny;
// Forget the rooting of a species phylogeny (lengths = tau). Keeps every
// leaf, extinct included.
UnrootedTree as_unrooted(const SpeciesPhylogeny& s);

}  // namespace lgt
