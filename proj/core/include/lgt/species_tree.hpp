#pragma once

#include <array>
#include <string>
#include <vector>

#include "lgt/errors.hpp"
#include "lgt/taxon_set.hpp"

namespace lgt {

// A point on a species tree: an edge (named by its child vertex) plus the
// time offset from the edge's parent endpoint, in [0, tau(edge)].
struct Location {
  int edge = -1;
  double offset = 0.0;
};

// Rooted binary species phylogeny with divergence times and per-edge LGT
// rates. Vertices are dense ids; each non-root vertex names the edge to its
// parent, which carries a positive duration tau and a positive LGT rate
// lambda. Leaves carry taxon labels (1-based, dense over the full tree) and
// an extant flag. Immutable after construction.
class SpeciesPhylogeny {
 public:
  struct Vertex {
    int parent = -1;
    std::array<int, 2> child{-1, -1};  // leaves: {-1,-1}
    double tau = 0.0;                  // edge above; unused at root
    double lambda = 0.0;               // edge above; unused at root
    Taxon taxon = 0;                   // leaves only
    bool extant = false;               // leaves only
  };

  // `names` is indexed by taxon id; names[0] is ignored.
  SpeciesPhylogeny(std::vector<Vertex> vertices, int root,
                   std::vector<std::string> names);

  int root() const { return root_; }
  int n_vertices() const { return static_cast<int>(v_.size()); }
  int parent(int v) const { return v_[v].parent; }
  const std::array<int, 2>& children(int v) const { return v_[v].child; }
  bool is_leaf(int v) const { return v_[v].child[0] < 0; }
  bool is_root(int v) const { return v == root_; }
  Taxon taxon(int v) const { return v_[v].taxon; }
  bool extant(int v) const { return v_[v].extant; }
  double tau(int v) const { return v_[v].tau; }
  double lambda(int v) const { return v_[v].lambda; }
  double depth(int v) const { return depth_[v]; }
  double height() const { return height_; }

  const std::vector<int>& leaves() const { return leaves_; }
  int n_leaves() const { return static_cast<int>(leaves_.size()); }
  int n_extant() const { return n_extant_; }
  int n_extinct() const { return n_leaves() - n_extant_; }
  int vertex_of(Taxon t) const;
  std::vector<Taxon> leaf_taxa() const;
  std::vector<Taxon> extant_taxa() const;
  // Size of the taxon universe (max label across the original tree).
  int taxon_universe() const { return static_cast<int>(names_.size()) - 1; }
  const std::string& name(Taxon t) const { return names_.at(t); }
  const std::vector<std::string>& name_table() const { return names_; }

  // All edges, as child-vertex ids, in increasing id order.
  std::vector<int> edges() const;

  int mrca(int u, int v) const;
  // Edges (child-vertex ids) on the path between two vertices.
  std::vector<int> path_edges(int u, int v) const;

  // Locations.
  void validate_location(const Location& x) const;
  double depth_at(const Location& x) const;
  // Time-path distance between two locations (divergence time).
  double divergence_time(const Location& x, const Location& y) const;
  bool contemporaneous(const Location& x, const Location& y,
                       double tol = 1e-9) const;

  // All extant leaves equidistant from the root within a relative tolerance.
  bool is_ultrametric(double rel_tol = 1e-9) const;

  // Throws unless every internal vertex has exactly two children (internal
  // degree 3, root degree 2). Single-vertex trees pass. Unsuppressed
  // restrictions may contain unary pass-through vertices and fail this.
  void require_binary() const;

  // Restriction to a taxon subset: keep vertices/edges on paths connecting
  // the kept leaves, rooted at their MRCA. With `suppress`, degree-2
  // pass-through vertices are removed and durations summed (the lambda of a
  // merged edge is the weight-preserving average, so lambda*tau is additive).
  SpeciesPhylogeny restricted(const std::vector<Taxon>& keep,
                              bool suppress = true) const;

  // The extant phylogeny: restriction to extant leaves, suppressed.
  SpeciesPhylogeny extant_phylogeny() const;

  // Copy with every lambda multiplied by `factor` (LGT intensity targeting).
  SpeciesPhylogeny with_scaled_lambda(double factor) const;

 private:
  void validate() const;
  std::vector<Vertex> v_;
  int root_ = 0;
  std::vector<std::string> names_;
  std::vector<double> depth_;
  std::vector<int> leaves_;
  std::vector<int> vertex_of_;  // taxon -> vertex, -1 if absent
  int n_extant_ = 0;
  double height_ = 0.0;
};

}  // namespace lgt
