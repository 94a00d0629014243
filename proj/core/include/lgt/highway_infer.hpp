#pragma once

#include <array>
#include <string>
#include <vector>

#include "lgt/quartet_plurality.hpp"
#include "lgt/unrooted_tree.hpp"

namespace lgt {

// A four-tuple whose non-plurality split is seen too often to be noise but
// in a minority of genes: candidate trace of a transfer highway.
struct SuspectQuartet {
  std::array<Taxon, 4> taxa{};
  int split = 0;        // the offending split, never the plurality one
  double frequency = 0.0;
};

struct SuspectQuartetSet {
  double gamma_lo = 0.1;
  std::vector<SuspectQuartet> suspects;
};

// All (four-tuple, split) pairs with estimated frequency strictly between
// gamma_lo/2 and 1/2, excluding each tuple's plurality split.
SuspectQuartetSet suspect_quartets(const QuartetFrequencyTable& table,
                                   double gamma_lo = 0.1);

// Suspects connected when the internal branches of their induced species
// quartets share an edge; edges are named by child node id of `species`.
struct SharedEdgeGraph {
  std::vector<SuspectQuartet> suspects;
  std::vector<std::vector<int>> internal_edges;  // per suspect, sorted
  std::vector<std::vector<int>> adjacency;       // suspect indices
  std::vector<std::vector<int>> components;      // suspect indices, sorted
};

SharedEdgeGraph shared_edge_graph(const SuspectQuartetSet& q,
                                  const UnrootedTree& species);

// One verdict per component. When oriented, edge0 is the donor and edge1
// the recipient; unoriented pairs are reported with edge0 < edge1. Failed
// components carry a diagnostic instead of edges.
struct HighwayCall {
  int component = -1;
  bool ok = false;
  int edge0 = -1;
  int edge1 = -1;
  bool oriented = false;
  int support = 0;  // suspects in the component
  std::string diagnostic;
};

// Per component: the union of shared internal-branch edges must form a
// simple path; the ends' flanking edges give four candidate pairs; pairs
// surviving the every-suspect coverage test identify the highway, with the
// recipient as the common edge of the surviving pairs and the donor read
// from a suspect spanning the four subtrees around the path. Components
// violating any step are reported as failed, not thrown.
std::vector<HighwayCall> locate_highways(const SharedEdgeGraph& graph,
                                         const UnrootedTree& species);

// component_id,edge0_child_vertex,edge1_child_vertex,oriented_flag,support
// (successful components only).
std::string highways_csv(const std::vector<HighwayCall>& calls);

}  // namespace lgt
