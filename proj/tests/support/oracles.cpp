#include "oracles.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>

namespace oracle {

using lgt::DistanceMatrix;
using lgt::GeneTree;
using lgt::LgtEvent;
using lgt::SpeciesPhylogeny;
using lgt::Taxon;
using lgt::UnrootedTree;

DistanceMatrix fw_distance_matrix(const UnrootedTree& t, bool unit_lengths) {
  const int n = t.n_nodes();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> d(static_cast<std::size_t>(n) * n, inf);
  for (int i = 0; i < n; ++i) d[i * n + i] = 0.0;
  for (int v = 0; v < n; ++v)
    for (int c : t.node(v).child) {
      double len = unit_lengths ? 1.0 : t.node(c).length;
      d[v * n + c] = d[c * n + v] = len;
    }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        d[i * n + j] = std::min(d[i * n + j], d[i * n + k] + d[k * n + j]);

  // Unit-length distances must match the suppressed topology, so degree-2
  // pass-through nodes do not count as hops.
  if (unit_lengths) {
    std::vector<int> sub(n, 0);
    for (int v = 0; v < n; ++v)
      if (t.node(v).taxon == 0 && t.degree(v) == 2) sub[v] = 1;
    // Recompute over paths explicitly: hop count = non-suppressed interior
    // vertices + 1. Walk parent pointers to find the vertex path.
    auto path_hops = [&](int a, int b) {
      std::vector<int> depth(n, 0), order;
      order.push_back(t.stored_root());
      for (std::size_t q = 0; q < order.size(); ++q)
        for (int c : t.node(order[q]).child) {
          depth[c] = depth[order[q]] + 1;
          order.push_back(c);
        }
      int u = a, v = b;
      std::vector<int> mid;
      while (u != v) {
        if (depth[u] < depth[v]) {
          mid.push_back(v);
          v = t.node(v).parent;
        } else {
          mid.push_back(u);
          u = t.node(u).parent;
        }
      }
      mid.push_back(u);
      int hops = 0;
      for (int w : mid)
        if (w != a && w != b && !sub[w]) ++hops;
      return hops + 1;
    };
    std::vector<Taxon> taxa = t.taxa();
    DistanceMatrix out(taxa);
    for (std::size_t i = 0; i < taxa.size(); ++i)
      for (std::size_t j = i + 1; j < taxa.size(); ++j)
        out.set(static_cast<int>(i), static_cast<int>(j),
                path_hops(t.node_of(taxa[i]), t.node_of(taxa[j])));
    return out;
  }

  std::vector<Taxon> taxa = t.taxa();
  DistanceMatrix out(taxa);
  for (std::size_t i = 0; i < taxa.size(); ++i)
    for (std::size_t j = i + 1; j < taxa.size(); ++j)
      out.set(static_cast<int>(i), static_cast<int>(j),
              d[t.node_of(taxa[i]) * n + t.node_of(taxa[j])]);
  return out;
}

int four_point(const DistanceMatrix& d, const std::array<Taxon, 4>& x) {
  auto at = [&](int i, int j) { return d.at_taxa(x[i], x[j]); };
  double s[3] = {at(0, 1) + at(2, 3), at(0, 2) + at(1, 3),
                 at(0, 3) + at(1, 2)};
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (s[i] < s[best]) best = i;
  for (int i = 0; i < 3; ++i)
    if (i != best && !(s[best] < s[i])) return -1;
  return best;
}

namespace {

// Sorted canonical side (the one without the smallest taxon overall) of
// every non-trivial split of `t`, as a set of sorted taxon lists.
std::set<std::vector<Taxon>> split_set(const UnrootedTree& t) {
  std::vector<Taxon> taxa = t.taxa();
  if (taxa.size() < 4) return {};
  Taxon least = taxa.front();
  std::set<std::vector<Taxon>> out;
  // For each edge, leaves below the child node (stored orientation).
  std::vector<std::vector<Taxon>> below(t.n_nodes());
  // Postorder via repeated passes (small trees; clarity over speed).
  std::vector<int> order{t.stored_root()};
  for (std::size_t q = 0; q < order.size(); ++q)
    for (int c : t.node(order[q]).child) order.push_back(c);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    if (t.node(v).taxon != 0) below[v].push_back(t.node(v).taxon);
    for (int c : t.node(v).child)
      below[v].insert(below[v].end(), below[c].begin(), below[c].end());
    std::sort(below[v].begin(), below[v].end());
  }
  for (int v = 0; v < t.n_nodes(); ++v) {
    if (v == t.stored_root()) continue;
    std::size_t k = below[v].size();
    if (k < 2 || k > taxa.size() - 2) continue;
    std::vector<Taxon> side = below[v];
    if (std::binary_search(side.begin(), side.end(), least)) {
      std::vector<Taxon> other;
      std::set_difference(taxa.begin(), taxa.end(), side.begin(), side.end(),
                          std::back_inserter(other));
      side = std::move(other);
    }
    out.insert(std::move(side));
  }
  return out;
}

}  // namespace

int rf(const UnrootedTree& a, const UnrootedTree& b) {
  if (a.taxa() != b.taxa())
    throw std::invalid_argument("oracle rf: leaf sets differ");
  std::set<std::vector<Taxon>> sa = split_set(a), sb = split_set(b);
  int diff = 0;
  for (const auto& s : sa)
    if (!sb.count(s)) ++diff;
  for (const auto& s : sb)
    if (!sa.count(s)) ++diff;
  return diff;
}

std::map<std::array<Taxon, 4>, std::array<long, 3>> quartet_recount(
    const std::vector<GeneTree>& genes) {
  std::map<std::array<Taxon, 4>, std::array<long, 3>> out;
  for (const GeneTree& g : genes) {
    DistanceMatrix d = fw_distance_matrix(g, /*unit_lengths=*/true);
    std::vector<Taxon> taxa = g.taxa();
    int k = static_cast<int>(taxa.size());
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b)
        for (int c = b + 1; c < k; ++c)
          for (int e = c + 1; e < k; ++e) {
            std::array<Taxon, 4> x{taxa[a], taxa[b], taxa[c], taxa[e]};
            int split = four_point(d, x);
            if (split < 0)
              throw std::runtime_error("oracle recount: unresolved four-tuple");
            auto it = out.emplace(x, std::array<long, 3>{0, 0, 0}).first;
            ++it->second[split];
          }
  }
  return out;
}

std::vector<EdgeTree> all_edge_trees(int n) {
  if (n < 3) throw std::invalid_argument("all_edge_trees: n must be >= 3");
  EdgeTree base;
  base.n_nodes = 4;
  base.taxon = {1, 2, 3, 0};
  base.edges = {{0, 3}, {1, 3}, {2, 3}};
  std::vector<EdgeTree> trees{base};
  for (Taxon next = 4; next <= n; ++next) {
    std::vector<EdgeTree> grown;
    for (const EdgeTree& t : trees)
      for (std::size_t e = 0; e < t.edges.size(); ++e) {
        EdgeTree g = t;
        auto [u, v] = g.edges[e];
        int hub = g.n_nodes, leaf = g.n_nodes + 1;
        g.n_nodes += 2;
        g.taxon.push_back(0);
        g.taxon.push_back(next);
        g.edges[e] = {u, hub};
        g.edges.push_back({v, hub});
        g.edges.push_back({leaf, hub});
        grown.push_back(std::move(g));
      }
    trees = std::move(grown);
  }
  return trees;
}

UnrootedTree to_unrooted(const EdgeTree& t,
                         const std::vector<double>& edge_len) {
  if (edge_len.size() != t.edges.size())
    throw std::invalid_argument("to_unrooted: edge/length size mismatch");
  std::vector<std::vector<std::pair<int, double>>> adj(t.n_nodes);
  for (std::size_t e = 0; e < t.edges.size(); ++e) {
    auto [u, v] = t.edges[e];
    adj[u].push_back({v, edge_len[e]});
    adj[v].push_back({u, edge_len[e]});
  }
  int root = -1;
  for (int v = 0; v < t.n_nodes; ++v)
    if (t.taxon[v] == 0) {
      root = v;
      break;
    }
  if (root < 0) throw std::invalid_argument("to_unrooted: no internal node");
  std::vector<UnrootedTree::Node> nodes(t.n_nodes);
  std::vector<int> stack{root};
  std::vector<char> seen(t.n_nodes, 0);
  seen[root] = 1;
  nodes[root].taxon = t.taxon[root];
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (auto [w, len] : adj[v]) {
      if (seen[w]) continue;
      seen[w] = 1;
      nodes[w].parent = v;
      nodes[w].length = len;
      nodes[w].taxon = t.taxon[w];
      nodes[v].child.push_back(w);
      stack.push_back(w);
    }
  }
  return UnrootedTree(std::move(nodes), root);
}

UnrootedTree to_unrooted(const EdgeTree& t, double uniform_len) {
  return to_unrooted(t, std::vector<double>(t.edges.size(), uniform_len));
}

namespace {

struct FNode {
  int parent = -1;
  std::vector<int> child;
  double depth = 0.0;
  Taxon taxon = 0;
  bool stub = false;  // terminated recipient lineage, to be pruned
};

}  // namespace

GeneTree forward_gene_tree(const SpeciesPhylogeny& t,
                           const std::vector<LgtEvent>& events) {
  std::vector<FNode> fn;
  auto make = [&](int parent, double depth, Taxon taxon, bool stub) {
    fn.push_back({parent, {}, depth, taxon, stub});
    int id = static_cast<int>(fn.size()) - 1;
    if (parent >= 0) fn[parent].child.push_back(id);
    return id;
  };

  // Chronological plan. At equal times, structure first, then transfers in
  // reverse listing order (the mirror image of the backward replay), then
  // leaf endpoints.
  struct Happening {
    double t;
    int kind;  // 0 split, 1 transfer, 2 leaf end
    int id;
  };
  std::vector<Happening> plan;
  for (int v = 0; v < t.n_vertices(); ++v) {
    if (t.is_root(v)) continue;
    plan.push_back({t.depth(v), t.is_leaf(v) ? 2 : 0, v});
  }
  for (int i = 0; i < static_cast<int>(events.size()); ++i)
    plan.push_back({events[i].t, 1, i});
  std::sort(plan.begin(), plan.end(), [](const Happening& a, const Happening& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.id > b.id;
  });

  // open[e]: gene node the lineage currently on species edge e hangs from.
  std::vector<int> open(t.n_vertices(), -1);
  int root = make(-1, 0.0, 0, false);
  for (int c : t.children(t.root()))
    if (c >= 0) open[c] = root;

  for (const Happening& h : plan) {
    switch (h.kind) {
      case 0: {  // speciation: the lineage splits with the species
        int g = open[h.id];
        int y = make(g, t.depth(h.id), 0, false);
        open[h.id] = -1;
        for (int c : t.children(h.id))
          if (c >= 0) open[c] = y;
        break;
      }
      case 1: {  // transfer: recipient lineage dies, donor copy regrafts
        const LgtEvent& ev = events[h.id];
        int gr = open[ev.recipient.edge];
        int gd = open[ev.donor.edge];
        make(gr, ev.t, 0, /*stub=*/true);
        int x = make(gd, ev.t, 0, false);
        open[ev.donor.edge] = x;
        open[ev.recipient.edge] = x;
        break;
      }
      default: {  // leaf: the lineage ends in a sampled gene copy
        int g = open[h.id];
        make(g, t.depth(h.id), t.taxon(h.id), false);
        open[h.id] = -1;
        break;
      }
    }
  }

  // Prune dead material: stubs, then interior nodes left childless.
  int n = static_cast<int>(fn.size());
  std::vector<char> alive(n, 1);
  bool again = true;
  while (again) {
    again = false;
    for (int v = 0; v < n; ++v) {
      if (!alive[v] || fn[v].taxon != 0) continue;
      bool childless = true;
      for (int c : fn[v].child)
        if (alive[c]) childless = false;
      if (childless) {
        alive[v] = 0;
        again = true;
      }
    }
  }

  // Suppress pass-through nodes (one live child, no taxon) and walk the
  // root down to the first branching point.
  auto live_children = [&](int v) {
    std::vector<int> out;
    for (int c : fn[v].child)
      if (alive[c]) out.push_back(c);
    return out;
  };
  for (int v = 0; v < n; ++v) {
    if (!alive[v] || fn[v].taxon != 0 || fn[v].parent < 0) continue;
    std::vector<int> ch = live_children(v);
    if (ch.size() == 1) {
      fn[ch[0]].parent = fn[v].parent;
      fn[fn[v].parent].child.push_back(ch[0]);
      alive[v] = 0;
    }
  }
  while (true) {
    std::vector<int> ch = live_children(root);
    if (fn[root].taxon == 0 && ch.size() == 1) {
      alive[root] = 0;
      root = ch[0];
      fn[root].parent = -1;
    } else {
      break;
    }
  }

  // Compact into the library representation; lengths are elapsed times.
  std::vector<int> id(n, -1);
  std::vector<int> order{root};
  id[root] = 0;
  std::vector<UnrootedTree::Node> out;
  out.push_back({});
  out[0].taxon = fn[root].taxon;
  for (std::size_t q = 0; q < order.size(); ++q) {
    int v = order[q];
    for (int c : fn[v].child) {
      if (!alive[c] || id[c] >= 0) continue;
      id[c] = static_cast<int>(out.size());
      out.push_back({});
      out[id[c]].parent = id[v];
      out[id[c]].length = fn[c].depth - fn[v].depth;
      out[id[c]].taxon = fn[c].taxon;
      out[id[v]].child.push_back(id[c]);
      order.push_back(c);
    }
  }
  return GeneTree(std::move(out), 0);
}

}  // namespace oracle
