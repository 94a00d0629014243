#include "lgt/highway_infer.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>

#include "lgt/distance.hpp"
#include "lgt/errors.hpp"

namespace lgt {

SuspectQuartetSet suspect_quartets(const QuartetFrequencyTable& table,
                                   double gamma_lo) {
  if (!(gamma_lo > 0.0 && gamma_lo < 1.0))
    throw config_error("gamma_lo must lie in (0, 1)");
  SuspectQuartetSet out;
  out.gamma_lo = gamma_lo;
  for (std::size_t r = 0; r < table.n_four_tuples(); ++r) {
    if (table.displayed(r) == 0) continue;
    const std::array<int, 3>& c = table.counts(r);
    int best = std::max({c[0], c[1], c[2]});
    int plurality = c[0] == best ? 0 : c[1] == best ? 1 : 2;
    std::array<double, 3> f = table.frequencies(r);
    for (int s = 0; s < 3; ++s) {
      if (s == plurality) continue;
      if (f[s] > gamma_lo / 2 && f[s] < 0.5)
        out.suspects.push_back({table.four_tuple(r), s, f[s]});
    }
  }
  return out;
}

namespace {

// Rooted-orientation helpers over the stored layout of an unrooted tree.
struct TreeFrame {
  const UnrootedTree& t;
  std::vector<int> depth;          // topological, from the stored root
  std::vector<TaxonSet> below;     // leaf taxa in the node's subtree
  int universe = 0;

  explicit TreeFrame(const UnrootedTree& tree) : t(tree) {
    int n = t.n_nodes();
    for (Taxon x : t.taxa()) universe = std::max(universe, x);
    depth.assign(n, 0);
    below.assign(n, TaxonSet(universe));
    std::vector<int> order{t.stored_root()};
    for (std::size_t k = 0; k < order.size(); ++k)
      for (int c : t.node(order[k]).child) {
        depth[c] = depth[order[k]] + 1;
        order.push_back(c);
      }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      int u = *it;
      if (t.node(u).taxon != 0) below[u].insert(t.node(u).taxon);
      for (int c : t.node(u).child) below[u].unite(below[c]);
    }
  }

  // Edges (child node ids) on the path between two nodes.
  std::vector<int> path_edges(int u, int v) const {
    std::vector<int> up, down;
    while (u != v) {
      if (depth[u] < depth[v]) {
        down.push_back(v);
        v = t.node(v).parent;
      } else {
        up.push_back(u);
        u = t.node(u).parent;
      }
    }
    up.insert(up.end(), down.rbegin(), down.rend());
    return up;
  }

  // Does the spanning subtree of the four taxa use this edge?
  bool steiner_uses(int edge, const std::array<Taxon, 4>& x) const {
    int inside = 0;
    for (Taxon taxon : x) inside += below[edge].contains(taxon);
    return inside >= 1 && inside <= 3;
  }

  // Edges incident to a node.
  std::vector<int> incident(int v) const {
    std::vector<int> out;
    if (v != t.stored_root()) out.push_back(v);
    for (int c : t.node(v).child) out.push_back(c);
    return out;
  }

  std::array<int, 2> endpoints(int edge) const {
    return {edge, t.node(edge).parent};
  }

  // Is `taxon` on the side of `edge` away from `from_vertex`?
  bool away_side(int edge, int from_vertex, Taxon taxon) const {
    bool in_below = below[edge].contains(taxon);
    return from_vertex == t.node(edge).parent ? in_below : !in_below;
  }
};

// Partner of `t` under split `s` of the sorted tuple.
Taxon split_partner(const std::array<Taxon, 4>& x, int s, Taxon t) {
  // Split s pairs x[0] with x[s+1]; the other two form the second pair.
  std::array<int, 4> mate{};
  mate[0] = s + 1;
  mate[s + 1] = 0;
  std::array<int, 2> rest{};
  int k = 0;
  for (int i = 1; i < 4; ++i)
    if (i != s + 1) rest[k++] = i;
  mate[rest[0]] = rest[1];
  mate[rest[1]] = rest[0];
  for (int i = 0; i < 4; ++i)
    if (x[i] == t) return x[mate[i]];
  throw input_error("split_partner: taxon not in tuple");
}

}  // namespace

SharedEdgeGraph shared_edge_graph(const SuspectQuartetSet& q,
                                  const UnrootedTree& species) {
  SharedEdgeGraph g;
  g.suspects = q.suspects;
  TreeFrame frame(species);
  DistanceMatrix unit = tree_distance_matrix(species, /*unit_lengths=*/true);

  for (const SuspectQuartet& s : g.suspects) {
    for (Taxon x : s.taxa)
      if (!species.has_taxon(x))
        throw input_error("suspect taxon " + std::to_string(x) +
                          " missing from the species topology");
    int split = four_point_split(unit, s.taxa);
    if (split < 0)
      throw input_error("species topology does not resolve a suspect tuple");
    // Cherries (a,b) and (c,d) of the induced quartet; the internal branch
    // is exactly the edges shared by the a-c and b-d paths.
    Taxon a = s.taxa[0];
    Taxon b = split_partner(s.taxa, split, a);
    std::array<Taxon, 2> cd{};
    int k = 0;
    for (Taxon x : s.taxa)
      if (x != a && x != b) cd[k++] = x;
    std::vector<int> ac =
        frame.path_edges(species.node_of(a), species.node_of(cd[0]));
    std::vector<int> bd =
        frame.path_edges(species.node_of(b), species.node_of(cd[1]));
    std::sort(ac.begin(), ac.end());
    std::sort(bd.begin(), bd.end());
    std::vector<int> internal;
    std::set_intersection(ac.begin(), ac.end(), bd.begin(), bd.end(),
                          std::back_inserter(internal));
    g.internal_edges.push_back(std::move(internal));
  }

  int m = static_cast<int>(g.suspects.size());
  g.adjacency.assign(m, {});
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      const auto& a = g.internal_edges[i];
      const auto& b = g.internal_edges[j];
      bool shares = false;
      for (std::size_t x = 0, y = 0; x < a.size() && y < b.size();) {
        if (a[x] == b[y]) {
          shares = true;
          break;
        }
        a[x] < b[y] ? ++x : ++y;
      }
      if (shares) {
        g.adjacency[i].push_back(j);
        g.adjacency[j].push_back(i);
      }
    }

  std::vector<char> seen(m, 0);
  for (int i = 0; i < m; ++i) {
    if (seen[i]) continue;
    std::vector<int> comp{i};
    seen[i] = 1;
    for (std::size_t k = 0; k < comp.size(); ++k)
      for (int j : g.adjacency[comp[k]])
        if (!seen[j]) {
          seen[j] = 1;
          comp.push_back(j);
        }
    std::sort(comp.begin(), comp.end());
    g.components.push_back(std::move(comp));
  }
  return g;
}

namespace {

struct PathShape {
  std::vector<int> edges;  // ordered along the path
  int end_vertex0 = -1;    // free endpoint of edges.front()
  int end_vertex1 = -1;    // free endpoint of edges.back()
};

// The edge set must form a simple path in the tree; returns std::nullopt
// with a reason otherwise.
std::optional<PathShape> as_path(const TreeFrame& frame,
                                 const std::vector<int>& edges,
                                 std::string* why) {
  std::map<int, std::vector<int>> touch;  // vertex -> incident path edges
  for (int e : edges)
    for (int v : frame.endpoints(e)) touch[v].push_back(e);
  int ends = 0;
  for (auto& [v, inc] : touch) {
    if (inc.size() > 2) {
      *why = "shared-edge union branches at a vertex";
      return std::nullopt;
    }
    if (inc.size() == 1) ++ends;
  }
  if (ends != 2) {
    *why = "shared-edge union is not a single path";
    return std::nullopt;
  }
  PathShape p;
  for (auto& [v, inc] : touch)
    if (inc.size() == 1) {
      p.end_vertex0 = v;
      break;
    }
  // Walk from one end.
  int at = p.end_vertex0;
  int prev_edge = -1;
  while (true) {
    const auto& inc = touch[at];
    int next = inc[0] == prev_edge && inc.size() > 1 ? inc[1]
               : inc[0] != prev_edge              ? inc[0]
                                                  : -1;
    if (next < 0) break;
    p.edges.push_back(next);
    auto [x, y] = frame.endpoints(next);
    at = x == at ? y : x;
    prev_edge = next;
    if (touch[at].size() == 1) break;  // reached the far end
  }
  p.end_vertex1 = at;
  if (p.edges.size() != edges.size()) {
    *why = "shared-edge union is disconnected";
    return std::nullopt;
  }
  return p;
}

}  // namespace

std::vector<HighwayCall> locate_highways(const SharedEdgeGraph& graph,
                                         const UnrootedTree& species) {
  TreeFrame frame(species);
  std::vector<HighwayCall> calls;

  for (std::size_t ci = 0; ci < graph.components.size(); ++ci) {
    const std::vector<int>& comp = graph.components[ci];
    HighwayCall call;
    call.component = static_cast<int>(ci);
    call.support = static_cast<int>(comp.size());
    auto abort = [&](std::string why) {
      call.ok = false;
      call.diagnostic = std::move(why);
      calls.push_back(call);
    };

    // Union of the pairwise shared edge sets within the component.
    std::vector<int> shared_union;
    for (std::size_t a = 0; a < comp.size(); ++a)
      for (std::size_t b = a + 1; b < comp.size(); ++b) {
        const auto& ea = graph.internal_edges[comp[a]];
        const auto& eb = graph.internal_edges[comp[b]];
        std::set_intersection(ea.begin(), ea.end(), eb.begin(), eb.end(),
                              std::back_inserter(shared_union));
      }
    std::sort(shared_union.begin(), shared_union.end());
    shared_union.erase(
        std::unique(shared_union.begin(), shared_union.end()),
        shared_union.end());
    if (shared_union.empty()) {
      abort("component has no shared edges (isolated suspect)");
      continue;
    }

    std::string why;
    std::optional<PathShape> path = as_path(frame, shared_union, &why);
    if (!path) {
      abort(why);
      continue;
    }

    auto candidates_at = [&](int vertex, int path_edge) {
      std::vector<int> out;
      for (int e : frame.incident(vertex))
        if (e != path_edge) out.push_back(e);
      return out;
    };
    std::vector<int> c0 = candidates_at(path->end_vertex0, path->edges.front());
    std::vector<int> c1 = candidates_at(path->end_vertex1, path->edges.back());
    if (c0.empty() || c1.empty()) {
      abort("path end has no flanking edges (ends at a leaf)");
      continue;
    }

    std::vector<std::pair<int, int>> passing;
    for (int e0 : c0)
      for (int e1 : c1) {
        bool all = true;
        for (int s : comp)
          if (!frame.steiner_uses(e0, graph.suspects[s].taxa) &&
              !frame.steiner_uses(e1, graph.suspects[s].taxa)) {
            all = false;
            break;
          }
        if (all) passing.emplace_back(e0, e1);
      }
    if (passing.empty()) {
      abort("no flanking edge pair is consistent with every suspect");
      continue;
    }
    if (passing.size() == 1) {
      call.ok = true;
      call.oriented = false;
      call.edge0 = std::min(passing[0].first, passing[0].second);
      call.edge1 = std::max(passing[0].first, passing[0].second);
      calls.push_back(call);
      continue;
    }

    // Recipient: the edge common to all passing pairs.
    std::map<int, int> hits;
    for (auto& [a, b] : passing) {
      ++hits[a];
      ++hits[b];
    }
    std::vector<int> common;
    for (auto& [e, c] : hits)
      if (c == static_cast<int>(passing.size())) common.push_back(e);
    if (common.size() != 1) {
      abort("surviving candidate pairs share no unique edge");
      continue;
    }
    int recipient = common[0];
    std::vector<int> partners;
    for (auto& [a, b] : passing) {
      int other = a == recipient ? b : a;
      if (std::find(partners.begin(), partners.end(), other) == partners.end())
        partners.push_back(other);
    }
    if (partners.size() == 1) {
      call.ok = true;
      call.oriented = true;
      call.edge0 = partners[0];  // donor
      call.edge1 = recipient;
      calls.push_back(call);
      continue;
    }

    // Two possible donors: read the side the recipient's leaf joins in a
    // suspect spanning the subtrees flanking both path ends.
    bool recipient_at_0 =
        std::find(c0.begin(), c0.end(), recipient) != c0.end();
    int v_r = recipient_at_0 ? path->end_vertex0 : path->end_vertex1;
    int v_d = recipient_at_0 ? path->end_vertex1 : path->end_vertex0;
    const std::vector<int>& r_side = recipient_at_0 ? c0 : c1;
    int other_r = -1;
    for (int e : r_side)
      if (e != recipient) other_r = e;

    int donor = -1;
    for (int s : comp) {
      const SuspectQuartet& sq = graph.suspects[s];
      Taxon in_r = 0, in_d0 = 0, in_d1 = 0, elsewhere = 0;
      int n_r = 0, n_d0 = 0, n_d1 = 0;
      for (Taxon x : sq.taxa) {
        if (frame.away_side(recipient, v_r, x)) {
          in_r = x;
          ++n_r;
        } else if (frame.away_side(partners[0], v_d, x)) {
          in_d0 = x;
          ++n_d0;
        } else if (frame.away_side(partners[1], v_d, x)) {
          in_d1 = x;
          ++n_d1;
        } else {
          elsewhere = x;
        }
      }
      if (n_r != 1 || n_d0 != 1 || n_d1 != 1) continue;
      if (other_r >= 0 && !frame.away_side(other_r, v_r, elsewhere)) continue;
      Taxon mate = split_partner(sq.taxa, sq.split, in_r);
      if (mate == in_d0) {
        donor = partners[0];
        break;
      }
      if (mate == in_d1) {
        donor = partners[1];
        break;
      }
    }
    if (donor < 0) {
      abort("could not orient: no suspect spans the four flanking subtrees");
      continue;
    }
    call.ok = true;
    call.oriented = true;
    call.edge0 = donor;
    call.edge1 = recipient;
    calls.push_back(call);
  }
  return calls;
}

std::string highways_csv(const std::vector<HighwayCall>& calls) {
  std::ostringstream out;
  out << "component_id,edge0_child_vertex,edge1_child_vertex,oriented_flag,"
         "support\n";
  for (const HighwayCall& c : calls) {
    if (!c.ok) continue;
    out << c.component << ',' << c.edge0 << ',' << c.edge1 << ','
        << (c.oriented ? 1 : 0) << ',' << c.support << '\n';
  }
  return out.str();
}

}  // namespace lgt
