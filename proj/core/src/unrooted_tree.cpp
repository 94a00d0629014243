#include "lgt/unrooted_tree.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <unordered_set>

#include "lgt/species_tree.hpp"

namespace lgt {

int split_index(const std::array<Taxon, 4>& x, Taxon p, Taxon q) {
  auto pos = [&](Taxon t) {
    for (int i = 0; i < 4; ++i)
      if (x[i] == t) return i;
    return -1;
  };
  int pi = pos(p), qi = pos(q);
  if (pi < 0 || qi < 0 || pi == qi)
    throw input_error("split pair not drawn from the four-tuple");
  if (pi == 0 || qi == 0) return (pi == 0 ? qi : pi) - 1;
  // The pair is the side away from x[0]; x[0] partners the leftover taxon.
  for (int i = 1; i < 4; ++i)
    if (i != pi && i != qi) return i - 1;
  throw input_error("split pair not drawn from the four-tuple");
}

UnrootedTree::UnrootedTree(std::vector<Node> nodes, int root)
    : nodes_(std::move(nodes)), root_(root) {
  const int n = static_cast<int>(nodes_.size());
  if (n == 0) throw input_error("unrooted tree: empty");
  if (root_ < 0 || root_ >= n || nodes_[root_].parent != -1)
    throw input_error("unrooted tree: bad stored root");
  int seen = 0;
  std::vector<int> stack{root_};
  std::unordered_set<Taxon> used;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    ++seen;
    if (nodes_[v].child.empty()) {
      if (nodes_[v].taxon <= 0)
        throw input_error("unrooted tree: unlabelled leaf");
      if (!used.insert(nodes_[v].taxon).second)
        throw input_error("unrooted tree: duplicate taxon");
      leaves_.push_back(v);
    } else if (nodes_[v].taxon != 0) {
      // A labelled node with a single child is allowed as the stored root:
      // that is the leaf-rooted form produced by suppression.
      if (v != root_ || nodes_[v].child.size() != 1)
        throw input_error("unrooted tree: internal node with taxon");
      if (!used.insert(nodes_[v].taxon).second)
        throw input_error("unrooted tree: duplicate taxon");
      leaves_.push_back(v);
    }
    for (int c : nodes_[v].child) {
      if (c < 0 || c >= n || nodes_[c].parent != v)
        throw input_error("unrooted tree: parent/child mismatch");
      stack.push_back(c);
    }
  }
  if (seen != n) throw input_error("unrooted tree: not a tree");
  std::sort(leaves_.begin(), leaves_.end(),
            [&](int a, int b) { return nodes_[a].taxon < nodes_[b].taxon; });
}

std::vector<Taxon> UnrootedTree::taxa() const {
  std::vector<Taxon> r;
  r.reserve(leaves_.size());
  for (int l : leaves_) r.push_back(nodes_[l].taxon);
  return r;
}

bool UnrootedTree::has_taxon(Taxon t) const {
  for (int l : leaves_)
    if (nodes_[l].taxon == t) return true;
  return false;
}

int UnrootedTree::node_of(Taxon t) const {
  for (int l : leaves_)
    if (nodes_[l].taxon == t) return l;
  throw input_error("unknown taxon " + std::to_string(t));
}

int UnrootedTree::degree(int i) const {
  return static_cast<int>(nodes_[i].child.size()) + (i == root_ ? 0 : 1);
}

namespace {

// Undirected adjacency view used for suppression and restriction.
struct Adj {
  struct Arc {
    int to;
    double len;
  };
  std::vector<std::vector<Arc>> nb;
  std::vector<Taxon> taxon;

  void drop_edge(int a, int b) {
    auto rm = [&](int u, int v) {
      auto& l = nb[u];
      for (std::size_t i = 0; i < l.size(); ++i)
        if (l[i].to == v) {
          l.erase(l.begin() + i);
          return;
        }
    };
    rm(a, b);
    rm(b, a);
  }
};

Adj to_adjacency(const UnrootedTree& t) {
  Adj a;
  a.nb.resize(t.n_nodes());
  a.taxon.resize(t.n_nodes(), 0);
  for (int v = 0; v < t.n_nodes(); ++v) {
    a.taxon[v] = t.node(v).taxon;
    for (int c : t.node(v).child) {
      double len = t.node(c).length;
      a.nb[v].push_back({c, len});
      a.nb[c].push_back({v, len});
    }
  }
  return a;
}

// Rebuild an UnrootedTree from adjacency, rooted at the smallest-taxon
// leaf among `alive` vertices.
UnrootedTree from_adjacency(const Adj& a, const std::vector<char>& alive) {
  int root = -1;
  Taxon best = 0;
  int n_alive = 0;
  for (std::size_t v = 0; v < a.nb.size(); ++v) {
    if (!alive[v]) continue;
    ++n_alive;
    if (a.taxon[v] > 0 && (root < 0 || a.taxon[v] < best)) {
      root = static_cast<int>(v);
      best = a.taxon[v];
    }
  }
  if (root < 0) throw input_error("tree rebuild: no leaves");
  std::vector<UnrootedTree::Node> out;
  std::vector<int> id(a.nb.size(), -1);
  std::function<int(int, int, double)> build = [&](int v, int parent_new,
                                                   double len) -> int {
    int nid = static_cast<int>(out.size());
    out.push_back({});
    out[nid].parent = parent_new;
    out[nid].length = len;
    out[nid].taxon = a.taxon[v];
    id[v] = nid;
    for (const auto& arc : a.nb[v]) {
      if (!alive[arc.to] || id[arc.to] >= 0) continue;
      int cid = build(arc.to, nid, arc.len);
      out[nid].child.push_back(cid);
    }
    return nid;
  };
  build(root, -1, 0.0);
  if (static_cast<int>(out.size()) != n_alive)
    throw input_error("tree rebuild: disconnected");
  return UnrootedTree(std::move(out), 0);
}

void suppress_adjacency(Adj& a, std::vector<char>& alive) {
  bool again = true;
  while (again) {
    again = false;
    for (std::size_t v = 0; v < a.nb.size(); ++v) {
      if (!alive[v] || a.taxon[v] > 0) continue;
      if (a.nb[v].size() == 2) {
        auto x = a.nb[v][0], y = a.nb[v][1];
        a.drop_edge(static_cast<int>(v), x.to);
        a.drop_edge(static_cast<int>(v), y.to);
        a.nb[x.to].push_back({y.to, x.len + y.len});
        a.nb[y.to].push_back({x.to, x.len + y.len});
        alive[v] = 0;
        again = true;
      }
    }
  }
}

}  // namespace

UnrootedTree UnrootedTree::suppressed() const {
  if (n_leaves() <= 1) return *this;
  Adj a = to_adjacency(*this);
  std::vector<char> alive(n_nodes(), 1);
  suppress_adjacency(a, alive);
  return from_adjacency(a, alive);
}

UnrootedTree UnrootedTree::restricted(const std::vector<Taxon>& keep,
                                      bool suppress) const {
  if (keep.empty()) throw input_error("restricted: empty taxon set");
  std::vector<char> kept(n_nodes(), 0);
  for (Taxon t : keep) kept[node_of(t)] = 1;
  // Peel non-kept leaves and dead branches.
  Adj a = to_adjacency(*this);
  std::vector<char> alive(n_nodes(), 1);
  bool again = true;
  while (again) {
    again = false;
    for (int v = 0; v < n_nodes(); ++v) {
      if (!alive[v] || kept[v]) continue;
      if (a.nb[v].size() <= 1) {
        if (!a.nb[v].empty()) a.drop_edge(v, a.nb[v][0].to);
        alive[v] = 0;
        again = true;
      }
    }
  }
  if (suppress) suppress_adjacency(a, alive);
  return from_adjacency(a, alive);
}

std::vector<TaxonSet> UnrootedTree::bipartitions(int universe) const {
  UnrootedTree s = n_leaves() >= 2 ? suppressed() : *this;
  std::vector<TaxonSet> below(s.n_nodes(), TaxonSet(universe));
  std::vector<TaxonSet> out;
  // Postorder accumulation of clades under each stored edge.
  std::function<void(int)> walk = [&](int v) {
    if (s.is_leaf(v)) {
      below[v].insert(s.node(v).taxon);
      return;
    }
    for (int c : s.node(v).child) {
      walk(c);
      below[v].unite(below[c]);
    }
  };
  walk(s.stored_root());
  for (int v = 0; v < s.n_nodes(); ++v) {
    if (v == s.stored_root() || s.is_leaf(v)) continue;
    int cnt = below[v].count();
    if (cnt <= 1 || cnt >= s.n_leaves() - 1) continue;  // trivial split
    out.push_back(below[v].canonical_side());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string UnrootedTree::topology_key() const {
  UnrootedTree s = suppressed();
  // Canonical form: subtree keys sorted at every node; leaf key = taxon.
  std::function<std::pair<Taxon, std::string>(int)> walk =
      [&](int v) -> std::pair<Taxon, std::string> {
    if (s.is_leaf(v)) {
      Taxon t = s.node(v).taxon;
      return {t, std::to_string(t)};
    }
    std::vector<std::pair<Taxon, std::string>> parts;
    for (int c : s.node(v).child) parts.push_back(walk(c));
    std::sort(parts.begin(), parts.end());
    std::string key = "(";
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) key += ",";
      key += parts[i].second;
    }
    key += ")";
    return {parts.front().first, key};
  };
  // Suppressed trees are stored rooted at the smallest-taxon leaf, so the
  // key is rooting-independent.
  int r = s.stored_root();
  std::string key = std::to_string(s.node(r).taxon);
  if (!s.node(r).child.empty()) key += "|" + walk(s.node(r).child[0]).second;
  return key;
}

int rf_distance(const UnrootedTree& a, const UnrootedTree& b) {
  auto ta = a.taxa(), tb = b.taxa();
  if (ta != tb) throw input_error("rf_distance: leaf sets differ");
  int universe = ta.empty() ? 0 : ta.back();
  auto ba = a.bipartitions(universe);
  auto bb = b.bipartitions(universe);
  // Both sorted; count symmetric difference.
  std::size_t i = 0, j = 0;
  int diff = 0;
  while (i < ba.size() && j < bb.size()) {
    if (ba[i] == bb[j]) {
      ++i;
      ++j;
    } else if (ba[i] < bb[j]) {
      ++diff;
      ++i;
    } else {
      ++diff;
      ++j;
    }
  }
  diff += static_cast<int>((ba.size() - i) + (bb.size() - j));
  return diff;
}

Quartet quartet_of(const UnrootedTree& t, std::array<Taxon, 4> x) {
  std::sort(x.begin(), x.end());
  for (int i = 0; i < 3; ++i)
    if (x[i] == x[i + 1]) throw input_error("quartet_of: repeated taxon");
  UnrootedTree q = t.restricted({x[0], x[1], x[2], x[3]}, true);
  // q is stored rooted at its smallest-taxon leaf, i.e. at x[0]; its single
  // child is the hub. A resolved quartet has hub children {partner leaf,
  // inner node}; a 4-star has three leaf children.
  int l0 = q.node_of(x[0]);
  int hub = q.node(l0).child[0];
  if (q.node(hub).child.size() != 2)
    throw model_error("quartet_of: unresolved four-leaf topology");
  for (int c : q.node(hub).child)
    if (q.is_leaf(c)) return {x, split_index(x, x[0], q.node(c).taxon)};
  throw model_error("quartet_of: unresolved four-leaf topology");
}

UnrootedTree as_unrooted(const SpeciesPhylogeny& s) {
  std::vector<UnrootedTree::Node> out(s.n_vertices());
  for (int v = 0; v < s.n_vertices(); ++v) {
    out[v].parent = s.parent(v);
    out[v].length = s.tau(v);
    out[v].taxon = s.taxon(v);
    for (int c : s.children(v))
      if (c >= 0) out[v].child.push_back(c);
  }
  return UnrootedTree(std::move(out), s.root());
}

}  // namespace lgt
