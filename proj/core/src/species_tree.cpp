#include "lgt/species_tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace lgt {

SpeciesPhylogeny::SpeciesPhylogeny(std::vector<Vertex> vertices, int root,
                                   std::vector<std::string> names)
    : v_(std::move(vertices)), root_(root), names_(std::move(names)) {
  if (names_.empty()) names_.emplace_back();
  validate();

  depth_.assign(v_.size(), 0.0);
  vertex_of_.assign(names_.size(), -1);
  // Depths by preorder walk.
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (v != root_) depth_[v] = depth_[v_[v].parent] + v_[v].tau;
    if (is_leaf(v)) {
      leaves_.push_back(v);
      vertex_of_[v_[v].taxon] = v;
      if (v_[v].extant) ++n_extant_;
    } else {
      for (int c : v_[v].child)
        if (c >= 0) stack.push_back(c);
    }
  }
  std::sort(leaves_.begin(), leaves_.end(),
            [&](int a, int b) { return v_[a].taxon < v_[b].taxon; });
  double h = 0.0;
  bool any_extant = n_extant_ > 0;
  for (int l : leaves_)
    if (!any_extant || v_[l].extant) h = std::max(h, depth_[l]);
  height_ = h;
}

void SpeciesPhylogeny::validate() const {
  const int n = static_cast<int>(v_.size());
  if (n == 0) throw input_error("species phylogeny: empty vertex set");
  if (root_ < 0 || root_ >= n) throw input_error("species phylogeny: bad root id");
  if (v_[root_].parent != -1)
    throw input_error("species phylogeny: root must have no parent");
  int seen = 0;
  std::vector<char> taxon_used(names_.size(), 0);
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    ++seen;
    const Vertex& x = v_[v];
    const bool leaf = x.child[0] < 0;
    if (leaf) {
      if (x.child[1] >= 0)
        throw input_error("species phylogeny: half-populated children");
      if (x.taxon <= 0 || x.taxon >= static_cast<int>(names_.size()))
        throw input_error("species phylogeny: leaf taxon out of range");
      if (taxon_used[x.taxon])
        throw input_error("species phylogeny: duplicate taxon label");
      taxon_used[x.taxon] = 1;
    } else {
      // Unary pass-through vertices (child[1] = -1) are tolerated here so
      // unsuppressed restrictions can be represented; generators and the
      // parser additionally enforce binary shape via require_binary().
      for (int c : x.child) {
        if (c < 0) continue;
        if (c >= n || v_[c].parent != v)
          throw input_error("species phylogeny: parent/child mismatch");
        stack.push_back(c);
      }
      if (x.taxon != 0)
        throw input_error("species phylogeny: internal vertex with taxon label");
    }
    if (v != root_) {
      if (!(x.tau > 0.0)) throw input_error("species phylogeny: tau must be positive");
      if (x.lambda < 0.0)
        throw input_error("species phylogeny: lambda must be nonnegative");
    }
  }
  if (seen != n)
    throw input_error("species phylogeny: disconnected or cyclic vertex set");
}

int SpeciesPhylogeny::vertex_of(Taxon t) const {
  if (t <= 0 || t >= static_cast<int>(vertex_of_.size()) || vertex_of_[t] < 0)
    throw input_error("unknown taxon " + std::to_string(t));
  return vertex_of_[t];
}

std::vector<Taxon> SpeciesPhylogeny::leaf_taxa() const {
  std::vector<Taxon> r;
  r.reserve(leaves_.size());
  for (int l : leaves_) r.push_back(v_[l].taxon);
  return r;
}

std::vector<Taxon> SpeciesPhylogeny::extant_taxa() const {
  std::vector<Taxon> r;
  for (int l : leaves_)
    if (v_[l].extant) r.push_back(v_[l].taxon);
  return r;
}

std::vector<int> SpeciesPhylogeny::edges() const {
  std::vector<int> r;
  r.reserve(v_.size() - 1);
  for (int v = 0; v < n_vertices(); ++v)
    if (v != root_) r.push_back(v);
  return r;
}

int SpeciesPhylogeny::mrca(int u, int v) const {
  while (u != v) {
    if (depth_[u] < depth_[v]) std::swap(u, v);
    u = v_[u].parent;  // u was the deeper (or tied) vertex
    if (u < 0) throw input_error("mrca: vertices not in one tree");
  }
  return u;
}

std::vector<int> SpeciesPhylogeny::path_edges(int u, int v) const {
  std::vector<int> up, down;
  int a = u, b = v;
  while (a != b) {
    if (depth_[a] >= depth_[b] && a != root_) {
      up.push_back(a);
      a = v_[a].parent;
    } else {
      down.push_back(b);
      b = v_[b].parent;
    }
  }
  up.insert(up.end(), down.rbegin(), down.rend());
  return up;
}

void SpeciesPhylogeny::validate_location(const Location& x) const {
  if (x.edge < 0 || x.edge >= n_vertices() || x.edge == root_)
    throw input_error("location: bad edge id");
  if (!(x.offset >= 0.0) || x.offset > v_[x.edge].tau)
    throw input_error("location: offset outside edge length");
}

double SpeciesPhylogeny::depth_at(const Location& x) const {
  validate_location(x);
  return depth_[v_[x.edge].parent] + x.offset;
}

double SpeciesPhylogeny::divergence_time(const Location& x,
                                         const Location& y) const {
  const double dx = depth_at(x), dy = depth_at(y);
  if (x.edge == y.edge) return std::abs(dx - dy);
  int m = mrca(x.edge, y.edge);
  if (m == x.edge) return dy - dx;  // y strictly below x's edge
  if (m == y.edge) return dx - dy;
  return dx + dy - 2.0 * depth_[m];
}

bool SpeciesPhylogeny::contemporaneous(const Location& x, const Location& y,
                                       double tol) const {
  return std::abs(depth_at(x) - depth_at(y)) <=
         tol * std::max(1.0, height_);
}

void SpeciesPhylogeny::require_binary() const {
  for (int v = 0; v < n_vertices(); ++v)
    if (!is_leaf(v) && v_[v].child[1] < 0)
      throw input_error("species phylogeny: unary internal vertex " +
                        std::to_string(v));
}

bool SpeciesPhylogeny::is_ultrametric(double rel_tol) const {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  int count = 0;
  for (int l : leaves_) {
    if (n_extant_ > 0 && !v_[l].extant) continue;
    lo = std::min(lo, depth_[l]);
    hi = std::max(hi, depth_[l]);
    ++count;
  }
  if (count <= 1) return true;
  return hi - lo <= rel_tol * std::max(hi, 1e-300);
}

SpeciesPhylogeny SpeciesPhylogeny::restricted(const std::vector<Taxon>& keep,
                                              bool suppress) const {
  if (keep.empty()) throw input_error("restricted: empty taxon set");
  std::vector<char> kept_leaf(v_.size(), 0);
  int n_keep = 0;
  for (Taxon t : keep) {
    int l = vertex_of(t);
    if (!kept_leaf[l]) {
      kept_leaf[l] = 1;
      ++n_keep;
    }
  }
  // Per-vertex count of kept leaves in the subtree (postorder).
  std::vector<int> cnt(v_.size(), 0);
  std::vector<int> order;
  order.reserve(v_.size());
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    order.push_back(v);
    for (int c : v_[v].child)
      if (c >= 0) stack.push_back(c);
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    if (is_leaf(v)) {
      cnt[v] = kept_leaf[v];
    } else {
      for (int c : v_[v].child)
        if (c >= 0) cnt[v] += cnt[c];
    }
  }
  // MRCA of the kept set.
  int top = root_;
  while (!is_leaf(top)) {
    int next = -1;
    for (int c : v_[top].child)
      if (c >= 0 && cnt[c] == n_keep) next = c;
    if (next < 0) break;
    top = next;
  }

  std::vector<Vertex> out;
  auto kept_children = [&](int v) {
    std::vector<int> r;
    for (int c : v_[v].child)
      if (c >= 0 && cnt[c] > 0) r.push_back(c);
    return r;
  };
  // Emits the subtree hanging below original vertex v; returns new id.
  std::function<int(int, int, double, double)> build =
      [&](int v, int new_parent, double tau_sum, double lamtau_sum) -> int {
    auto kc = kept_children(v);
    if (suppress && !is_leaf(v) && kc.size() == 1) {
      // Exactly one child subtree survives; merge edges through v.
      int c = kc[0];
      return build(c, new_parent, tau_sum + v_[c].tau,
                   lamtau_sum + v_[c].lambda * v_[c].tau);
    }
    int id = static_cast<int>(out.size());
    out.push_back({});
    out[id].parent = new_parent;
    if (new_parent >= 0) {
      out[id].tau = tau_sum;
      out[id].lambda = tau_sum > 0 ? lamtau_sum / tau_sum : 0.0;
    }
    if (is_leaf(v)) {
      out[id].taxon = v_[v].taxon;
      out[id].extant = v_[v].extant;
    } else {
      int slot = 0;
      for (int c : kc) {
        int cid = build(c, id, v_[c].tau, v_[c].lambda * v_[c].tau);
        out[id].child[slot++] = cid;
      }
      // An unsuppressed pass-through keeps its one child in slot 0.
    }
    return id;
  };
  build(top, -1, 0.0, 0.0);
  return SpeciesPhylogeny(std::move(out), 0, names_);
}

SpeciesPhylogeny SpeciesPhylogeny::extant_phylogeny() const {
  auto ex = extant_taxa();
  if (ex.empty()) throw input_error("extant_phylogeny: no extant leaves");
  return restricted(ex, true);
}

SpeciesPhylogeny SpeciesPhylogeny::with_scaled_lambda(double factor) const {
  if (!(factor >= 0.0)) throw input_error("lambda scale must be nonnegative");
  std::vector<Vertex> w = v_;
  for (auto& x : w) x.lambda *= factor;
  return SpeciesPhylogeny(std::move(w), root_, names_);
}

}  // namespace lgt
