#include "lgt/species_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "lgt/errors.hpp"
#include "lgt/rng.hpp"

namespace lgt {

namespace {

using Vertex = SpeciesPhylogeny::Vertex;

std::vector<std::string> default_names(int n) {
  std::vector<std::string> names(n + 1);
  for (int i = 1; i <= n; ++i) names[i] = "t" + std::to_string(i);
  return names;
}

double positive_exp_gap(std::mt19937_64& rng, double rate) {
  std::exponential_distribution<double> d(rate);
  double z = 0.0;
  do {
    z = d(rng);
  } while (!(z > 0.0));
  return z;
}

double draw_lambda(std::mt19937_64& rng, double lambda_bar,
                   double rho_lambda) {
  std::uniform_real_distribution<double> d(rho_lambda * lambda_bar,
                                           lambda_bar);
  return d(rng);
}

void check_rates(double lambda_bar, double rho_lambda) {
  if (!(lambda_bar >= 0.0))
    throw config_error("lambda_bar must be non-negative");
  if (!(rho_lambda > 0.0 && rho_lambda <= 1.0))
    throw config_error("rho_lambda must lie in (0, 1]");
}

// Rebuilds a tree via its public interface with a truncated name table, used
// after pruning a generator template down to taxa 1..n.
SpeciesPhylogeny compact_names(const SpeciesPhylogeny& t, int n_taxa) {
  std::vector<Vertex> out(t.n_vertices());
  for (int v = 0; v < t.n_vertices(); ++v) {
    out[v].parent = t.parent(v);
    out[v].child = t.children(v);
    if (!t.is_root(v)) {
      out[v].tau = t.tau(v);
      out[v].lambda = t.lambda(v);
    }
    if (t.is_leaf(v)) {
      out[v].taxon = t.taxon(v);
      out[v].extant = t.extant(v);
    }
  }
  return SpeciesPhylogeny(std::move(out), t.root(), default_names(n_taxa));
}

}  // namespace

SpeciesPhylogeny generate_yule(const YuleParams& p) {
  if (p.n < 2) throw config_error("yule.n must be at least 2");
  if (!(p.nu > 0.0)) throw config_error("yule.nu must be positive");
  check_rates(p.lambda_bar, p.rho_lambda);

  std::mt19937_64 rng = derive_rng(p.seed, stream::species);

  std::vector<Vertex> v(1);  // root
  std::vector<double> birth{0.0};
  auto add_child = [&](int parent, double t) {
    int id = static_cast<int>(v.size());
    v.emplace_back();
    v[id].parent = parent;
    if (v[parent].child[0] < 0)
      v[parent].child[0] = id;
    else
      v[parent].child[1] = id;
    birth.push_back(t);
    return id;
  };

  double t = 0.0;
  std::vector<int> tips{add_child(0, 0.0), add_child(0, 0.0)};

  // The final split's newborn lineage is discarded, which undoes that split
  // structurally; so only the first n-2 splits shape the tree, while the
  // last two waits still extend the stop time.
  for (int k = 2; k < p.n; ++k) {
    t += positive_exp_gap(rng, k * p.nu);
    std::uniform_int_distribution<std::size_t> pick(0, tips.size() - 1);
    std::size_t i = pick(rng);
    int parent = tips[i];
    v[parent].tau = t - birth[parent];
    tips[i] = add_child(parent, t);
    tips.push_back(add_child(parent, t));
  }
  t += positive_exp_gap(rng, p.n * p.nu);
  t += positive_exp_gap(rng, (p.n + 1) * p.nu);

  Taxon next = 0;
  for (int tip : tips) {
    v[tip].tau = t - birth[tip];
    v[tip].taxon = ++next;
    v[tip].extant = true;
  }
  for (std::size_t i = 1; i < v.size(); ++i)
    v[i].lambda = draw_lambda(rng, p.lambda_bar, p.rho_lambda);

  SpeciesPhylogeny tree(std::move(v), 0, default_names(p.n));
  tree.require_binary();
  return tree;
}

namespace {

SpeciesPhylogeny complete_binary_tree(const BoundedRatesParams& p) {
  int depth = 0;
  while ((1 << depth) < p.n_plus) ++depth;
  int full = 1 << depth;

  std::vector<Vertex> v(1);
  Taxon next = 0;
  // Recursive expansion keeps leaf taxa in left-to-right order.
  auto build = [&](auto&& self, int vertex, int level) -> void {
    if (level == depth) {
      v[vertex].taxon = ++next;
      v[vertex].extant = true;
      return;
    }
    for (int side = 0; side < 2; ++side) {
      int id = static_cast<int>(v.size());
      v.emplace_back();
      v[id].parent = vertex;
      v[id].tau = p.tau_bar;
      v[id].lambda = p.lambda_bar;
      v[vertex].child[side] = id;
      self(self, id, level + 1);
    }
  };
  build(build, 0, 0);
  SpeciesPhylogeny tree(std::move(v), 0, default_names(full));
  if (full == p.n_plus) return tree;

  std::vector<Taxon> keep;
  for (Taxon x = 1; x <= p.n_plus; ++x) keep.push_back(x);
  return compact_names(tree.restricted(keep, /*suppress=*/true), p.n_plus);
}

SpeciesPhylogeny random_ultrametric_tree(const BoundedRatesParams& p) {
  std::mt19937_64 rng = derive_rng(p.seed, stream::species);
  double tau_min = p.rho_tau * p.tau_bar;

  constexpr int kMaxAttempts = 1000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    int n = p.n_plus;
    std::vector<Vertex> v(n);
    for (int i = 0; i < n; ++i) {
      v[i].taxon = i + 1;
      v[i].extant = true;
    }
    std::vector<int> roots(n);
    for (int i = 0; i < n; ++i) roots[i] = i;
    while (roots.size() > 1) {
      std::uniform_int_distribution<std::size_t> pick(0, roots.size() - 1);
      std::size_t i = pick(rng);
      std::swap(roots[i], roots.back());
      int a = roots.back();
      roots.pop_back();
      std::uniform_int_distribution<std::size_t> pick2(0, roots.size() - 1);
      std::size_t j = pick2(rng);
      int b = roots[j];
      int id = static_cast<int>(v.size());
      v.emplace_back();
      v[id].child = {a, b};
      v[a].parent = id;
      v[b].parent = id;
      roots[j] = id;
    }
    int root = roots[0];

    // Internal durations first; pendant durations must then close every leaf
    // out to one common horizon while staying inside the band.
    std::uniform_real_distribution<double> dur(tau_min, p.tau_bar);
    std::vector<double> depth_of(v.size(), 0.0);
    std::vector<int> order{root};
    for (std::size_t k = 0; k < order.size(); ++k)
      for (int c : v[order[k]].child)
        if (c >= 0) order.push_back(c);
    for (int u : order) {
      if (u == root) continue;
      if (v[u].child[0] >= 0) v[u].tau = dur(rng);
      depth_of[u] = depth_of[v[u].parent] + v[u].tau;
    }
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      double d = depth_of[v[i].parent];
      lo = std::max(lo, d + tau_min);
      hi = std::min(hi, d + p.tau_bar);
    }
    if (lo > hi) continue;  // band too narrow for this draw; retry
    for (int i = 0; i < n; ++i) v[i].tau = lo - depth_of[v[i].parent];
    for (std::size_t u = 0; u < v.size(); ++u)
      if (static_cast<int>(u) != root)
        v[u].lambda = draw_lambda(rng, p.lambda_bar, p.rho_lambda);

    SpeciesPhylogeny tree(std::move(v), root, default_names(n));
    tree.require_binary();
    return tree;
  }
  throw generation_error(
      "no ultrametric assignment found within the duration band after 1000 "
      "attempts; widen the duration band or reduce n_plus");
}

}  // namespace

SpeciesPhylogeny generate_bounded_rates(const BoundedRatesParams& p) {
  if (p.n_plus < 2) throw config_error("br.n_plus must be at least 2");
  if (!(p.tau_bar > 0.0)) throw config_error("br.tau_bar must be positive");
  if (!(p.rho_tau > 0.0 && p.rho_tau <= 1.0))
    throw config_error("br.rho_tau must lie in (0, 1]");
  check_rates(p.lambda_bar, p.rho_lambda);

  SpeciesPhylogeny tree = p.shape == TreeShape::complete_binary
                              ? complete_binary_tree(p)
                              : random_ultrametric_tree(p);
  tree.require_binary();
  return tree;
}

double edge_weight(const SpeciesPhylogeny& t, int edge) {
  if (edge < 0 || edge >= t.n_vertices() || t.is_root(edge))
    throw input_error("edge_weight: not an edge (child-vertex) id");
  return t.lambda(edge) * t.tau(edge);
}

namespace {

// Count of marked leaves in each vertex's subtree, children before parents.
std::vector<int> subtree_counts(const SpeciesPhylogeny& t,
                                const std::vector<char>& mark) {
  std::vector<int> order{t.root()};
  for (std::size_t k = 0; k < order.size(); ++k)
    for (int c : t.children(order[k]))
      if (c >= 0) order.push_back(c);
  std::vector<int> count(t.n_vertices(), 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int u = *it;
    if (t.is_leaf(u)) {
      count[u] = mark[u] ? 1 : 0;
    } else {
      for (int c : t.children(u))
        if (c >= 0) count[u] += count[c];
    }
  }
  return count;
}

// Sum of lambda*tau over original edges on paths between marked leaves: an
// edge is on such a path exactly when its subtree holds some but not all of
// the m marked leaves.
double marked_restriction_weight(const SpeciesPhylogeny& t,
                                 const std::vector<char>& mark, int m) {
  if (m < 2) return 0.0;
  std::vector<int> count = subtree_counts(t, mark);
  double sum = 0.0;
  for (int v = 0; v < t.n_vertices(); ++v) {
    if (t.is_root(v)) continue;
    if (count[v] >= 1 && count[v] <= m - 1) sum += t.lambda(v) * t.tau(v);
  }
  return sum;
}

}  // namespace

double subset_weight(const SpeciesPhylogeny& t, const std::vector<Taxon>& x) {
  std::vector<char> mark(t.n_vertices(), 0);
  int m = 0;
  for (Taxon taxon : x) {
    int v = t.vertex_of(taxon);
    if (v < 0) throw input_error("subset_weight: taxon not in tree");
    if (mark[v]) throw input_error("subset_weight: duplicate taxon");
    mark[v] = 1;
    ++m;
  }
  return marked_restriction_weight(t, mark, m);
}

LgtWeights lgt_weights(const SpeciesPhylogeny& t) {
  LgtWeights w;
  for (int v = 0; v < t.n_vertices(); ++v)
    if (!t.is_root(v)) w.total += t.lambda(v) * t.tau(v);

  std::vector<char> extant_mark(t.n_vertices(), 0);
  std::vector<int> extant_leaves;
  for (int leaf : t.leaves())
    if (t.extant(leaf)) {
      extant_mark[leaf] = 1;
      extant_leaves.push_back(leaf);
    }
  int ne = static_cast<int>(extant_leaves.size());
  w.extant = marked_restriction_weight(t, extant_mark, ne);

  // Pairwise path weights from per-vertex weight-to-root prefix sums.
  std::vector<double> wtr(t.n_vertices(), 0.0);
  std::vector<int> order{t.root()};
  for (std::size_t k = 0; k < order.size(); ++k)
    for (int c : t.children(order[k]))
      if (c >= 0) {
        wtr[c] = wtr[order[k]] + t.lambda(c) * t.tau(c);
        order.push_back(c);
      }
  auto pair_weight = [&](int a, int b) {
    return wtr[a] + wtr[b] - 2.0 * wtr[t.mrca(a, b)];
  };
  for (int i = 0; i < ne; ++i)
    for (int j = i + 1; j < ne; ++j)
      w.max_pair =
          std::max(w.max_pair, pair_weight(extant_leaves[i], extant_leaves[j]));

  if (ne < 4) return w;
  if (ne > 64) {
    // A four-leaf spanning subtree is covered by two leaf-to-leaf paths.
    w.max_quartet = 2.0 * w.max_pair;
    w.quartet_exact = false;
    return w;
  }

  // Exhaustive four-tuple scan over edge bitmasks: the spanning subtree of
  // {a,b,c,d} is the union of the b/c/d root-paths' symmetric differences
  // against a's.
  int words = (t.n_vertices() + 63) / 64;
  std::vector<std::uint64_t> rp(static_cast<std::size_t>(ne) * words, 0);
  std::vector<double> edge_w(t.n_vertices(), 0.0);
  for (int v = 0; v < t.n_vertices(); ++v)
    if (!t.is_root(v)) edge_w[v] = t.lambda(v) * t.tau(v);
  for (int i = 0; i < ne; ++i)
    for (int u = extant_leaves[i]; !t.is_root(u); u = t.parent(u))
      rp[i * words + u / 64] |= 1ULL << (u % 64);

  for (int a = 0; a < ne; ++a)
    for (int b = a + 1; b < ne; ++b)
      for (int c = b + 1; c < ne; ++c)
        for (int d = c + 1; d < ne; ++d) {
          double sum = 0.0;
          for (int k = 0; k < words; ++k) {
            std::uint64_t ra = rp[a * words + k];
            std::uint64_t bits = (ra ^ rp[b * words + k]) |
                                 (ra ^ rp[c * words + k]) |
                                 (ra ^ rp[d * words + k]);
            while (bits) {
              sum += edge_w[k * 64 + std::countr_zero(bits)];
              bits &= bits - 1;
            }
          }
          w.max_quartet = std::max(w.max_quartet, sum);
        }
  return w;
}

}  // namespace lgt
