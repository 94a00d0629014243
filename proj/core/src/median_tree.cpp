#include "lgt/median_tree.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lgt/errors.hpp"

namespace lgt {

namespace {

MedianDistance median_of_values(
    const std::vector<Taxon>& taxa,
    const std::vector<std::vector<double>>& values /* per pair, row-major */) {
  int n = static_cast<int>(taxa.size());
  MedianDistance out{DistanceMatrix(taxa), std::vector<int>(n * n, 0)};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      std::vector<double> v = values[i * n + j];
      if (v.empty())
        throw unsupported_pair_error(
            "pair (" + std::to_string(taxa[i]) + "," +
                std::to_string(taxa[j]) + ") displayed by no gene",
            taxa[i], taxa[j]);
      std::sort(v.begin(), v.end());
      out.matrix.set(i, j, v[(v.size() - 1) / 2]);  // lower middle when even
      out.support[i * n + j] = out.support[j * n + i] =
          static_cast<int>(v.size());
    }
  return out;
}

}  // namespace

MedianDistance median_matrix(const std::vector<DistanceMatrix>& per_gene,
                             const std::vector<Taxon>& taxa) {
  std::vector<Taxon> sorted = taxa;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw input_error("median matrix: duplicate taxon");
  int n = static_cast<int>(sorted.size());
  std::vector<std::vector<double>> values(n * n);
  for (const DistanceMatrix& g : per_gene) {
    g.validate();
    for (int i = 0; i < n; ++i) {
      int gi = g.index_of(sorted[i]);
      if (gi < 0) continue;
      for (int j = i + 1; j < n; ++j) {
        int gj = g.index_of(sorted[j]);
        if (gj < 0 || !g.has(gi, gj)) continue;
        values[i * n + j].push_back(g.at(gi, gj));
      }
    }
  }
  return median_of_values(sorted, values);
}

MedianDistance median_matrix(const std::vector<GeneTree>& genes,
                             const std::vector<Taxon>& taxa) {
  std::vector<DistanceMatrix> per_gene;
  per_gene.reserve(genes.size());
  for (const GeneTree& g : genes) per_gene.push_back(tree_distance_matrix(g));
  return median_matrix(per_gene, taxa);
}

UnrootedTree build_distance_tree(const DistanceMatrix& d) {
  d.validate();
  int n = d.size();
  if (n == 0) throw input_error("distance tree: empty matrix");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!std::isfinite(d.at(i, j)))
        throw input_error("distance tree: matrix has missing or infinite entries");

  std::vector<UnrootedTree::Node> nodes(n);
  for (int i = 0; i < n; ++i) nodes[i].taxon = d.taxa()[i];
  auto join = [&](std::vector<int> children, const std::vector<double>& len) {
    int m = static_cast<int>(nodes.size());
    nodes.emplace_back();
    for (std::size_t k = 0; k < children.size(); ++k) {
      nodes[children[k]].parent = m;
      nodes[children[k]].length = len[k];
      nodes[m].child.push_back(children[k]);
    }
    return m;
  };

  if (n == 1) return UnrootedTree(std::move(nodes), 0);
  if (n == 2) {
    double h = d.at(0, 1) / 2;
    int root = join({0, 1}, {h, h});
    return UnrootedTree(std::move(nodes), root);
  }

  // Neighbor joining over active cluster slots; scan order makes argmin
  // ties deterministic.
  std::vector<int> active(n);
  std::vector<std::vector<double>> dist(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    active[i] = i;
    for (int j = 0; j < n; ++j) dist[i][j] = d.at(i, j);
  }
  std::vector<int> slot_node(n);
  for (int i = 0; i < n; ++i) slot_node[i] = i;

  while (active.size() > 3) {
    int r = static_cast<int>(active.size());
    std::vector<double> rowsum(r, 0.0);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j)
        if (j != i) rowsum[i] += dist[active[i]][active[j]];
    int bi = 0, bj = 1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < r; ++i)
      for (int j = i + 1; j < r; ++j) {
        double q = (r - 2) * dist[active[i]][active[j]] - rowsum[i] - rowsum[j];
        if (q < best) {
          best = q;
          bi = i;
          bj = j;
        }
      }
    int si = active[bi], sj = active[bj];
    double dij = dist[si][sj];
    double li = dij / 2 + (rowsum[bi] - rowsum[bj]) / (2.0 * (r - 2));
    double lj = dij - li;
    int u = join({slot_node[si], slot_node[sj]}, {li, lj});

    // Reuse slot si for the merged cluster, retire slot sj.
    for (int k = 0; k < r; ++k) {
      int sk = active[k];
      if (sk == si || sk == sj) continue;
      double nd = (dist[si][sk] + dist[sj][sk] - dij) / 2;
      dist[si][sk] = dist[sk][si] = nd;
    }
    slot_node[si] = u;
    active.erase(active.begin() + bj);
  }

  int a = active[0], b = active[1], c = active[2];
  double la = (dist[a][b] + dist[a][c] - dist[b][c]) / 2;
  double lb = (dist[a][b] + dist[b][c] - dist[a][c]) / 2;
  double lc = (dist[a][c] + dist[b][c] - dist[a][b]) / 2;
  int root = join({slot_node[a], slot_node[b], slot_node[c]}, {la, lb, lc});
  return UnrootedTree(std::move(nodes), root);
}

UnrootedTree median_tree(const std::vector<GeneTree>& genes,
                         const std::vector<Taxon>& taxa) {
  return build_distance_tree(median_matrix(genes, taxa).matrix);
}

}  // namespace lgt
