#include "lgt/distance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lgt {

DistanceMatrix::DistanceMatrix(std::vector<Taxon> taxa, double init)
    : taxa_(std::move(taxa)) {
  std::sort(taxa_.begin(), taxa_.end());
  for (std::size_t i = 1; i < taxa_.size(); ++i)
    if (taxa_[i] == taxa_[i - 1])
      throw input_error("distance matrix: repeated taxon");
  d_.assign(taxa_.size() * taxa_.size(), init);
  for (int i = 0; i < size(); ++i) d_[i * size() + i] = 0.0;
}

int DistanceMatrix::index_of(Taxon t) const {
  auto it = std::lower_bound(taxa_.begin(), taxa_.end(), t);
  if (it == taxa_.end() || *it != t) return -1;
  return static_cast<int>(it - taxa_.begin());
}

double DistanceMatrix::at_taxa(Taxon a, Taxon b) const {
  int i = index_of(a), j = index_of(b);
  if (i < 0 || j < 0) throw input_error("distance matrix: unknown taxon");
  return at(i, j);
}

void DistanceMatrix::validate() const {
  for (int i = 0; i < size(); ++i) {
    if (at(i, i) != 0.0) throw input_error("distance matrix: nonzero diagonal");
    for (int j = i + 1; j < size(); ++j) {
      double x = at(i, j), y = at(j, i);
      if (std::isnan(x) != std::isnan(y) || (!std::isnan(x) && x != y))
        throw input_error("distance matrix: asymmetric");
      if (!std::isnan(x) && x < 0.0)
        throw input_error("distance matrix: negative entry");
    }
  }
}

bool DistanceMatrix::complete() const {
  for (int i = 0; i < size(); ++i)
    for (int j = i + 1; j < size(); ++j)
      if (!has(i, j)) return false;
  return true;
}

DistanceMatrix tree_distance_matrix(const UnrootedTree& t,
                                    bool unit_lengths) {
  UnrootedTree s = t.suppressed();
  DistanceMatrix d(s.taxa());
  const int n = s.n_leaves();
  if (n <= 1) return d;
  // One upward sweep per leaf: dist to every node via parent pointers in
  // the stored rooting, then read off other leaves. O(n * V).
  std::vector<double> dist(s.n_nodes());
  std::vector<int> order;  // preorder
  order.reserve(s.n_nodes());
  std::vector<int> stack{s.stored_root()};
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    order.push_back(v);
    for (int c : s.node(v).child) stack.push_back(c);
  }
  for (int li = 0; li < n; ++li) {
    int leaf = s.leaf_nodes()[li];
    // distance from `leaf` to all nodes: standard re-rooting walk
    // dist[v] over the unique tree path; compute by BFS over adjacency.
    std::vector<char> seen(s.n_nodes(), 0);
    std::vector<int> bfs{leaf};
    seen[leaf] = 1;
    dist[leaf] = 0.0;
    for (std::size_t h = 0; h < bfs.size(); ++h) {
      int v = bfs[h];
      auto step = [&](int u, double len) {
        if (u < 0 || seen[u]) return;
        seen[u] = 1;
        dist[u] = dist[v] + (unit_lengths ? 1.0 : len);
        bfs.push_back(u);
      };
      step(s.node(v).parent, s.node(v).length);
      for (int c : s.node(v).child) step(c, s.node(c).length);
    }
    int i = d.index_of(s.node(leaf).taxon);
    for (int lj = 0; lj < n; ++lj) {
      int other = s.leaf_nodes()[lj];
      d.set(i, d.index_of(s.node(other).taxon), dist[other]);
    }
  }
  return d;
}

int four_point_split(const DistanceMatrix& d, const std::array<Taxon, 4>& x) {
  double s[3] = {
      d.at_taxa(x[0], x[1]) + d.at_taxa(x[2], x[3]),
      d.at_taxa(x[0], x[2]) + d.at_taxa(x[1], x[3]),
      d.at_taxa(x[0], x[3]) + d.at_taxa(x[1], x[2]),
  };
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (s[i] < s[best]) best = i;
  for (int i = 0; i < 3; ++i)
    if (i != best && !(s[best] < s[i])) return -1;
  return best;
}

std::string distance_matrix_csv(const DistanceMatrix& d,
                                const std::vector<std::string>& names) {
  std::ostringstream out;
  out.precision(17);
  for (int j = 0; j < d.size(); ++j)
    out << (j ? "," : "") << names.at(d.taxa()[j]);
  out << "\n";
  for (int i = 0; i < d.size(); ++i) {
    for (int j = 0; j < d.size(); ++j) {
      if (j) out << ",";
      if (d.has(i, j))
        out << d.at(i, j);
      else
        out << "nan";
    }
    out << "\n";
  }
  return out.str();
}

DistanceMatrix parse_distance_matrix_csv(const std::string& text,
                                         std::vector<std::string>* names_out) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw parse_error("distance csv: empty");
  std::vector<std::string> names;
  {
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) names.push_back(cell);
  }
  const int n = static_cast<int>(names.size());
  std::vector<Taxon> taxa(n);
  for (int i = 0; i < n; ++i) taxa[i] = i + 1;
  DistanceMatrix d(taxa);
  for (int i = 0; i < n; ++i) {
    if (!std::getline(in, line))
      throw parse_error("distance csv: missing row " + std::to_string(i));
    std::istringstream ls(line);
    std::string cell;
    for (int j = 0; j < n; ++j) {
      if (!std::getline(ls, cell, ','))
        throw parse_error("distance csv: short row " + std::to_string(i));
      d.set(i, j, cell == "nan" ? std::nan("") : std::stod(cell));
    }
  }
  d.validate();
  if (names_out) {
    names_out->assign(1, "");
    names_out->insert(names_out->end(), names.begin(), names.end());
  }
  return d;
}

}  // namespace lgt
