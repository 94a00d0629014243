#include "lgt/quartet_plurality.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <limits>
#include <sstream>

#include "lgt/errors.hpp"

namespace lgt {

namespace {

// C(m, r) for r <= 4 without overflow at the sizes the table guard allows.
std::size_t choose(std::size_t m, int r) {
  if (static_cast<int>(m) < r) return 0;
  std::size_t v = 1;
  for (int i = 0; i < r; ++i) v = v * (m - i) / (i + 1);
  return v;
}

// Colexicographic rank of positions i<j<k<l among all four-subsets.
std::size_t rank_of(int i, int j, int k, int l) {
  return choose(l, 4) + choose(k, 3) + choose(j, 2) + choose(i, 1);
}

std::array<int, 4> unrank(std::size_t rank, int n) {
  std::array<int, 4> out{};
  for (int r = 4; r >= 1; --r) {
    int m = n - 1;
    while (choose(m, r) > rank) --m;
    out[r - 1] = m;
    rank -= choose(m, r);
    n = m;
  }
  return out;
}

// Edge-count distances between the leaves of a tree, rows/cols following
// `order` (node ids). Any positive edge lengths resolve the same splits, so
// unit lengths give exact integer four-point comparisons.
std::vector<int> unit_leaf_distances(const UnrootedTree& t,
                                     const std::vector<int>& order) {
  int k = static_cast<int>(order.size());
  std::vector<int> node_row(t.n_nodes(), -1);
  for (int i = 0; i < k; ++i) node_row[order[i]] = i;
  std::vector<int> dist(static_cast<std::size_t>(k) * k, 0);
  std::vector<int> d(t.n_nodes());
  for (int i = 0; i < k; ++i) {
    std::fill(d.begin(), d.end(), -1);
    std::deque<int> queue{order[i]};
    d[order[i]] = 0;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      if (node_row[u] >= 0) dist[i * k + node_row[u]] = d[u];
      const auto& node = t.node(u);
      if (node.parent >= 0 && d[node.parent] < 0) {
        d[node.parent] = d[u] + 1;
        queue.push_back(node.parent);
      }
      for (int c : node.child)
        if (d[c] < 0) {
          d[c] = d[u] + 1;
          queue.push_back(c);
        }
    }
  }
  return dist;
}

// 0,1,2 for the unique four-point winner; -1 if tied (non-tree input).
int four_point(int dab, int dcd, int dac, int dbd, int dad, int dbc) {
  int s[3] = {dab + dcd, dac + dbd, dad + dbc};
  int best = std::min({s[0], s[1], s[2]});
  int which = -1, hits = 0;
  for (int i = 0; i < 3; ++i)
    if (s[i] == best) {
      which = i;
      ++hits;
    }
  return hits == 1 ? which : -1;
}

std::string tuple_str(const std::array<Taxon, 4>& x) {
  std::ostringstream out;
  out << '(' << x[0] << ',' << x[1] << ',' << x[2] << ',' << x[3] << ')';
  return out.str();
}

}  // namespace

QuartetFrequencyTable::QuartetFrequencyTable(std::vector<Taxon> taxa)
    : taxa_(std::move(taxa)) {
  std::sort(taxa_.begin(), taxa_.end());
  if (std::adjacent_find(taxa_.begin(), taxa_.end()) != taxa_.end())
    throw input_error("quartet table: duplicate taxon");
  if (!taxa_.empty() && taxa_.front() < 1)
    throw input_error("quartet table: taxa must be positive");
  if (taxa_.size() > 128)
    throw input_error("quartet table: too many taxa (limit 128)");
  pos_.assign(taxa_.empty() ? 1 : taxa_.back() + 1, -1);
  for (int i = 0; i < n_taxa(); ++i) pos_[taxa_[i]] = i;
  std::size_t tuples = choose(taxa_.size(), 4);
  count_.assign(tuples, {0, 0, 0});
  shown_.assign(tuples, 0);
}

std::size_t QuartetFrequencyTable::rank(const std::array<Taxon, 4>& x) const {
  int p[4];
  for (int i = 0; i < 4; ++i) {
    if (x[i] < 1 || x[i] >= static_cast<Taxon>(pos_.size()) || pos_[x[i]] < 0)
      throw input_error("quartet table: taxon " + std::to_string(x[i]) +
                        " not in working set");
    p[i] = pos_[x[i]];
  }
  if (!(p[0] < p[1] && p[1] < p[2] && p[2] < p[3]))
    throw input_error("quartet table: four-tuple must be sorted and distinct");
  return rank_of(p[0], p[1], p[2], p[3]);
}

std::array<Taxon, 4> QuartetFrequencyTable::four_tuple(std::size_t rank) const {
  std::array<int, 4> p = unrank(rank, n_taxa());
  return {taxa_[p[0]], taxa_[p[1]], taxa_[p[2]], taxa_[p[3]]};
}

std::array<double, 3> QuartetFrequencyTable::frequencies(
    std::size_t rank) const {
  std::array<double, 3> f{0.0, 0.0, 0.0};
  if (shown_[rank] > 0)
    for (int i = 0; i < 3; ++i)
      f[i] = static_cast<double>(count_[rank][i]) / shown_[rank];
  return f;
}

void QuartetFrequencyTable::add_gene(const GeneTree& gene) {
  std::vector<Taxon> gtaxa = gene.taxa();
  int k = static_cast<int>(gtaxa.size());
  std::vector<int> pos(k);
  for (int i = 0; i < k; ++i) {
    if (gtaxa[i] >= static_cast<Taxon>(pos_.size()) || pos_[gtaxa[i]] < 0)
      throw input_error("quartet table: gene leaf " + std::to_string(gtaxa[i]) +
                        " outside the working taxon set");
    pos[i] = pos_[gtaxa[i]];
  }
  if (k < 4) return;

  std::vector<int> order(k);
  for (int i = 0; i < k; ++i) order[i] = gene.node_of(gtaxa[i]);
  std::vector<int> dist = unit_leaf_distances(gene, order);
  auto d = [&](int a, int b) { return dist[a * k + b]; };

  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b)
      for (int c = b + 1; c < k; ++c)
        for (int e = c + 1; e < k; ++e) {
          int split = four_point(d(a, b), d(c, e), d(a, c), d(b, e), d(a, e),
                                 d(b, c));
          if (split < 0)
            throw model_error("gene tree displays an unresolved four-tuple");
          std::size_t r = rank_of(pos[a], pos[b], pos[c], pos[e]);
          ++shown_[r];
          ++count_[r][split];
        }
}

QuartetFrequencyTable quartet_frequencies(const std::vector<GeneTree>& genes,
                                          const std::vector<Taxon>& taxa) {
  QuartetFrequencyTable table(taxa);
  for (const GeneTree& g : genes) table.add_gene(g);
  return table;
}

QuartetCover plurality_cover(const QuartetFrequencyTable& table,
                             bool allow_partial) {
  QuartetCover cover;
  cover.taxa = table.taxa();
  cover.entries.resize(table.n_four_tuples());
  for (std::size_t r = 0; r < table.n_four_tuples(); ++r) {
    CoverEntry& e = cover.entries[r];
    e.taxa = table.four_tuple(r);
    if (table.displayed(r) == 0) {
      if (!allow_partial)
        throw input_error("four-tuple " + tuple_str(e.taxa) +
                          " displayed by no gene");
      e.covered = false;
      continue;
    }
    const std::array<int, 3>& c = table.counts(r);
    int best = std::max({c[0], c[1], c[2]});
    e.split = c[0] == best ? 0 : c[1] == best ? 1 : 2;
    e.tie = (c[0] == best) + (c[1] == best) + (c[2] == best) > 1;
  }
  return cover;
}

namespace {

// Rank lookup over the cover's taxa, mirroring the table's indexing.
class CoverIndex {
 public:
  explicit CoverIndex(const QuartetCover& cover) : cover_(cover) {
    const auto& taxa = cover.taxa;
    int n = static_cast<int>(taxa.size());
    if (!std::is_sorted(taxa.begin(), taxa.end()) ||
        std::adjacent_find(taxa.begin(), taxa.end()) != taxa.end())
      throw input_error("cover taxa must be sorted and distinct");
    if (cover.entries.size() != choose(taxa.size(), 4))
      throw input_error("cover does not hold one entry per four-tuple");
  }
  // Positions must be sorted ascending.
  const CoverEntry& at(int i, int j, int k, int l) const {
    return cover_.entries[rank_of(i, j, k, l)];
  }

 private:
  const QuartetCover& cover_;
};

}  // namespace

UnrootedTree tree_from_cover(const QuartetCover& cover) {
  const std::vector<Taxon>& taxa = cover.taxa;
  int n = static_cast<int>(taxa.size());
  CoverIndex index(cover);

  std::vector<UnrootedTree::Node> nodes(n);
  for (int i = 0; i < n; ++i) nodes[i].taxon = taxa[i];
  auto join = [&](std::vector<int> children) {
    int m = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[m].child = std::move(children);
    for (int c : nodes[m].child) nodes[c].parent = m;
    return m;
  };

  struct Item {
    int pos;   // position in taxa (the cluster's representative)
    int node;  // forest node
  };
  std::vector<Item> active(n);
  for (int i = 0; i < n; ++i) active[i] = {i, i};

  // Cherry contraction; if no clean cherry exists the least-contradicted
  // pair is contracted anyway and the final verification reports a witness.
  while (active.size() > 3) {
    std::size_t m = active.size();
    int best_i = 0, best_j = 1;
    long long best_viol = std::numeric_limits<long long>::max();
    for (std::size_t i = 0; i < m && best_viol > 0; ++i)
      for (std::size_t j = i + 1; j < m && best_viol > 0; ++j) {
        Taxon ta = taxa[active[i].pos], tb = taxa[active[j].pos];
        long long viol = 0;
        for (std::size_t c = 0; c < m && viol < best_viol; ++c) {
          if (c == i || c == j) continue;
          for (std::size_t d = c + 1; d < m && viol < best_viol; ++d) {
            if (d == i || d == j) continue;
            int q[4] = {active[i].pos, active[j].pos, active[c].pos,
                        active[d].pos};
            std::sort(q, q + 4);
            const CoverEntry& e = index.at(q[0], q[1], q[2], q[3]);
            if (!e.covered) continue;
            if (e.split != split_index(e.taxa, ta, tb)) ++viol;
          }
        }
        if (viol < best_viol) {
          best_viol = viol;
          best_i = static_cast<int>(i);
          best_j = static_cast<int>(j);
        }
      }
    active[best_i].node = join({active[best_i].node, active[best_j].node});
    active.erase(active.begin() + best_j);
  }

  int root;
  if (active.size() == 1) {
    root = active[0].node;
  } else {
    std::vector<int> children;
    for (const Item& it : active) children.push_back(it.node);
    root = join(std::move(children));
  }
  UnrootedTree tree(std::move(nodes), root);

  if (n >= 4) {
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = tree.node_of(taxa[i]);
    std::vector<int> dist = unit_leaf_distances(tree, order);
    auto d = [&](int a, int b) { return dist[a * n + b]; };
    for (std::size_t r = 0; r < cover.entries.size(); ++r) {
      const CoverEntry& e = cover.entries[r];
      if (!e.covered) continue;
      std::array<int, 4> p = unrank(r, n);
      int split = four_point(d(p[0], p[1]), d(p[2], p[3]), d(p[0], p[2]),
                             d(p[1], p[3]), d(p[0], p[3]), d(p[1], p[2]));
      if (split != e.split)
        throw incompatible_cover_error(
            "quartet cover admits no tree; four-tuple " + tuple_str(e.taxa) +
                " contradicts the best candidate",
            e.taxa[0], e.taxa[1], e.taxa[2], e.taxa[3]);
    }
  }
  return tree;
}

UnrootedTree quartet_plurality(const std::vector<GeneTree>& genes,
                               const std::vector<Taxon>& taxa) {
  QuartetFrequencyTable table = quartet_frequencies(genes, taxa);
  return tree_from_cover(plurality_cover(table));
}

std::string cover_csv(const QuartetFrequencyTable& table,
                      const QuartetCover& cover) {
  if (cover.entries.size() != table.n_four_tuples() ||
      cover.taxa != table.taxa())
    throw input_error("cover and table cover different taxon sets");
  std::ostringstream out;
  out << "a,b,c,d,m,f1,f2,f3,chosen\n";
  char buf[40];
  for (std::size_t r = 0; r < table.n_four_tuples(); ++r) {
    const CoverEntry& e = cover.entries[r];
    out << e.taxa[0] << ',' << e.taxa[1] << ',' << e.taxa[2] << ','
        << e.taxa[3] << ',' << table.displayed(r);
    std::array<double, 3> f = table.frequencies(r);
    for (double x : f) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out << ',' << buf;
    }
    out << ',';
    if (e.covered) out << e.split + 1;
    out << '\n';
  }
  return out.str();
}

}  // namespace lgt
