#include "lgt/lgt_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <set>
#include <sstream>
#include <vector>

#include "lgt/errors.hpp"
#include "lgt/rng.hpp"

namespace lgt {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Backward lineage tracing.
//
// Gene lineages start at the leaves and ascend the species tree in lockstep,
// so depth doubles as the clock. Three kinds of happenings are replayed in
// decreasing depth: a leaf arrival creates a lineage token on the leaf's
// edge, a transfer teleports the token crossing its recipient location to
// the donor location, and a vertex top moves child-edge tokens onto the
// vertex's own edge. Whenever a token lands on an occupied edge the two
// lineages are at the same place and instant, so they coalesce into a new
// gene-tree node. At most one token per edge survives at any instant.
// ---------------------------------------------------------------------------

struct GeneNode {
  int parent = -1;
  std::vector<int> child;
  double depth = 0.0;
  Taxon taxon = 0;
};

class Tracer {
 public:
  Tracer(const SpeciesPhylogeny& t, const std::vector<LgtEvent>& events)
      : t_(t), events_(events), token_on_(t.n_vertices(), -1) {
    double scale = std::max(1.0, t.height());
    for (const LgtEvent& ev : events_) {
      try {
        t_.validate_location(ev.recipient);
        t_.validate_location(ev.donor);
      } catch (const input_error& e) {
        throw model_error(std::string("transfer with invalid location: ") +
                          e.what());
      }
      if (std::abs(t_.depth_at(ev.recipient) - ev.t) > 1e-9 * scale ||
          std::abs(t_.depth_at(ev.donor) - ev.t) > 1e-9 * scale)
        throw model_error(
            "transfer endpoints are not contemporaneous with its time");
    }

    enum { kArrive = 0, kTransfer = 1, kVertexTop = 2 };
    std::vector<Happening> plan;
    for (int leaf : t_.leaves()) plan.push_back({t_.depth(leaf), kArrive, leaf});
    for (int i = 0; i < static_cast<int>(events_.size()); ++i)
      plan.push_back({events_[i].t, kTransfer, i});
    for (int v = 0; v < t_.n_vertices(); ++v)
      if (!t_.is_leaf(v)) plan.push_back({t_.depth(v), kVertexTop, v});
    std::sort(plan.begin(), plan.end(), [](const Happening& a, const Happening& b) {
      if (a.depth != b.depth) return a.depth > b.depth;
      if (a.kind != b.kind) return a.kind < b.kind;
      return a.id < b.id;
    });
    plan_ = std::move(plan);
  }

  // Replays happenings strictly deeper than `cut_depth`.
  void run(double cut_depth) {
    for (const auto& h : plan_) {
      if (!(h.depth > cut_depth)) break;
      switch (h.kind) {
        case 0: {  // leaf arrival
          int node = new_leaf(t_.depth(h.id), t_.taxon(h.id));
          place(h.id, node, t_.depth(h.id));
          break;
        }
        case 1: {  // transfer
          const LgtEvent& ev = events_[h.id];
          int tok = token_on_[ev.recipient.edge];
          if (tok < 0) break;  // no surviving lineage crosses the recipient
          token_on_[ev.recipient.edge] = -1;
          place(ev.donor.edge, tok, ev.t);
          break;
        }
        default: {  // vertex top
          int v = h.id;
          int merged = -1;
          for (int c : t_.children(v))
            if (c >= 0 && token_on_[c] >= 0) {
              int tok = token_on_[c];
              token_on_[c] = -1;
              merged = merged < 0 ? tok : coalesce(merged, tok, t_.depth(v));
            }
          if (merged < 0) break;
          if (t_.is_root(v))
            final_ = final_ < 0 ? merged : coalesce(final_, merged, t_.depth(v));
          else
            place(v, merged, t_.depth(v));
          break;
        }
      }
    }
  }

  const std::vector<GeneNode>& nodes() const { return nodes_; }
  int token_at(int edge) const { return token_on_[edge]; }
  int final_node() const { return final_; }

 private:
  int new_leaf(double depth, Taxon taxon) {
    nodes_.push_back({-1, {}, depth, taxon});
    return static_cast<int>(nodes_.size()) - 1;
  }
  int coalesce(int a, int b, double depth) {
    int m = static_cast<int>(nodes_.size());
    nodes_.push_back({-1, {a, b}, depth, 0});
    nodes_[a].parent = m;
    nodes_[b].parent = m;
    return m;
  }
  void place(int edge, int token, double depth) {
    int occ = token_on_[edge];
    token_on_[edge] = occ < 0 ? token : coalesce(occ, token, depth);
  }

  const SpeciesPhylogeny& t_;
  std::vector<LgtEvent> events_;
  std::vector<int> token_on_;  // edge (child vertex) -> gene node, -1 free
  std::vector<GeneNode> nodes_;
  int final_ = -1;
  struct Happening {
    double depth;
    int kind;
    int id;
  };
  std::vector<Happening> plan_;
};

std::string subtree_key(const std::vector<GeneNode>& nodes, int i) {
  const GeneNode& n = nodes[i];
  if (n.child.empty()) return "t" + std::to_string(n.taxon);
  std::vector<std::string> parts;
  for (int c : n.child)
    parts.push_back(subtree_key(nodes, c) + ":" +
                    fmt17(nodes[c].depth - n.depth));
  std::sort(parts.begin(), parts.end());
  std::string out = "(";
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (k) out += ",";
    out += parts[k];
  }
  return out + ")";
}

}  // namespace

GeneTree apply_events(const SpeciesPhylogeny& t,
                      const std::vector<LgtEvent>& events) {
  Tracer tracer(t, events);
  tracer.run(-std::numeric_limits<double>::infinity());
  int root = tracer.final_node();
  if (root < 0) throw model_error("lineage tracing left no root lineage");

  const std::vector<GeneNode>& g = tracer.nodes();
  std::vector<UnrootedTree::Node> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    out[i].parent = g[i].parent;
    out[i].child = g[i].child;
    out[i].taxon = g[i].taxon;
    if (g[i].parent >= 0) out[i].length = g[i].depth - g[g[i].parent].depth;
  }
  return GeneTree(std::move(out), root);
}

std::vector<ForestToken> trace_gene_forest(const SpeciesPhylogeny& t,
                                           const std::vector<LgtEvent>& events,
                                           double cut_depth) {
  Tracer tracer(t, events);
  tracer.run(cut_depth);
  std::vector<ForestToken> out;
  for (int e = 0; e < t.n_vertices(); ++e) {
    int tok = tracer.token_at(e);
    if (tok < 0) continue;
    out.push_back(
        {e, tracer.nodes()[tok].depth, subtree_key(tracer.nodes(), tok)});
  }
  return out;
}

std::vector<LgtEvent> sample_events(const SpeciesPhylogeny& t, double radius,
                                    std::mt19937_64& rng,
                                    EventCounters* counters) {
  if (!(radius > 0.0)) throw config_error("donor radius must be positive");

  std::vector<int> edges = t.edges();
  std::vector<double> weight(edges.size());
  double total = 0.0;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    weight[i] = t.lambda(edges[i]) * t.tau(edges[i]);
    total += weight[i];
  }
  if (!(total > 0.0)) return {};

  std::poisson_distribution<long long> n_events(total);
  std::discrete_distribution<std::size_t> pick_edge(weight.begin(),
                                                    weight.end());
  long long n = n_events(rng);
  std::vector<LgtEvent> out;
  std::vector<int> ball;
  for (long long k = 0; k < n; ++k) {
    int e = edges[pick_edge(rng)];
    double offset =
        std::uniform_real_distribution<double>(0.0, t.tau(e))(rng);
    double time = t.depth(t.parent(e)) + offset;

    ball.clear();
    for (int v : edges) {
      if (v == e) continue;  // a lineage cannot donate to itself
      if (!(t.depth(t.parent(v)) <= time && time <= t.depth(v))) continue;
      if (std::isfinite(radius) && time - t.depth(t.mrca(e, v)) > radius)
        continue;
      ball.push_back(v);
    }
    if (ball.empty()) {
      if (counters) ++counters->empty_ball_discards;
      continue;
    }
    int d = ball[std::uniform_int_distribution<std::size_t>(
        0, ball.size() - 1)(rng)];
    out.push_back({time,
                   {e, offset},
                   {d, time - t.depth(t.parent(d))},
                   EventKind::random_transfer,
                   -1});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const LgtEvent& a, const LgtEvent& b) { return a.t < b.t; });
  return out;
}

std::vector<LgtEvent> sample_events(const SpeciesPhylogeny& t,
                                    const LgtParams& params,
                                    EventCounters* counters) {
  std::mt19937_64 rng = derive_rng(params.seed, stream::events);
  return sample_events(t, params.radius, rng, counters);
}

std::pair<double, double> highway_window(const SpeciesPhylogeny& t, int edge0,
                                         int edge1) {
  for (int e : {edge0, edge1})
    if (e < 0 || e >= t.n_vertices() || t.is_root(e))
      throw config_error("highway endpoint is not an edge (child-vertex) id");
  if (edge0 == edge1)
    throw config_error("highway endpoints must be distinct edges");
  double lo = std::max(t.depth(t.parent(edge0)), t.depth(t.parent(edge1)));
  double hi = std::min(t.depth(edge0), t.depth(edge1));
  if (!(lo < hi))
    throw config_error(
        "highway endpoints share no contemporaneous time window");
  return {lo, hi};
}

void validate_highways(const SpeciesPhylogeny& t, const HighwaySpec& spec) {
  std::vector<std::set<int>> cycles;
  for (const Highway& h : spec.highways) {
    highway_window(t, h.edge0, h.edge1);
    if (!(h.gamma > 0.0 && h.gamma <= 1.0))
      throw config_error("highway gamma must lie in (0, 1]");
    for (int e : {h.edge0, h.edge1}) {
      int p = t.parent(e);
      if (t.is_root(p) || t.is_root(t.parent(p)))
        throw config_error(
            "highway endpoint too close to the root (parent or grandparent "
            "is the root)");
    }
    std::vector<int> path = t.path_edges(h.edge0, h.edge1);
    int between = 0;
    for (int e : path) between += e != h.edge0 && e != h.edge1;
    // Two interior path vertices are needed for the flanking-pair test to
    // single out the endpoints; that takes three edges strictly between.
    if (between < 3)
      throw config_error(
          "highway endpoints must be separated by at least three edges");
    cycles.emplace_back(path.begin(), path.end());
  }
  for (std::size_t i = 0; i < cycles.size(); ++i)
    for (std::size_t j = i + 1; j < cycles.size(); ++j)
      for (int e : cycles[i])
        if (cycles[j].count(e))
          throw config_error(
              "highway cycles overlap; they must be edge-disjoint");
}

HighwaySpec plant_highways(const SpeciesPhylogeny& t, int count, double gamma,
                           HighwayDirection direction, std::uint64_t seed) {
  if (count < 0) throw config_error("highway count must be non-negative");
  std::mt19937_64 rng = derive_rng(seed, stream::highway);
  std::vector<int> edges = t.edges();
  HighwaySpec spec;
  std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
  for (int b = 0; b < count; ++b) {
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      int e0 = edges[pick(rng)];
      int e1 = edges[pick(rng)];
      if (e0 == e1) continue;
      HighwaySpec candidate = spec;
      candidate.highways.push_back({e0, e1, gamma, direction});
      try {
        validate_highways(t, candidate);
      } catch (const config_error&) {
        continue;
      }
      spec = std::move(candidate);
      placed = true;
    }
    if (!placed)
      throw generation_error(
          "could not place the requested number of highways on this tree");
  }
  return spec;
}

std::optional<GeneTree> sample_taxa(const GeneTree& full,
                                    const std::vector<Taxon>& extant, double p,
                                    std::mt19937_64& rng) {
  if (!(p > 0.0 && p <= 1.0))
    throw config_error("retention probability must lie in (0, 1]");
  std::vector<Taxon> sorted = extant;
  std::sort(sorted.begin(), sorted.end());
  std::bernoulli_distribution keep(p);
  std::vector<Taxon> kept;
  for (Taxon x : sorted)
    if (keep(rng)) kept.push_back(x);
  if (kept.size() < 2) return std::nullopt;
  return full.restricted(kept, /*suppress=*/true);
}

std::vector<GeneRecord> generate_gene_trees(const SpeciesPhylogeny& t,
                                            const LgtParams& params,
                                            int n_genes,
                                            const HighwaySpec* highways) {
  if (n_genes < 0) throw config_error("gene count must be non-negative");
  if (!(params.p > 0.0 && params.p <= 1.0))
    throw config_error("retention probability must lie in (0, 1]");
  if (!(params.radius > 0.0))
    throw config_error("donor radius must be positive");

  // Per-highway deterministic gene subsets: the first ceil(gamma*N) genes of
  // a seeded shuffle.
  std::vector<std::vector<char>> carries;
  std::vector<std::pair<double, double>> windows;
  if (highways) {
    validate_highways(t, *highways);
    for (std::size_t b = 0; b < highways->highways.size(); ++b) {
      const Highway& h = highways->highways[b];
      windows.push_back(highway_window(t, h.edge0, h.edge1));
      std::vector<int> order(n_genes);
      for (int g = 0; g < n_genes; ++g) order[g] = g;
      std::mt19937_64 rng = derive_rng(params.seed, stream::highway, b);
      std::shuffle(order.begin(), order.end(), rng);
      int take = static_cast<int>(std::ceil(h.gamma * n_genes - 1e-9));
      take = std::min(take, n_genes);
      std::vector<char> mark(n_genes, 0);
      for (int k = 0; k < take; ++k) mark[order[k]] = 1;
      carries.push_back(std::move(mark));
    }
  }

  std::vector<Taxon> extant = t.extant_taxa();
  std::vector<GeneRecord> out(n_genes);
  for (int g = 0; g < n_genes; ++g) {
    GeneRecord& rec = out[g];
    EventCounters counters;
    std::mt19937_64 ev_rng = derive_rng(params.seed, stream::events, g);
    rec.events = sample_events(t, params.radius, ev_rng, &counters);
    rec.empty_ball_discards = counters.empty_ball_discards;

    if (highways) {
      for (std::size_t b = 0; b < highways->highways.size(); ++b) {
        if (!carries[b][g]) continue;
        const Highway& h = highways->highways[b];
        std::mt19937_64 rng = derive_rng(params.seed, stream::highway, b, g + 1);
        double time = std::uniform_real_distribution<double>(
            windows[b].first, windows[b].second)(rng);
        bool from0 = h.direction == HighwayDirection::fixed01 ||
                     (h.direction == HighwayDirection::per_gene_uniform &&
                      std::bernoulli_distribution(0.5)(rng));
        int donor = from0 ? h.edge0 : h.edge1;
        int recipient = from0 ? h.edge1 : h.edge0;
        rec.events.push_back({time,
                              {recipient, time - t.depth(t.parent(recipient))},
                              {donor, time - t.depth(t.parent(donor))},
                              EventKind::highway_transfer,
                              static_cast<int>(b)});
      }
      std::stable_sort(
          rec.events.begin(), rec.events.end(),
          [](const LgtEvent& a, const LgtEvent& b) { return a.t < b.t; });
    }

    GeneTree full = apply_events(t, rec.events);
    std::mt19937_64 s_rng = derive_rng(params.seed, stream::sampling, g);
    rec.tree = sample_taxa(full, extant, params.p, s_rng);
  }
  return out;
}

std::string events_csv(const std::vector<GeneRecord>& records) {
  std::ostringstream out;
  out << "gene_id,t,recipient_edge,recipient_offset,donor_edge,donor_offset,"
         "kind\n";
  for (std::size_t g = 0; g < records.size(); ++g)
    for (const LgtEvent& ev : records[g].events) {
      out << g << ',' << fmt17(ev.t) << ',' << ev.recipient.edge << ','
          << fmt17(ev.recipient.offset) << ',' << ev.donor.edge << ','
          << fmt17(ev.donor.offset) << ',';
      if (ev.kind == EventKind::random_transfer)
        out << "random";
      else
        out << "highway:" << ev.highway;
      out << '\n';
    }
  return out.str();
}

}  // namespace lgt
