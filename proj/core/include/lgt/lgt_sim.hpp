#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lgt/species_tree.hpp"
#include "lgt/unrooted_tree.hpp"

namespace lgt {

struct LgtParams {
  double radius = std::numeric_limits<double>::infinity();  // donor radius
  double p = 1.0;  // per-leaf retention probability
  std::uint64_t seed = 0;
};

enum class EventKind { random_transfer, highway_transfer };

// One horizontal transfer: the gene copy at the recipient location is
// replaced by the donor's copy (subtree below the recipient moves to the
// donor). Locations are contemporaneous at time `t` from the root.
struct LgtEvent {
  double t = 0.0;
  Location recipient;
  Location donor;
  EventKind kind = EventKind::random_transfer;
  int highway = -1;  // index into HighwaySpec for highway transfers
};

enum class HighwayDirection { fixed01, fixed10, per_gene_uniform };

// A preferred transfer channel between two species-tree edges. A fraction
// `gamma` of genes receives one transfer at a uniform instant of the edges'
// shared time window; `fixed01` sends from edge0 to edge1.
struct Highway {
  int edge0 = -1;
  int edge1 = -1;
  double gamma = 0.0;
  HighwayDirection direction = HighwayDirection::per_gene_uniform;
};

struct HighwaySpec {
  std::vector<Highway> highways;
};

// Shared time window [lo, hi) of two edges; throws config_error if empty.
std::pair<double, double> highway_window(const SpeciesPhylogeny& t, int edge0,
                                         int edge1);

// Checks each pair's window, keeps endpoints away from the root (parent and
// grandparent not the root), demands at least three edges strictly between
// endpoints, and requires the connecting paths of distinct highways to be
// edge-disjoint. Throws config_error.
void validate_highways(const SpeciesPhylogeny& t, const HighwaySpec& spec);

// Draws `count` random placements satisfying validate_highways, all with the
// same gamma and direction policy. Throws generation_error if the tree
// cannot host them.
HighwaySpec plant_highways(const SpeciesPhylogeny& t, int count, double gamma,
                           HighwayDirection direction, std::uint64_t seed);

struct EventCounters {
  long long empty_ball_discards = 0;
};

// Poisson stream of random transfers on the whole tree: count ~
// Poisson(sum of lambda*tau), recipient edge proportional to lambda*tau with
// a uniform offset, donor uniform over the other lineages alive at that time
// whose divergence from the recipient is at most 2*radius. Events whose ball
// is empty are dropped and counted. Returns events sorted by time.
std::vector<LgtEvent> sample_events(const SpeciesPhylogeny& t, double radius,
                                    std::mt19937_64& rng,
                                    EventCounters* counters = nullptr);
std::vector<LgtEvent> sample_events(const SpeciesPhylogeny& t,
                                    const LgtParams& params,
                                    EventCounters* counters = nullptr);

// Builds the full gene tree (every leaf of the species tree, extinct
// included) by backward lineage tracing: each leaf's gene lineage ascends
// the species tree, jumps to the donor location when it crosses a recipient
// location, and coalesces with any lineage it meets. Branch lengths are
// elapsed times. Throws model_error on invalid or non-contemporaneous
// events.
GeneTree apply_events(const SpeciesPhylogeny& t,
                      const std::vector<LgtEvent>& events);

// Backward tracing stopped at `cut_depth`: the surviving gene lineages just
// above the cut, each with the species edge it occupies, the depth of its
// last coalescence, and a canonical key of its traced subtree (lengths
// included). Ordered by edge id.
struct ForestToken {
  int edge = -1;
  double born = 0.0;
  std::string subtree;
};
std::vector<ForestToken> trace_gene_forest(const SpeciesPhylogeny& t,
                                           const std::vector<LgtEvent>& events,
                                           double cut_depth);

// Keeps each listed taxon independently with probability p (coins drawn in
// ascending taxon order), restricts and suppresses. Empty when fewer than
// two leaves survive.
std::optional<GeneTree> sample_taxa(const GeneTree& full,
                                    const std::vector<Taxon>& extant, double p,
                                    std::mt19937_64& rng);

struct GeneRecord {
  std::optional<GeneTree> tree;    // absent: sampling kept < 2 leaves
  std::vector<LgtEvent> events;    // applied events, time-sorted
  long long empty_ball_discards = 0;
};

// N independent genes, each from its own RNG stream derived from
// (params.seed, gene index): random events, plus one highway event for the
// first ceil(gamma*N) genes of a per-highway seeded shuffle, applied
// together in time order, then taxon-sampled with retention p.
std::vector<GeneRecord> generate_gene_trees(const SpeciesPhylogeny& t,
                                            const LgtParams& params,
                                            int n_genes,
                                            const HighwaySpec* highways = nullptr);

// gene_id,t,recipient_edge,recipient_offset,donor_edge,donor_offset,kind
std::string events_csv(const std::vector<GeneRecord>& records);

}  // namespace lgt
