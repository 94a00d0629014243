#pragma once

#include <string>
#include <vector>

#include "lgt/species_tree.hpp"
#include "lgt/unrooted_tree.hpp"

namespace lgt {

// Newick serialization. Branch lengths are mandatory on every edge; the
// root carries none. Extinct leaves are flagged by the reserved label
// suffix "!x", stripped on parse. Taxon labels are assigned dense ids in
// order of first appearance unless an explicit name table is supplied.

struct ParsedNewick {
  SpeciesPhylogeny tree;
  // names[taxon] gives the external label (without the extinct suffix).
};

// Parse a rooted species phylogeny. Every edge needs ":length" with a
// positive value; labels must be unique and non-empty at leaves. A uniform
// LGT rate `lambda` is applied to every edge (per-edge rates come from a
// sidecar table, see parse_lambda_csv).
SpeciesPhylogeny parse_newick(const std::string& text, double lambda = 1.0);

std::string emit_newick(const SpeciesPhylogeny& t);

// Gene trees / plain topologies, using an external name table indexed by
// taxon id. Lengths mandatory on parse; `with_lengths=false` emits shape
// only (trailing lengths omitted).
UnrootedTree parse_newick_unrooted(const std::string& text,
                                   const std::vector<std::string>& names);
std::string emit_newick(const UnrootedTree& t,
                        const std::vector<std::string>& names,
                        bool with_lengths = true);

// One tree per line; blank lines skipped.
std::vector<UnrootedTree> parse_newick_list(const std::string& text,
                                            const std::vector<std::string>& names);

// Per-edge LGT rates, keyed by edge child vertex id:
// "edge_child_vertex,lambda" with a header line.
std::string lambda_csv(const SpeciesPhylogeny& t);
SpeciesPhylogeny apply_lambda_csv(const SpeciesPhylogeny& t,
                                  const std::string& csv);

}  // namespace lgt
