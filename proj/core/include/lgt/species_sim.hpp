#pragma once

#include <cstdint>
#include <vector>

#include "lgt/species_tree.hpp"

namespace lgt {

// Pure-birth species tree: starting from two lineages, each of k live
// lineages splits after an Exp(k*nu) wait. The run is stopped at the split
// that would create lineage n+2; the lineage born at the final split is
// dropped and the remaining n pendant edges are truncated at the stop time,
// so with n=2 the expected height is 1/(2 nu) + 1/(3 nu) and the expected
// total branch weight is n/nu - 1/((n+1) nu).
struct YuleParams {
  int n = 2;
  double nu = 1.0;
  double lambda_bar = 1.0;   // per-edge LGT rate drawn U[rho*bar, bar]
  double rho_lambda = 1.0;
  std::uint64_t seed = 0;
};

enum class TreeShape { complete_binary, random_ultrametric };

struct BoundedRatesParams {
  int n_plus = 4;
  double tau_bar = 1.0;
  double rho_tau = 0.5;      // tau_min = rho_tau * tau_bar
  double lambda_bar = 1.0;
  double rho_lambda = 0.5;   // lambda_min = rho_lambda * lambda_bar
  TreeShape shape = TreeShape::complete_binary;
  std::uint64_t seed = 0;
};

SpeciesPhylogeny generate_yule(const YuleParams& p);

// complete_binary: perfect tree of depth ceil(log2 n_plus) pruned to the
// first n_plus leaves, every original edge tau_bar long with rate
// lambda_bar (pruning can merge edges, so non-power-of-two sizes may carry
// edges longer than tau_bar). random_ultrametric: random join topology,
// internal durations U[rho_tau*tau_bar, tau_bar], pendant durations set to
// the smallest feasible common horizon; infeasible draws are retried.
SpeciesPhylogeny generate_bounded_rates(const BoundedRatesParams& p);

// LGT weight of one edge: lambda(e) * tau(e).
double edge_weight(const SpeciesPhylogeny& t, int edge);

// Sum of edge weights over the restriction of the tree to a taxon subset
// (original edges on paths connecting the subset).
double subset_weight(const SpeciesPhylogeny& t, const std::vector<Taxon>& x);

struct LgtWeights {
  double total = 0;        // all edges
  double extant = 0;       // edges of the extant restriction
  double max_quartet = 0;  // max subset weight over extant four-tuples
  double max_pair = 0;     // max path weight over extant pairs
  bool quartet_exact = true;  // false: max_quartet is the 2*max_pair bound
};

// Exhaustive four-tuple maximum up to 64 extant leaves; larger trees report
// the always-valid bound max_quartet <= 2 * max_pair with quartet_exact
// cleared.
LgtWeights lgt_weights(const SpeciesPhylogeny& t);

}  // namespace lgt
