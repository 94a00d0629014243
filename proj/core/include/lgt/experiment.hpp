#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lgt/config.hpp"
#include "lgt/highway_infer.hpp"
#include "lgt/lgt_sim.hpp"
#include "lgt/species_sim.hpp"
#include "lgt/species_tree.hpp"

namespace lgt {

enum class GeneratorKind { yule, bounded_rates, newick };
enum class Method { qp, mt, mt_seq };

// Full description of one Monte Carlo experiment: species-tree generator,
// LGT regime, optional highways, gene count, reconstruction method and
// trial bookkeeping. Built from a parsed key-value Config with strict
// schema validation (unknown keys are errors).
struct ExperimentConfig {
  GeneratorKind generator = GeneratorKind::yule;
  int n = 0;             // taxa: yule.n or br.n_plus
  double nu = 1.0;       // yule split rate
  double tau_bar = 1.0;  // bounded-rates duration cap
  double rho_tau = 0.5;
  TreeShape shape = TreeShape::complete_binary;
  std::string newick_path;  // generator = newick
  std::string newick_text;  // overrides the path when nonempty

  // Exactly one of lambda_bar / lambda_target may be set; the target is the
  // expected number of LGT events per gene on the extant phylogeny and is
  // met by rescaling the drawn per-edge rates.
  std::optional<double> lambda_bar;
  std::optional<double> lambda_target;
  double rho_lambda = 1.0;  // per-edge rates drawn U[rho*cap, cap]
  double radius = std::numeric_limits<double>::infinity();
  double p = 1.0;  // per-leaf sampling probability

  int highway_count = 0;
  double highway_gamma = 0.0;
  HighwayDirection highway_direction = HighwayDirection::per_gene_uniform;
  double gamma_lo = 0.1;  // suspect-frequency floor for detection

  int genes = 1;
  Method method = Method::qp;
  int seq_k = 1000;  // sites per gene for mt-seq
  std::array<double, 4> gtr_pi{0.25, 0.25, 0.25, 0.25};
  std::array<double, 6> gtr_rates{1, 1, 1, 1, 1, 1};

  int trials = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir;

  static ExperimentConfig from(const Config& c);
  void validate() const;
};

// Outcome of one trial. `rf` is -1 when reconstruction aborted (the trial
// then counts as a failure and `note` carries the diagnostic). Wall-clock
// runtime is kept out of the deterministic CSV serialization.
struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  double lambda_tot = 0.0;  // realized total LGT weight of the species tree
  long long events = 0;     // LGT events across all genes
  bool success = false;     // reconstructed topology == extant phylogeny
  int rf = -1;
  double runtime_s = 0.0;
  int discarded_genes = 0;   // sampling left < 2 leaves
  int saturated_pairs = 0;   // log-det failures (mt-seq only)
  std::string note;
};

struct ExperimentResult {
  std::vector<TrialRecord> trials;
  int successes = 0;
  double rate = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // exact binomial, 95%
  double mean_rf = 0.0;             // over trials with a reconstruction
};

// Per trial: generate species tree -> genes -> reconstruct -> compare with
// the extant phylogeny. Reconstruction aborts count as failures. All
// randomness derives from (seed, trial, gene), so results are independent
// of the thread count.
ExperimentResult run_experiment(const ExperimentConfig& c);

std::string trials_csv(const std::vector<TrialRecord>& trials);
std::string summary_csv(const ExperimentResult& r);

// The species tree a trial works on (rates already scaled to any target);
// exposed for tests and the simulate subcommand.
SpeciesPhylogeny make_species_tree(const ExperimentConfig& c,
                                   std::uint64_t tree_seed);
std::uint64_t trial_seed(std::uint64_t base, int trial);

enum class SweepAxis { lambda, radius, p, genes, k };
SweepAxis sweep_axis_from(const std::string& name);  // Lambda|R|p|N|k
std::string sweep_axis_name(SweepAxis axis);

struct SweepPoint {
  double value = 0.0;
  ExperimentResult result;
};
struct SweepResult {
  SweepAxis axis = SweepAxis::lambda;
  std::vector<SweepPoint> points;
};

// One run_experiment per grid value, with per-point seeds derived from the
// base seed. Per-point failures propagate; records stay per point.
SweepResult sweep(const ExperimentConfig& base, SweepAxis axis,
                  const std::vector<double>& grid);

// axis,value,rate,ci_lo,ci_hi,mean_rf,trials
std::string sweep_csv(const SweepResult& r);
// Gnuplot-ready "value rate" pairs with a comment header.
std::string sweep_plot_data(const SweepResult& r);
// Machine-readable summary of the same surface.
std::string sweep_summary_json(const SweepResult& r);

// Highway detection measured against the generating species tree: plant
// `highway_count` highways, simulate genes, collect suspect four-tuples and
// locate highway candidates, then score exact edge-pair recovery.
struct HighwayTrial {
  int trial = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<int, int>> planted;  // (edge0, edge1) per highway
  std::vector<HighwayCall> calls;
  int matched = 0;      // planted pairs recovered exactly (as sets)
  int false_calls = 0;  // successful calls matching no planted pair
  bool all_recovered = false;
  std::string note;  // abort diagnostic; empty when the trial ran
};

struct HighwayExperimentResult {
  std::vector<HighwayTrial> trials;
  int trials_all_recovered = 0;
  int trials_clean = 0;  // zero false calls
  double recovery_rate = 0.0;
  double clean_rate = 0.0;
};

HighwayExperimentResult run_highway_experiment(const ExperimentConfig& c);
std::string highway_trials_csv(const HighwayExperimentResult& r);

// Coupled pair of same-leaf-set complete binary phylogenies that differ
// only in how the four depth-2 subtrees attach: in the first tree the
// children pair (a,b)(c,d), in the second (a,c)(b,d). All edges share one
// duration and one LGT rate, so a single event stream is valid on both.
struct CoupledPair {
  SpeciesPhylogeny first, second;
  std::array<int, 4> abcd{};  // depth-2 vertices: a, b sisters in `first`
};

// n must be a power of two >= 16.
CoupledPair make_coupled_pair(int n, double events_per_edge);

// Three consecutive events donated by one of the four depth-2 edges and
// received, one each, by the other three; after such a triple the coupled
// gene trees coincide.
bool good_event(const std::vector<LgtEvent>& events,
                const std::array<int, 4>& abcd);

struct CouplingParams {
  int n = 16;
  double events_per_edge = 8.0;  // expected events per edge per gene
  int genes = 10;
  int trials = 50;
  std::uint64_t seed = 0;
};

struct CouplingReport {
  int trials = 0;
  int coincident_trials = 0;  // all genes' topology multisets coincide
  long long genes_total = 0;
  long long good_genes = 0;
  bool subtree_invariant_ok = true;  // depth-2 forests always identical
  double coincidence_rate = 0.0;
  double good_rate = 0.0;
};

// Runs the same event streams on both phylogenies of a coupled pair and
// reports how often they are indistinguishable from the gene trees alone.
CouplingReport nonrecoverability_demo(const CouplingParams& p);
std::string coupling_csv(const CouplingReport& r);

// Deterministic check: injecting the donor triple a->d, a->c, a->b makes
// the two coupled gene trees identical.
bool forced_triple_coincides(int n);

}  // namespace lgt
