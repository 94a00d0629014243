// Species-tree generators: pure-birth (Yule) statistics, bounded-rates
// shapes and bands, and LGT weight summaries against independent recomputes.
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "lgt/distance.hpp"
#include "lgt/newick.hpp"
#include "lgt/species_sim.hpp"
#include "lgt/species_tree.hpp"
#include "lgt/stats.hpp"
#include "lgt/unrooted_tree.hpp"

#include "oracles.hpp"

namespace {

lgt::YuleParams yp(int n, double nu, std::uint64_t seed) {
  lgt::YuleParams p;
  p.n = n;
  p.nu = nu;
  p.lambda_bar = 1.0;
  p.rho_lambda = 1.0;
  p.seed = seed;
  return p;
}

struct MeanBand {
  double mean = 0.0;
  double half_width = 0.0;  // three standard errors
};

MeanBand mean_band(const std::vector<double>& xs) {
  double m = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  double sd = std::sqrt(ss / (xs.size() - 1));
  return {m, 3.0 * sd / std::sqrt(double(xs.size()))};
}

double total_weight_tau(const lgt::SpeciesPhylogeny& t) {
  double s = 0.0;
  for (int e : t.edges()) s += t.tau(e);
  return s;
}

// Weighted leaf-pair distances in the lambda*tau metric, via the
// all-pairs oracle on a rate-scaled copy.
lgt::DistanceMatrix weight_metric(const lgt::SpeciesPhylogeny& t) {
  std::vector<lgt::UnrootedTree::Node> nodes(t.n_vertices());
  for (int v = 0; v < t.n_vertices(); ++v) {
    nodes[v].parent = t.parent(v);
    for (int c : t.children(v))
      if (c >= 0) nodes[v].child.push_back(c);
    if (!t.is_root(v)) nodes[v].length = t.lambda(v) * t.tau(v);
    if (t.is_leaf(v)) nodes[v].taxon = t.taxon(v);
  }
  return oracle::fw_distance_matrix(lgt::UnrootedTree(nodes, t.root()));
}

// Weight of the subtree spanning four leaves, from pair weights alone:
// half the sum of the smallest and largest of the three pairing sums.
double quartet_weight_oracle(const lgt::DistanceMatrix& w,
                             const std::array<lgt::Taxon, 4>& x) {
  double s0 = w.at_taxa(x[0], x[1]) + w.at_taxa(x[2], x[3]);
  double s1 = w.at_taxa(x[0], x[2]) + w.at_taxa(x[1], x[3]);
  double s2 = w.at_taxa(x[0], x[3]) + w.at_taxa(x[1], x[2]);
  return 0.5 * (std::min({s0, s1, s2}) + std::max({s0, s1, s2}));
}

}  // namespace

TEST_CASE("yule: two-leaf height and total weight match the process means") {
  const int reps = 100000;
  std::vector<double> height(reps), weight(reps);
  for (int i = 0; i < reps; ++i) {
    lgt::SpeciesPhylogeny t = lgt::generate_yule(yp(2, 1.0, 10000 + i));
    REQUIRE(t.n_leaves() == 2);
    height[i] = t.height();
    weight[i] = total_weight_tau(t);
  }
  MeanBand h = mean_band(height);
  CHECK(std::abs(h.mean - (0.5 + 1.0 / 3.0)) < h.half_width);
  MeanBand w = mean_band(weight);
  CHECK(std::abs(w.mean - 5.0 / 3.0) < w.half_width);
}

TEST_CASE("yule: expected total branch weight at eight leaves") {
  const int reps = 100000;
  std::vector<double> weight(reps);
  for (int i = 0; i < reps; ++i) {
    lgt::SpeciesPhylogeny t = lgt::generate_yule(yp(8, 1.0, 500000 + i));
    weight[i] = total_weight_tau(t);
  }
  MeanBand w = mean_band(weight);
  CHECK(std::abs(w.mean - (8.0 - 1.0 / 9.0)) < w.half_width);
}

TEST_CASE("yule: rate scaling shrinks the tree proportionally in mean") {
  const int reps = 20000;
  std::vector<double> height(reps);
  for (int i = 0; i < reps; ++i)
    height[i] = lgt::generate_yule(yp(2, 4.0, 700000 + i)).height();
  MeanBand h = mean_band(height);
  CHECK(std::abs(h.mean - (0.5 + 1.0 / 3.0) / 4.0) < h.half_width);
}

TEST_CASE("yule: structural invariants on every draw") {
  for (int n : {2, 3, 5, 8, 16, 33}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      lgt::SpeciesPhylogeny t = lgt::generate_yule(yp(n, 1.0, seed));
      CHECK(t.n_leaves() == n);
      CHECK(t.n_extant() == n);
      CHECK(t.n_extinct() == 0);
      CHECK(t.is_ultrametric());
      t.require_binary();
      CHECK(t.name(1) == "t1");
      CHECK(t.name(n) == "t" + std::to_string(n));
      std::vector<lgt::Taxon> want(n);
      std::iota(want.begin(), want.end(), 1);
      std::vector<lgt::Taxon> got = t.leaf_taxa();
      std::sort(got.begin(), got.end());
      CHECK(got == want);
    }
  }
}

TEST_CASE("yule: per-edge rates respect the band; zero rate is allowed") {
  lgt::YuleParams p = yp(12, 1.0, 88);
  p.lambda_bar = 2.0;
  p.rho_lambda = 0.5;
  lgt::SpeciesPhylogeny t = lgt::generate_yule(p);
  std::set<double> seen;
  for (int e : t.edges()) {
    CHECK(t.lambda(e) >= 1.0);
    CHECK(t.lambda(e) <= 2.0);
    seen.insert(t.lambda(e));
  }
  CHECK(seen.size() > 1);  // genuinely random within the band

  p.lambda_bar = 0.0;
  p.rho_lambda = 1.0;
  lgt::SpeciesPhylogeny z = lgt::generate_yule(p);
  for (int e : z.edges()) CHECK(z.lambda(e) == 0.0);
}

TEST_CASE("yule: identical seeds reproduce; different seeds differ") {
  std::string a = lgt::emit_newick(lgt::generate_yule(yp(9, 1.0, 5)));
  std::string b = lgt::emit_newick(lgt::generate_yule(yp(9, 1.0, 5)));
  std::string c = lgt::emit_newick(lgt::generate_yule(yp(9, 1.0, 6)));
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("yule: parameter validation") {
  CHECK_THROWS_AS(lgt::generate_yule(yp(1, 1.0, 0)), lgt::config_error);
  CHECK_THROWS_AS(lgt::generate_yule(yp(4, 0.0, 0)), lgt::config_error);
  CHECK_THROWS_AS(lgt::generate_yule(yp(4, -2.0, 0)), lgt::config_error);
  lgt::YuleParams p = yp(4, 1.0, 0);
  p.rho_lambda = 0.0;
  CHECK_THROWS_AS(lgt::generate_yule(p), lgt::config_error);
  p = yp(4, 1.0, 0);
  p.lambda_bar = -1.0;
  CHECK_THROWS_AS(lgt::generate_yule(p), lgt::config_error);
}

TEST_CASE("yule: inter-speciation gaps are exponential (KS)") {
  // With four leaves the two positive internal depths are the first two
  // speciation instants: gap one at rate 2*nu, gap two at rate 3*nu.
  const int reps = 10000;
  const double nu = 1.0;
  std::vector<double> u2(reps), u3(reps);
  for (int i = 0; i < reps; ++i) {
    lgt::SpeciesPhylogeny t = lgt::generate_yule(yp(4, nu, 900000 + i));
    std::vector<double> internal;
    for (int v = 0; v < t.n_vertices(); ++v)
      if (!t.is_leaf(v) && !t.is_root(v)) internal.push_back(t.depth(v));
    REQUIRE(internal.size() == 2);
    std::sort(internal.begin(), internal.end());
    double z2 = internal[0], z3 = internal[1] - internal[0];
    u2[i] = 1.0 - std::exp(-2.0 * nu * z2);
    u3[i] = 1.0 - std::exp(-3.0 * nu * z3);
  }
  double p2 = lgt::ks_pvalue(lgt::ks_uniform_stat(u2), reps);
  double p3 = lgt::ks_pvalue(lgt::ks_uniform_stat(u3), reps);
  CHECK(p2 > 0.01);
  CHECK(p3 > 0.01);
}

TEST_CASE("bounded rates: four-leaf complete binary is the balanced tree") {
  lgt::BoundedRatesParams p;
  p.n_plus = 4;
  p.tau_bar = 0.7;
  p.lambda_bar = 1.3;
  p.rho_lambda = 1.0;
  p.shape = lgt::TreeShape::complete_binary;
  lgt::SpeciesPhylogeny t = lgt::generate_bounded_rates(p);
  CHECK(t.n_leaves() == 4);
  for (int e : t.edges()) {
    CHECK(t.tau(e) == doctest::Approx(0.7));
    CHECK(t.lambda(e) == doctest::Approx(1.3));
  }
  CHECK(lgt::quartet_of(lgt::as_unrooted(t), {1, 2, 3, 4}).split ==
        lgt::split_index({1, 2, 3, 4}, 1, 2));
  CHECK(t.is_ultrametric());
}

TEST_CASE("bounded rates: non-power-of-two sizes merge pruned edges") {
  lgt::BoundedRatesParams p;
  p.n_plus = 6;
  p.tau_bar = 1.0;
  p.lambda_bar = 2.0;
  p.rho_lambda = 1.0;
  p.shape = lgt::TreeShape::complete_binary;
  lgt::SpeciesPhylogeny t = lgt::generate_bounded_rates(p);
  CHECK(t.n_leaves() == 6);
  CHECK(t.is_ultrametric());
  t.require_binary();
  CHECK(t.height() == doctest::Approx(3.0));
  bool merged = false;
  for (int e : t.edges()) {
    CHECK((t.tau(e) == doctest::Approx(1.0) || t.tau(e) == doctest::Approx(2.0)));
    if (t.tau(e) == doctest::Approx(2.0)) merged = true;
  }
  CHECK(merged);
}

TEST_CASE("bounded rates: random ultrametric draws stay inside the bands") {
  // The pendant stretch must land every leaf edge inside the duration band,
  // so larger trees need a wide band to stay feasible.
  lgt::BoundedRatesParams p;
  p.n_plus = 16;
  p.tau_bar = 2.0;
  p.rho_tau = 0.05;
  p.lambda_bar = 3.0;
  p.rho_lambda = 0.25;
  p.shape = lgt::TreeShape::random_ultrametric;
  for (std::uint64_t seed : {1u, 7u, 42u, 99u}) {
    p.seed = seed;
    lgt::SpeciesPhylogeny t = lgt::generate_bounded_rates(p);
    CHECK(t.n_leaves() == 16);
    CHECK(t.is_ultrametric());
    t.require_binary();
    for (int e : t.edges()) {
      CHECK(t.tau(e) >= 0.1 - 1e-12);
      CHECK(t.tau(e) <= 2.0 + 1e-12);
      CHECK(t.lambda(e) >= 0.75);
      CHECK(t.lambda(e) <= 3.0);
    }
    // Hop depths of a binary tree bracket the leaf count.
    int hmin = 1000, hmax = 0;
    for (int l : t.leaves()) {
      int hops = 0;
      for (int v = l; !t.is_root(v); v = t.parent(v)) ++hops;
      hmin = std::min(hmin, hops);
      hmax = std::max(hmax, hops);
    }
    CHECK((1 << hmin) <= 16);
    CHECK((1 << hmax) >= 16);
  }
}

TEST_CASE("bounded rates: infeasible duration band raises generation error") {
  lgt::BoundedRatesParams p;
  p.n_plus = 5;
  p.tau_bar = 1.0;
  p.rho_tau = 0.999;
  p.shape = lgt::TreeShape::random_ultrametric;
  CHECK_THROWS_AS(lgt::generate_bounded_rates(p), lgt::generation_error);
}

TEST_CASE("bounded rates: parameter validation") {
  lgt::BoundedRatesParams p;
  p.n_plus = 1;
  CHECK_THROWS_AS(lgt::generate_bounded_rates(p), lgt::config_error);
  p = {};
  p.tau_bar = 0.0;
  CHECK_THROWS_AS(lgt::generate_bounded_rates(p), lgt::config_error);
  p = {};
  p.rho_tau = 1.5;
  CHECK_THROWS_AS(lgt::generate_bounded_rates(p), lgt::config_error);
  p = {};
  p.rho_lambda = 0.0;
  CHECK_THROWS_AS(lgt::generate_bounded_rates(p), lgt::config_error);
}

TEST_CASE("lgt weights: two-leaf hand value and edge weight accessor") {
  lgt::SpeciesPhylogeny t = lgt::parse_newick("(a:1,b:1);", 2.0);
  lgt::LgtWeights w = lgt::lgt_weights(t);
  CHECK(w.total == doctest::Approx(4.0));
  CHECK(w.extant == doctest::Approx(4.0));
  CHECK(w.max_pair == doctest::Approx(4.0));
  for (int e : t.edges()) CHECK(lgt::edge_weight(t, e) == doctest::Approx(2.0));
  CHECK_THROWS_AS(lgt::edge_weight(t, t.root()), lgt::input_error);
}

TEST_CASE("lgt weights: extinct leaves lower the extant weight") {
  lgt::SpeciesPhylogeny t =
      lgt::parse_newick("(((a:1,b!x:1):1,c:2):1,d:3);", 1.0);
  lgt::LgtWeights w = lgt::lgt_weights(t);
  CHECK(w.extant < w.total);
  // Dropping b removes its pendant edge (weight 1) and merges the a edge.
  CHECK(w.total == doctest::Approx(1 + 1 + 1 + 2 + 1 + 3));
  CHECK(w.extant == doctest::Approx(w.total - 1.0));
}

TEST_CASE("lgt weights: pair and quartet maxima ordering") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    lgt::YuleParams p = yp(10, 1.0, seed);
    p.lambda_bar = 2.0;
    p.rho_lambda = 0.3;
    lgt::SpeciesPhylogeny t = lgt::generate_yule(p);
    lgt::LgtWeights w = lgt::lgt_weights(t);
    CHECK(w.quartet_exact);
    CHECK(w.max_pair <= w.max_quartet + 1e-12);
    CHECK(w.max_quartet <= 2.0 * w.max_pair + 1e-12);
    CHECK(w.extant == doctest::Approx(w.total));  // no extinct leaves
  }
}

TEST_CASE("lgt weights: exhaustive sixteen-leaf maxima match the oracle") {
  lgt::YuleParams p = yp(16, 1.0, 314);
  p.lambda_bar = 1.5;
  p.rho_lambda = 0.4;
  lgt::SpeciesPhylogeny t = lgt::generate_yule(p);
  lgt::LgtWeights w = lgt::lgt_weights(t);
  lgt::DistanceMatrix wm = weight_metric(t);

  double max_pair = 0.0;
  std::vector<lgt::Taxon> taxa = t.leaf_taxa();
  std::sort(taxa.begin(), taxa.end());
  for (std::size_t i = 0; i < taxa.size(); ++i)
    for (std::size_t j = i + 1; j < taxa.size(); ++j)
      max_pair = std::max(max_pair, wm.at_taxa(taxa[i], taxa[j]));
  CHECK(w.max_pair == doctest::Approx(max_pair).epsilon(1e-9));

  double max_quartet = 0.0;
  for (std::size_t i = 0; i < taxa.size(); ++i)
    for (std::size_t j = i + 1; j < taxa.size(); ++j)
      for (std::size_t k = j + 1; k < taxa.size(); ++k)
        for (std::size_t l = k + 1; l < taxa.size(); ++l) {
          std::array<lgt::Taxon, 4> x{taxa[i], taxa[j], taxa[k], taxa[l]};
          double q = quartet_weight_oracle(wm, x);
          max_quartet = std::max(max_quartet, q);
          CHECK(lgt::subset_weight(t, {x[0], x[1], x[2], x[3]}) ==
                doctest::Approx(q).epsilon(1e-9));
        }
  CHECK(w.max_quartet == doctest::Approx(max_quartet).epsilon(1e-9));
}

TEST_CASE("lgt weights: large trees fall back to the pair bound") {
  lgt::SpeciesPhylogeny t = lgt::generate_yule(yp(70, 1.0, 11));
  lgt::LgtWeights w = lgt::lgt_weights(t);
  CHECK_FALSE(w.quartet_exact);
  CHECK(w.max_quartet == doctest::Approx(2.0 * w.max_pair));
}

TEST_CASE("subset weight: pairs equal weighted path lengths; errors checked") {
  lgt::SpeciesPhylogeny t = lgt::generate_yule(yp(8, 1.0, 21));
  lgt::DistanceMatrix wm = weight_metric(t);
  std::vector<lgt::Taxon> taxa = t.leaf_taxa();
  for (std::size_t i = 0; i < taxa.size(); ++i)
    for (std::size_t j = i + 1; j < taxa.size(); ++j)
      CHECK(lgt::subset_weight(t, {taxa[i], taxa[j]}) ==
            doctest::Approx(wm.at_taxa(taxa[i], taxa[j])).epsilon(1e-9));
  CHECK(lgt::subset_weight(t, {taxa[0]}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(lgt::subset_weight(t, {1, 1}), lgt::input_error);
  CHECK_THROWS_AS(lgt::subset_weight(t, {99}), lgt::input_error);
}
