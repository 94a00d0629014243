// Transfer-event simulation: Poisson counts, recipient/donor laws, the
// subtree-regraft semantics of events, radius limits, taxon sampling, and
// highway planting/validation. The forward construction in tests/support
// provides an independent check of the backward lineage tracer.
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lgt/distance.hpp"
#include "lgt/lgt_sim.hpp"
#include "lgt/newick.hpp"
#include "lgt/rng.hpp"
#include "lgt/species_sim.hpp"
#include "lgt/species_tree.hpp"
#include "lgt/stats.hpp"
#include "lgt/unrooted_tree.hpp"

#include "oracles.hpp"

namespace {

lgt::SpeciesPhylogeny complete_binary(int n, double tau, double lambda) {
  lgt::BoundedRatesParams p;
  p.n_plus = n;
  p.tau_bar = tau;
  p.lambda_bar = lambda;
  p.rho_lambda = 1.0;
  p.shape = lgt::TreeShape::complete_binary;
  return lgt::generate_bounded_rates(p);
}

lgt::SpeciesPhylogeny yule(int n, std::uint64_t seed, double lambda_bar) {
  lgt::YuleParams p;
  p.n = n;
  p.nu = 1.0;
  p.lambda_bar = lambda_bar;
  p.rho_lambda = 1.0;
  p.seed = seed;
  return lgt::generate_yule(p);
}

double poisson_pmf(double mu, int k) {
  return std::exp(-mu + k * std::log(mu) - std::lgamma(k + 1.0));
}

double binomial_pmf(int n, double p, int k) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                  std::lgamma(n - k + 1.0) + k * std::log(p) +
                  (n - k) * std::log1p(-p));
}

}  // namespace

TEST_CASE("event counts follow the Poisson law of the total weight") {
  lgt::SpeciesPhylogeny t = lgt::parse_newick("(a:1,b:1);", 1.0);  // weight 2
  const int reps = 100000;
  const double mu = 2.0;
  std::vector<double> observed(13, 0.0);
  int zero = 0;
  for (int i = 0; i < reps; ++i) {
    std::mt19937_64 rng = lgt::derive_rng(31, lgt::stream::events, i);
    auto events = lgt::sample_events(
        t, std::numeric_limits<double>::infinity(), rng);
    int k = std::min<int>(static_cast<int>(events.size()), 12);
    observed[k] += 1.0;
    if (events.empty()) ++zero;
    CHECK(std::is_sorted(events.begin(), events.end(),
                         [](const lgt::LgtEvent& a, const lgt::LgtEvent& b) {
                           return a.t < b.t;
                         }));
  }
  double p0 = double(zero) / reps;
  double want0 = std::exp(-mu);
  CHECK(std::abs(p0 - want0) <
        3.0 * std::sqrt(want0 * (1 - want0) / reps));
  std::vector<double> expected(13, 0.0);
  double tail = 1.0;
  for (int k = 0; k < 12; ++k) {
    expected[k] = reps * poisson_pmf(mu, k);
    tail -= poisson_pmf(mu, k);
  }
  expected[12] = reps * std::max(tail, 0.0);
  CHECK(lgt::chi_square_gof(observed, expected) > 0.01);
}

TEST_CASE("recipient edges are chosen proportionally to lambda times tau") {
  lgt::YuleParams yq;
  yq.n = 6;
  yq.nu = 1.0;
  yq.lambda_bar = 2.0;
  yq.rho_lambda = 0.3;  // unequal weights across edges
  yq.seed = 400;
  lgt::SpeciesPhylogeny t = lgt::generate_yule(yq);
  std::vector<int> edges = t.edges();
  std::map<int, int> pos;
  double wtot = 0.0;
  std::vector<double> w;
  for (int e : edges) {
    pos[e] = static_cast<int>(w.size());
    w.push_back(t.lambda(e) * t.tau(e));
    wtot += w.back();
  }
  std::vector<double> observed(edges.size(), 0.0);
  long long total = 0;
  for (int i = 0; i < 4000; ++i) {
    std::mt19937_64 rng = lgt::derive_rng(77, lgt::stream::events, i);
    for (const lgt::LgtEvent& ev : lgt::sample_events(
             t, std::numeric_limits<double>::infinity(), rng)) {
      observed[pos[ev.recipient.edge]] += 1.0;
      ++total;
    }
  }
  REQUIRE(total > 1000);
  std::vector<double> expected(edges.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i)
    expected[i] = total * w[i] / wtot;
  CHECK(lgt::chi_square_gof(observed, expected) > 0.01);
}

TEST_CASE("event offsets are uniform along the recipient edge") {
  lgt::SpeciesPhylogeny t = yule(8, 9, 1.0);
  std::vector<double> u;
  for (int i = 0; i < 1500; ++i) {
    std::mt19937_64 rng = lgt::derive_rng(5150, lgt::stream::events, i);
    for (const lgt::LgtEvent& ev : lgt::sample_events(
             t, std::numeric_limits<double>::infinity(), rng))
      u.push_back(ev.recipient.offset / t.tau(ev.recipient.edge));
  }
  REQUIRE(u.size() > 5000);
  CHECK(lgt::ks_pvalue(lgt::ks_uniform_stat(u),
                       static_cast<int>(u.size())) > 0.01);
}

TEST_CASE("donors are uniform over the contemporaneous alternatives") {
  // Complete binary four-leaf tree: all pendant edges share the time band
  // below the first split, so a pendant recipient sees exactly the other
  // three pendants as donors.
  lgt::SpeciesPhylogeny t = complete_binary(4, 1.0, 1.0);
  std::set<int> pendants;
  for (int l : t.leaves()) pendants.insert(l);
  std::map<int, double> donor_count;
  double total = 0.0;
  for (int i = 0; i < 4000; ++i) {
    std::mt19937_64 rng = lgt::derive_rng(808, lgt::stream::events, i);
    for (const lgt::LgtEvent& ev : lgt::sample_events(
             t, std::numeric_limits<double>::infinity(), rng)) {
      if (!pendants.count(ev.recipient.edge)) continue;
      CHECK(pendants.count(ev.donor.edge));
      CHECK(ev.donor.edge != ev.recipient.edge);
      CHECK(t.contemporaneous(ev.recipient, ev.donor));
      donor_count[ev.donor.edge] += 1.0;
      total += 1.0;
    }
  }
  REQUIRE(total > 3000);
  // Pool per donor edge (each appears as an alternative for 3 recipients).
  std::vector<double> observed, expected;
  for (int e : pendants) {
    observed.push_back(donor_count[e]);
    expected.push_back(total / 4.0);
  }
  CHECK(lgt::chi_square_gof(observed, expected) > 0.01);
}

TEST_CASE("a finite radius caps the recipient-donor divergence") {
  lgt::SpeciesPhylogeny t = yule(16, 77, 2.0);
  const double radius = 0.3;
  int seen = 0;
  for (int i = 0; i < 50; ++i) {
    std::mt19937_64 rng = lgt::derive_rng(12, lgt::stream::events, i);
    for (const lgt::LgtEvent& ev : lgt::sample_events(t, radius, rng)) {
      CHECK(t.divergence_time(ev.recipient, ev.donor) <= 2 * radius + 1e-9);
      ++seen;
    }
  }
  CHECK(seen > 0);
  std::mt19937_64 rng = lgt::derive_rng(1, lgt::stream::events);
  CHECK_THROWS_AS(lgt::sample_events(t, 0.0, rng), lgt::config_error);
  CHECK_THROWS_AS(lgt::sample_events(t, -1.0, rng), lgt::config_error);
}

TEST_CASE("events with an empty donor ball are dropped and counted") {
  lgt::SpeciesPhylogeny t = lgt::parse_newick("(a:3,b:3);", 1.0);
  lgt::EventCounters dropped;
  long long kept = 0;
  for (int i = 0; i < 20; ++i) {
    std::mt19937_64 rng = lgt::derive_rng(600, lgt::stream::events, i);
    for (const lgt::LgtEvent& ev : lgt::sample_events(t, 0.05, rng, &dropped)) {
      CHECK(ev.t <= 0.05 + 1e-12);
      ++kept;
    }
  }
  CHECK(dropped.empty_ball_discards > 0);
  CHECK(dropped.empty_ball_discards + kept > 100);

  lgt::EventCounters none;
  for (int i = 0; i < 20; ++i) {
    std::mt19937_64 rng = lgt::derive_rng(600, lgt::stream::events, i);
    lgt::sample_events(t, std::numeric_limits<double>::infinity(), rng, &none);
  }
  CHECK(none.empty_ball_discards == 0);
}

TEST_CASE("zero events reproduce the species tree exactly") {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    lgt::SpeciesPhylogeny t = yule(10, seed, 1.0);
    lgt::GeneTree g = lgt::apply_events(t, {});
    lgt::UnrootedTree want = lgt::as_unrooted(t);
    CHECK(lgt::rf_distance(g, want) == 0);
    lgt::DistanceMatrix dg = lgt::tree_distance_matrix(g);
    lgt::DistanceMatrix dw = lgt::tree_distance_matrix(want);
    for (int i = 0; i < dg.size(); ++i)
      for (int j = 0; j < dg.size(); ++j)
        CHECK(dg.at(i, j) == doctest::Approx(dw.at(i, j)).epsilon(1e-12));
  }
}

TEST_CASE("one transfer moves the recipient subtree to the donor location") {
  lgt::SpeciesPhylogeny t = lgt::parse_newick("((a:1,b:1):1,(c:1,d:1):1);");
  int ea = t.vertex_of(1), ec = t.vertex_of(3);
  lgt::LgtEvent ev;
  ev.t = 1.5;
  ev.recipient = {ea, 0.5};
  ev.donor = {ec, 0.5};
  lgt::GeneTree g = lgt::apply_events(t, {ev});

  // Taxon a now branches off inside c's pendant edge: the new attachment
  // node sits at the donor location, the subtree below the recipient hangs
  // from it, and the original recipient edge above the cut is gone.
  CHECK(lgt::quartet_of(g, {1, 2, 3, 4}).split ==
        lgt::split_index({1, 2, 3, 4}, 1, 3));
  lgt::DistanceMatrix d = lgt::tree_distance_matrix(g);
  CHECK(d.at_taxa(1, 3) == doctest::Approx(1.0));
  CHECK(d.at_taxa(1, 4) == doctest::Approx(2.0));
  CHECK(d.at_taxa(1, 2) == doctest::Approx(4.0));
  CHECK(d.at_taxa(2, 3) == doctest::Approx(4.0));
  CHECK(d.at_taxa(2, 4) == doctest::Approx(4.0));
  CHECK(d.at_taxa(3, 4) == doctest::Approx(2.0));

  // The independent forward construction gives the same gene tree.
  lgt::GeneTree fw = oracle::forward_gene_tree(t, {ev});
  CHECK(lgt::rf_distance(g, fw) == 0);
  lgt::DistanceMatrix df = lgt::tree_distance_matrix(fw);
  for (int i = 0; i < d.size(); ++i)
    for (int j = 0; j < d.size(); ++j)
      CHECK(d.at(i, j) == doctest::Approx(df.at(i, j)).epsilon(1e-9));
}

TEST_CASE("backward tracing matches the forward construction on random instances") {
  int instances = 0;
  for (std::uint64_t seed = 1; instances < 500; ++seed) {
    int n = 4 + static_cast<int>(seed % 5);  // 4..8 leaves
    lgt::SpeciesPhylogeny t = yule(n, seed, 0.4);
    std::mt19937_64 rng = lgt::derive_rng(seed, lgt::stream::events, 1);
    std::vector<lgt::LgtEvent> events = lgt::sample_events(
        t, std::numeric_limits<double>::infinity(), rng);
    if (events.size() > 5) events.resize(5);
    lgt::GeneTree back = lgt::apply_events(t, events);
    lgt::GeneTree fw = oracle::forward_gene_tree(t, events);
    REQUIRE(lgt::rf_distance(back, fw) == 0);
    lgt::DistanceMatrix db = lgt::tree_distance_matrix(back);
    lgt::DistanceMatrix df = lgt::tree_distance_matrix(fw);
    REQUIRE(db.taxa() == df.taxa());
    for (int i = 0; i < db.size(); ++i)
      for (int j = 0; j < db.size(); ++j)
        REQUIRE(db.at(i, j) == doctest::Approx(df.at(i, j)).epsilon(1e-9));
    ++instances;
  }
}

TEST_CASE("invalid events are model violations") {
  lgt::SpeciesPhylogeny t = lgt::parse_newick("((a:1,b:1):1,(c:1,d:1):1);");
  int ea = t.vertex_of(1), ec = t.vertex_of(3);
  {
    lgt::LgtEvent ev;  // endpoints at different depths
    ev.t = 1.2;
    ev.recipient = {ea, 0.2};
    ev.donor = {ec, 0.7};
    CHECK_THROWS_AS(lgt::apply_events(t, {ev}), lgt::model_error);
  }
  {
    lgt::LgtEvent ev;  // bad edge id
    ev.t = 1.5;
    ev.recipient = {99, 0.5};
    ev.donor = {ec, 0.5};
    CHECK_THROWS_AS(lgt::apply_events(t, {ev}), lgt::model_error);
  }
  {
    lgt::LgtEvent ev;  // offset beyond the edge
    ev.t = 1.5;
    ev.recipient = {ea, 1.5};
    ev.donor = {ec, 0.5};
    CHECK_THROWS_AS(lgt::apply_events(t, {ev}), lgt::model_error);
  }
  {
    lgt::LgtEvent ev;  // self-transfer: a lineage jumping onto its own edge
    ev.t = 1.5;
    ev.recipient = {ea, 0.5};
    ev.donor = {ea, 0.5};
    lgt::GeneTree g = lgt::apply_events(t, {ev});  // structural no-op
    CHECK(lgt::rf_distance(g, lgt::as_unrooted(t)) == 0);
  }
}

TEST_CASE("taxon sampling: identity at p=1, documented coin order, nullopt") {
  lgt::SpeciesPhylogeny t = yule(8, 123, 1.0);
  lgt::GeneTree full = lgt::apply_events(t, {});
  std::vector<lgt::Taxon> extant = t.extant_taxa();
  {
    std::mt19937_64 rng = lgt::derive_rng(9, lgt::stream::sampling, 0);
    auto kept = lgt::sample_taxa(full, extant, 1.0, rng);
    REQUIRE(kept.has_value());
    CHECK(kept->taxa() == full.taxa());
    CHECK(lgt::rf_distance(*kept, full) == 0);
  }
  {
    // Coins are drawn per taxon in ascending order from the given stream.
    std::mt19937_64 rng = lgt::derive_rng(9, lgt::stream::sampling, 3);
    auto kept = lgt::sample_taxa(full, extant, 0.7, rng);
    std::mt19937_64 replay = lgt::derive_rng(9, lgt::stream::sampling, 3);
    std::bernoulli_distribution coin(0.7);
    std::vector<lgt::Taxon> sorted = extant;
    std::sort(sorted.begin(), sorted.end());
    std::vector<lgt::Taxon> want;
    for (lgt::Taxon x : sorted)
      if (coin(replay)) want.push_back(x);
    if (want.size() < 2) {
      CHECK_FALSE(kept.has_value());
    } else {
      REQUIRE(kept.has_value());
      CHECK(kept->taxa() == want);
    }
  }
  {
    std::mt19937_64 rng = lgt::derive_rng(9, lgt::stream::sampling, 5);
    auto kept = lgt::sample_taxa(full, extant, 1e-12, rng);
    CHECK_FALSE(kept.has_value());
  }
  {
    std::mt19937_64 rng = lgt::derive_rng(9, lgt::stream::sampling, 6);
    CHECK_THROWS_AS(lgt::sample_taxa(full, extant, 0.0, rng),
                    lgt::config_error);
    CHECK_THROWS_AS(lgt::sample_taxa(full, extant, 1.5, rng),
                    lgt::config_error);
  }
}

TEST_CASE("taxon sampling: kept counts are binomial") {
  lgt::SpeciesPhylogeny t = yule(32, 55, 1.0);
  lgt::GeneTree full = lgt::apply_events(t, {});
  std::vector<lgt::Taxon> extant = t.extant_taxa();
  const int reps = 2000;
  std::vector<double> observed(33, 0.0);
  for (int i = 0; i < reps; ++i) {
    std::mt19937_64 rng = lgt::derive_rng(2222, lgt::stream::sampling, i);
    auto kept = lgt::sample_taxa(full, extant, 0.5, rng);
    int k = kept ? static_cast<int>(kept->taxa().size()) : -1;
    if (k < 0) {
      // Fewer than two survivors: replay the coins to recover the count.
      std::mt19937_64 replay = lgt::derive_rng(2222, lgt::stream::sampling, i);
      std::bernoulli_distribution coin(0.5);
      k = 0;
      for (std::size_t j = 0; j < extant.size(); ++j)
        if (coin(replay)) ++k;
    }
    observed[k] += 1.0;
  }
  std::vector<double> expected(33, 0.0);
  for (int k = 0; k <= 32; ++k)
    expected[k] = reps * binomial_pmf(32, 0.5, k);
  CHECK(lgt::chi_square_gof(observed, expected) > 0.01);
}

TEST_CASE("gene batches: per-gene streams, prefix stability, empty spec") {
  lgt::SpeciesPhylogeny t = yule(10, 999, 0.5);
  lgt::LgtParams lp;
  lp.seed = 31337;
  std::vector<lgt::GeneRecord> ten = lgt::generate_gene_trees(t, lp, 10);
  std::vector<lgt::GeneRecord> five = lgt::generate_gene_trees(t, lp, 5);
  REQUIRE(ten.size() == 10);
  REQUIRE(five.size() == 5);
  std::vector<lgt::GeneRecord> head(ten.begin(), ten.begin() + 5);
  CHECK(lgt::events_csv(head) == lgt::events_csv(five));

  lgt::HighwaySpec empty;
  std::vector<lgt::GeneRecord> with_empty =
      lgt::generate_gene_trees(t, lp, 10, &empty);
  CHECK(lgt::events_csv(with_empty) == lgt::events_csv(ten));

  CHECK_THROWS_AS(lgt::generate_gene_trees(t, lp, -1), lgt::config_error);
}

TEST_CASE("events csv carries the documented header and kinds") {
  lgt::SpeciesPhylogeny t = complete_binary(32, 1.0, 0.2);
  lgt::HighwaySpec spec =
      lgt::plant_highways(t, 1, 1.0, lgt::HighwayDirection::fixed01, 7);
  lgt::LgtParams lp;
  lp.seed = 5;
  std::vector<lgt::GeneRecord> records =
      lgt::generate_gene_trees(t, lp, 4, &spec);
  std::istringstream in(lgt::events_csv(records));
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "gene_id,t,recipient_edge,recipient_offset,donor_edge,donor_offset,"
        "kind");
  bool saw_highway = false, saw_random = false;
  std::string line;
  while (std::getline(in, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 6);
    if (line.find("highway:0") != std::string::npos) saw_highway = true;
    if (line.rfind("random") != std::string::npos &&
        line.find("highway") == std::string::npos)
      saw_random = true;
  }
  CHECK(saw_highway);
  CHECK(saw_random);
}

TEST_CASE("highway genes: exact share, displacement, and direction policy") {
  lgt::SpeciesPhylogeny t = complete_binary(32, 1.0, 0.0);  // no random events
  lgt::HighwaySpec spec =
      lgt::plant_highways(t, 2, 0.3, lgt::HighwayDirection::fixed01, 99);
  REQUIRE(spec.highways.size() == 2);
  lgt::LgtParams lp;
  lp.seed = 17;
  const int genes = 200;
  std::vector<lgt::GeneRecord> records =
      lgt::generate_gene_trees(t, lp, genes, &spec);
  std::array<int, 2> touched{0, 0};
  for (const lgt::GeneRecord& r : records) {
    for (const lgt::LgtEvent& ev : r.events) {
      REQUIRE(ev.kind == lgt::EventKind::highway_transfer);
      REQUIRE(ev.highway >= 0);
      ++touched[ev.highway];
      const lgt::Highway& h = spec.highways[ev.highway];
      // fixed01 always sends edge0 -> edge1.
      CHECK(ev.donor.edge == h.edge0);
      CHECK(ev.recipient.edge == h.edge1);
      CHECK(t.contemporaneous(ev.recipient, ev.donor));
    }
  }
  CHECK(touched[0] == 60);  // ceil(0.3 * 200)
  CHECK(touched[1] == 60);
}

TEST_CASE("a full-share highway displaces every gene the same way") {
  lgt::SpeciesPhylogeny t = complete_binary(32, 1.0, 0.0);
  lgt::HighwaySpec spec =
      lgt::plant_highways(t, 1, 1.0, lgt::HighwayDirection::fixed01, 3);
  lgt::LgtParams lp;
  lp.seed = 23;
  std::vector<lgt::GeneRecord> records =
      lgt::generate_gene_trees(t, lp, 20, &spec);
  std::string species_key = lgt::as_unrooted(t).topology_key();
  std::set<std::string> keys;
  for (const lgt::GeneRecord& r : records) {
    REQUIRE(r.tree.has_value());
    REQUIRE(r.events.size() == 1);
    keys.insert(r.tree->topology_key());
  }
  CHECK(keys.size() == 1);
  CHECK(*keys.begin() != species_key);
}

TEST_CASE("highway windows and placement rules") {
  lgt::SpeciesPhylogeny t4 = complete_binary(4, 1.0, 1.0);
  int a = t4.vertex_of(1), b = t4.vertex_of(2);
  auto [lo, hi] = lgt::highway_window(t4, a, b);
  CHECK(lo == doctest::Approx(1.0));
  CHECK(hi == doctest::Approx(2.0));
  CHECK_THROWS_AS(lgt::highway_window(t4, a, a), lgt::config_error);
  CHECK_THROWS_AS(lgt::highway_window(t4, t4.root(), a), lgt::config_error);

  lgt::SpeciesPhylogeny cat = lgt::parse_newick("(((a:1,b:1):1,c:2):1,d:3);");
  int ca = cat.vertex_of(1);
  int cab = cat.parent(ca);
  CHECK_THROWS_AS(lgt::highway_window(cat, cab, ca), lgt::config_error);

  lgt::SpeciesPhylogeny t32 = complete_binary(32, 1.0, 1.0);
  auto mk = [&](int e0, int e1, double gamma) {
    lgt::HighwaySpec s;
    lgt::Highway h;
    h.edge0 = e0;
    h.edge1 = e1;
    h.gamma = gamma;
    h.direction = lgt::HighwayDirection::fixed01;
    s.highways.push_back(h);
    return s;
  };
  int l1 = t32.vertex_of(1), l2 = t32.vertex_of(2), l17 = t32.vertex_of(17),
      l18 = t32.vertex_of(18);
  // A valid deep pair crossing the root.
  lgt::HighwaySpec good = mk(l1, l17, 0.3);
  lgt::validate_highways(t32, good);
  CHECK_THROWS_AS(lgt::validate_highways(t32, mk(l1, l17, 0.0)),
                  lgt::config_error);
  CHECK_THROWS_AS(lgt::validate_highways(t32, mk(l1, l17, 1.5)),
                  lgt::config_error);
  // Sibling pendants: no three edges strictly between the endpoints.
  CHECK_THROWS_AS(lgt::validate_highways(t32, mk(l1, l2, 0.3)),
                  lgt::config_error);
  // Endpoint whose grandparent is the root.
  int shallow = t32.children(t32.children(t32.root())[0])[0];
  CHECK_THROWS_AS(lgt::validate_highways(t32, mk(shallow, l17, 0.3)),
                  lgt::config_error);
  // Two highways sharing path edges near the root must be rejected.
  lgt::HighwaySpec overlap = mk(l1, l17, 0.3);
  overlap.highways.push_back(mk(l2, l18, 0.3).highways[0]);
  CHECK_THROWS_AS(lgt::validate_highways(t32, overlap), lgt::config_error);
}

TEST_CASE("planted highways validate, reproduce, and exhaust small trees") {
  lgt::SpeciesPhylogeny t = complete_binary(32, 1.0, 1.0);
  lgt::HighwaySpec s1 = lgt::plant_highways(
      t, 2, 0.25, lgt::HighwayDirection::per_gene_uniform, 42);
  REQUIRE(s1.highways.size() == 2);
  lgt::validate_highways(t, s1);
  for (const lgt::Highway& h : s1.highways) {
    CHECK(h.gamma == doctest::Approx(0.25));
    CHECK(h.direction == lgt::HighwayDirection::per_gene_uniform);
  }
  lgt::HighwaySpec s2 = lgt::plant_highways(
      t, 2, 0.25, lgt::HighwayDirection::per_gene_uniform, 42);
  CHECK(s1.highways[0].edge0 == s2.highways[0].edge0);
  CHECK(s1.highways[1].edge1 == s2.highways[1].edge1);

  CHECK_THROWS_AS(
      lgt::plant_highways(t, -1, 0.3, lgt::HighwayDirection::fixed01, 1),
      lgt::config_error);
  lgt::SpeciesPhylogeny small = complete_binary(8, 1.0, 1.0);
  CHECK_THROWS_AS(
      lgt::plant_highways(small, 50, 0.3, lgt::HighwayDirection::fixed01, 1),
      lgt::generation_error);
}

TEST_CASE("forest tokens: edge order, coalescence depth, and jump tracking") {
  lgt::SpeciesPhylogeny t = complete_binary(4, 1.0, 1.0);
  {
    std::vector<lgt::ForestToken> toks = lgt::trace_gene_forest(t, {}, 1.5);
    REQUIRE(toks.size() == 4);
    for (std::size_t i = 1; i < toks.size(); ++i)
      CHECK(toks[i - 1].edge < toks[i].edge);
    for (const lgt::ForestToken& tok : toks) {
      CHECK(t.is_leaf(tok.edge));
      CHECK(tok.subtree == "t" + std::to_string(t.taxon(tok.edge)));
    }
  }
  {
    // One transfer between the sibling pendants of taxa 1 and 2: below the
    // cut their lineages share the donor edge and have already coalesced.
    int ea = t.vertex_of(1), eb = t.vertex_of(2);
    lgt::LgtEvent ev;
    ev.t = 1.5;
    ev.recipient = {ea, 0.5};
    ev.donor = {eb, 0.5};
    std::vector<lgt::ForestToken> toks = lgt::trace_gene_forest(t, {ev}, 1.2);
    REQUIRE(toks.size() == 3);
    bool found = false;
    for (const lgt::ForestToken& tok : toks) {
      if (tok.edge == eb) {
        found = true;
        CHECK(tok.born == doctest::Approx(1.5));
        CHECK(tok.subtree.find("t1") != std::string::npos);
        CHECK(tok.subtree.find("t2") != std::string::npos);
      }
      CHECK(tok.edge != ea);  // the recipient edge is vacated above the jump
    }
    CHECK(found);
  }
}
