#include "lgt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "lgt/errors.hpp"
#include "lgt/median_tree.hpp"
#include "lgt/newick.hpp"
#include "lgt/quartet_plurality.hpp"
#include "lgt/rng.hpp"
#include "lgt/seq_sim.hpp"
#include "lgt/stats.hpp"

namespace lgt {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                          std::uint64_t b = 0) {
  std::uint64_t s = mix64(base);
  s = mix64(s ^ mix64(a + 1));
  return mix64(s ^ mix64(b + 2));
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

Method parse_method(const std::string& raw, int* k_override) {
  if (raw == "qp") return Method::qp;
  if (raw == "mt") return Method::mt;
  if (raw == "mt-seq") return Method::mt_seq;
  if (raw.rfind("mt-seq(", 0) == 0 && raw.back() == ')') {
    std::string inner = raw.substr(7, raw.size() - 8);
    try {
      std::size_t used = 0;
      int k = std::stoi(inner, &used);
      if (used != inner.size() || k < 1) throw std::invalid_argument(inner);
      *k_override = k;
    } catch (const std::exception&) {
      throw config_error("method mt-seq(k): bad site count '" + inner + "'");
    }
    return Method::mt_seq;
  }
  throw config_error("unknown method '" + raw +
                     "' (expected qp, mt or mt-seq(k))");
}

TreeShape parse_shape(const std::string& raw) {
  if (raw == "complete_binary") return TreeShape::complete_binary;
  if (raw == "random_ultrametric") return TreeShape::random_ultrametric;
  throw config_error("unknown br.shape '" + raw + "'");
}

HighwayDirection parse_direction(const std::string& raw) {
  if (raw == "fixed01") return HighwayDirection::fixed01;
  if (raw == "fixed10") return HighwayDirection::fixed10;
  if (raw == "per_gene_uniform") return HighwayDirection::per_gene_uniform;
  throw config_error("unknown highways.direction '" + raw + "'");
}

}  // namespace

ExperimentConfig ExperimentConfig::from(const Config& c) {
  ExperimentConfig e;
  std::string gen = c.get_string_or("generator", "yule");
  if (gen == "yule")
    e.generator = GeneratorKind::yule;
  else if (gen == "bounded-rates")
    e.generator = GeneratorKind::bounded_rates;
  else if (gen == "newick")
    e.generator = GeneratorKind::newick;
  else
    throw config_error("unknown generator '" + gen +
                       "' (expected yule, bounded-rates or newick)");

  switch (e.generator) {
    case GeneratorKind::yule:
      e.n = static_cast<int>(c.get_int("yule.n"));
      e.nu = c.get_double_or("yule.nu", 1.0);
      break;
    case GeneratorKind::bounded_rates:
      e.n = static_cast<int>(c.get_int("br.n_plus"));
      e.tau_bar = c.get_double_or("br.tau_bar", 1.0);
      e.rho_tau = c.get_double_or("br.rho_tau", 0.5);
      e.shape = parse_shape(c.get_string_or("br.shape", "complete_binary"));
      break;
    case GeneratorKind::newick:
      e.newick_path = c.get_string("newick.path");
      break;
  }

  bool br_bar = e.generator == GeneratorKind::bounded_rates &&
                c.has("br.lambda_bar");
  if (c.has("lgt.lambda_bar") && br_bar)
    throw config_error("lgt.lambda_bar and br.lambda_bar are aliases; "
                       "set only one");
  if (c.has("lgt.lambda_bar"))
    e.lambda_bar = c.get_double("lgt.lambda_bar");
  else if (br_bar)
    e.lambda_bar = c.get_double("br.lambda_bar");
  if (c.has("lgt.Lambda")) {
    if (e.lambda_bar)
      throw config_error(
          "lgt.Lambda (target weight) and lambda_bar (rate cap) are "
          "mutually exclusive");
    e.lambda_target = c.get_double("lgt.Lambda");
  }
  if (!e.lambda_bar && !e.lambda_target) e.lambda_bar = 0.0;

  bool br_rho = e.generator == GeneratorKind::bounded_rates &&
                c.has("br.rho_lambda");
  if (c.has("lgt.rho_lambda") && br_rho)
    throw config_error("lgt.rho_lambda and br.rho_lambda are aliases; "
                       "set only one");
  if (c.has("lgt.rho_lambda"))
    e.rho_lambda = c.get_double("lgt.rho_lambda");
  else if (br_rho)
    e.rho_lambda = c.get_double("br.rho_lambda");

  e.radius = c.get_double_or("lgt.radius",
                             std::numeric_limits<double>::infinity());
  e.p = c.get_double_or("lgt.p", 1.0);

  e.highway_count = static_cast<int>(c.get_int_or("highways.count", 0));
  e.highway_gamma = c.get_double_or("highways.gamma", 0.0);
  e.highway_direction =
      parse_direction(c.get_string_or("highways.direction",
                                      "per_gene_uniform"));
  e.gamma_lo = c.get_double_or("highways.gamma_lo", 0.1);

  e.genes = static_cast<int>(c.get_int_or("genes", 1));
  e.seq_k = static_cast<int>(c.get_int_or("seq.k", 1000));
  int k_override = 0;
  e.method = parse_method(c.get_string_or("method", "qp"), &k_override);
  if (k_override > 0) e.seq_k = k_override;

  if (c.has("gtr.pi")) {
    std::vector<double> pi = c.get_doubles("gtr.pi");
    if (pi.size() != 4)
      throw config_error("gtr.pi needs exactly 4 values");
    std::copy(pi.begin(), pi.end(), e.gtr_pi.begin());
  }
  if (c.has("gtr.rates")) {
    std::vector<double> rates = c.get_doubles("gtr.rates");
    if (rates.size() != 6)
      throw config_error("gtr.rates needs exactly 6 values");
    std::copy(rates.begin(), rates.end(), e.gtr_rates.begin());
  }

  e.trials = static_cast<int>(c.get_int_or("trials", 1));
  e.seed = c.get_seed_or("seed", 0);
  e.threads = static_cast<int>(c.get_int_or("threads", 1));
  e.out_dir = c.get_string_or("out", "");

  std::vector<std::string> leftover = c.unconsumed();
  if (!leftover.empty()) {
    std::string msg = "unknown config key(s):";
    for (const std::string& k : leftover) msg += " " + k;
    throw config_error(msg);
  }
  e.validate();
  return e;
}

void ExperimentConfig::validate() const {
  if (generator == GeneratorKind::newick) {
    if (newick_text.empty() && newick_path.empty())
      throw config_error("generator=newick requires newick.path");
  } else if (n < 2) {
    throw config_error("need at least two taxa");
  }
  if (generator == GeneratorKind::yule && !(nu > 0))
    throw config_error("yule.nu must be positive");
  if (generator == GeneratorKind::bounded_rates) {
    if (!(tau_bar > 0)) throw config_error("br.tau_bar must be positive");
    if (!(rho_tau > 0 && rho_tau <= 1))
      throw config_error("br.rho_tau must lie in (0, 1]");
  }
  if (!(rho_lambda > 0 && rho_lambda <= 1))
    throw config_error("rho_lambda must lie in (0, 1]");
  if (lambda_bar && lambda_target)
    throw config_error("lambda_bar and lambda_target are mutually exclusive");
  if (lambda_bar && *lambda_bar < 0)
    throw config_error("lambda_bar must be nonnegative");
  if (lambda_target && *lambda_target < 0)
    throw config_error("lgt.Lambda must be nonnegative");
  if (!(radius > 0)) throw config_error("lgt.radius must be positive");
  if (!(p > 0 && p <= 1)) throw config_error("lgt.p must lie in (0, 1]");
  if (highway_count < 0)
    throw config_error("highways.count must be nonnegative");
  if (highway_count > 0 && !(highway_gamma > 0 && highway_gamma < 1))
    throw config_error("highways.gamma must lie in (0, 1)");
  if (!(gamma_lo > 0 && gamma_lo < 1))
    throw config_error("highways.gamma_lo must lie in (0, 1)");
  if (genes < 1) throw config_error("genes must be at least 1");
  if (trials < 1) throw config_error("trials must be at least 1");
  if (threads < 1) throw config_error("threads must be at least 1");
  if (method == Method::mt_seq && seq_k < 1)
    throw config_error("seq.k must be at least 1");
  double pi_sum = 0;
  for (double v : gtr_pi) {
    if (!(v > 0)) throw config_error("gtr.pi entries must be positive");
    pi_sum += v;
  }
  if (std::abs(pi_sum - 1.0) > 1e-6)
    throw config_error("gtr.pi must sum to 1");
  for (double v : gtr_rates)
    if (!(v > 0)) throw config_error("gtr.rates entries must be positive");
}

std::uint64_t trial_seed(std::uint64_t base, int trial) {
  return derive_seed(base, 0x545249414cULL, static_cast<std::uint64_t>(trial));
}

SpeciesPhylogeny make_species_tree(const ExperimentConfig& c,
                                   std::uint64_t tree_seed) {
  double cap = c.lambda_target ? 1.0 : c.lambda_bar.value_or(0.0);
  SpeciesPhylogeny t = [&] {
    switch (c.generator) {
      case GeneratorKind::yule:
        return generate_yule({c.n, c.nu, cap, c.rho_lambda, tree_seed});
      case GeneratorKind::bounded_rates:
        return generate_bounded_rates({c.n, c.tau_bar, c.rho_tau, cap,
                                       c.rho_lambda, c.shape, tree_seed});
      case GeneratorKind::newick:
      default: {
        std::string text = c.newick_text;
        if (text.empty()) {
          std::ifstream in(c.newick_path);
          if (!in)
            throw config_error("cannot open newick file: " + c.newick_path);
          std::ostringstream buf;
          buf << in.rdbuf();
          text = buf.str();
        }
        return parse_newick(text, cap);
      }
    }
  }();
  if (c.lambda_target) {
    double w = lgt_weights(t).extant;
    if (!(w > 0))
      throw generation_error(
          "cannot target an LGT weight: drawn extant weight is zero");
    t = t.with_scaled_lambda(*c.lambda_target / w);
  }
  return t;
}

namespace {

struct ReconOutcome {
  std::optional<UnrootedTree> tree;
  std::string note;
  int saturated = 0;
};

ReconOutcome reconstruct_trial(const ExperimentConfig& c,
                               const std::vector<GeneRecord>& records,
                               const std::vector<Taxon>& taxa,
                               std::uint64_t tseed) {
  ReconOutcome out;
  try {
    std::vector<GeneTree> genes;
    for (const GeneRecord& r : records)
      if (r.tree) genes.push_back(*r.tree);
    if (genes.empty()) throw input_error("no gene survived taxon sampling");
    switch (c.method) {
      case Method::qp:
        out.tree = quartet_plurality(genes, taxa);
        break;
      case Method::mt:
        out.tree = median_tree(genes, taxa);
        break;
      case Method::mt_seq: {
        GtrModel model(c.gtr_pi, c.gtr_rates);
        std::vector<DistanceMatrix> mats;
        for (std::size_t g = 0; g < records.size(); ++g) {
          if (!records[g].tree) continue;
          std::mt19937_64 rng = derive_rng(tseed, stream::sequence, g);
          Alignment aln =
              evolve_sequences(*records[g].tree, model, c.seq_k, rng);
          int sat = 0;
          mats.push_back(logdet_matrix(aln, &sat));
          out.saturated += sat;
        }
        MedianDistance med = median_matrix(mats, taxa);
        out.tree = build_distance_tree(med.matrix);
        break;
      }
    }
  } catch (const error& e) {
    out.tree.reset();
    out.note = e.what();
  }
  return out;
}

TrialRecord run_one_trial(const ExperimentConfig& c, int trial) {
  auto start = std::chrono::steady_clock::now();
  TrialRecord rec;
  rec.trial = trial;
  std::uint64_t tseed = trial_seed(c.seed, trial);
  rec.seed = tseed;
  try {
    SpeciesPhylogeny t = make_species_tree(c, tseed);
    rec.lambda_tot = lgt_weights(t).total;
    HighwaySpec spec;
    const HighwaySpec* sp = nullptr;
    if (c.highway_count > 0) {
      spec = plant_highways(t, c.highway_count, c.highway_gamma,
                            c.highway_direction, tseed);
      sp = &spec;
    }
    LgtParams lp;
    lp.radius = c.radius;
    lp.p = c.p;
    lp.seed = tseed;
    std::vector<GeneRecord> records = generate_gene_trees(t, lp, c.genes, sp);
    for (const GeneRecord& r : records) {
      rec.events += static_cast<long long>(r.events.size());
      if (!r.tree) ++rec.discarded_genes;
    }
    UnrootedTree target = as_unrooted(t.extant_phylogeny());
    ReconOutcome recon = reconstruct_trial(c, records, t.extant_taxa(), tseed);
    rec.saturated_pairs = recon.saturated;
    if (recon.tree) {
      rec.rf = rf_distance(*recon.tree, target);
      rec.success = rec.rf == 0;
    } else {
      rec.note = recon.note;
    }
  } catch (const error& e) {
    rec.note = e.what();
  }
  rec.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return rec;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& c) {
  c.validate();
  ExperimentResult res;
  res.trials.resize(c.trials);
  int n_workers = std::max(1, std::min(c.threads, c.trials));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next.fetch_add(1); i < c.trials; i = next.fetch_add(1))
      res.trials[i] = run_one_trial(c, i);
  };
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (std::thread& th : pool) th.join();
  }
  long long rf_sum = 0;
  int rf_n = 0;
  for (const TrialRecord& r : res.trials) {
    if (r.success) ++res.successes;
    if (r.rf >= 0) {
      rf_sum += r.rf;
      ++rf_n;
    }
  }
  res.rate = static_cast<double>(res.successes) / c.trials;
  std::tie(res.ci_lo, res.ci_hi) = clopper_pearson(res.successes, c.trials);
  res.mean_rf = rf_n > 0 ? static_cast<double>(rf_sum) / rf_n : 0.0;
  return res;
}

std::string trials_csv(const std::vector<TrialRecord>& trials) {
  std::ostringstream out;
  out << "trial,seed,lambda_tot,events,success,rf,discarded_genes,"
         "saturated_pairs,note\n";
  for (const TrialRecord& r : trials) {
    out << r.trial << ',' << r.seed << ',' << fmt17(r.lambda_tot) << ','
        << r.events << ',' << (r.success ? 1 : 0) << ',' << r.rf << ','
        << r.discarded_genes << ',' << r.saturated_pairs << ','
        << csv_field(r.note) << '\n';
  }
  return out.str();
}

std::string summary_csv(const ExperimentResult& r) {
  std::ostringstream out;
  out << "trials,successes,rate,ci_lo,ci_hi,mean_rf\n";
  out << r.trials.size() << ',' << r.successes << ',' << fmt17(r.rate) << ','
      << fmt17(r.ci_lo) << ',' << fmt17(r.ci_hi) << ',' << fmt17(r.mean_rf)
      << '\n';
  return out.str();
}

SweepAxis sweep_axis_from(const std::string& name) {
  if (name == "Lambda" || name == "lambda") return SweepAxis::lambda;
  if (name == "R" || name == "radius") return SweepAxis::radius;
  if (name == "p") return SweepAxis::p;
  if (name == "N" || name == "genes") return SweepAxis::genes;
  if (name == "k") return SweepAxis::k;
  throw config_error("unknown sweep axis '" + name +
                     "' (expected Lambda, R, p, N or k)");
}

std::string sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::lambda: return "Lambda";
    case SweepAxis::radius: return "R";
    case SweepAxis::p: return "p";
    case SweepAxis::genes: return "N";
    case SweepAxis::k: return "k";
  }
  return "?";
}

SweepResult sweep(const ExperimentConfig& base, SweepAxis axis,
                  const std::vector<double>& grid) {
  if (grid.empty()) throw config_error("sweep grid is empty");
  SweepResult out;
  out.axis = axis;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ExperimentConfig cfg = base;
    cfg.seed = derive_seed(base.seed, 0x53574545ULL, i);
    double v = grid[i];
    switch (axis) {
      case SweepAxis::lambda:
        cfg.lambda_bar.reset();
        cfg.lambda_target = v;
        break;
      case SweepAxis::radius:
        cfg.radius = v;
        break;
      case SweepAxis::p:
        cfg.p = v;
        break;
      case SweepAxis::genes:
        cfg.genes = static_cast<int>(v);
        if (cfg.genes != v)
          throw config_error("N sweep values must be integers");
        break;
      case SweepAxis::k:
        cfg.seq_k = static_cast<int>(v);
        if (cfg.seq_k != v)
          throw config_error("k sweep values must be integers");
        break;
    }
    cfg.validate();
    out.points.push_back({v, run_experiment(cfg)});
  }
  return out;
}

std::string sweep_csv(const SweepResult& r) {
  std::ostringstream out;
  out << "axis,value,rate,ci_lo,ci_hi,mean_rf,trials\n";
  for (const SweepPoint& pt : r.points) {
    out << sweep_axis_name(r.axis) << ',' << fmt17(pt.value) << ','
        << fmt17(pt.result.rate) << ',' << fmt17(pt.result.ci_lo) << ','
        << fmt17(pt.result.ci_hi) << ',' << fmt17(pt.result.mean_rf) << ','
        << pt.result.trials.size() << '\n';
  }
  return out.str();
}

std::string sweep_plot_data(const SweepResult& r) {
  std::ostringstream out;
  out << "# " << sweep_axis_name(r.axis) << " success_rate\n";
  for (const SweepPoint& pt : r.points)
    out << fmt17(pt.value) << ' ' << fmt17(pt.result.rate) << '\n';
  return out.str();
}

std::string sweep_summary_json(const SweepResult& r) {
  nlohmann::json j;
  j["axis"] = sweep_axis_name(r.axis);
  j["points"] = nlohmann::json::array();
  for (const SweepPoint& pt : r.points) {
    j["points"].push_back({{"value", pt.value},
                           {"rate", pt.result.rate},
                           {"ci_lo", pt.result.ci_lo},
                           {"ci_hi", pt.result.ci_hi},
                           {"mean_rf", pt.result.mean_rf},
                           {"trials", pt.result.trials.size()},
                           {"successes", pt.result.successes}});
  }
  return j.dump(2) + "\n";
}

namespace {

HighwayTrial run_one_highway_trial(const ExperimentConfig& c, int trial) {
  HighwayTrial ht;
  ht.trial = trial;
  std::uint64_t tseed = trial_seed(c.seed, trial);
  ht.seed = tseed;
  try {
    SpeciesPhylogeny t = make_species_tree(c, tseed);
    HighwaySpec spec;
    const HighwaySpec* sp = nullptr;
    if (c.highway_count > 0) {
      spec = plant_highways(t, c.highway_count, c.highway_gamma,
                            c.highway_direction, tseed);
      sp = &spec;
      for (const Highway& h : spec.highways)
        ht.planted.emplace_back(h.edge0, h.edge1);
    }
    LgtParams lp;
    lp.radius = c.radius;
    lp.p = c.p;
    lp.seed = tseed;
    std::vector<GeneRecord> records = generate_gene_trees(t, lp, c.genes, sp);
    QuartetFrequencyTable table(t.extant_taxa());
    for (const GeneRecord& r : records)
      if (r.tree) table.add_gene(*r.tree);
    SuspectQuartetSet suspects = suspect_quartets(table, c.gamma_lo);
    UnrootedTree species_u = as_unrooted(t);
    SharedEdgeGraph graph = shared_edge_graph(suspects, species_u);
    ht.calls = locate_highways(graph, species_u);

    auto same_pair = [](const HighwayCall& call, std::pair<int, int> p2) {
      return (call.edge0 == p2.first && call.edge1 == p2.second) ||
             (call.edge0 == p2.second && call.edge1 == p2.first);
    };
    for (const auto& planted : ht.planted)
      for (const HighwayCall& call : ht.calls)
        if (call.ok && same_pair(call, planted)) {
          ++ht.matched;
          break;
        }
    for (const HighwayCall& call : ht.calls) {
      if (!call.ok) continue;
      bool hit = false;
      for (const auto& planted : ht.planted)
        if (same_pair(call, planted)) hit = true;
      if (!hit) ++ht.false_calls;
    }
    ht.all_recovered = ht.matched == static_cast<int>(ht.planted.size());
  } catch (const error& e) {
    ht.note = e.what();
    ht.all_recovered = false;
  }
  return ht;
}

}  // namespace

HighwayExperimentResult run_highway_experiment(const ExperimentConfig& c) {
  c.validate();
  HighwayExperimentResult res;
  res.trials.resize(c.trials);
  int n_workers = std::max(1, std::min(c.threads, c.trials));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next.fetch_add(1); i < c.trials; i = next.fetch_add(1))
      res.trials[i] = run_one_highway_trial(c, i);
  };
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (std::thread& th : pool) th.join();
  }
  for (const HighwayTrial& t : res.trials) {
    if (t.all_recovered) ++res.trials_all_recovered;
    if (t.false_calls == 0) ++res.trials_clean;
  }
  res.recovery_rate = static_cast<double>(res.trials_all_recovered) / c.trials;
  res.clean_rate = static_cast<double>(res.trials_clean) / c.trials;
  return res;
}

std::string highway_trials_csv(const HighwayExperimentResult& r) {
  std::ostringstream out;
  out << "trial,seed,planted,called,matched,false_calls,all_recovered,"
         "planted_pairs,called_pairs,note\n";
  for (const HighwayTrial& t : r.trials) {
    int called = 0;
    std::string planted, calls;
    for (const auto& [a, b] : t.planted) {
      if (!planted.empty()) planted += '|';
      planted += std::to_string(a) + ':' + std::to_string(b);
    }
    for (const HighwayCall& c : t.calls) {
      if (!c.ok) continue;
      ++called;
      if (!calls.empty()) calls += '|';
      calls += std::to_string(c.edge0) +
               (c.oriented ? ">" : "-") + std::to_string(c.edge1);
    }
    out << t.trial << ',' << t.seed << ',' << t.planted.size() << ','
        << called << ',' << t.matched << ',' << t.false_calls << ','
        << (t.all_recovered ? 1 : 0) << ',' << csv_field(planted) << ','
        << csv_field(calls) << ',' << csv_field(t.note) << '\n';
  }
  return out.str();
}

CoupledPair make_coupled_pair(int n, double events_per_edge) {
  if (n < 16 || (n & (n - 1)) != 0)
    throw config_error("coupled pair requires n a power of two >= 16");
  if (!(events_per_edge >= 0))
    throw config_error("events per edge must be nonnegative");
  BoundedRatesParams bp;
  bp.n_plus = n;
  bp.tau_bar = 1.0;
  bp.rho_tau = 1.0;
  bp.lambda_bar = events_per_edge;
  bp.rho_lambda = 1.0;
  bp.shape = TreeShape::complete_binary;
  bp.seed = 0;
  CoupledPair cp{generate_bounded_rates(bp), generate_bounded_rates(bp), {}};

  const SpeciesPhylogeny& f = cp.first;
  int root = f.root();
  int u1 = f.children(root)[0], u2 = f.children(root)[1];
  int a = f.children(u1)[0], b = f.children(u1)[1];
  int c = f.children(u2)[0], d = f.children(u2)[1];
  cp.abcd = {a, b, c, d};

  std::vector<SpeciesPhylogeny::Vertex> vs(f.n_vertices());
  for (int v = 0; v < f.n_vertices(); ++v) {
    vs[v].parent = f.parent(v);
    vs[v].child = f.children(v);
    vs[v].tau = f.tau(v);
    vs[v].lambda = f.lambda(v);
    vs[v].taxon = f.taxon(v);
    vs[v].extant = f.is_leaf(v) && f.extant(v);
  }
  for (int& ch : vs[u1].child)
    if (ch == b) ch = c;
  for (int& ch : vs[u2].child)
    if (ch == c) ch = b;
  vs[b].parent = u2;
  vs[c].parent = u1;
  cp.second = SpeciesPhylogeny(std::move(vs), root, f.name_table());
  return cp;
}

bool good_event(const std::vector<LgtEvent>& events,
                const std::array<int, 4>& abcd) {
  auto side = [&](int edge) {
    for (int i = 0; i < 4; ++i)
      if (abcd[i] == edge) return i;
    return -1;
  };
  for (std::size_t i = 0; i + 2 < events.size(); ++i) {
    int z = side(events[i].donor.edge);
    if (z < 0) continue;
    bool ok = true;
    bool seen[4] = {false, false, false, false};
    for (std::size_t j = i; j < i + 3 && ok; ++j) {
      if (side(events[j].donor.edge) != z) ok = false;
      int rcp = side(events[j].recipient.edge);
      if (rcp < 0 || rcp == z || seen[rcp]) ok = false;
      if (ok) seen[rcp] = true;
    }
    if (ok) return true;
  }
  return false;
}

CouplingReport nonrecoverability_demo(const CouplingParams& p) {
  if (p.genes < 1) throw config_error("coupling demo needs at least 1 gene");
  if (p.trials < 1) throw config_error("coupling demo needs at least 1 trial");
  CoupledPair cp = make_coupled_pair(p.n, p.events_per_edge);
  const double cut = 2.0;  // depth of the four swapped subtree roots

  CouplingReport rep;
  rep.trials = p.trials;
  for (int trial = 0; trial < p.trials; ++trial) {
    std::vector<std::string> keys1, keys2;
    for (int g = 0; g < p.genes; ++g) {
      std::mt19937_64 rng = derive_rng(p.seed, stream::events,
                                       static_cast<std::uint64_t>(trial),
                                       static_cast<std::uint64_t>(g));
      std::vector<LgtEvent> ev = sample_events(
          cp.first, std::numeric_limits<double>::infinity(), rng);
      ++rep.genes_total;
      if (good_event(ev, cp.abcd)) ++rep.good_genes;
      keys1.push_back(apply_events(cp.first, ev).topology_key());
      keys2.push_back(apply_events(cp.second, ev).topology_key());

      std::vector<ForestToken> f1 = trace_gene_forest(cp.first, ev, cut);
      std::vector<ForestToken> f2 = trace_gene_forest(cp.second, ev, cut);
      bool same = f1.size() == f2.size();
      for (std::size_t i = 0; same && i < f1.size(); ++i)
        same = f1[i].edge == f2[i].edge && f1[i].born == f2[i].born &&
               f1[i].subtree == f2[i].subtree;
      if (!same) rep.subtree_invariant_ok = false;
    }
    std::sort(keys1.begin(), keys1.end());
    std::sort(keys2.begin(), keys2.end());
    if (keys1 == keys2) ++rep.coincident_trials;
  }
  rep.coincidence_rate = static_cast<double>(rep.coincident_trials) / p.trials;
  rep.good_rate =
      static_cast<double>(rep.good_genes) / static_cast<double>(rep.genes_total);
  return rep;
}

std::string coupling_csv(const CouplingReport& r) {
  std::ostringstream out;
  out << "trials,coincident_trials,coincidence_rate,genes,good_genes,"
         "good_rate,subtree_invariant\n";
  out << r.trials << ',' << r.coincident_trials << ','
      << fmt6(r.coincidence_rate) << ',' << r.genes_total << ','
      << r.good_genes << ',' << fmt6(r.good_rate) << ','
      << (r.subtree_invariant_ok ? 1 : 0) << '\n';
  return out.str();
}

bool forced_triple_coincides(int n) {
  CoupledPair cp = make_coupled_pair(n, 1.0);
  auto [a, b, c, d] = cp.abcd;
  auto mk = [&](double t, int recipient) {
    LgtEvent e;
    e.t = t;
    e.recipient = {recipient, t - 1.0};
    e.donor = {a, t - 1.0};
    return e;
  };
  std::vector<LgtEvent> ev{mk(1.25, d), mk(1.5, c), mk(1.75, b)};
  return apply_events(cp.first, ev).topology_key() ==
         apply_events(cp.second, ev).topology_key();
}

}  // namespace lgt
