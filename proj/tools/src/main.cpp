#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lgt/config.hpp"
#include "lgt/errors.hpp"
#include "lgt/experiment.hpp"
#include "lgt/highway_infer.hpp"
#include "lgt/median_tree.hpp"
#include "lgt/newick.hpp"
#include "lgt/quartet_plurality.hpp"
#include "lgt/species_sim.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonOpts* o, bool config_required) {
  auto* c = cmd->add_option("-c,--config", o->config_path,
                            "key = value configuration file");
  if (config_required) c->required();
  cmd->add_option("--set", o->overrides,
                  "override a config key (key=value, repeatable)");
  cmd->add_option("--seed", o->seed, "override the base seed");
  cmd->add_option("--threads", o->threads, "worker threads for trials");
  cmd->add_option("--out", o->out, "output directory");
}

lgt::ExperimentConfig load_config(const CommonOpts& o) {
  lgt::Config raw = o.config_path.empty()
                        ? lgt::Config()
                        : lgt::Config::parse_file(o.config_path);
  for (const std::string& kv : o.overrides) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw lgt::config_error("--set expects key=value, got '" + kv + "'");
    raw.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) raw.set("seed", std::to_string(*o.seed));
  if (o.threads) raw.set("threads", std::to_string(*o.threads));
  if (o.out) raw.set("out", *o.out);
  return lgt::ExperimentConfig::from(raw);
}

void write_file(const std::string& dir, const std::string& name,
                const std::string& content) {
  if (dir.empty()) return;
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / name, std::ios::binary);
  if (!out)
    throw lgt::config_error("cannot write " + (fs::path(dir) / name).string());
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw lgt::config_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Leaf labels of a Newick text in order of first appearance, for building
// a taxon table when no species tree supplies one. The extinct marker
// suffix is stripped; the numeric token after each ':' is a branch length.
std::vector<std::string> discover_labels(const std::string& text) {
  std::vector<std::string> names{""};
  auto add = [&](std::string tok) {
    if (tok.size() > 2 && tok.compare(tok.size() - 2, 2, "!x") == 0)
      tok.resize(tok.size() - 2);
    if (tok.empty()) return;
    for (const std::string& n : names)
      if (n == tok) return;
    names.push_back(tok);
  };
  const std::string special = "(),:;";
  auto is_plain = [&](char ch) {
    return special.find(ch) == std::string::npos &&
           std::isspace(static_cast<unsigned char>(ch)) == 0;
  };
  std::size_t i = 0;
  while (i < text.size()) {
    char ch = text[i];
    if (ch == ':') {
      ++i;
      while (i < text.size() && is_plain(text[i])) ++i;  // length token
      continue;
    }
    if (!is_plain(ch)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_plain(text[j])) ++j;
    add(text.substr(i, j - i));
    i = j;
  }
  return names;
}

std::string direction_name(lgt::HighwayDirection d) {
  switch (d) {
    case lgt::HighwayDirection::fixed01: return "fixed01";
    case lgt::HighwayDirection::fixed10: return "fixed10";
    case lgt::HighwayDirection::per_gene_uniform: return "per_gene_uniform";
  }
  return "?";
}

int cmd_simulate(const CommonOpts& opts) {
  lgt::ExperimentConfig cfg = load_config(opts);
  std::uint64_t tseed = lgt::trial_seed(cfg.seed, 0);
  lgt::SpeciesPhylogeny tree = lgt::make_species_tree(cfg, tseed);
  lgt::LgtWeights w = lgt::lgt_weights(tree);

  lgt::HighwaySpec spec;
  const lgt::HighwaySpec* sp = nullptr;
  if (cfg.highway_count > 0) {
    spec = lgt::plant_highways(tree, cfg.highway_count, cfg.highway_gamma,
                               cfg.highway_direction, tseed);
    sp = &spec;
  }
  lgt::LgtParams lp;
  lp.radius = cfg.radius;
  lp.p = cfg.p;
  lp.seed = tseed;
  std::vector<lgt::GeneRecord> records =
      lgt::generate_gene_trees(tree, lp, cfg.genes, sp);

  long long events = 0, discarded = 0, discards_ball = 0;
  std::ostringstream genes_nwk;
  for (const lgt::GeneRecord& r : records) {
    events += static_cast<long long>(r.events.size());
    discards_ball += r.empty_ball_discards;
    if (r.tree)
      genes_nwk << lgt::emit_newick(*r.tree, tree.name_table()) << '\n';
    else
      ++discarded;
  }

  write_file(cfg.out_dir, "species.nwk", lgt::emit_newick(tree) + "\n");
  write_file(cfg.out_dir, "extant.nwk",
             lgt::emit_newick(tree.extant_phylogeny()) + "\n");
  write_file(cfg.out_dir, "lambda.csv", lgt::lambda_csv(tree));
  write_file(cfg.out_dir, "genes.nwk", genes_nwk.str());
  write_file(cfg.out_dir, "events.csv", lgt::events_csv(records));
  if (sp != nullptr) {
    std::ostringstream hw;
    hw << "highway,edge0_child_vertex,edge1_child_vertex,gamma,direction\n";
    for (std::size_t b = 0; b < spec.highways.size(); ++b) {
      const lgt::Highway& h = spec.highways[b];
      hw << b << ',' << h.edge0 << ',' << h.edge1 << ',' << h.gamma << ','
         << direction_name(h.direction) << '\n';
    }
    write_file(cfg.out_dir, "planted_highways.csv", hw.str());
  }

  std::cout << "leaves " << tree.n_leaves() << " (extant " << tree.n_extant()
            << "), genes " << cfg.genes << ", events " << events
            << ", discarded_genes " << discarded << ", empty_ball_discards "
            << discards_ball << "\n"
            << "lgt_weight total " << w.total << " extant " << w.extant
            << " max_pair " << w.max_pair << " max_quartet " << w.max_quartet
            << (w.quartet_exact ? "" : " (bound)") << "\n";
  if (cfg.out_dir.empty())
    std::cout << "(no --out directory: files not written)\n";
  return 0;
}

int cmd_reconstruct(const CommonOpts& opts, const std::string& genes_path,
                    const std::string& species_path) {
  lgt::Config raw = opts.config_path.empty()
                        ? lgt::Config()
                        : lgt::Config::parse_file(opts.config_path);
  for (const std::string& kv : opts.overrides) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw lgt::config_error("--set expects key=value, got '" + kv + "'");
    raw.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  std::string method = raw.get_string_or("method", "qp");
  if (method != "qp" && method != "mt")
    throw lgt::config_error(
        "reconstruct works from gene trees; method must be qp or mt");
  std::string out_dir = opts.out.value_or(raw.get_string_or("out", ""));
  std::string text = read_file(genes_path);

  std::vector<std::string> names;
  std::optional<lgt::SpeciesPhylogeny> species;
  if (!species_path.empty()) {
    species = lgt::parse_newick(read_file(species_path));
    names = species->name_table();
  } else {
    names = discover_labels(text);
  }
  std::vector<lgt::GeneTree> genes = lgt::parse_newick_list(text, names);
  if (genes.empty()) throw lgt::input_error("no gene trees in " + genes_path);

  std::vector<lgt::Taxon> taxa;
  if (species) {
    taxa = species->extant_taxa();
  } else {
    std::set<lgt::Taxon> all;
    for (const lgt::GeneTree& g : genes)
      for (lgt::Taxon t : g.taxa()) all.insert(t);
    taxa.assign(all.begin(), all.end());
  }

  lgt::UnrootedTree result = [&] {
    if (method == "mt") return lgt::median_tree(genes, taxa);
    lgt::QuartetFrequencyTable table(taxa);
    for (const lgt::GeneTree& g : genes) table.add_gene(g);
    lgt::QuartetCover cover = lgt::plurality_cover(table);
    write_file(out_dir, "cover.csv", lgt::cover_csv(table, cover));
    return lgt::tree_from_cover(cover);
  }();

  std::string nwk = lgt::emit_newick(result, names, method == "mt") + "\n";
  write_file(out_dir, "tree.nwk", nwk);
  std::cout << nwk;
  if (species) {
    lgt::UnrootedTree target = lgt::as_unrooted(species->extant_phylogeny());
    std::cout << "rf_distance " << lgt::rf_distance(result, target) << "\n";
  }
  return 0;
}

int cmd_experiment(const CommonOpts& opts) {
  lgt::ExperimentConfig cfg = load_config(opts);
  lgt::ExperimentResult res = lgt::run_experiment(cfg);
  write_file(cfg.out_dir, "trials.csv", lgt::trials_csv(res.trials));
  write_file(cfg.out_dir, "summary.csv", lgt::summary_csv(res));
  std::ostringstream timing;
  timing << "trial,runtime_s\n";
  for (const lgt::TrialRecord& r : res.trials)
    timing << r.trial << ',' << r.runtime_s << '\n';
  write_file(cfg.out_dir, "timings.csv", timing.str());
  std::cout << "trials " << res.trials.size() << " successes "
            << res.successes << " rate " << res.rate << " ci [" << res.ci_lo
            << ", " << res.ci_hi << "] mean_rf " << res.mean_rf << "\n";
  return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::string& axis_name,
              const std::vector<double>& grid) {
  lgt::ExperimentConfig cfg = load_config(opts);
  lgt::SweepAxis axis = lgt::sweep_axis_from(axis_name);
  lgt::SweepResult res = lgt::sweep(cfg, axis, grid);
  std::string csv = lgt::sweep_csv(res);
  write_file(cfg.out_dir, "sweep.csv", csv);
  write_file(cfg.out_dir, "sweep.dat", lgt::sweep_plot_data(res));
  write_file(cfg.out_dir, "sweep.json", lgt::sweep_summary_json(res));
  std::cout << csv;
  return 0;
}

int cmd_highways(const CommonOpts& opts) {
  lgt::ExperimentConfig cfg = load_config(opts);
  lgt::HighwayExperimentResult res = lgt::run_highway_experiment(cfg);
  write_file(cfg.out_dir, "highway_trials.csv", lgt::highway_trials_csv(res));
  if (!res.trials.empty())
    write_file(cfg.out_dir, "highways.csv",
               lgt::highways_csv(res.trials.front().calls));
  std::cout << "trials " << res.trials.size() << " all_recovered "
            << res.trials_all_recovered << " (rate " << res.recovery_rate
            << ") clean " << res.trials_clean << " (rate " << res.clean_rate
            << ")\n";
  return 0;
}

int cmd_nonrecover(const CommonOpts& opts, const lgt::CouplingParams& base) {
  lgt::CouplingParams p = base;
  if (opts.seed) p.seed = *opts.seed;
  lgt::CouplingReport rep = lgt::nonrecoverability_demo(p);
  bool forced = lgt::forced_triple_coincides(p.n);
  std::string dir = opts.out.value_or("");
  write_file(dir, "coupling.csv", lgt::coupling_csv(rep));
  std::cout << "trials " << rep.trials << " coincident "
            << rep.coincident_trials << " (rate " << rep.coincidence_rate
            << ")\ngood_genes " << rep.good_genes << "/" << rep.genes_total
            << " (rate " << rep.good_rate << ")\nsubtree_invariant "
            << (rep.subtree_invariant_ok ? "ok" : "VIOLATED")
            << "\nforced_triple_identical " << (forced ? "ok" : "FAILED")
            << "\n";
  return rep.subtree_invariant_ok && forced ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lateral gene transfer simulation and reconstruction toolkit"};
  app.require_subcommand(1);

  CommonOpts sim_opts, rec_opts, exp_opts, sweep_opts, hw_opts, nr_opts;

  CLI::App* sim = app.add_subcommand(
      "simulate", "Generate a species tree and gene trees");
  add_common(sim, &sim_opts, true);

  CLI::App* rec = app.add_subcommand(
      "reconstruct", "Reconstruct a species topology from gene trees");
  std::string genes_path, species_path;
  add_common(rec, &rec_opts, false);
  rec->add_option("--genes", genes_path, "multi-tree Newick file, one per line")
      ->required();
  rec->add_option("--species", species_path,
                  "true species tree for the name table and an RF report");

  CLI::App* exp = app.add_subcommand(
      "experiment", "Monte Carlo recovery-rate experiment");
  add_common(exp, &exp_opts, true);

  CLI::App* swp = app.add_subcommand("sweep", "Experiment over a value grid");
  std::string axis;
  std::vector<double> grid;
  add_common(swp, &sweep_opts, true);
  swp->add_option("--axis", axis, "Lambda, R, p, N or k")->required();
  swp->add_option("--grid", grid, "axis values")->required()->delimiter(',');

  CLI::App* hw = app.add_subcommand(
      "highways", "Plant and detect transfer highways");
  add_common(hw, &hw_opts, true);

  CLI::App* nr = app.add_subcommand(
      "nonrecover", "Coupled-pair non-recoverability demonstration");
  lgt::CouplingParams nr_params;
  add_common(nr, &nr_opts, false);
  nr->add_option("--n", nr_params.n, "leaves (power of two >= 16)");
  nr->add_option("--events-per-edge", nr_params.events_per_edge,
                 "expected LGT events per edge per gene");
  nr->add_option("--genes", nr_params.genes, "genes per trial");
  nr->add_option("--trials", nr_params.trials, "number of coupled trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // bad flags are configuration errors
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_opts);
    if (rec->parsed()) return cmd_reconstruct(rec_opts, genes_path,
                                              species_path);
    if (exp->parsed()) return cmd_experiment(exp_opts);
    if (swp->parsed()) return cmd_sweep(sweep_opts, axis, grid);
    if (hw->parsed()) return cmd_highways(hw_opts);
    if (nr->parsed()) return cmd_nonrecover(nr_opts, nr_params);
  } catch (const lgt::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const lgt::parse_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const lgt::error& e) {
    std::cerr << "model violation: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
