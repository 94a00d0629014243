#include "lgt/seq_sim.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lgt/errors.hpp"
#include "lgt/rng.hpp"

namespace lgt {

namespace {

constexpr char kAlphabet[4] = {'A', 'C', 'G', 'T'};

int state_of(char c) {
  switch (c) {
    case 'A': case 'a': return 0;
    case 'C': case 'c': return 1;
    case 'G': case 'g': return 2;
    case 'T': case 't': case 'U': case 'u': return 3;
    default: return -1;
  }
}

}  // namespace

GtrModel::GtrModel(const std::array<double, 4>& pi,
                   const std::array<double, 6>& rates, double r_min,
                   double r_max) {
  double sum = 0.0;
  for (double x : pi) {
    if (!(x > 0.0)) throw config_error("gtr.pi entries must be positive");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw config_error("gtr.pi must sum to 1");
  for (double r : rates) {
    if (!(r > 0.0)) throw config_error("gtr.rates entries must be positive");
    if (r < r_min || r > r_max)
      throw config_error("gtr rate outside the configured bounds");
  }
  pi_ = pi;

  // Upper-triangle order (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
  double ex[4][4] = {};
  int k = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      ex[i][j] = ex[j][i] = rates[k++];
    }
  Eigen::Matrix4d q;
  for (int i = 0; i < 4; ++i) {
    double row = 0.0;
    for (int j = 0; j < 4; ++j)
      if (j != i) {
        q(i, j) = ex[i][j] * pi_[j];
        row += q(i, j);
      }
    q(i, i) = -row;
  }
  double scale = 0.0;
  for (int i = 0; i < 4; ++i) scale -= pi_[i] * q(i, i);
  if (!(scale > 0.0)) throw config_error("gtr rate matrix degenerates to zero");
  q /= scale;

  // Reversibility makes D^{1/2} Q D^{-1/2} symmetric; its spectrum gives
  // P(t) = D^{-1/2} U exp(L t) U^T D^{1/2}.
  Eigen::Vector4d sq, isq;
  for (int i = 0; i < 4; ++i) {
    sq(i) = std::sqrt(pi_[i]);
    isq(i) = 1.0 / sq(i);
  }
  Eigen::Matrix4d sym = sq.asDiagonal() * q * isq.asDiagonal();
  sym = (sym + sym.transpose()) / 2;  // exact symmetry for the solver
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eigen(sym);
  if (eigen.info() != Eigen::Success)
    throw model_error("substitution model eigendecomposition failed");
  Eigen::Matrix4d left = isq.asDiagonal() * eigen.eigenvectors();
  Eigen::Matrix4d right = eigen.eigenvectors().transpose() * sq.asDiagonal();
  for (int i = 0; i < 4; ++i) {
    eigenvalues_[i] = eigen.eigenvalues()(i);
    for (int j = 0; j < 4; ++j) {
      q_[i * 4 + j] = q(i, j);
      left_[i * 4 + j] = left(i, j);
      right_[i * 4 + j] = right(i, j);
    }
  }

  // Construction guarantees these; verify to catch conditioning problems.
  for (int i = 0; i < 4; ++i) {
    double row = 0.0, stat = 0.0;
    for (int j = 0; j < 4; ++j) {
      row += q_[i * 4 + j];
      stat += pi_[j] * q_[j * 4 + i];
    }
    if (std::abs(row) > 1e-12 || std::abs(stat) > 1e-12)
      throw model_error("substitution model violates stationarity bounds");
  }
  double norm = 0.0;
  for (int i = 0; i < 4; ++i) norm -= pi_[i] * q_[i * 4 + i];
  if (std::abs(norm - 1.0) > 1e-12)
    throw model_error("substitution model normalization drifted");
}

GtrModel GtrModel::jukes_cantor() {
  return GtrModel({0.25, 0.25, 0.25, 0.25}, {1, 1, 1, 1, 1, 1});
}

std::array<double, 16> GtrModel::transition(double t) const {
  std::array<double, 16> p{};
  double e[4];
  for (int i = 0; i < 4; ++i) e[i] = std::exp(eigenvalues_[i] * t);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double v = 0.0;
      for (int m = 0; m < 4; ++m)
        v += left_[i * 4 + m] * e[m] * right_[m * 4 + j];
      p[i * 4 + j] = v;
    }
  // Numerical hygiene: clamp round-off and renormalize each row.
  for (int i = 0; i < 4; ++i) {
    double row = 0.0;
    for (int j = 0; j < 4; ++j) {
      p[i * 4 + j] = std::max(0.0, p[i * 4 + j]);
      row += p[i * 4 + j];
    }
    if (!(row > 0.0)) throw model_error("transition matrix row vanished");
    for (int j = 0; j < 4; ++j) p[i * 4 + j] /= row;
  }
  return p;
}

int Alignment::index_of(Taxon t) const {
  auto it = std::lower_bound(taxa.begin(), taxa.end(), t);
  if (it == taxa.end() || *it != t) return -1;
  return static_cast<int>(it - taxa.begin());
}

Alignment evolve_sequences(const GeneTree& gene, const GtrModel& model, int k,
                           std::mt19937_64& rng) {
  if (k < 1) throw config_error("sequence length must be at least 1");
  int n = gene.n_nodes();
  for (int i = 0; i < n; ++i)
    if (i != gene.stored_root() && !(gene.node(i).length >= 0.0))
      throw input_error("gene tree has a negative branch length");

  // Root-first order.
  std::vector<int> order{gene.stored_root()};
  for (std::size_t q = 0; q < order.size(); ++q)
    for (int c : gene.node(order[q]).child) order.push_back(c);

  std::vector<std::array<double, 16>> trans(n);
  for (int i : order)
    if (i != gene.stored_root())
      trans[i] = model.transition(gene.node(i).length);

  std::vector<std::vector<std::uint8_t>> state(
      n, std::vector<std::uint8_t>(k));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](const double* dist) {
    double u = unit(rng), acc = 0.0;
    for (int s = 0; s < 3; ++s) {
      acc += dist[s];
      if (u < acc) return s;
    }
    return 3;
  };
  const std::array<double, 4>& pi = model.pi();
  for (int site = 0; site < k; ++site)
    state[gene.stored_root()][site] =
        static_cast<std::uint8_t>(draw(pi.data()));
  for (int i : order) {
    if (i == gene.stored_root()) continue;
    const std::vector<std::uint8_t>& up = state[gene.node(i).parent];
    std::vector<std::uint8_t>& down = state[i];
    const std::array<double, 16>& p = trans[i];
    for (int site = 0; site < k; ++site)
      down[site] = static_cast<std::uint8_t>(draw(&p[up[site] * 4]));
  }

  Alignment aln;
  aln.taxa = gene.taxa();
  aln.seq.reserve(aln.taxa.size());
  for (Taxon t : aln.taxa) aln.seq.push_back(std::move(state[gene.node_of(t)]));
  return aln;
}

Alignment evolve_sequences(const GeneTree& gene, const GtrModel& model, int k,
                           std::uint64_t seed) {
  std::mt19937_64 rng = derive_rng(seed, stream::sequence);
  return evolve_sequences(gene, model, k, rng);
}

namespace {

double logdet_from_rows(const std::vector<std::uint8_t>& sa,
                        const std::vector<std::uint8_t>& sb) {
  int k = static_cast<int>(sa.size());
  Eigen::Matrix4d f = Eigen::Matrix4d::Zero();
  for (int i = 0; i < k; ++i) f(sa[i], sb[i]) += 1.0;
  f /= k;
  double det = f.determinant();
  if (!(det > 0.0))
    throw saturation_error(
        "joint frequency matrix is singular; log-det distance undefined at "
        "this sequence length");
  double marg = 0.0;
  for (int s = 0; s < 4; ++s) {
    double fa = f.row(s).sum(), fb = f.col(s).sum();
    if (!(fa > 0.0) || !(fb > 0.0))
      throw saturation_error("a state is absent from one sequence");
    marg += std::log(fa) + std::log(fb);
  }
  return -0.25 * (std::log(det) - 0.5 * marg);
}

}  // namespace

double logdet_distance(const Alignment& aln, Taxon a, Taxon b) {
  int ia = aln.index_of(a), ib = aln.index_of(b);
  if (ia < 0 || ib < 0)
    throw input_error("log-det distance: taxon not in alignment");
  if (aln.length() < 1) throw input_error("log-det distance: empty alignment");
  if (ia == ib) return 0.0;
  return logdet_from_rows(aln.seq[ia], aln.seq[ib]);
}

DistanceMatrix logdet_matrix(const Alignment& aln, int* n_saturated) {
  DistanceMatrix d(aln.taxa);
  int n = d.size();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      try {
        d.set(i, j, logdet_from_rows(aln.seq[i], aln.seq[j]));
      } catch (const saturation_error&) {
        d.set(i, j, std::numeric_limits<double>::quiet_NaN());
        if (n_saturated) ++*n_saturated;
      }
    }
  return d;
}

std::string phylip(const Alignment& aln,
                   const std::vector<std::string>& names) {
  std::ostringstream out;
  out << aln.taxa.size() << ' ' << aln.length() << '\n';
  for (std::size_t i = 0; i < aln.taxa.size(); ++i) {
    if (aln.taxa[i] < 0 || aln.taxa[i] >= static_cast<Taxon>(names.size()))
      throw input_error("alignment taxon has no name");
    out << names[aln.taxa[i]] << ' ';
    for (std::uint8_t s : aln.seq[i]) out << kAlphabet[s];
    out << '\n';
  }
  return out.str();
}

Alignment parse_phylip(const std::string& text,
                       const std::vector<std::string>& names) {
  std::istringstream in(text);
  int n = 0, k = 0;
  if (!(in >> n >> k) || n < 1 || k < 1)
    throw parse_error("phylip: bad header");
  std::vector<std::pair<Taxon, std::vector<std::uint8_t>>> rows;
  for (int i = 0; i < n; ++i) {
    std::string name, seq;
    if (!(in >> name >> seq)) throw parse_error("phylip: truncated record");
    Taxon taxon = 0;
    for (std::size_t t = 1; t < names.size(); ++t)
      if (names[t] == name) {
        taxon = static_cast<Taxon>(t);
        break;
      }
    if (taxon == 0) throw parse_error("phylip: unknown taxon name " + name);
    if (static_cast<int>(seq.size()) != k)
      throw parse_error("phylip: sequence length mismatch for " + name);
    std::vector<std::uint8_t> states(k);
    for (int s = 0; s < k; ++s) {
      int v = state_of(seq[s]);
      if (v < 0) throw parse_error("phylip: unexpected character in sequence");
      states[s] = static_cast<std::uint8_t>(v);
    }
    rows.emplace_back(taxon, std::move(states));
  }
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  Alignment aln;
  for (auto& [taxon, states] : rows) {
    if (!aln.taxa.empty() && aln.taxa.back() == taxon)
      throw parse_error("phylip: duplicate taxon");
    aln.taxa.push_back(taxon);
    aln.seq.push_back(std::move(states));
  }
  return aln;
}

}  // namespace lgt
