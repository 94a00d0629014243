#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace lgt {

using Taxon = int;  // dense 1-based labels; 0 is reserved for "none"

// Fixed-universe bitset over taxa 1..n. Used for clades and bipartitions.
class TaxonSet {
 public:
  TaxonSet() = default;
  explicit TaxonSet(int universe)
      : n_(universe), bits_((universe + 64) / 64, 0) {}

  int universe() const { return n_; }

  void insert(Taxon t) { bits_[word(t)] |= mask(t); }
  bool contains(Taxon t) const { return (bits_[word(t)] & mask(t)) != 0; }

  int count() const {
    int c = 0;
    for (auto w : bits_) c += __builtin_popcountll(w);
    return c;
  }

  TaxonSet complement() const {
    TaxonSet r(n_);
    for (Taxon t = 1; t <= n_; ++t)
      if (!contains(t)) r.insert(t);
    return r;
  }

  // Canonical side of a bipartition: the side not containing taxon 1
  // (so {A, A^c} maps to a unique representative).
  TaxonSet canonical_side() const {
    return contains(1) ? complement() : *this;
  }

  void unite(const TaxonSet& o) {
    for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= o.bits_[i];
  }

  std::vector<Taxon> members() const {
    std::vector<Taxon> r;
    for (Taxon t = 1; t <= n_; ++t)
      if (contains(t)) r.push_back(t);
    return r;
  }

  bool operator==(const TaxonSet& o) const {
    return n_ == o.n_ && bits_ == o.bits_;
  }
  bool operator<(const TaxonSet& o) const {
    if (n_ != o.n_) return n_ < o.n_;
    return bits_ < o.bits_;
  }

  std::size_t hash() const {
    std::size_t h = std::hash<int>()(n_);
    for (auto w : bits_) h ^= std::hash<std::uint64_t>()(w) + 0x9E3779B9 + (h << 6) + (h >> 2);
    return h;
  }

 private:
  static std::size_t word(Taxon t) { return static_cast<std::size_t>(t) / 64; }
  static std::uint64_t mask(Taxon t) { return 1ULL << (t % 64); }
  int n_ = 0;
  std::vector<std::uint64_t> bits_;
};

struct TaxonSetHash {
  std::size_t operator()(const TaxonSet& s) const { return s.hash(); }
};

}  // namespace lgt
