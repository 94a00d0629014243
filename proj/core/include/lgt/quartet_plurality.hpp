#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "lgt/unrooted_tree.hpp"

namespace lgt {

// Per-four-tuple split counts over a gene collection. Four-tuples of the
// working taxon set are indexed by colexicographic rank; each entry records
// how many genes display the tuple and how many of those resolve each of
// the three splits (canonical order: lowest taxon paired with the second,
// third, fourth).
class QuartetFrequencyTable {
 public:
  explicit QuartetFrequencyTable(std::vector<Taxon> taxa);

  // Counts every four-tuple of the gene's leaves (which must all belong to
  // the working taxon set). Throws model_error if the gene displays an
  // unresolved four-tuple.
  void add_gene(const GeneTree& gene);

  const std::vector<Taxon>& taxa() const { return taxa_; }
  int n_taxa() const { return static_cast<int>(taxa_.size()); }
  std::size_t n_four_tuples() const { return count_.size(); }

  // `x` must be a sorted four-tuple of working taxa.
  std::size_t rank(const std::array<Taxon, 4>& x) const;
  std::array<Taxon, 4> four_tuple(std::size_t rank) const;

  int displayed(std::size_t rank) const { return shown_[rank]; }
  const std::array<int, 3>& counts(std::size_t rank) const {
    return count_[rank];
  }
  // Split frequencies; all zero when no gene displays the tuple.
  std::array<double, 3> frequencies(std::size_t rank) const;

 private:
  std::vector<Taxon> taxa_;
  std::vector<int> pos_;  // taxon -> position in taxa_, -1 absent
  std::vector<std::array<int, 3>> count_;
  std::vector<int> shown_;
};

QuartetFrequencyTable quartet_frequencies(const std::vector<GeneTree>& genes,
                                          const std::vector<Taxon>& taxa);

// One chosen split per four-tuple.
struct CoverEntry {
  std::array<Taxon, 4> taxa{};
  int split = 0;
  bool tie = false;      // several splits shared the top count
  bool covered = true;   // false: no gene displayed the tuple
};

struct QuartetCover {
  std::vector<Taxon> taxa;
  std::vector<CoverEntry> entries;  // rank order
};

// Most frequent split per tuple, ties resolved toward the canonical order.
// Undisplayed tuples throw input_error unless `allow_partial`, in which
// case they are marked uncovered.
QuartetCover plurality_cover(const QuartetFrequencyTable& table,
                             bool allow_partial = false);

// Assembles the binary tree agreeing with every covered entry by repeated
// cherry contraction ((a,b) is a cherry when every covered tuple {a,b,c,d}
// pairs a with b), then verifies the result against the whole cover.
// Throws incompatible_cover_error carrying a violated four-tuple if the
// verification fails. Branch lengths are zero; only the topology is
// meaningful.
UnrootedTree tree_from_cover(const QuartetCover& cover);

// Frequency aggregation, plurality choice and assembly in sequence.
UnrootedTree quartet_plurality(const std::vector<GeneTree>& genes,
                               const std::vector<Taxon>& taxa);

// a,b,c,d,m,f1,f2,f3,chosen - chosen is the 1-based split index, empty for
// uncovered tuples.
std::string cover_csv(const QuartetFrequencyTable& table,
                      const QuartetCover& cover);

}  // namespace lgt
