#pragma once

#include <stdexcept>
#include <string>

namespace lgt {

// Base class for all library errors.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid arguments: unknown taxa, bad tuple sizes, malformed matrices.
struct input_error : error {
  using error::error;
};

// Newick / CSV / config syntax problems.
struct parse_error : error {
  using error::error;
};

// Configuration schema violations (unknown key, missing required key,
// mutually exclusive keys both set).
struct config_error : error {
  using error::error;
};

// Violations of model assumptions: non-contemporaneous event locations,
// invalid highway placements, ill-conditioned substitution models.
struct model_error : error {
  using error::error;
};

// A random generator could not satisfy its constraints (e.g. ultrametric
// stretch infeasible after the retry budget).
struct generation_error : error {
  using error::error;
};

// A quartet cover admits no tree; carries a witness four-tuple.
struct incompatible_cover_error : error {
  incompatible_cover_error(const std::string& msg, int a, int b, int c, int d)
      : error(msg), witness{a, b, c, d} {}
  int witness[4];
};

// A taxon pair is displayed by no gene, so no median distance exists.
struct unsupported_pair_error : error {
  unsupported_pair_error(const std::string& msg, int a_, int b_)
      : error(msg), a(a_), b(b_) {}
  int a, b;
};

// Log-det distance undefined: empirical joint matrix singular at this
// sequence length.
struct saturation_error : error {
  using error::error;
};

// A highway component could not be resolved (non-path union, ambiguous
// candidates); aborts are per component and carry a diagnostic.
struct highway_abort : error {
  using error::error;
};

}  // namespace lgt
