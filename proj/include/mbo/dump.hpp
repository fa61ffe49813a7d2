#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "mbo/schemes.hpp"

namespace mbo {

class DumpError : public std::runtime_error {
 public:
  explicit DumpError(const std::string& what) : std::runtime_error(what) {}
};

/// One stored field. Two-phase files (phases=2) load as PhaseField.
struct Dump {
  State state;
  double h = 0.0;
  int step = 0;
};

/// Text header
///   MBOF1 / dim=<d> / n=<n0,n1[,n2]> / side=<L> / h=<h> / step=<k> / phases=<P+1>
/// then a blank line and one byte per cell (row-major, x fastest). Floats
/// use 17 significant digits, so a write/read round trip is exact. A box
/// with unequal sides writes a comma-separated side list.
void write_dump(std::ostream& out, const State& state, double h, int step);
void write_dump_file(const std::string& path, const State& state, double h, int step);

/// Throws DumpError naming the offending line or byte.
Dump read_dump(std::istream& in);
Dump read_dump_file(const std::string& path);

/// Reinterprets a two-phase dump as a single-grain state, or returns the
/// multiphase state unchanged.
MultiPhaseState as_multiphase(const State& state);

}  // namespace mbo
