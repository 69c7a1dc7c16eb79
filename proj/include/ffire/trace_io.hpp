#ifndef FFIRE_TRACE_IO_HPP
#define FFIRE_TRACE_IO_HPP

#include <string>

#include "ffire/types.hpp"

namespace ffire {

// Trace files. For an output path P:
//   P            CSV, one record per (t, k, v_k), zeros skipped
//   P.meta.json  sidecar: regime, seed, K/n, lambda, schema version, and the
//                per-sample scalars (theta, phi, flow totals, max cluster)
//   P.phi.csv    (t, phi_flux, phi_tailfit) when phi was recorded
//   P.flowq.csv  (t, k, l, q) coagulation counters (bit-exact integers)
//   P.flowr.csv  (t, k, r) burn counters; k = "inf" rows carry r_infinity
// Floats are written with 17 significant digits so re-parsing is exact;
// finite-n counters are exact integers. Writes are atomic (temp + rename).
// Readers reject unknown schema versions.

inline constexpr int kTraceSchemaVersion = 1;

void write_trace(const EvolutionTrace& trace, const std::string& path);

EvolutionTrace read_trace(const std::string& path);

/// "%.17g" formatting used across all emitted tables.
std::string format_double(double x);

/// Atomic text-file write helper (temp file + rename).
void atomic_write(const std::string& path, const std::string& content);

}  // namespace ffire

#endif
