#ifndef FFIRE_MCSIM_HPP
#define FFIRE_MCSIM_HPP

#include <map>

#include "ffire/fenwick.hpp"
#include "ffire/rng.hpp"
#include "ffire/types.hpp"

namespace ffire {

// Exact continuous-time simulation of the n-vertex coagulation/burning
// Markov chain, with flow recording.
//
// The event clock runs at the constant total rate (n-1)/2 + lambda n:
// unordered distinct-vertex pairs arrive at rate (n-1)/2 and same-cluster
// pairs are rejected (which reproduces the V_i(V_j - j 1{i=j}) pair counts
// exactly); lightning hits a uniform vertex at rate lambda n, burning a
// size-1 cluster is a recorded no-op (r_1 = 0 always).

struct EventKind {
    enum class Tag { Coagulate, Burn, RejectedInternalEdge } tag;
    double dt;                // exponential waiting time consumed
    std::uint32_t size_a = 0; // Coagulate: both sizes; Burn: size_a
    std::uint32_t size_b = 0;
};

class ClusterState {
  public:
    /// Monodisperse start: n singleton clusters.
    explicit ClusterState(std::uint64_t n);

    std::uint64_t n() const { return n_; }
    std::size_t cluster_count() const { return live_; }
    /// sum of size^2 over clusters (= sum_k k V_k).
    std::int64_t sum_sq() const { return sum_sq_; }
    std::uint32_t max_cluster() const {
        return hist_.empty() ? 0 : hist_.rbegin()->first;
    }
    /// size -> number of clusters of that size.
    const std::map<std::uint32_t, std::uint32_t>& histogram() const { return hist_; }
    /// size -> V_k = k * (count), as int64.
    std::map<std::uint32_t, std::int64_t> mass_histogram() const;

    /// Mass fractions v_k for k <= record_k; beyond-truncation mass goes to
    /// theta.
    SizeDistribution distribution(int record_k) const;

    /// Slot sampling / surgery used by the stepper.
    std::size_t sample_slot(Rng& rng);                      // P(slot) = size/n
    std::size_t sample_slot_excluding(Rng& rng, std::size_t excluded);
    std::uint32_t slot_size(std::size_t slot) const { return slot_size_[slot]; }
    void merge_slots(std::size_t keep, std::size_t drop);
    void shatter_slot(std::size_t slot);

    /// Full O(n) invariant check (sizes sum to n, index weights equal sizes).
    void check_invariants() const;

  private:
    void hist_remove(std::uint32_t size);
    void hist_insert(std::uint32_t size);

    std::uint64_t n_;
    Fenwick fen_;
    std::vector<std::uint32_t> slot_size_;
    std::vector<std::uint32_t> free_slots_;
    std::map<std::uint32_t, std::uint32_t> hist_;
    std::size_t live_;
    std::int64_t sum_sq_;
};

/// (pair_rate, burn_rate) of the event clock: ((n-1)/2, lambda n). The
/// effective coagulation rate after internal-edge rejection is
/// (n^2 - sum_k k V_k) / (2n).
struct TotalRates {
    double pair_rate;
    double burn_rate;
    double total() const { return pair_rate + burn_rate; }
};
TotalRates total_rates(const ClusterState& state, double lambda);

double effective_coagulation_rate(const ClusterState& state);

/// One jump of the chain. Mutates state and flow, returns what happened and
/// the waiting time. Rejected internal edges and singleton burns leave the
/// state unchanged and record nothing.
EventKind step(ClusterState& state, double lambda, Rng& rng, FlowRecord& flow);

struct SimOptions {
    int record_k = 10000;
    bool keep_flow_snapshots = false;  // store full FlowRecord per sample
    bool check_flow_identity = true;   // exact reconstruction at every snapshot
    std::vector<double> checkpoints;   // extra snapshot times
};

/// Full finite-n run per the spec: snapshots every record_every plus the
/// final time T (left-continuous convention: a snapshot at time s carries
/// the state after all events strictly before s). Throws FlowMismatchError
/// if the flow identity ever fails to reconstruct the state exactly.
EvolutionTrace simulate(const RegimeSpec& spec, const SimOptions& opts = {});

}  // namespace ffire

#endif
