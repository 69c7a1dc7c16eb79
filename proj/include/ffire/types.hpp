#ifndef FFIRE_TYPES_HPP
#define FFIRE_TYPES_HPP

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace ffire {

// ---------------------------------------------------------------------------
// Errors. The CLI maps these to distinct exit codes.
// ---------------------------------------------------------------------------

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Raised when the flow bookkeeping fails to reproduce the simulator state.
struct FlowMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// SizeDistribution: mass fractions v_k of vertices in size-k clusters plus
// the mass `theta` not represented in v[1..K] (gel mass for the limit
// regimes, beyond-truncation cluster mass for recorded finite-n snapshots).
// Storage is 1-based: v[0] is unused and kept at 0.
// ---------------------------------------------------------------------------

struct SizeDistribution {
    std::vector<double> v;  // v[k], k = 1..K
    double theta = 0.0;

    SizeDistribution() : v(1, 0.0) {}
    explicit SizeDistribution(int K) : v(static_cast<size_t>(K) + 1, 0.0) {}

    int truncation() const { return static_cast<int>(v.size()) - 1; }

    static SizeDistribution monodisperse(int K) {
        SizeDistribution d(K);
        d.v[1] = 1.0;
        return d;
    }

    /// m_p = sum_k k^p v_k over the represented range.
    double moment(int p) const;
    double mass() const { return moment(0); }

    /// sum_{l >= k} v_l, with theta counted as mass at infinity.
    double tail_sum(int k) const;

    /// Throws NumericError on a violated invariant (negative entry, or
    /// mass + theta exceeding 1 by more than eps_mass).
    void validate(double eps_mass = 1e-9) const;
};

// ---------------------------------------------------------------------------
// FlowRecord: cumulative coagulation and burn counters.
//
// For finite-n runs the counters are exact integers. q is keyed by the
// unordered pair (min(k,l), max(k,l)); the stored value follows the
// (1 + 1{k=l}) convention, i.e. a size-(k,k) merge adds 2, any other merge
// adds 1. r[k] accumulates k per size-k burn; r[1] never appears. The limit
// regimes only carry r_infinity = integral of the burning flux.
// ---------------------------------------------------------------------------

struct FlowRecord {
    std::unordered_map<std::uint64_t, std::int64_t> q;
    std::map<std::uint32_t, std::int64_t> r;
    double r_infinity = 0.0;

    static std::uint64_t key(std::uint32_t k, std::uint32_t l) {
        if (k > l) std::swap(k, l);
        return (static_cast<std::uint64_t>(k) << 32) | l;
    }
    static std::pair<std::uint32_t, std::uint32_t> unkey(std::uint64_t kk) {
        return {static_cast<std::uint32_t>(kk >> 32),
                static_cast<std::uint32_t>(kk & 0xffffffffu)};
    }

    void record_coagulation(std::uint32_t k, std::uint32_t l) {
        q[key(k, l)] += (k == l) ? 2 : 1;
    }
    void record_burn(std::uint32_t k) {
        if (k >= 2) r[k] += static_cast<std::int64_t>(k);
    }

    /// Total merge events (each unordered pair counted once).
    std::int64_t coagulation_events() const;
    /// q(t) of the flow definitions: sum_k sum_l q_{k,l}, symmetric
    /// interpretation, so 2 per off-diagonal event and 2 per diagonal event.
    std::int64_t q_total() const;
    /// Total burnt mass sum_k r_k (integer).
    std::int64_t r_total() const;

    /// Every counter of `later` must dominate this record; false otherwise.
    bool dominated_by(const FlowRecord& later) const;
};

/// Rebuilds the size distribution implied by a finite-n flow:
///   V_k(t) = V_k(0) + (k/2) sum_{l<k} Q_{l,k-l} - k Q_k - R_k + 1{k=1} R.
/// Exact integer identity; throws FlowMismatchError if any V_k < 0 or the
/// total differs from n.
SizeDistribution reconstruct_from_flow(const SizeDistribution& v0,
                                       const FlowRecord& flow,
                                       std::uint64_t n);

/// Integer-histogram flavour used internally by the simulator self-check.
std::map<std::uint32_t, std::int64_t> reconstruct_hist_from_flow(
    const std::map<std::uint32_t, std::int64_t>& hist0, const FlowRecord& flow,
    std::uint64_t n);

// ---------------------------------------------------------------------------
// RegimeSpec
// ---------------------------------------------------------------------------

enum class Regime { FiniteN, Pure, II, III, IV };

struct LambdaRule {
    enum class Kind { Fixed, Exponent } kind = Kind::Fixed;
    double value = 0.0;  // lambda itself, or the exponent a with lambda(n)=n^-a

    static LambdaRule fixed(double lambda) { return {Kind::Fixed, lambda}; }
    static LambdaRule exponent(double a) { return {Kind::Exponent, a}; }
    double evaluate(std::uint64_t n) const;
};

enum class Scheme { RK4, ETDRK4 };
enum class ConvMethod { Auto, Direct, Fft };

struct RegimeSpec {
    Regime regime = Regime::Pure;
    std::uint64_t n = 0;  // FiniteN only
    LambdaRule lambda{};
    int K = 2;            // truncation (ODE regimes)
    double T = 1.0;       // horizon, edge-arrival clock units
    double dt = 1e-3;     // integrator step (ODE regimes)
    std::uint64_t seed = 1;
    double record_every = 0.1;
    Scheme scheme = Scheme::RK4;
    ConvMethod conv = ConvMethod::Auto;
    int record_k = 10000;  // snapshot truncation

    void validate() const;  // throws ConfigError
    double lambda_value() const {
        return lambda.evaluate(regime == Regime::FiniteN ? n : 0);
    }
};

std::string regime_name(Regime r);
Regime regime_from_name(const std::string& s);

// ---------------------------------------------------------------------------
// EvolutionTrace
// ---------------------------------------------------------------------------

struct FlowTotals {
    std::int64_t coag_events = 0;  // finite-n merge events
    std::int64_t burnt_mass = 0;   // finite-n sum_k R_k
    double r_infinity = 0.0;       // ODE regimes: integral of phi
};

struct TraceSample {
    double t = 0.0;
    SizeDistribution dist;
    FlowTotals flow;
    double phi_flux = std::numeric_limits<double>::quiet_NaN();
    double phi_tailfit = std::numeric_limits<double>::quiet_NaN();
    double max_cluster_frac = std::numeric_limits<double>::quiet_NaN();
    bool flow_identity_ok = true;  // finite-n snapshots only
};

struct EvolutionTrace {
    RegimeSpec spec;
    std::vector<TraceSample> samples;
    // Full flow counters per sample, retained on request (small runs).
    std::vector<FlowRecord> flow_snapshots;
    // Final flow state of a finite-n run.
    std::optional<FlowRecord> final_flow;
    int threads = 1;
    std::int64_t negative_clamps = 0;  // solver bookkeeping

    void validate() const;  // sample times strictly increasing, etc.
};

}  // namespace ffire

#endif
