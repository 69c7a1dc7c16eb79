#include "ffire/mcsim.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

namespace ffire {

ClusterState::ClusterState(std::uint64_t n) : n_(n) {
    if (n < 2) throw ConfigError("ClusterState needs n >= 2");
    fen_.reset(n);
    fen_.fill(1);
    slot_size_.assign(n, 1);
    live_ = n;
    sum_sq_ = static_cast<std::int64_t>(n);
    hist_[1] = static_cast<std::uint32_t>(n);
}

void ClusterState::hist_remove(std::uint32_t size) {
    auto it = hist_.find(size);
    if (--(it->second) == 0) hist_.erase(it);
}

void ClusterState::hist_insert(std::uint32_t size) { ++hist_[size]; }

std::map<std::uint32_t, std::int64_t> ClusterState::mass_histogram() const {
    std::map<std::uint32_t, std::int64_t> m;
    for (const auto& [size, count] : hist_)
        m[size] = static_cast<std::int64_t>(size) * count;
    return m;
}

SizeDistribution ClusterState::distribution(int record_k) const {
    SizeDistribution d(record_k);
    double beyond = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n_);
    for (const auto& [size, count] : hist_) {
        const double mass = static_cast<double>(size) * count * inv_n;
        if (size <= static_cast<std::uint32_t>(record_k))
            d.v[size] = mass;
        else
            beyond += mass;
    }
    d.theta = beyond;
    return d;
}

std::size_t ClusterState::sample_slot(Rng& rng) {
    return fen_.find(static_cast<std::int64_t>(rng.bounded(n_)));
}

std::size_t ClusterState::sample_slot_excluding(Rng& rng, std::size_t excluded) {
    const std::int64_t w = slot_size_[excluded];
    fen_.add(excluded, -w);
    const std::size_t slot =
        fen_.find(static_cast<std::int64_t>(rng.bounded(n_ - w)));
    fen_.add(excluded, w);
    return slot;
}

void ClusterState::merge_slots(std::size_t keep, std::size_t drop) {
    const std::uint32_t a = slot_size_[keep], b = slot_size_[drop];
    hist_remove(a);
    hist_remove(b);
    hist_insert(a + b);
    sum_sq_ += 2ll * a * b;
    fen_.add(keep, b);
    fen_.add(drop, -static_cast<std::int64_t>(b));
    slot_size_[keep] = a + b;
    slot_size_[drop] = 0;
    free_slots_.push_back(static_cast<std::uint32_t>(drop));
    --live_;
}

void ClusterState::shatter_slot(std::size_t slot) {
    const std::uint32_t k = slot_size_[slot];
    hist_remove(k);
    hist_[1] += k;
    sum_sq_ += static_cast<std::int64_t>(k) - static_cast<std::int64_t>(k) * k;
    fen_.add(slot, 1 - static_cast<std::int64_t>(k));
    slot_size_[slot] = 1;
    for (std::uint32_t i = 0; i + 1 < k; ++i) {
        // a burn never needs more slots than merges have freed
        const std::uint32_t s = free_slots_.back();
        free_slots_.pop_back();
        slot_size_[s] = 1;
        fen_.add(s, 1);
    }
    live_ += k - 1;
}

void ClusterState::check_invariants() const {
    std::uint64_t total = 0;
    std::size_t live = 0;
    for (std::size_t i = 0; i < slot_size_.size(); ++i) {
        total += slot_size_[i];
        if (slot_size_[i] > 0) ++live;
    }
    if (total != n_) throw NumericError("ClusterState: sizes do not sum to n");
    if (live != live_) throw NumericError("ClusterState: live slot count drifted");
    if (fen_.total() != static_cast<std::int64_t>(n_))
        throw NumericError("ClusterState: index total weight != n");
    std::uint64_t hist_total = 0;
    for (const auto& [size, count] : hist_)
        hist_total += static_cast<std::uint64_t>(size) * count;
    if (hist_total != n_) throw NumericError("ClusterState: histogram mass != n");
}

TotalRates total_rates(const ClusterState& state, double lambda) {
    const double n = static_cast<double>(state.n());
    return {(n - 1.0) / 2.0, lambda * n};
}

double effective_coagulation_rate(const ClusterState& state) {
    const double n = static_cast<double>(state.n());
    return (n * n - static_cast<double>(state.sum_sq())) / (2.0 * n);
}

namespace {

// The event draw minus the waiting time; used by step() and simulate().
EventKind apply_event(ClusterState& state, double lambda, Rng& rng,
                      FlowRecord& flow) {
    const TotalRates rates = total_rates(state, lambda);
    EventKind ev{};
    const bool pair_event =
        lambda == 0.0 || rng.uniform() * rates.total() < rates.pair_rate;
    if (pair_event) {
        const std::size_t a = state.sample_slot(rng);
        const std::uint32_t size_a = state.slot_size(a);
        // second vertex uniform among the remaining n-1
        if (rng.bounded(state.n() - 1) < size_a - 1) {
            ev.tag = EventKind::Tag::RejectedInternalEdge;
            ev.size_a = size_a;
            return ev;
        }
        const std::size_t b = state.sample_slot_excluding(rng, a);
        const std::uint32_t size_b = state.slot_size(b);
        state.merge_slots(a, b);
        flow.record_coagulation(size_a, size_b);
        ev.tag = EventKind::Tag::Coagulate;
        ev.size_a = size_a;
        ev.size_b = size_b;
        return ev;
    }
    const std::size_t slot = state.sample_slot(rng);
    const std::uint32_t k = state.slot_size(slot);
    ev.tag = EventKind::Tag::Burn;
    ev.size_a = k;
    if (k >= 2) {
        state.shatter_slot(slot);
        flow.record_burn(k);
    }
    return ev;
}

}  // namespace

EventKind step(ClusterState& state, double lambda, Rng& rng, FlowRecord& flow) {
    const double dt = rng.exponential(total_rates(state, lambda).total());
    EventKind ev = apply_event(state, lambda, rng, flow);
    ev.dt = dt;
    return ev;
}

namespace {

struct Recorder {
    const RegimeSpec& spec;
    const SimOptions& opts;
    const std::map<std::uint32_t, std::int64_t> hist0;
    EvolutionTrace& trace;
    std::int64_t last_r = 0;
    double last_t = 0.0;

    void snapshot(double t, const ClusterState& state, const FlowRecord& flow) {
        TraceSample s;
        s.t = t;
        s.dist = state.distribution(std::min<std::uint64_t>(
            spec.record_k, state.n()));
        s.flow.coag_events = flow.coagulation_events();
        s.flow.burnt_mass = flow.r_total();
        s.max_cluster_frac =
            static_cast<double>(state.max_cluster()) / static_cast<double>(state.n());
        if (t > last_t) {
            s.phi_flux = static_cast<double>(s.flow.burnt_mass - last_r) /
                         static_cast<double>(state.n()) / (t - last_t);
        }
        last_r = s.flow.burnt_mass;
        last_t = t;
        if (opts.check_flow_identity) {
            const auto rebuilt = reconstruct_hist_from_flow(hist0, flow, state.n());
            if (rebuilt != state.mass_histogram())
                throw FlowMismatchError("flow identity violated at t = " +
                                        std::to_string(t));
            s.flow_identity_ok = true;
        }
        trace.samples.push_back(std::move(s));
        if (opts.keep_flow_snapshots) trace.flow_snapshots.push_back(flow);
    }
};

}  // namespace

EvolutionTrace simulate(const RegimeSpec& spec, const SimOptions& opts) {
    spec.validate();
    if (spec.regime != Regime::FiniteN)
        throw ConfigError("simulate() runs the finite-n chain; use solve for limits");

    const double lambda = spec.lambda.evaluate(spec.n);
    ClusterState state(spec.n);
    FlowRecord flow;
    Rng rng(spec.seed);

    EvolutionTrace trace;
    trace.spec = spec;
    trace.threads = omp_get_max_threads();

    // snapshot schedule: multiples of record_every, explicit checkpoints, T
    std::vector<double> snaps;
    for (double t = spec.record_every; t < spec.T - 1e-12; t += spec.record_every)
        snaps.push_back(t);
    for (double c : opts.checkpoints)
        if (c > 0.0 && c < spec.T - 1e-12) snaps.push_back(c);
    snaps.push_back(spec.T);
    std::sort(snaps.begin(), snaps.end());
    snaps.erase(std::unique(snaps.begin(), snaps.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                snaps.end());

    Recorder rec{spec, opts, state.mass_histogram(), trace};
    rec.snapshot(0.0, state, flow);

    const double total_rate = total_rates(state, lambda).total();
    double t = 0.0;
    std::size_t next_snap = 0;
    while (next_snap < snaps.size()) {
        const double t_event = t + rng.exponential(total_rate);
        // left-continuity: snapshots due up to the jump time see the state
        // before the jump
        while (next_snap < snaps.size() && snaps[next_snap] <= t_event) {
            rec.snapshot(snaps[next_snap], state, flow);
            ++next_snap;
        }
        if (next_snap >= snaps.size()) break;
        apply_event(state, lambda, rng, flow);
        t = t_event;
    }

    trace.final_flow = std::move(flow);
    return trace;
}

}  // namespace ffire
