#include "ffire/types.hpp"

#include <cmath>
#include <set>

namespace ffire {

double SizeDistribution::moment(int p) const {
    double s = 0.0;
    const int K = truncation();
    for (int k = K; k >= 1; --k) {
        double w = v[k];
        for (int i = 0; i < p; ++i) w *= k;
        s += w;
    }
    return s;
}

double SizeDistribution::tail_sum(int k) const {
    double s = theta;
    const int K = truncation();
    for (int l = K; l >= k; --l) s += v[l];
    return s;
}

void SizeDistribution::validate(double eps_mass) const {
    for (int k = 1; k <= truncation(); ++k)
        if (v[k] < 0.0)
            throw NumericError("SizeDistribution: negative v_" + std::to_string(k));
    if (theta < 0.0) throw NumericError("SizeDistribution: negative theta");
    if (mass() + theta > 1.0 + eps_mass)
        throw NumericError("SizeDistribution: mass + theta exceeds 1");
}

double LambdaRule::evaluate(std::uint64_t n) const {
    if (kind == Kind::Fixed) return value;
    if (n == 0) throw ConfigError("exponent lambda rule needs a vertex count");
    return std::pow(static_cast<double>(n), -value);
}

void RegimeSpec::validate() const {
    if (lambda.kind == LambdaRule::Kind::Exponent &&
        (lambda.value <= 0.0 || lambda.value >= 1.0))
        throw ConfigError("lambda exponent a must satisfy 0 < a < 1, got " +
                          std::to_string(lambda.value));
    if (lambda.kind == LambdaRule::Kind::Fixed && lambda.value < 0.0)
        throw ConfigError("lambda must be nonnegative");
    if (T < 0.0) throw ConfigError("horizon T must be nonnegative");
    if (record_every <= 0.0) throw ConfigError("record_every must be positive");
    if (record_k < 1) throw ConfigError("record_k must be at least 1");
    if (regime == Regime::FiniteN) {
        if (n < 2) throw ConfigError("finite-n simulation needs n >= 2");
    } else {
        if (K < 2) throw ConfigError("truncation K must be at least 2");
        if (dt <= 0.0) throw ConfigError("dt must be positive");
        if (regime == Regime::II || regime == Regime::IV) {
            if (lambda.kind != LambdaRule::Kind::Fixed)
                throw ConfigError("regimes II and IV take a fixed lambda");
            if (lambda.value <= 0.0)
                throw ConfigError("regimes II and IV need lambda > 0");
        }
        if (regime == Regime::II && lambda.value * dt > 0.01)
            throw ConfigError("regime II jump thinning needs lambda*dt <= 0.01");
    }
}

std::string regime_name(Regime r) {
    switch (r) {
        case Regime::FiniteN: return "finite_n";
        case Regime::Pure: return "pure";
        case Regime::II: return "ii";
        case Regime::III: return "iii";
        case Regime::IV: return "iv";
    }
    return "?";
}

Regime regime_from_name(const std::string& s) {
    if (s == "finite_n") return Regime::FiniteN;
    if (s == "pure") return Regime::Pure;
    if (s == "ii") return Regime::II;
    if (s == "iii") return Regime::III;
    if (s == "iv") return Regime::IV;
    throw ConfigError("unknown regime '" + s + "'");
}

std::int64_t FlowRecord::coagulation_events() const {
    std::int64_t total = 0;
    for (const auto& [kk, cnt] : q) {
        auto [k, l] = unkey(kk);
        total += (k == l) ? cnt / 2 : cnt;
    }
    return total;
}

std::int64_t FlowRecord::q_total() const {
    std::int64_t total = 0;
    for (const auto& [kk, cnt] : q) {
        auto [k, l] = unkey(kk);
        total += (k == l) ? cnt : 2 * cnt;
    }
    return total;
}

std::int64_t FlowRecord::r_total() const {
    std::int64_t total = 0;
    for (const auto& [k, m] : r) total += m;
    return total;
}

bool FlowRecord::dominated_by(const FlowRecord& later) const {
    for (const auto& [kk, cnt] : q) {
        auto it = later.q.find(kk);
        if (it == later.q.end() || it->second < cnt) return false;
    }
    for (const auto& [k, m] : r) {
        auto it = later.r.find(k);
        if (it == later.r.end() || it->second < m) return false;
    }
    return r_infinity <= later.r_infinity + 1e-15;
}

std::map<std::uint32_t, std::int64_t> reconstruct_hist_from_flow(
    const std::map<std::uint32_t, std::int64_t>& hist0, const FlowRecord& flow,
    std::uint64_t n) {
    // Per-k aggregates of the stored pair counters.
    std::map<std::uint32_t, std::int64_t> births;  // sum_l Q_{l,k-l} at k
    std::map<std::uint32_t, std::int64_t> qk;      // Q_k = sum_l Q_{k,l}
    for (const auto& [kk, cnt] : flow.q) {
        auto [a, b] = FlowRecord::unkey(kk);
        births[a + b] += (a == b) ? cnt : 2 * cnt;
        qk[a] += cnt;
        if (a != b) qk[b] += cnt;
    }
    const std::int64_t r_all = flow.r_total();

    std::map<std::uint32_t, std::int64_t> V = hist0;
    auto bump = [&V](std::uint32_t k, std::int64_t d) {
        if (d != 0) V[k] += d;
    };
    for (const auto& [k, B] : births) bump(k, static_cast<std::int64_t>(k) * (B / 2));
    for (const auto& [k, Q] : qk) bump(k, -static_cast<std::int64_t>(k) * Q);
    for (const auto& [k, R] : flow.r) bump(k, -R);
    bump(1, r_all);

    std::int64_t total = 0;
    for (auto it = V.begin(); it != V.end();) {
        if (it->second == 0) {
            it = V.erase(it);
            continue;
        }
        if (it->second < 0)
            throw FlowMismatchError("flow reconstruction gives negative V_" +
                                    std::to_string(it->first));
        total += it->second;
        ++it;
    }
    if (total != static_cast<std::int64_t>(n))
        throw FlowMismatchError("flow reconstruction mass " + std::to_string(total) +
                                " != n = " + std::to_string(n));
    return V;
}

SizeDistribution reconstruct_from_flow(const SizeDistribution& v0,
                                       const FlowRecord& flow, std::uint64_t n) {
    std::map<std::uint32_t, std::int64_t> hist0;
    for (int k = 1; k <= v0.truncation(); ++k) {
        const double Vk = v0.v[k] * static_cast<double>(n);
        const double r = std::round(Vk);
        if (std::abs(Vk - r) > 1e-6)
            throw FlowMismatchError("v0 is not an exact n-vertex configuration at k=" +
                                    std::to_string(k));
        if (r != 0.0) hist0[static_cast<std::uint32_t>(k)] = static_cast<std::int64_t>(r);
    }
    auto V = reconstruct_hist_from_flow(hist0, flow, n);

    std::uint32_t kmax = 1;
    if (!V.empty()) kmax = V.rbegin()->first;
    SizeDistribution out(static_cast<int>(kmax));
    for (const auto& [k, Vk] : V)
        out.v[k] = static_cast<double>(Vk) / static_cast<double>(n);
    return out;
}

void EvolutionTrace::validate() const {
    for (size_t i = 0; i + 1 < samples.size(); ++i)
        if (!(samples[i].t < samples[i + 1].t))
            throw NumericError("trace sample times not strictly increasing");
    for (const auto& s : samples) s.dist.validate();
}

}  // namespace ffire
