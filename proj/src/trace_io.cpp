#include "ffire/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ffire {

using nlohmann::json;

namespace {
// JSON has no NaN literal; nlohmann dumps NaN as null, so read it back.
json num_or_null(double x) { return std::isnan(x) ? json(nullptr) : json(x); }
double num_from(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN()
                       : j.get<double>();
}
}  // namespace

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp + " for writing");
        out << content;
        if (!out) throw IoError("short write to " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename " + tmp + " -> " + path + ": " + ec.message());
}

namespace {

json lambda_json(const LambdaRule& rule) {
    json j;
    j["kind"] = rule.kind == LambdaRule::Kind::Fixed ? "fixed" : "exponent";
    j["value"] = rule.value;
    return j;
}

LambdaRule lambda_from_json(const json& j) {
    LambdaRule r;
    const std::string kind = j.at("kind");
    if (kind == "fixed")
        r.kind = LambdaRule::Kind::Fixed;
    else if (kind == "exponent")
        r.kind = LambdaRule::Kind::Exponent;
    else
        throw IoError("unknown lambda kind '" + kind + "'");
    r.value = j.at("value");
    return r;
}

std::string scheme_name(Scheme s) { return s == Scheme::RK4 ? "rk4" : "etdrk4"; }
Scheme scheme_from_name(const std::string& s) {
    if (s == "rk4") return Scheme::RK4;
    if (s == "etdrk4") return Scheme::ETDRK4;
    throw IoError("unknown scheme '" + s + "'");
}
std::string conv_name(ConvMethod c) {
    switch (c) {
        case ConvMethod::Auto: return "auto";
        case ConvMethod::Direct: return "direct";
        case ConvMethod::Fft: return "fft";
    }
    return "auto";
}
ConvMethod conv_from_name(const std::string& s) {
    if (s == "auto") return ConvMethod::Auto;
    if (s == "direct") return ConvMethod::Direct;
    if (s == "fft") return ConvMethod::Fft;
    throw IoError("unknown conv method '" + s + "'");
}

void write_flow_tables(const EvolutionTrace& trace, const std::string& path) {
    // per-sample tables when snapshots were retained, else the final flow at T
    std::vector<std::pair<double, const FlowRecord*>> rows;
    if (!trace.flow_snapshots.empty() &&
        trace.flow_snapshots.size() == trace.samples.size()) {
        for (size_t i = 0; i < trace.samples.size(); ++i)
            rows.emplace_back(trace.samples[i].t, &trace.flow_snapshots[i]);
    } else if (trace.final_flow) {
        rows.emplace_back(trace.samples.empty() ? trace.spec.T
                                                : trace.samples.back().t,
                          &*trace.final_flow);
    }
    const bool ode_phi =
        !trace.samples.empty() && trace.samples.back().flow.r_infinity > 0.0;
    if (rows.empty() && !ode_phi) return;

    std::ostringstream q, r;
    q << "t,k,l,q\n";
    r << "t,k,r\n";
    for (const auto& [t, flow] : rows) {
        std::vector<std::uint64_t> keys;
        keys.reserve(flow->q.size());
        for (const auto& [kk, cnt] : flow->q) keys.push_back(kk);
        std::sort(keys.begin(), keys.end());
        for (const auto kk : keys) {
            const auto [k, l] = FlowRecord::unkey(kk);
            q << format_double(t) << ',' << k << ',' << l << ','
              << flow->q.at(kk) << '\n';
        }
        for (const auto& [k, mass] : flow->r)
            r << format_double(t) << ',' << k << ',' << mass << '\n';
        if (flow->r_infinity != 0.0)
            r << format_double(t) << ",inf," << format_double(flow->r_infinity)
              << '\n';
    }
    if (ode_phi) {
        for (const auto& s : trace.samples)
            r << format_double(s.t) << ",inf," << format_double(s.flow.r_infinity)
              << '\n';
    }
    atomic_write(path + ".flowq.csv", q.str());
    atomic_write(path + ".flowr.csv", r.str());
}

}  // namespace

void write_trace(const EvolutionTrace& trace, const std::string& path) {
    // main table
    std::ostringstream main;
    main << "t,k,v\n";
    for (const auto& s : trace.samples) {
        const std::string ts = format_double(s.t);
        for (int k = 1; k <= s.dist.truncation(); ++k)
            if (s.dist.v[k] != 0.0)
                main << ts << ',' << k << ',' << format_double(s.dist.v[k]) << '\n';
    }
    atomic_write(path, main.str());

    // sidecar
    json meta;
    meta["format"] = "ffire-trace";
    meta["version"] = kTraceSchemaVersion;
    const auto& sp = trace.spec;
    meta["regime"] = regime_name(sp.regime);
    meta["n"] = sp.n;
    meta["K"] = sp.K;
    meta["lambda"] = lambda_json(sp.lambda);
    meta["lambda_effective"] =
        sp.regime == Regime::FiniteN ? sp.lambda.evaluate(sp.n) : sp.lambda.value;
    meta["T"] = sp.T;
    meta["dt"] = sp.dt;
    meta["seed"] = sp.seed;
    meta["record_every"] = sp.record_every;
    meta["record_k"] = sp.record_k;
    meta["scheme"] = scheme_name(sp.scheme);
    meta["conv"] = conv_name(sp.conv);
    meta["threads"] = trace.threads;
    meta["negative_clamps"] = trace.negative_clamps;
    json samples = json::array();
    for (const auto& s : trace.samples) {
        json row;
        row["t"] = s.t;
        row["theta"] = s.dist.theta;
        row["record_k"] = s.dist.truncation();
        row["max_cluster_frac"] = num_or_null(s.max_cluster_frac);
        row["phi_flux"] = num_or_null(s.phi_flux);
        row["phi_tailfit"] = num_or_null(s.phi_tailfit);
        row["coag_events"] = s.flow.coag_events;
        row["burnt_mass"] = s.flow.burnt_mass;
        row["r_infinity"] = s.flow.r_infinity;
        row["flow_identity_ok"] = s.flow_identity_ok;
        samples.push_back(std::move(row));
    }
    meta["samples"] = std::move(samples);
    atomic_write(path + ".meta.json", meta.dump(2) + "\n");

    // phi series
    bool any_phi = false;
    for (const auto& s : trace.samples)
        if (!std::isnan(s.phi_flux)) any_phi = true;
    if (any_phi) {
        std::ostringstream phi;
        phi << "t,phi_flux,phi_tailfit\n";
        for (const auto& s : trace.samples)
            phi << format_double(s.t) << ',' << format_double(s.phi_flux) << ','
                << format_double(s.phi_tailfit) << '\n';
        atomic_write(path + ".phi.csv", phi.str());
    }

    write_flow_tables(trace, path);
}

EvolutionTrace read_trace(const std::string& path) {
    std::ifstream metain(path + ".meta.json");
    if (!metain) throw IoError("cannot open " + path + ".meta.json");
    json meta;
    try {
        metain >> meta;
    } catch (const json::exception& e) {
        throw IoError("bad metadata in " + path + ".meta.json: " + e.what());
    }
    if (meta.value("format", "") != "ffire-trace")
        throw IoError(path + ": not an ffire trace");
    if (meta.value("version", -1) != kTraceSchemaVersion)
        throw IoError(path + ": unsupported trace schema version");

    EvolutionTrace trace;
    auto& sp = trace.spec;
    sp.regime = regime_from_name(meta.at("regime"));
    sp.n = meta.at("n");
    sp.K = meta.at("K");
    sp.lambda = lambda_from_json(meta.at("lambda"));
    sp.T = meta.at("T");
    sp.dt = meta.at("dt");
    sp.seed = meta.at("seed");
    sp.record_every = meta.at("record_every");
    sp.record_k = meta.at("record_k");
    sp.scheme = scheme_from_name(meta.at("scheme"));
    sp.conv = conv_from_name(meta.at("conv"));
    trace.threads = meta.at("threads");
    trace.negative_clamps = meta.at("negative_clamps");

    for (const auto& row : meta.at("samples")) {
        TraceSample s;
        s.t = row.at("t");
        s.dist = SizeDistribution(row.at("record_k").get<int>());
        s.dist.theta = row.at("theta");
        s.max_cluster_frac = num_from(row.at("max_cluster_frac"));
        s.phi_flux = num_from(row.at("phi_flux"));
        s.phi_tailfit = num_from(row.at("phi_tailfit"));
        s.flow.coag_events = row.at("coag_events");
        s.flow.burnt_mass = row.at("burnt_mass");
        s.flow.r_infinity = row.at("r_infinity");
        s.flow_identity_ok = row.at("flow_identity_ok");
        trace.samples.push_back(std::move(s));
    }

    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "t,k,v")
        throw IoError(path + ": missing t,k,v header");
    size_t si = 0;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        double t, v;
        long k;
        if (std::sscanf(line.c_str(), "%lf,%ld,%lf", &t, &k, &v) != 3)
            throw IoError(path + ": bad record at line " + std::to_string(lineno));
        while (si < trace.samples.size() && trace.samples[si].t != t) ++si;
        if (si >= trace.samples.size())
            throw IoError(path + ": record time not in metadata at line " +
                          std::to_string(lineno));
        auto& d = trace.samples[si].dist;
        if (k < 1 || k > d.truncation())
            throw IoError(path + ": k out of range at line " + std::to_string(lineno));
        d.v[k] = v;
    }
    return trace;
}

}  // namespace ffire
