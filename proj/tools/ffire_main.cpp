#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "ffire/compare.hpp"
#include "ffire/genfunc.hpp"
#include "ffire/mcsim.hpp"
#include "ffire/smol.hpp"
#include "ffire/trace_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

std::uint64_t resolve_seed(std::uint64_t seed, bool seed_given) {
    if (seed_given) return seed;
    std::random_device rd;
    const std::uint64_t s =
        (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
    std::fprintf(stderr, "seed drawn from system entropy: %llu\n",
                 static_cast<unsigned long long>(s));
    return s;
}

ffire::SizeDistribution load_init(const std::string& init, int K) {
    using namespace ffire;
    if (init == "monodisperse") return SizeDistribution::monodisperse(K);
    std::ifstream in(init);
    if (!in) throw IoError("cannot open init file " + init);
    SizeDistribution d(K);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "k,v" || line[0] == '#') continue;
        long k;
        double v;
        if (std::sscanf(line.c_str(), "%ld,%lf", &k, &v) != 2)
            throw IoError(init + ": bad init record at line " + std::to_string(lineno));
        if (k < 1 || k > K)
            throw ConfigError("init file k out of range at line " +
                              std::to_string(lineno));
        d.v[k] = v;
    }
    d.theta = std::max(0.0, 1.0 - d.mass());
    d.validate();
    return d;
}

void print_summary(const ffire::EvolutionTrace& trace) {
    const auto& s = trace.samples.back();
    std::ostringstream out;
    out << "t=" << s.t << " m0=" << s.dist.mass() << " m1=" << s.dist.moment(1)
        << " theta=" << s.dist.theta << " max_cluster_frac=" << s.max_cluster_frac;
    if (trace.spec.regime == ffire::Regime::FiniteN)
        out << " q_events=" << s.flow.coag_events << " r_mass=" << s.flow.burnt_mass
            << " flow_identity=" << (s.flow_identity_ok ? "ok" : "VIOLATED");
    else
        out << " r_inf=" << s.flow.r_infinity;
    if (!std::isnan(s.phi_flux)) out << " phi_flux=" << s.phi_flux;
    std::puts(out.str().c_str());
}

int cmd_simulate(const ffire::RegimeSpec& spec, const std::string& out_path,
                 bool keep_flow) {
    ffire::SimOptions opts;
    opts.record_k = spec.record_k;
    opts.keep_flow_snapshots = keep_flow;
    const ffire::EvolutionTrace trace = ffire::simulate(spec, opts);
    if (!out_path.empty()) ffire::write_trace(trace, out_path);
    print_summary(trace);
    return kExitOk;
}

int cmd_solve(const ffire::RegimeSpec& spec, const std::string& init,
              const std::string& out_path) {
    const auto v0 = load_init(init, spec.K);
    const ffire::EvolutionTrace trace = ffire::integrate(spec, v0);
    if (trace.negative_clamps > 0)
        std::fprintf(stderr, "warning: clamped %lld slightly negative entries\n",
                     static_cast<long long>(trace.negative_clamps));
    if (!out_path.empty()) ffire::write_trace(trace, out_path);
    print_summary(trace);
    return kExitOk;
}

int cmd_analyze(const std::string& in_path, bool do_fit, std::string window,
                bool pin_half, bool do_phi, const std::string& xgrid,
                const std::string& out_path) {
    using namespace ffire;
    const EvolutionTrace trace = read_trace(in_path);

    int lo = 0, hi = 0;
    if (!window.empty()) {
        if (std::sscanf(window.c_str(), "%d,%d", &lo, &hi) != 2)
            throw ConfigError("--window expects two integers a,b");
    }
    std::vector<double> xs;
    if (!xgrid.empty()) {
        std::stringstream ss(xgrid);
        std::string tok;
        while (std::getline(ss, tok, ',')) xs.push_back(std::stod(tok));
    }

    std::ostringstream out;
    out << "t,mass,theta,m1,max_cluster_frac,phi_flux";
    if (do_fit) out << ",b,A,residual,curvature,exp_curvature";
    if (do_phi) out << ",phi_tailfit";
    if (!xs.empty()) out << ",E_min,E_max";
    out << "\n";
    for (const auto& s : trace.samples) {
        out << format_double(s.t) << ',' << format_double(s.dist.mass()) << ','
            << format_double(s.dist.theta) << ',' << format_double(s.dist.moment(1))
            << ',' << format_double(s.max_cluster_frac) << ','
            << format_double(s.phi_flux);
        if (do_fit || do_phi) {
            int wlo = lo, whi = hi;
            if (wlo == 0) {
                auto [a, b] = default_fit_window(s.dist.truncation());
                wlo = a;
                whi = b;
            }
            TailFit fit{};
            bool ok = true;
            try {
                fit = fit_tail(s.dist, wlo, whi, pin_half);
            } catch (const std::exception&) {
                ok = false;
            }
            if (do_fit) {
                if (ok)
                    out << ',' << format_double(fit.exponent) << ','
                        << format_double(fit.amplitude) << ','
                        << format_double(fit.residual) << ','
                        << format_double(fit.curvature) << ','
                        << (fit.exponential_curvature ? "true" : "false");
                else
                    out << ",nan,nan,nan,nan,false";
            }
            if (do_phi) out << ',' << (ok ? format_double(fit.phi) : "nan");
        }
        if (!xs.empty()) {
            double emin = HUGE_VAL, emax = -HUGE_VAL;
            for (double x : xs) {
                const double e = e_diagnostic(s.dist, x);
                emin = std::min(emin, e);
                emax = std::max(emax, e);
            }
            out << ',' << format_double(emin) << ',' << format_double(emax);
        }
        out << "\n";
    }
    if (out_path.empty())
        std::fputs(out.str().c_str(), stdout);
    else
        atomic_write(out_path, out.str());
    return kExitOk;
}

int cmd_compare(const std::string& config_path, const std::string& out_path) {
    using namespace ffire;
    const SweepConfig config = sweep_config_from_file(config_path);
    const ConvergenceReport report = convergence_experiment(config);
    const std::string csv = report.to_csv();
    if (out_path.empty())
        std::fputs(csv.c_str(), stdout);
    else
        atomic_write(out_path, csv);
    for (const auto& row : report.rows)
        if (row.failed)
            std::fprintf(stderr, "row n=%llu seed=%llu failed: %s\n",
                         static_cast<unsigned long long>(row.n),
                         static_cast<unsigned long long>(row.seed), row.error.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace ffire;
    CLI::App app{
        "forest-fire random graph laboratory: exact finite-n simulation, "
        "limit-regime solvers, and SOC diagnostics"};
    app.require_subcommand(1);

    // --- simulate ---
    auto* sim = app.add_subcommand("simulate", "exact finite-n Markov chain run");
    RegimeSpec sspec;
    sspec.regime = Regime::FiniteN;
    std::string sim_out;
    double sim_lambda = -1.0, sim_lambda_exp = -1.0;
    bool sim_keep_flow = false;
    std::uint64_t sim_seed = 0;
    bool sim_seed_given = false;
    sim->add_option("--n", sspec.n, "vertex count")->required();
    sim->add_option("--lambda", sim_lambda, "fixed lightning rate per vertex");
    sim->add_option("--lambda-exp", sim_lambda_exp,
                    "lightning exponent a, lambda(n) = n^-a, 0 < a < 1");
    sim->add_option("--T", sspec.T, "horizon (edge-arrival clock time units)")
        ->required();
    sim->add_option("--seed", sim_seed, "RNG seed (drawn from entropy if omitted)")
        ->each([&](const std::string&) { sim_seed_given = true; });
    sim->add_option("--record-every", sspec.record_every,
                    "snapshot interval (time units)");
    sim->add_option("--record-k", sspec.record_k,
                    "largest cluster size recorded per snapshot");
    sim->add_flag("--keep-flow-snapshots", sim_keep_flow,
                  "retain full flow counters at every snapshot (small runs)");
    sim->add_option("--out", sim_out, "output trace path");

    // --- solve ---
    auto* sol = app.add_subcommand("solve", "limit-regime ODE solver");
    RegimeSpec ospec;
    std::string sol_regime = "pure", sol_init = "monodisperse", sol_out,
                sol_scheme = "rk4", sol_conv = "auto";
    double sol_lambda = -1.0;
    std::uint64_t sol_seed = 0;
    bool sol_seed_given = false;
    sol->add_option("--regime", sol_regime, "pure | ii | iii | iv")->required();
    sol->add_option("--K", ospec.K, "truncation index")->required();
    sol->add_option("--dt", ospec.dt, "integrator step (time units)")->required();
    sol->add_option("--T", ospec.T, "horizon (time units)")->required();
    sol->add_option("--lambda", sol_lambda, "lightning rate (regimes ii and iv)");
    sol->add_option("--seed", sol_seed, "RNG seed for regime ii jumps")
        ->each([&](const std::string&) { sol_seed_given = true; });
    sol->add_option("--init", sol_init, "monodisperse or a k,v CSV file");
    sol->add_option("--scheme", sol_scheme,
                    "rk4 (classical; needs dt*K < 2.785) or etdrk4 (stiff-safe)");
    sol->add_option("--conv", sol_conv,
                    "convolution kernel: auto | direct | fft");
    sol->add_option("--record-every", ospec.record_every,
                    "snapshot interval (time units)");
    sol->add_option("--record-k", ospec.record_k,
                    "largest size recorded per snapshot");
    sol->add_option("--out", sol_out, "output trace path");

    // --- analyze ---
    auto* ana = app.add_subcommand("analyze", "diagnostics on an emitted trace");
    std::string ana_in, ana_window, ana_xgrid, ana_out;
    bool ana_fit = false, ana_phi = false, ana_pin = false;
    ana->add_option("--in", ana_in, "trace path")->required();
    ana->add_flag("--fit-tail", ana_fit, "free-exponent tail-sum fit per sample");
    ana->add_option("--window", ana_window,
                    "fit window a,b (default K^0.3,K^0.6)");
    ana->add_flag("--pin-half", ana_pin, "pin the fitted exponent to -1/2");
    ana->add_flag("--phi", ana_phi, "tail-fit phi estimate (pi A^2/2) per sample");
    ana->add_option("--e-diagnostic", ana_xgrid,
                    "comma-separated x grid for the E(x) range");
    ana->add_option("--out", ana_out, "output table (stdout if omitted)");

    // --- compare ---
    auto* cmp = app.add_subcommand("compare",
                                   "Monte Carlo vs ODE convergence sweep; worker "
                                   "count via FFIRE_WORKERS");
    std::string cmp_config, cmp_out;
    cmp->add_option("--config", cmp_config, "JSON sweep configuration")->required();
    cmp->add_option("--out", cmp_out, "report CSV path (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (sim->parsed()) {
            if ((sim_lambda >= 0.0) == (sim_lambda_exp >= 0.0))
                throw ConfigError("give exactly one of --lambda / --lambda-exp");
            sspec.lambda = sim_lambda >= 0.0 ? LambdaRule::fixed(sim_lambda)
                                             : LambdaRule::exponent(sim_lambda_exp);
            sspec.seed = resolve_seed(sim_seed, sim_seed_given);
            sspec.validate();
            return cmd_simulate(sspec, sim_out, sim_keep_flow);
        }
        if (sol->parsed()) {
            ospec.regime = regime_from_name(sol_regime);
            if (ospec.regime == Regime::FiniteN)
                throw ConfigError("solve handles the limit regimes; use simulate");
            if (ospec.regime == Regime::II || ospec.regime == Regime::IV) {
                if (sol_lambda < 0.0)
                    throw ConfigError("regime " + sol_regime + " needs --lambda");
                ospec.lambda = LambdaRule::fixed(sol_lambda);
            } else if (sol_lambda >= 0.0) {
                throw ConfigError("--lambda only applies to regimes ii and iv");
            }
            if (sol_scheme == "rk4")
                ospec.scheme = Scheme::RK4;
            else if (sol_scheme == "etdrk4")
                ospec.scheme = Scheme::ETDRK4;
            else
                throw ConfigError("--scheme must be rk4 or etdrk4");
            if (sol_conv == "auto")
                ospec.conv = ConvMethod::Auto;
            else if (sol_conv == "direct")
                ospec.conv = ConvMethod::Direct;
            else if (sol_conv == "fft")
                ospec.conv = ConvMethod::Fft;
            else
                throw ConfigError("--conv must be auto, direct or fft");
            ospec.seed = resolve_seed(sol_seed, sol_seed_given);
            ospec.validate();
            return cmd_solve(ospec, sol_init, sol_out);
        }
        if (ana->parsed())
            return cmd_analyze(ana_in, ana_fit, ana_window, ana_pin, ana_phi,
                               ana_xgrid, ana_out);
        if (cmp->parsed()) return cmd_compare(cmp_config, cmp_out);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitIo;
    } catch (const FlowMismatchError& e) {
        std::fprintf(stderr, "flow bookkeeping error: %s\n", e.what());
        return kExitNumeric;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    }
    return kExitConfig;
}
