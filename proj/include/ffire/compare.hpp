#ifndef FFIRE_COMPARE_HPP
#define FFIRE_COMPARE_HPP

#include <string>
#include <vector>

#include "ffire/types.hpp"

namespace ffire {

// Monte Carlo vs ODE convergence experiments and regime-separation runs.

/// sup_{k <= k_report} |a_k - b_k|.
double distance(const SizeDistribution& a, const SizeDistribution& b, int k_report);

struct SweepConfig {
    std::vector<std::uint64_t> ns;
    LambdaRule lambda{};
    double T = 2.0;
    std::vector<double> checkpoints;
    int seeds = 1;
    std::uint64_t base_seed = 1;
    int k_report = 10;
    int record_k = 2000;
    // reference solver settings (regime inferred: iii for an exponent rule
    // or lambda > 0, pure for lambda = 0)
    int ref_K = 10000;
    double ref_dt = 5e-3;
    Scheme ref_scheme = Scheme::ETDRK4;
    std::string out_dir;  // per-row traces written here when nonempty

    void validate() const;
};

SweepConfig sweep_config_from_file(const std::string& path);

struct ConvergenceRow {
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    std::vector<double> dist;  // sup-distance per checkpoint
    std::string trace_path;
    bool failed = false;
    std::string error;
};

struct ConvergenceReport {
    SweepConfig config;
    std::vector<double> checkpoints;
    std::vector<ConvergenceRow> rows;
    std::vector<double> mean_final;  // per n, mean over seeds at the last checkpoint
    std::vector<double> max_final;
    bool monotone_in_n = true;  // mean decreasing, one inversion tolerated
    int threads = 1;

    std::string to_csv() const;
};

/// Runs the reference solver once, then all (n, seed) rows in a bounded
/// worker pool (FFIRE_WORKERS or OpenMP default); rows are merged by index,
/// per-row failures are recorded without aborting the sweep.
ConvergenceReport convergence_experiment(const SweepConfig& config);

struct RegimeSummaryRow {
    std::string label;
    double lambda = 0.0;
    double t = 0.0;
    double max_cluster_frac = 0.0;
    double burnt_mass = 0.0;        // r(T), scaled
    double tail_exponent = 0.0;     // free-exponent fit, NaN if the fit failed
    bool exponential_curvature = false;
    double v1 = 0.0;
    double v1_subcritical_ref = 0.0;  // stationary law value for fixed lambda
};

struct RegimeSeparation {
    std::vector<RegimeSummaryRow> rows;  // lambda = 0, n^{-1/2}, 0.5
    std::string to_csv() const;
};

/// Three runs at lambda in {0, n^{-1/2}, 0.5}: ER giant vs SOC vs
/// subcritical signatures at time T (the fixed-lambda run goes to 5T).
RegimeSeparation regime_separation(std::uint64_t n, double T,
                                   std::uint64_t base_seed = 1,
                                   const std::string& out_dir = "");

}  // namespace ffire

#endif
