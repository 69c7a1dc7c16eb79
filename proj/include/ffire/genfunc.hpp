#ifndef FFIRE_GENFUNC_HPP
#define FFIRE_GENFUNC_HPP

#include <vector>

#include "ffire/types.hpp"

namespace ffire {

// Closed forms and generating-function diagnostics. All combinatorial
// expressions are evaluated through lgamma so tails out to k ~ 1e6 stay
// finite.

/// Borel law v_k(t) = k^{k-1}/k! e^{-kt} t^{k-1}, the explicit solution of
/// the pure coagulation system from a monodisperse start.
double borel(double t, std::int64_t k);

/// Borel law as a SizeDistribution truncated at K; theta carries 1 - sum.
SizeDistribution borel_distribution(double t, int K);

/// Stationary law of the constrained critical system,
/// v_k = 2 C(2k-2, k-1) (1/k) 4^{-k} ~ (4 pi)^{-1/2} k^{-3/2}.
double stationary_critical(std::int64_t k);

/// The k^{-3/2} asymptotic form of stationary_critical.
double stationary_critical_asymptotic(std::int64_t k);

SizeDistribution stationary_critical_distribution(int K);

/// Stationary law of the subcritical system at fixed lambda:
/// v_{lambda,k} = (lambda+1) (1 - lambda^2/(1+lambda)^2)^k v_k.
double stationary_subcritical(std::int64_t k, double lambda);

SizeDistribution stationary_subcritical_distribution(int K, double lambda);

/// Self-consistent stationary state of the K-truncated constrained system:
/// the tilted law x^k v_k with x chosen so the total mass is exactly 1.
/// Solves sum_{k<=K} x^k stationary_critical(k) = 1 by bisection.
SizeDistribution stationary_critical_truncated(int K);

/// Generating function V(x) = sum v_k e^{-kx} - 1 and derivatives:
/// order 0 -> V, 1 -> V', 2 -> V''. theta is mass at infinity and does not
/// contribute for x > 0.
double genfun(const SizeDistribution& v, double x, int order);

/// E(x) = -V'(x)^3 / V''(x).
double e_diagnostic(const SizeDistribution& v, double x);

/// The bracketed quantity of the E-evolution bound,
/// 3 V'(x)^2/V''(x) + V'(x)^3/V''(x)^2, which lies in [0, 3] for
/// conservative states with finite second moment.
double e_bound_quantity(const SizeDistribution& v, double x);

// ---------------------------------------------------------------------------
// Tail-exponent fitting. Works on tail sums S_k = theta + sum_{l>=k} v_l
// (sums are monotone and far less noisy than densities; theta is counted as
// mass at infinity so a truncated law keeps its power-law tail sums).
// ---------------------------------------------------------------------------

struct TailFit {
    int k_min = 0, k_max = 0;
    double amplitude = 0.0;  // A in S_k ~ A k^b
    double exponent = 0.0;   // b (fixed to -1/2 in pinned mode)
    double residual = 0.0;   // rms of log-residuals
    double curvature = 0.0;  // quadratic coefficient in log-log
    bool exponential_curvature = false;  // strongly log-concave tail
    double phi = 0.0;        // pi A^2 / 2, meaningful when b = -1/2
};

/// Least squares of log S_k on log k over the integer window [k_min, k_max].
/// pin_half_exponent fixes b = -1/2 and fits only the amplitude.
/// Throws NumericError when the window has no positive tail sums.
TailFit fit_tail(const SizeDistribution& v, int k_min, int k_max,
                 bool pin_half_exponent = false);

/// Default fit window [K^0.3, K^0.6] for a truncation K.
std::pair<int, int> default_fit_window(int K);

/// Erdos-Renyi giant-component density: largest root of
/// theta = 1 - exp(-t theta), 0 for t <= 1. Damped fixed-point iteration to
/// 1e-12.
double er_giant_density(double t);

}  // namespace ffire

#endif
