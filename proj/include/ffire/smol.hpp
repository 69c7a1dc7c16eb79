#ifndef FFIRE_SMOL_HPP
#define FFIRE_SMOL_HPP

#include <vector>

#include "ffire/kernels.hpp"
#include "ffire/types.hpp"

namespace ffire {

// Deterministic solvers for the four limit systems: pure coagulation,
// regime II (ODE plus Markovian gel-burn jumps), regime III (constrained
// critical system with the truncation-flux closure), regime IV (subcritical
// system at fixed lambda).

struct PhiPoint {
    double t;
    double flux;     // truncation-flux closure
    double tailfit;  // pinned-exponent tail-sum estimate, diagnostic only
};

struct PhiSeries {
    std::vector<PhiPoint> points;
};

/// Pure coagulation right-hand side,
///     vdot_k = (k/2) sum_{l<k} v_l v_{k-l} - k v_k.
/// No closure term: mass leaking past K is accounted in theta.
void rhs_pure(const SizeDistribution& v, std::vector<double>& dv,
              ConvMethod conv = ConvMethod::Auto);

/// Constrained critical system: k >= 2 equations as in the pure system,
/// vdot_1 = -v_1 + phi_K with the flux closure
///     phi_K = sum_{k,l<=K, k+l>K} ((k+l)/2) v_k v_l,
/// so that sum_k vdot_k = 0 exactly for conservative input. Returns phi_K.
double rhs_regime3(const SizeDistribution& v, std::vector<double>& dv,
                   ConvMethod conv = ConvMethod::Auto);

/// Subcritical system at fixed lambda:
///     vdot_k = (k/2) sum v_l v_{k-l} - k v_k - lambda k v_k
///              + lambda 1{k=1} sum_l l v_l   (first moment truncated at K).
void rhs_regime4(const SizeDistribution& v, double lambda,
                 std::vector<double>& dv, ConvMethod conv = ConvMethod::Auto);

/// Gelation time 1/m_1(0). Throws ConfigError on an empty distribution.
double gelation_time(const SizeDistribution& v0);

/// Fixed-step integration of Pure / III / IV from v0 over [0, T].
/// scheme RK4 is the classical Runge-Kutta step (requires dt below the
/// absolute-stability bound ~2.785/((1+lambda)K)); scheme ETDRK4 handles the
/// stiff -k v_k part exactly and is used for large truncations. Regime III
/// is renormalized to the conservative manifold after every step. A phi
/// series (flux closure plus tail-fit diagnostic) is recorded for III, and
/// r_infinity accumulates the integral of phi.
EvolutionTrace integrate(const RegimeSpec& spec, const SizeDistribution& v0);

/// Regime II: pure coagulation between jumps; in each step a jump fires with
/// probability lambda * theta * dt and pushes the whole gel mass into the
/// singletons.
EvolutionTrace simulate_regime2(const RegimeSpec& spec, const SizeDistribution& v0);

}  // namespace ffire

#endif
