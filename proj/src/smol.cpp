#include "ffire/smol.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ffire/genfunc.hpp"
#include "ffire/rng.hpp"

namespace ffire {

namespace {

constexpr double kNegHardError = -1e-12;
constexpr double kClampBand = 1e-12;

// Nonlinear / linear split of the right-hand sides:
//   vdot = N(v) - d .* v
// pure:  N_k = (k/2) c_k,                    d_k = k
// III :  N_k = (k/2) c_k (k>=2), N_1 = phi,  d_k = k
// IV  :  N_k = (k/2) c_k + lam m1 1{k=1},    d_k = (1+lam) k
struct Rhs {
    Regime regime;
    double lambda;
    int K;
    Convolver conv;
    std::vector<double> cbuf;

    Rhs(Regime r, double lam, int K_, ConvMethod method)
        : regime(r), lambda(lam), K(K_), conv(K_, method), cbuf(K_ + 1, 0.0) {}

    // Fills N; returns the flux closure value for regime III (0 otherwise).
    double nonlinear(const std::vector<double>& v, std::vector<double>& N) {
        conv(v, cbuf);
        N.resize(v.size());
        N[0] = 0.0;
        for (int k = 1; k <= K; ++k) N[k] = 0.5 * k * cbuf[k];
        double phi = 0.0;
        if (regime == Regime::III) {
            phi = flux_closure(v);
            N[1] = phi;
        } else if (regime == Regime::IV) {
            double m1 = 0.0;
            for (int k = K; k >= 1; --k) m1 += static_cast<double>(k) * v[k];
            N[1] += lambda * m1;
        }
        return phi;
    }

    double linear_coeff(int k) const {
        const double base = static_cast<double>(k);
        return regime == Regime::IV ? (1.0 + lambda) * base : base;
    }
};

struct EtdTables {
    std::vector<double> E, E2, q, fa, fb, fg;
};

// Coefficient functions of the exponential fourth-order step (Cox-Matthews):
//   alpha(z) = (-4 - z + e^z (4 - 3z + z^2)) / z^3 = sum (m+1)^2 z^m/(m+3)!
//   beta(z)  = ( 2 + z + e^z (-2 + z)      ) / z^3 = sum (m+1)   z^m/(m+3)!
//   gamma(z) = (-4 - 3z - z^2 + e^z (4 - z)) / z^3 = sum (1-m)   z^m/(m+3)!
// Taylor series below |z| = 0.5, long-double closed form above (cancellation
// is mild there).
void etd_tables(const Rhs& rhs, double dt, EtdTables& T) {
    const int K = rhs.K;
    T.E.assign(K + 1, 0.0);
    T.E2.assign(K + 1, 0.0);
    T.q.assign(K + 1, 0.0);
    T.fa.assign(K + 1, 0.0);
    T.fb.assign(K + 1, 0.0);
    T.fg.assign(K + 1, 0.0);
    static const int M = 18;
    double invfact[M];  // 1/(m+3)!
    {
        double f = 6.0;  // 3!
        for (int m = 0; m < M; ++m) {
            invfact[m] = 1.0 / f;
            f *= (m + 4);
        }
    }
    for (int k = 1; k <= K; ++k) {
        const double z = -rhs.linear_coeff(k) * dt;
        T.E[k] = std::exp(z);
        T.E2[k] = std::exp(0.5 * z);
        const double w = 0.5 * z;
        T.q[k] = 0.5 * dt * (w == 0.0 ? 1.0 : std::expm1(w) / w);
        double a, b, g;
        if (std::abs(z) < 0.5) {
            a = b = g = 0.0;
            double zp = 1.0;
            for (int m = 0; m < M; ++m) {
                a += (m + 1.0) * (m + 1.0) * invfact[m] * zp;
                b += (m + 1.0) * invfact[m] * zp;
                g += (1.0 - m) * invfact[m] * zp;
                zp *= z;
            }
        } else {
            const long double zl = z;
            const long double ez = expl(zl);
            const long double z3 = zl * zl * zl;
            a = static_cast<double>((-4.0L - zl + ez * (4.0L - 3.0L * zl + zl * zl)) / z3);
            b = static_cast<double>((2.0L + zl + ez * (-2.0L + zl)) / z3);
            g = static_cast<double>((-4.0L - 3.0L * zl - zl * zl + ez * (4.0L - zl)) / z3);
        }
        T.fa[k] = dt * a;
        T.fb[k] = dt * b;
        T.fg[k] = dt * g;
    }
}

struct StepPhi {
    double integral;  // RK-weighted quadrature of phi over the step
};

class Integrator {
  public:
    Integrator(const RegimeSpec& spec)
        : spec_(spec), rhs_(spec.regime, spec.lambda_value(), spec.K, spec.conv) {
        if (spec.scheme == Scheme::ETDRK4) {
            etd_tables(rhs_, spec.dt, etd_);
            table_dt_ = spec.dt;
        }
        const int K = spec.K;
        Nv_.resize(K + 1); Na_.resize(K + 1); Nb_.resize(K + 1); Nc_.resize(K + 1);
        sa_.resize(K + 1); sb_.resize(K + 1); sc_.resize(K + 1);
    }

    // One step of size dt (tables are rebuilt if dt differs from the spec's).
    StepPhi step(std::vector<double>& v, double dt) {
        if (spec_.scheme == Scheme::ETDRK4) {
            if (dt != table_dt_) {
                etd_tables(rhs_, dt, etd_);
                table_dt_ = dt;
            }
            return step_etdrk4(v);
        }
        return step_rk4(v, dt);
    }

    double nonlinear(const std::vector<double>& v, std::vector<double>& N) {
        return rhs_.nonlinear(v, N);
    }

  private:
    StepPhi step_rk4(std::vector<double>& v, double dt) {
        const int K = spec_.K;
        auto eval = [&](const std::vector<double>& u, std::vector<double>& f) {
            const double phi = rhs_.nonlinear(u, f);
            for (int k = 1; k <= K; ++k) f[k] -= rhs_.linear_coeff(k) * u[k];
            return phi;
        };
        const double p1 = eval(v, Nv_);
        for (int k = 1; k <= K; ++k) sa_[k] = v[k] + 0.5 * dt * Nv_[k];
        const double p2 = eval(sa_, Na_);
        for (int k = 1; k <= K; ++k) sb_[k] = v[k] + 0.5 * dt * Na_[k];
        const double p3 = eval(sb_, Nb_);
        for (int k = 1; k <= K; ++k) sc_[k] = v[k] + dt * Nb_[k];
        const double p4 = eval(sc_, Nc_);
        for (int k = 1; k <= K; ++k)
            v[k] += dt / 6.0 * (Nv_[k] + 2.0 * (Na_[k] + Nb_[k]) + Nc_[k]);
        return {dt / 6.0 * (p1 + 2.0 * (p2 + p3) + p4)};
    }

    StepPhi step_etdrk4(std::vector<double>& v) {
        const int K = spec_.K;
        const auto& T = etd_;
        const double p1 = rhs_.nonlinear(v, Nv_);
        for (int k = 1; k <= K; ++k) sa_[k] = T.E2[k] * v[k] + T.q[k] * Nv_[k];
        const double p2 = rhs_.nonlinear(sa_, Na_);
        for (int k = 1; k <= K; ++k) sb_[k] = T.E2[k] * v[k] + T.q[k] * Na_[k];
        const double p3 = rhs_.nonlinear(sb_, Nb_);
        for (int k = 1; k <= K; ++k)
            sc_[k] = T.E2[k] * sa_[k] + T.q[k] * (2.0 * Nb_[k] - Nv_[k]);
        const double p4 = rhs_.nonlinear(sc_, Nc_);
        for (int k = 1; k <= K; ++k)
            v[k] = T.E[k] * v[k] + T.fa[k] * Nv_[k] +
                   2.0 * T.fb[k] * (Na_[k] + Nb_[k]) + T.fg[k] * Nc_[k];
        return {table_dt_ / 6.0 * (p1 + 2.0 * (p2 + p3) + p4)};
    }

    RegimeSpec spec_;
    Rhs rhs_;
    EtdTables etd_;
    double table_dt_ = -1.0;
    std::vector<double> Nv_, Na_, Nb_, Nc_, sa_, sb_, sc_;

    friend class IntegrationDriver;
};

}  // namespace

void rhs_pure(const SizeDistribution& v, std::vector<double>& dv, ConvMethod conv) {
    const int K = v.truncation();
    Rhs rhs(Regime::Pure, 0.0, K, conv);
    rhs.nonlinear(v.v, dv);
    for (int k = 1; k <= K; ++k) dv[k] -= static_cast<double>(k) * v.v[k];
}

double rhs_regime3(const SizeDistribution& v, std::vector<double>& dv, ConvMethod conv) {
    const int K = v.truncation();
    Rhs rhs(Regime::III, 0.0, K, conv);
    const double phi = rhs.nonlinear(v.v, dv);
    for (int k = 1; k <= K; ++k) dv[k] -= static_cast<double>(k) * v.v[k];
    return phi;
}

void rhs_regime4(const SizeDistribution& v, double lambda, std::vector<double>& dv,
                 ConvMethod conv) {
    if (lambda <= 0.0) throw ConfigError("rhs_regime4 needs lambda > 0");
    const int K = v.truncation();
    Rhs rhs(Regime::IV, lambda, K, conv);
    rhs.nonlinear(v.v, dv);
    for (int k = 1; k <= K; ++k) dv[k] -= (1.0 + lambda) * k * v.v[k];
}

double gelation_time(const SizeDistribution& v0) {
    const double m1 = v0.moment(1);
    if (!(m1 > 0.0)) throw ConfigError("gelation time undefined: m_1(0) = 0");
    return 1.0 / m1;
}

namespace {

// Shared sampling / clamping / bookkeeping for integrate() and regime II.
class IntegrationDriver {
  public:
    IntegrationDriver(const RegimeSpec& spec, const SizeDistribution& v0)
        : spec_(spec), integ_(spec), v_(v0.v) {
        spec_.validate();
        if (v0.truncation() != spec.K)
            throw ConfigError("initial distribution truncation != spec.K");
        v0.validate();
        mass0_ = v0.mass();
        theta_ = v0.theta;
        if (spec.scheme == Scheme::RK4) {
            const double zmax = spec.dt * (1.0 + (spec.regime == Regime::IV
                                                      ? spec.lambda_value()
                                                      : 0.0)) * spec.K;
            if (zmax > 2.785)
                std::fprintf(stderr,
                             "warning: RK4 with dt*K = %.3g exceeds the absolute "
                             "stability bound 2.785; expect blow-up (use etdrk4)\n",
                             zmax);
        }
        trace_.spec = spec_;
        trace_.threads = omp_get_max_threads();
    }

    EvolutionTrace run() {
        const double T = spec_.T;
        record(0.0);
        if (T <= 0.0) return std::move(trace_);
        const double dt = spec_.dt;
        const long nfull = static_cast<long>(std::floor(T / dt + 1e-9));
        double t = 0.0;
        long next_rec = 1;
        for (long s = 0; s < nfull; ++s) {
            advance(dt, t);
            t = static_cast<double>(s + 1) * dt;
            bool recorded = false;
            while (t + 1e-9 >= static_cast<double>(next_rec) * spec_.record_every &&
                   static_cast<double>(next_rec) * spec_.record_every < T - 1e-9) {
                if (!recorded) record(t);
                recorded = true;
                ++next_rec;
            }
        }
        if (t < T - 1e-9) {
            advance(T - t, t);
            t = T;
        }
        record(T);
        return std::move(trace_);
    }

  protected:
    virtual void advance(double dt, double t_begin) {
        (void)t_begin;
        const StepPhi sp = integ_.step(v_, dt);
        post_step(sp);
    }

    void post_step(const StepPhi& sp) {
        double mass = 0.0;
        for (int k = 1; k <= spec_.K; ++k) {
            double& x = v_[k];
            if (x < kNegHardError)
                throw NumericError(
                    "negative v_k below -1e-12 after a step: dt too large");
            if (std::abs(x) < kClampBand) {
                if (x < 0.0) ++trace_.negative_clamps;
                x = 0.0;
            }
            mass += x;
        }
        if (spec_.regime == Regime::III) {
            const double inv = 1.0 / mass;
            for (int k = 1; k <= spec_.K; ++k) v_[k] *= inv;
            r_infinity_ += sp.integral;
        } else {
            theta_ = std::max(0.0, theta_ + (mass0_ - mass));
            mass0_ = mass;
        }
    }

    void record(double t) {
        TraceSample s;
        s.t = t;
        const int rk = std::min(spec_.record_k, spec_.K);
        s.dist = SizeDistribution(rk);
        double beyond = 0.0;
        for (int k = 1; k <= spec_.K; ++k) {
            if (k <= rk)
                s.dist.v[k] = v_[k];
            else
                beyond += v_[k];
        }
        s.dist.theta = theta_ + beyond;
        s.flow.r_infinity = r_infinity_;
        s.max_cluster_frac = theta_;  // gel mass
        if (spec_.regime == Regime::III) {
            SizeDistribution full(spec_.K);
            full.v = v_;
            full.theta = 0.0;
            s.phi_flux = flux_closure(v_);
            const auto [lo, hi] = default_fit_window(spec_.K);
            try {
                s.phi_tailfit = fit_tail(full, lo, hi, true).phi;
            } catch (const NumericError&) {
                // pre-gel tails can be empty
            }
        }
        trace_.samples.push_back(std::move(s));
    }

    RegimeSpec spec_;
    Integrator integ_;
    std::vector<double> v_;
    double theta_ = 0.0;
    double mass0_ = 1.0;
    double r_infinity_ = 0.0;
    EvolutionTrace trace_;
};

class Regime2Driver : public IntegrationDriver {
  public:
    Regime2Driver(const RegimeSpec& spec, const SizeDistribution& v0)
        : IntegrationDriver(spec, v0), rng_(spec.seed), lambda_(spec.lambda_value()) {}

  protected:
    void advance(double dt, double t_begin) override {
        IntegrationDriver::advance(dt, t_begin);
        // theta was refreshed in post_step
        if (rng_.uniform() < lambda_ * theta_ * dt) {
            v_[1] += theta_;
            r_infinity_ += theta_;  // the control function jumps by theta
            mass0_ += theta_;
            theta_ = 0.0;
        }
    }

  private:
    Rng rng_;
    double lambda_;
};

}  // namespace

EvolutionTrace integrate(const RegimeSpec& spec, const SizeDistribution& v0) {
    if (spec.regime == Regime::FiniteN)
        throw ConfigError("integrate() handles the limit regimes; use mcsim");
    if (spec.regime == Regime::II) return simulate_regime2(spec, v0);
    IntegrationDriver driver(spec, v0);
    return driver.run();
}

EvolutionTrace simulate_regime2(const RegimeSpec& spec, const SizeDistribution& v0) {
    if (spec.regime != Regime::II) throw ConfigError("simulate_regime2 needs regime ii");
    Regime2Driver driver(spec, v0);
    return driver.run();
}

}  // namespace ffire
