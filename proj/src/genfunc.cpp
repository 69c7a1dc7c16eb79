#include "ffire/genfunc.hpp"

#include <algorithm>
#include <cmath>

namespace ffire {

double borel(double t, std::int64_t k) {
    if (t < 0.0 || k < 1) throw ConfigError("borel needs t >= 0, k >= 1");
    if (t == 0.0) return k == 1 ? 1.0 : 0.0;
    const double kd = static_cast<double>(k);
    const double lg = (kd - 1.0) * std::log(kd) - std::lgamma(kd + 1.0) - kd * t +
                      (kd - 1.0) * std::log(t);
    return std::exp(lg);
}

SizeDistribution borel_distribution(double t, int K) {
    SizeDistribution d(K);
    double m = 0.0;
    for (int k = 1; k <= K; ++k) {
        d.v[k] = borel(t, k);
        m += d.v[k];
    }
    d.theta = std::max(0.0, 1.0 - m);
    return d;
}

double stationary_critical(std::int64_t k) {
    if (k < 1) throw ConfigError("stationary_critical needs k >= 1");
    const double kd = static_cast<double>(k);
    const double lg = std::log(2.0) + std::lgamma(2.0 * kd - 1.0) -
                      2.0 * std::lgamma(kd) - std::log(kd) - kd * std::log(4.0);
    return std::exp(lg);
}

double stationary_critical_asymptotic(std::int64_t k) {
    const double kd = static_cast<double>(k);
    return std::pow(4.0 * M_PI, -0.5) * std::pow(kd, -1.5);
}

SizeDistribution stationary_critical_distribution(int K) {
    SizeDistribution d(K);
    double m = 0.0;
    for (int k = 1; k <= K; ++k) {
        d.v[k] = stationary_critical(k);
        m += d.v[k];
    }
    d.theta = std::max(0.0, 1.0 - m);
    return d;
}

double stationary_subcritical(std::int64_t k, double lambda) {
    if (lambda <= 0.0) throw ConfigError("stationary_subcritical needs lambda > 0");
    const double damp = 1.0 - lambda * lambda / ((1.0 + lambda) * (1.0 + lambda));
    return (lambda + 1.0) * std::pow(damp, static_cast<double>(k)) *
           stationary_critical(k);
}

SizeDistribution stationary_subcritical_distribution(int K, double lambda) {
    SizeDistribution d(K);
    double m = 0.0;
    for (int k = 1; k <= K; ++k) {
        d.v[k] = stationary_subcritical(k, lambda);
        m += d.v[k];
    }
    d.theta = std::max(0.0, 1.0 - m);
    return d;
}

SizeDistribution stationary_critical_truncated(int K) {
    if (K < 2) throw ConfigError("stationary_critical_truncated needs K >= 2");
    std::vector<double> lg(static_cast<size_t>(K) + 1, 0.0);
    for (int k = 1; k <= K; ++k) lg[k] = std::log(stationary_critical(k));
    auto mass = [&](double lx) {
        double m = 0.0;
        for (int k = K; k >= 1; --k) m += std::exp(lg[k] + k * lx);
        return m;
    };
    double lo = 0.0, hi = 8.0 / K;
    while (mass(hi) < 1.0) hi *= 2.0;  // bracket; K >= 2 always succeeds
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mass(mid) < 1.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-18) break;
    }
    const double lx = 0.5 * (lo + hi);
    SizeDistribution d(K);
    for (int k = 1; k <= K; ++k) d.v[k] = std::exp(lg[k] + k * lx);
    d.theta = 0.0;
    return d;
}

double genfun(const SizeDistribution& v, double x, int order) {
    if (order < 0 || order > 3) throw ConfigError("genfun order must be 0..3");
    if (x < 0.0) throw ConfigError("genfun needs x >= 0");
    double s = 0.0;
    const int K = v.truncation();
    for (int k = K; k >= 1; --k) {
        double w = v.v[k] * std::exp(-k * x);
        for (int i = 0; i < order; ++i) w *= static_cast<double>(k);
        s += w;
    }
    if (order == 0) return s - 1.0;
    return (order % 2 == 1) ? -s : s;
}

double e_diagnostic(const SizeDistribution& v, double x) {
    if (!(x > 0.0)) throw ConfigError("e_diagnostic needs x > 0");
    const double vp = genfun(v, x, 1);
    const double vpp = genfun(v, x, 2);
    if (!(vpp > 0.0)) throw NumericError("e_diagnostic: V''(x) not positive");
    return -vp * vp * vp / vpp;
}

double e_bound_quantity(const SizeDistribution& v, double x) {
    const double vp = genfun(v, x, 1);
    const double vpp = genfun(v, x, 2);
    if (!(vpp > 0.0)) throw NumericError("e_bound_quantity: V''(x) not positive");
    return 3.0 * vp * vp / vpp + vp * vp * vp / (vpp * vpp);
}

TailFit fit_tail(const SizeDistribution& v, int k_min, int k_max,
                 bool pin_half_exponent) {
    if (k_min < 1 || k_min >= k_max) throw ConfigError("fit_tail: bad window");
    const int K = v.truncation();
    k_max = std::min(k_max, K);
    if (k_min >= k_max) throw ConfigError("fit_tail: window outside truncation");

    // tail sums over the window, theta included as mass at infinity
    std::vector<double> S(static_cast<size_t>(k_max - k_min + 1));
    double acc = v.theta;
    for (int l = K; l >= k_min; --l) {
        acc += v.v[l];
        if (l <= k_max) S[l - k_min] = acc;
    }

    std::vector<double> xs, ys;
    xs.reserve(S.size());
    for (int k = k_min; k <= k_max; ++k) {
        const double s = S[k - k_min];
        if (s > 0.0) {
            xs.push_back(std::log(static_cast<double>(k)));
            ys.push_back(std::log(s));
        }
    }
    if (xs.size() < 3) throw NumericError("fit_tail: degenerate window (tail is zero)");

    const auto n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) { mx += xs[i]; my += ys[i]; }
    mx /= n; my /= n;

    TailFit fit;
    fit.k_min = k_min;
    fit.k_max = k_max;
    if (pin_half_exponent) {
        // log A = mean(log S + 0.5 log k)
        double la = 0.0;
        for (size_t i = 0; i < xs.size(); ++i) la += ys[i] + 0.5 * xs[i];
        la /= n;
        fit.exponent = -0.5;
        fit.amplitude = std::exp(la);
        double r2 = 0.0;
        for (size_t i = 0; i < xs.size(); ++i) {
            const double e = ys[i] - (la - 0.5 * xs[i]);
            r2 += e * e;
        }
        fit.residual = std::sqrt(r2 / n);
    } else {
        double sxx = 0.0, sxy = 0.0;
        for (size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
        }
        fit.exponent = sxy / sxx;
        fit.amplitude = std::exp(my - fit.exponent * mx);
        double r2 = 0.0;
        for (size_t i = 0; i < xs.size(); ++i) {
            const double e = ys[i] - (std::log(fit.amplitude) + fit.exponent * xs[i]);
            r2 += e * e;
        }
        fit.residual = std::sqrt(r2 / n);
    }

    // quadratic term in log-log: large negative curvature flags an
    // exponentially decaying tail
    double s2 = 0.0, s3 = 0.0, s4 = 0.0, sy1 = 0.0, sy2 = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        s2 += dx * dx;
        s3 += dx * dx * dx;
        s4 += dx * dx * dx * dx;
        sy1 += dx * dy;
        sy2 += dx * dx * dy;
    }
    const double det = s2 * s4 - s3 * s3;
    fit.curvature = det != 0.0 ? (s2 * sy2 - s3 * sy1) / det : 0.0;
    fit.exponential_curvature = fit.curvature < -0.05;

    fit.phi = M_PI * fit.amplitude * fit.amplitude / 2.0;
    return fit;
}

std::pair<int, int> default_fit_window(int K) {
    const double Kd = static_cast<double>(K);
    int lo = std::max(2, static_cast<int>(std::lround(std::pow(Kd, 0.3))));
    int hi = std::max(lo + 2, static_cast<int>(std::lround(std::pow(Kd, 0.6))));
    return {lo, std::min(hi, K)};
}

double er_giant_density(double t) {
    if (t < 0.0) throw ConfigError("er_giant_density needs t >= 0");
    if (t <= 1.0) return 0.0;
    double th = 1.0 - 1.0 / t;  // supercritical starting guess
    for (int it = 0; it < 200000; ++it) {
        const double next = 1.0 - std::exp(-t * th);
        if (std::abs(next - th) < 1e-14) { th = next; break; }
        th = 0.5 * (th + next);  // damped update
    }
    // Newton polish; near t = 1 the fixed-point contraction is slow.
    for (int it = 0; it < 6; ++it) {
        const double e = std::exp(-t * th);
        th -= (th - 1.0 + e) / (1.0 - t * e);
    }
    return th;
}

}  // namespace ffire
