#pragma once

// Reference implementations used only by the tests. Nothing here calls into
// the library's own special functions or samplers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

// Phi(z) from the Maclaurin series of erf, summed in long double. Good to
// ~1e-15 for |z| <= 6.
inline double normal_cdf_series(double z) {
    const long double t = static_cast<long double>(z) / std::sqrt(2.0L);
    long double term = t;
    long double sum = t;
    for (int n = 1; n < 400; ++n) {
        term *= -t * t / n;
        const long double add = term / (2 * n + 1);
        sum += add;
        if (std::fabs(add) < 1e-22L) break;
    }
    return static_cast<double>(0.5L + sum / std::sqrt(3.14159265358979323846264338327950288L));
}

inline double normal_pdf(double y, double mean, double sd) {
    const double z = (y - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * 3.14159265358979323846));
}

// Kolmogorov limiting survival function Q(lambda).
inline double kolmogorov_q(double lambda) {
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

// One-sample KS p-value with Stephens' small-sample correction.
inline double ks_pvalue(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    const double rn = std::sqrt(n);
    return kolmogorov_q((rn + 0.12 + 0.11 / rn) * d);
}

inline double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::fabs(i / na - j / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
}

inline double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Standard error of the sample mean.
inline double std_error(const std::vector<double>& v) {
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

// Independent draws from the joint prior restricted to mu_inf < min_h mu0_h,
// by rejection on top of the standard library's distributions.
struct PriorDraw {
    std::vector<double> w;
    std::vector<double> nu0;
    std::vector<double> mu0;
    std::vector<double> tau0;
    double mu_inf;
    double tau_inf;
};

inline std::vector<double> dirichlet(std::mt19937_64& eng, const std::vector<double>& conc) {
    std::vector<double> g(conc.size());
    double total = 0.0;
    // Shapes below 1 use the boost Gamma(a) = Gamma(a + 1) U^(1/a), in logs.
    std::vector<double> lg(conc.size());
    double m = -INFINITY;
    for (std::size_t k = 0; k < conc.size(); ++k) {
        std::gamma_distribution<double> gam(conc[k] + 1.0, 1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        double u = unif(eng);
        while (u <= 0.0) u = unif(eng);
        lg[k] = std::log(gam(eng)) + std::log(u) / conc[k];
        m = std::max(m, lg[k]);
    }
    for (std::size_t k = 0; k < conc.size(); ++k) {
        g[k] = std::exp(lg[k] - m);
        total += g[k];
    }
    for (double& v : g) v /= total;
    return g;
}

inline PriorDraw truncated_prior(std::mt19937_64& eng, std::size_t H, std::size_t J, double prior_mean,
                                 double kappa, double a_tau, double b_tau) {
    PriorDraw d;
    d.w = dirichlet(eng, std::vector<double>(J, 1.0 / static_cast<double>(J)));
    d.nu0 = dirichlet(eng, std::vector<double>(H, 1.0 / static_cast<double>(H)));
    std::normal_distribution<double> loc(prior_mean, std::sqrt(kappa));
    std::gamma_distribution<double> prec(a_tau, 1.0 / b_tau);
    d.mu0.resize(H);
    do {
        for (auto& m : d.mu0) m = loc(eng);
        d.mu_inf = loc(eng);
    } while (!(d.mu_inf < *std::min_element(d.mu0.begin(), d.mu0.end())));
    d.tau0.resize(H);
    for (auto& t : d.tau0) t = prec(eng);
    d.tau_inf = prec(eng);
    return d;
}

// Clamped B-spline basis by the Cox-de Boor recursion, straight from the
// definition (right-continuous, with the last nonempty interval closed).
inline double bspline(const std::vector<double>& t, std::size_t i, int p, double x) {
    if (p == 0) {
        const bool last = t[i + 1] == t.back() && t[i] < t[i + 1];
        if (t[i] <= x && (x < t[i + 1] || (last && x == t[i + 1]))) return 1.0;
        return 0.0;
    }
    double left = 0.0;
    double right = 0.0;
    if (t[i + p] > t[i]) left = (x - t[i]) / (t[i + p] - t[i]) * bspline(t, i, p - 1, x);
    if (t[i + p + 1] > t[i + 1]) {
        right = (t[i + p + 1] - x) / (t[i + p + 1] - t[i + 1]) * bspline(t, i + 1, p - 1, x);
    }
    return left + right;
}

inline std::vector<double> clamped_knots(const std::vector<double>& inner, int degree, double hi) {
    std::vector<double> t(static_cast<std::size_t>(degree) + 1, 0.0);
    t.insert(t.end(), inner.begin(), inner.end());
    t.insert(t.end(), static_cast<std::size_t>(degree) + 1, hi);
    return t;
}

// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
    return s * h / 3.0;
}

}  // namespace oracle
