#include "qpr/smalldiv.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qpr/errors.hpp"

namespace qpr {

namespace {

// Walks the box |nu_i| <= R of nonzero lattice points, calling fn(nu, l1).
// Only one representative of each {nu,-nu} pair is visited.
template <typename Fn>
void for_each_lattice_point(std::size_t d, int R, Fn&& fn) {
    Momentum nu(d, 0);
    // iterate odometer-style over [-R, R]^d
    while (true) {
        int l1 = l1_norm(nu);
        if (l1 > 0 && l1 <= R) {
            // keep the representative whose first nonzero entry is positive
            for (int c : nu) {
                if (c > 0) {
                    fn(nu, l1);
                    break;
                }
                if (c < 0) break;
            }
        }
        std::size_t i = 0;
        while (i < d) {
            if (nu[i] < R) {
                ++nu[i];
                break;
            }
            nu[i] = -R;
            ++i;
        }
        if (i == d) break;
    }
}

} // namespace

std::vector<double> alpha_sequence(const std::vector<double>& omega, int n_max) {
    const std::size_t d = omega.size();
    if (d == 0 || n_max < 0) throw UsageError("alpha_sequence: empty omega or negative n_max");
    const long R = 1L << n_max;
    double box = 1.0;
    for (std::size_t i = 0; i < d; ++i) box *= 2.0 * R + 1.0;
    if (box > 2.5e8)
        throw ResourceError("alpha_sequence: exhaustive search over |nu|_1 <= 2^" +
                            std::to_string(n_max) + " in d=" + std::to_string(d) +
                            " exceeds the search budget");

    // one pass over the big box, tracking the minimum per dyadic shell
    std::vector<double> shell_min(n_max + 1, std::numeric_limits<double>::infinity());
    std::optional<Momentum> zero_at;
    for_each_lattice_point(d, static_cast<int>(R), [&](const Momentum& nu, int l1) {
        double v = std::abs(dot(omega, nu));
        if (v == 0.0 && !zero_at) zero_at = nu;
        int n = scale_of_norm(l1);
        if (v < shell_min[n]) shell_min[n] = v;
    });
    if (zero_at)
        throw RationalDependenceError("exact zero divisor omega.nu = 0 at nu=" +
                                      to_string(*zero_at));

    std::vector<double> alpha(n_max + 1);
    double running = std::numeric_limits<double>::infinity();
    for (int n = 0; n <= n_max; ++n) {
        running = std::min(running, shell_min[n]);
        alpha[n] = running;
    }
    return alpha;
}

double bryuno_partial(const std::vector<double>& omega, int n_max) {
    auto alpha = alpha_sequence(omega, n_max);
    double s = 0.0;
    for (int n = 0; n <= n_max; ++n) s += std::ldexp(std::log(1.0 / alpha[n]), -n);
    return s;
}

int scale_of_norm(int l1) {
    if (l1 <= 0) throw UsageError("scale_of: nu = 0 has no scale");
    int n = 0;
    while ((1 << n) < l1) ++n;
    return n;
}

int scale_of(const Momentum& nu) { return scale_of_norm(l1_norm(nu)); }

namespace {
// h(s) = 0 for s <= 0, 1 for s >= 1, exp(-1/s)/(exp(-1/s)+exp(-1/(1-s)))
// in between: smooth, monotone, cheap.
double smooth_h(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    double e1 = std::exp(-1.0 / s);
    double e2 = std::exp(-1.0 / (1.0 - s));
    return e1 / (e1 + e2);
}
} // namespace

double smooth_step(double x, double C1) {
    if (C1 <= 0.0) throw UsageError("smooth_step: C1 must be positive");
    return smooth_h(2.0 * std::abs(x) / C1 - 1.0);
}

double delta0(double x, double lambda0) {
    double u = std::abs(x);
    double v = std::abs(x + 2.0 * lambda0);
    if (u == 0.0 || v == 0.0) return 0.0; // continuous limit at both poles
    // (0.5 (1/x^2 + 1/(x+2 l0)^2))^{-1/2} without overflowing near the poles
    double m = std::min(u, v);
    double M = std::max(u, v);
    double r = m / M;
    return m * std::sqrt(2.0 / (1.0 + r * r));
}

double rho0(double x, double lambda0) {
    return (x + lambda0 >= 0.0) ? 0.0 : lambda0;
}

ScaleSystem::ScaleSystem(std::vector<double> omega, int n_max, double C1)
    : omega_(std::move(omega)), n_max_(n_max), C1_(C1) {
    if (C1_ <= 0.0) throw UsageError("ScaleSystem: C1 must be positive");
    alpha_ = alpha_sequence(omega_, n_max_);
    const int d = static_cast<int>(omega_.size());

    // Cauchy test on the partial sums of 2^{n(d-1)} alpha_n: when the last
    // increment is not a small fraction of the total, the sum is treated as
    // divergent and the d-2 exponent variant takes over.
    auto partial = [&](int expo) {
        double s = 0.0, last = 0.0;
        for (int n = 0; n <= n_max_; ++n) {
            last = std::pow(2.0, double(n) * expo) * alpha_[n];
            s += last;
        }
        return std::pair<double, double>(s, last);
    };
    auto [s1, last1] = partial(d - 1);
    if (last1 > 0.05 * s1) {
        fallback_ = true;
        C0_ = partial(d - 2).first;
    } else {
        C0_ = s1;
    }
    gamma_.resize(n_max_ + 1);
    for (int n = 0; n <= n_max_; ++n) gamma_[n] = alpha_[n] / C0_;
    if (C1_ > C0_)
        throw UsageError("ScaleSystem: C1 must not exceed C0 = " + std::to_string(C0_));
}

double ScaleSystem::gamma_cut(int n) const {
    if (n < 0 || n > n_max_) throw UsageError("gamma_cut: scale out of range");
    return fallback_ ? std::ldexp(gamma_[n], -n) : gamma_[n];
}

double ScaleSystem::bryuno_partial_sum(int n_max) const {
    if (n_max > n_max_) throw UsageError("bryuno_partial_sum: beyond tabulated scales");
    double s = 0.0;
    for (int n = 0; n <= n_max; ++n) s += std::ldexp(std::log(1.0 / alpha_[n]), -n);
    return s;
}

double ScaleSystem::psi_n(int n, double y) const {
    return smooth_step(y / (beta_param * gamma_cut(n)), C1_);
}

double ScaleSystem::chi_n(int n, double y) const { return 1.0 - psi_n(n, y); }

double ScaleSystem::support_product(double x, int n, double lambda0) const {
    return support_product_from(0, x, n, lambda0);
}

double ScaleSystem::support_product_from(int p, double x, int n, double lambda0) const {
    if (n < p) throw UsageError("support_product: n < starting scale");
    double y = delta0(x, lambda0);
    double prod = 1.0;
    for (int q = p; q < n; ++q) {
        prod *= chi_n(q, y);
        if (prod == 0.0) return 0.0;
    }
    return prod * psi_n(n, y);
}

DivisorGateReport ScaleSystem::melnikov_gate(double lambda0, int N_check) const {
    if (N_check > (1 << n_max_))
        throw UsageError("melnikov_gate: N_check exceeds 2^n_max");
    DivisorGateReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    const std::size_t d = omega_.size();
    Momentum nu(d, 0);
    while (true) {
        int l1 = l1_norm(nu);
        if (l1 > 0 && l1 <= N_check) {
            double thr = C1_ * gamma_cut(scale_of_norm(l1));
            double wn = dot(omega_, nu);
            // by construction |omega.nu| >= alpha_{n(nu)} = C0 gamma >= C1 gamma_cut
            for (double sgn : {+1.0, -1.0}) {
                double margin = std::abs(wn + sgn * 2.0 * lambda0) - thr;
                if (margin < rep.worst_margin) {
                    rep.worst_margin = margin;
                    rep.worst_nu = nu;
                }
            }
        }
        std::size_t i = 0;
        while (i < d) {
            if (nu[i] < N_check) {
                ++nu[i];
                break;
            }
            nu[i] = -N_check;
            ++i;
        }
        if (i == d) break;
    }
    rep.accepted = rep.worst_margin > 0.0;
    return rep;
}

} // namespace qpr
