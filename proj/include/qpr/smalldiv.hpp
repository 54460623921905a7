#pragma once

#include <optional>
#include <vector>

#include "qpr/momentum.hpp"

namespace qpr {

// Multiscale bookkeeping for a fixed frequency vector omega:
// the sequence alpha_n of smallest divisors, the normalisation constant C0,
// the ratios gamma_n used by the cutoff windows and by the non-resonance
// gates, and the smooth partition of unity built on top of them.

// alpha_n = min over 0 < |nu|_1 <= 2^n of |omega.nu|, by exhaustive lattice
// search. Throws RationalDependenceError if an exact zero shows up.
std::vector<double> alpha_sequence(const std::vector<double>& omega, int n_max);

// Partial sum  sum_{n=0..n_max} 2^{-n} log(1/alpha_n).
double bryuno_partial(const std::vector<double>& omega, int n_max);

// Unique n >= 0 with 2^{n-1} < |nu|_1 <= 2^n. Throws on nu = 0.
int scale_of(const Momentum& nu);
int scale_of_norm(int l1);

// C-infinity step: 0 for |x| <= C1/2, 1 for |x| >= C1, even in x and
// non-decreasing in |x| in between.
double smooth_step(double x, double C1);

// Divisor proxy: harmonic combination of the two divisor distances.
// Vanishes continuously at x = 0 and x = -2*lambda0 and is pinched between
// min{|x|,|x+2 lambda0|} and sqrt(2) times it.
double delta0(double x, double lambda0);

// 0 when x + lambda0 >= 0, else lambda0; |x + 2 rho0(x)| equals
// min{|x|, |x+2 lambda0|}.
double rho0(double x, double lambda0);

struct DivisorGateReport {
    bool accepted = false;
    std::optional<Momentum> worst_nu;
    double worst_margin = 0.0;
};

class ScaleSystem {
  public:
    // Builds alpha/gamma tables for omega up to n_max. The sum defining C0
    // uses the d-1 dyadic exponent; when its partial sums fail a Cauchy
    // test the d-2 fallback variant is selected and every gamma_n used in
    // cutoffs and gates picks up an extra 2^{-n}.
    ScaleSystem(std::vector<double> omega, int n_max, double C1);

    const std::vector<double>& omega() const { return omega_; }
    int n_max() const { return n_max_; }
    double C0() const { return C0_; }
    double C1() const { return C1_; }
    static constexpr double beta_param = 0.25;
    bool fallback_variant() const { return fallback_; }

    double alpha(int n) const { return alpha_[n]; }
    double gamma(int n) const { return gamma_[n]; }
    // gamma with the fallback 2^{-n} correction applied when active; this is
    // the value entering cutoffs, windows and gates.
    double gamma_cut(int n) const;

    double bryuno_partial_sum(int n_max) const;

    // Scale-n cutoff pair evaluated at a divisor-proxy value y.
    double psi_n(int n, double y) const;
    double chi_n(int n, double y) const;

    // Window function Psi_n(x) = chi_0(..)...chi_{n-1}(..) psi_n(..), all
    // evaluated at delta0(x); the family sums to 1 for delta0(x) above the
    // deepest resolved window.
    double support_product(double x, int n, double lambda0) const;
    // Same with the cutoff chain starting at scale p.
    double support_product_from(int p, double x, int n, double lambda0) const;

    // Melnikov gate: |omega.nu +- 2 lambda0| > C1 gamma_cut(n(nu)) for all
    // 0 < |nu|_1 <= N_check. The companion bound on |omega.nu| alone holds
    // by construction for C1 <= C0 and is asserted, not searched.
    DivisorGateReport melnikov_gate(double lambda0, int N_check) const;

  private:
    std::vector<double> omega_;
    int n_max_;
    double C0_ = 0.0;
    double C1_;
    bool fallback_ = false;
    std::vector<double> alpha_;
    std::vector<double> gamma_;
};

} // namespace qpr
