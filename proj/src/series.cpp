#include "qpr/series.hpp"

#include <cmath>

#include "qpr/errors.hpp"

namespace qpr {

namespace {
const Complex I(0.0, 1.0);

void check_divisor(double div, const Momentum& nu, double floor) {
    if (std::abs(div) < floor)
        throw SmallDivisorViolation("divisor " + std::to_string(div) + " below floor at nu=" +
                                    to_string(nu));
}
} // namespace

const OrderSlice& FormalSeries::order(int k) const {
    if (k < 1 || k > K()) throw UsageError("order " + std::to_string(k) + " not computed");
    return slices[k - 1];
}

OrderSlice solve_order_1(const MatrixField& g, const std::vector<double>& omega,
                         double lambda0, double divisor_floor) {
    validate_complex_field(g);
    OrderSlice s;
    const Momentum zero = zero_momentum(omega.size());
    ScalarField g11 = g.entry_field(0, 0);
    ScalarField g21 = g.entry_field(1, 0);
    for (const auto& [nu, v] : g11) {
        if (is_zero(nu)) continue;
        double div = dot(omega, nu);
        check_divisor(div, nu, divisor_floor);
        s.a[nu] = -I * v / div;
    }
    for (const auto& [nu, v] : g21) {
        if (is_zero(nu)) continue;
        double div = dot(omega, nu) + 2.0 * lambda0;
        check_divisor(div, nu, divisor_floor);
        s.c[nu] = -I * v / div;
    }
    s.mu = I * g.entry(0, 0, zero);
    check_divisor(2.0 * lambda0, zero, divisor_floor);
    s.c0 = -I * g.entry(1, 0, zero) / (2.0 * lambda0);
    s.a0 = 0.0;
    s.a[zero] = s.a0;
    s.c[zero] = s.c0;
    return s;
}

OrderSlice solve_order_k(const FormalSeries& series, const MatrixField& g, int k) {
    if (k < 2) throw UsageError("solve_order_k requires k >= 2");
    if (k != series.K() + 1)
        throw UsageError("orders must be solved in sequence: asked for k=" +
                         std::to_string(k) + " with " + std::to_string(series.K()) +
                         " orders done");
    const auto& omega = series.omega;
    const double lambda0 = series.lambda0;
    const Momentum zero = zero_momentum(omega.size());
    const OrderSlice& prev = series.order(k - 1);

    OrderSlice s;
    // source convolutions; supports grow by at most N_f per order, so no
    // truncation is applied and the dropped mass stays zero for banded g
    ScalarField conv_a = convolve(g.entry_field(0, 0), prev.a, -1, &s.dropped_mass);
    for (auto& [nu, v] : convolve(g.entry_field(0, 1), prev.c, -1, &s.dropped_mass))
        conv_a[nu] += v;
    ScalarField conv_c = convolve(g.entry_field(1, 0), prev.a, -1, &s.dropped_mass);
    for (auto& [nu, v] : convolve(g.entry_field(1, 1), prev.c, -1, &s.dropped_mass))
        conv_c[nu] += v;

    // zero modes first: they only need lower orders
    Complex mu_a_sum = 0.0, mu_c0_sum = 0.0;
    for (int k1 = 1; k1 <= k - 1; ++k1) {
        const OrderSlice& s1 = series.order(k1);
        const OrderSlice& s2 = series.order(k - k1);
        mu_a_sum += s1.mu * s2.a0;
        mu_c0_sum += s1.mu * s2.c0;
    }
    Complex conv_a0 = conv_a.count(zero) ? conv_a[zero] : Complex(0.0);
    Complex conv_c0 = conv_c.count(zero) ? conv_c[zero] : Complex(0.0);
    s.mu = I * (conv_a0 + I * mu_a_sum);
    s.c0 = -I / (2.0 * lambda0) * (conv_c0 - I * mu_c0_sum);

    // counterterm insertions act mode-by-mode; collect every nu where either
    // the convolution or a lower-order slice has support
    auto mu_insertion = [&](bool comp_a, const Momentum& nu) {
        Complex t = 0.0;
        for (int k1 = 1; k1 <= k - 1; ++k1) {
            const OrderSlice& lower = series.order(k - k1);
            const ScalarField& u = comp_a ? lower.a : lower.c;
            auto it = u.find(nu);
            if (it != u.end()) t += series.order(k1).mu * it->second;
        }
        return t;
    };
    ScalarField active_a = conv_a, active_c = conv_c;
    for (int q = 1; q <= k - 1; ++q) {
        for (const auto& [nu, v] : series.order(q).a) active_a.emplace(nu, 0.0);
        for (const auto& [nu, v] : series.order(q).c) active_c.emplace(nu, 0.0);
    }
    for (const auto& [nu, ignored] : active_a) {
        if (is_zero(nu)) continue;
        Complex conv = conv_a.count(nu) ? conv_a[nu] : Complex(0.0);
        double div = dot(omega, nu);
        check_divisor(div, nu, series.divisor_floor);
        s.a[nu] = -I / div * (conv + I * mu_insertion(true, nu));
    }
    for (const auto& [nu, ignored] : active_c) {
        if (is_zero(nu)) continue;
        Complex conv = conv_c.count(nu) ? conv_c[nu] : Complex(0.0);
        double div = dot(omega, nu) + 2.0 * lambda0;
        check_divisor(div, nu, series.divisor_floor);
        s.c[nu] = -I / div * (conv - I * mu_insertion(false, nu));
    }

    // a_k(0) from the first-integral normalisation
    Complex acc = 0.0;
    for (int k1 = 1; k1 <= k - 1; ++k1) {
        const OrderSlice& s1 = series.order(k1);
        const OrderSlice& s2 = series.order(k - k1);
        for (const auto& [nu, v] : s1.a) {
            auto it = s2.a.find(nu);
            if (it != s2.a.end()) acc += v * std::conj(it->second);
        }
        for (const auto& [nu, v] : s1.c) {
            auto it = s2.c.find(nu);
            if (it != s2.c.end()) acc -= v * std::conj(it->second);
        }
    }
    s.a0 = -0.5 * acc.real(); // acc is real up to roundoff by k1<->k2 symmetry
    s.a[zero] = s.a0;
    s.c[zero] = s.c0;
    return s;
}

FormalSeries solve_series(const MatrixField& g, const std::vector<double>& omega,
                          double lambda0, int K, double divisor_floor) {
    if (K < 1) throw UsageError("solve_series: K must be >= 1");
    FormalSeries fs;
    fs.omega = omega;
    fs.lambda0 = lambda0;
    fs.N_f = g.support_radius();
    fs.divisor_floor = divisor_floor;
    fs.slices.push_back(solve_order_1(g, omega, lambda0, divisor_floor));
    for (int k = 2; k <= K; ++k) fs.slices.push_back(solve_order_k(fs, g, k));
    return fs;
}

ScalarField first_integral_order(const FormalSeries& series, int k) {
    const OrderSlice& sk = series.order(k);
    ScalarField H = sk.a;
    for (auto& [nu, v] : conj_reflect(sk.a)) H[nu] += v;
    for (int k1 = 1; k1 <= k - 1; ++k1) {
        const OrderSlice& s1 = series.order(k1);
        const OrderSlice& s2 = series.order(k - k1);
        for (auto& [nu, v] : convolve(s1.a, conj_reflect(s2.a))) H[nu] += v;
        for (auto& [nu, v] : convolve(s1.c, conj_reflect(s2.c))) H[nu] -= v;
    }
    return H;
}

Mat2 evaluate_beta(const FormalSeries& series, double eps,
                   const std::vector<double>& psi) {
    Mat2 B = Mat2::identity();
    double ek = 1.0;
    for (int k = 1; k <= series.K(); ++k) {
        ek *= eps;
        const OrderSlice& s = series.order(k);
        Complex a = eval_scalar(s.a, psi);
        Complex c = eval_scalar(s.c, psi);
        B(0, 0) += ek * a;
        B(0, 1) += ek * std::conj(c);
        B(1, 0) += ek * c;
        B(1, 1) += ek * std::conj(a);
    }
    return B;
}

double evaluate_mu(const FormalSeries& series, double eps) {
    double mu = 0.0, ek = 1.0;
    for (int k = 1; k <= series.K(); ++k) {
        ek *= eps;
        mu += ek * series.order(k).mu.real();
    }
    return mu;
}

double order_scale(const FormalSeries& series, int k) {
    const OrderSlice& s = series.order(k);
    double m = std::abs(s.mu);
    m = std::max(m, max_abs(s.a));
    m = std::max(m, max_abs(s.c));
    return m;
}

} // namespace qpr
