#include "qpr/verify.hpp"

#include <cmath>

#include "qpr/errors.hpp"

namespace qpr {

namespace {

const Complex I(0.0, 1.0);

Mat2 rotation_generator() {
    Mat2 a;
    a(0, 1) = 1.0;
    a(1, 0) = -1.0;
    return a;
}

Mat2 diag_generator() {
    Mat2 a;
    a(0, 0) = I;
    a(1, 1) = -I;
    return a;
}

// frame change z = M x M^{-1} with M = (1/2)[[1,-i],[1,i]]
Mat2 to_complex_frame(const Mat2& x) {
    Mat2 z;
    z(0, 0) = 0.5 * (x(0, 0) + x(1, 1) + I * (x(0, 1) - x(1, 0)));
    z(0, 1) = 0.5 * (x(0, 0) - x(1, 1) - I * (x(0, 1) + x(1, 0)));
    z(1, 0) = 0.5 * (x(0, 0) - x(1, 1) + I * (x(0, 1) + x(1, 0)));
    z(1, 1) = 0.5 * (x(0, 0) + x(1, 1) - I * (x(0, 1) - x(1, 0)));
    return z;
}

long step_count(double T, double h) {
    if (h <= 0.0 || T < 0.0) throw UsageError("integrator needs h > 0 and T >= 0");
    long n = std::lround(T / h);
    if (n > 10000000L) throw ResourceError("integration budget T/h exceeds 1e7 steps");
    return n;
}

Mat2 inverse(const Mat2& m) {
    Complex d = m.det();
    Mat2 r;
    r(0, 0) = m(1, 1) / d;
    r(0, 1) = -m(0, 1) / d;
    r(1, 0) = -m(1, 0) / d;
    r(1, 1) = m(0, 0) / d;
    return r;
}

} // namespace

MatrixTrajectory integrate_full(double lambda, double eps, const MatrixField& f_real,
                                const std::vector<double>& omega, const Mat2& x0,
                                double T, double h) {
    long n = step_count(T, h);
    const Mat2 A = rotation_generator();
    auto rhs = [&](double t, const Mat2& x) {
        std::vector<double> psi(omega.size());
        for (std::size_t i = 0; i < omega.size(); ++i) psi[i] = omega[i] * t;
        Mat2 coef = A * Complex(lambda) + f_real.eval(psi) * Complex(eps);
        return coef * x;
    };
    MatrixTrajectory traj;
    traj.h = h;
    traj.times.reserve(n + 1);
    traj.states.reserve(n + 1);
    Mat2 x = x0;
    double t = 0.0;
    traj.times.push_back(t);
    traj.states.push_back(x);
    for (long s = 0; s < n; ++s) {
        Mat2 k1 = rhs(t, x);
        Mat2 k2 = rhs(t + 0.5 * h, x + k1 * Complex(0.5 * h));
        Mat2 k3 = rhs(t + 0.5 * h, x + k2 * Complex(0.5 * h));
        Mat2 k4 = rhs(t + h, x + k3 * Complex(h));
        x = x + (k1 + k2 * Complex(2.0) + k3 * Complex(2.0) + k4) * Complex(h / 6.0);
        t = (s + 1) * h;
        traj.times.push_back(t);
        traj.states.push_back(x);
    }
    return traj;
}

AuxTrajectory integrate_aux(double eps, double mu, double lambda0, const MatrixField& g,
                            const std::vector<double>& omega, Complex a0, Complex c0,
                            double T, double h) {
    long n = step_count(T, h);
    auto rhs = [&](double t, Complex a, Complex c) {
        AuxiliaryState s{a, c, t};
        return auxiliary_rhs(s, eps, mu, lambda0, g, omega);
    };
    AuxTrajectory traj;
    traj.h = h;
    traj.times.reserve(n + 1);
    traj.states.reserve(n + 1);
    Complex a = a0, c = c0;
    double t = 0.0;
    traj.times.push_back(t);
    traj.states.emplace_back(a, c);
    for (long s = 0; s < n; ++s) {
        auto k1 = rhs(t, a, c);
        auto k2 = rhs(t + 0.5 * h, a + 0.5 * h * k1.da, c + 0.5 * h * k1.dc);
        auto k3 = rhs(t + 0.5 * h, a + 0.5 * h * k2.da, c + 0.5 * h * k2.dc);
        auto k4 = rhs(t + h, a + h * k3.da, c + h * k3.dc);
        a += h / 6.0 * (k1.da + 2.0 * k2.da + 2.0 * k3.da + k4.da);
        c += h / 6.0 * (k1.dc + 2.0 * k2.dc + 2.0 * k3.dc + k4.dc);
        t = (s + 1) * h;
        traj.times.push_back(t);
        traj.states.emplace_back(a, c);
    }
    return traj;
}

double conservation_drift(const AuxTrajectory& traj) {
    if (traj.states.empty()) return 0.0;
    double H0 = first_integral(traj.states[0].first, traj.states[0].second);
    double worst = 0.0;
    for (const auto& [a, c] : traj.states)
        worst = std::max(worst, std::abs(first_integral(a, c) - H0));
    return worst;
}

double det_drift(const MatrixTrajectory& traj) {
    if (traj.states.empty()) return 0.0;
    Complex d0 = traj.states[0].det();
    double worst = 0.0;
    for (const auto& x : traj.states) worst = std::max(worst, std::abs(x.det() - d0));
    return worst;
}

namespace {

// B(omega t) and its exact time derivative from the Fourier representation
void beta_and_dot(const FormalSeries& series, double eps, double t, Mat2& B, Mat2& Bdot) {
    const auto& omega = series.omega;
    std::vector<double> psi(omega.size());
    for (std::size_t i = 0; i < omega.size(); ++i) psi[i] = omega[i] * t;
    B = Mat2::identity();
    Bdot = Mat2{};
    double ek = 1.0;
    for (int k = 1; k <= series.K(); ++k) {
        ek *= eps;
        const OrderSlice& s = series.order(k);
        Complex a = 0.0, c = 0.0, da = 0.0, dc = 0.0;
        for (const auto& [nu, v] : s.a) {
            Complex ph = std::polar(1.0, dot(psi, nu) * 1.0); // nu.psi
            double w = dot(omega, nu);
            a += v * ph;
            da += I * w * v * ph;
        }
        for (const auto& [nu, v] : s.c) {
            Complex ph = std::polar(1.0, dot(psi, nu) * 1.0);
            double w = dot(omega, nu);
            c += v * ph;
            dc += I * w * v * ph;
        }
        B(0, 0) += ek * a;
        B(0, 1) += ek * std::conj(c);
        B(1, 0) += ek * c;
        B(1, 1) += ek * std::conj(a);
        Bdot(0, 0) += ek * da;
        Bdot(0, 1) += ek * std::conj(dc);
        Bdot(1, 0) += ek * dc;
        Bdot(1, 1) += ek * std::conj(da);
    }
}

} // namespace

double conjugation_residual(const FormalSeries& series, double eps, const MatrixField& g,
                            const std::vector<double>& t_grid) {
    const Mat2 A = diag_generator();
    double mu = evaluate_mu(series, eps);
    double worst = 0.0;
    for (double t : t_grid) {
        Mat2 B, Bdot;
        beta_and_dot(series, eps, t, B, Bdot);
        std::vector<double> psi(series.omega.size());
        for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = series.omega[i] * t;
        Mat2 gv = g.eval(psi);
        Mat2 commutator = B * A - A * B;
        Mat2 rhs = (gv * Complex(eps) + A * Complex(mu)) * B;
        Mat2 res = Bdot + commutator * Complex(series.lambda0) - rhs;
        worst = std::max(worst, max_abs_entry(res));
    }
    return worst;
}

std::pair<Complex, Complex> fixed_point_residual(const FormalSeries& series, double eps,
                                                 const MatrixField& g, const Momentum& nu) {
    // assemble the truncated solution at this eps
    ScalarField u1, u2;
    double ek = 1.0;
    for (int k = 1; k <= series.K(); ++k) {
        ek *= eps;
        for (const auto& [m, v] : series.order(k).a) u1[m] += ek * v;
        for (const auto& [m, v] : series.order(k).c) u2[m] += ek * v;
    }
    double mu = evaluate_mu(series, eps);
    const auto& omega = series.omega;
    const Momentum zero = zero_momentum(omega.size());

    auto phi = [&](int j) {
        ScalarField conv = convolve(g.entry_field(j - 1, 0), u1);
        for (auto& [m, v] : convolve(g.entry_field(j - 1, 1), u2)) conv[m] += v;
        Complex val = eps * g.entry(j - 1, 0, nu);
        if (j == 1 && nu == zero) val += I * mu;
        auto it = conv.find(nu);
        if (it != conv.end()) val += eps * it->second;
        const ScalarField& uj = j == 1 ? u1 : u2;
        auto ju = uj.find(nu);
        Complex ujv = ju == uj.end() ? Complex(0.0) : ju->second;
        val += (j == 1 ? I : -I) * mu * ujv;
        return val;
    };
    auto ucoef = [&](const ScalarField& u) {
        auto it = u.find(nu);
        return it == u.end() ? Complex(0.0) : it->second;
    };

    if (nu == zero) {
        Complex d1 = phi(1); // the counterterm equation itself
        Complex d2 = ucoef(u2) - (-I / (2.0 * series.lambda0)) * phi(2);
        return {d1, d2};
    }
    double x = dot(omega, nu);
    Complex d1 = ucoef(u1) - (-I / x) * phi(1);
    Complex d2 = ucoef(u2) - (-I / (x + 2.0 * series.lambda0)) * phi(2);
    return {d1, d2};
}

double fixed_point_order_defect(const FormalSeries& series, const MatrixField& g, int k) {
    const auto& omega = series.omega;
    const Momentum zero = zero_momentum(omega.size());
    const OrderSlice& sk = series.order(k);

    ScalarField conv1, conv2;
    if (k >= 2) {
        const OrderSlice& prev = series.order(k - 1);
        conv1 = convolve(g.entry_field(0, 0), prev.a);
        for (auto& [m, v] : convolve(g.entry_field(0, 1), prev.c)) conv1[m] += v;
        conv2 = convolve(g.entry_field(1, 0), prev.a);
        for (auto& [m, v] : convolve(g.entry_field(1, 1), prev.c)) conv2[m] += v;
    }
    auto mu_sum = [&](bool comp_a, const Momentum& nu) {
        Complex t = 0.0;
        for (int q = 1; q <= k - 1; ++q) {
            const OrderSlice& lower = series.order(k - q);
            const ScalarField& u = comp_a ? lower.a : lower.c;
            auto it = u.find(nu);
            if (it != u.end()) t += series.order(q).mu * it->second;
        }
        return t;
    };
    auto get = [](const ScalarField& f, const Momentum& nu) {
        auto it = f.find(nu);
        return it == f.end() ? Complex(0.0) : it->second;
    };

    double worst = 0.0;
    ScalarField all = sk.a;
    for (const auto& [m, v] : sk.c) all.emplace(m, 0.0);
    for (const auto& [m, v] : conv1) all.emplace(m, 0.0);
    for (const auto& [m, v] : conv2) all.emplace(m, 0.0);
    for (const auto& [nu, ignored] : all) {
        Complex src1 = (k == 1 ? g.entry(0, 0, nu) : get(conv1, nu)) + I * mu_sum(true, nu);
        Complex src2 = (k == 1 ? g.entry(1, 0, nu) : get(conv2, nu)) - I * mu_sum(false, nu);
        Complex d1, d2;
        if (is_zero(nu)) {
            d1 = src1 + I * sk.mu;
            d2 = I * (2.0 * series.lambda0) * sk.c0 - src2;
        } else {
            double x = dot(omega, nu);
            d1 = I * x * get(sk.a, nu) - src1;
            d2 = I * (x + 2.0 * series.lambda0) * get(sk.c, nu) - src2;
        }
        worst = std::max({worst, std::abs(d1), std::abs(d2)});
    }
    (void)zero;
    return worst;
}

ReducibilityReport reducibility_check(const FormalSeries& series, double eps,
                                      const MatrixField& g, double T, double h) {
    ReducibilityReport rep;
    rep.lambda = series.lambda0 + evaluate_mu(series, eps);
    MatrixField f_real = real_reduce(g);
    MatrixTrajectory traj =
        integrate_full(rep.lambda, eps, f_real, series.omega, Mat2::identity(), T, h);
    rep.drift_det = det_drift(traj);

    Mat2 B0, B0dot;
    beta_and_dot(series, eps, 0.0, B0, B0dot);
    Mat2 B0inv = inverse(B0);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        double t = traj.times[i];
        Mat2 z = to_complex_frame(traj.states[i]);
        Mat2 B, Bdot;
        beta_and_dot(series, eps, t, B, Bdot);
        Mat2 pred = B * base_solution(series.lambda0, t) * B0inv;
        rep.deviation = std::max(rep.deviation, max_abs_entry(z - pred));
        rep.sup_norm = std::max(rep.sup_norm, max_abs_entry(traj.states[i]));
    }
    return rep;
}

double fit_log_slope(const std::vector<double>& epsilons,
                     const std::vector<double>& values) {
    if (epsilons.size() != values.size() || epsilons.size() < 2)
        throw UsageError("fit_log_slope needs matching lists of length >= 2");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = static_cast<int>(epsilons.size());
    for (int i = 0; i < n; ++i) {
        double x = std::log(epsilons[i]);
        double y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace qpr
