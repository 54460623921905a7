#include "qpr/measure.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "qpr/errors.hpp"

namespace qpr {

namespace {

struct Resonance {
    Momentum nu;
    double omega_nu;
    double width; // gamma_cut at the dyadic scale of nu
};

// one representative per {nu, -nu}: both signs of 2*lambda0 are tested anyway
std::vector<Resonance> resonance_catalogue(const ScaleSystem& scales, int N_check) {
    if (N_check > (1 << scales.n_max()))
        throw UsageError("scan: N_check exceeds the tabulated scales");
    std::vector<Resonance> cat;
    const std::size_t d = scales.omega().size();
    Momentum nu(d, 0);
    while (true) {
        int l1 = l1_norm(nu);
        if (l1 > 0 && l1 <= N_check) {
            bool lead_positive = false;
            for (int c : nu) {
                if (c > 0) lead_positive = true;
                if (c != 0) break;
            }
            if (lead_positive)
                cat.push_back({nu, dot(scales.omega(), nu),
                               scales.gamma_cut(scale_of_norm(l1))});
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
    return cat;
}

} // namespace

ScanReport scan_lambda0(double a0, double b0, int grid_size, const ScaleSystem& scales,
                        int N_check, int jobs) {
    if (grid_size < 2 || b0 <= a0) throw UsageError("scan: bad interval or grid");
    auto cat = resonance_catalogue(scales, N_check);
    const double C1 = scales.C1();

    ScanReport rep;
    rep.C1 = C1;
    rep.grid.resize(grid_size);
    rep.accepted.resize(grid_size);
    rep.worst_nu.resize(grid_size);
    rep.worst_margin.resize(grid_size);
    rep.lambda_image.assign(grid_size, std::numeric_limits<double>::quiet_NaN());
    const double spacing = (b0 - a0) / (grid_size - 1);

    auto work = [&](int lo, int hi) {
        for (int i = lo; i < hi; ++i) {
            double l0 = a0 + spacing * i;
            rep.grid[i] = l0;
            double worst = std::numeric_limits<double>::infinity();
            const Resonance* worst_r = nullptr;
            for (const auto& r : cat) {
                double thr = C1 * r.width;
                for (double sgn : {1.0, -1.0}) {
                    double margin = std::abs(r.omega_nu + sgn * 2.0 * l0) - thr;
                    if (margin < worst) {
                        worst = margin;
                        worst_r = &r;
                    }
                }
            }
            rep.worst_margin[i] = worst;
            rep.worst_nu[i] = worst_r ? worst_r->nu : Momentum{};
            rep.accepted[i] = worst > 0.0 ? 1 : 0;
        }
    };
    jobs = std::max(1, jobs);
    if (jobs == 1) {
        work(0, grid_size);
    } else {
        std::vector<std::future<void>> futs;
        int chunk = (grid_size + jobs - 1) / jobs;
        for (int j = 0; j < jobs; ++j) {
            int lo = j * chunk, hi = std::min(grid_size, lo + chunk);
            if (lo >= hi) break;
            futs.push_back(std::async(std::launch::async, work, lo, hi));
        }
        for (auto& f : futs) f.get();
    }

    long rejected = std::count(rep.accepted.begin(), rep.accepted.end(), 0);
    rep.excluded_measure = spacing * rejected;
    double gate_sum = 0.0;
    for (const auto& r : cat) gate_sum += 2.0 * r.width; // nu and -nu
    rep.theoretical_ceiling = C1 * gate_sum;
    return rep;
}

double lambda_map(double lambda0, const MatrixField& g, const std::vector<double>& omega,
                  double eps, int K, double divisor_floor) {
    FormalSeries fs = solve_series(g, omega, lambda0, K, divisor_floor);
    return lambda0 + evaluate_mu(fs, eps);
}

double fill_lambda_images(ScanReport& report, const MatrixField& g,
                          const std::vector<double>& omega, double eps, int K,
                          int stride, double divisor_floor) {
    stride = std::max(1, stride);
    std::vector<int> mapped;
    for (std::size_t i = 0; i < report.grid.size(); i += stride) {
        if (!report.accepted[i]) continue;
        report.lambda_image[i] =
            lambda_map(report.grid[i], g, omega, eps, K, divisor_floor);
        mapped.push_back(static_cast<int>(i));
    }
    // |d mu / d lambda0| across neighbouring mapped points
    double worst = 0.0;
    for (std::size_t q = 1; q + 1 < mapped.size(); ++q) {
        int il = mapped[q - 1], im = mapped[q], ir = mapped[q + 1];
        double dl = report.grid[ir] - report.grid[il];
        if (dl <= 0) continue;
        double mu_r = report.lambda_image[ir] - report.grid[ir];
        double mu_l = report.lambda_image[il] - report.grid[il];
        worst = std::max(worst, std::abs((mu_r - mu_l) / dl));
        (void)im;
    }
    return worst;
}

IntervalSetup interval_setup(double a, double b, double eps, double A_margin, double C1,
                             double mu1, double sigma) {
    if (C1 <= 0.0) throw UsageError("interval_setup: C1 must be positive");
    double margin = A_margin * eps * eps / C1;
    IntervalSetup s;
    s.a0 = a - eps * mu1 + margin;
    s.b0 = b - eps * mu1 - margin;
    if (s.b0 - s.a0 <= 0.0)
        throw ConfigError("interval_setup: margins collapse the interval");
    if (a < 0.0 && b > 0.0) {
        s.has_origin_gap = true;
        s.gap_half_width = std::pow(std::abs(eps), sigma);
    }
    return s;
}

double estimate_A_margin(double a0, double b0, int coarse_grid, const ScaleSystem& scales,
                         int N_check, const MatrixField& g, double eps, int K) {
    ScanReport rep = scan_lambda0(a0, b0, coarse_grid, scales, N_check);
    double worst = 0.0;
    for (std::size_t i = 0; i < rep.grid.size(); ++i) {
        if (!rep.accepted[i]) continue;
        FormalSeries fs = solve_series(g, scales.omega(), rep.grid[i], K);
        double mu = evaluate_mu(fs, eps);
        double mu1 = fs.order(1).mu.real();
        worst = std::max(worst, std::abs(mu - eps * mu1) * scales.C1() / (eps * eps));
    }
    return worst;
}

} // namespace qpr
