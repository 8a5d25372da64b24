#include "mcdemod/analysis.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace mcdemod {

namespace {
constexpr double kPi = 3.14159265358979323846264338328;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

double l2_error(const std::vector<DemodOutput>& estimates,
                const std::function<double(double)>& reference, int channel,
                double window_lo, double window_hi) {
    if (!(window_hi > window_lo)) throw std::invalid_argument("l2_error: empty window");

    double acc = 0.0;
    double prev_t = 0.0, prev_e2 = 0.0;
    bool have_prev = false;
    std::size_t used = 0;
    for (const auto& out : estimates) {
        if (out.t < window_lo || out.t > window_hi) continue;
        if (channel < 0 || channel >= out.n)
            throw std::invalid_argument("l2_error: channel out of range");
        if (!out.valid)
            throw std::runtime_error("l2_error: invalid estimate inside the scoring window");
        const double e = out.z[static_cast<std::size_t>(channel)] - reference(out.t);
        const double e2 = e * e;
        if (have_prev) acc += 0.5 * (e2 + prev_e2) * (out.t - prev_t);
        prev_t = out.t;
        prev_e2 = e2;
        have_prev = true;
        ++used;
    }
    if (used < 2) throw std::invalid_argument("l2_error: window contains fewer than 2 samples");
    return std::sqrt(acc);
}

SlopeFit convergence_slope(const std::vector<double>& epsilons,
                           const std::vector<double>& errors) {
    if (epsilons.size() != errors.size() || epsilons.size() < 3)
        throw std::invalid_argument("convergence_slope: need >= 3 matching points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto m = static_cast<double>(epsilons.size());
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0) || !(errors[i] > 0.0))
            throw std::invalid_argument("convergence_slope: values must be positive");
        const double lx = std::log(epsilons[i]);
        const double ly = std::log(errors[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    SlopeFit fit;
    fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double intercept = (sy - fit.slope * sx) / m;
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        const double dev =
            std::abs(std::log(errors[i]) - (intercept + fit.slope * std::log(epsilons[i])));
        fit.residual = std::max(fit.residual, dev);
    }
    return fit;
}

std::vector<double> log_spaced_grid(double lo_log10, double hi_log10, int count) {
    if (count < 1 || !(hi_log10 > lo_log10))
        throw std::invalid_argument("log_spaced_grid: bad range");
    std::vector<double> g(count);
    if (count == 1) {
        g[0] = std::pow(10.0, hi_log10);
        return g;
    }
    for (int i = 0; i < count; ++i)
        g[i] = std::pow(10.0, hi_log10 + (lo_log10 - hi_log10) * i / (count - 1));
    return g;
}

SweepOutcome run_sweep(const SweepPlan& plan) {
    if (plan.ks.empty() || plan.epsilons.empty())
        throw std::invalid_argument("run_sweep: empty (k, epsilon) grid");
    for (std::size_t i = 1; i < plan.epsilons.size(); ++i)
        if (!(plan.epsilons[i] < plan.epsilons[i - 1]))
            throw std::invalid_argument("run_sweep: epsilons must be strictly decreasing");
    if (plan.channel < 0 || plan.channel >= static_cast<int>(plan.Z.size()))
        throw std::invalid_argument("run_sweep: scored channel out of range");

    struct Cell {
        int k;
        double eps;
        std::size_t ki, ei;
    };
    std::vector<Cell> cells;
    for (std::size_t ki = 0; ki < plan.ks.size(); ++ki)
        for (std::size_t ei = 0; ei < plan.epsilons.size(); ++ei)
            cells.push_back({plan.ks[ki], plan.epsilons[ei], ki, ei});

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<double>> errs(plan.ks.size(),
                                          std::vector<double>(plan.epsilons.size(), nan));
    std::vector<SweepCellError> failures;
    std::mutex failures_mtx;

    const auto reference = plan.Z[static_cast<std::size_t>(plan.channel)];
    auto work_cell = [&](const Cell& cell) {
        try {
            const double delta = cell.eps / plan.delta_divisor;
            const SampledSignal sig =
                synthesize(plan.Z, plan.S, plan.disturbance, cell.eps, delta,
                           plan.t_begin, plan.t_end);
            const auto est = demodulate_batch(plan.S, plan.R, cell.k, cell.eps, delta, sig,
                                              plan.kappa_threshold);
            errs[cell.ki][cell.ei] =
                l2_error(est, reference, plan.channel, plan.window_lo, plan.window_hi);
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(failures_mtx);
            failures.push_back({cell.k, cell.eps, e.what()});
        }
    };

    unsigned workers = plan.workers > 0 ? static_cast<unsigned>(plan.workers)
                                        : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, cells.size()));
    if (workers == 1) {
        for (const Cell& c : cells) work_cell(c);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= cells.size()) return;
                    work_cell(cells[i]);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    SweepOutcome outcome;
    outcome.errors = std::move(failures);
    for (std::size_t ki = 0; ki < plan.ks.size(); ++ki) {
        SweepResult res;
        res.k = plan.ks[ki];
        res.epsilons = plan.epsilons;
        res.l2_errors = errs[ki];
        bool clean = true;
        for (double v : errs[ki]) clean = clean && std::isfinite(v) && v > 0.0;
        if (clean && errs[ki].size() >= 3) {
            const SlopeFit fit = convergence_slope(plan.epsilons, errs[ki]);
            res.fitted_slope = fit.slope;
            res.fit_residual = fit.residual;
        } else {
            res.fitted_slope = nan;
            res.fit_residual = nan;
        }
        outcome.results.push_back(std::move(res));
    }
    return outcome;
}

std::vector<double> kappa_trace(const CarrierBasis& S, const CarrierBasis& R,
                                const std::vector<double>& t_grid, int quad_n) {
    std::vector<double> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) out.push_back(condition_number(mean_product(S, R, t, quad_n)));
    return out;
}

namespace {

// cos^p bump on [-w, w]: C^(p-1) with analytic derivatives. The residual
// check differentiates the bump k times, so p = k+2 keeps every integrand
// edge-flat; that cancels the h^2 midpoint error term and leaves O(h^4),
// making the refinement ratio ~16 per halving instead of ~4.
struct CosBump {
    double w;
    int p;

    double operator()(int deriv, double s) const {
        if (std::abs(s) >= w) return 0.0;
        const double a = 0.5 * kPi / w;  // u = a*s
        const double cu = std::cos(a * s);
        const double su = std::sin(a * s);
        switch (deriv) {
            case 0: return std::pow(cu, p);
            case 1: return -p * a * std::pow(cu, p - 1) * su;
            case 2:
                return p * a * a *
                       ((p - 1) * std::pow(cu, p - 2) * su * su - std::pow(cu, p));
            default: throw std::invalid_argument("bump derivative order not supported");
        }
    }
};

double poly_deriv_eval(const std::vector<double>& c, int deriv, double t) {
    double acc = 0.0;
    for (std::size_t j = c.size(); j-- > 0;) {
        const int jj = static_cast<int>(j);
        if (jj < deriv) break;
        double f = 1.0;
        for (int m = 0; m < deriv; ++m) f *= jj - m;
        acc = acc * t + c[j] * f;
    }
    return acc;
}

}  // namespace

double shift_identity_residual(int k, double epsilon, double t, int quad_points,
                               const std::vector<double>& a_poly) {
    if (k < 0 || k > 2) throw std::invalid_argument("shift identity: k must be in [0, 2]");
    if (quad_points < 16) throw std::invalid_argument("shift identity: too few points");
    if (!(epsilon > 0.0)) throw std::invalid_argument("shift identity: bad epsilon");
    if (a_poly.empty()) throw std::invalid_argument("shift identity: empty polynomial");

    const CosBump phi{0.5, k + 2};
    const double h = 2.0 * phi.w / quad_points;

    // The k-th zero-mean primitive of cos(2*pi*sigma) in sigma is
    // cos(2*pi*sigma - k*pi/2) / (2*pi)^k.
    const double phase_shift = k * 0.5 * kPi;
    const double osc_scale = std::pow(kTwoPi, -k);

    double lhs = 0.0;
    double rhs = 0.0;
    const double eps_pow = std::pow(-epsilon, k);
    for (int j = 0; j < quad_points; ++j) {
        const double s = -phi.w + (j + 0.5) * h;
        const double tau = t - s;
        const double carrier = std::cos(kTwoPi * tau / epsilon);
        lhs += h * phi(0, s) * poly_deriv_eval(a_poly, 0, tau) * carrier;

        const double prim = std::cos(kTwoPi * tau / epsilon - phase_shift) * osc_scale;
        double term = 0.0;
        double sg = 1.0;
        for (int i = 0; i <= k; ++i) {
            term += sg * binomial(k, i) * phi(i, s) * poly_deriv_eval(a_poly, k - i, tau);
            sg = -sg;
        }
        rhs += h * eps_pow * term * prim;
    }
    return std::abs(lhs - rhs);
}

}  // namespace mcdemod
