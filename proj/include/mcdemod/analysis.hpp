#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mcdemod/carriers.hpp"
#include "mcdemod/demod.hpp"
#include "mcdemod/siggen.hpp"

namespace mcdemod {

struct SweepResult {
    int k = 0;
    std::vector<double> epsilons;  // strictly decreasing
    std::vector<double> l2_errors;
    double fitted_slope = 0.0;
    double fit_residual = 0.0;  // max |log deviation| from the fit
};

struct SweepCellError {
    int k = 0;
    double epsilon = 0.0;
    std::string message;
};

struct SweepPlan {
    EncodedSignals Z;
    CarrierBasis S;
    CarrierBasis R;
    const DisturbanceModel* disturbance = nullptr;  // optional, not owned
    std::vector<int> ks;
    std::vector<double> epsilons;  // strictly decreasing
    int delta_divisor = 200;       // samples per carrier period
    double t_begin = 0.0;
    double t_end = 5.0;
    double window_lo = 1.0;  // scoring window
    double window_hi = 5.0;
    int channel = 1;  // scored estimate channel (0-based)
    double kappa_threshold = 1e6;
    int workers = 0;  // 0: hardware concurrency
};

struct SweepOutcome {
    std::vector<SweepResult> results;
    std::vector<SweepCellError> errors;
};

// L2 distance between an estimate channel and the reference on [lo, hi]
// (trapezoidal in t). Every estimate sample inside the window must be valid.
double l2_error(const std::vector<DemodOutput>& estimates,
                const std::function<double(double)>& reference, int channel,
                double window_lo, double window_hi);

struct SlopeFit {
    double slope = 0.0;
    double residual = 0.0;
};

// Least-squares line through (log eps, log err); needs >= 3 positive points.
SlopeFit convergence_slope(const std::vector<double>& epsilons,
                           const std::vector<double>& errors);

// `count` log-spaced values from 10^hi_log10 down to 10^lo_log10.
std::vector<double> log_spaced_grid(double lo_log10, double hi_log10, int count);

// Synthesize / demodulate / score every (k, eps) cell, in parallel. Cells
// that fail are reported individually; surviving cells still produce results
// (a result with fewer than 3 clean points keeps slope = NaN).
SweepOutcome run_sweep(const SweepPlan& plan);

// Condition number of the instantaneous mean-product matrix on a time grid,
// computed by quadrature (the oracle the streaming estimate is judged
// against).
std::vector<double> kappa_trace(const CarrierBasis& S, const CarrierBasis& R,
                                const std::vector<double>& t_grid, int quad_n);

// Residual of the k-fold convolution-shift identity
//   phi * g_eps = (-eps)^k sum_i (-1)^i C(k,i) phi^(i) * (d1^(k-i) G_k)_eps
// for g(t,sigma) = a(t) cos(2*pi*sigma) with polynomial a and G_k its k-th
// zero-mean phase primitive (closed form). phi is a C^k cosine-power bump.
// Both sides share one midpoint grid of `quad_points`; k in [0, 2].
double shift_identity_residual(int k, double epsilon, double t, int quad_points,
                               const std::vector<double>& a_poly);

}  // namespace mcdemod
