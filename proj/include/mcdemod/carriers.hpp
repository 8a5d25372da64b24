#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "mcdemod/linalg.hpp"

namespace mcdemod {

// Wrap into [0, 1). wrap01(1.0) == 0.0, wrap01(-0.2) == 0.8.
inline double wrap01(double x) { return x - std::floor(x); }

enum class Smoothness { discontinuous, continuous, c1, smooth };

// A rapidly oscillating carrier s(t, sigma): 1-periodic in the phase sigma
// with a slowly drifting shape in t. breakpoints(t) reports the phase
// locations in [0,1) where s(t, .) is non-smooth, so quadratures can split
// there.
struct Carrier {
    std::function<double(double, double)> evaluator;          // (t, sigma), sigma wrapped inside
    std::function<std::vector<double>(double)> breakpoints;   // phases in [0,1)
    Smoothness smoothness_hint = Smoothness::smooth;

    double eval(double t, double sigma) const { return evaluator(t, wrap01(sigma)); }
};

using CarrierBasis = std::vector<Carrier>;

// Union of closed phase intervals [center(t) - w, center(t) + w] wrapped
// mod 1. Boundaries count as inside.
struct DisturbanceSupport {
    struct Interval {
        std::function<double(double)> center;
        double half_width = 0.0;
    };
    std::vector<Interval> intervals;

    bool contains(double t, double sigma) const;
    double measure(double t) const;                 // measure of the union
    std::vector<double> boundaries(double t) const; // wrapped endpoints
};

Carrier constant_carrier(double value);
// sign(drift_rate * t + sigma - offset)
Carrier sign_ramp_carrier(double drift_rate, double offset);
// cos(t) + min(sigma, 1 - sigma)
Carrier triangle_cos_carrier();
// amplitude * sin(2*pi*harmonic*sigma + phase) (shape fixed in t)
Carrier sine_carrier(double amplitude, int harmonic, double phase);
// Zero-mean PWM: sign(duty(t) - sigma) - 2*duty(t) + 1. duty must stay in
// (0, 1); evaluation throws otherwise.
Carrier pwm_carrier(std::function<double(double)> duty);

// The three-carrier benchmark basis: {1, sign ramp(1/20, 1/2), triangle+cos}.
CarrierBasis benchmark_carrier_basis();
// Benchmark mask: half-width 1/20 around (1+sin t)/2 and (1+cos t)/2.
DisturbanceSupport benchmark_disturbance_support();

// Carriers zeroed on D_t (closed), with D_t edges added to the breakpoints.
// Construction validates on a coarse t grid that the mask leaves room
// (measure < 0.95) and that the masked carriers stay linearly independent
// (smallest singular value of their Gram matrix above a floor).
//
// taper = 0 gives the hard indicator mask: r(t,sigma) = 0 on D_t, s(t,sigma)
// elsewhere. taper > 0 keeps r = 0 on all of D_t but replaces the jump at
// each edge with a C^2 shoulder of phase-width `taper` outside the support,
// so sampled filters see a smooth integrand instead of a moving step.
// Requires half_width + taper < 0.5 per interval.
CarrierBasis masked_basis(const CarrierBasis& S, const DisturbanceSupport& D,
                          double taper = 0.0);

// The taper profile masked_basis applies: 0 on the support, smoothstep-up
// across the shoulder, 1 in the clear region. Exposed for tests.
double mask_weight(const DisturbanceSupport& D, double t, double sigma, double taper);

// M[i][j] = integral_0^1 S[i](t,sigma) * R[j](t,sigma) dsigma by composite
// midpoint quadrature, split at every carrier breakpoint: ~quad_n points
// across the period (>= 256), at least one per segment.
Matrix mean_product(const CarrierBasis& S, const CarrierBasis& R, double t, int quad_n);

// sum_{i=0..k} (-1)^i C(k,i) g(t - i*eps, t/eps - i). The phase is advanced
// by exact integers so the periodic factor cancels without rounding noise.
double backward_difference(const std::function<double(double, double)>& g, int k,
                           double epsilon, double t);

// Numeric j-th zero-mean primitive in sigma. Each level subtracts the period
// mean, so the result integrates to zero over a period at every t. Rejects
// inputs whose period mean exceeds the quadrature tolerance. O(order*quad_n)
// work per call; intended for diagnostics, not streaming paths.
std::function<double(double, double)> zero_mean_primitive(
    std::function<double(double, double)> g, int order, int quad_n);

// Advisory regularity probe: log-log slope of |Delta_k (g^(-k))_eps (t)|
// against eps. Values near k (or above) are consistent with the regularity
// the order-k demodulator needs.
double ak_regularity_slope(const std::function<double(double, double)>& g, int k,
                           double t, const std::vector<double>& eps_grid, int quad_n);

}  // namespace mcdemod
