#pragma once

#include <cstddef>
#include <vector>

namespace mcdemod {

// Piecewise-polynomial averaging kernel on [0, k*eps]. K_1 is the moving
// average (1/eps on [0, eps)); K_k is K_{k-1} convolved with K_1, carried
// symbolically: k pieces of degree k-1 with breakpoints at multiples of eps.
// Piece coefficients are in the local variable u = t - a (a = left endpoint),
// which keeps evaluation well conditioned at small eps.
struct PiecewisePolyKernel {
    struct Piece {
        double a = 0.0;
        double b = 0.0;
        std::vector<double> c;  // value = sum c[j] * (t - a)^j
    };

    double epsilon = 0.0;
    int order_k = 0;
    std::vector<Piece> pieces;  // contiguous, pieces[i] covers [i*eps, (i+1)*eps)

    double support_end() const { return pieces.empty() ? 0.0 : pieces.back().b; }
    double eval(double t) const;
    // Integral over (-inf, t], exact from piece antiderivatives.
    double integral_to(double t) const;
    double total_mass() const { return integral_to(support_end()); }
};

// Shifted combination sum_i coefficients[i] * base(t - i*eps) whose moments
// 1..k-1 vanish while the mass stays 1. Support [0, (2k-1)*eps].
struct CompensatedKernel {
    PiecewisePolyKernel base;
    std::vector<double> coefficients;  // size k

    double epsilon() const { return base.epsilon; }
    int order() const { return base.order_k; }
    double support_end() const;
    double eval(double t) const;
    double integral_to(double t) const;
};

// Causal FIR taps. weights[m] belongs to the sample m*sample_period in the
// past; taps come from area sampling with bins centered on the tap instants,
// so the discrete response has no half-sample lag and keeps exact nulls at
// the carrier frequency and its harmonics whenever sample_period divides eps.
struct FirTaps {
    double sample_period = 0.0;
    std::vector<double> weights;
};

PiecewisePolyKernel uniform_kernel(double epsilon);

// k-fold iterated moving average, k in [1, 12].
PiecewisePolyKernel iterated_kernel(int k, double epsilon);

// j-th raw moment, exact from the polynomial antiderivatives.
double kernel_moment(const PiecewisePolyKernel& K, int j);
double kernel_moment(const CompensatedKernel& K, int j);

// Weights c_0..c_{k-1} solving the k x k moment system (mass 1, moments
// 1..k-1 zero) for shifts of K_k by 0, eps, .., (k-1)*eps. The system is
// assembled from eps-normalized moments, so the weights do not depend on eps.
std::vector<double> compensation_coefficients(int k);

CompensatedKernel compensated_kernel(int k, double epsilon);

FirTaps discretize(const PiecewisePolyKernel& K, double delta);
FirTaps discretize(const CompensatedKernel& K, double delta);

// Max absolute coefficient of (K * p) - p over monomials p of degree <=
// `degree`, computed from the kernel moments (no sampling). Exactly 0 for
// degree <= k-1; degrees >= k are rejected since the kernel cannot reproduce
// them.
double polynomial_reproduction_check(const CompensatedKernel& K, int degree);

// The compensated kernel flattened to a single piecewise polynomial: entry j
// holds the coefficients (local variable u = t - j*eps) on [j*eps, (j+1)*eps),
// for j = 0 .. 2k-2.
std::vector<std::vector<double>> compensated_piece_coefficients(const CompensatedKernel& K);

double binomial(int n, int k);

}  // namespace mcdemod
