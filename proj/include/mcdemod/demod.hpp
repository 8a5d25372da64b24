#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mcdemod/carriers.hpp"
#include "mcdemod/kernels.hpp"
#include "mcdemod/linalg.hpp"
#include "mcdemod/siggen.hpp"

namespace mcdemod {

inline constexpr std::size_t kMaxCarriers = 8;

struct DemodOutput {
    double t = 0.0;
    double kappa = 0.0;
    std::array<double, kMaxCarriers> z{};  // first n entries are live
    std::uint8_t n = 0;
    bool valid = false;
};

// Streaming order-k demodulator. Per sample it pushes y*r_j and s_i*r_j into
// ring buffers, FIR-filters them with the compensated-kernel taps, and solves
// the n x n mean-product system for the estimate. Strictly causal: an output
// depends only on samples already pushed. Never throws after construction;
// ill-conditioned stretches are flagged via `valid`.
class Demodulator {
public:
    Demodulator(CarrierBasis S, CarrierBasis R, int order_k, double epsilon,
                double delta, double kappa_threshold = 1e6, int kappa_stride = 10);

    DemodOutput push_sample(double t, double y);

    // Current filtered estimate of the carrier mean-product matrix
    // ([i][j] = filtered s_i*r_j). Errors while the filters are warming up.
    Matrix estimate_mean_product() const;

    std::size_t tap_count() const { return taps_.weights.size(); }
    std::size_t warmup_remaining() const { return warmup_remaining_; }
    std::size_t size() const { return n_; }
    double epsilon() const { return epsilon_; }

private:
    void filter(std::vector<double>& acc) const;

    CarrierBasis S_, R_;
    double epsilon_ = 0.0;
    double kappa_threshold_ = 0.0;
    int kappa_stride_ = 10;

    FirTaps taps_;
    std::size_t n_ = 0;
    std::size_t channels_ = 0;          // n + n*n
    std::vector<double> frames_;        // ring, tap_count x channels, time-major
    std::size_t head_ = 0;
    bool primed_ = false;
    std::size_t warmup_remaining_ = 0;
    std::uint64_t outputs_since_kappa_ = 0;

    double kappa_latest_ = 0.0;
    std::array<double, kMaxCarriers> z_latest_{};
    std::vector<double> scratch_acc_;
    std::vector<double> scratch_rhs_, scratch_sol_, sr_values_;
};

// Feeds every sample of `signal` through a fresh Demodulator; identical to
// the streaming loop by construction.
std::vector<DemodOutput> demodulate_batch(const CarrierBasis& S, const CarrierBasis& R,
                                          int order_k, double epsilon, double delta,
                                          const SampledSignal& signal,
                                          double kappa_threshold = 1e6,
                                          int kappa_stride = 10);

}  // namespace mcdemod
