#include "mcdemod/demod.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mcdemod {

Demodulator::Demodulator(CarrierBasis S, CarrierBasis R, int order_k, double epsilon,
                         double delta, double kappa_threshold, int kappa_stride)
    : S_(std::move(S)), R_(std::move(R)), epsilon_(epsilon),
      kappa_threshold_(kappa_threshold), kappa_stride_(kappa_stride) {
    if (S_.empty() || S_.size() != R_.size())
        throw std::invalid_argument("demodulator: carrier bases must match and be nonempty");
    if (S_.size() > kMaxCarriers)
        throw std::invalid_argument("demodulator: at most 8 carriers supported");
    if (!(epsilon > 0.0)) throw std::invalid_argument("demodulator: epsilon must be positive");
    if (!(kappa_threshold > 1.0))
        throw std::invalid_argument("demodulator: kappa threshold must exceed 1");
    if (kappa_stride < 1) throw std::invalid_argument("demodulator: kappa stride must be >= 1");

    const double ratio = epsilon / delta;
    const double rounded = std::round(ratio);
    if (!(delta > 0.0) || rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * rounded)
        throw std::invalid_argument(
            "demodulator: delta must divide epsilon (integer samples per period)");

    taps_ = discretize(compensated_kernel(order_k, epsilon), delta);

    n_ = S_.size();
    channels_ = n_ + n_ * n_;
    frames_.assign(taps_.weights.size() * channels_, 0.0);
    warmup_remaining_ = taps_.weights.size();
    scratch_acc_.resize(channels_);
    scratch_rhs_.resize(n_);
    scratch_sol_.resize(n_);
    sr_values_.resize(2 * n_);
}

void Demodulator::filter(std::vector<double>& acc) const {
    const std::size_t T = taps_.weights.size();
    const std::size_t C = channels_;
    const double* w = taps_.weights.data();
    const double* fr = frames_.data();
    for (double& v : acc) v = 0.0;
    // Lag m lives at ring row head - m; split the wrap so the inner loop is
    // branch-free and the summation order is fixed (bit-reproducible).
    std::size_t row = head_;
    std::size_t m = 0;
    for (; m <= head_; ++m, --row) {
        const double wm = w[m];
        const double* f = fr + row * C;
        for (std::size_t c = 0; c < C; ++c) acc[c] += wm * f[c];
    }
    row = T - 1;
    for (; m < T; ++m, --row) {
        const double wm = w[m];
        const double* f = fr + row * C;
        for (std::size_t c = 0; c < C; ++c) acc[c] += wm * f[c];
    }
}

DemodOutput Demodulator::push_sample(double t, double y) {
    const std::size_t T = taps_.weights.size();
    head_ = primed_ ? (head_ + 1 == T ? 0 : head_ + 1) : 0;
    primed_ = true;

    const double sigma = wrap01(t / epsilon_);
    double* frame = frames_.data() + head_ * channels_;
    double* s = sr_values_.data();
    double* r = sr_values_.data() + n_;
    for (std::size_t i = 0; i < n_; ++i) {
        s[i] = S_[i].eval(t, sigma);
        r[i] = R_[i].eval(t, sigma);
    }
    for (std::size_t j = 0; j < n_; ++j) frame[j] = y * r[j];
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) frame[n_ + i * n_ + j] = s[i] * r[j];

    DemodOutput out;
    out.t = t;
    out.n = static_cast<std::uint8_t>(n_);

    if (warmup_remaining_ > 0) {
        --warmup_remaining_;
        out.kappa = std::numeric_limits<double>::infinity();
        out.z = z_latest_;
        out.valid = false;
        return out;
    }

    filter(scratch_acc_);

    Matrix Mt(n_);  // transposed mean product: solve M^T z = N^T
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) Mt.at(j, i) = scratch_acc_[n_ + i * n_ + j];
    for (std::size_t j = 0; j < n_; ++j) scratch_rhs_[j] = scratch_acc_[j];

    if (outputs_since_kappa_ == 0) {
        kappa_latest_ = condition_number(Mt);
        outputs_since_kappa_ = static_cast<std::uint64_t>(kappa_stride_);
    }
    --outputs_since_kappa_;

    bool solved = solve_inplace(Mt, scratch_rhs_, scratch_sol_);
    if (solved) {
        for (std::size_t i = 0; i < n_; ++i) {
            if (!std::isfinite(scratch_sol_[i])) { solved = false; break; }
        }
    }
    if (solved)
        for (std::size_t i = 0; i < n_; ++i) z_latest_[i] = scratch_sol_[i];

    out.kappa = kappa_latest_;
    out.z = z_latest_;
    out.valid = solved && std::isfinite(kappa_latest_) && kappa_latest_ <= kappa_threshold_;
    return out;
}

Matrix Demodulator::estimate_mean_product() const {
    if (warmup_remaining_ > 0)
        throw std::runtime_error("estimate_mean_product: filters still warming up");
    std::vector<double> acc(channels_);
    filter(acc);
    Matrix M(n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) M.at(i, j) = acc[n_ + i * n_ + j];
    return M;
}

std::vector<DemodOutput> demodulate_batch(const CarrierBasis& S, const CarrierBasis& R,
                                          int order_k, double epsilon, double delta,
                                          const SampledSignal& signal,
                                          double kappa_threshold, int kappa_stride) {
    Demodulator dm(S, R, order_k, epsilon, delta, kappa_threshold, kappa_stride);
    std::vector<DemodOutput> out;
    out.reserve(signal.values.size());
    for (std::size_t m = 0; m < signal.values.size(); ++m)
        out.push_back(dm.push_sample(signal.time_at(m), signal.values[m]));
    return out;
}

}  // namespace mcdemod
