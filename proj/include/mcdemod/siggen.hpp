#pragma once

#include <functional>
#include <vector>

#include "mcdemod/carriers.hpp"

namespace mcdemod {

// Slowly varying signals to be encoded, one per carrier.
using EncodedSignals = std::vector<std::function<double(double)>>;

// Additive disturbance supported inside the masked phase intervals. The
// raised-cosine shape is zero at the interval edges, so a closed mask kills
// it exactly at every sample.
struct DisturbanceModel {
    enum class Shape { raised_cosine, rectangle };

    DisturbanceSupport support;
    double amplitude = 5.0;
    Shape shape = Shape::raised_cosine;

    double eval(double t, double sigma) const;
};

// Optional additive term scale * eps^order * chirp(t), standing in for the
// modelling error an order-`order` demodulator is allowed to absorb.
struct Perturbation {
    bool enabled = false;
    int order = 0;
    double scale = 0.0;

    double eval(double t, double epsilon) const;
};

// Uniformly sampled composite signal plus the metadata needed to demodulate
// it (sample count per carrier period is epsilon / delta, an exact integer).
struct SampledSignal {
    double t0 = 0.0;
    double delta = 0.0;
    std::vector<double> values;
    double epsilon = 0.0;
    int n_carriers = 0;

    double time_at(std::size_t m) const { return t0 + static_cast<double>(m) * delta; }
    double span_end() const {
        return values.empty() ? t0 : time_at(values.size() - 1);
    }
};

// Benchmark encoded triple: 2 sin t - 1.5 sin(t/2), cos t - 1.2 sin(t/4),
// 1.4 cos^2(t/3).
EncodedSignals benchmark_encoded_signals();
DisturbanceModel benchmark_disturbance_model();

// y(m) = sum_i z_i(t) s_i(t, t/eps) + d(t, t/eps) + perturbation, sampled on
// t = t_begin + m*delta. delta must divide epsilon (1e-9 relative) so the
// phase grid repeats exactly every period. `disturbance` may be null.
SampledSignal synthesize(const EncodedSignals& Z, const CarrierBasis& S,
                         const DisturbanceModel* disturbance, double epsilon,
                         double delta, double t_begin, double t_end,
                         const Perturbation& perturbation = {});

}  // namespace mcdemod
