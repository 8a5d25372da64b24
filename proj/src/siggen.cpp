#include "mcdemod/siggen.hpp"

#include <cmath>
#include <stdexcept>

namespace mcdemod {

namespace {
constexpr double kPi = 3.14159265358979323846264338328;
}

double DisturbanceModel::eval(double t, double sigma) const {
    const double s = wrap01(sigma);
    double acc = 0.0;
    for (const auto& iv : support.intervals) {
        const double d = wrap01(s - iv.center(t));
        double x;  // signed offset from the interval center, in [-w, w]
        if (d <= iv.half_width) x = d;
        else if (d >= 1.0 - iv.half_width) x = d - 1.0;
        else continue;
        if (shape == Shape::rectangle) {
            acc += amplitude;
        } else {
            acc += amplitude * 0.5 * (1.0 + std::cos(kPi * x / iv.half_width));
        }
    }
    return acc;
}

double Perturbation::eval(double t, double epsilon) const {
    if (!enabled || scale == 0.0) return 0.0;
    // Fixed bounded chirp; deterministic stand-in for residual model error.
    const double w = std::sin(2.0 * kPi * (0.7 * t + 0.65 * t * t));
    return scale * std::pow(epsilon, order) * w;
}

EncodedSignals benchmark_encoded_signals() {
    return {
        [](double t) { return 2.0 * std::sin(t) - 1.5 * std::sin(0.5 * t); },
        [](double t) { return std::cos(t) - 1.2 * std::sin(0.25 * t); },
        [](double t) { const double c = std::cos(t / 3.0); return 1.4 * c * c; },
    };
}

DisturbanceModel benchmark_disturbance_model() {
    DisturbanceModel d;
    d.support = benchmark_disturbance_support();
    d.amplitude = 5.0;
    d.shape = DisturbanceModel::Shape::raised_cosine;
    return d;
}

SampledSignal synthesize(const EncodedSignals& Z, const CarrierBasis& S,
                         const DisturbanceModel* disturbance, double epsilon,
                         double delta, double t_begin, double t_end,
                         const Perturbation& perturbation) {
    if (Z.size() != S.size() || Z.empty())
        throw std::invalid_argument("synthesize: need one encoded signal per carrier");
    if (!(epsilon > 0.0)) throw std::invalid_argument("synthesize: epsilon must be positive");
    if (!(t_end > t_begin)) throw std::invalid_argument("synthesize: empty span");
    const double ratio = epsilon / delta;
    const double rounded = std::round(ratio);
    if (!(delta > 0.0) || rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * rounded)
        throw std::invalid_argument("synthesize: delta must divide epsilon");

    SampledSignal sig;
    sig.t0 = t_begin;
    sig.delta = delta;
    sig.epsilon = epsilon;
    sig.n_carriers = static_cast<int>(S.size());

    const auto count =
        static_cast<std::size_t>(std::floor((t_end - t_begin) / delta + 1e-9)) + 1;
    sig.values.resize(count);
    for (std::size_t m = 0; m < count; ++m) {
        const double t = sig.time_at(m);
        const double sigma = wrap01(t / epsilon);
        double y = 0.0;
        for (std::size_t i = 0; i < S.size(); ++i)
            y += Z[i](t) * S[i].evaluator(t, sigma);
        if (disturbance) y += disturbance->eval(t, sigma);
        y += perturbation.eval(t, epsilon);
        sig.values[m] = y;
    }
    return sig;
}

}  // namespace mcdemod
