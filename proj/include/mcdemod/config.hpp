#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcdemod/carriers.hpp"
#include "mcdemod/siggen.hpp"

namespace mcdemod {

// Raised for malformed or invalid configuration; the message names the
// offending field (e.g. `carriers[1].drift_rate`).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One additive term of an encoded signal: amplitude * func(rate * t),
// func in {sin, cos, cos_squared, const} (const ignores rate).
struct TermSpec {
    std::string func;
    double amplitude = 0.0;
    double rate = 0.0;
};

struct EncodedSpec {
    std::vector<TermSpec> terms;
};

// Carrier registry entry. `kind` selects the factory; only the fields the
// kind uses may appear in the JSON (strict parsing).
struct CarrierSpec {
    std::string kind;  // constant | sign_ramp | triangle_cos | sine | pwm
    double value = 1.0;                                    // constant
    double drift_rate = 0.0, offset = 0.0;                 // sign_ramp
    double amplitude = 1.0, phase = 0.0;                   // sine
    int harmonic = 1;                                      // sine
    double duty_base = 0.5, duty_swing = 0.0, duty_rate = 1.0;  // pwm
};

// center in {half_one_plus_sin, half_one_plus_cos, constant}; constant
// centers take center_value.
struct IntervalSpec {
    std::string center;
    double center_value = 0.0;
    double half_width = 0.0;
};

struct DisturbanceSpec {
    bool enabled = true;
    double amplitude = 5.0;
    std::string shape = "raised_cosine";  // raised_cosine | rectangle
    std::vector<IntervalSpec> intervals;
};

struct SweepSpec {
    std::vector<int> orders;
    double eps_log10_lo = -3.0;
    double eps_log10_hi = -1.5;
    int eps_count = 6;
    int score_channel = 1;  // 0-based index into the encoded signals
    double window_lo = 1.0;
    double window_hi = 5.0;
};

struct RunConfig {
    double epsilon = 0.0;
    int delta_divisor = 0;
    int order_k = 0;
    double span_lo = 0.0, span_hi = 0.0;
    double kappa_threshold = 1e6;
    // Phase half-width of the smooth shoulder the demodulating mask adds
    // outside each disturbance interval (0 = hard indicator mask).
    double mask_taper = 0.0;
    std::vector<CarrierSpec> carriers;
    std::vector<EncodedSpec> encoded;
    bool has_disturbance = false;
    DisturbanceSpec disturbance;
    bool has_sweep = false;
    SweepSpec sweep;
    std::uint64_t config_hash = 0;  // FNV-1a over the raw config bytes

    CarrierBasis build_carriers() const;
    EncodedSignals build_encoded() const;
    DisturbanceSupport build_support() const;      // requires has_disturbance
    DisturbanceModel build_disturbance() const;    // requires has_disturbance
    // Demodulating basis: carriers zeroed on the disturbance support (plus
    // the optional taper shoulder); the carriers themselves if there is no
    // disturbance block.
    CarrierBasis build_demod_basis() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace mcdemod
