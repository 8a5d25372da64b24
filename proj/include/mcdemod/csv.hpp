#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcdemod/analysis.hpp"
#include "mcdemod/demod.hpp"
#include "mcdemod/siggen.hpp"

namespace mcdemod {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Signal files are CSV with a `# key value` metadata preamble and a `t,y`
// header. Doubles are printed with 17 significant digits so every value
// round-trips bit-identically.
void write_signal_csv(const std::string& path, const SampledSignal& sig,
                      std::uint64_t config_hash);

// Rejects empty inputs, ragged rows, non-monotone time, and spacing that
// deviates from uniform by more than 1e-9 relative. Metadata keys `epsilon`
// and `n_carriers` are restored when present.
SampledSignal read_signal_csv(const std::string& path);

// Estimates are CSV rows (t, z_1..z_n, kappa, valid) under the same kind of
// metadata preamble.
void write_estimates_csv(const std::string& path, const std::vector<DemodOutput>& estimates,
                         int n_channels, int order_k, double epsilon,
                         std::uint64_t config_hash);

std::vector<DemodOutput> read_estimates_csv(const std::string& path);

// Ground-truth sidecar for a generated signal: the encoded-signal samples on
// the same time grid, as JSON.
void write_truth_json(const std::string& path, const SampledSignal& sig,
                      const EncodedSignals& zs, std::uint64_t config_hash);

struct SweepMeta {
    std::uint64_t config_hash = 0;
    int delta_divisor = 0;
    int score_channel = 0;
    double window_lo = 0.0, window_hi = 0.0;
    double t_begin = 0.0, t_end = 0.0;
    double kappa_threshold = 0.0;
    double mask_taper = 0.0;
};

void write_sweep_json(const std::string& path, const SweepOutcome& outcome,
                      const SweepMeta& meta);

// Plot-ready long-format table: k, epsilon, l2_error, log10_epsilon,
// log10_l2_error.
void write_sweep_csv(const std::string& path, const SweepOutcome& outcome);

}  // namespace mcdemod
