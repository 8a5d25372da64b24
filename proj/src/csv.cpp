#include "mcdemod/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "mcdemod/version.hpp"

namespace mcdemod {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

double parse_double(const std::string& field, const std::string& path, std::size_t line) {
    const char* s = field.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0')
        throw IoError(path + ":" + std::to_string(line) + ": not a number: \"" + field + "\"");
    return v;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

struct CsvBody {
    std::vector<std::string> header;          // split header fields
    std::vector<std::vector<double>> rows;    // parsed data rows
    double meta_epsilon = 0.0;
    int meta_n = 0;
    int meta_k = 0;
};

CsvBody read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);

    CsvBody body;
    std::string line;
    std::size_t lineno = 0;
    bool seen_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            std::string key;
            meta >> key;
            if (key == "epsilon") meta >> body.meta_epsilon;
            else if (key == "n_carriers") meta >> body.meta_n;
            else if (key == "order_k") meta >> body.meta_k;
            continue;
        }
        if (!seen_header) {
            body.header = split_fields(line);
            seen_header = true;
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != body.header.size())
            throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                          std::to_string(body.header.size()) + " fields, got " +
                          std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(parse_double(f, path, lineno));
        body.rows.push_back(std::move(row));
    }
    if (!seen_header) throw IoError(path + ": empty input (no header)");
    if (body.rows.empty()) throw IoError(path + ": empty input (no data rows)");
    return body;
}

void check_uniform_time(const std::vector<std::vector<double>>& rows, const std::string& path) {
    if (rows.size() < 2) return;
    const double d0 = rows[1][0] - rows[0][0];
    if (!(d0 > 0.0)) throw IoError(path + ": time column is not strictly increasing");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double d = rows[i][0] - rows[i - 1][0];
        if (!(d > 0.0)) throw IoError(path + ": time column is not strictly increasing");
        if (std::abs(d - d0) > 1e-9 * d0)
            throw IoError(path + ": non-uniform sample spacing at row " + std::to_string(i));
    }
}

}  // namespace

void write_signal_csv(const std::string& path, const SampledSignal& sig,
                      std::uint64_t config_hash) {
    auto out = open_out(path);
    out << "# mcdemod signal\n";
    out << "# version " << kVersion << "\n";
    out << "# config_hash " << hex64(config_hash) << "\n";
    out << "# epsilon " << fmt(sig.epsilon) << "\n";
    out << "# n_carriers " << sig.n_carriers << "\n";
    out << "t,y\n";
    for (std::size_t m = 0; m < sig.values.size(); ++m)
        out << fmt(sig.time_at(m)) << ',' << fmt(sig.values[m]) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

SampledSignal read_signal_csv(const std::string& path) {
    const CsvBody body = read_csv(path);
    if (body.header != std::vector<std::string>{"t", "y"})
        throw IoError(path + ": expected header \"t,y\"");
    if (body.rows.size() < 2) throw IoError(path + ": need at least 2 samples");
    check_uniform_time(body.rows, path);

    SampledSignal sig;
    sig.t0 = body.rows[0][0];
    sig.delta = body.rows[1][0] - body.rows[0][0];
    sig.epsilon = body.meta_epsilon;
    sig.n_carriers = body.meta_n;
    sig.values.reserve(body.rows.size());
    for (const auto& row : body.rows) {
        if (!std::isfinite(row[1]))
            throw IoError(path + ": non-finite sample value");
        sig.values.push_back(row[1]);
    }
    return sig;
}

void write_estimates_csv(const std::string& path, const std::vector<DemodOutput>& estimates,
                         int n_channels, int order_k, double epsilon,
                         std::uint64_t config_hash) {
    if (n_channels < 1 || n_channels > static_cast<int>(kMaxCarriers))
        throw IoError("write_estimates_csv: bad channel count");
    auto out = open_out(path);
    out << "# mcdemod estimates\n";
    out << "# version " << kVersion << "\n";
    out << "# config_hash " << hex64(config_hash) << "\n";
    out << "# epsilon " << fmt(epsilon) << "\n";
    out << "# order_k " << order_k << "\n";
    out << "# n_carriers " << n_channels << "\n";
    out << "t";
    for (int i = 1; i <= n_channels; ++i) out << ",z_" << i;
    out << ",kappa,valid\n";
    for (const auto& e : estimates) {
        out << fmt(e.t);
        for (int i = 0; i < n_channels; ++i) out << ',' << fmt(e.z[i]);
        out << ',' << fmt(e.kappa) << ',' << (e.valid ? 1 : 0) << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

std::vector<DemodOutput> read_estimates_csv(const std::string& path) {
    const CsvBody body = read_csv(path);
    const std::size_t cols = body.header.size();
    if (cols < 4 || body.header.front() != "t" || body.header[cols - 2] != "kappa" ||
        body.header.back() != "valid")
        throw IoError(path + ": expected header t,z_1..z_n,kappa,valid");
    const std::size_t n = cols - 3;
    if (n > kMaxCarriers) throw IoError(path + ": too many channels");
    for (std::size_t i = 0; i < n; ++i)
        if (body.header[1 + i] != "z_" + std::to_string(i + 1))
            throw IoError(path + ": expected header t,z_1..z_n,kappa,valid");
    check_uniform_time(body.rows, path);

    std::vector<DemodOutput> out;
    out.reserve(body.rows.size());
    for (const auto& row : body.rows) {
        DemodOutput e;
        e.t = row[0];
        for (std::size_t i = 0; i < n; ++i) e.z[i] = row[1 + i];
        e.kappa = row[cols - 2];
        e.valid = row[cols - 1] != 0.0;
        e.n = static_cast<std::uint8_t>(n);
        out.push_back(e);
    }
    return out;
}

void write_truth_json(const std::string& path, const SampledSignal& sig,
                      const EncodedSignals& zs, std::uint64_t config_hash) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["config_hash"] = hex64(config_hash);
    j["epsilon"] = sig.epsilon;
    j["delta"] = sig.delta;
    j["t0"] = sig.t0;
    j["n_samples"] = sig.values.size();
    auto& z = j["z"];
    z = nlohmann::json::array();
    for (const auto& fn : zs) {
        std::vector<double> samples;
        samples.reserve(sig.values.size());
        for (std::size_t m = 0; m < sig.values.size(); ++m) samples.push_back(fn(sig.time_at(m)));
        z.push_back(std::move(samples));
    }
    auto out = open_out(path);
    out << j.dump() << '\n';
    if (!out) throw IoError("write failed: " + path);
}

void write_sweep_json(const std::string& path, const SweepOutcome& outcome,
                      const SweepMeta& meta) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["config_hash"] = hex64(meta.config_hash);
    j["delta_divisor"] = meta.delta_divisor;
    j["score_channel"] = meta.score_channel;
    j["window"] = {meta.window_lo, meta.window_hi};
    j["span"] = {meta.t_begin, meta.t_end};
    j["kappa_threshold"] = meta.kappa_threshold;
    j["mask_taper"] = meta.mask_taper;
    j["results"] = nlohmann::json::array();
    for (const SweepResult& r : outcome.results) {
        nlohmann::json jr;
        jr["k"] = r.k;
        jr["epsilons"] = r.epsilons;
        jr["l2_errors"] = r.l2_errors;
        jr["fitted_slope"] = r.fitted_slope;
        jr["fit_residual"] = r.fit_residual;
        j["results"].push_back(std::move(jr));
    }
    j["errors"] = nlohmann::json::array();
    for (const SweepCellError& e : outcome.errors) {
        nlohmann::json je;
        je["k"] = e.k;
        je["epsilon"] = e.epsilon;
        je["message"] = e.message;
        j["errors"].push_back(std::move(je));
    }
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

void write_sweep_csv(const std::string& path, const SweepOutcome& outcome) {
    auto out = open_out(path);
    out << "k,epsilon,l2_error,log10_epsilon,log10_l2_error\n";
    for (const SweepResult& r : outcome.results)
        for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
            const double err = r.l2_errors[i];
            out << r.k << ',' << fmt(r.epsilons[i]) << ',' << fmt(err) << ','
                << fmt(std::log10(r.epsilons[i])) << ','
                << fmt(err > 0.0 ? std::log10(err) : -std::numeric_limits<double>::infinity())
                << '\n';
        }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace mcdemod
