#include "mcdemod/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mcdemod {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void expect_keys(const json& j, const std::string& where,
                 const std::set<std::string>& allowed) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            fail("unknown key \"" + it.key() + "\" in " + where);
}

const json& require(const json& j, const std::string& where, const std::string& key) {
    auto it = j.find(key);
    if (it == j.end()) fail("missing required field \"" + key + "\" in " + where);
    return *it;
}

double num(const json& j, const std::string& field) {
    if (!j.is_number()) fail("field \"" + field + "\" must be a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& field) {
    if (!j.is_number_integer()) fail("field \"" + field + "\" must be an integer");
    return j.get<int>();
}

std::string str(const json& j, const std::string& field) {
    if (!j.is_string()) fail("field \"" + field + "\" must be a string");
    return j.get<std::string>();
}

TermSpec parse_term(const json& j, const std::string& where) {
    if (!j.is_object()) fail(where + " must be an object");
    expect_keys(j, where, {"func", "amplitude", "rate"});
    TermSpec t;
    t.func = str(require(j, where, "func"), where + ".func");
    t.amplitude = num(require(j, where, "amplitude"), where + ".amplitude");
    if (t.func == "const") {
        if (j.count("rate")) fail(where + ": const terms take no rate");
    } else if (t.func == "sin" || t.func == "cos" || t.func == "cos_squared") {
        t.rate = num(require(j, where, "rate"), where + ".rate");
    } else {
        fail(where + ".func: unknown function \"" + t.func + "\"");
    }
    return t;
}

CarrierSpec parse_carrier(const json& j, const std::string& where) {
    if (!j.is_object()) fail(where + " must be an object");
    CarrierSpec c;
    c.kind = str(require(j, where, "kind"), where + ".kind");
    if (c.kind == "constant") {
        expect_keys(j, where, {"kind", "value"});
        c.value = num(require(j, where, "value"), where + ".value");
    } else if (c.kind == "sign_ramp") {
        expect_keys(j, where, {"kind", "drift_rate", "offset"});
        c.drift_rate = num(require(j, where, "drift_rate"), where + ".drift_rate");
        c.offset = num(require(j, where, "offset"), where + ".offset");
    } else if (c.kind == "triangle_cos") {
        expect_keys(j, where, {"kind"});
    } else if (c.kind == "sine") {
        expect_keys(j, where, {"kind", "amplitude", "harmonic", "phase"});
        c.amplitude = num(require(j, where, "amplitude"), where + ".amplitude");
        c.harmonic = integer(require(j, where, "harmonic"), where + ".harmonic");
        if (c.harmonic < 1) fail(where + ".harmonic must be >= 1");
        c.phase = j.count("phase") ? num(j["phase"], where + ".phase") : 0.0;
    } else if (c.kind == "pwm") {
        expect_keys(j, where, {"kind", "duty_base", "duty_swing", "duty_rate"});
        c.duty_base = num(require(j, where, "duty_base"), where + ".duty_base");
        if (j.count("duty_swing")) c.duty_swing = num(j["duty_swing"], where + ".duty_swing");
        if (j.count("duty_rate")) c.duty_rate = num(j["duty_rate"], where + ".duty_rate");
    } else {
        fail(where + ".kind: unknown carrier kind \"" + c.kind + "\"");
    }
    return c;
}

IntervalSpec parse_interval(const json& j, const std::string& where) {
    if (!j.is_object()) fail(where + " must be an object");
    expect_keys(j, where, {"center", "center_value", "half_width"});
    IntervalSpec iv;
    iv.center = str(require(j, where, "center"), where + ".center");
    if (iv.center == "constant") {
        iv.center_value = num(require(j, where, "center_value"), where + ".center_value");
    } else if (iv.center != "half_one_plus_sin" && iv.center != "half_one_plus_cos") {
        fail(where + ".center: unknown center function \"" + iv.center + "\"");
    } else if (j.count("center_value")) {
        fail(where + ": center_value only applies to constant centers");
    }
    iv.half_width = num(require(j, where, "half_width"), where + ".half_width");
    if (!(iv.half_width > 0.0) || !(iv.half_width < 0.5))
        fail(where + ".half_width must lie in (0, 0.5)");
    return iv;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) fail("config root must be an object");
    expect_keys(j, "config",
                {"epsilon", "delta_divisor", "order_k", "span", "kappa_threshold",
                 "mask_taper", "carriers", "encoded", "disturbance", "sweep"});

    RunConfig cfg;
    cfg.config_hash = fnv1a64(text);

    cfg.epsilon = num(require(j, "config", "epsilon"), "epsilon");
    if (!(cfg.epsilon > 0.0)) fail("field \"epsilon\" must be positive");

    cfg.delta_divisor = integer(require(j, "config", "delta_divisor"), "delta_divisor");
    if (cfg.delta_divisor < 16) fail("field \"delta_divisor\" must be >= 16");

    cfg.order_k = integer(require(j, "config", "order_k"), "order_k");
    if (cfg.order_k < 1 || cfg.order_k > 8) fail("field \"order_k\" must lie in [1, 8]");

    {
        const json& span = require(j, "config", "span");
        if (!span.is_array() || span.size() != 2)
            fail("field \"span\" must be an array [t_begin, t_end]");
        cfg.span_lo = num(span[0], "span[0]");
        cfg.span_hi = num(span[1], "span[1]");
        if (!(cfg.span_hi > cfg.span_lo)) fail("field \"span\" must be increasing");
    }

    if (j.count("kappa_threshold")) {
        cfg.kappa_threshold = num(j["kappa_threshold"], "kappa_threshold");
        if (!(cfg.kappa_threshold > 1.0)) fail("field \"kappa_threshold\" must exceed 1");
    }
    if (j.count("mask_taper")) {
        cfg.mask_taper = num(j["mask_taper"], "mask_taper");
        if (cfg.mask_taper < 0.0 || cfg.mask_taper >= 0.5)
            fail("field \"mask_taper\" must lie in [0, 0.5)");
    }

    {
        const json& cs = require(j, "config", "carriers");
        if (!cs.is_array() || cs.empty()) fail("field \"carriers\" must be a non-empty array");
        for (std::size_t i = 0; i < cs.size(); ++i)
            cfg.carriers.push_back(
                parse_carrier(cs[i], "carriers[" + std::to_string(i) + "]"));
    }
    {
        const json& es = require(j, "config", "encoded");
        if (!es.is_array() || es.empty()) fail("field \"encoded\" must be a non-empty array");
        if (es.size() != cfg.carriers.size())
            fail("fields \"encoded\" and \"carriers\" must have matching lengths");
        for (std::size_t i = 0; i < es.size(); ++i) {
            const std::string where = "encoded[" + std::to_string(i) + "]";
            if (!es[i].is_object()) fail(where + " must be an object");
            expect_keys(es[i], where, {"terms"});
            const json& terms = require(es[i], where, "terms");
            if (!terms.is_array() || terms.empty())
                fail(where + ".terms must be a non-empty array");
            EncodedSpec spec;
            for (std::size_t q = 0; q < terms.size(); ++q)
                spec.terms.push_back(parse_term(
                    terms[q], where + ".terms[" + std::to_string(q) + "]"));
            cfg.encoded.push_back(std::move(spec));
        }
    }

    if (j.count("disturbance")) {
        const json& d = j["disturbance"];
        if (!d.is_object()) fail("field \"disturbance\" must be an object");
        expect_keys(d, "disturbance", {"enabled", "amplitude", "shape", "intervals"});
        cfg.has_disturbance = true;
        if (d.count("enabled")) {
            if (!d["enabled"].is_boolean()) fail("field \"disturbance.enabled\" must be a boolean");
            cfg.disturbance.enabled = d["enabled"].get<bool>();
        }
        if (d.count("amplitude"))
            cfg.disturbance.amplitude = num(d["amplitude"], "disturbance.amplitude");
        if (d.count("shape")) {
            cfg.disturbance.shape = str(d["shape"], "disturbance.shape");
            if (cfg.disturbance.shape != "raised_cosine" && cfg.disturbance.shape != "rectangle")
                fail("field \"disturbance.shape\" must be raised_cosine or rectangle");
        }
        const json& ivs = require(d, "disturbance", "intervals");
        if (!ivs.is_array() || ivs.empty())
            fail("field \"disturbance.intervals\" must be a non-empty array");
        for (std::size_t i = 0; i < ivs.size(); ++i)
            cfg.disturbance.intervals.push_back(parse_interval(
                ivs[i], "disturbance.intervals[" + std::to_string(i) + "]"));
    }

    if (j.count("sweep")) {
        const json& s = j["sweep"];
        if (!s.is_object()) fail("field \"sweep\" must be an object");
        expect_keys(s, "sweep",
                    {"orders", "eps_log10_lo", "eps_log10_hi", "eps_count",
                     "score_channel", "window"});
        cfg.has_sweep = true;
        const json& orders = require(s, "sweep", "orders");
        if (!orders.is_array() || orders.empty())
            fail("field \"sweep.orders\" must be a non-empty array");
        for (std::size_t i = 0; i < orders.size(); ++i) {
            const int k = integer(orders[i], "sweep.orders[" + std::to_string(i) + "]");
            if (k < 1 || k > 8) fail("field \"sweep.orders\" entries must lie in [1, 8]");
            cfg.sweep.orders.push_back(k);
        }
        cfg.sweep.eps_log10_lo = num(require(s, "sweep", "eps_log10_lo"), "sweep.eps_log10_lo");
        cfg.sweep.eps_log10_hi = num(require(s, "sweep", "eps_log10_hi"), "sweep.eps_log10_hi");
        if (!(cfg.sweep.eps_log10_hi > cfg.sweep.eps_log10_lo))
            fail("field \"sweep.eps_log10_hi\" must exceed eps_log10_lo");
        cfg.sweep.eps_count = integer(require(s, "sweep", "eps_count"), "sweep.eps_count");
        if (cfg.sweep.eps_count < 1) fail("field \"sweep.eps_count\" must be >= 1");
        if (s.count("score_channel")) {
            cfg.sweep.score_channel = integer(s["score_channel"], "sweep.score_channel");
            if (cfg.sweep.score_channel < 0 ||
                cfg.sweep.score_channel >= static_cast<int>(cfg.carriers.size()))
                fail("field \"sweep.score_channel\" is out of range");
        }
        if (s.count("window")) {
            const json& w = s["window"];
            if (!w.is_array() || w.size() != 2)
                fail("field \"sweep.window\" must be an array [lo, hi]");
            cfg.sweep.window_lo = num(w[0], "sweep.window[0]");
            cfg.sweep.window_hi = num(w[1], "sweep.window[1]");
            if (!(cfg.sweep.window_hi > cfg.sweep.window_lo))
                fail("field \"sweep.window\" must be increasing");
        }
    }

    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

CarrierBasis RunConfig::build_carriers() const {
    CarrierBasis basis;
    for (const CarrierSpec& c : carriers) {
        if (c.kind == "constant") {
            basis.push_back(constant_carrier(c.value));
        } else if (c.kind == "sign_ramp") {
            basis.push_back(sign_ramp_carrier(c.drift_rate, c.offset));
        } else if (c.kind == "triangle_cos") {
            basis.push_back(triangle_cos_carrier());
        } else if (c.kind == "sine") {
            basis.push_back(sine_carrier(c.amplitude, c.harmonic, c.phase));
        } else if (c.kind == "pwm") {
            const double base = c.duty_base, swing = c.duty_swing, rate = c.duty_rate;
            basis.push_back(pwm_carrier(
                [base, swing, rate](double t) { return base + swing * std::sin(rate * t); }));
        } else {
            fail("unknown carrier kind \"" + c.kind + "\"");
        }
    }
    return basis;
}

EncodedSignals RunConfig::build_encoded() const {
    EncodedSignals zs;
    for (const EncodedSpec& spec : encoded) {
        zs.push_back([terms = spec.terms](double t) {
            double acc = 0.0;
            for (const TermSpec& term : terms) {
                if (term.func == "sin") {
                    acc += term.amplitude * std::sin(term.rate * t);
                } else if (term.func == "cos") {
                    acc += term.amplitude * std::cos(term.rate * t);
                } else if (term.func == "cos_squared") {
                    const double c = std::cos(term.rate * t);
                    acc += term.amplitude * c * c;
                } else {  // const
                    acc += term.amplitude;
                }
            }
            return acc;
        });
    }
    return zs;
}

DisturbanceSupport RunConfig::build_support() const {
    if (!has_disturbance) fail("config has no disturbance block");
    DisturbanceSupport D;
    for (const IntervalSpec& iv : disturbance.intervals) {
        std::function<double(double)> center;
        if (iv.center == "half_one_plus_sin") {
            center = [](double t) { return 0.5 * (1.0 + std::sin(t)); };
        } else if (iv.center == "half_one_plus_cos") {
            center = [](double t) { return 0.5 * (1.0 + std::cos(t)); };
        } else {
            center = [v = iv.center_value](double) { return v; };
        }
        D.intervals.push_back({std::move(center), iv.half_width});
    }
    return D;
}

DisturbanceModel RunConfig::build_disturbance() const {
    DisturbanceModel d;
    d.support = build_support();
    d.amplitude = disturbance.amplitude;
    d.shape = disturbance.shape == "rectangle" ? DisturbanceModel::Shape::rectangle
                                               : DisturbanceModel::Shape::raised_cosine;
    return d;
}

CarrierBasis RunConfig::build_demod_basis() const {
    const CarrierBasis S = build_carriers();
    if (!has_disturbance) return S;
    return masked_basis(S, build_support(), mask_taper);
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace mcdemod
