#include "mcdemod/carriers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mcdemod/kernels.hpp"

namespace mcdemod {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double sign(double x) { return (x > 0.0) - (x < 0.0); }

// Least-squares slope of log(v) against log(x), skipping empty values.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& v) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(v[i] > 0.0)) continue;
        const double lx = std::log(x[i]);
        const double ly = std::log(v[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++m;
    }
    if (m < 2) throw std::runtime_error("regularity probe: too few nonzero values to fit");
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

bool DisturbanceSupport::contains(double t, double sigma) const {
    const double s = wrap01(sigma);
    for (const auto& iv : intervals) {
        const double d = wrap01(s - iv.center(t));
        if (d <= iv.half_width || d >= 1.0 - iv.half_width) return true;
    }
    return false;
}

double DisturbanceSupport::measure(double t) const {
    // Merge on the circle: cut each interval into linear segments in [0,1].
    std::vector<std::pair<double, double>> segs;
    for (const auto& iv : intervals) {
        const double w = iv.half_width;
        if (2.0 * w >= 1.0) return 1.0;
        const double lo = wrap01(iv.center(t) - w);
        const double hi = lo + 2.0 * w;
        if (hi <= 1.0) {
            segs.emplace_back(lo, hi);
        } else {
            segs.emplace_back(lo, 1.0);
            segs.emplace_back(0.0, hi - 1.0);
        }
    }
    std::sort(segs.begin(), segs.end());
    double total = 0.0, cur_lo = 0.0, cur_hi = -1.0;
    for (const auto& [lo, hi] : segs) {
        if (lo > cur_hi) {
            if (cur_hi > cur_lo) total += cur_hi - cur_lo;
            cur_lo = lo;
            cur_hi = hi;
        } else {
            cur_hi = std::max(cur_hi, hi);
        }
    }
    if (cur_hi > cur_lo) total += cur_hi - cur_lo;
    return std::min(total, 1.0);
}

std::vector<double> DisturbanceSupport::boundaries(double t) const {
    std::vector<double> out;
    for (const auto& iv : intervals) {
        out.push_back(wrap01(iv.center(t) - iv.half_width));
        out.push_back(wrap01(iv.center(t) + iv.half_width));
    }
    return out;
}

Carrier constant_carrier(double value) {
    Carrier c;
    c.evaluator = [value](double, double) { return value; };
    c.breakpoints = [](double) { return std::vector<double>{}; };
    c.smoothness_hint = Smoothness::smooth;
    return c;
}

Carrier sign_ramp_carrier(double drift_rate, double offset) {
    Carrier c;
    c.evaluator = [drift_rate, offset](double t, double sigma) {
        return sign(drift_rate * t + sigma - offset);
    };
    c.breakpoints = [drift_rate, offset](double t) {
        return std::vector<double>{0.0, wrap01(offset - drift_rate * t)};
    };
    c.smoothness_hint = Smoothness::discontinuous;
    return c;
}

Carrier triangle_cos_carrier() {
    Carrier c;
    c.evaluator = [](double t, double sigma) {
        return std::cos(t) + (sigma <= 0.5 ? sigma : 1.0 - sigma);
    };
    c.breakpoints = [](double) { return std::vector<double>{0.0, 0.5}; };
    c.smoothness_hint = Smoothness::continuous;
    return c;
}

Carrier sine_carrier(double amplitude, int harmonic, double phase) {
    Carrier c;
    c.evaluator = [amplitude, harmonic, phase](double, double sigma) {
        return amplitude * std::sin(kTwoPi * harmonic * sigma + phase);
    };
    c.breakpoints = [](double) { return std::vector<double>{}; };
    c.smoothness_hint = Smoothness::smooth;
    return c;
}

Carrier pwm_carrier(std::function<double(double)> duty) {
    Carrier c;
    c.evaluator = [duty](double t, double sigma) {
        const double u = duty(t);
        if (!(u > 0.0) || !(u < 1.0))
            throw std::domain_error("pwm carrier: duty cycle left (0, 1)");
        return sign(u - sigma) - 2.0 * u + 1.0;
    };
    c.breakpoints = [duty](double t) { return std::vector<double>{0.0, wrap01(duty(t))}; };
    c.smoothness_hint = Smoothness::discontinuous;
    return c;
}

CarrierBasis benchmark_carrier_basis() {
    return {constant_carrier(1.0), sign_ramp_carrier(0.05, 0.5), triangle_cos_carrier()};
}

DisturbanceSupport benchmark_disturbance_support() {
    DisturbanceSupport D;
    D.intervals.push_back({[](double t) { return 0.5 * (1.0 + std::sin(t)); }, 0.05});
    D.intervals.push_back({[](double t) { return 0.5 * (1.0 + std::cos(t)); }, 0.05});
    return D;
}

double mask_weight(const DisturbanceSupport& D, double t, double sigma, double taper) {
    const double s = wrap01(sigma);
    double weight = 1.0;
    for (const auto& iv : D.intervals) {
        const double d = wrap01(s - iv.center(t));
        const double dist = std::min(d, 1.0 - d);  // circle distance to the center
        if (dist <= iv.half_width) return 0.0;
        if (taper <= 0.0) continue;
        const double x = (dist - iv.half_width) / taper;
        if (x < 1.0) weight *= x * x * x * (x * (6.0 * x - 15.0) + 10.0);
    }
    return weight;
}

CarrierBasis masked_basis(const CarrierBasis& S, const DisturbanceSupport& D, double taper) {
    if (S.empty()) throw std::invalid_argument("masked_basis: empty carrier basis");
    if (taper < 0.0) throw std::invalid_argument("masked_basis: negative taper");
    for (const auto& iv : D.intervals)
        if (iv.half_width + taper >= 0.5)
            throw std::invalid_argument("masked_basis: taper shoulder wraps past the antipode");

    CarrierBasis R;
    R.reserve(S.size());
    for (const Carrier& s : S) {
        Carrier r;
        if (taper == 0.0) {
            r.evaluator = [ev = s.evaluator, D](double t, double sigma) {
                return D.contains(t, sigma) ? 0.0 : ev(t, sigma);
            };
        } else {
            r.evaluator = [ev = s.evaluator, D, taper](double t, double sigma) {
                const double w = mask_weight(D, t, sigma, taper);
                return w == 0.0 ? 0.0 : w * ev(t, sigma);
            };
        }
        r.breakpoints = [bp = s.breakpoints, D, taper](double t) {
            std::vector<double> pts = bp(t);
            for (const auto& iv : D.intervals) {
                const double c = iv.center(t);
                for (double off : {-iv.half_width - taper, -iv.half_width,
                                   iv.half_width, iv.half_width + taper})
                    pts.push_back(wrap01(c + off));
            }
            return pts;
        };
        r.smoothness_hint =
            D.intervals.empty() ? s.smoothness_hint
                                : (taper > 0.0 ? Smoothness::c1 : Smoothness::discontinuous);
        R.push_back(std::move(r));
    }

    // Degenerate masks (or masked-away carriers) are construction errors, not
    // streaming surprises: probe a coarse grid covering the mask drift.
    for (int i = 0; i < 10; ++i) {
        const double t = 0.7 * i;
        const double m = D.measure(t);
        if (m >= 0.95)
            throw std::invalid_argument("masked_basis: mask covers too much of the period");
        const Matrix gram = mean_product(R, R, t, 512);
        const auto sv = singular_values(gram);
        if (sv.back() < 1e-8)
            throw std::invalid_argument(
                "masked_basis: masked carriers are numerically dependent");
    }
    return R;
}

Matrix mean_product(const CarrierBasis& S, const CarrierBasis& R, double t, int quad_n) {
    if (S.size() != R.size()) throw std::invalid_argument("mean_product: basis size mismatch");
    if (quad_n < 256) throw std::invalid_argument("mean_product: quad_n must be >= 256");
    const std::size_t n = S.size();

    std::vector<double> cuts{0.0, 1.0};
    for (const auto& c : S) {
        const auto pts = c.breakpoints(t);
        cuts.insert(cuts.end(), pts.begin(), pts.end());
    }
    for (const auto& c : R) {
        const auto pts = c.breakpoints(t);
        cuts.insert(cuts.end(), pts.begin(), pts.end());
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return b - a < 1e-13; }),
               cuts.end());
    if (cuts.back() < 1.0 - 1e-13) cuts.push_back(1.0);

    Matrix M(n);
    std::vector<double> sv(n), rv(n);
    for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
        const double lo = cuts[seg];
        const double len = cuts[seg + 1] - lo;
        if (len <= 0.0) continue;
        const int pts = std::max(1, static_cast<int>(std::ceil(quad_n * len - 1e-12)));
        const double h = len / pts;
        for (int p = 0; p < pts; ++p) {
            const double sig = lo + (p + 0.5) * h;
            for (std::size_t i = 0; i < n; ++i) {
                sv[i] = S[i].eval(t, sig);
                rv[i] = R[i].eval(t, sig);
            }
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) M.at(i, j) += h * sv[i] * rv[j];
        }
    }
    return M;
}

double backward_difference(const std::function<double(double, double)>& g, int k,
                           double epsilon, double t) {
    if (k < 0 || k > 32) throw std::invalid_argument("backward_difference: bad order");
    if (!(epsilon > 0.0)) throw std::invalid_argument("backward_difference: bad epsilon");
    const double sigma0 = t / epsilon;
    double acc = 0.0;
    double s = 1.0;
    for (int i = 0; i <= k; ++i) {
        // sigma0 - i differs from (t - i*eps)/eps by an exact integer; doing
        // the wrap here keeps the periodic factor bit-identical across terms.
        acc += s * binomial(k, i) * g(t - i * epsilon, wrap01(sigma0 - i));
        s = -s;
    }
    return acc;
}

std::function<double(double, double)> zero_mean_primitive(
    std::function<double(double, double)> g, int order, int quad_n) {
    if (order < 1 || order > 8) throw std::invalid_argument("zero_mean_primitive: bad order");
    if (quad_n < 16) throw std::invalid_argument("zero_mean_primitive: quad_n must be >= 16");

    return [g, order, quad_n](double t, double sigma) {
        const int M = quad_n;
        const double h = 1.0 / M;
        // Midpoint samples of the current level.
        std::vector<double> f(M);
        double scale = 0.0;
        for (int j = 0; j < M; ++j) {
            f[j] = g(t, (j + 0.5) * h);
            scale = std::max(scale, std::abs(f[j]));
        }
        {
            double mean = 0.0;
            for (double v : f) mean += v;
            mean *= h;
            if (std::abs(mean) > 6.0 * scale / M + 1e-12)
                throw std::invalid_argument("zero_mean_primitive: input has nonzero period mean");
            for (double& v : f) v -= mean;  // enforce exact periodicity of the primitive
        }

        std::vector<double> node(M + 1);  // cumulative integral at the grid nodes
        for (int level = 0; level < order; ++level) {
            node[0] = 0.0;
            for (int j = 0; j < M; ++j) node[j + 1] = node[j] + h * f[j];
            double mean = 0.0;  // trapezoid mean of the primitive
            for (int j = 0; j < M; ++j) mean += 0.5 * (node[j] + node[j + 1]) * h;
            if (level + 1 == order) {
                const double x = wrap01(sigma);
                int cell = std::min(M - 1, static_cast<int>(x * M));
                return node[cell] + (x - cell * h) * f[cell] - mean;
            }
            for (int j = 0; j < M; ++j)
                f[j] = node[j] + 0.5 * h * f[j] - mean;  // next level at midpoints
        }
        return 0.0;  // unreachable
    };
}

double ak_regularity_slope(const std::function<double(double, double)>& g, int k,
                           double t, const std::vector<double>& eps_grid, int quad_n) {
    const auto prim = zero_mean_primitive(g, k, quad_n);
    std::vector<double> vals(eps_grid.size());
    for (std::size_t i = 0; i < eps_grid.size(); ++i)
        vals[i] = std::abs(backward_difference(prim, k, eps_grid[i], t));
    return loglog_slope(eps_grid, vals);
}

}  // namespace mcdemod
