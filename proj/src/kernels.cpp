#include "mcdemod/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mcdemod/linalg.hpp"

namespace mcdemod {

namespace {

// Antiderivative of a local-coordinate polynomial, constant term 0.
std::vector<double> antiderivative(const std::vector<double>& c) {
    std::vector<double> out(c.size() + 1, 0.0);
    for (std::size_t j = 0; j < c.size(); ++j) out[j + 1] = c[j] / static_cast<double>(j + 1);
    return out;
}

double eval_poly(const std::vector<double>& c, double u) {
    double acc = 0.0;
    for (std::size_t j = c.size(); j-- > 0;) acc = acc * u + c[j];
    return acc;
}

void check_order(int k) {
    if (k < 1 || k > 12) throw std::invalid_argument("kernel order k must be in [1, 12]");
}

}  // namespace

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return std::round(r);
}

double PiecewisePolyKernel::eval(double t) const {
    if (pieces.empty() || t < pieces.front().a || t >= pieces.back().b) return 0.0;
    // Uniform piece width eps; index arithmetic instead of a search.
    auto idx = static_cast<std::size_t>((t - pieces.front().a) / epsilon);
    if (idx >= pieces.size()) idx = pieces.size() - 1;
    // Guard against roundoff putting t just outside the indexed piece.
    while (idx > 0 && t < pieces[idx].a) --idx;
    while (idx + 1 < pieces.size() && t >= pieces[idx].b) ++idx;
    return eval_poly(pieces[idx].c, t - pieces[idx].a);
}

double PiecewisePolyKernel::integral_to(double t) const {
    if (pieces.empty() || t <= pieces.front().a) return 0.0;
    double acc = 0.0;
    for (const Piece& p : pieces) {
        if (t >= p.b) {
            acc += eval_poly(antiderivative(p.c), p.b - p.a);
        } else {
            acc += eval_poly(antiderivative(p.c), t - p.a);
            break;
        }
    }
    return acc;
}

PiecewisePolyKernel uniform_kernel(double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    PiecewisePolyKernel K;
    K.epsilon = epsilon;
    K.order_k = 1;
    K.pieces.push_back({0.0, epsilon, {1.0 / epsilon}});
    return K;
}

PiecewisePolyKernel iterated_kernel(int k, double epsilon) {
    check_order(k);
    PiecewisePolyKernel K = uniform_kernel(epsilon);
    for (int step = 2; step <= k; ++step) {
        // (K * K_1)(t) = (A(t) - A(t - eps)) / eps with A the antiderivative
        // of K. Breakpoints stay on the eps grid, degree grows by one.
        PiecewisePolyKernel next;
        next.epsilon = epsilon;
        next.order_k = step;

        const std::size_t np = K.pieces.size();
        std::vector<std::vector<double>> anti(np);
        std::vector<double> cum(np + 1, 0.0);  // integral up to piece start
        for (std::size_t i = 0; i < np; ++i) {
            anti[i] = antiderivative(K.pieces[i].c);
            cum[i + 1] = cum[i] + eval_poly(anti[i], K.pieces[i].b - K.pieces[i].a);
        }

        for (std::size_t i = 0; i <= np; ++i) {
            // New piece on [i*eps, (i+1)*eps): A contribution from piece i,
            // shifted-A contribution from piece i-1 (clamped at the ends).
            std::vector<double> c(anti.empty() ? 1 : anti[0].size(), 0.0);
            double constant = 0.0;
            if (i < np) {
                for (std::size_t j = 0; j < anti[i].size(); ++j) c[j] += anti[i][j];
                constant += cum[i];
            } else {
                constant += cum[np];  // beyond support: A = total mass
            }
            if (i >= 1) {
                for (std::size_t j = 0; j < anti[i - 1].size(); ++j) c[j] -= anti[i - 1][j];
                constant -= cum[i - 1];
            }
            c[0] += constant;
            for (double& v : c) v /= epsilon;
            next.pieces.push_back(
                {static_cast<double>(i) * epsilon, static_cast<double>(i + 1) * epsilon, c});
        }
        K = std::move(next);
    }
    return K;
}

double kernel_moment(const PiecewisePolyKernel& K, int j) {
    if (j < 0) throw std::invalid_argument("moment index must be >= 0");
    // integral t^j p(t-a) dt = sum_m C(j,m) a^(j-m) integral u^m p(u) du
    double acc = 0.0;
    for (const auto& piece : K.pieces) {
        const double w = piece.b - piece.a;
        for (int m = 0; m <= j; ++m) {
            double inner = 0.0;
            for (std::size_t l = 0; l < piece.c.size(); ++l) {
                const int pw = m + static_cast<int>(l) + 1;
                inner += piece.c[l] * std::pow(w, pw) / static_cast<double>(pw);
            }
            acc += binomial(j, m) * std::pow(piece.a, j - m) * inner;
        }
    }
    return acc;
}

double kernel_moment(const CompensatedKernel& K, int j) {
    // Moment of a shifted kernel from the base moments:
    // integral t^j K(t - s) dt = sum_m C(j,m) s^(j-m) mu_m(K).
    std::vector<double> mu(j + 1);
    for (int m = 0; m <= j; ++m) mu[m] = kernel_moment(K.base, m);
    double acc = 0.0;
    for (std::size_t i = 0; i < K.coefficients.size(); ++i) {
        const double s = static_cast<double>(i) * K.base.epsilon;
        double term = 0.0;
        for (int m = 0; m <= j; ++m) term += binomial(j, m) * std::pow(s, j - m) * mu[m];
        acc += K.coefficients[i] * term;
    }
    return acc;
}

std::vector<double> compensation_coefficients(int k) {
    check_order(k);
    if (k == 1) return {1.0};

    // Work with the eps = 1 kernel: moments of K(. - i) are polynomial in i,
    // so the system (and therefore the weights) carries no eps dependence.
    const PiecewisePolyKernel base = iterated_kernel(k, 1.0);
    std::vector<double> mu(k);
    for (int m = 0; m < k; ++m) mu[m] = kernel_moment(base, m);

    Matrix A(static_cast<std::size_t>(k));
    std::vector<double> rhs(k, 0.0);
    rhs[0] = 1.0;
    for (int j = 0; j < k; ++j) {
        for (int i = 0; i < k; ++i) {
            double v = 0.0;
            for (int m = 0; m <= j; ++m)
                v += binomial(j, m) * std::pow(static_cast<double>(i), j - m) * mu[m];
            A.at(j, i) = v;
        }
    }

    std::vector<double> c;
    if (!solve_inplace(A, rhs, c))
        throw std::runtime_error("compensation moment system is singular");
    return c;
}

CompensatedKernel compensated_kernel(int k, double epsilon) {
    CompensatedKernel K;
    K.base = iterated_kernel(k, epsilon);
    K.coefficients = compensation_coefficients(k);
    return K;
}

double CompensatedKernel::support_end() const {
    return base.support_end() +
           static_cast<double>(coefficients.size() - 1) * base.epsilon;
}

double CompensatedKernel::eval(double t) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < coefficients.size(); ++i)
        acc += coefficients[i] * base.eval(t - static_cast<double>(i) * base.epsilon);
    return acc;
}

double CompensatedKernel::integral_to(double t) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < coefficients.size(); ++i)
        acc += coefficients[i] * base.integral_to(t - static_cast<double>(i) * base.epsilon);
    return acc;
}

namespace {

// Shared tap builder over any antiderivative. Bin m is centered on m*delta
// and clipped to [0, L]; the end bins absorb the half-bin overhangs so the
// weights telescope to the exact kernel mass.
template <typename IntegralTo>
FirTaps area_sample(double L, double epsilon, double delta, IntegralTo integral_to) {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    if (delta > epsilon / 16.0 * (1.0 + 1e-12))
        throw std::invalid_argument("delta must be <= epsilon/16 (insufficient oversampling)");

    const auto count = static_cast<std::size_t>(std::ceil(L / delta + 0.5 - 1e-9));
    FirTaps taps;
    taps.sample_period = delta;
    taps.weights.resize(count);
    double lo = 0.0;
    double acc_lo = integral_to(0.0);
    for (std::size_t m = 0; m < count; ++m) {
        const double hi =
            (m + 1 == count) ? L : std::min(L, (static_cast<double>(m) + 0.5) * delta);
        const double acc_hi = integral_to(hi);
        taps.weights[m] = acc_hi - acc_lo;
        lo = hi;
        acc_lo = acc_hi;
    }
    (void)lo;
    return taps;
}

}  // namespace

FirTaps discretize(const PiecewisePolyKernel& K, double delta) {
    return area_sample(K.support_end(), K.epsilon,
                       delta, [&](double t) { return K.integral_to(t); });
}

FirTaps discretize(const CompensatedKernel& K, double delta) {
    return area_sample(K.support_end(), K.epsilon(),
                       delta, [&](double t) { return K.integral_to(t); });
}

std::vector<std::vector<double>> compensated_piece_coefficients(const CompensatedKernel& K) {
    const auto n_pieces = K.base.pieces.size();
    if (n_pieces == 0 || K.coefficients.empty())
        throw std::invalid_argument("compensated kernel is empty");
    const std::size_t width = K.base.pieces.front().c.size();
    std::vector<std::vector<double>> out(n_pieces + K.coefficients.size() - 1,
                                         std::vector<double>(width, 0.0));
    // Shifting by i*eps moves base piece m onto combined piece i+m with the
    // same local coordinate, so the combination is coefficient-wise.
    for (std::size_t i = 0; i < K.coefficients.size(); ++i)
        for (std::size_t m = 0; m < n_pieces; ++m) {
            const auto& src = K.base.pieces[m].c;
            auto& dst = out[i + m];
            for (std::size_t j = 0; j < src.size(); ++j)
                dst[j] += K.coefficients[i] * src[j];
        }
    return out;
}

double polynomial_reproduction_check(const CompensatedKernel& K, int degree) {
    const int k = K.order();
    if (degree < 0) throw std::invalid_argument("degree must be >= 0");
    if (degree >= k)
        throw std::invalid_argument(
            "degree >= kernel order: reproduction only holds up to degree k-1");

    // (K * t^m)(t) - t^m = sum_{j=1..m} C(m,j) (-1)^j mu_j t^(m-j) + (mu_0 - 1) t^m.
    std::vector<double> mu(degree + 1);
    for (int j = 0; j <= degree; ++j) mu[j] = kernel_moment(K, j);

    double worst = 0.0;
    for (int m = 0; m <= degree; ++m) {
        worst = std::max(worst, std::abs(mu[0] - 1.0));
        for (int j = 1; j <= m; ++j)
            worst = std::max(worst, std::abs(binomial(m, j) * mu[j]));
    }
    return worst;
}

}  // namespace mcdemod
