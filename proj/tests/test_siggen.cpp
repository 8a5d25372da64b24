#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "mcdemod/siggen.hpp"

using namespace mcdemod;

TEST_CASE("benchmark encoded signals at t = 0") {
    auto Z = benchmark_encoded_signals();
    REQUIRE(Z.size() == 3);
    CHECK(Z[0](0.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(Z[1](0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(Z[2](0.0) == doctest::Approx(1.4).epsilon(1e-15));
    // Spot value away from zero: z_1(2) = 2 sin 2 - 1.5 sin 1.
    CHECK(Z[0](2.0) ==
          doctest::Approx(2.0 * std::sin(2.0) - 1.5 * std::sin(1.0)).epsilon(1e-15));
}

TEST_CASE("disturbance model is zero off the support and peaks at the centers") {
    auto d = benchmark_disturbance_model();
    for (int i = 0; i < 2000; ++i) {
        const double sigma = (i + 0.5) / 2000.0;
        if (!d.support.contains(0.3, sigma)) {
            CHECK(d.eval(0.3, sigma) == 0.0);
        } else {
            CHECK(d.eval(0.3, sigma) >= 0.0);
            CHECK(d.eval(0.3, sigma) <= d.amplitude + 1e-12);
        }
    }
    // At an interval center the raised cosine reaches the full amplitude.
    const double c = 0.5 * (1.0 + std::sin(0.3));
    CHECK(d.eval(0.3, c) == doctest::Approx(d.amplitude).epsilon(1e-12));

    DisturbanceModel rect = d;
    rect.shape = DisturbanceModel::Shape::rectangle;
    CHECK(rect.eval(0.3, c) == doctest::Approx(d.amplitude).epsilon(1e-15));
}

TEST_CASE("synthesize reproduces the hand-computed first sample of the benchmark") {
    auto Z = benchmark_encoded_signals();
    auto S = benchmark_carrier_basis();
    auto sig = synthesize(Z, S, nullptr, 0.01, 0.01 / 100, 0.0, 0.05);
    // y(0) = 0*1 + 1*(-1) + 1.4*1 = 0.4 (no disturbance).
    CHECK(sig.values[0] == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(sig.t0 == 0.0);
    CHECK(sig.epsilon == 0.01);
    CHECK(sig.n_carriers == 3);
}

TEST_CASE("sample count and spacing contract") {
    auto Z = EncodedSignals{[](double) { return 1.0; }};
    CarrierBasis S{constant_carrier(1.0)};
    auto sig = synthesize(Z, S, nullptr, 0.1, 0.1 / 20, 0.0, 1.0);
    CHECK(sig.values.size() == 201);
    CHECK(sig.delta == doctest::Approx(0.005).epsilon(1e-15));
    CHECK(sig.span_end() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sig.time_at(3) == doctest::Approx(0.015).epsilon(1e-15));
}

TEST_CASE("synthesize validates its inputs") {
    auto Z = EncodedSignals{[](double) { return 1.0; }};
    CarrierBasis S{constant_carrier(1.0)};
    CHECK_THROWS_AS((void)synthesize(Z, S, nullptr, 0.1, 0.1 / 3.7, 0.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)synthesize(Z, S, nullptr, -0.1, 0.01, 0.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)synthesize(Z, S, nullptr, 0.1, 0.005, 1.0, 1.0),
                    std::invalid_argument);
    CarrierBasis two{constant_carrier(1.0), constant_carrier(2.0)};
    CHECK_THROWS_AS((void)synthesize(Z, two, nullptr, 0.1, 0.005, 0.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("synthesize is deterministic and equals the sum of its parts") {
    auto Z = benchmark_encoded_signals();
    auto S = benchmark_carrier_basis();
    auto d = benchmark_disturbance_model();
    const double eps = 0.02, delta = eps / 50;

    auto a = synthesize(Z, S, &d, eps, delta, 0.0, 1.0);
    auto b = synthesize(Z, S, &d, eps, delta, 0.0, 1.0);
    CHECK(std::equal(a.values.begin(), a.values.end(), b.values.begin()));

    // Re-derive each sample with the same accumulation order.
    for (std::size_t m = 0; m < a.values.size(); ++m) {
        const double t = a.time_at(m);
        const double sigma = wrap01(t / eps);
        double y = 0.0;
        for (std::size_t i = 0; i < S.size(); ++i)
            y += Z[i](t) * S[i].evaluator(t, sigma);
        y += d.eval(t, sigma);
        CHECK(a.values[m] == y);
    }
}

TEST_CASE("disturbance toggling changes only masked-phase samples") {
    auto Z = benchmark_encoded_signals();
    auto S = benchmark_carrier_basis();
    auto d = benchmark_disturbance_model();
    const double eps = 0.02, delta = eps / 50;
    auto on = synthesize(Z, S, &d, eps, delta, 0.0, 1.0);
    auto off = synthesize(Z, S, nullptr, eps, delta, 0.0, 1.0);
    REQUIRE(on.values.size() == off.values.size());
    int touched = 0;
    for (std::size_t m = 0; m < on.values.size(); ++m) {
        const double t = on.time_at(m);
        const double sigma = wrap01(t / eps);
        if (on.values[m] != off.values[m]) {
            ++touched;
            CHECK(d.support.contains(t, sigma));
            // The disturbance is added after the carrier sum, so the delta is
            // exactly its value. (Overlapping support intervals sum, so the
            // plain amplitude does not bound it.)
            CHECK(on.values[m] == off.values[m] + d.eval(t, sigma));
        }
    }
    CHECK(touched > 0);
}

TEST_CASE("perturbation adds a bounded eps^k term") {
    auto Z = benchmark_encoded_signals();
    auto S = benchmark_carrier_basis();
    const double eps = 0.05, delta = eps / 20;
    Perturbation p;
    p.enabled = true;
    p.order = 2;
    p.scale = 3.0;
    auto base = synthesize(Z, S, nullptr, eps, delta, 0.0, 2.0);
    auto pert = synthesize(Z, S, nullptr, eps, delta, 0.0, 2.0, p);
    double worst = 0.0;
    for (std::size_t m = 0; m < base.values.size(); ++m)
        worst = std::max(worst, std::abs(pert.values[m] - base.values[m]));
    CHECK(worst <= p.scale * eps * eps + 1e-15);
    CHECK(worst >= 0.1 * p.scale * eps * eps);
}
