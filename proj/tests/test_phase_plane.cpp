#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "stefan_kpp/phase_plane.hpp"

using namespace skpp;

namespace {
PhaseParams logistic_at(double gamma) {
    PhaseParams pp;
    pp.gamma = gamma;
    pp.f = make_logistic();
    return pp;
}
const double kSlope0 = std::sqrt(1.0 / 3.0); // -U'(0;0) for logistic
} // namespace

TEST_CASE("fixed points stay put") {
    const auto pp = logistic_at(0.0);
    IntegrateOptions opt;
    opt.max_span = 50.0;
    for (Vec2 start : {Vec2{0.0, 0.0}, Vec2{1.0, 0.0}}) {
        const auto traj = integrate(pp, start, Direction::Forward, {}, opt);
        REQUIRE(traj.terminal_event == TerminalEvent::SpanLimit);
        for (const auto& pt : traj.points) {
            CHECK(pt.q == Catch::Approx(start[0]).margin(1e-12));
            CHECK(pt.p == Catch::Approx(start[1]).margin(1e-12));
        }
    }
}

TEST_CASE("energy is conserved when gamma = 0") {
    const auto pp = logistic_at(0.0);
    const double lam = saddle_lambda_plus(pp);
    const Vec2 start{1.0 - 1e-6, -1e-6 * lam};
    std::vector<Event> ev{
        {TerminalEvent::QHitZero, [](double, double q, double) { return q; }}};
    const auto traj = integrate(pp, start, Direction::Forward, ev);
    REQUIRE(traj.terminal_event == TerminalEvent::QHitZero);
    CHECK(std::abs(traj.back().q) <= 1e-12);

    const double E0 = oracle::energy(pp.f, start[0], start[1]);
    for (const auto& pt : traj.points)
        REQUIRE(std::abs(oracle::energy(pp.f, pt.q, pt.p) - E0) < 1e-9);

    // p(end)^2 = 2 int_0^1 f = 1/3 for the logistic
    CHECK(traj.back().p * traj.back().p == Catch::Approx(1.0 / 3.0).margin(1e-9));
}

TEST_CASE("saddle eigen-directions") {
    const auto pp0 = logistic_at(0.0);
    CHECK(saddle_lambda_plus(pp0) == Catch::Approx(1.0));
    CHECK(saddle_lambda_minus(pp0) == Catch::Approx(-1.0));
    const auto u = saddle_unstable_direction(pp0);
    const auto s = saddle_stable_direction(pp0);
    CHECK(u[0] == Catch::Approx(1.0 / std::sqrt(2.0)));
    CHECK(u[1] == Catch::Approx(1.0 / std::sqrt(2.0)));
    CHECK(s[1] == Catch::Approx(-1.0 / std::sqrt(2.0)));

    const auto ppm2 = logistic_at(-2.0);
    CHECK(saddle_lambda_plus(ppm2) == Catch::Approx(1.0 + std::sqrt(2.0)));

    for (double g : {-3.0, -0.7, 0.0, 1.2}) {
        const auto pp = logistic_at(g);
        CHECK(saddle_lambda_plus(pp) * saddle_lambda_minus(pp) ==
              Catch::Approx(pp.f.fprime1()));
        CHECK(saddle_lambda_plus(pp) > 0.0);
        CHECK(saddle_lambda_minus(pp) < 0.0);
    }
}

TEST_CASE("decreasing semi-wave at gamma = 0") {
    const auto w = decreasing_semiwave(logistic_at(0.0));
    CHECK(w.slope_at_zero == Catch::Approx(-kSlope0).margin(2e-8));
    CHECK(w.q_values.back() == 0.0);
    CHECK(w.q_values.front() >= 1.0 - 1e-6); // tail ~ 1
    CHECK(w.height < 1.0 + 1e-8);
    CHECK(w.residual_sup <= 1e-5);
    for (std::size_t i = 1; i < w.q_values.size(); ++i)
        REQUIRE(w.q_values[i] < w.q_values[i - 1]);
    // analytic tail extension approaches 1
    CHECK(w.value(w.z_left() - 30.0) == Catch::Approx(1.0).margin(1e-8));
    CHECK(w.value(1.0) == 0.0);
}

TEST_CASE("stefan functional P") {
    CHECK(stefan_functional(logistic_at(0.0), 1.0) ==
          Catch::Approx(kSlope0).margin(2e-8));
    // exactly linear in mu
    CHECK(stefan_functional(logistic_at(0.0), 2.0) ==
          2.0 * stefan_functional(logistic_at(0.0), 1.0));
    CHECK(stefan_functional(logistic_at(-0.5), 1.0) >
          stefan_functional(logistic_at(0.0), 1.0));
    CHECK(stefan_functional(logistic_at(0.0), 1.0) >
          stefan_functional(logistic_at(0.5), 1.0));
}

TEST_CASE("P strictly decreasing, vanishing at c0") {
    // 20-point grid on [-3 c0, 0.9 c0], c0 = 2
    double prev = kInf;
    for (int i = 0; i < 20; ++i) {
        const double g = -6.0 + (1.8 + 6.0) * i / 19.0;
        const double P = stefan_functional(logistic_at(g), 1.0);
        REQUIRE(P < prev);
        REQUIRE(P > 0.0);
        prev = P;
    }
    const double P0 = stefan_functional(logistic_at(0.0), 1.0);
    CHECK(stefan_functional(logistic_at(0.99 * 2.0), 1.0) < 0.05 * P0);
}

TEST_CASE("increasing semi-wave and the gamma = 0 mirror symmetry") {
    const auto ul = increasing_semiwave(logistic_at(0.0));
    CHECK(ul.slope_at_zero == Catch::Approx(kSlope0).margin(2e-8));
    for (std::size_t i = 1; i < ul.q_values.size(); ++i)
        REQUIRE(ul.q_values[i] > ul.q_values[i - 1]);

    const auto u = decreasing_semiwave(logistic_at(0.0));
    REQUIRE(u.dz == ul.dz);
    const std::size_t n = std::min(u.q_values.size(), ul.q_values.size());
    for (std::size_t i = 0; i < n; ++i) {
        // U_l(z; 0) = U(-z; 0)
        const double a = ul.q_values[i];
        const double b = u.q_values[u.q_values.size() - 1 - i];
        REQUIRE(std::abs(a - b) < 1e-8);
    }
}

TEST_CASE("compact bump width matches the quadrature oracle") {
    const auto pp = logistic_at(0.0);
    const double P0 = stefan_functional(pp, 1.0);
    for (double frac : {0.1, 0.3, 0.5}) {
        const double b = frac * P0;
        const auto w = compact_bump(pp, b, 1.0);
        const double L_oracle = oracle::bump_width_quadrature(pp.f, b, 1.0);
        INFO("b=" << b << " L=" << w.width << " oracle=" << L_oracle);
        REQUIRE(std::abs(w.width - L_oracle) <= 1e-6 * L_oracle);
        REQUIRE(w.height < 1.0);
        REQUIRE(w.q_values.front() == 0.0);
        REQUIRE(w.q_values.back() == 0.0);
        REQUIRE(w.residual_sup <= 1e-5);
        REQUIRE(w.slope_at_zero == -b);
    }
}

TEST_CASE("compact bump small-b width limit is the linearized period") {
    const auto pp = logistic_at(0.0);
    const auto w = compact_bump(pp, 1e-3, 1.0);
    CHECK(std::abs(w.width - M_PI) < 5e-3); // pi / sqrt(f'(0))
}

TEST_CASE("compact bump rejects b >= P(gamma)") {
    const auto pp = logistic_at(0.0);
    CHECK_THROWS_AS(compact_bump(pp, 0.6, 1.0), NotInS1);
    CHECK_THROWS_AS(compact_bump(logistic_at(2.5), 0.1, 1.0), NotInS1);
}

TEST_CASE("tadpole profile") {
    const auto pp = logistic_at(-2.5);
    const auto v = tadpole(pp, 0.3, 1.0);
    CHECK(v.slope_at_zero == -0.3);
    CHECK(v.height < 1.0);
    CHECK(v.q_values.back() == 0.0);
    CHECK(v.residual_sup <= 1e-5);
    // exactly one interior local maximum (the head)
    int maxima = 0;
    for (std::size_t i = 1; i + 1 < v.q_values.size(); ++i)
        if (v.q_values[i] > v.q_values[i - 1] && v.q_values[i] >= v.q_values[i + 1])
            ++maxima;
    CHECK(maxima == 1);
    // tail decays toward 0 on the left
    CHECK(v.value(v.z_left() - 10.0) < v.q_values.front());
    CHECK(v.left_rate == Catch::Approx(0.5)); // (2.5 - sqrt(6.25-4))/2

    CHECK_THROWS_AS(tadpole(pp, 5.0, 1.0), NotInS2);
    CHECK_THROWS_AS(tadpole(logistic_at(-1.0), 0.3, 1.0), NotInS2);
}

TEST_CASE("tadpole at the defective node gamma = -c0") {
    const auto v = tadpole(logistic_at(-2.0), 0.5, 1.0);
    CHECK(v.height < 1.0);
    CHECK(v.slope_at_zero == -0.5);
    CHECK(v.residual_sup <= 1e-5);
}

TEST_CASE("tadpole head approaches 1 as b -> P(gamma)") {
    const auto pp = logistic_at(-2.5);
    const double P = stefan_functional(pp, 1.0);
    const auto v = tadpole(pp, 0.99 * P, 1.0);
    CHECK(v.height > 0.9);
    const auto v2 = tadpole(pp, 0.5 * P, 1.0);
    CHECK(v2.height < v.height);
}

TEST_CASE("full front Q") {
    const auto pp = logistic_at(-2.0);
    const auto q = full_front(pp);
    CHECK(q.value(0.0) == Catch::Approx(0.5).margin(1e-9));
    for (std::size_t i = 1; i < q.q_values.size(); ++i)
        REQUIRE(q.q_values[i] > q.q_values[i - 1]);
    CHECK(q.residual_sup <= 1e-5);
    CHECK(q.slope_at_zero > 0.0);
    CHECK(q.value(-1e3) == Catch::Approx(0.0).margin(1e-8));
    CHECK(q.value(1e3) == Catch::Approx(1.0).margin(1e-8));

    CHECK_THROWS_AS(full_front(logistic_at(-1.0)), ShootFailed);
}

TEST_CASE("event localization hits |q| <= 1e-12") {
    for (double g : {-2.5, -1.0, 0.0, 1.5}) {
        const auto pp = logistic_at(g);
        const Vec2 dir = saddle_unstable_direction(pp);
        const Vec2 start{1.0 - 1e-8 * dir[0], -1e-8 * dir[1]};
        std::vector<Event> ev{
            {TerminalEvent::QHitZero, [](double, double q, double) { return q; }}};
        const auto traj = integrate(pp, start, Direction::Forward, ev);
        REQUIRE(traj.terminal_event == TerminalEvent::QHitZero);
        REQUIRE(std::abs(traj.back().q) <= 1e-12);
    }
}
