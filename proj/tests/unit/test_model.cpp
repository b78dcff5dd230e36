#include "ionspice/error.hpp"
#include "ionspice/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace ionspice;

namespace {

// Time constant of the R_e / (R_p || C) network, written out independently.
double tau_oracle(double c, double rp, double re) { return c / (1.0 / rp + 1.0 / re); }

}  // namespace

TEST(Region, TieAndSigns) {
    EXPECT_EQ(region(0.0), Region::Forward);
    EXPECT_EQ(region(0.3), Region::Forward);
    EXPECT_EQ(region(-1e-12), Region::Reverse);
    EXPECT_EQ(region(-0.0), Region::Forward);
    EXPECT_THROW((void)region(std::nan("")), DomainError);
    EXPECT_THROW((void)region(INFINITY), DomainError);
}

TEST(Params, DefaultsAndValidation) {
    DiodeParams p;
    EXPECT_DOUBLE_EQ(p.r_e, 5.5e5);
    EXPECT_DOUBLE_EQ(p.r_p_fwd, 2.9e5);
    EXPECT_DOUBLE_EQ(p.r_p_rev, 4.84e7);
    EXPECT_DOUBLE_EQ(p.c_p_fwd, 3.74e-4);
    EXPECT_DOUBLE_EQ(p.c_p_rev, 9.93e-7);
    EXPECT_NO_THROW(validate(p));
    p.r_e = 0.0;
    EXPECT_THROW(validate(p), DomainError);
    p = {};
    p.c_p_rev = std::nan("");
    EXPECT_THROW(validate(p), DomainError);
    p = {};
    p.r_p_rev = p.r_p_fwd;
    EXPECT_THROW(validate(p), DomainError);
    EXPECT_NO_THROW(validate(p, false));
}

TEST(BranchCurrent, Examples) {
    DiodeParams p;
    EXPECT_EQ(branch_current(p, 0.0), 0.0);
    EXPECT_NEAR(branch_current(p, 0.29), 1.0e-6, 1e-18);
    EXPECT_NEAR(branch_current(p, -0.484), -1.0e-8, 1e-20);
}

TEST(BranchCurrent, MonotoneAndZeroAtOrigin) {
    DiodeParams p;
    double prev = branch_current(p, -2.0);
    for (double v = -2.0; v <= 2.0; v += 0.01) {
        const double i = branch_current(p, v);
        EXPECT_GE(i, prev);
        prev = i;
    }
}

TEST(Charge, ExamplesAndContinuity) {
    DiodeParams p;
    EXPECT_EQ(charge(p, 0.0), 0.0);
    EXPECT_NEAR(charge(p, 1.0), 3.74e-4, 1e-18);
    EXPECT_NEAR(charge(p, -1.0), -9.93e-7, 1e-20);
    EXPECT_NEAR(charge(p, 1e-15), 0.0, 1e-18);
    EXPECT_NEAR(charge(p, -1e-15), 0.0, 1e-18);
    double prev = charge(p, -1.0);
    for (double v = -0.99; v <= 1.0; v += 0.01) {
        EXPECT_GT(charge(p, v), prev);
        prev = charge(p, v);
    }
}

TEST(Charge, JunctionVoltageInverse) {
    DiodeParams p;
    for (double v : {-0.9, -1e-6, 0.0, 1e-6, 0.7}) EXPECT_NEAR(junction_voltage(p, charge(p, v)), v, 1e-15);
}

TEST(SmallSignal, Regions) {
    DiodeParams p;
    auto f = small_signal(p, 0.5);
    EXPECT_DOUBLE_EQ(f.conductance, 1.0 / 2.9e5);
    EXPECT_DOUBLE_EQ(f.capacitance, 3.74e-4);
    auto r = small_signal(p, -0.5);
    EXPECT_DOUBLE_EQ(r.conductance, 1.0 / 4.84e7);
    EXPECT_DOUBLE_EQ(r.capacitance, 9.93e-7);
    auto z = small_signal(p, 0.0);
    EXPECT_DOUBLE_EQ(z.conductance, f.conductance);
    EXPECT_DOUBLE_EQ(z.capacitance, f.capacitance);
}

TEST(TimeConstant, PublishedValues) {
    DiodeParams p;
    EXPECT_NEAR(time_constant(p, Region::Forward), 71.0, 71.0 * 0.02);
    EXPECT_NEAR(time_constant(p, Region::Reverse), 0.54, 0.54 * 0.02);
    EXPECT_NEAR(time_constant(p, Region::Forward), tau_oracle(p.c_p_fwd, p.r_p_fwd, p.r_e), 1e-9);
    EXPECT_NEAR(time_constant(p, Region::Reverse), tau_oracle(p.c_p_rev, p.r_p_rev, p.r_e), 1e-12);
}

TEST(AnalyticStep, EndpointsAndTau) {
    DiodeParams p;
    EXPECT_EQ(*analytic_step_response(p, 1.0, 0.0, 0.0), 1.0 / p.r_e);
    EXPECT_NEAR(*analytic_step_response(p, 1.0, 0.0, 1e5), 1.0 / (p.r_e + p.r_p_fwd), 1e-18);
    EXPECT_NEAR(*analytic_step_response(p, 1.0, 0.0, 1e5), 1.0 / 8.4e5, 1e-18);
    EXPECT_NEAR(*analytic_step_response(p, 1.0, 0.0, 0.0), 1.82e-6, 0.01e-6);
    EXPECT_NEAR(*analytic_step_response(p, -1.0, 0.0, 1e3), -1.0 / (p.r_e + p.r_p_rev), 1e-20);
    auto fwd = StepSolution::solve(p, 1.0, 0.0);
    auto rev = StepSolution::solve(p, -1.0, 0.0);
    ASSERT_TRUE(fwd && rev);
    EXPECT_NEAR(fwd->tau(), 71.0, 71.0 * 0.02);
    EXPECT_NEAR(rev->tau(), 0.54, 0.54 * 0.02);
    EXPECT_EQ(fwd->region(), Region::Forward);
    EXPECT_EQ(rev->region(), Region::Reverse);
}

TEST(AnalyticStep, MatchesFirstOrderOde) {
    // Explicit fine-step integration of dq/dt = (v - vc)/R_e - vc/R_p.
    DiodeParams p;
    for (double v : {1.0, -1.0}) {
        const auto sol = StepSolution::solve(p, v, 0.0);
        const double tau = sol->tau();
        const double h = tau / 20000.0;
        double q = 0.0;
        for (int k = 0; k < 20000; ++k) {
            const double vc = junction_voltage(p, q);
            q += h * ((v - vc) / p.r_e - branch_current(p, vc));
        }
        const double vc = junction_voltage(p, q);
        EXPECT_NEAR(sol->current(tau), (v - vc) / p.r_e, 1e-4 * std::abs(v / p.r_e));
    }
}

TEST(AnalyticStep, CrossingTrajectoryIsRejected) {
    DiodeParams p;
    const double q_rev = charge(p, -0.9);
    EXPECT_FALSE(analytic_step_response(p, 1.0, q_rev, 0.0).has_value());
    EXPECT_TRUE(analytic_step_response(p, 0.0, q_rev, 1.0).has_value());
    EXPECT_TRUE(analytic_step_response(p, -0.5, q_rev, 1.0).has_value());
}

TEST(Cpe, Examples) {
    auto z1 = cpe_impedance({1.0, 1.0}, 1.0);
    EXPECT_EQ(z1.real(), 0.0);
    EXPECT_EQ(z1.imag(), -1.0);
    auto z2 = cpe_impedance({1.0, 0.5}, 1.0);
    EXPECT_NEAR(std::abs(z2), 1.0, 1e-15);
    EXPECT_NEAR(std::arg(z2), -std::numbers::pi / 4.0, 1e-15);
    EXPECT_NEAR(std::abs(cpe_impedance({2.0, 1.0}, 10.0)), 0.05, 1e-15);
    EXPECT_THROW((void)cpe_impedance({1.0, 1.0}, 0.0), DomainError);
    EXPECT_THROW((void)cpe_impedance({1.0, 1.0}, -3.0), DomainError);
}

TEST(Cpe, IdealCapacitorExact) {
    for (double c : {1e-6, 3.74e-4}) {
        for (double w : {0.1, 1.0, 1e3}) {
            const auto z = cpe_impedance({c, 1.0}, w);
            const std::complex<double> ideal(0.0, -1.0 / (c * w));
            EXPECT_EQ(z, ideal);
        }
    }
}

TEST(RectificationRatio, Examples) {
    DiodeParams p;
    EXPECT_NEAR(rectification_ratio(p), 4.895e7 / 8.4e5, 1e-9);
    EXPECT_NEAR(rectification_ratio(p), 58.3, 0.1);
    p.r_p_rev = p.r_p_fwd;
    EXPECT_DOUBLE_EQ(rectification_ratio(p), 1.0);
    // r_e = 0 is outside the DiodeParams invariant but the formula still holds.
    DiodeParams q{0.0, 1.0, 100.0, 1.0, 1.0};
    EXPECT_DOUBLE_EQ(rectification_ratio(q), 100.0);
}

TEST(ParamsDocument, RoundTrip) {
    DiodeParams p{1.25e5, 3.3e4, 7.1e7, 2.2e-3, 4.4e-8};
    EXPECT_EQ(parse_params(format_params(p)), p);
    const auto q = parse_params("# comment\nr_e = 6e5\n\nc_p_rev=1e-6 # trailing\n");
    EXPECT_EQ(q.r_e, 6e5);
    EXPECT_EQ(q.c_p_rev, 1e-6);
    EXPECT_EQ(q.r_p_fwd, DiodeParams{}.r_p_fwd);
    EXPECT_THROW((void)parse_params("r_x=1\n"), Error);
    EXPECT_THROW((void)parse_params("r_e=1k\n"), Error);
    EXPECT_THROW((void)parse_params("r_e=-1\n"), Error);
}

TEST(Numbers, ParseAndFormat) {
    EXPECT_EQ(parse_number("1e-3"), 1e-3);
    EXPECT_EQ(parse_number("+2.5"), 2.5);
    EXPECT_EQ(parse_number("-4"), -4.0);
    EXPECT_FALSE(parse_number("1k"));
    EXPECT_FALSE(parse_number(""));
    EXPECT_FALSE(parse_number("inf"));
    EXPECT_FALSE(parse_number("nan"));
    for (double v : {0.1, 1.0 / 3.0, 5.5e5, -9.93e-7, 1e300}) EXPECT_EQ(*parse_number(format_number(v)), v);
}
