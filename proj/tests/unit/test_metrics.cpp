#include "ionspice/error.hpp"
#include "ionspice/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace ionspice;

TEST(Margin, Examples) {
    EXPECT_NEAR(high_low_margin({{"D0", 0.9}, {"D1", 0.1}, {"D2", 0.05}}, "D0"), 0.8, 1e-15);
    EXPECT_EQ(high_low_margin({{"D0", 0.3}, {"D1", 0.3}}, "D1"), 0.0);
    EXPECT_THROW((void)high_low_margin({{"D0", 1.0}}, "D0"), DomainError);
    EXPECT_THROW((void)high_low_margin({{"D0", 1.0}, {"D1", 0.0}}, "D7"), DomainError);
}

TEST(Margin, OffsetInvariant) {
    std::map<std::string, double> a{{"x", 0.7}, {"y", 0.2}, {"z", 0.4}}, b;
    for (auto [k, v] : a) b[k] = v + 3.25;
    EXPECT_NEAR(high_low_margin(a, "x"), high_low_margin(b, "x"), 1e-12);
}

TEST(SettleTime, IdealStepIsZero) {
    const std::vector<double> t{0, 1, 2, 3, 4, 5}, y{0, 1, 1, 1, 1, 1};
    EXPECT_EQ(settle_time(t, y, 1.0), 0.0);
}

TEST(SettleTime, ExponentialIsThreeTau) {
    std::vector<double> t, y;
    const double tau = 71.0;
    for (int k = 0; k <= 20000; ++k) {
        t.push_back(0.1 * k);
        y.push_back(1.0 - std::exp(-t.back() / tau));
    }
    const double expected = -tau * std::log(0.05);
    EXPECT_NEAR(settle_time(t, y, 0.0), expected, expected * 0.05);
    std::vector<double> scaled(y);
    for (double& v : scaled) v *= -7.5;
    EXPECT_NEAR(settle_time(t, scaled, 0.0), settle_time(t, y, 0.0), 1e-9);
}

TEST(SettleTime, OscillationFails) {
    std::vector<double> t, y;
    for (int k = 0; k <= 1000; ++k) {
        t.push_back(0.1 * k);
        y.push_back(1.0 + 0.5 * std::sin(t.back()));
    }
    EXPECT_THROW((void)settle_time(t, y, 0.0), DomainError);
}

namespace {

Circuit single_diode(double v) {
    Circuit c;
    c.set_model("m", {});
    c.add("V1", VoltageSource{"a", "0", DcStimulus{v}});
    c.add("D1", IontronicDiode{"a", "0", "m", {}});
    return c;
}

}  // namespace

TEST(Power, SingleDiodeDc) {
    TransientOptions o;
    o.t_end = 5;
    const auto tr = transient(single_diode(1.0), o);
    EXPECT_NEAR(average_power(tr, 0.0, 5.0), 1.0 / 8.4e5, 1e-12);
    EXPECT_NEAR(average_power(tr, 1.0, 2.0), 1.0 / 8.4e5, 1e-12);
    const auto z = transient(single_diode(0.0), o);
    EXPECT_EQ(average_power(z, 0.0, 5.0), 0.0);
    EXPECT_THROW((void)average_power(tr, 2.0, 2.0), DomainError);
    EXPECT_THROW((void)average_power(tr, 0.0, 50.0), DomainError);
}

TEST(Power, EnergyBalance) {
    // Source energy = energy dissipated in R_e and R_p + change in stored energy.
    const DiodeParams p;
    TransientOptions o;
    o.t_end = 300;
    o.dt = 0.05;
    o.force_dt = true;
    o.zero_initial = true;
    o.integrator = Integrator::Trapezoidal;
    const auto tr = transient(single_diode(1.0), o);
    const auto& i = tr.signal("I(D1)");
    const auto& vc = tr.signal("VC(D1)");
    double dissipated = 0.0;
    for (std::size_t k = 1; k < tr.times.size(); ++k) {
        auto pw = [&](std::size_t j) { return i[j] * i[j] * p.r_e + vc[j] * vc[j] / p.r_p_fwd; };
        dissipated += 0.5 * (pw(k) + pw(k - 1)) * (tr.times[k] - tr.times[k - 1]);
    }
    const double stored = 0.5 * p.c_p_fwd * vc.back() * vc.back();
    const double source = average_power(tr, 0.0, o.t_end) * o.t_end;
    EXPECT_GE(source, 0.0);
    EXPECT_NEAR(source, dissipated + stored, 0.01 * source);
}

TEST(ClopperPearson, KnownValues) {
    // All successes: lower bound = (1 - level)^(1/n).
    EXPECT_NEAR(clopper_pearson_lower(200, 200, 0.8), std::pow(0.2, 1.0 / 200), 1e-12);
    EXPECT_NEAR(clopper_pearson_lower(500, 500, 0.95), std::pow(0.05, 1.0 / 500), 1e-12);
    EXPECT_EQ(clopper_pearson_lower(0, 10, 0.95), 0.0);
    EXPECT_LT(clopper_pearson_lower(199, 200, 0.95), clopper_pearson_lower(200, 200, 0.95));
    // One success in one trial: p^1 >= alpha.
    EXPECT_NEAR(clopper_pearson_lower(1, 1, 0.9), 0.1, 1e-12);
    EXPECT_THROW((void)clopper_pearson_lower(3, 2, 0.9), DomainError);
}

TEST(ScaleToRr, EachParameter) {
    const DiodeParams base;
    for (auto vary : {VariedResistance::RpRev, VariedResistance::RpFwd, VariedResistance::Re}) {
        for (double rr : {10.0, 40.0, 80.0}) {
            const auto p = scale_to_rr(base, rr, vary);
            EXPECT_NEAR(rectification_ratio(p), rr, 1e-9 * rr);
        }
    }
    EXPECT_THROW((void)scale_to_rr(base, 500.0, VariedResistance::RpFwd), DomainError);
    EXPECT_THROW((void)scale_to_rr(base, 0.5, VariedResistance::RpRev), DomainError);
}

TEST(ChainLength, ZeroSigmaMatchesDeterministic) {
    ChainStudySpec spec;
    spec.rr_values = {20.0, 58.3};
    spec.variation = VariationSpec::centered(0.0, 0.0, 1, 20);
    spec.certification_level = 0.5;
    spec.confidence = 0.95;
    spec.max_n = 12;
    const auto res = max_chain_length(spec, DiodeParams{});
    ASSERT_EQ(res.size(), 2u);
    for (const auto& pt : res) {
        const auto p = scale_to_rr(DiodeParams{}, pt.rr, VariedResistance::RpRev);
        EXPECT_EQ(pt.max_length, deterministic_chain_length(p, {}, ChainDrive::TieSecondInputLow, 0.5, 12));
    }
    EXPECT_LE(res[0].max_length, res[1].max_length);
    EXPECT_GE(res[1].max_length, 5);
}

TEST(ChainLength, Validation) {
    ChainStudySpec spec;
    EXPECT_THROW(spec.validate(), DomainError);
    spec.rr_values = {10};
    spec.threshold = 1.5;
    EXPECT_THROW(spec.validate(), DomainError);
    spec.threshold = 0.5;
    spec.confidence = 1.0;
    EXPECT_THROW(spec.validate(), DomainError);
}

TEST(Frequency, FastDiodesRectifyAtLowFrequency) {
    DiodeParams fast;
    fast.c_p_fwd *= 1e-6;
    fast.c_p_rev *= 1e-6;
    FrequencyStudySpec spec;
    spec.cp_multipliers = {1e-6};
    const double qs = quasi_static_mean(fast, spec);
    EXPECT_GT(qs, 0.0);
    EXPECT_NEAR(rectification_efficiency(fast, spec, 0.1, qs), 1.0, 0.02);
}

TEST(Frequency, ScalesInverselyWithCapacitance) {
    FrequencyStudySpec spec;
    spec.cp_multipliers = {1e-5, 1e-4, 1e-3};
    spec.steps_per_period = 200;
    spec.bisection_steps = 10;
    const auto pts = max_frequency(spec, DiodeParams{});
    ASSERT_EQ(pts.size(), 3u);
    for (std::size_t k = 1; k < pts.size(); ++k) {
        EXPECT_LE(pts[k].f_max, pts[k - 1].f_max);
        const double ratio = pts[k - 1].f_max / pts[k].f_max;
        EXPECT_GT(ratio, 5.0);
        EXPECT_LT(ratio, 20.0);
    }
    for (const auto& p : pts) EXPECT_GE(p.efficiency, spec.efficiency);
}

TEST(StudyOutput, CsvAndPlot) {
    std::vector<std::pair<std::string, std::vector<ChainStudyPoint>>> curves{
        {"sigma_x1", {{10.0, 3, {{1, 20, 20, 0.9, true}}}}}};
    std::ostringstream csv, gp;
    write_chain_study_csv(csv, curves);
    EXPECT_NE(csv.str().find("label,rr,statistic,value\nsigma_x1,10,max_length,3\n"), std::string::npos);
    write_chain_plot(gp, "chain.csv", {"sigma_x1"});
    EXPECT_NE(gp.str().find("chain.csv"), std::string::npos);
    std::ostringstream f;
    write_frequency_study_csv(f, {{1e-3, 0.1, 0.6, 5}});
    EXPECT_EQ(f.str(), "multiplier,statistic,value\n0.001,f_max,0.1\n0.001,efficiency,0.6\n");
}
