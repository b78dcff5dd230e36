#include "ionspice/error.hpp"
#include "ionspice/library.hpp"
#include "ionspice/stochastic.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace ionspice;

TEST(Sample, ZeroSigmaIsExact) {
    VariationSpec v;
    v.entries = {{VariedParameter::RpFwd, std::log(3.0e5), 0.0}, {VariedParameter::RpRev, std::nullopt, 0.0}};
    Rng rng = run_stream(1, 0);
    const DiodeParams nominal;
    for (int k = 0; k < 100; ++k) {
        const auto p = sample_diode(nominal, v, rng);
        EXPECT_EQ(p.r_p_fwd, std::exp(std::log(3.0e5)));
        EXPECT_EQ(p.r_p_rev, nominal.r_p_rev);
        EXPECT_EQ(p.r_e, nominal.r_e);
        EXPECT_EQ(p.c_p_fwd, nominal.c_p_fwd);
        EXPECT_EQ(p.c_p_rev, nominal.c_p_rev);
    }
}

TEST(Sample, LawOfLargeNumbers) {
    const DiodeParams nominal;
    const double mu = std::log(nominal.r_p_fwd), sigma = 0.3;
    VariationSpec v;
    v.entries = {{VariedParameter::RpFwd, mu, sigma}};
    Rng rng = run_stream(2024, 0);
    const int n = 10000;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) sum += std::log(sample_diode(nominal, v, rng).r_p_fwd);
    EXPECT_NEAR(sum / n, mu, 3.0 * sigma / std::sqrt(double(n)));
}

TEST(Sample, SameSeedSameSequence) {
    const auto v = VariationSpec::centered(0.2, 0.4, 99, 1);
    Rng a = run_stream(99, 3), b = run_stream(99, 3), c = run_stream(99, 4);
    bool differs = false;
    for (int k = 0; k < 50; ++k) {
        const auto pa = sample_diode({}, v, a);
        EXPECT_EQ(pa, sample_diode({}, v, b));
        differs = differs || !(pa == sample_diode({}, v, c));
    }
    EXPECT_TRUE(differs);
}

TEST(Sample, ParametersIndependent) {
    const auto v = VariationSpec::centered(0.3, 0.3, 5, 1);
    Rng rng = run_stream(5, 0);
    const int n = 5000;
    double sxy = 0, sx = 0, sy = 0, sxx = 0, syy = 0;
    const DiodeParams nominal;
    for (int k = 0; k < n; ++k) {
        const auto p = sample_diode(nominal, v, rng);
        const double x = std::log(p.r_p_fwd), y = std::log(p.r_p_rev);
        sx += x, sy += y, sxy += x * y, sxx += x * x, syy += y * y;
    }
    const double cov = sxy / n - sx / n * sy / n;
    const double corr = cov / std::sqrt((sxx / n - sx / n * sx / n) * (syy / n - sy / n * sy / n));
    EXPECT_LT(std::abs(corr), 4.0 / std::sqrt(double(n)));
}

TEST(Spec, Validation) {
    auto v = VariationSpec::centered(-0.1, 0.1, 0, 1);
    EXPECT_THROW(v.validate(), DomainError);
    v = VariationSpec::centered(0.1, 0.1, 0, 1);
    v.entries[0].mu_log = std::nan("");
    EXPECT_THROW(v.validate(), DomainError);
}

TEST(FitLognormal, Examples) {
    const std::vector<double> same(7, 4.2);
    const auto f = fit_lognormal(same);
    EXPECT_NEAR(f.mu_log, std::log(4.2), 1e-15);
    EXPECT_EQ(f.sigma_log, 0.0);
    const std::vector<double> two{std::exp(1.0), std::exp(3.0)};
    const auto g = fit_lognormal(two);
    EXPECT_NEAR(g.mu_log, 2.0, 1e-15);
    EXPECT_NEAR(g.sigma_log, std::sqrt(2.0), 1e-15);
    EXPECT_THROW((void)fit_lognormal(std::vector<double>{1.0}), DomainError);
    EXPECT_THROW((void)fit_lognormal(std::vector<double>{1.0, 0.0}), DomainError);
    EXPECT_THROW((void)fit_lognormal(std::vector<double>{1.0, -2.0}), DomainError);
}

TEST(FitLognormal, SelfConsistency) {
    std::mt19937_64 rng(77);
    std::lognormal_distribution<double> dist(1.0, 0.5);
    std::vector<double> s(100000);
    for (double& x : s) x = dist(rng);
    const auto f = fit_lognormal(s);
    EXPECT_NEAR(f.mu_log, 1.0, 0.01);
    EXPECT_NEAR(f.sigma_log, 0.5, 0.005);
}

TEST(FromCurrents, RecoversNominalResistances) {
    const DiodeParams p;
    EXPECT_NEAR(junction_resistance_from_current(1.0, 1.0 / (p.r_e + p.r_p_fwd), p.r_e), p.r_p_fwd, 1e-6);
    EXPECT_NEAR(junction_resistance_from_current(-1.0, -1.0 / (p.r_e + p.r_p_rev), p.r_e), p.r_p_rev, 1e-3);
    const std::vector<double> on{1.0 / 8.0e5, 1.0 / 8.8e5}, off{-1.0 / 4.5e7, -1.0 / 5.3e7};
    const auto v = variation_from_currents(on, off, 1.0, p.r_e, 3, 10);
    ASSERT_EQ(v.entries.size(), 2u);
    EXPECT_NEAR(*v.entries[0].mu_log, 0.5 * (std::log(2.5e5) + std::log(3.3e5)), 1e-9);
    EXPECT_EQ(v.seed, 3u);
    EXPECT_EQ(v.n_runs, 10u);
}

TEST(Summary, Quantiles) {
    const std::vector<double> x{4, 1, 3, 2, 5};
    const auto s = summarize(x);
    EXPECT_EQ(s.count, 5u);
    EXPECT_DOUBLE_EQ(s.mean, 3.0);
    EXPECT_DOUBLE_EQ(s.stddev, std::sqrt(2.5));
    EXPECT_EQ(s.min, 1.0);
    EXPECT_EQ(s.max, 5.0);
    EXPECT_DOUBLE_EQ(s.quantiles[2].second, 3.0);
    EXPECT_DOUBLE_EQ(s.quantiles[0].second, 1.2);
}

namespace {

Generated driven_chain(int n) {
    auto g = chain(n);
    g.circuit.find("Vin")->as<VoltageSource>()->stimulus = DcStimulus{1.0};
    return g;
}

}  // namespace

TEST(MonteCarlo, ZeroSigmaSingleRunEqualsNominal) {
    const auto g = driven_chain(5);
    const auto nominal = dc_operating_point(g.circuit).signal("V(y5)");
    const auto r = monte_carlo(g.circuit, VariationSpec::centered(0, 0, 1, 1), DcAnalysis{}, observe_signals({"V(y5)"}));
    ASSERT_EQ(r.runs.size(), 1u);
    EXPECT_EQ(r.runs[0].outcomes[0], nominal);
    const auto many = monte_carlo(g.circuit, VariationSpec::centered(0, 0, 1, 20), DcAnalysis{},
                                  observe_signals({"V(y5)"}));
    EXPECT_EQ(many.summary[0].stddev, 0.0);
    EXPECT_EQ(many.summary[0].min, nominal);
    EXPECT_EQ(many.summary[0].max, nominal);
}

TEST(MonteCarlo, OrGateFiveRuns) {
    auto g = or_gate();
    const auto r = monte_carlo(g.circuit, VariationSpec::centered(0.2, 0.2, 11, 5), DcAnalysis{g.ports.drive(std::vector{1.0, 0.0})},
                               observe_signals({"V(y)", "I(Va)"}));
    ASSERT_EQ(r.runs.size(), 5u);
    for (const auto& run : r.runs) {
        EXPECT_TRUE(run.ok);
        EXPECT_EQ(run.outcomes.size(), 2u);
        EXPECT_EQ(run.sampled.size(), 3u);
        EXPECT_GT(run.outcomes[0], 0.5);
    }
}

TEST(MonteCarlo, DeterministicAndRunIndependent) {
    const auto g = driven_chain(3);
    auto spec = VariationSpec::centered(0.3, 0.3, 7, 30);
    const auto a = monte_carlo(g.circuit, spec, DcAnalysis{}, observe_signals({"V(y3)"}));
    const auto b = monte_carlo(g.circuit, spec, DcAnalysis{}, observe_signals({"V(y3)"}));
    spec.n_runs = 10;
    const auto c = monte_carlo(g.circuit, spec, DcAnalysis{}, observe_signals({"V(y3)"}));
    for (std::size_t k = 0; k < a.runs.size(); ++k) EXPECT_EQ(a.runs[k].outcomes, b.runs[k].outcomes);
    for (std::size_t k = 0; k < c.runs.size(); ++k) EXPECT_EQ(a.runs[k].outcomes, c.runs[k].outcomes);
    std::ostringstream sa, sb;
    write_runs_csv(sa, a);
    write_runs_csv(sb, b);
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(MonteCarlo, SummaryRecomputableAndSuccessCount) {
    const auto g = driven_chain(5);
    MonteCarloOptions o;
    o.success = [](const std::vector<double>& x) { return x[0] > 0.62; };
    const auto r = monte_carlo(g.circuit, VariationSpec::centered(0.4, 0.4, 3, 60), DcAnalysis{},
                               observe_signals({"V(y5)"}), o);
    const auto vals = r.outcome_values(0);
    const auto s = summarize(vals);
    EXPECT_EQ(s.mean, r.summary[0].mean);
    EXPECT_EQ(s.stddev, r.summary[0].stddev);
    std::size_t n = 0;
    for (double v : vals) n += v > 0.62;
    EXPECT_EQ(*r.successes, n);
    EXPECT_GT(r.summary[0].stddev, 0.0);
    std::ostringstream js;
    write_summary_json(js, r);
    EXPECT_NE(js.str().find("\"success_rate\""), std::string::npos);
}

TEST(MonteCarlo, TransientOutcomes) {
    auto g = driven_chain(1);
    TransientAnalysis t;
    t.options.t_end = 1.0;
    t.options.zero_initial = true;
    const auto r = monte_carlo(g.circuit, VariationSpec::centered(0.1, 0.1, 1, 4), t, observe_signals({"V(y1)"}));
    for (const auto& run : r.runs) EXPECT_TRUE(run.ok);
}

TEST(MonteCarlo, FailedRunsRecorded) {
    const auto g = driven_chain(1);
    const auto r = [&] {
        return monte_carlo(g.circuit, VariationSpec::centered(0.1, 0.1, 1, 3), DcAnalysis{{{"Vmissing", 1.0}}},
                           observe_signals({"V(y1)"}));
    };
    EXPECT_THROW((void)r(), Error);
    EXPECT_THROW((void)monte_carlo(g.circuit, VariationSpec::centered(0.1, 0.1, 1, 3), DcAnalysis{},
                                   observe_signals({"V(nowhere)"})),
                 SolverError);
}
