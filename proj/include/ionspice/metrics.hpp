#pragma once

// Circuit figures of merit and the two parameter studies: maximum chain
// length against rectification ratio, and maximum bridge frequency against
// junction-capacitance scaling.

#include "ionspice/engine.hpp"
#include "ionspice/library.hpp"
#include "ionspice/stochastic.hpp"

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ionspice {

/// V(selected) - max over the other outputs. Needs at least two outputs.
[[nodiscard]] double high_low_margin(const std::map<std::string, double>& outputs, const std::string& selected);

/// First time after t_event from which the signal stays within
/// band * |final - before| of its final value (linear interpolation at the
/// band crossing). The final value is the mean of the last 5 % of the window;
/// throws DomainError if any of those samples lies outside the band.
[[nodiscard]] double settle_time(std::span<const double> t, std::span<const double> y, double t_event,
                                 double band = 0.05);
[[nodiscard]] double settle_time(const TransientResult& tr, std::string_view signal, double t_event,
                                 double band = 0.05);

/// Time-weighted mean over [t0, t1] of the summed source power P(...)
/// (trapezoid rule, endpoints interpolated).
[[nodiscard]] double average_power(const TransientResult& tr, double t0, double t1);

/// One-sided Clopper-Pearson lower bound on a success probability at the
/// given confidence level.
[[nodiscard]] double clopper_pearson_lower(std::size_t successes, std::size_t trials, double level);

enum class VariedResistance { RpRev, RpFwd, Re };

[[nodiscard]] std::string_view to_string(VariedResistance v) noexcept;

/// Copy of `base` with one resistance rescaled so that
/// (r_e + r_p_rev) / (r_e + r_p_fwd) == rr. Throws DomainError if that needs
/// a non-positive resistance.
[[nodiscard]] DiodeParams scale_to_rr(const DiodeParams& base, double rr, VariedResistance vary);

struct ChainStudySpec {
    std::vector<double> rr_values;
    VariedResistance vary = VariedResistance::RpRev;
    VariationSpec variation;           ///< seed and n_runs are taken from here
    double threshold = 0.5;
    double confidence = 0.99;          ///< required success probability
    double certification_level = 0.95; ///< confidence of the binomial lower bound
    int max_n = 34;
    GateTopology topology{};
    ChainDrive drive = ChainDrive::TieSecondInputLow;

    void validate() const;
};

struct ChainTrial {
    int n = 0;
    std::size_t successes = 0;
    std::size_t runs = 0;
    double lower_bound = 0.0;
    bool pass = false;
};

struct ChainStudyPoint {
    double rr = 0.0;
    int max_length = 0;  ///< longest n with every chain 1..n passing
    std::vector<ChainTrial> trials;
};

/// Monte Carlo chain yield for each RR; lengths are tried upward from 1 and
/// the search stops at the first failing length.
[[nodiscard]] std::vector<ChainStudyPoint> max_chain_length(const ChainStudySpec& spec, const DiodeParams& base,
                                                            const SolverOptions& solver = {});

/// Nominal DC chain length: longest n (<= max_n) whose chains 1..n all put
/// the last output above the threshold.
[[nodiscard]] int deterministic_chain_length(const DiodeParams& p, const GateTopology& topology, ChainDrive drive,
                                             double threshold, int max_n, const SolverOptions& solver = {});

struct FrequencyStudySpec {
    std::vector<double> cp_multipliers;
    double amplitude = 1.0;
    double offset = 0.0;
    double load_ohms = 1e6;
    double efficiency = 0.5;      ///< success when mean load voltage >= efficiency * quasi-static mean
    int steps_per_period = 400;
    int periods = 8;
    int measure_periods = 2;      ///< trailing periods averaged
    int quasi_static_points = 256;
    int bisection_steps = 16;
    int max_decades = 12;

    void validate() const;
};

struct FrequencyPoint {
    double multiplier = 0.0;
    double f_max = 0.0;
    double efficiency = 0.0;  ///< at f_max
    int evaluations = 0;
};

/// Mean rectified load voltage with sources swept quasi-statically over one
/// sine period (DC solves).
[[nodiscard]] double quasi_static_mean(const DiodeParams& p, const FrequencyStudySpec& spec);

/// Mean load voltage over the trailing periods of a sinusoidal transient at f,
/// divided by the quasi-static mean.
[[nodiscard]] double rectification_efficiency(const DiodeParams& p, const FrequencyStudySpec& spec, double f,
                                              double quasi_static);

/// Both capacitances scaled by each multiplier; the largest passing
/// frequency is bracketed by decades and refined by log-space bisection.
[[nodiscard]] std::vector<FrequencyPoint> max_frequency(const FrequencyStudySpec& spec, const DiodeParams& base);

/// label,rr,statistic,value
void write_chain_study_csv(std::ostream& out, const std::vector<std::pair<std::string, std::vector<ChainStudyPoint>>>& curves,
                           bool header = true);
/// multiplier,statistic,value
void write_frequency_study_csv(std::ostream& out, const std::vector<FrequencyPoint>& points);

/// gnuplot scripts reading the CSVs above.
void write_chain_plot(std::ostream& out, const std::string& csv_file, const std::vector<std::string>& labels);
void write_frequency_plot(std::ostream& out, const std::string& csv_file);

}  // namespace ionspice
