#pragma once

// Extraction of the five diode parameters from a quasi-steady I-V sweep and a
// step-response record.
//
// File formats (CSV with header row):
//   IV      columns v,i
//   step    columns t,i
//   events  columns t_event,v_before,v_after   (t_event = first sample at the new level)

#include "ionspice/model.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ionspice {

struct IvDataset {
    std::vector<double> v;
    std::vector<double> i;

    /// Throws DomainError unless lengths match and voltages are sorted.
    void validate() const;
};

struct StepEvent {
    double time = 0.0;
    double v_before = 0.0;
    double v_after = 0.0;
};

struct StepDataset {
    std::vector<double> t;
    std::vector<double> i;
    std::vector<StepEvent> events;

    /// Throws DomainError unless times are strictly increasing and every
    /// event lies inside the record.
    void validate() const;

    /// Events with the given transition, in time order.
    [[nodiscard]] std::vector<StepEvent> find(double v_before, double v_after) const;

    /// Sample range [begin, end) from the event to the next event (or the end).
    [[nodiscard]] std::pair<std::size_t, std::size_t> window(const StepEvent& e) const;
};

[[nodiscard]] IvDataset load_iv(const std::string& path);
[[nodiscard]] StepDataset load_step(const std::string& step_path, const std::string& events_path);
void save_iv(const std::string& path, const IvDataset& iv);
void save_step(const std::string& step_path, const std::string& events_path, const StepDataset& s);

struct RtssResult {
    double rtss_rev = 0.0;
    double rtss_fwd = 0.0;
};

/// Least-squares I-V slopes over sliding 3-point windows inside each bias
/// region (V = 0 belongs to the forward region), converted to resistances
/// and averaged. Needs at least 3 points per region.
[[nodiscard]] RtssResult extract_rtss(const IvDataset& iv);

/// |dV| / |I_peak - I_before|, the peak being the largest deviation in the
/// 10 samples from the event on. Throws when the peak does not overshoot the
/// settled current by more than the noise floor.
[[nodiscard]] double extract_re(const StepDataset& step, const StepEvent& e);

/// Decay fit over the event's window.
[[nodiscard]] double fit_tau(const StepDataset& step, const StepEvent& e);

struct RepeatedEstimate {
    double mean = 0.0;
    double spread = 0.0;  ///< max - min over the repeats
    std::size_t count = 0;
};

[[nodiscard]] RepeatedEstimate average_estimates(std::span<const double> values);

/// C = tau (R_p + R_e) / (R_p R_e) per region: (c_fwd, c_rev).
[[nodiscard]] std::pair<double, double> solve_capacitances(double r_e, double r_p_fwd, double r_p_rev, double tau_fwd,
                                                           double tau_rev);

struct CalibrationReport {
    DiodeParams params;
    RtssResult rtss;
    RepeatedEstimate r_e;
    RepeatedEstimate tau_fwd;
    RepeatedEstimate tau_rev;
};

/// Uses every 0 -> +V event for R_e and tau_fwd and every 0 -> -V event for
/// tau_rev. Errors are CalibrationError carrying the failing stage.
[[nodiscard]] CalibrationReport calibrate_report(const IvDataset& iv, const StepDataset& step);
[[nodiscard]] DiodeParams calibrate_full(const IvDataset& iv, const StepDataset& step);

struct SyntheticNoise {
    double relative = 0.0;  ///< each sample multiplied by (1 + relative * N(0,1))
    std::uint64_t seed = 1;
};

/// DC sweep of one diode from -v_max to v_max.
[[nodiscard]] IvDataset synthetic_iv(const DiodeParams& p, int points = 41, double v_max = 1.0,
                                     const SyntheticNoise& noise = {});

struct StepSchedule {
    double t_first = 1.0;         ///< time of the first step
    double hold_reverse = 10.0;   ///< hold after 0 -> -V and after -V -> 0
    double hold_forward = 1000.0; ///< hold after 0 -> +V
    double volts = 1.0;
    int repeats = 1;              ///< the 0 -> -V -> 0 -> +V -> 0 cycle count
    double dt = 0.0;              ///< <= 0 selects tau_min / 200
    double dense_window = 5.0;    ///< seconds kept at full resolution after each event
    std::size_t sparse_every = 100;
};

/// Transient simulation of one diode through the schedule; near-instant
/// steps (one dt ramps), decimated outside the dense windows.
[[nodiscard]] StepDataset synthetic_step(const DiodeParams& p, const StepSchedule& schedule = {},
                                         const SyntheticNoise& noise = {});

}  // namespace ionspice
