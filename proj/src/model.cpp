#include "ionspice/model.hpp"

#include "ionspice/error.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ionspice {

std::string_view to_string(Region r) noexcept {
    return r == Region::Forward ? "forward" : "reverse";
}

void validate(const DiodeParams& p, bool require_rectifying) {
    const auto check = [](double v, const char* name) {
        if (!std::isfinite(v) || v <= 0.0) {
            throw DomainError(std::string("diode parameter ") + name + " must be finite and positive");
        }
    };
    check(p.r_e, "r_e");
    check(p.r_p_fwd, "r_p_fwd");
    check(p.r_p_rev, "r_p_rev");
    check(p.c_p_fwd, "c_p_fwd");
    check(p.c_p_rev, "c_p_rev");
    if (require_rectifying && !(p.r_p_rev > p.r_p_fwd)) {
        throw DomainError("diode parameter r_p_rev must exceed r_p_fwd");
    }
}

Region region(double vc) {
    if (!std::isfinite(vc)) {
        throw DomainError("junction voltage is not finite");
    }
    return vc >= 0.0 ? Region::Forward : Region::Reverse;
}

double branch_current(const DiodeParams& p, double vc) {
    return vc / p.r_p(region(vc));
}

double charge(const DiodeParams& p, double vc) {
    return p.c_p(region(vc)) * vc;
}

double junction_voltage(const DiodeParams& p, double q) {
    return q >= 0.0 ? q / p.c_p_fwd : q / p.c_p_rev;
}

SmallSignal small_signal(const DiodeParams& p, double vc) {
    const Region r = region(vc);
    return {1.0 / p.r_p(r), p.c_p(r)};
}

double time_constant(const DiodeParams& p, Region r) noexcept {
    const double rp = p.r_p(r);
    return p.c_p(r) * rp * p.r_e / (rp + p.r_e);
}

std::optional<StepSolution> StepSolution::solve(const DiodeParams& p, double v_in, double q0) {
    StepSolution s;
    const double vc_fwd = v_in * p.r_p_fwd / (p.r_e + p.r_p_fwd);
    const double vc_rev = v_in * p.r_p_rev / (p.r_e + p.r_p_rev);
    const double vc0 = junction_voltage(p, q0);
    if (v_in == 0.0) {
        s.region_ = ionspice::region(vc0);
    } else {
        s.region_ = vc_fwd >= 0.0 ? Region::Forward : Region::Reverse;
    }
    const double vc_ss = s.region_ == Region::Forward ? vc_fwd : vc_rev;
    if (vc0 * vc_ss < 0.0) {
        return std::nullopt;
    }
    const double rp = p.r_p(s.region_);
    s.r_e_ = p.r_e;
    s.c_ = p.c_p(s.region_);
    s.tau_ = time_constant(p, s.region_);
    s.i_ss_ = v_in / (p.r_e + rp);
    s.q_ss_ = v_in * s.c_ * rp / (p.r_e + rp);
    s.amplitude_ = q0 - s.q_ss_;
    return s;
}

double StepSolution::charge(double t) const {
    return q_ss_ + amplitude_ * std::exp(-t / tau_);
}

double StepSolution::current(double t) const {
    return i_ss_ - amplitude_ / (c_ * r_e_) * std::exp(-t / tau_);
}

std::optional<double> analytic_step_response(const DiodeParams& p, double v_in, double q0, double t) {
    if (!(t >= 0.0)) {
        throw DomainError("analytic step response requires t >= 0");
    }
    const auto s = StepSolution::solve(p, v_in, q0);
    if (!s) {
        return std::nullopt;
    }
    return s->current(t);
}

std::complex<double> cpe_impedance(const CpeParams& c, double omega) {
    if (!(omega > 0.0) || !std::isfinite(omega)) {
        throw DomainError("CPE impedance requires a positive angular frequency");
    }
    if (!(c.y0 > 0.0) || !(c.alpha > 0.0 && c.alpha <= 1.0)) {
        throw DomainError("CPE requires y0 > 0 and 0 < alpha <= 1");
    }
    if (c.alpha == 1.0) {
        return {0.0, -1.0 / (c.y0 * omega)};
    }
    const std::complex<double> jw_alpha = std::polar(std::pow(omega, c.alpha), c.alpha * std::numbers::pi / 2.0);
    return 1.0 / (c.y0 * jw_alpha);
}

double rectification_ratio(const DiodeParams& p) noexcept {
    return (p.r_e + p.r_p_rev) / (p.r_e + p.r_p_fwd);
}

bool set_param(DiodeParams& p, std::string_view key, double value) {
    if (key == "r_e") p.r_e = value;
    else if (key == "r_p_fwd") p.r_p_fwd = value;
    else if (key == "r_p_rev") p.r_p_rev = value;
    else if (key == "c_p_fwd") p.c_p_fwd = value;
    else if (key == "c_p_rev") p.c_p_rev = value;
    else return false;
    return true;
}

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

std::optional<double> parse_number(std::string_view s) {
    if (s.empty()) {
        return std::nullopt;
    }
    if (s.front() == '+') {
        s.remove_prefix(1);
    }
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

DiodeParams parse_params(std::string_view text) {
    DiodeParams p;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw DomainError("parameter document line " + std::to_string(lineno) + ": expected key=value");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        const auto num = parse_number(val);
        if (!num) {
            throw DomainError("parameter document line " + std::to_string(lineno) + ": bad number '" + val + "'");
        }
        if (!set_param(p, key, *num)) {
            throw DomainError("parameter document line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    validate(p, false);
    return p;
}

std::string format_params(const DiodeParams& p) {
    std::string out;
    out += "r_e=" + format_number(p.r_e) + "\n";
    out += "r_p_fwd=" + format_number(p.r_p_fwd) + "\n";
    out += "r_p_rev=" + format_number(p.r_p_rev) + "\n";
    out += "c_p_fwd=" + format_number(p.c_p_fwd) + "\n";
    out += "c_p_rev=" + format_number(p.c_p_rev) + "\n";
    return out;
}

}  // namespace ionspice
