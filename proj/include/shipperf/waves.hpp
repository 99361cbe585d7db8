#ifndef SHIPPERF_WAVES_HPP
#define SHIPPERF_WAVES_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "json.hpp"
#include "shipperf/core.hpp"
#include "shipperf/errors.hpp"
#include "shipperf/quadrature.hpp"
#include "shipperf/units.hpp"

namespace shipperf {

// ---------------------------------------------------------------------------
// Closed-form theories
// ---------------------------------------------------------------------------

/// Head-seas added wave resistance, R_AW = 0.64 g H_S^2 C_B rho_w B^2 / L_pp.
inline double kreitner(const VesselParticulars& v, const EnvironmentState& env) {
    const double hs = env.sig_wave_height;
    return 0.64 * kGravity * hs * hs * v.block_coefficient * env.water_density * v.beam * v.beam / v.length_pp;
}

/// Cosine-law extension for arbitrary headings,
///   R_AW = 0.64 g H_S^2 C_B rho_w B^2 / (3 L_OA) * (2 + cos(alpha_rel)).
inline double kreitner_directional(const VesselParticulars& v, const EnvironmentState& env) {
    const double hs = env.sig_wave_height;
    return 0.64 * kGravity * hs * hs * v.block_coefficient * env.water_density * v.beam * v.beam /
           (3.0 * v.length_overall) * (2.0 + std::cos(env.wave_dir_rel));
}

/// Head-sector empirical formula, R_AW = (1/16) g H_S^2 rho_w B sqrt(B / L_B),
/// valid for |alpha_rel| <= 45 degrees.
inline double stawave1(const VesselParticulars& v, const EnvironmentState& env) {
    const double alpha = fold_to_pi(env.wave_dir_rel);
    if (alpha > deg_to_rad(45.0)) {
        throw ValidityError("stawave1: |alpha_rel| must be <= 45 deg, got " + std::to_string(rad_to_deg(alpha)) +
                            " deg");
    }
    const double hs = env.sig_wave_height;
    return (1.0 / 16.0) * kGravity * hs * hs * env.water_density * v.beam * std::sqrt(v.beam / v.bow_waterline_length);
}

// ---------------------------------------------------------------------------
// Wave spectrum
// ---------------------------------------------------------------------------

/// Pierson-Moskowitz spectral density parameterized by (H_S, T_p):
///   S(omega) = (5/16) H_S^2 omega_p^4 omega^-5 exp(-(5/4)(omega_p/omega)^4).
struct WaveSpectrum {
    double hs = 0.0; // [m]
    double tp = 0.0; // [s]

    double omega_p() const { return 2.0 * std::numbers::pi / tp; }

    double density(double omega) const {
        if (!(omega > 0.0)) return 0.0;
        const double wp = omega_p();
        const double ratio = wp / omega;
        const double r4 = ratio * ratio * ratio * ratio;
        return (5.0 / 16.0) * hs * hs * std::pow(wp, 4) * std::pow(omega, -5) * std::exp(-1.25 * r4);
    }
};

inline WaveSpectrum pm_spectrum(double hs, double tp) {
    if (!(tp > 0.0)) throw DomainError("pm_spectrum: t_p must be > 0");
    if (hs < 0.0) throw DomainError("pm_spectrum: h_s must be >= 0");
    return WaveSpectrum{hs, tp};
}

/// Numerical zeroth moment of the spectrum; equals H_S^2 / 16 for the
/// Pierson-Moskowitz form. Integrated on [omega_p/10, 200 omega_p], whose
/// analytic tail mass is below 1e-9 of the moment.
inline double spectrum_moment0(const WaveSpectrum& spec, double rel_tol = 1e-8) {
    if (spec.hs == 0.0) return 0.0;
    const double wp = spec.omega_p();
    return integrate_adaptive([&](double w) { return spec.density(w); }, 0.1 * wp, 200.0 * wp, rel_tol).value;
}

// ---------------------------------------------------------------------------
// Spectrum-integrated response functions
// ---------------------------------------------------------------------------

/// Frequency response of added wave resistance per squared wave amplitude,
/// R_AW(omega) / zeta_a^2 [N/m^2], split into motion and reflection parts.
struct ResponseFunction {
    std::string name;
    double validity_max_angle = std::numbers::pi; // folded alpha_rel must be <= this
    std::function<double(double omega, double alpha_rel, double stw, const VesselParticulars&, double rho_w)> motion;
    std::function<double(double omega, double alpha_rel, double stw, const VesselParticulars&, double rho_w)>
        reflection;

    double value(double omega, double alpha_rel, double stw, const VesselParticulars& v, double rho_w) const {
        double r = 0.0;
        if (motion) r += motion(omega, alpha_rel, stw, v, rho_w);
        if (reflection) r += reflection(omega, alpha_rel, stw, v, rho_w);
        return r;
    }
};

struct SpectrumIntegration {
    double value = 0.0;            // [N]
    double truncation_bound = 0.0; // bound on the spectral mass neglected outside the window, times sup |rf|
    double error_estimate = 0.0;   // quadrature error estimate [N]
    int evaluations = 0;
};

/// Mean added resistance in irregular seas, Eq-form 2 * integral S(w) rf(w) dw.
///
/// Integration window is [omega_p/10, 60 omega_p]: the PM density below the
/// window is transcendentally small and the mass above it is bounded by
/// 1.25 (1/60)^4 < 1e-7 of the zeroth moment, reported via truncation_bound.
inline SpectrumIntegration mean_added_resistance_diagnosed(const ResponseFunction& rf, const WaveSpectrum& spec,
                                                           double alpha_rel, double stw, const VesselParticulars& v,
                                                           double rho_w = kDefaultWaterDensity,
                                                           double rel_tol = 1e-4) {
    SpectrumIntegration out;
    if (spec.hs == 0.0) return out;
    const double wp = spec.omega_p();
    double sup_rf = 0.0;
    auto integrand = [&](double w) {
        const double r = rf.value(w, alpha_rel, stw, v, rho_w);
        sup_rf = std::max(sup_rf, std::abs(r));
        return spec.density(w) * r;
    };
    const auto q = integrate_adaptive(integrand, 0.1 * wp, 60.0 * wp, rel_tol);
    const double m0 = spec.hs * spec.hs / 16.0;
    out.value = 2.0 * q.value;
    out.error_estimate = 2.0 * q.error_estimate;
    out.truncation_bound = 2.0 * sup_rf * 1.25 * std::pow(1.0 / 60.0, 4) * m0;
    out.evaluations = q.evaluations;
    return out;
}

inline double mean_added_resistance(const ResponseFunction& rf, const WaveSpectrum& spec, double alpha_rel,
                                    double stw, const VesselParticulars& v, double rho_w = kDefaultWaterDensity,
                                    double rel_tol = 1e-4) {
    return mean_added_resistance_diagnosed(rf, spec, alpha_rel, stw, v, rho_w, rel_tol).value;
}

// ---------------------------------------------------------------------------
// Non-linear form factor of the reflection term
// ---------------------------------------------------------------------------

/// Default bow-entrance angle from main particulars when no value is given.
inline double default_bow_entrance_angle(const VesselParticulars& v) {
    return std::atan(v.beam / (2.0 * 0.195 * v.length_pp));
}

namespace detail {

inline void check_form_factor_args(double e1, double c_b, double fr) {
    if (!(e1 > 0.0 && e1 < std::numbers::pi)) {
        throw InvalidParameterError("form factor: bow entrance angle must be in (0, pi)");
    }
    if (!(c_b > 0.0 && c_b < 1.0)) throw InvalidParameterError("form factor: block coefficient must be in (0, 1)");
    if (!(fr >= 0.0)) throw InvalidParameterError("form factor: Froude number must be >= 0");
}

} // namespace detail

/// Original heading shape: f = -cos(alpha) on [pi - E1, pi], 0 below.
/// Discontinuous at alpha = pi - E1; kept for regression comparisons.
inline double form_factor_original(double alpha_rel, double e1, double c_b, double fr) {
    detail::check_form_factor_args(e1, c_b, fr);
    const double alpha = fold_to_pi(alpha_rel);
    const double f = alpha >= std::numbers::pi - e1 ? -std::cos(alpha) : 0.0;
    return std::pow(0.87 / c_b, (1.0 + 4.0 * std::sqrt(fr)) * f);
}

/// Corrected heading shape: the cosine is shifted so f = 0 at alpha = pi - E1
/// while f = 1 is kept at alpha = pi, making the factor continuous.
inline double form_factor_fixed(double alpha_rel, double e1, double c_b, double fr) {
    detail::check_form_factor_args(e1, c_b, fr);
    const double alpha = fold_to_pi(alpha_rel);
    double f = 0.0;
    if (alpha >= std::numbers::pi - e1) {
        const double denom = std::cos(std::numbers::pi - e1) + 1.0;
        if (std::abs(denom) < 1e-12) {
            throw InvalidParameterError("form_factor_fixed: degenerate bow entrance angle (cos(pi - E1) = -1)");
        }
        f = -(std::cos(alpha) + 1.0) / denom + 1.0;
    }
    return std::pow(0.87 / c_b, (1.0 + 4.0 * std::sqrt(fr)) * f);
}

// ---------------------------------------------------------------------------
// rawrf/1 plug-in response functions
// ---------------------------------------------------------------------------

/// Constants of the parametric response family used for plug-in theories.
/// The motion part is a peaked function of the non-dimensional frequency
/// w' = omega sqrt(L_pp / g) weighted by the head-sector cosine; the
/// reflection part is a high-frequency ramp modulated by the corrected form
/// factor.
struct ResponseFamilyConstants {
    double motion_amplitude = 0.0;  // scales rho g B^2 / L_pp
    double motion_freq_exponent = 0.0;
    double motion_decay = 0.0;
    double motion_peak_wn = 1.0;    // non-dimensional frequency of the motion peak
    double motion_fr_coef = 0.0;    // multiplies Fr^1.5 exp(-3.5 Fr)
    double reflection_amplitude = 0.0; // scales rho g B / 2
    double reflection_ramp_exponent = 0.0;
};

inline ResponseFunction make_response_function(const std::string& name, const ResponseFamilyConstants& k,
                                               double validity_max_angle) {
    ResponseFunction rf;
    rf.name = name;
    rf.validity_max_angle = validity_max_angle;
    rf.motion = [k](double omega, double alpha, double stw, const VesselParticulars& v, double rho_w) {
        const double wn = omega * std::sqrt(v.length_pp / kGravity) / k.motion_peak_wn;
        if (!(wn > 0.0)) return 0.0;
        const double fr = stw / std::sqrt(kGravity * v.length_pp);
        const double peak =
            std::pow(wn, k.motion_freq_exponent) *
            std::exp((k.motion_freq_exponent / k.motion_decay) * (1.0 - std::pow(wn, k.motion_decay)));
        const double speed_mod = k.motion_fr_coef * std::pow(fr, 1.5) * std::exp(-3.5 * fr);
        const double heading = std::max(0.0, std::cos(fold_to_pi(alpha)));
        return k.motion_amplitude * rho_w * kGravity * v.beam * v.beam / v.length_pp * peak * speed_mod * heading;
    };
    rf.reflection = [k](double omega, double alpha, double stw, const VesselParticulars& v, double rho_w) {
        const double wn = omega * std::sqrt(v.length_pp / kGravity);
        const double fr = stw / std::sqrt(kGravity * v.length_pp);
        const double ramp = std::pow(wn, k.reflection_ramp_exponent) / (1.0 + std::pow(wn, k.reflection_ramp_exponent));
        const double ff = form_factor_fixed(alpha, default_bow_entrance_angle(v), v.block_coefficient, fr);
        return k.reflection_amplitude * 0.5 * rho_w * kGravity * v.beam * ramp * ff;
    };
    return rf;
}

/// Loads a rawrf/1 plug-in response function. Validates the head-seas
/// non-negativity invariant on a frequency grid at load.
inline ResponseFunction load_response_function(const nlohmann::json& j) {
    if (j.value("schema", "") != "rawrf/1") {
        throw SchemaError("response function: expected schema \"rawrf/1\", got \"" + j.value("schema", "<missing>") +
                          "\"");
    }
    ResponseFamilyConstants k;
    const auto& motion = j.at("motion");
    k.motion_amplitude = motion.at("amplitude").get<double>();
    k.motion_freq_exponent = motion.at("freq_exponent").get<double>();
    k.motion_decay = motion.at("decay").get<double>();
    k.motion_peak_wn = motion.value("peak_wn", 1.0);
    k.motion_fr_coef = motion.value("fr_coef", 1.0);
    const auto& refl = j.at("reflection");
    k.reflection_amplitude = refl.at("amplitude").get<double>();
    k.reflection_ramp_exponent = refl.at("ramp_exponent").get<double>();
    if (!(k.motion_decay > 0.0)) throw SchemaError("rawrf/1: motion decay must be > 0");
    if (!(k.motion_peak_wn > 0.0)) throw SchemaError("rawrf/1: motion peak_wn must be > 0");

    const std::string name = j.at("name").get<std::string>();
    const double max_angle = deg_to_rad(j.value("validity_max_angle_deg", 180.0));
    ResponseFunction rf = make_response_function(name, k, max_angle);

    VesselParticulars probe;
    probe.length_overall = 190.0;
    probe.length_pp = 183.0;
    probe.beam = 32.0;
    probe.block_coefficient = 0.7;
    probe.bow_waterline_length = 40.0;
    probe.transverse_area_laden = 450.0;
    probe.transverse_area_ballast = 750.0;
    // Motion and reflection must each resist in head seas, not just their sum.
    for (double wn = 0.2; wn <= 8.0; wn += 0.2) {
        const double omega = wn / std::sqrt(probe.length_pp / kGravity);
        if (rf.motion(omega, 0.0, 5.0, probe, kDefaultWaterDensity) < 0.0 ||
            rf.reflection(omega, 0.0, 5.0, probe, kDefaultWaterDensity) < 0.0) {
            throw SchemaError("rawrf/1 \"" + name + "\": response is negative in head seas at omega = " +
                              std::to_string(omega));
        }
    }
    return rf;
}

// ---------------------------------------------------------------------------
// Theory registry
// ---------------------------------------------------------------------------

/// A named added-wave-resistance theory with its directional validity range.
struct WaveTheory {
    std::string name;
    double validity_max_angle = std::numbers::pi; // folded alpha_rel must be <= this
    std::function<double(const VesselParticulars&, const EnvironmentState&, double stw)> evaluate;
};

struct TheoryEvaluation {
    double value = 0.0;
    bool in_validity = true;
};

enum class ValidityMode { Strict, Flag };

class WaveTheoryRegistry {
public:
    /// Builds the registry with the closed-form theories registered.
    static WaveTheoryRegistry with_builtins() {
        WaveTheoryRegistry reg;
        reg.add({"kreitner", deg_to_rad(45.0),
                 [](const VesselParticulars& v, const EnvironmentState& e, double) { return kreitner(v, e); }});
        reg.add({"kreitner-directional", std::numbers::pi,
                 [](const VesselParticulars& v, const EnvironmentState& e, double) {
                     return kreitner_directional(v, e);
                 }});
        reg.add({"stawave1", deg_to_rad(45.0), [](const VesselParticulars& v, const EnvironmentState& e, double) {
                     return stawave1(v, e);
                 }});
        return reg;
    }

    void add(WaveTheory theory) { theories_[theory.name] = std::move(theory); }

    /// Registers a spectrum-integrated theory backed by a response function.
    void add_response_function(ResponseFunction rf, double rel_tol = 1e-4) {
        WaveTheory t;
        t.name = rf.name;
        t.validity_max_angle = rf.validity_max_angle;
        t.evaluate = [rf = std::move(rf), rel_tol](const VesselParticulars& v, const EnvironmentState& env,
                                                   double stw) {
            const WaveSpectrum spec = pm_spectrum(env.sig_wave_height, env.wave_peak_period);
            return mean_added_resistance(rf, spec, env.wave_dir_rel, stw, v, env.water_density, rel_tol);
        };
        theories_[t.name] = std::move(t);
    }

    bool has(const std::string& name) const { return theories_.count(name) > 0; }

    const WaveTheory& get(const std::string& name) const {
        auto it = theories_.find(name);
        if (it == theories_.end()) {
            throw UnknownNameError("wave theory \"" + name + "\" is not registered; registered: " + names_joined());
        }
        return it->second;
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : theories_) out.push_back(k);
        return out;
    }

    /// Evaluates a theory by name. Out-of-validity headings throw in strict
    /// mode; in flag mode the value is still computed where the formula is
    /// defined but in_validity is false.
    TheoryEvaluation evaluate(const std::string& name, const VesselParticulars& v, const EnvironmentState& env,
                              double stw, ValidityMode mode = ValidityMode::Strict) const {
        const WaveTheory& t = get(name);
        TheoryEvaluation out;
        out.in_validity = fold_to_pi(env.wave_dir_rel) <= t.validity_max_angle + 1e-12;
        if (!out.in_validity && mode == ValidityMode::Strict) {
            throw ValidityError("wave theory \"" + name + "\": alpha_rel " +
                                std::to_string(rad_to_deg(fold_to_pi(env.wave_dir_rel))) +
                                " deg is outside the validity range " +
                                std::to_string(rad_to_deg(t.validity_max_angle)) + " deg");
        }
        if (out.in_validity) {
            out.value = t.evaluate(v, env, stw);
        } else {
            // Flag mode: evaluate on the nearest in-range heading so callers
            // that insist on a number get a bounded one, but never report it
            // as valid.
            EnvironmentState clamped = env;
            clamped.wave_dir_rel = t.validity_max_angle;
            out.value = t.evaluate(v, clamped, stw);
        }
        return out;
    }

private:
    std::string names_joined() const {
        std::string s;
        for (const auto& [k, v] : theories_) s += (s.empty() ? "" : ", ") + k;
        return s;
    }

    std::map<std::string, WaveTheory> theories_;
};

} // namespace shipperf

#endif
