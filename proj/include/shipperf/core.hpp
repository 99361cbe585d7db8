#ifndef SHIPPERF_CORE_HPP
#define SHIPPERF_CORE_HPP

#include <cmath>
#include <cstdint>
#include <string>

#include "json.hpp"
#include "shipperf/errors.hpp"
#include "shipperf/units.hpp"

namespace shipperf {

/// Main particulars of a vessel, the minimal geometry the resistance
/// theories need. All values are SI.
struct VesselParticulars {
    double length_overall = 0.0;        // L_OA [m]
    double length_pp = 0.0;             // L_pp, between perpendiculars [m]
    double beam = 0.0;                  // B [m]
    double block_coefficient = 0.0;     // C_B
    double bow_waterline_length = 0.0;  // L_B [m]
    double transverse_area_laden = 0.0;   // A_XV above waterline, laden [m^2]
    double transverse_area_ballast = 0.0; // A_XV above waterline, ballast [m^2]
    double propulsive_efficiency = 0.7;   // eta_D
    double mechanical_efficiency = 0.99;  // eta_M

    void validate() const {
        auto fail = [](const std::string& what) { throw InvalidParticularsError("vessel particulars: " + what); };
        if (!(length_overall > 0.0)) fail("length_overall must be > 0");
        if (!(length_pp > 0.0)) fail("length_pp must be > 0");
        if (length_pp > length_overall) fail("length_pp must not exceed length_overall");
        if (!(beam > 0.0)) fail("beam must be > 0");
        if (!(block_coefficient > 0.0 && block_coefficient < 1.0)) fail("block_coefficient must be in (0, 1)");
        if (!(bow_waterline_length > 0.0)) fail("bow_waterline_length must be > 0");
        if (!(transverse_area_laden > 0.0)) fail("transverse_area_laden must be > 0");
        if (!(transverse_area_ballast > 0.0)) fail("transverse_area_ballast must be > 0");
        if (!(propulsive_efficiency > 0.0 && propulsive_efficiency <= 1.0)) fail("propulsive_efficiency must be in (0, 1]");
        if (!(mechanical_efficiency > 0.0 && mechanical_efficiency <= 1.0)) fail("mechanical_efficiency must be in (0, 1]");
    }
};

inline void to_json(nlohmann::json& j, const VesselParticulars& v) {
    j = {{"length_overall_m", v.length_overall},
         {"length_pp_m", v.length_pp},
         {"beam_m", v.beam},
         {"block_coefficient", v.block_coefficient},
         {"bow_waterline_length_m", v.bow_waterline_length},
         {"transverse_area_laden_m2", v.transverse_area_laden},
         {"transverse_area_ballast_m2", v.transverse_area_ballast},
         {"propulsive_efficiency", v.propulsive_efficiency},
         {"mechanical_efficiency", v.mechanical_efficiency}};
}

inline void from_json(const nlohmann::json& j, VesselParticulars& v) {
    j.at("length_overall_m").get_to(v.length_overall);
    j.at("length_pp_m").get_to(v.length_pp);
    j.at("beam_m").get_to(v.beam);
    j.at("block_coefficient").get_to(v.block_coefficient);
    j.at("bow_waterline_length_m").get_to(v.bow_waterline_length);
    j.at("transverse_area_laden_m2").get_to(v.transverse_area_laden);
    j.at("transverse_area_ballast_m2").get_to(v.transverse_area_ballast);
    v.propulsive_efficiency = j.value("propulsive_efficiency", 0.7);
    v.mechanical_efficiency = j.value("mechanical_efficiency", 0.99);
}

/// Weather and water state relative to the vessel. Directions are radians in
/// [0, 2*pi), 0 = head (wind/waves on the bow), pi = following.
struct EnvironmentState {
    double wind_speed_rel = 0.0;   // V_wrel [m/s]
    double wind_dir_rel = 0.0;     // theta_rel [rad]
    double sig_wave_height = 0.0;  // H_S [m]
    double wave_peak_period = 8.0; // T_p [s]
    double wave_dir_rel = 0.0;     // alpha_rel [rad]
    double water_density = kDefaultWaterDensity; // rho_w [kg/m^3]
    double air_density = kDefaultAirDensity;     // rho_A [kg/m^3]

    void validate() const {
        auto fail = [](const std::string& what) { throw DomainError("environment state: " + what); };
        if (!(wind_speed_rel >= 0.0)) fail("wind_speed_rel must be >= 0");
        if (!(sig_wave_height >= 0.0)) fail("sig_wave_height must be >= 0");
        if (!(wave_peak_period > 0.0)) fail("wave_peak_period must be > 0");
        if (!(water_density > 0.0) || !(air_density > 0.0)) fail("densities must be > 0");
    }
};

/// One timestamped steady-state observation with its measured brake power.
struct VoyageRecord {
    std::int64_t timestamp = 0; // unix seconds, UTC
    double stw = 0.0;           // speed through water [m/s]
    double sog = 0.0;           // speed over ground [m/s]
    double heading = 0.0;       // [rad]
    double draft_aft = 0.0;     // [m]
    double draft_fwd = 0.0;     // [m]
    double displacement = 0.0;  // [t]
    EnvironmentState environment;
    double brake_power = 0.0;   // [W]

    double draft_mean() const { return 0.5 * (draft_aft + draft_fwd); }
};

/// Decomposition of the total resistance for one prediction. Calm water is
/// never negative; wind and waves may be (following conditions).
struct ResistanceBreakdown {
    double calm = 0.0;  // [N]
    double wind = 0.0;  // [N]
    double waves = 0.0; // [N]
};

inline double total_resistance(const ResistanceBreakdown& b) {
    return b.calm + b.wind + b.waves;
}

/// Brake power from total resistance: P_B = R * V_S / (eta_D * eta_M).
inline double brake_power(double r_total, double stw, const VesselParticulars& v) {
    if (!(v.propulsive_efficiency > 0.0 && v.propulsive_efficiency <= 1.0) ||
        !(v.mechanical_efficiency > 0.0 && v.mechanical_efficiency <= 1.0)) {
        throw InvalidParticularsError("brake_power: efficiencies must be in (0, 1]");
    }
    if (stw < 0.0) throw DomainError("brake_power: stw must be >= 0");
    return r_total * stw / (v.propulsive_efficiency * v.mechanical_efficiency);
}

/// Inverse of brake_power; used to move measured power back to resistance.
inline double power_to_resistance(double power, double stw, const VesselParticulars& v) {
    if (!(v.propulsive_efficiency > 0.0 && v.propulsive_efficiency <= 1.0) ||
        !(v.mechanical_efficiency > 0.0 && v.mechanical_efficiency <= 1.0)) {
        throw InvalidParticularsError("power_to_resistance: efficiencies must be in (0, 1]");
    }
    if (!(stw > 0.0)) throw DomainError("power_to_resistance: stw must be > 0");
    return power * v.propulsive_efficiency * v.mechanical_efficiency / stw;
}

/// Picks the exposed transverse area by loading condition, decided from the
/// mean draft against a configured threshold.
inline double select_transverse_area(const VesselParticulars& v, double draft_mean, double laden_draft_threshold) {
    return draft_mean >= laden_draft_threshold ? v.transverse_area_laden : v.transverse_area_ballast;
}

} // namespace shipperf

#endif
