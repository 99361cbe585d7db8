#ifndef SHIPPERF_WIND_HPP
#define SHIPPERF_WIND_HPP

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "json.hpp"
#include "shipperf/core.hpp"
#include "shipperf/errors.hpp"
#include "shipperf/units.hpp"

namespace shipperf {

/// Left-hand-side normalization of one estimated parameter P.
enum class LhsForm { P, POverLoa, POverB, POverLoa2, POverLoaB, POverB2 };
/// Right-hand-side regression shape in L_OA and B.
enum class RhsForm { ABPlusBLoaPlusC, ABPlusC, BLoaPlusC };

struct KitamuraEntry {
    LhsForm lhs = LhsForm::P;
    RhsForm rhs = RhsForm::ABPlusC;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

/// Per-parameter estimation records for one ship type. Loading-dependent
/// parameters carry a "_laden" / "_ballast" suffix in the key.
struct KitamuraCoefficients {
    std::string ship_type;
    std::map<std::string, KitamuraEntry> params;
};

/// Directional coefficient regression constants, one set per angular branch
/// (head side theta < 90 deg, stern side theta > 90 deg).
struct FujiwaraRegression {
    std::array<double, 3> lf_low{};   // C_LF,  theta < 90
    std::array<double, 5> lf_high{};  // C_LF,  theta > 90
    std::array<double, 3> xli_low{};  // C_XLI, theta < 90
    std::array<double, 4> xli_high{}; // C_XLI, theta > 90
    std::array<double, 3> alf_low{};  // C_ALF, theta < 90
    std::array<double, 2> alf_high{}; // C_ALF, theta > 90

    /// Constant coefficient set: C_LF = lf, C_XLI = xli, C_ALF = alf on both
    /// branches, independent of geometry. Used for hand-set test tables.
    static FujiwaraRegression constants(double lf, double xli, double alf) {
        FujiwaraRegression r;
        r.lf_low = {lf, 0.0, 0.0};
        r.lf_high = {lf, 0.0, 0.0, 0.0, 0.0};
        r.xli_low = {xli, 0.0, 0.0};
        r.xli_high = {xli, 0.0, 0.0, 0.0};
        r.alf_low = {alf, 0.0, 0.0};
        r.alf_high = {alf, 0.0};
        return r;
    }
};

/// Above-water geometry feeding the directional coefficient expressions.
/// lateral_center_offset is signed (negative = centre aft of midship); all
/// other lengths and areas are non-negative.
struct FujiwaraParams {
    double l_oa = 0.0;                  // [m]
    double beam = 0.0;                  // [m]
    double transverse_area = 0.0;       // A_XV [m^2]
    double lateral_area = 0.0;          // A_YV [m^2]
    double superstructure_area = 0.0;   // A_OD [m^2]
    double lateral_center_offset = 0.0; // C_MC [m], signed
    double bridge_height = 0.0;         // H_BR [m]
    double lateral_center_height = 0.0; // H_C [m]
    std::string ship_type;
    std::vector<std::string> clamped; // parameters whose estimate was negative and clamped to 0

    void validate() const {
        auto fail = [](const std::string& what) { throw InvalidParameterError("fujiwara params: " + what); };
        if (!(l_oa > 0.0) || !(beam > 0.0)) fail("l_oa and beam must be > 0");
        if (transverse_area < 0.0 || lateral_area < 0.0 || superstructure_area < 0.0) fail("areas must be >= 0");
        if (bridge_height < 0.0 || lateral_center_height < 0.0) fail("heights must be >= 0");
    }
};

namespace detail {

inline double kitamura_rhs(const KitamuraEntry& e, double l_oa, double b) {
    switch (e.rhs) {
        case RhsForm::ABPlusBLoaPlusC: return e.a * b + e.b * l_oa + e.c;
        case RhsForm::ABPlusC: return e.a * b + e.c;
        case RhsForm::BLoaPlusC: return e.b * l_oa + e.c;
    }
    return 0.0;
}

inline double kitamura_lhs_factor(LhsForm lhs, double l_oa, double b) {
    switch (lhs) {
        case LhsForm::P: return 1.0;
        case LhsForm::POverLoa: return l_oa;
        case LhsForm::POverB: return b;
        case LhsForm::POverLoa2: return l_oa * l_oa;
        case LhsForm::POverLoaB: return l_oa * b;
        case LhsForm::POverB2: return b * b;
    }
    return 1.0;
}

} // namespace detail

/// Solves one parameter P from its normalized regression entry.
inline double kitamura_estimate(const KitamuraEntry& e, double l_oa, double b) {
    return detail::kitamura_lhs_factor(e.lhs, l_oa, b) * detail::kitamura_rhs(e, l_oa, b);
}

/// Estimates the above-water geometry from L_OA and B with the per-ship-type
/// regression entries. `loading` selects "_laden" / "_ballast" entry variants
/// where present. Negative area/height estimates clamp to 0 and are recorded
/// in the returned clamped list; the signed centre offset is left as is.
inline FujiwaraParams estimate_fujiwara_params(double l_oa, double b, const KitamuraCoefficients& coeffs,
                                               const std::string& loading = "laden") {
    if (!(l_oa > 0.0) || !(b > 0.0)) throw InvalidParameterError("estimate_fujiwara_params: l_oa and b must be > 0");
    auto lookup = [&](const std::string& name) -> const KitamuraEntry& {
        auto it = coeffs.params.find(name + "_" + loading);
        if (it == coeffs.params.end()) it = coeffs.params.find(name);
        if (it == coeffs.params.end()) {
            throw IncompleteCoefficientsError("estimate_fujiwara_params: ship type \"" + coeffs.ship_type +
                                              "\" is missing parameter \"" + name + "\"");
        }
        return it->second;
    };

    FujiwaraParams p;
    p.l_oa = l_oa;
    p.beam = b;
    p.ship_type = coeffs.ship_type;
    auto estimate_clamped = [&](const std::string& name, double& out) {
        const double v = kitamura_estimate(lookup(name), l_oa, b);
        if (v < 0.0) {
            p.clamped.push_back(name);
            out = 0.0;
        } else {
            out = v;
        }
    };
    estimate_clamped("A_XV", p.transverse_area);
    estimate_clamped("A_YV", p.lateral_area);
    estimate_clamped("A_OD", p.superstructure_area);
    estimate_clamped("H_BR", p.bridge_height);
    estimate_clamped("H_C", p.lateral_center_height);
    p.lateral_center_offset = kitamura_estimate(lookup("C_MC"), l_oa, b);
    return p;
}

namespace detail {

inline double lf_low(const FujiwaraParams& p, const FujiwaraRegression& r) {
    return r.lf_low[0] + r.lf_low[1] * p.lateral_area / (p.l_oa * p.beam) +
           r.lf_low[2] * p.lateral_center_offset / p.l_oa;
}

inline double lf_high(const FujiwaraParams& p, const FujiwaraRegression& r) {
    return r.lf_high[0] + r.lf_high[1] * p.beam / p.l_oa + r.lf_high[2] * p.lateral_center_height / p.l_oa +
           r.lf_high[3] * p.superstructure_area / (p.l_oa * p.l_oa) +
           r.lf_high[4] * p.transverse_area / (p.beam * p.beam);
}

inline double xli_low(const FujiwaraParams& p, const FujiwaraRegression& r) {
    const double hbr = std::max(p.bridge_height, 1e-9);
    return r.xli_low[0] + r.xli_low[1] * p.lateral_area / (p.l_oa * hbr) +
           r.xli_low[2] * p.transverse_area / (p.beam * hbr);
}

inline double xli_high(const FujiwaraParams& p, const FujiwaraRegression& r) {
    const double hbr = std::max(p.bridge_height, 1e-9);
    const double ayv = std::max(p.lateral_area, 1e-9);
    return r.xli_high[0] + r.xli_high[1] * p.lateral_area / (p.l_oa * hbr) +
           r.xli_high[2] * p.transverse_area / ayv + r.xli_high[3] * p.beam / p.l_oa;
}

inline double alf_low(const FujiwaraParams& p, const FujiwaraRegression& r) {
    const double ayv = std::max(p.lateral_area, 1e-9);
    return r.alf_low[0] + r.alf_low[1] * p.superstructure_area / ayv + r.alf_low[2] * p.beam / p.l_oa;
}

inline double alf_high(const FujiwaraParams& p, const FujiwaraRegression& r) {
    const double ayv = std::max(p.lateral_area, 1e-9);
    return r.alf_high[0] + r.alf_high[1] * p.superstructure_area / ayv;
}

inline double caa_branch(double theta, double lf, double xli, double alf) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double c3 = c * c * c;
    return lf * c + xli * (s - 0.5 * s * c3) + alf * s * c3;
}

} // namespace detail

/// Directional wind resistance coefficient C_AA(theta_rel).
///
/// The head-side and stern-side coefficient sets are blended linearly over a
/// +-5 degree band around 90 degrees so the curve has no jump at the branch
/// seam. The angle is folded onto [0, pi] by port/starboard symmetry.
inline double wind_coefficient(double theta_rel, const FujiwaraParams& p,
                               const FujiwaraRegression& r) {
    const double theta = fold_to_pi(theta_rel);
    const double low = detail::caa_branch(theta, detail::lf_low(p, r), detail::xli_low(p, r), detail::alf_low(p, r));
    const double high =
        detail::caa_branch(theta, detail::lf_high(p, r), detail::xli_high(p, r), detail::alf_high(p, r));
    const double half_band = deg_to_rad(5.0);
    const double seam = std::numbers::pi / 2.0;
    if (theta <= seam - half_band) return low;
    if (theta >= seam + half_band) return high;
    const double w = (theta - (seam - half_band)) / (2.0 * half_band);
    return (1.0 - w) * low + w * high;
}

/// C_AA sampled on an even grid over [0, pi] inclusive, interpolated linearly
/// in angle and symmetric about the bow-stern axis.
class WindCoefficientTable {
public:
    WindCoefficientTable() = default;

    explicit WindCoefficientTable(std::vector<double> samples) : values_(std::move(samples)) {
        if (values_.size() < 2) throw InvalidParameterError("wind coefficient table: need at least 2 samples");
        if (!(values_.front() > 0.0)) {
            throw InvalidParameterError("wind coefficient table: C_AA(0) must be > 0 (head wind resists)");
        }
    }

    static WindCoefficientTable from_fujiwara(const FujiwaraParams& p, const FujiwaraRegression& r,
                                              std::size_t resolution = 181) {
        p.validate();
        std::vector<double> v(resolution);
        for (std::size_t i = 0; i < resolution; ++i) {
            const double theta = std::numbers::pi * static_cast<double>(i) / static_cast<double>(resolution - 1);
            v[i] = wind_coefficient(theta, p, r);
        }
        return WindCoefficientTable(std::move(v));
    }

    double value(double theta_rel) const {
        const double theta = fold_to_pi(theta_rel);
        const double pos = theta / std::numbers::pi * static_cast<double>(values_.size() - 1);
        const auto i = static_cast<std::size_t>(std::min(pos, static_cast<double>(values_.size() - 2)));
        const double frac = pos - static_cast<double>(i);
        return values_[i] * (1.0 - frac) + values_[i + 1] * frac;
    }

    std::size_t size() const { return values_.size(); }
    const std::vector<double>& samples() const { return values_; }

private:
    std::vector<double> values_;
};

/// Added wind resistance,
///   R_AA = 0.5 rho_A A_XV C_AA(theta_rel) V_wrel^2 - 0.5 rho_A A_XV C_AA(0) V_G^2.
/// The subtracted term is the own-wind air resistance already contained in
/// the calm-water curve; following winds make the result negative.
inline double added_wind_resistance(const EnvironmentState& env, double sog, double a_xv,
                                    const WindCoefficientTable& coeffs) {
    if (!(a_xv > 0.0)) throw InvalidParameterError("added_wind_resistance: a_xv must be > 0");
    const double q = 0.5 * env.air_density * a_xv;
    return q * (coeffs.value(env.wind_dir_rel) * env.wind_speed_rel * env.wind_speed_rel -
                coeffs.value(0.0) * sog * sog);
}

/// Laden/ballast pair of coefficient tables with the mean-draft rule that
/// selects between them per record.
struct WindModel {
    WindCoefficientTable laden;
    WindCoefficientTable ballast;
    double a_xv_laden = 0.0;
    double a_xv_ballast = 0.0;
    double laden_draft_threshold = 0.0; // mean draft at or above this counts as laden [m]

    double resistance(const EnvironmentState& env, double sog, double draft_mean) const {
        const bool is_laden = draft_mean >= laden_draft_threshold;
        return added_wind_resistance(env, sog, is_laden ? a_xv_laden : a_xv_ballast,
                                     is_laden ? laden : ballast);
    }
};

// ---------------------------------------------------------------------------
// kitamura/1 coefficient file
// ---------------------------------------------------------------------------

struct WindCoefficientFile {
    std::string provenance;
    FujiwaraRegression fujiwara;
    std::map<std::string, KitamuraCoefficients> ship_types;
};

namespace detail {

inline LhsForm parse_lhs(const std::string& tag) {
    if (tag == "P") return LhsForm::P;
    if (tag == "P/Loa") return LhsForm::POverLoa;
    if (tag == "P/B") return LhsForm::POverB;
    if (tag == "P/Loa2") return LhsForm::POverLoa2;
    if (tag == "P/LoaB") return LhsForm::POverLoaB;
    if (tag == "P/B2") return LhsForm::POverB2;
    throw SchemaError("kitamura/1: unknown lhs_form \"" + tag + "\"");
}

inline RhsForm parse_rhs(const std::string& tag) {
    if (tag == "aB+bLoa+c") return RhsForm::ABPlusBLoaPlusC;
    if (tag == "aB+c") return RhsForm::ABPlusC;
    if (tag == "bLoa+c") return RhsForm::BLoaPlusC;
    throw SchemaError("kitamura/1: unknown rhs_form \"" + tag + "\"");
}

template <std::size_t N>
void load_array(const nlohmann::json& j, const char* key, std::array<double, N>& out) {
    const auto& arr = j.at(key);
    if (arr.size() != N) {
        throw SchemaError("kitamura/1: \"" + std::string(key) + "\" must have " + std::to_string(N) + " entries");
    }
    for (std::size_t i = 0; i < N; ++i) out[i] = arr[i].get<double>();
}

} // namespace detail

inline WindCoefficientFile load_wind_coefficients(const nlohmann::json& j) {
    if (j.value("schema", "") != "kitamura/1") {
        throw SchemaError("wind coefficients: expected schema \"kitamura/1\", got \"" + j.value("schema", "<missing>") +
                          "\"");
    }
    WindCoefficientFile file;
    file.provenance = j.value("provenance", "");
    const auto& fw = j.at("fujiwara");
    detail::load_array(fw, "lf_low", file.fujiwara.lf_low);
    detail::load_array(fw, "lf_high", file.fujiwara.lf_high);
    detail::load_array(fw, "xli_low", file.fujiwara.xli_low);
    detail::load_array(fw, "xli_high", file.fujiwara.xli_high);
    detail::load_array(fw, "alf_low", file.fujiwara.alf_low);
    detail::load_array(fw, "alf_high", file.fujiwara.alf_high);
    for (const auto& [type, params] : j.at("ship_types").items()) {
        KitamuraCoefficients kc;
        kc.ship_type = type;
        for (const auto& [name, entry] : params.items()) {
            KitamuraEntry e;
            e.lhs = detail::parse_lhs(entry.at("lhs_form").get<std::string>());
            e.rhs = detail::parse_rhs(entry.at("rhs_form").get<std::string>());
            e.a = entry.value("a", 0.0);
            e.b = entry.value("b", 0.0);
            e.c = entry.value("c", 0.0);
            kc.params[name] = e;
        }
        file.ship_types[type] = std::move(kc);
    }
    return file;
}

/// Builds the per-loading wind model for a ship type from a loaded
/// coefficient file. Validates C_AA(0) > 0 for both conditions.
inline WindModel build_wind_model(const WindCoefficientFile& file, const std::string& ship_type,
                                  double l_oa, double b, double laden_draft_threshold) {
    auto it = file.ship_types.find(ship_type);
    if (it == file.ship_types.end()) {
        std::string known;
        for (const auto& [k, v] : file.ship_types) known += (known.empty() ? "" : ", ") + k;
        throw UnknownNameError("build_wind_model: unknown ship type \"" + ship_type + "\"; file has: " + known);
    }
    const FujiwaraParams laden = estimate_fujiwara_params(l_oa, b, it->second, "laden");
    const FujiwaraParams ballast = estimate_fujiwara_params(l_oa, b, it->second, "ballast");
    WindModel model;
    model.laden = WindCoefficientTable::from_fujiwara(laden, file.fujiwara);
    model.ballast = WindCoefficientTable::from_fujiwara(ballast, file.fujiwara);
    model.a_xv_laden = laden.transverse_area;
    model.a_xv_ballast = ballast.transverse_area;
    model.laden_draft_threshold = laden_draft_threshold;
    return model;
}

} // namespace shipperf

#endif
