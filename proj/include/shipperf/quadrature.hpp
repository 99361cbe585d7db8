#ifndef SHIPPERF_QUADRATURE_HPP
#define SHIPPERF_QUADRATURE_HPP

#include <cmath>
#include <string>
#include <vector>

#include "shipperf/errors.hpp"

namespace shipperf {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0; // absolute, accumulated over subintervals
    int evaluations = 0;
};

namespace detail {

template <class F>
void adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                      double whole, double tol, int depth, QuadratureResult& out) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    out.evaluations += 2;
    const double h = b - a;
    const double left = (h / 12.0) * (fa + 4.0 * flm + fm);
    const double right = (h / 12.0) * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        out.value += left + right + delta / 15.0;
        out.error_estimate += std::abs(delta) / 15.0;
        return;
    }
    adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out);
    adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out);
}

} // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to a relative tolerance.
///
/// The interval is first cut into `panels` seed panels (log-spaced when the
/// window is wide and positive, so a narrow peak anywhere in a decades-wide
/// window cannot slip between the initial sample points), then each panel is
/// refined adaptively. Throws IntegrationError with the achieved tolerance
/// when the refinement budget runs out.
template <class F>
QuadratureResult integrate_adaptive(const F& f, double a, double b, double rel_tol = 1e-6,
                                    double abs_floor = 1e-300, int max_depth = 40, int panels = 48) {
    if (!(b > a)) throw InvalidParameterError("integrate_adaptive: empty interval");
    if (!(rel_tol > 0.0)) throw InvalidParameterError("integrate_adaptive: rel_tol must be > 0");
    if (panels < 1) panels = 1;

    // Seed grid: log-spaced when the window spans more than a decade.
    std::vector<double> nodes(panels + 1);
    const bool log_spaced = a > 0.0 && b / a > 10.0;
    for (int k = 0; k <= panels; ++k) {
        const double t = static_cast<double>(k) / panels;
        nodes[k] = log_spaced ? a * std::pow(b / a, t) : a + (b - a) * t;
    }
    nodes.front() = a;
    nodes.back() = b;

    // Scale for the relative budget: sum of |panel Simpson estimates|.
    QuadratureResult out;
    std::vector<double> fl(panels), fm(panels), fr(panels), whole(panels);
    double scale = 0.0;
    for (int k = 0; k < panels; ++k) {
        fl[k] = k == 0 ? f(nodes[0]) : fr[k - 1];
        fm[k] = f(0.5 * (nodes[k] + nodes[k + 1]));
        fr[k] = f(nodes[k + 1]);
        out.evaluations += k == 0 ? 3 : 2;
        whole[k] = ((nodes[k + 1] - nodes[k]) / 6.0) * (fl[k] + 4.0 * fm[k] + fr[k]);
        scale += std::abs(whole[k]);
    }

    const double tol = std::max(rel_tol * scale, abs_floor);
    for (int k = 0; k < panels; ++k) {
        detail::adaptive_simpson(f, nodes[k], nodes[k + 1], fl[k], fm[k], fr[k], whole[k], tol / panels, max_depth,
                                 out);
    }

    const double achieved = std::abs(out.value) > 0.0 ? out.error_estimate / std::abs(out.value)
                                                      : out.error_estimate;
    if (out.error_estimate > std::max(rel_tol * std::abs(out.value), abs_floor) * 4.0) {
        throw IntegrationError("integrate_adaptive: tolerance " + std::to_string(rel_tol) +
                                   " not reached (achieved " + std::to_string(achieved) + ")",
                               achieved);
    }
    return out;
}

} // namespace shipperf

#endif
