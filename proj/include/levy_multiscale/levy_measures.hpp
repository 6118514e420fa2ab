// SPDX-License-Identifier: MIT
/**
 * @file levy_measures.hpp
 * @brief Parametric alpha-stable Levy measures and the integral functionals
 *        used to certify the standing assumptions on the fast driver.
 *
 * Two families are supported:
 *
 *   SymmetricStable:  nu(dz) = c |z|^(-1-alpha) dz   on R \ {0}
 *   OneSidedStable:   nu(dz) = c  z^(-1-alpha)  dz   on (0, inf)
 *
 * with c the intensity. One-sided measures with alpha <= 1 are subordinators;
 * they are accepted only when subordinator_mode is set.
 *
 * Compensation convention for the characteristic exponent:
 *
 *   psi(u) = int (e^{iuz} - 1 - iuz 1_{|z|<=1}) nu(dz)
 */
#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <string>

namespace levy_multiscale {

enum class LevyFamily { SymmetricStable, OneSidedStable };

struct LevyMeasureModel {
    LevyFamily family = LevyFamily::SymmetricStable;
    double alpha = 1.5;
    /// Multiplier on the density. Zero is the degenerate null driver (test mode).
    double intensity = 1.0;
    /// Permits one-sided alpha in (0,1); such drivers fail the support assumption.
    bool subordinator_mode = false;

    static LevyMeasureModel symmetric(double alpha, double intensity = 1.0);
    static LevyMeasureModel one_sided(double alpha, double intensity = 1.0);
    static LevyMeasureModel subordinator(double alpha, double intensity = 1.0);
    static LevyMeasureModel null_driver();

    /// Throws UsageError when the parameters are outside the admissible set.
    void validate() const;

    [[nodiscard]] bool two_sided() const noexcept { return family == LevyFamily::SymmetricStable; }
    [[nodiscard]] int sides() const noexcept { return two_sided() ? 2 : 1; }
    [[nodiscard]] bool is_null() const noexcept { return intensity == 0.0; }
    [[nodiscard]] bool in_support(double z) const noexcept { return two_sided() ? z != 0.0 : z > 0.0; }
};

[[nodiscard]] std::string to_string(LevyFamily family);
[[nodiscard]] LevyFamily parse_levy_family(const std::string& text);

/// Marker returned by tail_moment when the moment diverges.
inline constexpr double kInfinite = std::numeric_limits<double>::infinity();

[[nodiscard]] inline bool is_infinite(double value) noexcept { return value == kInfinite; }

/// d nu / dz at z != 0; zero outside the support. Throws std::domain_error at z = 0.
[[nodiscard]] double density_eval(const LevyMeasureModel& model, double z);

/// int_{|z| <= delta} z^2 nu(dz), 0 < delta <= 1, closed form.
[[nodiscard]] double small_jump_variance(const LevyMeasureModel& model, double delta);

/// int_{|z| > 1} |z|^q nu(dz); kInfinite when q >= alpha.
[[nodiscard]] double tail_moment(const LevyMeasureModel& model, double q);

/// int_{kappa <= |z| <= 1} z nu(dz) (zero for symmetric measures).
[[nodiscard]] double compensator_drift(const LevyMeasureModel& model, double kappa);

/// nu(|z| > r), r > 0.
[[nodiscard]] double tail_mass(const LevyMeasureModel& model, double r);

/**
 * Standard stable parameters S_alpha(scale, skew, drift) of Z(1):
 *
 *   log E e^{iuZ(1)} = -scale^alpha |u|^alpha (1 - i skew sgn(u) tan(pi alpha / 2)) + i drift u
 *
 * (alpha = 1 symmetric: the Cauchy law with log CF -scale |u|).
 */
struct StableParameters {
    double alpha;
    double scale;
    double skew;
    double drift;
};

[[nodiscard]] StableParameters stable_parameters(const LevyMeasureModel& model);

/// psi(u) from the closed-form stable parameters.
[[nodiscard]] std::complex<double> stable_exponent(const LevyMeasureModel& model, double u);

/// psi(u) by adaptive Gauss-Kronrod quadrature against nu, with a Taylor
/// expansion below |z| = kappa and an asymptotic oscillatory tail.
/// Throws NumericalError if the quadrature misses its tolerance.
[[nodiscard]] std::complex<double> levy_exponent(const LevyMeasureModel& model, double u,
                                                 double rel_tolerance = 1e-10);

enum class A2Reason { P_GT_1, SUPPORT_COVERS, NONE };

[[nodiscard]] std::string to_string(A2Reason reason);

struct AssumptionReport {
    double p_witness = 0.0;
    double C_witness = 0.0;
    double q_witness = 0.0;
    bool a1_satisfied = false;
    bool a3_satisfied = false;
    bool a2_satisfied = false;
    A2Reason a2_reason = A2Reason::NONE;
    bool is_subordinator = false;

    /// A1, A3 and A2 all hold.
    [[nodiscard]] bool all_satisfied() const noexcept {
        return a1_satisfied && a3_satisfied && a2_satisfied;
    }
    /// A1 and A3 hold (enough for ergodicity of the fast process).
    [[nodiscard]] bool ergodic() const noexcept { return a1_satisfied && a3_satisfied; }
};

[[nodiscard]] AssumptionReport check_assumptions(const LevyMeasureModel& model);

}  // namespace levy_multiscale
