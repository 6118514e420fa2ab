// SPDX-License-Identifier: MIT
#include "levy_multiscale/levy_measures.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "levy_multiscale/errors.hpp"
#include "levy_quadrature.hpp"

namespace levy_multiscale {

namespace {

constexpr double kPi = std::numbers::pi;

// int_a^b z^(-1-alpha) dz
double power_mass(double alpha, double a, double b) {
    return (std::pow(a, -alpha) - std::pow(b, -alpha)) / alpha;
}

// int_M^inf e^{iuz} z^(-beta) dz for |u| M >> 1, by repeated integration by parts:
// J(beta) = (i/u) e^{iuM} M^(-beta) - (i beta / u) J(beta + 1).
std::complex<double> oscillatory_tail(double u, double beta, double M) {
    constexpr int kDepth = 12;
    const std::complex<double> i_over_u(0.0, 1.0 / u);
    const std::complex<double> phase = std::polar(1.0, u * M);
    std::complex<double> J = i_over_u * phase * std::pow(M, -(beta + kDepth));
    for (int k = kDepth - 1; k >= 0; --k) {
        const double b = beta + k;
        J = i_over_u * phase * std::pow(M, -b) - i_over_u * b * J;
    }
    return J;
}

}  // namespace

LevyMeasureModel LevyMeasureModel::symmetric(double alpha, double intensity) {
    LevyMeasureModel m{LevyFamily::SymmetricStable, alpha, intensity, false};
    m.validate();
    return m;
}

LevyMeasureModel LevyMeasureModel::one_sided(double alpha, double intensity) {
    LevyMeasureModel m{LevyFamily::OneSidedStable, alpha, intensity, false};
    m.validate();
    return m;
}

LevyMeasureModel LevyMeasureModel::subordinator(double alpha, double intensity) {
    LevyMeasureModel m{LevyFamily::OneSidedStable, alpha, intensity, true};
    m.validate();
    return m;
}

LevyMeasureModel LevyMeasureModel::null_driver() {
    return LevyMeasureModel{LevyFamily::SymmetricStable, 1.5, 0.0, false};
}

void LevyMeasureModel::validate() const {
    if (!(alpha > 0.0 && alpha < 2.0)) {
        throw UsageError(fmt::format("levy.alpha = {} is outside the range (0, 2)", alpha));
    }
    if (!(intensity >= 0.0) || !std::isfinite(intensity)) {
        throw UsageError(fmt::format("levy.intensity = {} must be a nonnegative number", intensity));
    }
    if (family == LevyFamily::OneSidedStable) {
        if (subordinator_mode && !(alpha < 1.0)) {
            throw UsageError(fmt::format(
                "subordinator mode requires levy.alpha in (0, 1), got {}", alpha));
        }
        if (!subordinator_mode && !(alpha > 1.0)) {
            throw UsageError(fmt::format(
                "one-sided driver requires levy.alpha in (1, 2) unless subordinator mode is set, got {}",
                alpha));
        }
    } else if (subordinator_mode) {
        throw UsageError("subordinator mode applies only to one-sided measures");
    }
}

std::string to_string(LevyFamily family) {
    return family == LevyFamily::SymmetricStable ? "symmetric" : "one_sided";
}

LevyFamily parse_levy_family(const std::string& text) {
    if (text == "symmetric" || text == "SymmetricStable") return LevyFamily::SymmetricStable;
    if (text == "one_sided" || text == "OneSidedStable") return LevyFamily::OneSidedStable;
    throw UsageError(fmt::format("unknown Levy family '{}' (expected symmetric or one_sided)", text));
}

std::string to_string(A2Reason reason) {
    switch (reason) {
        case A2Reason::P_GT_1: return "P_GT_1";
        case A2Reason::SUPPORT_COVERS: return "SUPPORT_COVERS";
        case A2Reason::NONE: return "NONE";
    }
    return "NONE";
}

double density_eval(const LevyMeasureModel& model, double z) {
    if (z == 0.0) throw std::domain_error("the Levy measure has no mass at the origin");
    if (!model.in_support(z)) return 0.0;
    return model.intensity * std::pow(std::abs(z), -1.0 - model.alpha);
}

double small_jump_variance(const LevyMeasureModel& model, double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) {
        throw UsageError(fmt::format("small_jump_variance needs delta in (0, 1], got {}", delta));
    }
    return model.sides() * model.intensity * std::pow(delta, 2.0 - model.alpha) /
           (2.0 - model.alpha);
}

double tail_moment(const LevyMeasureModel& model, double q) {
    if (!(q > 0.0)) throw UsageError(fmt::format("tail_moment needs q > 0, got {}", q));
    if (model.is_null()) return 0.0;
    if (q >= model.alpha) return kInfinite;
    return model.sides() * model.intensity / (model.alpha - q);
}

double compensator_drift(const LevyMeasureModel& model, double kappa) {
    if (model.two_sided() || model.is_null()) return 0.0;
    const double a = model.alpha;
    if (a == 1.0) return -model.intensity * std::log(kappa);
    return model.intensity * (1.0 - std::pow(kappa, 1.0 - a)) / (1.0 - a);
}

double tail_mass(const LevyMeasureModel& model, double r) {
    return model.sides() * model.intensity * std::pow(r, -model.alpha) / model.alpha;
}

StableParameters stable_parameters(const LevyMeasureModel& model) {
    const double a = model.alpha;
    const double c = model.intensity;
    if (model.is_null()) return {a, 0.0, 0.0, 0.0};
    if (model.two_sided()) {
        // 2c int_0^inf (1 - cos t) t^(-1-alpha) dt = 2c Gamma(1-alpha) cos(pi alpha/2) / alpha
        const double scale_pow =
            a == 1.0 ? c * kPi : 2.0 * c * std::tgamma(1.0 - a) * std::cos(kPi * a / 2.0) / a;
        return {a, std::pow(scale_pow, 1.0 / a), 0.0, 0.0};
    }
    // c int_0^inf (e^{iuz} - 1 - iuz 1_{z<=1}) z^(-1-alpha) dz
    //   = c Gamma(-alpha) (-iu)^alpha + iu c / (alpha - 1)
    const double scale_pow = c * std::tgamma(1.0 - a) * std::cos(kPi * a / 2.0) / a;
    return {a, std::pow(scale_pow, 1.0 / a), 1.0, c / (a - 1.0)};
}

std::complex<double> stable_exponent(const LevyMeasureModel& model, double u) {
    const StableParameters p = stable_parameters(model);
    if (p.scale == 0.0 || u == 0.0) return {0.0, 0.0};
    const double mag = std::pow(p.scale * std::abs(u), p.alpha);
    const double sgn = u > 0.0 ? 1.0 : -1.0;
    const double skew_term = p.skew == 0.0 ? 0.0 : p.skew * sgn * std::tan(kPi * p.alpha / 2.0);
    return {-mag, mag * skew_term + p.drift * u};
}

std::complex<double> levy_exponent(const LevyMeasureModel& model, double u, double rel_tolerance) {
    if (model.is_null() || u == 0.0) return {0.0, 0.0};
    const double a = model.alpha;
    const double au = std::abs(u);
    const double kappa = std::min(1e-3, 1e-2 / au);
    const double M = std::max(8.0, 200.0 / au);
    const double max_piece = 2.0 * kPi / au;

    // One side (z > 0) of the integral; the negative side conjugates the
    // imaginary part.
    // Cancellation-free forms: for small u z the naive differences lose all
    // digits and the adaptive rule would chase the noise.
    const auto inner_re = [&](double z) {
        const double h = std::sin(0.5 * u * z);
        return -2.0 * h * h;
    };
    const auto inner_im = [&](double z) {
        const double x = u * z;
        if (std::abs(x) < 1e-2) {
            const double x2 = x * x;
            return -x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0));
        }
        return std::sin(x) - x;
    };
    const auto outer_im = [&](double z) { return std::sin(u * z); };

    detail::QuadratureSum re = detail::integrate_power_weighted(inner_re, a, kappa, M, rel_tolerance, max_piece);
    detail::QuadratureSum im_in = detail::integrate_power_weighted(inner_im, a, kappa, 1.0, rel_tolerance, max_piece);
    detail::QuadratureSum im_out = detail::integrate_power_weighted(outer_im, a, 1.0, M, rel_tolerance, max_piece);

    // [0, kappa]: e^{iuz} - 1 - iuz = -u^2 z^2/2 - i u^3 z^3/6 + u^4 z^4/24 + O(z^5)
    const double taylor_re = -u * u * std::pow(kappa, 2.0 - a) / (2.0 * (2.0 - a)) +
                             std::pow(u, 4) * std::pow(kappa, 4.0 - a) / (24.0 * (4.0 - a));
    const double taylor_im = -std::pow(u, 3) * std::pow(kappa, 3.0 - a) / (6.0 * (3.0 - a));
    const double taylor_err = std::pow(au * kappa, 5) * std::pow(kappa, -a) / (120.0 * (5.0 - a));

    // [M, inf)
    const std::complex<double> J = oscillatory_tail(u, 1.0 + a, M);
    const double tail_re = J.real() - power_mass(a, M, std::numeric_limits<double>::infinity());
    const double tail_im = J.imag();

    const double one_side_re = re.value + taylor_re + tail_re;
    const double one_side_im = im_in.value + im_out.value + taylor_im + tail_im;
    const double error = re.error + im_in.error + im_out.error + taylor_err;
    const double scale = model.sides() * model.intensity;

    const std::complex<double> psi = model.two_sided()
                                         ? std::complex<double>(scale * one_side_re, 0.0)
                                         : std::complex<double>(scale * one_side_re, scale * one_side_im);
    const double achieved = scale * error;
    const double allowed = std::max(1e3 * rel_tolerance * std::abs(psi), 1e-9);
    if (!(achieved <= allowed) || !std::isfinite(psi.real())) {
        throw NumericalError(
            fmt::format("levy_exponent quadrature at u = {} reached error {:.3e} (allowed {:.3e})", u,
                        achieved, allowed),
            psi.real(), achieved);
    }
    return psi;
}

AssumptionReport check_assumptions(const LevyMeasureModel& model) {
    model.validate();
    AssumptionReport report;
    report.is_subordinator = !model.two_sided() && model.alpha < 1.0;
    if (model.is_null()) {
        report.q_witness = 1.0;
        report.a3_satisfied = true;
        return report;
    }

    report.p_witness = model.alpha;
    // small_jump_variance(delta) = C delta^(2-alpha) exactly; shave the constant
    // so the inequality survives rounding.
    report.C_witness = small_jump_variance(model, 1.0) * (1.0 - 1e-12);
    report.a1_satisfied = true;
    for (int k = 0; k <= 10; ++k) {
        const double delta = std::ldexp(1.0, -k);
        if (small_jump_variance(model, delta) <
            report.C_witness * std::pow(delta, 2.0 - report.p_witness)) {
            report.a1_satisfied = false;
        }
    }

    report.q_witness = model.alpha / 2.0;
    report.a3_satisfied = !is_infinite(tail_moment(model, report.q_witness));

    if (model.two_sided()) {
        report.a2_satisfied = true;
        report.a2_reason = A2Reason::SUPPORT_COVERS;
    } else if (report.p_witness > 1.0) {
        report.a2_satisfied = true;
        report.a2_reason = A2Reason::P_GT_1;
    }
    return report;
}

}  // namespace levy_multiscale
