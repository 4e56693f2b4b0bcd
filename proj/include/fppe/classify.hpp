#pragma once

/*
 * Regime logic and closed-form constants for the low-energy theory:
 * decay constants (delta, both kappa forms), the auxiliary constants
 * eta and alpha_2, the concavity exponent K, blow-up time bounds, and
 * the decay / blow-up rate envelopes.
 */

#include <optional>

#include "fppe/functionals.hpp"

namespace fppe {

enum class Regime { GlobalDecay, BlowUp, Indeterminate };

const char* to_string(Regime r);

struct DecayConstants {
    double delta = 0.0;
    double kappa_statement = 0.0;  // 4 p delta / (2 delta + p - 2)
    double kappa_proof = 0.0;      // 2 p delta / (delta + p - 2)
};

/// delta = (2/(1+C*)) [1 - (J0/d)^{(p-2)/2}]; J0 <= 0 collapses the
/// bracket to 1.  Throws std::invalid_argument when J0 >= d.
DecayConstants decay_constants(double J0, double d, double C_star, double p);

struct EtaAlpha2 {
    double eta = 0.0;
    double alpha2 = 0.0;
};

/// eta = (p/2 - p alpha1^{-p} J0)^{1/(p-2)}; alpha2 is the root of
/// V(alpha) = J0 beyond alpha1 with V(alpha) = alpha^2/(2C^2) - alpha^p/p,
/// found by bisection to 1e-13 in alpha.  Requires 0 <= J0 < d.
EtaAlpha2 eta_alpha2(double J0, const WellConstants& constants, double p);

/// 2 S(0) / (K (K-2) scriptJ0); requires scriptJ0 > 0 and K > 2.
double blowup_time_upper(double two_S0, double K, double script_J0);

/// (2 S(0))^{(2-p)/2} / (C^p (p-2)); requires 2 S(0) > 0.
double blowup_time_lower(double two_S0, double C, double p);

struct ClassificationReport {
    double J0 = 0.0;
    double I0 = 0.0;
    double d = 0.0;
    double two_S0 = 0.0;
    Regime regime = Regime::Indeterminate;

    // decay side (filled whenever J0 < d)
    std::optional<double> delta;
    std::optional<double> kappa_statement;
    std::optional<double> kappa_proof;
    std::optional<double> decay_2S_rate;          // 2S(t) <= 2S(0) e^{-rate t}
    std::optional<double> decay_J_rate_proof;     // kappa_proof / ((3p-2)/(p-2) + (2p/(p-2)) C*)
    std::optional<double> decay_J_rate_statement; // ((3p-2)/(p-2) + C*) kappa_statement

    // blow-up side (filled on the BlowUp regime)
    std::optional<double> eta;        // absent on the J0 < 0 branch
    std::optional<double> alpha2;     // absent on the J0 < 0 branch
    std::optional<double> K;
    std::optional<double> script_J0;
    std::optional<double> T_upper;
    std::optional<double> T_lower;
    std::optional<double> upper_rate_coeff;     // 2S(t) <= coeff (T-t)^{exponent}
    std::optional<double> upper_rate_exponent;  // -2/(K-2)
    std::optional<double> lower_rate_coeff;     // 2S(t) >= coeff (T-t)^{exponent}
    std::optional<double> lower_rate_exponent;  // 2/(2-p)
};

/// Decides the regime from the signs of J(u0) - d and I(u0) and fills
/// every constant whose defining hypothesis holds.  |J0| below 1e-12 d
/// is snapped to zero before selecting the K / scriptJ branch (the two
/// branches are discontinuous exactly at J0 = 0).
ClassificationReport classify(const SpectralField& u0, const WellConstants& constants,
                              const DomainSpec& domain, const QuadratureRule& rule,
                              const WeightMatrix& W);

/// Evaluates both envelopes at time t for blow-up time T; returns
/// (lower_value, upper_value).  No pointwise ordering is implied.
std::pair<double, double> rate_envelopes(double t, double T, const ClassificationReport& report);

}  // namespace fppe
