#include "fppe/classify.hpp"

#include <cmath>
#include <sstream>

namespace fppe {

const char* to_string(Regime r) {
    switch (r) {
        case Regime::GlobalDecay: return "GlobalDecay";
        case Regime::BlowUp: return "BlowUp";
        default: return "Indeterminate";
    }
}

DecayConstants decay_constants(double J0, double d, double C_star, double p) {
    if (J0 >= d) throw std::invalid_argument("decay constants require J(u0) < d");
    DecayConstants dc;
    const double bracket = J0 <= 0.0 ? 1.0 : 1.0 - std::pow(J0 / d, (p - 2.0) / 2.0);
    dc.delta = 2.0 / (1.0 + C_star) * bracket;
    dc.kappa_statement = 4.0 * p * dc.delta / (2.0 * dc.delta + p - 2.0);
    dc.kappa_proof = 2.0 * p * dc.delta / (dc.delta + p - 2.0);
    return dc;
}

EtaAlpha2 eta_alpha2(double J0, const WellConstants& constants, double p) {
    if (!(J0 >= 0.0 && J0 < constants.depth_d))
        throw std::invalid_argument("eta/alpha2 require 0 <= J(u0) < d");
    const double C = constants.embedding_C;
    const double alpha1 = constants.alpha1;

    EtaAlpha2 out;
    out.eta = std::pow(p / 2.0 - p * std::pow(alpha1, -p) * J0, 1.0 / (p - 2.0));

    const auto V = [&](double alpha) {
        return alpha * alpha / (2.0 * C * C) - std::pow(alpha, p) / p;
    };
    // V decreases strictly beyond alpha1, so bisection is safe.
    double hi = alpha1 * std::max(10.0, 2.0 * out.eta);
    for (int i = 0; i < 2000 && V(hi) >= J0; ++i) hi *= 2.0;
    if (V(hi) >= J0)
        throw NumericalError("alpha2 bracket failure: well constants are inconsistent");
    double lo = alpha1;
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        (V(mid) > J0 ? lo : hi) = mid;
    }
    out.alpha2 = 0.5 * (lo + hi);
    return out;
}

double blowup_time_upper(double two_S0, double K, double script_J0) {
    if (!(script_J0 > 0.0)) throw std::invalid_argument("blow-up time bound requires scriptJ(0) > 0");
    if (!(K > 2.0)) throw std::invalid_argument("blow-up time bound requires K > 2");
    return two_S0 / (K * (K - 2.0) * script_J0);
}

double blowup_time_lower(double two_S0, double C, double p) {
    if (!(two_S0 > 0.0)) throw std::invalid_argument("blow-up time lower bound requires nonzero initial data");
    return std::pow(two_S0, (2.0 - p) / 2.0) / (std::pow(C, p) * (p - 2.0));
}

ClassificationReport classify(const SpectralField& u0, const WellConstants& constants,
                              const DomainSpec& domain, const QuadratureRule& rule,
                              const WeightMatrix& W) {
    const NodalBasis nb = make_nodal_basis(domain, rule);
    const double p = domain.p;
    const double d = constants.depth_d;

    ClassificationReport rep;
    rep.d = d;
    rep.J0 = energy_J(u0, nb);
    rep.I0 = nehari_I(u0, nb);
    rep.two_S0 = singular_mass(u0, W) + seminorm_sq(u0, nb);

    if (rep.J0 < d && rep.I0 > 0.0)
        rep.regime = Regime::GlobalDecay;
    else if (rep.J0 < d && rep.I0 < 0.0)
        rep.regime = Regime::BlowUp;
    else
        rep.regime = Regime::Indeterminate;

    // The K / scriptJ branch is discontinuous at J0 = 0 while the datum
    // varies continuously; snap roundoff-level energies to exactly zero.
    double J0_eff = rep.J0;
    if (std::abs(J0_eff) <= 1e-12 * d) J0_eff = 0.0;

    if (rep.J0 < d) {
        const DecayConstants dc = decay_constants(J0_eff, d, constants.hardy_C_star, p);
        rep.delta = dc.delta;
        rep.kappa_statement = dc.kappa_statement;
        rep.kappa_proof = dc.kappa_proof;
        rep.decay_2S_rate = dc.delta;
        const double theta_paper = (3.0 * p - 2.0) / (p - 2.0) + constants.hardy_C_star;
        const double theta_derived =
            (3.0 * p - 2.0) / (p - 2.0) + 2.0 * p / (p - 2.0) * constants.hardy_C_star;
        rep.decay_J_rate_proof = dc.kappa_proof / theta_derived;
        rep.decay_J_rate_statement = theta_paper * dc.kappa_statement;
    }

    if (rep.regime == Regime::BlowUp) {
        double K, sJ0;
        if (J0_eff < 0.0) {
            K = p;
            sJ0 = -J0_eff;
        } else {
            const EtaAlpha2 ea = eta_alpha2(J0_eff, constants, p);
            rep.eta = ea.eta;
            rep.alpha2 = ea.alpha2;
            K = (std::pow(ea.eta, p) - 1.0) * (p - 2.0) / std::pow(ea.eta, p) + 2.0;
            sJ0 = d - J0_eff;
        }
        rep.K = K;
        rep.script_J0 = sJ0;
        rep.T_upper = blowup_time_upper(rep.two_S0, K, sJ0);
        if (rep.two_S0 > 0.0)
            rep.T_lower = blowup_time_lower(rep.two_S0, constants.embedding_C, p);
        rep.upper_rate_coeff =
            std::pow(std::pow(rep.two_S0, K / 2.0) / (K * (K - 2.0) * sJ0), 2.0 / (K - 2.0));
        rep.upper_rate_exponent = -2.0 / (K - 2.0);
        rep.lower_rate_coeff = std::pow(constants.embedding_C, 2.0 * p / (2.0 - p)) *
                               std::pow(p - 2.0, 2.0 / (2.0 - p));
        rep.lower_rate_exponent = 2.0 / (2.0 - p);
    }
    return rep;
}

std::pair<double, double> rate_envelopes(double t, double T, const ClassificationReport& report) {
    if (!(t >= 0.0 && t < T)) throw std::invalid_argument("rate envelopes require 0 <= t < T");
    if (!report.upper_rate_coeff || !report.lower_rate_coeff)
        throw std::invalid_argument("rate envelopes are defined only for BlowUp reports");
    const double gap = T - t;
    const double lower = *report.lower_rate_coeff * std::pow(gap, *report.lower_rate_exponent);
    const double upper = *report.upper_rate_coeff * std::pow(gap, *report.upper_rate_exponent);
    return {lower, upper};
}

}  // namespace fppe
