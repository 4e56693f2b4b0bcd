#pragma once

/*
 * Scalar functionals and variational constants of the truncated system:
 * energy J, Nehari value I, singular mass, H_0^s seminorm, L^p norms,
 * the Hardy constant C*, the best embedding constant C, the potential
 * well depth d and alpha_1.  All constants are N-dependent truncation
 * values and are reported together with N and the tolerances used.
 */

#include <cstdint>
#include <string>

#include "fppe/domain.hpp"

namespace fppe {

/// Time-stamped functional values; the unit of trajectory output.
struct FunctionalSnapshot {
    double t = 0.0;
    double J = 0.0;             // energy
    double I = 0.0;             // Nehari value
    double S = 0.0;             // (singular_mass + seminorm_sq) / 2
    double L = 0.0;             // Lyapunov value J + 2S
    double l2_norm = 0.0;
    double lp_norm = 0.0;
    double seminorm_sq = 0.0;
    double singular_mass = 0.0;

    double two_S() const { return singular_mass + seminorm_sq; }
};

// ||phi||_{H_0^s}^2 = sum a_i^2 lambda_i^s
double seminorm_sq(const SpectralField& field, const DomainSpec& domain);
double seminorm_sq(const SpectralField& field, const NodalBasis& nb);

// a^T W a = int phi^2 |x|^{-2s} dx (quadrature)
double singular_mass(const SpectralField& field, const WeightMatrix& W);

// (int |u|^r dx)^{1/r} on synthesized nodal values; r defaults to domain.p
double lp_norm(const SpectralField& field, const DomainSpec& domain, const QuadratureRule& rule);
double lp_norm(const SpectralField& field, const DomainSpec& domain, const QuadratureRule& rule,
               double r);
double lp_norm(const SpectralField& field, const NodalBasis& nb, double r);

// J = seminorm_sq/2 - lp_norm^p / p
double energy_J(const SpectralField& field, const DomainSpec& domain, const QuadratureRule& rule);
double energy_J(const SpectralField& field, const NodalBasis& nb);

// I = seminorm_sq - lp_norm^p
double nehari_I(const SpectralField& field, const DomainSpec& domain, const QuadratureRule& rule);
double nehari_I(const SpectralField& field, const NodalBasis& nb);

FunctionalSnapshot take_snapshot(double t, const SpectralField& field, const NodalBasis& nb,
                                 const WeightMatrix& W);

/// Smallest constant with a^T W a <= C* sum a_i^2 lambda_i^s over the
/// truncated space: largest eigenvalue of W v = mu diag(lambda^s) v.
double hardy_constant(const DomainSpec& domain, const WeightMatrix& W);

struct AscentOptions {
    int starts = 20;
    int max_iters = 20000;
    double ratio_tol = 1e-10;   // stop when the relative ratio gain drops below this
    double step_init = 0.5;
    std::uint64_t seed = 42;
};

/// sup ||phi||_r / ||(-Delta)^{s/2} phi||_2 over the truncated space by
/// multi-start gradient ascent on the unit seminorm sphere.
double embedding_constant(const DomainSpec& domain, const QuadratureRule& rule, double r,
                          const AscentOptions& opts = {});
double embedding_constant(const DomainSpec& domain, const QuadratureRule& rule);

struct WellOptions {
    std::uint64_t seed = 42;
    double cross_check_tol = 0.02;  // relative disagreement allowed between routes
    AscentOptions ascent{};
};

/// Variational constants with provenance; both routes to d and C retained.
struct WellConstants {
    double hardy_C_star = 0.0;
    double embedding_C = 0.0;       // direct ratio maximization
    double embedding_C_from_d = 0.0;  // inverted from depth_d
    double depth_d = 0.0;           // primary: J at the Nehari ground state
    double depth_d_from_C = 0.0;    // (p-2)/(2p) C^{2p/(2-p)}
    double alpha1 = 0.0;            // embedding_C^{2/(2-p)}
    int n_modes = 0;
    double cross_check_rel_err = 0.0;
    double cross_check_tol = 0.02;
    double ascent_ratio_tol = 0.0;
    double ground_state_residual_tol = 0.0;
    std::string method_hardy;
    std::string method_embedding;
    std::string method_depth;
};

/// Computes C*, C, d (both routes), alpha_1; throws CrossCheckError when
/// the two depth routes disagree beyond tolerance.
WellConstants compute_well_constants(const DomainSpec& domain, const QuadratureRule& rule,
                                     const WeightMatrix& W, const WellOptions& opts = {});

/// Primary well depth (ground-state route), cross-checked against the
/// embedding-constant route.
double well_depth(const DomainSpec& domain, const QuadratureRule& rule, const WeightMatrix& W,
                  const WellOptions& opts = {});

}  // namespace fppe
