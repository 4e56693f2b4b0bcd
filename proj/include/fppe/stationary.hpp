#pragma once

/*
 * Stationary problem (-Delta)^s u = |u|^{p-2} u with Dirichlet data:
 * Nehari projection, dual-norm stationarity residual, and the ground
 * state obtained by projected preconditioned gradient descent of J
 * restricted to the Nehari manifold.
 */

#include <cstdint>

#include "fppe/domain.hpp"

namespace fppe {

struct GroundStateConfig {
    int starts = 8;           // e_1 plus random perturbations
    int max_iters = 100000;
    double residual_tol = 1e-8;   // dual norm of the stationarity defect
    double j_change_tol = 1e-12;  // J decrease per accepted step
    double perturbation = 0.3;
    std::uint64_t seed = 42;
};

struct GroundState {
    SpectralField field;
    double J_value = 0.0;
    double residual = 0.0;  // dual-norm of the stationary defect
    int iterations = 0;
    bool converged = false;
    int winning_start = -1;
};

/// Scales field onto the Nehari manifold: lambda = (S/||u||_p^p)^{1/(p-2)}.
/// Throws std::invalid_argument on the zero field.
SpectralField nehari_project(const SpectralField& field, const DomainSpec& domain,
                             const QuadratureRule& rule);
SpectralField nehari_project(const SpectralField& field, const NodalBasis& nb);

/// Dual norm of the stationary defect: with r_i = lambda_i^s a_i -
/// int |u|^{p-2} u e_i dx, returns (sum r_i^2 lambda_i^{-s})^{1/2}.
double stationary_residual(const SpectralField& field, const DomainSpec& domain,
                           const QuadratureRule& rule);
double stationary_residual(const SpectralField& field, const NodalBasis& nb);

/// Minimizes J over the Nehari manifold; every iterate is feasible, so
/// J values along the way are valid upper bounds for the well depth.
/// Non-convergence returns converged = false rather than throwing.
GroundState ground_state(const DomainSpec& domain, const QuadratureRule& rule,
                         const GroundStateConfig& cfg = {});

}  // namespace fppe
