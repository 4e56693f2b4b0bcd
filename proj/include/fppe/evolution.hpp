#pragma once

/*
 * Time integration of the Galerkin system
 *     (W + D) da/dt = -D a + F(a),   D = diag(lambda_i^s),
 *     F_i(a) = int |u|^{p-2} u e_i dx,
 * by adaptive IMEX stepping (implicit stiff linear part, explicit
 * nonlinearity), with the energy identity as the step-acceptance
 * monitor, a finite blow-up trigger on 2S(t), and least-squares
 * power-law extrapolation of the blow-up time.
 */

#include <optional>
#include <string>
#include <vector>

#include "fppe/functionals.hpp"

namespace fppe {

enum class Scheme { imex_euler, imex_cn };

struct EvolutionConfig {
    Scheme scheme = Scheme::imex_cn;
    double dt_init = 1e-3;
    double dt_min = 1e-12;
    double dt_max = 1e-1;
    // per-step tolerance on the energy-identity residual, relative to the
    // step's own energy scale; +inf disables adaptation (fixed-dt studies)
    double energy_drift_tol = 1e-7;
    double t_end = 5.0;
    double blowup_factor = 1e8;  // stop once 2S >= factor * max(2S(0), 1)
    int snapshot_stride = 1;

    void validate() const;
};

struct GalerkinOperators {
    NodalBasis nb;
    Eigen::MatrixXd W;
    Eigen::MatrixXd M;  // W + D
    bool include_nonlinearity = true;

    Eigen::VectorXd nonlinear_term(const Eigen::VectorXd& a) const;
};

GalerkinOperators make_operators(const DomainSpec& domain, const QuadratureRule& rule,
                                 const WeightMatrix& W);

/// One IMEX step of size dt (factorizes on every call; simulate() caches).
SpectralField step(const SpectralField& a, double dt, Scheme scheme,
                   const GalerkinOperators& ops);

enum class Outcome { ReachedTEnd, BlowUpDetected, StepFailure };

const char* to_string(Outcome o);

struct BlowupFit {
    double T_star = 0.0;
    double gamma = 0.0;     // fitted exponent of z = (2S)^{-gamma}
    double residual = 0.0;  // normalized least-squares residual
    bool reliable = false;
    int n_points = 0;
};

struct TrajectoryRecord {
    std::vector<FunctionalSnapshot> snapshots;
    std::vector<double> dissipation_at;  // cumulative dissipation at each snapshot
    std::vector<double> dt_at;           // step size that produced each snapshot (0 for t=0)
    std::vector<double> dt_history;      // accepted step sizes
    double cumulative_dissipation = 0.0;
    Outcome outcome = Outcome::ReachedTEnd;
    double t_stop = 0.0;
    std::optional<BlowupFit> blowup;
    std::string failure_reason;
};

TrajectoryRecord simulate(const SpectralField& u0, const EvolutionConfig& cfg,
                          const DomainSpec& domain, const QuadratureRule& rule,
                          const WeightMatrix& W);
TrajectoryRecord simulate(const SpectralField& u0, const EvolutionConfig& cfg,
                          const DomainSpec& domain, const QuadratureRule& rule);

/// max_t |cumulative_dissipation(t) + J(u(t)) - J(u0)|
double energy_residual(const TrajectoryRecord& record, double J0);

/// max over interior snapshots of |d(2S)/dt + 2I| / max(|2I|, 1),
/// with a three-point central difference on the snapshot times.
double dSdt_check(const TrajectoryRecord& record);

/// Least-squares power-law fit of the trajectory tail: z(t) = (2S)^{-gamma}
/// is fit linearly with gamma free in (0, 2]; T* is the root of the line.
/// A non-monotone or too-short tail, or a poor fit, yields an unreliable
/// result carrying the raw stopping time instead of throwing.
BlowupFit estimate_blowup_time(const TrajectoryRecord& record);

/// Core tail fitter on raw (t, 2S) samples (already thinned/monotone).
BlowupFit fit_blowup_tail(std::span<const double> t, std::span<const double> two_S,
                          double t_stop);

}  // namespace fppe
