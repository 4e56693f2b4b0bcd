#include "fppe/stationary.hpp"

#include <cmath>
#include <random>

#include "fppe/functionals.hpp"

namespace fppe {

namespace {

// gradient of J in coefficients: r_i = lambda_i^s a_i - int |u|^{p-2} u e_i
Eigen::VectorXd energy_gradient(const Eigen::VectorXd& a, const NodalBasis& nb) {
    const Eigen::VectorXd u = nb.E * a;
    Eigen::VectorXd g(u.size());
    for (int q = 0; q < u.size(); ++q)
        g[q] = nb.w[q] * std::pow(std::abs(u[q]), nb.p - 2.0) * u[q];
    return nb.lambda_s.cwiseProduct(a) - nb.E.transpose() * g;
}

double dual_norm(const Eigen::VectorXd& r, const NodalBasis& nb) {
    return std::sqrt(r.cwiseProduct(r).cwiseQuotient(nb.lambda_s).sum());
}

}  // namespace

SpectralField nehari_project(const SpectralField& field, const NodalBasis& nb) {
    if (field.coeffs.size() == 0 || field.coeffs.cwiseAbs().maxCoeff() == 0.0)
        throw std::invalid_argument("cannot Nehari-project the zero field");
    const double S = seminorm_sq(field, nb);
    const double P = std::pow(lp_norm(field, nb, nb.p), nb.p);
    const double lambda = std::pow(S / P, 1.0 / (nb.p - 2.0));
    return SpectralField(lambda * field.coeffs);
}

SpectralField nehari_project(const SpectralField& field, const DomainSpec& domain,
                             const QuadratureRule& rule) {
    return nehari_project(field, make_nodal_basis(domain, rule));
}

double stationary_residual(const SpectralField& field, const NodalBasis& nb) {
    return dual_norm(energy_gradient(field.coeffs, nb), nb);
}

double stationary_residual(const SpectralField& field, const DomainSpec& domain,
                           const QuadratureRule& rule) {
    return stationary_residual(field, make_nodal_basis(domain, rule));
}

GroundState ground_state(const DomainSpec& domain, const QuadratureRule& rule,
                         const GroundStateConfig& cfg) {
    const NodalBasis nb = make_nodal_basis(domain, rule);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    GroundState best;
    for (int start = 0; start < cfg.starts; ++start) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(domain.n_modes);
        a[0] = 1.0;
        if (start > 0)
            for (int i = 0; i < domain.n_modes; ++i)
                a[i] += cfg.perturbation * gauss(rng) / std::sqrt(nb.lambda_s[i]);

        SpectralField f = nehari_project(SpectralField(a), nb);
        double J = energy_J(f, nb);
        double residual = dual_norm(energy_gradient(f.coeffs, nb), nb);
        double step = 1.0;
        int iters = 0;
        bool converged = residual < cfg.residual_tol;

        while (!converged && iters < cfg.max_iters) {
            ++iters;
            // seminorm-preconditioned gradient step, then re-project onto
            // the manifold so every iterate stays feasible
            const Eigen::VectorXd descent =
                energy_gradient(f.coeffs, nb).cwiseQuotient(nb.lambda_s);
            bool improved = false;
            SpectralField trial;
            double trial_J = J;
            for (int halvings = 0; halvings < 60; ++halvings) {
                Eigen::VectorXd c = f.coeffs - step * descent;
                if (c.cwiseAbs().maxCoeff() == 0.0) {
                    step *= 0.5;
                    continue;
                }
                trial = nehari_project(SpectralField(std::move(c)), nb);
                trial_J = energy_J(trial, nb);
                if (trial_J < J) {
                    improved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!improved) break;  // line search stalled at the minimizer
            const double decrease = J - trial_J;
            f = std::move(trial);
            J = trial_J;
            step = std::min(step * 1.2, 4.0);
            residual = dual_norm(energy_gradient(f.coeffs, nb), nb);
            if (residual < cfg.residual_tol && decrease < cfg.j_change_tol) converged = true;
        }
        residual = dual_norm(energy_gradient(f.coeffs, nb), nb);
        converged = residual < cfg.residual_tol;

        if (best.winning_start < 0 || J < best.J_value) {
            best.field = std::move(f);
            best.J_value = J;
            best.residual = residual;
            best.iterations = iters;
            best.converged = converged;
            best.winning_start = start;
        }
    }
    // (2.1) is odd-symmetric; pin the representative with a_1 >= 0.
    if (best.field.coeffs.size() > 0 && best.field.coeffs[0] < 0.0)
        best.field.coeffs = -best.field.coeffs;
    return best;
}

}  // namespace fppe
