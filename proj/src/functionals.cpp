#include "fppe/functionals.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "fppe/stationary.hpp"

namespace fppe {

double seminorm_sq(const SpectralField& field, const DomainSpec& domain) {
    double acc = 0.0;
    for (int i = 0; i < field.size(); ++i)
        acc += field.coeffs[i] * field.coeffs[i] * std::pow(domain.eigenvalue(i + 1), domain.s);
    return acc;
}

double seminorm_sq(const SpectralField& field, const NodalBasis& nb) {
    return field.coeffs.cwiseProduct(field.coeffs).dot(nb.lambda_s);
}

double singular_mass(const SpectralField& field, const WeightMatrix& W) {
    return field.coeffs.dot(W.entries * field.coeffs);
}

double lp_norm(const SpectralField& field, const NodalBasis& nb, double r) {
    const Eigen::VectorXd u = nb.E * field.coeffs;
    double acc = 0.0;
    for (int q = 0; q < u.size(); ++q) acc += nb.w[q] * std::pow(std::abs(u[q]), r);
    return std::pow(acc, 1.0 / r);
}

double lp_norm(const SpectralField& field, const DomainSpec& domain, const QuadratureRule& rule,
               double r) {
    return lp_norm(field, make_nodal_basis(domain, rule), r);
}

double lp_norm(const SpectralField& field, const DomainSpec& domain, const QuadratureRule& rule) {
    return lp_norm(field, domain, rule, domain.p);
}

double energy_J(const SpectralField& field, const NodalBasis& nb) {
    return 0.5 * seminorm_sq(field, nb) - std::pow(lp_norm(field, nb, nb.p), nb.p) / nb.p;
}

double energy_J(const SpectralField& field, const DomainSpec& domain, const QuadratureRule& rule) {
    return energy_J(field, make_nodal_basis(domain, rule));
}

double nehari_I(const SpectralField& field, const NodalBasis& nb) {
    return seminorm_sq(field, nb) - std::pow(lp_norm(field, nb, nb.p), nb.p);
}

double nehari_I(const SpectralField& field, const DomainSpec& domain, const QuadratureRule& rule) {
    return nehari_I(field, make_nodal_basis(domain, rule));
}

FunctionalSnapshot take_snapshot(double t, const SpectralField& field, const NodalBasis& nb,
                                 const WeightMatrix& W) {
    FunctionalSnapshot snap;
    snap.t = t;
    snap.seminorm_sq = seminorm_sq(field, nb);
    snap.singular_mass = singular_mass(field, W);
    snap.lp_norm = lp_norm(field, nb, nb.p);
    snap.l2_norm = field.coeffs.norm();  // Parseval in the orthonormal basis
    const double lpp = std::pow(snap.lp_norm, nb.p);
    snap.J = 0.5 * snap.seminorm_sq - lpp / nb.p;
    snap.I = snap.seminorm_sq - lpp;
    snap.S = 0.5 * (snap.singular_mass + snap.seminorm_sq);
    snap.L = snap.J + 2.0 * snap.S;
    return snap;
}

double hardy_constant(const DomainSpec& domain, const WeightMatrix& W) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(domain.n_modes, domain.n_modes);
    for (int i = 0; i < domain.n_modes; ++i)
        D(i, i) = std::pow(domain.eigenvalue(i + 1), domain.s);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(W.entries, D,
                                                                     Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw ConvergenceError("generalized eigensolver failed on the Hardy problem");
    return solver.eigenvalues().maxCoeff();
}

namespace {

// One gradient-ascent pass for the homogeneous ratio ||u||_r / ||u||_{H_0^s},
// constrained to the unit seminorm sphere in the lambda^s metric.
double ascend_ratio(Eigen::VectorXd a, const NodalBasis& nb, double r,
                    const AscentOptions& opts) {
    const auto normalize = [&](Eigen::VectorXd& v) {
        v /= std::sqrt(v.cwiseProduct(v).dot(nb.lambda_s));
    };
    normalize(a);
    SpectralField f(a);
    double ratio = lp_norm(f, nb, r);
    double step = opts.step_init;
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        const Eigen::VectorXd u = nb.E * f.coeffs;
        Eigen::VectorXd g(u.size());
        for (int q = 0; q < u.size(); ++q)
            g[q] = nb.w[q] * std::pow(std::abs(u[q]), r - 2.0) * u[q];
        // gradient of ||u||_r, preconditioned by the sphere metric
        Eigen::VectorXd grad = (nb.E.transpose() * g) * std::pow(ratio, 1.0 - r);
        Eigen::VectorXd tangent =
            grad.cwiseQuotient(nb.lambda_s) - f.coeffs.dot(grad) * f.coeffs;

        bool improved = false;
        Eigen::VectorXd trial;
        double trial_ratio = ratio;
        for (int halvings = 0; halvings < 60; ++halvings) {
            trial = f.coeffs + step * tangent;
            if (trial.cwiseAbs().maxCoeff() == 0.0) {
                step *= 0.5;
                continue;
            }
            normalize(trial);
            trial_ratio = lp_norm(SpectralField(trial), nb, r);
            if (trial_ratio > ratio) {
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) return ratio;  // line search exhausted: at a maximizer
        const double gain = (trial_ratio - ratio) / ratio;
        f.coeffs = trial;
        ratio = trial_ratio;
        step = std::min(step * 1.2, 4.0);
        if (gain < opts.ratio_tol) return ratio;
    }
    std::ostringstream msg;
    msg << "ratio ascent did not converge within " << opts.max_iters << " iterations";
    throw ConvergenceError(msg.str());
}

}  // namespace

double embedding_constant(const DomainSpec& domain, const QuadratureRule& rule, double r,
                          const AscentOptions& opts) {
    if (!(r >= 2.0 && r <= domain.critical_p()))
        throw std::invalid_argument("embedding exponent r must lie in [2, 2/(1-2s)]");
    const NodalBasis nb = make_nodal_basis(domain, rule);
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    double best = 0.0;
    for (int start = 0; start < opts.starts; ++start) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(domain.n_modes);
        if (start == 0) {
            a[0] = 1.0;
        } else {
            for (int i = 0; i < domain.n_modes; ++i)
                a[i] = gauss(rng) / std::sqrt(nb.lambda_s[i]);
        }
        const double ratio = ascend_ratio(std::move(a), nb, r, opts);
        if (ratio > best) best = ratio;  // ties keep the lowest start index
    }
    return best;
}

double embedding_constant(const DomainSpec& domain, const QuadratureRule& rule) {
    return embedding_constant(domain, rule, domain.p, AscentOptions{});
}

WellConstants compute_well_constants(const DomainSpec& domain, const QuadratureRule& rule,
                                     const WeightMatrix& W, const WellOptions& opts) {
    WellConstants wc;
    wc.n_modes = domain.n_modes;
    wc.cross_check_tol = opts.cross_check_tol;

    wc.hardy_C_star = hardy_constant(domain, W);
    wc.method_hardy = "generalized-eigenproblem";

    AscentOptions ascent = opts.ascent;
    ascent.seed = opts.seed;
    wc.embedding_C = embedding_constant(domain, rule, domain.p, ascent);
    wc.ascent_ratio_tol = ascent.ratio_tol;
    {
        std::ostringstream m;
        m << "ratio-ascent(" << ascent.starts << " starts)";
        wc.method_embedding = m.str();
    }

    GroundStateConfig gs_cfg;
    gs_cfg.seed = opts.seed;
    const GroundState gs = ground_state(domain, rule, gs_cfg);
    if (!gs.converged)
        throw ConvergenceError("ground-state solver failed; cannot establish the well depth");
    wc.depth_d = gs.J_value;
    wc.ground_state_residual_tol = gs_cfg.residual_tol;
    wc.method_depth = "nehari-ground-state";

    const double p = domain.p;
    wc.depth_d_from_C = (p - 2.0) / (2.0 * p) * std::pow(wc.embedding_C, 2.0 * p / (2.0 - p));
    wc.embedding_C_from_d =
        std::pow(2.0 * p * wc.depth_d / (p - 2.0), (2.0 - p) / (2.0 * p));
    wc.alpha1 = std::pow(wc.embedding_C, 2.0 / (2.0 - p));

    wc.cross_check_rel_err = std::abs(wc.depth_d - wc.depth_d_from_C) / wc.depth_d;
    if (wc.cross_check_rel_err > opts.cross_check_tol) {
        std::ostringstream msg;
        msg << "well-depth routes disagree: ground state gives " << wc.depth_d
            << ", embedding constant gives " << wc.depth_d_from_C << " (relative error "
            << wc.cross_check_rel_err << " > " << opts.cross_check_tol << ")";
        throw CrossCheckError(msg.str());
    }
    return wc;
}

double well_depth(const DomainSpec& domain, const QuadratureRule& rule, const WeightMatrix& W,
                  const WellOptions& opts) {
    return compute_well_constants(domain, rule, W, opts).depth_d;
}

}  // namespace fppe
