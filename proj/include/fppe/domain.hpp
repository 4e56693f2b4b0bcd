#pragma once

/*
 * One-dimensional computational domain (0, L) with the Dirichlet-Laplacian
 * sine eigenbasis, in which the spectral fractional Laplacian acts
 * diagonally, plus graded composite Gauss-Legendre quadrature that resolves
 * the |x|^{-2s} boundary singularity and the assembled singular weight
 * matrix W_ij = int e_i e_j x^{-2s} dx.
 */

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fppe/errors.hpp"

namespace fppe {

/// Composite Gauss-Legendre rule: panel edges clustered toward x = 0 as
/// (k/n_panels)^grading_exponent * L.
struct QuadratureConfig {
    int n_panels = 64;
    double grading_exponent = 3.0;
    int nodes_per_panel = 16;

    void validate() const;
};

/// Fixes the discretization: interval (0, L), fractional order s,
/// nonlinearity exponent p, Galerkin truncation N, quadrature.
struct DomainSpec {
    double length = 1.0;  // L
    double s = 0.25;
    double p = 3.0;
    int n_modes = 64;
    QuadratureConfig quad{};

    // n = 1 specialization: p must lie in (2, 2/(1-2s)].
    double critical_p() const { return 2.0 / (1.0 - 2.0 * s); }

    // lambda_i = (i pi / L)^2, i = 1..N
    double eigenvalue(int i) const;
    // e_i(x) = sqrt(2/L) sin(i pi x / L); L^2-orthonormal
    double eigenfunction(int i, double x) const;

    void validate() const;
};

struct QuadratureRule {
    std::vector<double> nodes;    // strictly increasing, inside (0, L)
    std::vector<double> weights;  // positive, sum = L

    int size() const { return static_cast<int>(nodes.size()); }
};

/// Coefficients of u on the eigenbasis; the sole state representation.
struct SpectralField {
    Eigen::VectorXd coeffs;

    SpectralField() = default;
    explicit SpectralField(Eigen::VectorXd c) : coeffs(std::move(c)) {}
    static SpectralField zero(int n) { return SpectralField(Eigen::VectorXd::Zero(n)); }

    int size() const { return static_cast<int>(coeffs.size()); }
    bool finite() const { return coeffs.allFinite(); }
};

/// Dense symmetric positive-definite matrix of the singular quadratic form.
struct WeightMatrix {
    Eigen::MatrixXd entries;
};

/// Nodal evaluation cache shared by every quadrature-based functional:
/// E(q,i) = e_i(x_q), w = quadrature weights, lambda_s(i) = lambda_i^s.
struct NodalBasis {
    Eigen::MatrixXd E;
    Eigen::VectorXd w;
    Eigen::VectorXd lambda_s;
    double p = 3.0;
};

/// Gauss-Legendre nodes/weights on [-1, 1], Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

QuadratureRule build_quadrature(const DomainSpec& domain);

struct Eigenpair {
    double eigenvalue;
    std::function<double(double)> eigenfunction;
};

/// i is 1-based; throws std::out_of_range outside 1..N.
Eigenpair eigenpair(int i, const DomainSpec& domain);

/// Pointwise values sum_i a_i e_i(x_q).
std::vector<double> synthesize(const SpectralField& field, std::span<const double> xs,
                               const DomainSpec& domain);

/// Coefficients a_i = int phi e_i dx by quadrature of the nodal values.
SpectralField analyze(std::span<const double> values, const QuadratureRule& rule,
                      const DomainSpec& domain);

/// (-Delta)^s: multiply coefficient i by lambda_i^s.
SpectralField frac_laplacian(const SpectralField& field, const DomainSpec& domain);
SpectralField frac_laplacian(const SpectralField& field, const DomainSpec& domain, double s);

/// Assembles W and verifies entries are stable under doubling panels and
/// nodes; throws QuadratureInstabilityError past stability_tol.
WeightMatrix build_weight_matrix(const DomainSpec& domain, const QuadratureRule& rule,
                                 double stability_tol = 1e-8);

/// Rows = evaluation points, columns = modes.
Eigen::MatrixXd basis_matrix(const DomainSpec& domain, std::span<const double> xs);

NodalBasis make_nodal_basis(const DomainSpec& domain, const QuadratureRule& rule);

}  // namespace fppe
