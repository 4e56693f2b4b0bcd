#include "fppe/domain.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace fppe {

namespace {
constexpr double kPi = std::numbers::pi;
}

void QuadratureConfig::validate() const {
    if (n_panels < 1) throw ConfigError("quad.n_panels must be >= 1");
    if (nodes_per_panel < 1) throw ConfigError("quad.nodes_per_panel must be >= 1");
    if (!(grading_exponent >= 1.0)) throw ConfigError("quad.grading_exponent must be >= 1");
}

void DomainSpec::validate() const {
    if (!(length > 0.0)) throw ConfigError("domain length L must be positive");
    if (!(s > 0.0 && s < 0.5)) throw ConfigError("fractional order s must lie in (0, 1/2)");
    if (!(p > 2.0)) throw ConfigError("exponent p must exceed 2");
    if (!(p <= critical_p())) {
        std::ostringstream msg;
        msg << "p exceeds critical exponent 2/(1-2s) = " << critical_p();
        throw ConfigError(msg.str());
    }
    if (n_modes < 1) throw ConfigError("n_modes must be >= 1");
    quad.validate();
}

double DomainSpec::eigenvalue(int i) const {
    const double k = static_cast<double>(i) * kPi / length;
    return k * k;
}

double DomainSpec::eigenfunction(int i, double x) const {
    return std::sqrt(2.0 / length) * std::sin(static_cast<double>(i) * kPi * x / length);
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-based initial guess, then Newton on P_n.
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            dp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

namespace {

QuadratureRule build_rule(double length, int n_panels, double grading, int nodes_per_panel) {
    std::vector<double> gx, gw;
    gauss_legendre(nodes_per_panel, gx, gw);

    QuadratureRule rule;
    rule.nodes.reserve(static_cast<size_t>(n_panels) * nodes_per_panel);
    rule.weights.reserve(static_cast<size_t>(n_panels) * nodes_per_panel);
    for (int k = 0; k < n_panels; ++k) {
        const double a = std::pow(static_cast<double>(k) / n_panels, grading) * length;
        const double b = std::pow(static_cast<double>(k + 1) / n_panels, grading) * length;
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        for (int q = 0; q < nodes_per_panel; ++q) {
            rule.nodes.push_back(mid + half * gx[q]);
            rule.weights.push_back(half * gw[q]);
        }
    }
    return rule;
}

Eigen::MatrixXd assemble_weight(const DomainSpec& domain, const QuadratureRule& rule) {
    const Eigen::MatrixXd E = basis_matrix(domain, rule.nodes);
    Eigen::VectorXd wq(rule.size());
    for (int q = 0; q < rule.size(); ++q)
        wq[q] = rule.weights[q] * std::pow(rule.nodes[q], -2.0 * domain.s);
    return E.transpose() * wq.asDiagonal() * E;
}

}  // namespace

QuadratureRule build_quadrature(const DomainSpec& domain) {
    domain.validate();
    return build_rule(domain.length, domain.quad.n_panels, domain.quad.grading_exponent,
                      domain.quad.nodes_per_panel);
}

Eigenpair eigenpair(int i, const DomainSpec& domain) {
    if (i < 1 || i > domain.n_modes) throw std::out_of_range("mode index outside 1..n_modes");
    return Eigenpair{domain.eigenvalue(i),
                     [i, domain](double x) { return domain.eigenfunction(i, x); }};
}

Eigen::MatrixXd basis_matrix(const DomainSpec& domain, std::span<const double> xs) {
    const int nq = static_cast<int>(xs.size());
    Eigen::MatrixXd E(nq, domain.n_modes);
    const double amp = std::sqrt(2.0 / domain.length);
    for (int q = 0; q < nq; ++q) {
        const double base = kPi * xs[q] / domain.length;
        for (int i = 0; i < domain.n_modes; ++i)
            E(q, i) = amp * std::sin((i + 1) * base);
    }
    return E;
}

std::vector<double> synthesize(const SpectralField& field, std::span<const double> xs,
                               const DomainSpec& domain) {
    if (field.size() != domain.n_modes)
        throw std::invalid_argument("field length does not match n_modes");
    const Eigen::VectorXd u = basis_matrix(domain, xs) * field.coeffs;
    return {u.data(), u.data() + u.size()};
}

SpectralField analyze(std::span<const double> values, const QuadratureRule& rule,
                      const DomainSpec& domain) {
    if (static_cast<int>(values.size()) != rule.size())
        throw std::invalid_argument("values length does not match quadrature rule");
    Eigen::VectorXd wv(rule.size());
    for (int q = 0; q < rule.size(); ++q) wv[q] = rule.weights[q] * values[q];
    return SpectralField(basis_matrix(domain, rule.nodes).transpose() * wv);
}

SpectralField frac_laplacian(const SpectralField& field, const DomainSpec& domain) {
    return frac_laplacian(field, domain, domain.s);
}

SpectralField frac_laplacian(const SpectralField& field, const DomainSpec& domain, double s) {
    if (field.size() != domain.n_modes)
        throw std::invalid_argument("field length does not match n_modes");
    Eigen::VectorXd out(field.size());
    for (int i = 0; i < field.size(); ++i)
        out[i] = field.coeffs[i] * std::pow(domain.eigenvalue(i + 1), s);
    return SpectralField(std::move(out));
}

WeightMatrix build_weight_matrix(const DomainSpec& domain, const QuadratureRule& rule,
                                 double stability_tol) {
    domain.validate();
    Eigen::MatrixXd W = assemble_weight(domain, rule);

    // Stability check against the same rule with doubled panels and nodes.
    DomainSpec refined = domain;
    refined.quad.n_panels = 2 * domain.quad.n_panels;
    refined.quad.nodes_per_panel = 2 * domain.quad.nodes_per_panel;
    const Eigen::MatrixXd W2 = assemble_weight(refined, build_quadrature(refined));
    const double drift = (W - W2).cwiseAbs().maxCoeff();
    if (drift > stability_tol) {
        std::ostringstream msg;
        msg << "weight matrix unstable under quadrature refinement: entry drift " << drift
            << " exceeds tolerance " << stability_tol;
        throw QuadratureInstabilityError(msg.str());
    }

    // Symmetrize away roundoff and certify positive definiteness.
    W = 0.5 * (W + W.transpose()).eval();
    Eigen::LLT<Eigen::MatrixXd> llt(W);
    if (llt.info() != Eigen::Success)
        throw NumericalError("weight matrix is not numerically positive definite");
    return WeightMatrix{std::move(W)};
}

NodalBasis make_nodal_basis(const DomainSpec& domain, const QuadratureRule& rule) {
    NodalBasis nb;
    nb.E = basis_matrix(domain, rule.nodes);
    nb.w = Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), rule.size());
    nb.lambda_s.resize(domain.n_modes);
    for (int i = 0; i < domain.n_modes; ++i)
        nb.lambda_s[i] = std::pow(domain.eigenvalue(i + 1), domain.s);
    nb.p = domain.p;
    return nb;
}

}  // namespace fppe
