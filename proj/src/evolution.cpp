#include "fppe/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fppe {

void EvolutionConfig::validate() const {
    if (!(dt_min > 0.0 && dt_min <= dt_init && dt_init <= dt_max))
        throw ConfigError("time steps must satisfy 0 < dt_min <= dt_init <= dt_max");
    if (!(blowup_factor > 1.0)) throw ConfigError("blowup_factor must exceed 1");
    if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");
    if (snapshot_stride < 1) throw ConfigError("snapshot_stride must be >= 1");
    if (!(energy_drift_tol > 0.0)) throw ConfigError("energy_drift_tol must be positive");
}

const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::ReachedTEnd: return "ReachedTEnd";
        case Outcome::BlowUpDetected: return "BlowUpDetected";
        default: return "StepFailure";
    }
}

Eigen::VectorXd GalerkinOperators::nonlinear_term(const Eigen::VectorXd& a) const {
    if (!include_nonlinearity) return Eigen::VectorXd::Zero(a.size());
    const Eigen::VectorXd u = nb.E * a;
    Eigen::VectorXd g(u.size());
    for (int q = 0; q < u.size(); ++q)
        g[q] = nb.w[q] * std::pow(std::abs(u[q]), nb.p - 2.0) * u[q];
    return nb.E.transpose() * g;
}

GalerkinOperators make_operators(const DomainSpec& domain, const QuadratureRule& rule,
                                 const WeightMatrix& W) {
    GalerkinOperators ops;
    ops.nb = make_nodal_basis(domain, rule);
    ops.W = W.entries;
    ops.M = W.entries;
    ops.M.diagonal() += ops.nb.lambda_s;
    return ops;
}

namespace {

// Factorization of (M + theta dt D); rebuilt only when dt changes.
class ImexSolver {
  public:
    ImexSolver(const GalerkinOperators& ops, Scheme scheme)
        : ops_(ops), theta_(scheme == Scheme::imex_euler ? 1.0 : 0.5), scheme_(scheme) {}

    void refactor(double dt) {
        if (dt == dt_factored_) return;
        Eigen::MatrixXd A = ops_.M;
        A.diagonal() += theta_ * dt * ops_.nb.lambda_s;
        llt_.compute(A);
        if (llt_.info() != Eigen::Success)
            throw NumericalError("IMEX system factorization broke down");
        dt_factored_ = dt;
    }

    // imex_euler: (M + dt D) a+ = M a + dt F(a)
    // imex_cn: trapezoid on -D a, F at an explicitly predicted half step
    Eigen::VectorXd advance(const Eigen::VectorXd& a, double dt) {
        refactor(dt);
        const Eigen::VectorXd Da = ops_.nb.lambda_s.cwiseProduct(a);
        if (scheme_ == Scheme::imex_euler)
            return llt_.solve(ops_.M * a + dt * ops_.nonlinear_term(a));
        const Eigen::VectorXd mid =
            llt_.solve(ops_.M * a + 0.5 * dt * ops_.nonlinear_term(a));
        return llt_.solve(ops_.M * a - 0.5 * dt * Da + dt * ops_.nonlinear_term(mid));
    }

  private:
    const GalerkinOperators& ops_;
    double theta_;
    Scheme scheme_;
    double dt_factored_ = -1.0;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

double quadratic_form(const Eigen::MatrixXd& M, const Eigen::VectorXd& v) {
    return v.dot(M * v);
}

}  // namespace

SpectralField step(const SpectralField& a, double dt, Scheme scheme,
                   const GalerkinOperators& ops) {
    if (!(dt > 0.0)) throw std::invalid_argument("step size must be positive");
    ImexSolver solver(ops, scheme);
    Eigen::VectorXd out = solver.advance(a.coeffs, dt);
    if (!out.allFinite()) throw NumericalError("non-finite coefficients after step");
    return SpectralField(std::move(out));
}

TrajectoryRecord simulate(const SpectralField& u0, const EvolutionConfig& cfg,
                          const DomainSpec& domain, const QuadratureRule& rule,
                          const WeightMatrix& W) {
    cfg.validate();
    const GalerkinOperators ops = make_operators(domain, rule, W);
    const WeightMatrix Wm{ops.W};
    ImexSolver solver(ops, cfg.scheme);

    TrajectoryRecord rec;
    Eigen::VectorXd a = u0.coeffs;
    double t = 0.0;
    double dt = cfg.dt_init;
    double cum = 0.0;

    FunctionalSnapshot snap = take_snapshot(t, SpectralField(a), ops.nb, Wm);
    const double two_S0 = snap.two_S();
    const double trigger = cfg.blowup_factor * std::max(two_S0, 1.0);
    rec.snapshots.push_back(snap);
    rec.dissipation_at.push_back(0.0);
    rec.dt_at.push_back(0.0);
    double J_prev = snap.J;
    double two_S_prev = two_S0;

    const auto fail = [&](const std::string& why) {
        rec.outcome = Outcome::StepFailure;
        rec.failure_reason = why;
        rec.t_stop = t;
        rec.cumulative_dissipation = cum;
        return rec;
    };

    int accepted_since_growth = 0;
    int since_snapshot = 0;
    long long accepted_total = 0;
    constexpr long long kStepBudget = 20'000'000;

    while (t < cfg.t_end - 1e-14 * cfg.t_end) {
        const double dt_eff = std::min(dt, cfg.t_end - t);

        Eigen::VectorXd anew;
        bool bad = false;
        std::string why;
        double J_new = 0.0, two_S_new = 0.0, inc = 0.0;
        FunctionalSnapshot snap_new;
        try {
            anew = solver.advance(a, dt_eff);
        } catch (const NumericalError& e) {
            bad = true;
            why = e.what();
        }
        if (!bad && !anew.allFinite()) {
            bad = true;
            why = "non-finite coefficients after step";
        }
        if (!bad) {
            snap_new = take_snapshot(t + dt_eff, SpectralField(anew), ops.nb, Wm);
            J_new = snap_new.J;
            two_S_new = snap_new.two_S();
            const Eigen::VectorXd v = (anew - a) / dt_eff;
            inc = dt_eff * quadratic_form(ops.M, v);
            if (!std::isfinite(J_new) || !std::isfinite(inc)) {
                bad = true;
                why = "non-finite functionals after step";
            } else {
                const double resid = std::abs(J_new - J_prev + inc);
                const double scale = std::max({1.0, std::abs(J_new), std::abs(J_prev), inc});
                if (resid > cfg.energy_drift_tol * scale) {
                    bad = true;
                    why = "energy-identity residual above tolerance";
                } else if (two_S_new > 2.0 * two_S_prev && two_S_prev >= 1.0) {
                    // near blow-up: cap growth of 2S at 2x per step
                    bad = true;
                    why = "2S grew more than 2x in one step";
                }
            }
        }

        if (bad) {
            if (dt_eff <= cfg.dt_min) return fail("dt_min underflow: " + why);
            dt = std::max(0.5 * dt_eff, cfg.dt_min);
            accepted_since_growth = 0;
            continue;
        }

        t += dt_eff;
        a.swap(anew);
        cum += inc;
        J_prev = J_new;
        two_S_prev = two_S_new;
        rec.dt_history.push_back(dt_eff);
        ++accepted_total;

        if (++since_snapshot >= cfg.snapshot_stride) {
            rec.snapshots.push_back(snap_new);
            rec.dissipation_at.push_back(cum);
            rec.dt_at.push_back(dt_eff);
            since_snapshot = 0;
        }

        if (two_S_new >= trigger) {
            if (since_snapshot != 0) {
                rec.snapshots.push_back(snap_new);
                rec.dissipation_at.push_back(cum);
                rec.dt_at.push_back(dt_eff);
            }
            rec.outcome = Outcome::BlowUpDetected;
            rec.t_stop = t;
            rec.cumulative_dissipation = cum;
            rec.blowup = estimate_blowup_time(rec);
            return rec;
        }

        if (++accepted_since_growth >= 10) {
            dt = std::min(dt * 1.2, cfg.dt_max);
            accepted_since_growth = 0;
        }
        if (accepted_total > kStepBudget) return fail("step budget exhausted");
    }

    if (since_snapshot != 0) {
        rec.snapshots.push_back(take_snapshot(t, SpectralField(a), ops.nb, Wm));
        rec.dissipation_at.push_back(cum);
        rec.dt_at.push_back(rec.dt_history.back());
    }
    rec.outcome = Outcome::ReachedTEnd;
    rec.t_stop = t;
    rec.cumulative_dissipation = cum;
    return rec;
}

TrajectoryRecord simulate(const SpectralField& u0, const EvolutionConfig& cfg,
                          const DomainSpec& domain, const QuadratureRule& rule) {
    return simulate(u0, cfg, domain, rule, build_weight_matrix(domain, rule));
}

double energy_residual(const TrajectoryRecord& record, double J0) {
    if (record.snapshots.empty()) throw std::invalid_argument("empty trajectory record");
    double worst = 0.0;
    for (size_t i = 0; i < record.snapshots.size(); ++i)
        worst = std::max(worst,
                         std::abs(record.dissipation_at[i] + record.snapshots[i].J - J0));
    return worst;
}

double dSdt_check(const TrajectoryRecord& record) {
    const auto& s = record.snapshots;
    if (s.size() < 3) throw std::invalid_argument("dS/dt check needs at least 3 snapshots");
    double worst = 0.0;
    for (size_t i = 1; i + 1 < s.size(); ++i) {
        const double hm = s[i].t - s[i - 1].t;
        const double hp = s[i + 1].t - s[i].t;
        // second-order three-point derivative on a nonuniform grid
        const double deriv = (hm * hm * s[i + 1].two_S() + (hp * hp - hm * hm) * s[i].two_S() -
                              hp * hp * s[i - 1].two_S()) /
                             (hm * hp * (hm + hp));
        const double twoI = 2.0 * s[i].I;
        worst = std::max(worst, std::abs(deriv + twoI) / std::max(std::abs(twoI), 1.0));
    }
    return worst;
}

namespace {

struct LineFit {
    double c0 = 0.0, c1 = 0.0, resid = 0.0;
};

// least squares z ~ c0 + c1 t; resid is normalized by the centered spread
LineFit fit_line(std::span<const double> t, const Eigen::VectorXd& z) {
    const int n = static_cast<int>(t.size());
    double st = 0.0, sz = 0.0, stt = 0.0, stz = 0.0;
    for (int i = 0; i < n; ++i) {
        st += t[i];
        sz += z[i];
        stt += t[i] * t[i];
        stz += t[i] * z[i];
    }
    LineFit f;
    const double det = n * stt - st * st;
    f.c1 = (n * stz - st * sz) / det;
    f.c0 = (sz - f.c1 * st) / n;
    double ss = 0.0, spread = 0.0;
    const double zbar = sz / n;
    for (int i = 0; i < n; ++i) {
        const double r = z[i] - (f.c0 + f.c1 * t[i]);
        ss += r * r;
        spread += (z[i] - zbar) * (z[i] - zbar);
    }
    f.resid = std::sqrt(ss / n) / std::max(std::sqrt(spread / n), 1e-300);
    return f;
}

}  // namespace

BlowupFit fit_blowup_tail(std::span<const double> t, std::span<const double> two_S,
                          double t_stop) {
    BlowupFit out;
    out.T_star = t_stop;
    out.n_points = static_cast<int>(t.size());
    if (t.size() < 8) return out;  // unreliable: tail too short

    const int n = static_cast<int>(t.size());
    Eigen::VectorXd z(n);
    const auto eval = [&](double gamma) {
        for (int i = 0; i < n; ++i) z[i] = std::pow(two_S[i], -gamma);
        return fit_line(t, z);
    };
    const auto resid_of = [&](double gamma) { return eval(gamma).resid; };

    // golden-section minimization of the fit residual over gamma in (0, 2]
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 1e-3, hi = 2.0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = resid_of(x1), f2 = resid_of(x2);
    for (int iter = 0; iter < 300 && hi - lo > 1e-13; ++iter) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = resid_of(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = resid_of(x2);
        }
    }
    const double gamma = 0.5 * (lo + hi);
    const LineFit fit = eval(gamma);
    out.gamma = gamma;
    out.residual = fit.resid;
    if (fit.c1 >= 0.0) return out;  // z must decrease toward its root
    const double T = -fit.c0 / fit.c1;
    if (!(T >= t_stop) || fit.resid > 0.05) return out;
    out.T_star = T;
    out.reliable = true;
    return out;
}

BlowupFit estimate_blowup_time(const TrajectoryRecord& record) {
    if (record.outcome != Outcome::BlowUpDetected)
        throw std::invalid_argument("blow-up time estimation requires a BlowUpDetected record");
    const auto& s = record.snapshots;

    // Walk back from the end keeping a log-thinned strictly monotone tail
    // (factor sqrt(2) between kept points, at most 32 of them).
    std::vector<double> ts, ss;
    double last = std::numeric_limits<double>::infinity();
    for (auto it = s.rbegin(); it != s.rend() && ss.size() < 32; ++it) {
        const double v = it->two_S();
        if (ss.empty() || v <= last / std::sqrt(2.0)) {
            ts.push_back(it->t);
            ss.push_back(v);
            last = v;
        }
    }
    std::reverse(ts.begin(), ts.end());
    std::reverse(ss.begin(), ss.end());
    return fit_blowup_tail(ts, ss, record.t_stop);
}

}  // namespace fppe
