#include "manav/qp.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace manav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kConvergeTol = 1e-11;   // relative KKT target
constexpr double kAcceptTol = 1e-7;      // absolute residual contract
constexpr double kPhase1Tol = 1e-6;      // min constraint violation proving infeasibility

void validate(const QProblem& qp) {
    const int n = qp.num_vars();
    if (qp.H.rows() != n || qp.H.cols() != n) {
        throw std::invalid_argument("solve_qp: H dimension mismatch");
    }
    if (qp.G.rows() != qp.h.size() || (qp.G.rows() > 0 && qp.G.cols() != n)) {
        throw std::invalid_argument("solve_qp: equality dimension mismatch");
    }
    if (qp.C.rows() != qp.d.size() || (qp.C.rows() > 0 && qp.C.cols() != n)) {
        throw std::invalid_argument("solve_qp: inequality dimension mismatch");
    }
    for (int k = 0; k < qp.H.outerSize(); ++k) {
        for (SpMat::InnerIterator it(qp.H, k); it; ++it) {
            if (it.row() == it.col() && it.value() < -1e-12) {
                throw std::invalid_argument("solve_qp: H has a negative diagonal (not PSD)");
            }
            if (std::abs(it.value() - qp.H.coeff(it.col(), it.row())) > 1e-9) {
                throw std::invalid_argument("solve_qp: H is not symmetric");
            }
        }
    }
}

double objective_of(const QProblem& qp, const Eigen::VectorXd& z) {
    return 0.5 * z.dot(qp.H * z) + qp.f.dot(z) + qp.f0;
}

// Regularized augmented KKT factorization with iterative refinement against
// the unregularized system. LU with threshold pivoting: the augmented matrix
// is indefinite with zero Hessian diagonals and barrier entries spanning many
// orders of magnitude, which breaks unpivoted Cholesky-style factorizations.
struct KKTSolver {
    const QProblem& qp;
    int n, me, mi;
    Eigen::SparseLU<SpMat> lu;
    bool analyzed = false;
    double reg = 1e-9;
    Eigen::VectorXd w;  // barrier diagonal s/λ (empty when mi = 0)

    explicit KKTSolver(const QProblem& p)
        : qp(p),
          n(p.num_vars()),
          me(static_cast<int>(p.G.rows())),
          mi(static_cast<int>(p.C.rows())) {}

    bool factor(const Eigen::VectorXd& barrier_diag) {
        w = barrier_diag;
        for (int attempt = 0; attempt < 4; ++attempt) {
            std::vector<Eigen::Triplet<double>> trip;
            trip.reserve(qp.H.nonZeros() + 2 * qp.G.nonZeros() + 2 * qp.C.nonZeros() + n + me +
                         mi);
            for (int k = 0; k < qp.H.outerSize(); ++k) {
                for (SpMat::InnerIterator it(qp.H, k); it; ++it) {
                    trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                                      it.value());
                }
            }
            for (int i = 0; i < n; ++i) {
                trip.emplace_back(i, i, reg);
            }
            for (int k = 0; k < qp.G.outerSize(); ++k) {
                for (SpMat::InnerIterator it(qp.G, k); it; ++it) {
                    trip.emplace_back(n + static_cast<int>(it.row()), static_cast<int>(it.col()),
                                      it.value());
                    trip.emplace_back(static_cast<int>(it.col()), n + static_cast<int>(it.row()),
                                      it.value());
                }
            }
            for (int i = 0; i < me; ++i) {
                trip.emplace_back(n + i, n + i, -reg);
            }
            for (int k = 0; k < qp.C.outerSize(); ++k) {
                for (SpMat::InnerIterator it(qp.C, k); it; ++it) {
                    trip.emplace_back(n + me + static_cast<int>(it.row()),
                                      static_cast<int>(it.col()), it.value());
                    trip.emplace_back(static_cast<int>(it.col()),
                                      n + me + static_cast<int>(it.row()), it.value());
                }
            }
            for (int i = 0; i < mi; ++i) {
                trip.emplace_back(n + me + i, n + me + i, -(w(i) + reg));
            }
            SpMat K(n + me + mi, n + me + mi);
            K.setFromTriplets(trip.begin(), trip.end());
            if (!analyzed) {
                lu.analyzePattern(K);
                analyzed = true;
            }
            lu.factorize(K);
            if (lu.info() == Eigen::Success) {
                return true;
            }
            reg *= 1000.0;  // retry with heavier static regularization
        }
        return false;
    }

    // Applies the exact (unregularized) augmented matrix.
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
        Eigen::VectorXd out(n + me + mi);
        const auto xz = x.head(n);
        const auto xy = x.segment(n, me);
        const auto xl = x.tail(mi);
        out.head(n) = qp.H * xz + qp.G.transpose() * xy + qp.C.transpose() * xl;
        out.segment(n, me) = qp.G * xz;
        out.tail(mi) = qp.C * xz - w.cwiseProduct(xl);
        return out;
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
        Eigen::VectorXd x = lu.solve(rhs);
        for (int r = 0; r < 2; ++r) {
            const Eigen::VectorXd res = rhs - apply(x);
            if (res.lpNorm<Eigen::Infinity>() < 1e-13 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) {
                break;
            }
            x += lu.solve(res);
        }
        return x;
    }
};

struct IPMResult {
    bool converged = false;
    Eigen::VectorXd z;
    double objective = kInf;
    int iterations = 0;
    double kkt_abs = kInf;  // max absolute KKT residual (incl. μ)
};

// Largest α ∈ (0, 1] with v + α dv ≥ (1 − τ) v.
double step_length(const Eigen::VectorXd& v, const Eigen::VectorXd& dv, double tau) {
    double alpha = 1.0;
    for (int i = 0; i < v.size(); ++i) {
        if (dv(i) < 0.0) {
            alpha = std::min(alpha, -tau * v(i) / dv(i));
        }
    }
    return alpha;
}

// stall_window > 0 aborts early after that many iterations without measurable
// progress; pass 0 to always run to max_iter. start_scale inflates the initial
// point so a retry explores a different trajectory.
IPMResult run_ipm(const QProblem& qp, int max_iter, int stall_window,
                  double start_scale = 1.0) {
    const int n = qp.num_vars();
    const int me = static_cast<int>(qp.G.rows());
    const int mi = static_cast<int>(qp.C.rows());

    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(me);
    Eigen::VectorXd lam = Eigen::VectorXd::Constant(mi, start_scale);
    Eigen::VectorXd s = (qp.d - qp.C * z).cwiseMax(start_scale);

    const double f_scale = 1.0 + qp.f.lpNorm<Eigen::Infinity>();
    const double h_scale = 1.0 + (me > 0 ? qp.h.lpNorm<Eigen::Infinity>() : 0.0);
    const double d_scale = 1.0 + qp.d.lpNorm<Eigen::Infinity>();

    KKTSolver kkt(qp);
    IPMResult best;
    double best_measure = kInf;
    int last_gain = 0;

    for (int iter = 0; iter <= max_iter; ++iter) {
        const Eigen::VectorXd hz = qp.H * z;
        const Eigen::VectorXd r_d =
            hz + qp.f + qp.G.transpose() * y + qp.C.transpose() * lam;
        const Eigen::VectorXd r_p = qp.G * z - qp.h;
        const Eigen::VectorXd r_i = qp.C * z + s - qp.d;
        const double mu = mi > 0 ? s.dot(lam) / mi : 0.0;
        const double obj = 0.5 * z.dot(hz) + qp.f.dot(z);

        const double rd_abs = r_d.lpNorm<Eigen::Infinity>();
        const double rp_abs = me > 0 ? r_p.lpNorm<Eigen::Infinity>() : 0.0;
        const double ri_abs = r_i.lpNorm<Eigen::Infinity>();
        const double rel = std::max({rd_abs / (f_scale + hz.lpNorm<Eigen::Infinity>()),
                                     rp_abs / h_scale, ri_abs / d_scale,
                                     mu / (1.0 + std::abs(obj))});
        const double abs_res = std::max({rd_abs, rp_abs, ri_abs, mu});

        if (rel < (1.0 - 1e-4) * best_measure) {
            last_gain = iter;  // μ may grow transiently while re-centering; any
                               // measurable drop in the worst residual counts
        }
        if (rel < best_measure) {
            best_measure = rel;
            best.z = z;
            best.objective = obj + qp.f0;
            best.kkt_abs = abs_res;
            best.iterations = iter;
        }
        if (rel <= kConvergeTol) {
            best.converged = true;
            return best;
        }
        if (iter == max_iter || (stall_window > 0 && iter - last_gain >= stall_window)) {
            break;
        }

        if (!kkt.factor(s.cwiseQuotient(lam))) {
            break;  // factorization failed even with heavy regularization
        }

        Eigen::VectorXd rhs(n + me + mi);
        rhs.head(n) = -r_d;
        rhs.segment(n, me) = -r_p;
        rhs.tail(mi) = -r_i + s;  // affine: Λ⁻¹(ΛSe) = s
        const Eigen::VectorXd aff = kkt.solve(rhs);
        const Eigen::VectorXd dlam_aff = aff.tail(mi);
        const Eigen::VectorXd ds_aff = -s - kkt.w.cwiseProduct(dlam_aff);

        const double a_aff =
            std::min(step_length(s, ds_aff, 1.0), step_length(lam, dlam_aff, 1.0));
        const double mu_aff =
            mi > 0 ? (s + a_aff * ds_aff).dot(lam + a_aff * dlam_aff) / mi : 0.0;
        const double sigma = mu > 0.0 ? std::pow(mu_aff / mu, 3) : 0.0;

        // Corrector residual Λ⁻¹(ΛSe − σμe + Δs∘Δλ)
        Eigen::VectorXd corr = s - Eigen::VectorXd::Constant(mi, sigma * mu).cwiseQuotient(lam) +
                               ds_aff.cwiseProduct(dlam_aff).cwiseQuotient(lam);
        rhs.tail(mi) = -r_i + corr;
        const Eigen::VectorXd dir = kkt.solve(rhs);
        Eigen::VectorXd dz = dir.head(n);
        Eigen::VectorXd dy = dir.segment(n, me);
        Eigen::VectorXd dlam = dir.tail(mi);
        Eigen::VectorXd ds = -corr - kkt.w.cwiseProduct(dlam);

        // One joint step: the KKT residuals are linear in (z, y, λ, s), so a
        // shared α contracts every residual by exactly (1 − α); unequal
        // primal/dual steps let H·Δz leak into the dual residual and diverge
        // on strongly weighted Hessians.
        const double tau = std::max(0.995, 1.0 - mu);
        double alpha =
            std::min({1.0, step_length(s, ds, tau), step_length(lam, dlam, tau)});

        // Centrality correctors: complementarity products far outside the
        // central band block the step (degenerate antiparallel rows cycle
        // forever otherwise); pull outliers toward the band with extra
        // back-solves and keep the enlarged direction only if it lengthens
        // the step.
        for (int round = 0; round < 2 && alpha < 0.99 && sigma * mu > 1e-300; ++round) {
            const double a_try = std::min(1.0, alpha + 0.1);
            const Eigen::VectorXd prod = (s + a_try * ds).cwiseProduct(lam + a_try * dlam);
            const Eigen::VectorXd target =
                prod.cwiseMax(0.1 * sigma * mu).cwiseMin(10.0 * sigma * mu);
            if ((target - prod).lpNorm<Eigen::Infinity>() < 1e-12 * (1.0 + mu)) {
                break;
            }
            rhs.head(n + me).setZero();
            rhs.tail(mi) = -(target - prod).cwiseQuotient(lam);
            const Eigen::VectorXd ext = kkt.solve(rhs);
            const Eigen::VectorXd ndlam = dlam + ext.tail(mi);
            const Eigen::VectorXd nds =
                ds + (target - prod).cwiseQuotient(lam) - kkt.w.cwiseProduct(ext.tail(mi));
            const double a_new =
                std::min({1.0, step_length(s, nds, tau), step_length(lam, ndlam, tau)});
            if (a_new < alpha + 0.01) {
                break;
            }
            dz += ext.head(n);
            dy += ext.segment(n, me);
            dlam = ndlam;
            ds = nds;
            alpha = a_new;
        }
        z += alpha * dz;
        s += alpha * ds;
        y += alpha * dy;
        lam += alpha * dlam;
        s = s.cwiseMax(1e-300);
        lam = lam.cwiseMax(1e-300);
    }
    return best;
}

// Equality-only QP: one KKT solve; inconsistent equalities surface as a large
// primal residual.
QPResult solve_equality_qp(const QProblem& qp) {
    const int n = qp.num_vars();
    const int me = static_cast<int>(qp.G.rows());
    KKTSolver kkt(qp);
    if (!kkt.factor(Eigen::VectorXd::Zero(0))) {
        throw std::runtime_error("solve_qp: KKT factorization failed");
    }
    Eigen::VectorXd rhs(n + me);
    rhs.head(n) = -qp.f;
    rhs.segment(n, me) = qp.h;
    const Eigen::VectorXd x = kkt.solve(rhs);
    QPResult out;
    out.z = x.head(n);
    out.iterations = 1;
    const Eigen::VectorXd r_d = qp.H * out.z + qp.f + qp.G.transpose() * x.segment(n, me);
    const double rp = me > 0 ? (qp.G * out.z - qp.h).lpNorm<Eigen::Infinity>() : 0.0;
    out.kkt_residual = std::max(r_d.lpNorm<Eigen::Infinity>(), rp);
    const double h_scale = 1.0 + (me > 0 ? qp.h.lpNorm<Eigen::Infinity>() : 0.0);
    if (rp > 1e-7 * h_scale) {
        return out;  // inconsistent equalities: feasible stays false, objective +∞
    }
    out.feasible = true;
    out.converged = true;
    out.objective = objective_of(qp, out.z);
    return out;
}

// Phase-1: min t over (z, t) s.t. Cz ≤ d + 1t, |Gz − h| ≤ 1t, t ≥ −1.
// The optimum is the smallest uniform violation; positive means infeasible.
double phase1_violation(const QProblem& qp) {
    const int n = qp.num_vars();
    const int me = static_cast<int>(qp.G.rows());
    const int mi = static_cast<int>(qp.C.rows());
    QProblem p1;
    std::vector<Eigen::Triplet<double>> ht;
    for (int i = 0; i <= n; ++i) {
        ht.emplace_back(i, i, 1e-10);  // keeps the minimizing z bounded
    }
    p1.H.resize(n + 1, n + 1);
    p1.H.setFromTriplets(ht.begin(), ht.end());
    p1.f = Eigen::VectorXd::Zero(n + 1);
    p1.f(n) = 1.0;
    p1.G.resize(0, n + 1);
    p1.h.resize(0);

    std::vector<Eigen::Triplet<double>> ct;
    const int rows = mi + 2 * me + 1;
    p1.d.resize(rows);
    for (int k = 0; k < qp.C.outerSize(); ++k) {
        for (SpMat::InnerIterator it(qp.C, k); it; ++it) {
            ct.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        }
    }
    for (int i = 0; i < mi; ++i) {
        ct.emplace_back(i, n, -1.0);
        p1.d(i) = qp.d(i);
    }
    for (int k = 0; k < qp.G.outerSize(); ++k) {
        for (SpMat::InnerIterator it(qp.G, k); it; ++it) {
            ct.emplace_back(mi + static_cast<int>(it.row()), static_cast<int>(it.col()),
                            it.value());
            ct.emplace_back(mi + me + static_cast<int>(it.row()), static_cast<int>(it.col()),
                            -it.value());
        }
    }
    for (int i = 0; i < me; ++i) {
        ct.emplace_back(mi + i, n, -1.0);
        ct.emplace_back(mi + me + i, n, -1.0);
        p1.d(mi + i) = qp.h(i);
        p1.d(mi + me + i) = -qp.h(i);
    }
    ct.emplace_back(rows - 1, n, -1.0);
    p1.d(rows - 1) = 1.0;
    p1.C.resize(rows, n + 1);
    p1.C.setFromTriplets(ct.begin(), ct.end());

    const IPMResult r = run_ipm(p1, 100, 20);
    return r.z(n);
}

}  // namespace

QPResult solve_qp(const QProblem& qp) {
    validate(qp);
    const int n = qp.num_vars();

    if (n == 0) {
        // Fully eliminated problem: only constant constraints remain.
        QPResult out;
        out.z.resize(0);
        out.converged = true;
        out.kkt_residual = 0.0;
        const bool eq_ok = qp.h.size() == 0 || qp.h.lpNorm<Eigen::Infinity>() <= 1e-9;
        const bool in_ok = qp.d.size() == 0 || qp.d.minCoeff() >= -1e-9;
        if (eq_ok && in_ok) {
            out.feasible = true;
            out.objective = qp.f0;
        }
        return out;
    }

    if (qp.C.rows() == 0) {
        return solve_equality_qp(qp);
    }

    IPMResult r = run_ipm(qp, 60, 20);
    if (!r.converged && r.kkt_abs > kAcceptTol) {
        // Certify before giving up: strictly positive minimal violation proves
        // there is no feasible point.
        const double t = phase1_violation(qp);
        if (t > kPhase1Tol) {
            QPResult out;
            out.iterations = r.iterations;
            out.kkt_residual = r.kkt_abs;
            return out;  // feasible=false, objective=+∞
        }
        // Full-effort retry: early exit disabled, initial point pushed deeper
        // into the interior so the trajectory differs from the first attempt.
        const IPMResult retry = run_ipm(qp, 200, 0, 100.0);
        if (retry.converged || retry.kkt_abs < r.kkt_abs) {
            r = retry;
        }
    }

    QPResult out;
    out.z = r.z;
    out.iterations = r.iterations;
    out.kkt_residual = r.kkt_abs;
    out.converged = r.converged;
    if (r.converged || r.kkt_abs <= kAcceptTol) {
        out.feasible = true;
        out.objective = r.objective;
    } else {
        throw std::runtime_error("solve_qp: interior-point iteration failed to converge");
    }
    return out;
}

}  // namespace manav
