// Convex QP solver: Mehrotra predictor-corrector interior-point method on the
// regularized augmented KKT system, factored sparsely. Infeasibility is
// certified lazily through a phase-1 program, so feasible problems pay for one
// solve only.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <limits>

namespace manav {

using SpMat = Eigen::SparseMatrix<double>;

// min ½ zᵀHz + fᵀz + f0   s.t.   G z = h,   C z ≤ d
struct QProblem {
    SpMat H;  // n×n symmetric PSD
    Eigen::VectorXd f;
    double f0 = 0.0;
    SpMat G;  // m_eq × n (zero rows allowed)
    Eigen::VectorXd h;
    SpMat C;  // m_in × n
    Eigen::VectorXd d;

    int num_vars() const { return static_cast<int>(f.size()); }
};

struct QPResult {
    bool feasible = false;
    bool converged = false;  // KKT residuals driven to working tolerance
    Eigen::VectorXd z;
    double objective = std::numeric_limits<double>::infinity();
    int iterations = 0;
    double kkt_residual = std::numeric_limits<double>::infinity();
};

// Solves the QP. Infeasible problems return feasible=false and objective=+∞.
QPResult solve_qp(const QProblem& qp);

}  // namespace manav
