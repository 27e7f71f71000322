// Branch-and-bound for mixed-integer QPs with convex relaxations. Exposes the
// running objective lower bound j⁻ and terminates the moment j⁻ exceeds an
// acceptability threshold, certifying that no binary assignment can do better.
#pragma once

#include "manav/qp.hpp"

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace manav {

struct MIQProblem {
    Eigen::MatrixXd H;  // symmetric PSD
    Eigen::VectorXd f;
    double f0 = 0.0;
    Eigen::MatrixXd A_eq;  // A_eq z = b_eq (zero rows allowed)
    Eigen::VectorXd b_eq;
    Eigen::MatrixXd A_in;  // A_in z ≤ b_in
    Eigen::VectorXd b_in;
    std::vector<int> binaries;  // indices constrained to {0,1}

    int num_vars() const { return static_cast<int>(f.size()); }
};

struct BnBNode {
    std::map<int, int> fixings;  // binary index → fixed value
    double parent_bound = -std::numeric_limits<double>::infinity();
};

enum class MIQPStatus { Optimal, InfeasibleCertified, BoundExceeded, IterationLimit };

struct SolveOutcome {
    MIQPStatus status = MIQPStatus::IterationLimit;
    Eigen::VectorXd incumbent;  // empty when no feasible point was found
    double j_plus = std::numeric_limits<double>::infinity();
    double j_minus = -std::numeric_limits<double>::infinity();
    int iterations = 0;  // QP relaxations solved
};

struct MIQPOptions {
    double integrality_tol = 1e-6;
    double abs_gap = 1e-6;
    double rel_gap = 1e-4;
    int iteration_limit = 200000;
    // Optional rounding heuristic: maps the root relaxation solution to
    // candidate binary assignments, each solved once to seed the incumbent.
    std::function<std::vector<Eigen::VectorXd>(const Eigen::VectorXd&)> incumbent_heuristic;
    std::ostream* trace = nullptr;  // per-iteration line-delimited records
};

// Splits on the most fractional free binary (closest to 0.5, ties toward the
// lowest index). z_full is the node's relaxation solution in full coordinates;
// children inherit the fixings plus that binary at 0 and 1 and carry
// node_objective as their parent bound.
std::pair<BnBNode, BnBNode> branch(const MIQProblem& problem, const BnBNode& node,
                                   const Eigen::VectorXd& z_full, double node_objective,
                                   double integrality_tol = 1e-6);

// j⁻ = min(min over open nodes of parent_bound, j₊); j₊ when the set is empty.
double lower_bound(const std::vector<BnBNode>& open_nodes, double j_plus);

SolveOutcome solve(const MIQProblem& problem, double j_max, const MIQPOptions& options = {});

// Plain-text problem serialization for fixture capture and replay.
void write_problem(std::ostream& os, const MIQProblem& problem);
MIQProblem read_problem(std::istream& is);

}  // namespace manav
