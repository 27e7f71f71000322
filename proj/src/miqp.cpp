#include "manav/miqp.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <vector>

namespace manav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SparseCache {
    SpMat H, Aeq, Ain;
    Eigen::VectorXd f, b_eq, b_in;
    double f0 = 0.0;
    std::vector<int> binaries;  // sorted, unique
    int n = 0;
};

SparseCache make_cache(const MIQProblem& p) {
    const int n = p.num_vars();
    if (p.H.rows() != n || p.H.cols() != n) {
        throw std::invalid_argument("miqp: H dimension mismatch");
    }
    if (p.A_eq.rows() != p.b_eq.size() || (p.A_eq.rows() > 0 && p.A_eq.cols() != n)) {
        throw std::invalid_argument("miqp: equality dimension mismatch");
    }
    if (p.A_in.rows() != p.b_in.size() || (p.A_in.rows() > 0 && p.A_in.cols() != n)) {
        throw std::invalid_argument("miqp: inequality dimension mismatch");
    }
    SparseCache c;
    c.n = n;
    c.H = p.H.sparseView();
    c.Aeq = p.A_eq.sparseView();
    c.Ain = p.A_in.sparseView();
    c.f = p.f;
    c.b_eq = p.b_eq;
    c.b_in = p.b_in;
    c.f0 = p.f0;
    c.binaries = p.binaries;
    std::sort(c.binaries.begin(), c.binaries.end());
    c.binaries.erase(std::unique(c.binaries.begin(), c.binaries.end()), c.binaries.end());
    for (int b : c.binaries) {
        if (b < 0 || b >= n) {
            throw std::invalid_argument("miqp: binary index out of range");
        }
    }
    return c;
}

struct Reduced {
    QProblem qp;
    std::vector<int> red_of;   // original index → reduced index or −1
    std::vector<int> orig_of;  // reduced index → original index
    std::vector<int> free_binaries;
    bool contradiction = false;  // a fully fixed row is violated
};

// Eliminates fixed binaries: their columns fold into the linear/constant cost
// terms and the right-hand sides; rows left without free support either hold
// as constants or certify the node infeasible.
Reduced reduce(const SparseCache& c, const std::map<int, int>& fixings) {
    Reduced r;
    r.red_of.assign(c.n, -1);
    Eigen::VectorXd x_fix = Eigen::VectorXd::Zero(c.n);
    for (const auto& [idx, val] : fixings) {
        x_fix(idx) = static_cast<double>(val);
    }
    for (int i = 0; i < c.n; ++i) {
        if (fixings.count(i) == 0) {
            r.red_of[i] = static_cast<int>(r.orig_of.size());
            r.orig_of.push_back(i);
        }
    }
    const int nr = static_cast<int>(r.orig_of.size());
    for (int b : c.binaries) {
        if (r.red_of[b] >= 0) {
            r.free_binaries.push_back(b);
        }
    }

    const Eigen::VectorXd hx = c.H * x_fix;
    r.qp.f0 = c.f0 + c.f.dot(x_fix) + 0.5 * x_fix.dot(hx);
    r.qp.f.resize(nr);
    for (int k = 0; k < nr; ++k) {
        r.qp.f(k) = c.f(r.orig_of[k]) + hx(r.orig_of[k]);
    }

    std::vector<Eigen::Triplet<double>> ht;
    for (int k = 0; k < c.H.outerSize(); ++k) {
        if (r.red_of[k] < 0) {
            continue;
        }
        for (SpMat::InnerIterator it(c.H, k); it; ++it) {
            if (r.red_of[it.row()] >= 0) {
                ht.emplace_back(r.red_of[it.row()], r.red_of[k], it.value());
            }
        }
    }
    r.qp.H.resize(nr, nr);
    r.qp.H.setFromTriplets(ht.begin(), ht.end());

    // Constraint blocks: select free columns, then drop rows with no support.
    const auto shrink = [&](const SpMat& A, const Eigen::VectorXd& b, bool equality, SpMat& A_out,
                            Eigen::VectorXd& b_out) {
        const int m = static_cast<int>(A.rows());
        const Eigen::VectorXd b_adj = b - A * x_fix;
        std::vector<char> live(m, 0);
        for (int k = 0; k < A.outerSize(); ++k) {
            if (r.red_of[k] < 0) {
                continue;
            }
            for (SpMat::InnerIterator it(A, k); it; ++it) {
                live[it.row()] = 1;
            }
        }
        std::vector<int> row_map(m, -1);
        int mr = 0;
        for (int i = 0; i < m; ++i) {
            if (live[i]) {
                row_map[i] = mr++;
            } else if (equality ? std::abs(b_adj(i)) > 1e-9 : b_adj(i) < -1e-9) {
                r.contradiction = true;
            }
        }
        std::vector<Eigen::Triplet<double>> tt;
        for (int k = 0; k < A.outerSize(); ++k) {
            if (r.red_of[k] < 0) {
                continue;
            }
            for (SpMat::InnerIterator it(A, k); it; ++it) {
                tt.emplace_back(row_map[it.row()], r.red_of[k], it.value());
            }
        }
        A_out.resize(mr, nr);
        A_out.setFromTriplets(tt.begin(), tt.end());
        b_out.resize(mr);
        for (int i = 0; i < m; ++i) {
            if (row_map[i] >= 0) {
                b_out(row_map[i]) = b_adj(i);
            }
        }
    };
    shrink(c.Aeq, c.b_eq, true, r.qp.G, r.qp.h);
    if (r.contradiction) {
        return r;
    }

    SpMat C0;
    Eigen::VectorXd d0;
    shrink(c.Ain, c.b_in, false, C0, d0);
    if (r.contradiction) {
        return r;
    }

    // Relaxed binaries carry explicit [0, 1] box rows.
    const int extra = 2 * static_cast<int>(r.free_binaries.size());
    std::vector<Eigen::Triplet<double>> ct;
    for (int k = 0; k < C0.outerSize(); ++k) {
        for (SpMat::InnerIterator it(C0, k); it; ++it) {
            ct.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        }
    }
    r.qp.d.resize(C0.rows() + extra);
    r.qp.d.head(C0.rows()) = d0;
    int row = static_cast<int>(C0.rows());
    for (int b : r.free_binaries) {
        ct.emplace_back(row, r.red_of[b], 1.0);
        r.qp.d(row++) = 1.0;
        ct.emplace_back(row, r.red_of[b], -1.0);
        r.qp.d(row++) = 0.0;
    }
    r.qp.C.resize(row, nr);
    r.qp.C.setFromTriplets(ct.begin(), ct.end());
    return r;
}

Eigen::VectorXd compose(const Reduced& red, const Eigen::VectorXd& z_red,
                        const std::map<int, int>& fixings, int n) {
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) {
        z(i) = red.red_of[i] >= 0 ? z_red(red.red_of[i])
                                  : static_cast<double>(fixings.at(i));
    }
    return z;
}

}  // namespace

std::pair<BnBNode, BnBNode> branch(const MIQProblem& problem, const BnBNode& node,
                                   const Eigen::VectorXd& z_full, double node_objective,
                                   double integrality_tol) {
    std::vector<int> bins = problem.binaries;
    std::sort(bins.begin(), bins.end());
    int pick = -1;
    double best = kInf;
    for (int b : bins) {
        if (node.fixings.count(b) > 0) {
            continue;
        }
        const double v = z_full(b);
        if (std::abs(v - std::round(v)) <= integrality_tol) {
            continue;
        }
        const double dist_half = std::abs(v - std::floor(v) - 0.5);
        if (dist_half < best) {
            best = dist_half;
            pick = b;
        }
    }
    if (pick < 0) {
        throw std::invalid_argument("branch: relaxation solution is already integral");
    }
    BnBNode lo = node;
    lo.fixings[pick] = 0;
    lo.parent_bound = node_objective;
    BnBNode hi = node;
    hi.fixings[pick] = 1;
    hi.parent_bound = node_objective;
    return {lo, hi};
}

double lower_bound(const std::vector<BnBNode>& open_nodes, double j_plus) {
    double jm = j_plus;
    for (const BnBNode& n : open_nodes) {
        jm = std::min(jm, n.parent_bound);
    }
    return jm;
}

SolveOutcome solve(const MIQProblem& problem, double j_max, const MIQPOptions& options) {
    const SparseCache cache = make_cache(problem);

    struct HeapNode {
        double bound;
        std::uint64_t seq;
        BnBNode node;
    };
    struct Cmp {
        bool operator()(const HeapNode& a, const HeapNode& b) const {
            if (a.bound != b.bound) {
                return a.bound > b.bound;  // lowest bound first
            }
            return a.seq > b.seq;  // FIFO among ties
        }
    };
    std::priority_queue<HeapNode, std::vector<HeapNode>, Cmp> open;
    std::uint64_t seq = 0;
    open.push({-kInf, seq++, BnBNode{}});

    SolveOutcome out;
    out.j_plus = kInf;
    out.j_minus = -kInf;
    bool heuristic_pending = static_cast<bool>(options.incumbent_heuristic);

    const auto trace = [&](std::size_t open_size) {
        if (options.trace != nullptr) {
            nlohmann::json rec{{"iter", out.iterations},
                               {"j_minus", out.j_minus},
                               {"j_plus", out.j_plus},
                               {"open", open_size}};
            *options.trace << rec.dump() << '\n';
        }
    };

    const auto try_incumbent = [&](const Eigen::VectorXd& z_full, double j) {
        if (j < out.j_plus) {
            out.j_plus = j;
            out.incumbent = z_full;
            for (int b : cache.binaries) {
                out.incumbent(b) = std::round(out.incumbent(b));
            }
        }
    };

    while (!open.empty()) {
        out.j_minus = std::min(open.top().bound, out.j_plus);
        if (out.j_minus > j_max) {
            out.status = MIQPStatus::BoundExceeded;
            return out;
        }
        if (std::isfinite(out.j_plus)) {
            const double gap = out.j_plus - out.j_minus;
            if (gap <= options.abs_gap || gap <= options.rel_gap * std::abs(out.j_plus)) {
                out.status = MIQPStatus::Optimal;
                return out;
            }
        }
        if (out.iterations >= options.iteration_limit) {
            out.status = MIQPStatus::IterationLimit;
            return out;
        }

        const HeapNode hn = open.top();
        open.pop();
        if (hn.bound > out.j_plus) {
            continue;  // dominated by the incumbent
        }

        const Reduced red = reduce(cache, hn.node.fixings);
        if (red.contradiction) {
            continue;
        }
        const QPResult qr = solve_qp(red.qp);
        ++out.iterations;
        trace(open.size());
        if (!qr.feasible) {
            continue;
        }
        if (qr.objective > out.j_plus) {
            continue;  // prune: relaxation already worse than the incumbent
        }

        const Eigen::VectorXd z_full = compose(red, qr.z, hn.node.fixings, cache.n);
        bool integral = true;
        for (int b : red.free_binaries) {
            integral = integral &&
                       std::abs(z_full(b) - std::round(z_full(b))) <= options.integrality_tol;
        }
        if (integral) {
            try_incumbent(z_full, qr.objective);
            continue;
        }

        // Only a converged relaxation provides a trustworthy child bound.
        const double child_bound = qr.converged ? qr.objective : hn.node.parent_bound;
        auto [lo, hi] = branch(problem, hn.node, z_full, child_bound, options.integrality_tol);
        open.push({hi.parent_bound, seq++, std::move(hi)});
        open.push({lo.parent_bound, seq++, std::move(lo)});

        if (heuristic_pending) {
            heuristic_pending = false;
            for (const Eigen::VectorXd& cand : options.incumbent_heuristic(z_full)) {
                if (cand.size() != cache.n) {
                    continue;
                }
                std::map<int, int> fix;
                for (int b : cache.binaries) {
                    fix[b] = static_cast<int>(std::lround(cand(b)));
                }
                const Reduced rc = reduce(cache, fix);
                if (rc.contradiction) {
                    continue;
                }
                const QPResult cr = solve_qp(rc.qp);
                ++out.iterations;
                trace(open.size());
                if (cr.feasible) {
                    try_incumbent(compose(rc, cr.z, fix, cache.n), cr.objective);
                }
            }
        }
    }

    if (out.incumbent.size() == 0) {
        out.j_minus = kInf;
        out.status = MIQPStatus::InfeasibleCertified;
        return out;
    }
    out.j_minus = out.j_plus;
    out.status = out.j_minus > j_max ? MIQPStatus::BoundExceeded : MIQPStatus::Optimal;
    return out;
}

void write_problem(std::ostream& os, const MIQProblem& p) {
    const auto mat = [](const Eigen::MatrixXd& m) {
        std::vector<std::vector<double>> rows;
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            rows.emplace_back(m.row(i).begin(), m.row(i).end());
        }
        return rows;
    };
    const nlohmann::json j{{"vars", p.num_vars()},
                           {"f0", p.f0},
                           {"H", mat(p.H)},
                           {"f", std::vector<double>(p.f.begin(), p.f.end())},
                           {"A_eq", mat(p.A_eq)},
                           {"b_eq", std::vector<double>(p.b_eq.begin(), p.b_eq.end())},
                           {"A_in", mat(p.A_in)},
                           {"b_in", std::vector<double>(p.b_in.begin(), p.b_in.end())},
                           {"binaries", p.binaries}};
    os << j.dump(2) << '\n';
}

MIQProblem read_problem(std::istream& is) {
    nlohmann::json j;
    is >> j;
    MIQProblem p;
    const int n = j.at("vars").get<int>();
    const auto mat = [n](const nlohmann::json& rows) {
        Eigen::MatrixXd m(rows.size(), n);
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const auto row = rows[static_cast<std::size_t>(i)].get<std::vector<double>>();
            if (static_cast<int>(row.size()) != n) {
                throw std::invalid_argument("read_problem: ragged matrix row");
            }
            for (int c = 0; c < n; ++c) {
                m(i, c) = row[static_cast<std::size_t>(c)];
            }
        }
        return m;
    };
    const auto vec = [](const nlohmann::json& a) {
        const auto v = a.get<std::vector<double>>();
        return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(),
                                                                 static_cast<Eigen::Index>(v.size())));
    };
    p.f0 = j.at("f0").get<double>();
    p.H = mat(j.at("H"));
    p.f = vec(j.at("f"));
    p.A_eq = mat(j.at("A_eq"));
    p.b_eq = vec(j.at("b_eq"));
    p.A_in = mat(j.at("A_in"));
    p.b_in = vec(j.at("b_in"));
    p.binaries = j.at("binaries").get<std::vector<int>>();
    if (p.H.rows() != n || p.f.size() != n) {
        throw std::invalid_argument("read_problem: inconsistent dimensions");
    }
    return p;
}

}  // namespace manav
