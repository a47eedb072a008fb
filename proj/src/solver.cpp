#include "biastrend/solver.hpp"

#include "biastrend/errors.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

namespace biastrend {

namespace {

// Row weight sum excluding the self-loop; self-loops cancel out of D - W.
std::vector<double> off_diagonal_degree(const SparseRows& g) {
    std::vector<double> deg(g.n, 0.0);
    for (uint32_t i = 0; i < g.n; ++i) {
        double d = 0.0;
        for (uint64_t k = g.offsets[i]; k < g.offsets[i + 1]; ++k)
            if (g.cols[k] != i)
                d += g.weights[k];
        deg[i] = d;
    }
    return deg;
}

struct SubProblem {
    std::vector<uint32_t> nodes;  // unlabeled, reachable, in node order
    std::vector<int64_t> sub_of;  // node -> sub index or -1
    std::vector<double> diag;     // A diagonal = off-diagonal degree
    std::vector<double> b;        // W_ul * f_l
};

SubProblem assemble(const SparseRows& g, const std::vector<double>& label_value,
                    const std::vector<uint8_t>& is_labeled,
                    const std::vector<uint32_t>& unlabeled) {
    SubProblem p;
    p.nodes = unlabeled;
    p.sub_of.assign(g.n, -1);
    for (size_t s = 0; s < p.nodes.size(); ++s)
        p.sub_of[p.nodes[s]] = static_cast<int64_t>(s);
    const std::vector<double> deg = off_diagonal_degree(g);
    p.diag.resize(p.nodes.size());
    p.b.assign(p.nodes.size(), 0.0);
    for (size_t s = 0; s < p.nodes.size(); ++s) {
        const uint32_t u = p.nodes[s];
        p.diag[s] = deg[u];
        for (uint64_t k = g.offsets[u]; k < g.offsets[u + 1]; ++k) {
            const uint32_t v = g.cols[k];
            if (v != u && is_labeled[v])
                p.b[s] += g.weights[k] * label_value[v];
        }
    }
    return p;
}

// y = A x with A = (D - W) restricted to the unlabeled block. Rows are
// independent, so the parallel loop is deterministic for any worker count.
void apply(const SparseRows& g, const SubProblem& p, const std::vector<double>& x,
           std::vector<double>& y, int workers) {
    const auto m = static_cast<int64_t>(p.nodes.size());
#pragma omp parallel for schedule(static) num_threads(workers)
    for (int64_t s = 0; s < m; ++s) {
        const uint32_t u = p.nodes[static_cast<size_t>(s)];
        double acc = p.diag[static_cast<size_t>(s)] * x[static_cast<size_t>(s)];
        for (uint64_t k = g.offsets[u]; k < g.offsets[u + 1]; ++k) {
            const uint32_t v = g.cols[k];
            if (v == u)
                continue;
            const int64_t t = p.sub_of[v];
            if (t >= 0)
                acc -= g.weights[k] * x[static_cast<size_t>(t)];
        }
        y[static_cast<size_t>(s)] = acc;
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        acc += a[i] * b[i];
    return acc;
}

double scaled_residual_max(const SubProblem& p, const std::vector<double>& r) {
    double worst = 0.0;
    for (size_t s = 0; s < r.size(); ++s) {
        if (p.diag[s] > 0.0)
            worst = std::max(worst, std::abs(r[s]) / p.diag[s]);
        else
            worst = std::max(worst, std::abs(r[s]));
    }
    return worst;
}

// In-place LL^T factorization and solve.
std::vector<double> cholesky_solve(std::vector<double>& a, std::vector<double> b, size_t m) {
    for (size_t j = 0; j < m; ++j) {
        double d = a[j * m + j];
        for (size_t k = 0; k < j; ++k)
            d -= a[j * m + k] * a[j * m + k];
        if (d <= 0.0)
            throw SingularSystem("propagation system is not positive definite");
        const double l = std::sqrt(d);
        a[j * m + j] = l;
        for (size_t i = j + 1; i < m; ++i) {
            double v = a[i * m + j];
            for (size_t k = 0; k < j; ++k)
                v -= a[i * m + k] * a[j * m + k];
            a[i * m + j] = v / l;
        }
    }
    for (size_t i = 0; i < m; ++i) {
        double v = b[i];
        for (size_t k = 0; k < i; ++k)
            v -= a[i * m + k] * b[k];
        b[i] = v / a[i * m + i];
    }
    for (size_t ii = m; ii > 0; --ii) {
        const size_t i = ii - 1;
        double v = b[i];
        for (size_t k = i + 1; k < m; ++k)
            v -= a[k * m + i] * b[k];
        b[i] = v / a[i * m + i];
    }
    return b;
}

std::vector<double> dense_solve(const SparseRows& g, const SubProblem& p) {
    const size_t m = p.nodes.size();
    std::vector<double> a(m * m, 0.0);
    for (size_t s = 0; s < m; ++s) {
        const uint32_t u = p.nodes[s];
        a[s * m + s] = p.diag[s];
        for (uint64_t k = g.offsets[u]; k < g.offsets[u + 1]; ++k) {
            const uint32_t v = g.cols[k];
            if (v == u)
                continue;
            const int64_t t = p.sub_of[v];
            if (t >= 0)
                a[s * m + static_cast<size_t>(t)] -= g.weights[k];
        }
    }
    return cholesky_solve(a, p.b, m);
}

std::vector<double> pcg_solve(const SparseRows& g, const SubProblem& p, double tol,
                              uint32_t max_iters, int workers, uint32_t* iterations,
                              double* residual) {
    const size_t m = p.nodes.size();
    std::vector<double> x(m, 0.0), r = p.b, z(m), q(m), d(m);
    std::vector<double> inv_diag(m);
    for (size_t s = 0; s < m; ++s)
        inv_diag[s] = p.diag[s] > 0.0 ? 1.0 / p.diag[s] : 1.0;

    for (size_t s = 0; s < m; ++s)
        z[s] = r[s] * inv_diag[s];
    d = z;
    double rz = dot(r, z);
    double worst = scaled_residual_max(p, r);
    uint32_t it = 0;
    while (worst > tol && it < max_iters) {
        apply(g, p, d, q, workers);
        const double dq = dot(d, q);
        if (dq <= 0.0)
            throw SingularSystem("conjugate gradient hit a non-positive curvature");
        const double alpha = rz / dq;
        for (size_t s = 0; s < m; ++s) {
            x[s] += alpha * d[s];
            r[s] -= alpha * q[s];
        }
        for (size_t s = 0; s < m; ++s)
            z[s] = r[s] * inv_diag[s];
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (size_t s = 0; s < m; ++s)
            d[s] = z[s] + beta * d[s];
        ++it;
        worst = scaled_residual_max(p, r);
    }
    if (iterations)
        *iterations = it;
    if (residual)
        *residual = worst;
    if (worst > tol)
        throw SolverDivergence("residual " + std::to_string(worst) + " above tolerance after " +
                               std::to_string(it) + " iterations");
    return x;
}

struct LabelState {
    std::vector<uint8_t> is_labeled;
    std::vector<double> value;
};

LabelState check_labels(uint32_t n, const std::vector<std::pair<uint32_t, double>>& labels) {
    LabelState st;
    st.is_labeled.assign(n, 0);
    st.value.assign(n, 0.0);
    for (const auto& [node, val] : labels) {
        if (node >= n)
            throw UsageError("label node out of range");
        if (val < 0.0 || val > 1.0)
            throw UsageError("label value outside [0, 1]");
        if (st.is_labeled[node] && st.value[node] != val)
            throw ConflictingLabel("node " + std::to_string(node) +
                                   " labeled with two different values");
        st.is_labeled[node] = 1;
        st.value[node] = val;
    }
    return st;
}

std::vector<uint8_t> reachable_from_labels(const SparseRows& g,
                                           const std::vector<uint8_t>& is_labeled) {
    std::vector<uint8_t> seen(g.n, 0);
    std::deque<uint32_t> frontier;
    for (uint32_t i = 0; i < g.n; ++i) {
        if (is_labeled[i]) {
            seen[i] = 1;
            frontier.push_back(i);
        }
    }
    while (!frontier.empty()) {
        const uint32_t u = frontier.front();
        frontier.pop_front();
        for (uint64_t k = g.offsets[u]; k < g.offsets[u + 1]; ++k) {
            const uint32_t v = g.cols[k];
            if (!seen[v] && g.weights[k] != 0.0) {
                seen[v] = 1;
                frontier.push_back(v);
            }
        }
    }
    return seen;
}

} // namespace

PropagationResult propagate_labels(const SparseRows& graph,
                                   const std::vector<std::pair<uint32_t, double>>& labels,
                                   const PropagationOptions& opt) {
    if (labels.empty())
        throw EmptySetError("no labeled nodes");
    LabelState st = check_labels(graph.n, labels);
    const std::vector<uint8_t> seen = reachable_from_labels(graph, st.is_labeled);

    std::vector<uint32_t> unlabeled;
    for (uint32_t i = 0; i < graph.n; ++i)
        if (!st.is_labeled[i] && seen[i])
            unlabeled.push_back(i);

    PropagationResult res;
    res.values = st.value; // labels echoed, unreached stay 0
    res.reached = seen;
    const SubProblem p = assemble(graph, st.value, st.is_labeled, unlabeled);

    std::vector<double> f;
    if (!unlabeled.empty()) {
        if (!opt.force_iterative && unlabeled.size() <= opt.dense_cutoff) {
            f = dense_solve(graph, p);
            res.method = "dense";
            // report the harmonic residual of the direct solution
            std::vector<double> ax(f.size());
            apply(graph, p, f, ax, std::max(1, opt.workers));
            std::vector<double> r(f.size());
            for (size_t s = 0; s < f.size(); ++s)
                r[s] = p.b[s] - ax[s];
            res.residual = scaled_residual_max(p, r);
            res.iterations = 0;
        } else {
            f = pcg_solve(graph, p, opt.tol, opt.max_iters, std::max(1, opt.workers),
                          &res.iterations, &res.residual);
            res.method = "pcg";
        }
        for (size_t s = 0; s < unlabeled.size(); ++s)
            res.values[unlabeled[s]] = std::clamp(f[s], 0.0, 1.0);
    } else {
        res.method = unlabeled.empty() ? "none" : res.method;
    }
    return res;
}

std::vector<double> propagate_labels_dense(const SparseRows& graph,
                                           const std::vector<std::pair<uint32_t, double>>& labels,
                                           const std::vector<uint32_t>& unlabeled) {
    LabelState st = check_labels(graph.n, labels);
    const SubProblem p = assemble(graph, st.value, st.is_labeled, unlabeled);
    return dense_solve(graph, p);
}

std::vector<double> propagate_labels_pcg_serial(
    const SparseRows& graph, const std::vector<std::pair<uint32_t, double>>& labels,
    const std::vector<uint32_t>& unlabeled, double tol, uint32_t max_iters,
    uint32_t* iterations, double* residual) {
    LabelState st = check_labels(graph.n, labels);
    const SubProblem p = assemble(graph, st.value, st.is_labeled, unlabeled);
    return pcg_solve(graph, p, tol, max_iters, 1, iterations, residual);
}

} // namespace biastrend
