#include "loewner_lab/cg.hpp"

#include <algorithm>
#include <cmath>

namespace ll {

void LaplaceSystem::add_row(const std::vector<std::pair<int, double>>& entries, double d) {
    for (const auto& [j, wt] : entries) {
        col.push_back(j);
        w.push_back(wt);
    }
    rowptr.push_back(int(col.size()));
    diag.push_back(d);
    ++n;
}

namespace {

constexpr int kBlocks = 64;

template <bool Parallel>
void apply(const LaplaceSystem& A, const std::vector<double>& x, std::vector<double>& y) {
    const int n = A.n;
#pragma omp parallel for schedule(static) if (Parallel)
    for (int i = 0; i < n; ++i) {
        double s = A.diag[i] * x[i];
        for (int k = A.rowptr[i]; k < A.rowptr[i + 1]; ++k) s -= A.w[k] * x[A.col[k]];
        y[i] = s;
    }
}

template <bool Parallel>
double dot(const std::vector<double>& a, const std::vector<double>& b) {
    const int n = int(a.size());
    double part[kBlocks];
#pragma omp parallel for schedule(static) if (Parallel)
    for (int blk = 0; blk < kBlocks; ++blk) {
        int lo = int((long long)n * blk / kBlocks), hi = int((long long)n * (blk + 1) / kBlocks);
        double s = 0.0;
        for (int i = lo; i < hi; ++i) s += a[i] * b[i];
        part[blk] = s;
    }
    double s = 0.0;
    for (double p : part) s += p;
    return s;
}

template <bool Parallel>
double scaled_max(const std::vector<double>& r, const std::vector<double>& d) {
    double m = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) m = std::max(m, std::abs(r[i]) / d[i]);
    return m;
}

template <bool Parallel>
CgResult solve(const LaplaceSystem& A, const std::vector<double>& b, std::vector<double>& x,
               double tol, int max_iter) {
    const int n = A.n;
    CgResult res;
    x.resize(n, 0.0);
    if (n == 0) {
        res.converged = true;
        return res;
    }
    std::vector<double> r(n), z(n), p(n), q(n);
    apply<Parallel>(A, x, q);
    for (int i = 0; i < n; ++i) r[i] = b[i] - q[i];
    res.residual = scaled_max<Parallel>(r, A.diag);
    if (res.residual <= tol) {
        res.converged = true;
        return res;
    }
    for (int i = 0; i < n; ++i) p[i] = z[i] = r[i] / A.diag[i];
    double rz = dot<Parallel>(r, z);
    for (int it = 1; it <= max_iter; ++it) {
        apply<Parallel>(A, p, q);
        double alpha = rz / dot<Parallel>(p, q);
#pragma omp parallel for schedule(static) if (Parallel)
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
            z[i] = r[i] / A.diag[i];
        }
        res.iterations = it;
        // the recursive residual drifts; refresh it periodically
        if (it % 200 == 0) {
            apply<Parallel>(A, x, q);
            for (int i = 0; i < n; ++i) r[i] = b[i] - q[i];
            for (int i = 0; i < n; ++i) z[i] = r[i] / A.diag[i];
        }
        res.residual = scaled_max<Parallel>(r, A.diag);
        if (res.residual <= tol) {
            res.converged = true;
            break;
        }
        double rz_new = dot<Parallel>(r, z);
        double beta = rz_new / rz;
        rz = rz_new;
#pragma omp parallel for schedule(static) if (Parallel)
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    return res;
}

}  // namespace

CgResult cg_solve(const LaplaceSystem& A, const std::vector<double>& b, std::vector<double>& x,
                  double tol, int max_iter) {
    return solve<true>(A, b, x, tol, max_iter);
}

CgResult cg_solve_serial(const LaplaceSystem& A, const std::vector<double>& b,
                         std::vector<double>& x, double tol, int max_iter) {
    return solve<false>(A, b, x, tol, max_iter);
}

void laplace_apply(const LaplaceSystem& A, const std::vector<double>& x, std::vector<double>& y) {
    y.resize(A.n);
    apply<true>(A, x, y);
}

void laplace_apply_serial(const LaplaceSystem& A, const std::vector<double>& x,
                          std::vector<double>& y) {
    y.resize(A.n);
    apply<false>(A, x, y);
}

}  // namespace ll
