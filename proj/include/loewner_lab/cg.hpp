#pragma once

#include <vector>

namespace ll {

// Symmetric positive definite system A = D - W where W holds the nonnegative
// couplings between unknowns (CSR, both directions stored).
struct LaplaceSystem {
    int n = 0;
    std::vector<int> rowptr{0};
    std::vector<int> col;
    std::vector<double> w;
    std::vector<double> diag;

    void add_row(const std::vector<std::pair<int, double>>& entries, double d);
};

struct CgResult {
    int iterations = 0;
    double residual = 0.0;  // max_i |r_i| / D_ii
    bool converged = false;
};

// Jacobi-preconditioned conjugate gradient. Dot products are reduced over a
// fixed block partition, so the OpenMP and serial paths give bitwise equal
// iterates regardless of thread count.
CgResult cg_solve(const LaplaceSystem& A, const std::vector<double>& b, std::vector<double>& x,
                  double tol, int max_iter);
CgResult cg_solve_serial(const LaplaceSystem& A, const std::vector<double>& b,
                         std::vector<double>& x, double tol, int max_iter);

void laplace_apply(const LaplaceSystem& A, const std::vector<double>& x, std::vector<double>& y);
void laplace_apply_serial(const LaplaceSystem& A, const std::vector<double>& x,
                          std::vector<double>& y);

}  // namespace ll
