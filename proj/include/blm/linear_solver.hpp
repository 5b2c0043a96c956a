#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <memory>
#include <vector>

#include "blm/sparse.hpp"

namespace blm {

// Sparse direct solver. The constrained saddle-point systems are
// nonsymmetric (skew convection) and indefinite, so a general sparse LU with
// pivoting is used; the symbolic analysis is reused across refactorizations
// on the same pattern.
class DirectSolver {
public:
    void factorize(const CsrMatrix& a) {
        const int n = a.rows();
        Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor, int>> mapped(
            n, a.cols(), a.pattern->nnz(), a.pattern->row_ptr.data(), a.pattern->col_idx.data(),
            a.val.data());
        mat_ = mapped;  // column-major copy for the factorization
        if (!analyzed_) {
            lu_.analyzePattern(mat_);
            analyzed_ = true;
        }
        lu_.factorize(mat_);
        if (lu_.info() != Eigen::Success)
            throw Error("linear solver: factorization failed (singular or breakdown)");
    }

    std::vector<double> solve(const std::vector<double>& rhs) const {
        Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), rhs.size());
        Eigen::VectorXd x = lu_.solve(b);
        if (lu_.info() != Eigen::Success) throw Error("linear solver: solve failed");
        return std::vector<double>(x.data(), x.data() + x.size());
    }

private:
    Eigen::SparseMatrix<double> mat_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    bool analyzed_ = false;
};

struct SaddleSolution {
    std::vector<double> u;  // velocity coefficients
    std::vector<double> p;  // pressure coefficients
    double rel_residual = 0.0;
};

// Solves the constrained system and enforces the relative residual contract.
inline SaddleSolution solve_saddle_point(const CsrMatrix& sys, const std::vector<double>& rhs,
                                         int n_velocity, double linear_tol = 1e-10) {
    DirectSolver lu;
    lu.factorize(sys);
    std::vector<double> x = lu.solve(rhs);

    std::vector<double> r = sys.apply(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
    const double denom = std::max(norm2(rhs), 1e-300);
    const double rel = norm2(r) / denom;
    if (!(rel <= linear_tol))
        throw Error("linear solver: residual " + format_double(rel) + " exceeds tolerance " +
                    format_double(linear_tol));

    SaddleSolution sol;
    sol.u.assign(x.begin(), x.begin() + n_velocity);
    sol.p.assign(x.begin() + n_velocity, x.end());
    sol.rel_residual = rel;
    return sol;
}

}  // namespace blm
