#pragma once

#include "lbfem/sparse.hpp"

#include <vector>

namespace lbfem {

struct SolveOptions {
    double tol = 1e-10;
    Index max_iter = 0; // 0 selects 20 n
    bool record_history = false;
};

struct SolveInfo {
    Index iterations = 0;
    double relative_residual = 0.0;
    Index frozen = 0;
    /// Quadratic functional 1/2 x^T A x - b^T x per iterate (record_history only).
    std::vector<double> energy;
    std::vector<double> residual;
};

struct SolveResult {
    Vector x;
    SolveInfo info;
};

/// Jacobi-preconditioned CG for A x = b on the m-weighted mean-zero subspace,
/// where A is symmetric positive semidefinite with the constants as kernel.
/// Rows with diagonal below 1e-14 max_diag are frozen to zero. The load is
/// deflated, b <- b - (sum b / sum m) m, and every iterate is shifted to
/// m-weighted mean zero.
inline SolveResult solve_mean_zero(const SparseMatrix& a, const Vector& b_in, const Vector& mass,
                                   const SolveOptions& opt = {})
{
    const Index n = a.rows();
    LBFEM_THROW_IF(b_in.size() != n || mass.size() != n, ErrorCode::InvalidArgument, "dimension mismatch");
    SolveResult res;
    res.x = Vector::Zero(n);
    if (n == 0) return res;

    const Vector diag = a.diagonal();
    const double max_diag = diag.maxCoeff();
    std::vector<char> active(static_cast<std::size_t>(n), 1);
    Vector m = mass;
    Vector inv_diag(n);
    for (Index i = 0; i < n; ++i) {
        if (!(diag[i] >= 1e-14 * max_diag) || max_diag <= 0.0) {
            active[i] = 0;
            m[i] = 0.0;
            inv_diag[i] = 0.0;
            ++res.info.frozen;
        } else {
            inv_diag[i] = 1.0 / diag[i];
        }
    }
    const double m_total = m.sum();
    LBFEM_THROW_IF(!(m_total > 0.0), ErrorCode::InvalidArgument, "lumped mass has no active support");

    Vector b = b_in;
    for (Index i = 0; i < n; ++i)
        if (!active[i]) b[i] = 0.0;
    b -= (b.sum() / m_total) * m;

    auto remove_mean = [&](Vector& x) {
        const double c = m.dot(x) / m_total;
        for (Index i = 0; i < n; ++i)
            if (active[i]) x[i] -= c;
    };
    auto masked = [&](Vector v) {
        for (Index i = 0; i < n; ++i)
            if (!active[i]) v[i] = 0.0;
        return v;
    };

    const double b_norm = b.norm();
    if (b_norm == 0.0) return res;

    const Index max_iter = opt.max_iter > 0 ? opt.max_iter : 20 * n;
    Vector& x = res.x;
    Vector r = b;
    Vector z = inv_diag.cwiseProduct(r);
    Vector p = z;
    double rz = r.dot(z);
    double energy = 0.0;
    if (opt.record_history) {
        res.info.energy.push_back(energy);
        res.info.residual.push_back(1.0);
    }

    for (Index it = 1; it <= max_iter; ++it) {
        const Vector ap = masked(a.multiply(p));
        const double pap = p.dot(ap);
        LBFEM_THROW_IF(!(pap > 0.0), ErrorCode::NoConvergence, "CG breakdown: non-positive curvature");
        const double alpha = rz / pap;
        x += alpha * p;
        r -= alpha * ap;
        remove_mean(x);
        energy -= 0.5 * alpha * rz;

        const double rel = r.norm() / b_norm;
        res.info.iterations = it;
        res.info.relative_residual = rel;
        if (opt.record_history) {
            res.info.energy.push_back(energy);
            res.info.residual.push_back(rel);
        }
        if (rel <= opt.tol) return res;

        z = inv_diag.cwiseProduct(r);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    throw Error(ErrorCode::NoConvergence, "CG did not reach tol " + std::to_string(opt.tol) + " in " +
                                              std::to_string(max_iter) + " iterations");
}

} // namespace lbfem
