#include "cbc/controllability.hpp"

#include <cmath>

namespace cbc {

Matrix controllability_matrix(const Matrix& A, const Matrix& B) {
    if (!A.square()) throw InputError("controllability_matrix: A must be square");
    if (B.rows() != A.rows()) throw InputError("controllability_matrix: B must have as many rows as A");
    const std::size_t n = A.rows();
    Matrix out;
    Matrix block = B;
    for (std::size_t k = 0; k < n; ++k) {
        out = out.hcat(block);
        if (k + 1 < n) block = A * block;
    }
    return out;
}

bool washout_controllable(const Matrix& A, const Matrix& B, double tol) {
    const std::size_t n = A.rows();
    return mat_rank(controllability_matrix(A, B), tol) == n && mat_rank(A, tol) == n;
}

bool param_controllable(const Matrix& f_x, const Matrix& f_mu, double tol) {
    if (f_mu.cols() != 1) throw InputError("param_controllable: f_mu must be a column");
    return mat_rank(controllability_matrix(f_x, f_mu), tol) == f_x.rows();
}

namespace {

Matrix zie_matrix(const Matrix& f_x, const Matrix& f_mu, const Matrix& f_u, double a) {
    if (f_u.cols() != 1) throw InputError("zie_controllable: single input required (f_u must be a column)");
    if (f_mu.cols() != 1) throw InputError("zie_controllable: f_mu must be a column");
    const Matrix R_u = controllability_matrix(f_x, f_u);
    const Matrix R_mu = controllability_matrix(f_x, f_mu);
    return a * (f_x * R_u) + R_mu;
}

}  // namespace

bool zie_controllable(const Matrix& f_x, const Matrix& f_mu, const Matrix& f_u, double a, double tol) {
    // Regularity is judged by elimination pivots relative to the largest
    // entry, the same scale-free test used by param_controllable; a = 0
    // reduces to R_mu exactly.
    return mat_rank(zie_matrix(f_x, f_mu, f_u, a), tol) == f_x.rows();
}

std::vector<double> default_pencil_probes(std::size_t n) {
    std::vector<double> probes{0.0};
    for (int k = 1; probes.size() < n + 1; ++k) {
        probes.push_back(k);
        if (probes.size() < n + 1) probes.push_back(-k);
    }
    return probes;
}

PencilReport pencil_regular(const Matrix& A0, const Matrix& A1, double tol) {
    return pencil_regular(A0, A1, default_pencil_probes(A0.rows()), tol);
}

PencilReport pencil_regular(const Matrix& A0, const Matrix& A1, const std::vector<double>& probes, double tol) {
    if (!A0.square() || !A1.square() || A0.rows() != A1.rows())
        throw InputError("pencil_regular: A0 and A1 must be square with equal dimensions");
    const auto n = static_cast<double>(A0.rows());
    PencilReport report;
    double best = -1.0;
    for (double lambda : probes) {
        const Matrix M = A0 + lambda * A1;
        const double det = determinant(M);
        report.probe_dets.emplace_back(lambda, det);
        // Compare against the natural size of an n x n determinant.
        const double scale = std::pow(M.max_abs(), n);
        if (scale > 0.0 && std::abs(det) > tol * scale) report.regular = true;
        if (std::abs(det) > best) {
            best = std::abs(det);
            report.sample_a = lambda;
        }
    }
    return report;
}

ControllabilityReport check_all(const Linearization& lin, double tol) {
    ControllabilityReport report;
    report.washout = washout_controllable(lin.f_x, lin.f_u, tol);
    report.parameter = param_controllable(lin.f_x, lin.f_mu, tol);
    const Matrix R_u = controllability_matrix(lin.f_x, lin.f_u);
    const Matrix R_mu = controllability_matrix(lin.f_x, lin.f_mu);
    report.pencil = pencil_regular(R_mu, lin.f_x * R_u, tol);
    report.zie_a = report.pencil.sample_a;
    report.zie = zie_controllable(lin.f_x, lin.f_mu, lin.f_u, report.zie_a, tol);
    return report;
}

}  // namespace cbc
