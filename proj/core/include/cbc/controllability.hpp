#pragma once

#include <utility>
#include <vector>

#include "cbc/matrix.hpp"

namespace cbc {

inline constexpr double kDefaultRankTol = 1e-9;

/// [B, AB, ..., A^{n-1}B] for square A (n x n) and B (n x m).
Matrix controllability_matrix(const Matrix& A, const Matrix& B);

/// Washout-filter controllability: the plant pair (A, B) is controllable and
/// A is regular. Equivalent to full rank of the system extended by
/// x_wo' = u.
bool washout_controllable(const Matrix& A, const Matrix& B, double tol = kDefaultRankTol);

/// Control through the parameter (mu' = u): (f_x, f_mu) controllable.
bool param_controllable(const Matrix& f_x, const Matrix& f_mu, double tol = kDefaultRankTol);

/// Zero-in-equilibrium control with plant input scaling `a`: the matrix
/// a * f_x * R_u + R_mu is regular, with R_u, R_mu the controllability
/// matrices of f_x with respect to f_u and f_mu. Requires a single input.
bool zie_controllable(const Matrix& f_x, const Matrix& f_mu, const Matrix& f_u, double a,
                      double tol = kDefaultRankTol);

/// Outcome of probing det(A0 + lambda * A1) for regularity of the pencil.
struct PencilReport {
    bool regular = false;
    /// Probe value with the largest |det|; a usable input scaling `a` when
    /// A0 = R_mu and A1 = f_x R_u.
    double sample_a = 0.0;
    std::vector<std::pair<double, double>> probe_dets;  // (lambda, det)
};

/// Default probes 0, 1, -1, 2, -2, ... (n + 1 of them). Exact for regularity
/// since det(A0 + lambda A1) has degree <= n in lambda.
std::vector<double> default_pencil_probes(std::size_t n);

PencilReport pencil_regular(const Matrix& A0, const Matrix& A1, double tol = kDefaultRankTol);
/// Same test with caller-chosen probes; at least n + 1 distinct values are
/// needed for the verdict to be exact.
PencilReport pencil_regular(const Matrix& A0, const Matrix& A1, const std::vector<double>& probes,
                            double tol = kDefaultRankTol);

/// Linearization of x' = f(x, mu, u) at an equilibrium.
struct Linearization {
    Matrix f_x;
    Matrix f_mu;
    Matrix f_u;
};

/// Verdicts of all three non-invasive laws for one linearization.
struct ControllabilityReport {
    bool washout = false;
    bool parameter = false;
    bool zie = false;
    double zie_a = 0.0;  // scaling used for the ZIE verdict
    PencilReport pencil;
};

/// ZIE verdict uses the pencil's best probe as the scaling a.
ControllabilityReport check_all(const Linearization& lin, double tol = kDefaultRankTol);

}  // namespace cbc
