#pragma once

namespace csl {

// Numerical tolerances shared by the library and its test suites.
// Defaults are the contract; callers may relax or tighten per instance.
struct ToleranceConfig {
    double hermitian_rel = 1e-12;       // max|M - M^dag| <= tol * max|M|
    double commute_rel = 1e-10;         // max|[A_j,A_k]| <= tol * max|A_j| max|A_k|
    double eigen_roundtrip = 1e-10;     // |U diag U^dag - A| entrywise
    double density_hermitian = 1e-10;   // density matrix hermiticity
    double density_trace = 1e-9;        // |Tr rho - 1|
    double density_min_eig = -1e-9;     // smallest eigenvalue floor
    double expectation_imag = 1e-12;    // imaginary residue of <B>
    double state_norm = 1e-10;          // normalization drift on stored states
    double weight_sum = 1e-12;          // outcome frequency sum
};

inline const ToleranceConfig& default_tolerances() {
    static const ToleranceConfig cfg{};
    return cfg;
}

} // namespace csl
