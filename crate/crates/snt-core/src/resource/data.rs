//! Frozen simulation results the reference model is built from: 4-site
//! Clifford Fermi-Hubbard chains, 3.8e5 shots, a single round of checks.

use crate::encodings::EncodingKind;
use crate::qem::QemProtocol;

/// Circuit count behind every point in `SWEEP`.
pub const SWEEP_CIRCUITS: f64 = 3.8e5;

/// (encoding, protocol, λ, Θ) with Θ the estimated squared bias of the site occupations.
pub const SWEEP: &[(EncodingKind, QemProtocol, f64, f64)] = {
    use EncodingKind::*;
    use QemProtocol::*;
    &[
        (Jw, Sv, 0.05, 8.799e-06),
        (Jw, Snt, 0.05, -3.361e-07),
        (Jw, Sv, 0.125, 8.461e-05),
        (Jw, Snt, 0.125, 6.371e-07),
        (Jw, Sv, 0.2502, 2.556e-04),
        (Jw, Snt, 0.2502, -6.175e-07),
        (Jw, Sv, 0.5006, 1.149e-03),
        (Jw, Snt, 0.5006, 2.179e-05),
        (Jw, Sv, 1.002, 4.949e-03),
        (Jw, Snt, 1.002, 3.412e-04),
        (Jw, Sv, 1.758, 1.933e-02),
        (Jw, Snt, 1.758, 3.823e-03),
        (Jw, Sv, 2.516, 4.263e-02),
        (Jw, Snt, 2.516, 1.400e-02),
        (Jw, Sv, 3.786, 9.237e-02),
        (Jw, Snt, 3.786, 3.035e-02),
        (Jw, Sv, 5.064, 1.365e-01),
        (Jw, Snt, 5.064, 8.290e-02),
        (Le, Sv, 0.15, 2.832e-06),
        (Le, Snt, 0.15, -1.036e-07),
        (Le, Sv, 0.3751, 1.187e-05),
        (Le, Snt, 0.3751, 3.106e-07),
        (Le, Sv, 0.7505, 5.746e-05),
        (Le, Snt, 0.7505, 7.870e-06),
        (Le, Sv, 1.502, 3.889e-04),
        (Le, Snt, 1.502, 2.360e-05),
        (Le, Sv, 3.007, 1.920e-03),
        (Le, Snt, 3.007, 1.101e-03),
        (Le, Sv, 5.273, 2.068e-02),
        (Le, Snt, 5.273, 1.647e-02),
        (Le, Sv, 7.547, 6.800e-02),
        (Le, Snt, 7.547, 8.009e-02),
        (Le, Sv, 11.36, 1.749e-01),
        (Le, Snt, 11.36, 1.372e-01),
        (Vc, Sv, 0.11, 1.812e-06),
        (Vc, Snt, 0.11, -1.651e-07),
        (Vc, Sv, 0.2751, 1.119e-05),
        (Vc, Snt, 0.2751, -3.624e-07),
        (Vc, Sv, 0.5503, 3.291e-05),
        (Vc, Snt, 0.5503, -1.435e-06),
        (Vc, Sv, 1.101, 2.102e-04),
        (Vc, Snt, 1.101, 2.340e-06),
        (Vc, Sv, 2.205, 1.196e-03),
        (Vc, Snt, 2.205, 4.602e-04),
        (Vc, Sv, 3.867, 7.302e-03),
        (Vc, Snt, 3.867, 4.604e-03),
        (Vc, Sv, 5.535, 3.765e-02),
        (Vc, Snt, 5.535, 2.347e-02),
        (Vc, Sv, 8.328, 1.074e-01),
        (Vc, Snt, 8.328, 8.899e-02),
        (Vc, Sv, 11.14, 1.583e-01),
        (Vc, Snt, 11.14, 1.900e-01),
        (Dk, Sv, 0.09, 6.923e-06),
        (Dk, Snt, 0.09, -2.421e-07),
        (Dk, Sv, 0.2251, 4.734e-05),
        (Dk, Snt, 0.2251, -3.506e-07),
        (Dk, Sv, 0.4503, 2.137e-04),
        (Dk, Snt, 0.4503, -1.720e-06),
        (Dk, Sv, 0.9011, 1.066e-03),
        (Dk, Snt, 0.9011, 6.875e-05),
        (Dk, Sv, 1.804, 6.352e-03),
        (Dk, Snt, 1.804, 1.919e-03),
        (Dk, Sv, 3.164, 3.494e-02),
        (Dk, Snt, 3.164, 2.233e-02),
        (Dk, Sv, 4.528, 8.257e-02),
        (Dk, Snt, 4.528, 5.498e-02),
        (Dk, Sv, 6.814, 1.532e-01),
        (Dk, Snt, 6.814, 1.740e-01),
        (Dk, Sv, 9.114, 2.000e-01),
        (Dk, Snt, 9.114, 2.664e-01),
        (Hx, Sv, 0.15, 3.755e-07),
        (Hx, Snt, 0.15, -7.734e-08),
        (Hx, Sv, 0.3751, 4.232e-06),
        (Hx, Snt, 0.3751, -2.733e-07),
        (Hx, Sv, 0.7505, 1.557e-05),
        (Hx, Snt, 0.7505, -1.037e-06),
        (Hx, Sv, 1.502, 8.587e-05),
        (Hx, Snt, 1.502, 1.267e-05),
        (Hx, Sv, 3.007, 7.985e-04),
        (Hx, Snt, 3.007, 5.291e-04),
        (Hx, Sv, 5.273, 2.131e-02),
        (Hx, Snt, 5.273, 9.989e-03),
        (Hx, Sv, 7.547, 9.901e-02),
        (Hx, Snt, 7.547, 8.894e-02),
        (Hx, Sv, 11.36, 2.097e-01),
        (Hx, Snt, 11.36, 2.049e-01),
        (Hx, Sv, 15.19, 1.993e-01),
        (Hx, Snt, 15.19, 1.954e-01),
    ]
};
