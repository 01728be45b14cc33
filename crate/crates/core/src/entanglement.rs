//! Two-mode reductions of the covariance matrix and logarithmic negativity.

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::dynamics::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::modes::ModePair;

/// Absolute slack on the determinant conditions, absorbing Lyapunov round-off.
pub const DETERMINANT_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementResult {
    pub pair: Option<ModePair>,
    /// Minimum symplectic eigenvalue of the partially transposed covariance.
    pub nu_minus: f64,
    /// Logarithmic negativity `max(0, −ln 2ν₋)`.
    pub log_negativity: f64,
    pub stable: bool,
}

/// Selects the 4×4 block of `c` belonging to `pair`.
pub fn reduce_covariance(c: &CovarianceMatrix, pair: ModePair) -> Matrix4<f64> {
    let idx = pair.indices();
    let m = c.matrix();
    Matrix4::from_fn(|r, col| m[(idx[r], idx[col])])
}

/// Logarithmic negativity of a two-mode Gaussian covariance (vacuum = I/2).
///
/// Partial transposition `T = diag(1, −1, 1, 1)` flips the sign of the
/// off-diagonal determinant, so `Σ̃ = det A + det B − 2 det C` and
/// `ν₋² = (Σ̃ − sqrt(Σ̃² − 4 det V)) / 2`.
pub fn log_negativity(v: &Matrix4<f64>) -> Result<EntanglementResult> {
    let transpose = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, -1.0, 1.0, 1.0));
    let vt = transpose * v * transpose;
    let block = |r: usize, c: usize| -> Matrix2<f64> { vt.fixed_view::<2, 2>(r, c).into_owned() };
    let sigma = block(0, 0).determinant() + block(2, 2).determinant() + 2.0 * block(0, 2).determinant();
    let det = v.determinant();

    let unphysical = |reason: String| Error::UnphysicalInput { pair: None, reason };
    if !sigma.is_finite() || !det.is_finite() {
        return Err(unphysical("non-finite covariance".into()));
    }
    if det <= -DETERMINANT_SLACK {
        return Err(unphysical(format!("det V = {det:e} is not positive")));
    }
    let disc = sigma * sigma - 4.0 * det;
    if disc < -DETERMINANT_SLACK {
        return Err(unphysical(format!("Σ̃² − 4 det V = {disc:e} < 0")));
    }
    let nu_sq = 0.5 * (sigma - disc.max(0.0).sqrt());
    if !(nu_sq > 0.0) {
        return Err(unphysical(format!("ν₋² = {nu_sq:e} is not positive")));
    }
    let nu_minus = nu_sq.sqrt();
    Ok(EntanglementResult { pair: None, nu_minus, log_negativity: (-(2.0 * nu_minus).ln()).max(0.0), stable: true })
}

/// Logarithmic negativity for all ten bipartitions, in canonical pair order.
pub fn all_pairs_entanglement(c: &CovarianceMatrix) -> Result<Vec<EntanglementResult>> {
    pairs_entanglement(c, &ModePair::all())
}

/// Logarithmic negativity for the requested pairs, tagging errors with the offending pair.
pub fn pairs_entanglement(c: &CovarianceMatrix, pairs: &[ModePair]) -> Result<Vec<EntanglementResult>> {
    pairs
        .iter()
        .map(|&pair| {
            log_negativity(&reduce_covariance(c, pair)).map(|r| EntanglementResult { pair: Some(pair), ..r }).map_err(
                |e| match e {
                    Error::UnphysicalInput { reason, .. } => Error::UnphysicalInput { pair: Some(pair), reason },
                    other => other,
                },
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{build_diffusion, build_drift, solve_lyapunov, Mat10};
    use crate::model::SystemParams;
    use crate::modes::Mode;
    use proptest::prelude::*;

    fn squeezed(r: f64) -> Matrix4<f64> {
        let (c, s) = ((2.0 * r).cosh() / 2.0, (2.0 * r).sinh() / 2.0);
        #[rustfmt::skip]
        let v = Matrix4::new(
            c,   0.0, s,   0.0,
            0.0, c,   0.0, -s,
            s,   0.0, c,   0.0,
            0.0, -s,  0.0, c,
        );
        v
    }

    fn rotation_on_first_mode(theta: f64) -> Matrix4<f64> {
        let (s, c) = theta.sin_cos();
        let mut r = Matrix4::identity();
        r[(0, 0)] = c;
        r[(0, 1)] = -s;
        r[(1, 0)] = s;
        r[(1, 1)] = c;
        r
    }

    /// Swaps the two modes of a 4×4 covariance.
    fn swap_modes(v: &Matrix4<f64>) -> Matrix4<f64> {
        let perm = [2, 3, 0, 1];
        Matrix4::from_fn(|r, c| v[(perm[r], perm[c])])
    }

    #[test]
    fn vacuum_is_separable() {
        let r = log_negativity(&(Matrix4::identity() * 0.5)).unwrap();
        assert!((r.nu_minus - 0.5).abs() < 1e-15);
        assert_eq!(r.log_negativity, 0.0);
    }

    #[test]
    fn two_mode_squeezed_vacuum() {
        for r in [0.05, 0.3, 1.0, 2.0] {
            let res = log_negativity(&squeezed(r)).unwrap();
            assert!((res.nu_minus - (-2.0 * r).exp() / 2.0).abs() < 1e-10 * (-2.0 * r).exp());
            assert!((res.log_negativity - 2.0 * r).abs() < 1e-8, "r={r}: {}", res.log_negativity);
        }
    }

    #[test]
    fn unphysical_input_rejected() {
        let mut v = Matrix4::identity() * 0.5;
        v[(0, 0)] = -0.5;
        assert!(matches!(log_negativity(&v), Err(Error::UnphysicalInput { .. })));
        assert!(log_negativity(&Matrix4::zeros()).is_err());
    }

    #[test]
    fn reduction_indices() {
        let m = Mat10::from_fn(|r, c| (r * 10 + c) as f64);
        let sym = (m + m.transpose()) * 0.5;
        let c = CovarianceMatrix::new(sym).unwrap();
        let c1c2 = reduce_covariance(&c, ModePair::new(Mode::C1, Mode::C2).unwrap());
        assert_eq!(c1c2, sym.fixed_view::<4, 4>(0, 0).into_owned());
        let be = reduce_covariance(&c, ModePair::new(Mode::E, Mode::B).unwrap());
        assert_eq!(be, sym.fixed_view::<4, 4>(6, 6).into_owned());
    }

    #[test]
    fn decoupled_system_has_no_entanglement() {
        let mut p = SystemParams::baseline();
        p.feedback = crate::model::FeedbackSpec::off();
        p.j = 0.0;
        p.g_ce = 0.0;
        p.g_mc = 0.0;
        p.g_mb = 0.0;
        let c = solve_lyapunov(&build_drift(&p), &build_diffusion(&p)).unwrap();
        let results = all_pairs_entanglement(&c).unwrap();
        assert_eq!(results.len(), 10);
        for r in results {
            assert_eq!(r.log_negativity, 0.0, "{:?}", r.pair);
            let v = reduce_covariance(&c, r.pair.unwrap());
            assert_eq!(v.fixed_view::<2, 2>(0, 2).amax(), 0.0);
        }
    }

    /// The feedback-modified cavity-1 noise drives its reduced state below
    /// vacuum, so even a product state reports a non-zero value.
    #[test]
    fn feedback_noise_makes_decoupled_cavity_subvacuum() {
        let mut p = SystemParams::baseline();
        p.j = 0.0;
        p.g_ce = 0.0;
        p.g_mc = 0.0;
        p.g_mb = 0.0;
        let c = solve_lyapunov(&build_drift(&p), &build_diffusion(&p)).unwrap();
        let var = c.matrix()[(0, 0)];
        let expected = p.feedback.noise_factor() / (2.0 * p.kappa_fb() / p.kappa_c);
        assert!((var - expected).abs() < 1e-12);
        assert!(var < 0.5);
        assert!(!c.is_physical());
        let c1c2 = log_negativity(&reduce_covariance(&c, ModePair::new(Mode::C1, Mode::C2).unwrap())).unwrap();
        assert!((c1c2.log_negativity + (2.0 * var).ln()).abs() < 1e-10);
    }

    #[test]
    fn baseline_pairs_swap_symmetric() {
        let p = SystemParams::baseline();
        let c = solve_lyapunov(&build_drift(&p), &build_diffusion(&p)).unwrap();
        for pair in ModePair::all() {
            let v = reduce_covariance(&c, pair);
            let a = log_negativity(&v).unwrap();
            let b = log_negativity(&swap_modes(&v)).unwrap();
            assert!((a.log_negativity - b.log_negativity).abs() < 1e-12, "{pair}");
            let swapped = ModePair::new(pair.second(), pair.first()).unwrap();
            assert_eq!(reduce_covariance(&c, swapped), v);
        }
    }

    proptest! {
        #[test]
        fn local_rotation_invariance(r in 0.0f64..1.5, theta in -3.2f64..3.2, n in 0.0f64..2.0) {
            let v = squeezed(r) + Matrix4::identity() * (0.5 * n);
            let rot = rotation_on_first_mode(theta);
            let rotated = rot * v * rot.transpose();
            let a = log_negativity(&v).unwrap().log_negativity;
            let b = log_negativity(&rotated).unwrap().log_negativity;
            prop_assert!((a - b).abs() < 1e-10);
        }

        #[test]
        fn product_states_are_separable(a in 0.5f64..5.0, b in 0.5f64..5.0, x in -0.3f64..0.3, y in -0.3f64..0.3) {
            // Thermal-like single-mode blocks with a correlation inside each mode.
            let mut v = Matrix4::zeros();
            v[(0, 0)] = a; v[(1, 1)] = a; v[(0, 1)] = x; v[(1, 0)] = x;
            v[(2, 2)] = b; v[(3, 3)] = b; v[(2, 3)] = y; v[(3, 2)] = y;
            prop_assume!(a * a - x * x >= 0.25 && b * b - y * y >= 0.25);
            prop_assert_eq!(log_negativity(&v).unwrap().log_negativity, 0.0);
        }

        #[test]
        fn swap_symmetry(r in 0.0f64..1.5, n1 in 0.0f64..1.0, n2 in 0.0f64..1.0) {
            let mut v = squeezed(r);
            v[(0, 0)] += n1; v[(1, 1)] += n1; v[(2, 2)] += n2; v[(3, 3)] += n2;
            let a = log_negativity(&v).unwrap();
            let b = log_negativity(&swap_modes(&v)).unwrap();
            prop_assert!((a.log_negativity - b.log_negativity).abs() < 1e-12);
        }
    }
}
