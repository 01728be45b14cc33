//! Linearized quadrature dynamics: drift and diffusion matrices, stability,
//! the steady-state Lyapunov equation and two brute-force time-domain
//! integrators used as independent checks.

use std::ops::{Add, Mul};

use nalgebra::linalg::{Schur, SymmetricEigen};
use nalgebra::SMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{thermal_occupation, DriveSpec, PhysicalConstants, SystemParams};
use crate::modes::DIM;

/// 10×10 real matrix over the quadrature ordering of [`crate::modes`].
pub type Mat10 = SMatrix<f64, DIM, DIM>;

/// Points with `max_real_eig` in `(-MARGINAL_BAND * ω_b, 0)` are treated as marginal.
pub const MARGINAL_BAND: f64 = 1e-6;

/// Drift matrix, diagonal diffusion matrix and the stability verdict for one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftDiffusion {
    pub a: Mat10,
    pub d: Mat10,
    pub stable: bool,
    pub max_real_eig: f64,
}

impl DriftDiffusion {
    pub fn new(p: &SystemParams) -> Result<Self> {
        let a = build_drift(p);
        let d = build_diffusion(p);
        let report = check_stability(&a)?;
        Ok(DriftDiffusion { a, d, stable: report.stable, max_real_eig: report.max_real_eig })
    }
}

/// Drift matrix of the linearized quadrature fluctuations.
///
/// The cavity-1 block uses the feedback-modified decay and detuning.
pub fn build_drift(p: &SystemParams) -> Mat10 {
    let kfb = p.kappa_fb();
    let dfb = p.delta_fb();
    let (kc, km, ge, gb) = (p.kappa_c, p.kappa_m, p.gamma_e, p.gamma_b);
    let (d2, dm, de, wb) = (p.delta_2, p.delta_m_eff, p.delta_e, p.omega_b);
    let (j, gmc, gmb, gce) = (p.j, p.g_mc, p.g_mb, p.g_ce);
    #[rustfmt::skip]
    let rows: [f64; DIM * DIM] = [
        -kfb,  dfb,  0.0,  j,    0.0,  0.0,  0.0,  0.0,  0.0,  gce,
        -dfb, -kfb, -j,    0.0,  0.0,  0.0,  0.0,  0.0, -gce,  0.0,
         0.0,  j,   -kc,   d2,   0.0,  gmc,  0.0,  0.0,  0.0,  0.0,
        -j,    0.0, -d2,  -kc,  -gmc,  0.0,  0.0,  0.0,  0.0,  0.0,
         0.0,  0.0,  0.0,  gmc, -km,   dm,  -gmb,  0.0,  0.0,  0.0,
         0.0,  0.0, -gmc,  0.0, -dm,  -km,   0.0,  0.0,  0.0,  0.0,
         0.0,  0.0,  0.0,  0.0,  0.0,  0.0,  0.0,  wb,   0.0,  0.0,
         0.0,  0.0,  0.0,  0.0,  0.0,  gmb, -wb,  -gb,   0.0,  0.0,
         0.0,  gce,  0.0,  0.0,  0.0,  0.0,  0.0,  0.0, -ge,   de,
        -gce,  0.0,  0.0,  0.0,  0.0,  0.0,  0.0,  0.0, -de,  -ge,
    ];
    Mat10::from_row_slice(&rows)
}

/// Diagonal diffusion matrix with thermal occupations at the bath frequencies.
pub fn build_diffusion(p: &SystemParams) -> Mat10 {
    build_diffusion_with(p, &PhysicalConstants::default())
}

pub fn build_diffusion_with(p: &SystemParams, consts: &PhysicalConstants) -> Mat10 {
    let t = p.temperature;
    let w_c1 = thermal_occupation(p.omega_c1, t, consts);
    let w_c2 = thermal_occupation(p.omega_c2, t, consts);
    let w_m = thermal_occupation(p.omega_m, t, consts);
    let w_b = thermal_occupation(p.omega_b, t, consts);
    let c1 = p.kappa_c * p.feedback.noise_factor() * (2.0 * w_c1 + 1.0);
    let c2 = p.kappa_c * (2.0 * w_c2 + 1.0);
    let m = p.kappa_m * (2.0 * w_m + 1.0);
    let b = p.gamma_b * (2.0 * w_b + 1.0);
    let diag = [c1, c1, c2, c2, m, m, 0.0, b, p.gamma_e, p.gamma_e];
    Mat10::from_diagonal(&diag.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stable: bool,
    /// Largest real part over the spectrum, rad/s.
    pub max_real_eig: f64,
}

/// Eigenvalue-based Routh–Hurwitz check: stable iff every eigenvalue has a negative real part.
pub fn check_stability(a: &Mat10) -> Result<StabilityReport> {
    let schur = real_schur(a)?;
    Ok(stability_from_schur(&schur))
}

fn real_schur(a: &Mat10) -> Result<Schur<f64, nalgebra::Const<DIM>>> {
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigenFailure);
    }
    Schur::try_new(*a, f64::EPSILON, 10_000).ok_or(Error::EigenFailure)
}

fn stability_from_schur(schur: &Schur<f64, nalgebra::Const<DIM>>) -> StabilityReport {
    let max_real_eig = schur.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    StabilityReport { stable: max_real_eig < 0.0, max_real_eig }
}

/// Symmetric steady-state covariance of the ten quadratures (vacuum diagonal 1/2).
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix(Mat10);

impl CovarianceMatrix {
    /// Wraps a matrix, symmetrizing it. Fails if the input is asymmetric beyond 1e-12 relative.
    pub fn new(c: Mat10) -> Result<Self> {
        let scale = c.amax().max(f64::MIN_POSITIVE);
        let asym = (c - c.transpose()).amax();
        if asym > 1e-12 * scale || c.iter().any(|x| !x.is_finite()) {
            return Err(Error::UnphysicalInput { pair: None, reason: format!("covariance asymmetric by {asym:e}") });
        }
        Ok(CovarianceMatrix((c + c.transpose()) * 0.5))
    }

    pub fn matrix(&self) -> &Mat10 {
        &self.0
    }

    pub fn into_inner(self) -> Mat10 {
        self.0
    }

    /// Smallest eigenvalue of the Hermitian matrix `C + (i/2)Ω`.
    ///
    /// Non-negative (up to round-off) for any state compatible with the
    /// uncertainty principle.
    pub fn physicality_margin(&self) -> f64 {
        let omega = symplectic_form();
        let h = SMatrix::<Complex64, DIM, DIM>::from_fn(|r, c| Complex64::new(self.0[(r, c)], 0.5 * omega[(r, c)]));
        SymmetricEigen::new(h).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_physical(&self) -> bool {
        self.physicality_margin() >= -1e-10
    }
}

/// Block-diagonal symplectic form with `[[0, 1], [-1, 0]]` per mode.
pub fn symplectic_form() -> Mat10 {
    let mut omega = Mat10::zeros();
    for k in 0..DIM / 2 {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// `‖A C + C Aᵀ + D‖_max`.
pub fn lyapunov_residual(a: &Mat10, c: &Mat10, d: &Mat10) -> f64 {
    (a * c + c * a.transpose() + d).amax()
}

/// Solves `A C + C Aᵀ + D = 0` for a stable drift matrix by Bartels–Stewart
/// on the real Schur form, followed by one step of iterative refinement.
pub fn solve_lyapunov(a: &Mat10, d: &Mat10) -> Result<CovarianceMatrix> {
    let schur = real_schur(a)?;
    let report = stability_from_schur(&schur);
    if !report.stable {
        return Err(Error::Unstable { max_real_eig: report.max_real_eig });
    }
    lyapunov_from_schur(a, d, schur)
}

pub(crate) fn stability_and_covariance(
    a: &Mat10,
    d: &Mat10,
) -> Result<(StabilityReport, Option<Result<CovarianceMatrix>>)> {
    let schur = real_schur(a)?;
    let report = stability_from_schur(&schur);
    if !report.stable {
        return Ok((report, None));
    }
    Ok((report, Some(lyapunov_from_schur(a, d, schur))))
}

fn lyapunov_from_schur(a: &Mat10, d: &Mat10, schur: Schur<f64, nalgebra::Const<DIM>>) -> Result<CovarianceMatrix> {
    let (q, t) = schur.unpack();
    let blocks = quasi_triangular_blocks(&t);
    let solve = |rhs: &Mat10| -> Result<Mat10> {
        let f = -(q.transpose() * rhs * q);
        let y = solve_quasi_triangular(&t, &blocks, &f)?;
        Ok(q * y * q.transpose())
    };
    let mut c = solve(d)?;
    c = (c + c.transpose()) * 0.5;
    let residual = a * c + c * a.transpose() + d;
    c += solve(&residual)?;
    c = (c + c.transpose()) * 0.5;
    if c.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularSystem);
    }
    CovarianceMatrix::new(c)
}

/// Diagonal block boundaries `(start, size)` of a real quasi-upper-triangular matrix.
fn quasi_triangular_blocks(t: &Mat10) -> Vec<(usize, usize)> {
    let mut blocks = Vec::with_capacity(DIM);
    let mut k = 0;
    while k < DIM {
        if k + 1 < DIM && t[(k + 1, k)] != 0.0 {
            blocks.push((k, 2));
            k += 2;
        } else {
            blocks.push((k, 1));
            k += 1;
        }
    }
    blocks
}

/// Solves `T Y + Y Tᵀ = F` block by block, starting from the bottom-right corner.
fn solve_quasi_triangular(t: &Mat10, blocks: &[(usize, usize)], f: &Mat10) -> Result<Mat10> {
    let mut y = Mat10::zeros();
    let tnorm = t.amax();
    for &(j0, nj) in blocks.iter().rev() {
        for &(i0, ni) in blocks.iter().rev() {
            let mut rhs = [[0.0; 2]; 2];
            for r in 0..ni {
                for c in 0..nj {
                    let (ri, cj) = (i0 + r, j0 + c);
                    let mut acc = f[(ri, cj)];
                    for k in (i0 + ni)..DIM {
                        acc -= t[(ri, k)] * y[(k, cj)];
                    }
                    for l in (j0 + nj)..DIM {
                        acc -= y[(ri, l)] * t[(cj, l)];
                    }
                    rhs[r][c] = acc;
                }
            }
            let x = small_sylvester(t, (i0, ni), (j0, nj), rhs, tnorm)?;
            for r in 0..ni {
                for c in 0..nj {
                    y[(i0 + r, j0 + c)] = x[r][c];
                }
            }
        }
    }
    Ok(y)
}

/// Solves `T_ii X + X T_jjᵀ = R` for blocks of size at most 2×2 via the Kronecker form.
fn small_sylvester(
    t: &Mat10,
    (i0, ni): (usize, usize),
    (j0, nj): (usize, usize),
    rhs: [[f64; 2]; 2],
    tnorm: f64,
) -> Result<[[f64; 2]; 2]> {
    let n = ni * nj;
    let mut m = [[0.0; 5]; 4];
    // Unknown index for X[r][c] is c * ni + r (column-major).
    for c in 0..nj {
        for r in 0..ni {
            let row = c * ni + r;
            for rr in 0..ni {
                m[row][c * ni + rr] += t[(i0 + r, i0 + rr)];
            }
            for cc in 0..nj {
                m[row][cc * ni + r] += t[(j0 + c, j0 + cc)];
            }
            m[row][4] = rhs[r][c];
        }
    }
    // Gaussian elimination with partial pivoting on the n×n system.
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs())).unwrap_or(col);
        if m[pivot][col].abs() <= 1e-14 * tnorm.max(f64::MIN_POSITIVE) {
            return Err(Error::SingularSystem);
        }
        m.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
            m[row][4] -= factor * m[col][4];
        }
    }
    let mut sol = [0.0; 4];
    for row in (0..n).rev() {
        let mut acc = m[row][4];
        for k in (row + 1)..n {
            acc -= m[row][k] * sol[k];
        }
        sol[row] = acc / m[row][row];
    }
    let mut x = [[0.0; 2]; 2];
    for c in 0..nj {
        for r in 0..ni {
            x[r][c] = sol[c * ni + r];
        }
    }
    Ok(x)
}

/// Fixed-step RK4 integration of `dC/dt = A C + C Aᵀ + D` from `c0`.
///
/// The fixed point of the RK4 map for this constant-forcing linear system is
/// exactly the Lyapunov solution, so agreement is limited only by transient
/// decay and round-off.
pub fn integrate_covariance_ode(a: &Mat10, d: &Mat10, c0: &Mat10, t_end: f64, dt: f64) -> Result<CovarianceMatrix> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("need dt > 0 and t_end >= 0 (dt = {dt}, t_end = {t_end})"),
        });
    }
    let at = a.transpose();
    let rhs = |c: &Mat10| a * c + c * at + d;
    let guard = 1e15 * (1.0 + c0.amax() + d.amax() * t_end);
    let steps = (t_end / dt).ceil() as usize;
    let mut c = *c0;
    let mut time = 0.0;
    for step in 0..steps {
        let h = if step + 1 == steps { t_end - time } else { dt };
        let k1 = rhs(&c);
        let k2 = rhs(&(c + k1 * (0.5 * h)));
        let k3 = rhs(&(c + k2 * (0.5 * h)));
        let k4 = rhs(&(c + k3 * h));
        c += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
        time += h;
        let size = c.amax();
        if !size.is_finite() || size > guard {
            return Err(Error::Divergence { time });
        }
    }
    CovarianceMatrix::new((c + c.transpose()) * 0.5)
}

/// Mean amplitudes of the five modes: complex for the bosonic modes, real `(q, p)` for the phonon.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanField {
    pub c1: Complex64,
    pub c2: Complex64,
    pub m: Complex64,
    pub e: Complex64,
    pub q: f64,
    pub p: f64,
}

impl MeanField {
    pub fn norm(&self) -> f64 {
        (self.c1.norm_sqr()
            + self.c2.norm_sqr()
            + self.m.norm_sqr()
            + self.e.norm_sqr()
            + self.q * self.q
            + self.p * self.p)
            .sqrt()
    }

    /// Quadrature vector `(A_c1, B_c1, A_c2, B_c2, A_m, B_m, q, p, A_e, B_e)` with `A = √2 Re`, `B = √2 Im`.
    pub fn to_quadratures(&self) -> [f64; DIM] {
        let s = std::f64::consts::SQRT_2;
        [
            s * self.c1.re,
            s * self.c1.im,
            s * self.c2.re,
            s * self.c2.im,
            s * self.m.re,
            s * self.m.im,
            self.q,
            self.p,
            s * self.e.re,
            s * self.e.im,
        ]
    }

    pub fn from_quadratures(x: &[f64; DIM]) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        MeanField {
            c1: Complex64::new(s * x[0], s * x[1]),
            c2: Complex64::new(s * x[2], s * x[3]),
            m: Complex64::new(s * x[4], s * x[5]),
            q: x[6],
            p: x[7],
            e: Complex64::new(s * x[8], s * x[9]),
        }
    }
}

impl Add for MeanField {
    type Output = MeanField;

    fn add(self, o: MeanField) -> MeanField {
        MeanField {
            c1: self.c1 + o.c1,
            c2: self.c2 + o.c2,
            m: self.m + o.m,
            e: self.e + o.e,
            q: self.q + o.q,
            p: self.p + o.p,
        }
    }
}

impl Mul<f64> for MeanField {
    type Output = MeanField;

    fn mul(self, k: f64) -> MeanField {
        MeanField { c1: self.c1 * k, c2: self.c2 * k, m: self.m * k, e: self.e * k, q: self.q * k, p: self.p * k }
    }
}

/// Noise-free nonlinear equations of motion for the mean amplitudes.
///
/// Uses the bare magnon detuning and bare magnomechanical coupling from `d`;
/// the effective `delta_m_eff`/`g_mb` fields of `p` are not read.
pub fn mean_field_rhs(p: &SystemParams, d: &DriveSpec, eps_l: f64, eps_m: f64, y: &MeanField) -> MeanField {
    let i = Complex64::i();
    let kfb = Complex64::new(p.kappa_fb(), p.delta_fb());
    let g = d.g_mb_bare;
    MeanField {
        c1: -kfb * y.c1 - i * p.g_ce * y.e - i * p.j * y.c2 + p.feedback.t_b() * eps_l,
        c2: -Complex64::new(p.kappa_c, p.delta_2) * y.c2 - i * p.j * y.c1 - i * p.g_mc * y.m,
        e: -Complex64::new(p.gamma_e, p.delta_e) * y.e - i * p.g_ce * y.c1,
        m: -Complex64::new(p.kappa_m, d.delta_m_bare) * y.m - i * p.g_mc * y.c2 - i * g * y.m * y.q + eps_m,
        q: p.omega_b * y.p,
        p: -p.omega_b * y.q - p.gamma_b * y.p - g * y.m.norm_sqr(),
    }
}

/// RK4 integration of the nonlinear mean-field equations from `y0`.
///
/// The returned state is marked converged when the vector field at the end
/// point is below `1e-6 · max(|ε_l|, |ε_m|, 1)`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_mean_field(
    p: &SystemParams,
    d: &DriveSpec,
    eps_l: f64,
    eps_m: f64,
    y0: &MeanField,
    t_end: f64,
    dt: f64,
) -> Result<crate::model::SteadyState> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("need dt > 0 and t_end >= 0 (dt = {dt}, t_end = {t_end})"),
        });
    }
    let f = |y: &MeanField| mean_field_rhs(p, d, eps_l, eps_m, y);
    let steps = (t_end / dt).ceil() as usize;
    let mut y = *y0;
    let mut time = 0.0;
    let guard = 1e30_f64.max(1e6 * y0.norm());
    for step in 0..steps {
        let h = if step + 1 == steps { t_end - time } else { dt };
        let k1 = f(&y);
        let k2 = f(&(y + k1 * (0.5 * h)));
        let k3 = f(&(y + k2 * (0.5 * h)));
        let k4 = f(&(y + k3 * h));
        y = y + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
        time += h;
        let size = y.norm();
        if !size.is_finite() || size > guard {
            return Err(Error::Divergence { time });
        }
    }
    let scale = eps_l.abs().max(eps_m.abs()).max(1.0);
    let residual = f(&y).norm() / scale;
    let g = d.g_mb_bare;
    Ok(crate::model::SteadyState {
        c1s: y.c1,
        c2s: y.c2,
        es: y.e,
        ms: y.m,
        qs: y.q,
        delta_m_eff_out: d.delta_m_bare + g * y.q,
        g_mb_out: std::f64::consts::SQRT_2 * g * y.m.norm(),
        converged: residual < 1e-6,
        residual,
    })
}
