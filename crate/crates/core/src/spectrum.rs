//! Dressed eigenvalues and eigenstates of the full Hamiltonian.
//!
//! `H_total` splits into 2x2 blocks on `(e_m, g_{m+1})` for `m <= N-2`,
//! plus two singlets: the uncoupled ground level `g_0` and the truncation
//! edge `e_{N-1}`. On block `m` the Hamiltonian is
//! `E_{m+1} I + alpha E_{m+1} sigma_1 + hbar Delta sigma_3`.

use serde::Serialize;

use crate::algebra::{JCParams, LadderSpectrum, OperatorBundle};
use crate::error::{Error, Result};
use crate::linalg::{c, Basis, CVec};
use crate::par::{self, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DressedPair {
    pub m: usize,
    pub e_plus: f64,
    pub e_minus: f64,
    /// Interaction eigenvalues `+-sqrt(alpha^2 E^2 + hbar^2 Delta^2)`.
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub c_m_plus: f64,
    pub c_m_minus: f64,
    pub c_m1_plus: f64,
    pub c_m1_minus: f64,
    pub psi_plus: CVec,
    pub psi_minus: CVec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HOLimitData {
    pub omega: f64,
    pub omega0: f64,
    pub delta_m: f64,
    pub gamma_m_plus: f64,
    pub gamma_m_minus: f64,
}

fn check_block(m: usize, spectrum: &LadderSpectrum) -> Result<f64> {
    let n = spectrum.dim();
    if m + 2 > n {
        return Err(Error::BlockOutOfRange { m, max: n - 2 });
    }
    Ok(spectrum.energy(m + 1))
}

fn interaction_gap(e: f64, params: &JCParams) -> f64 {
    let a = params.alpha() * e;
    let d = params.hbar() * params.delta();
    (a * a + d * d).sqrt()
}

/// `(E_+, E_-)` of block `m`.
pub fn dressed_eigenvalues(m: usize, spectrum: &LadderSpectrum, params: &JCParams) -> Result<(f64, f64)> {
    let e = check_block(m, spectrum)?;
    let lam = interaction_gap(e, params);
    Ok((e + lam, e - lam))
}

/// `(C_m^+, C_m^-, C_{m+1}^+, C_{m+1}^-)` of block `m`.
///
/// Built from `rho_+- = (sqrt(E^2 + b^2) -+ b) / E` with `b = hbar Delta / |alpha|`;
/// for `alpha > 0` this is the usual `beta`. Negative couplings flip the
/// sign of the lower component in [`dressed_state`] instead.
pub fn dressed_coefficients(
    m: usize,
    spectrum: &LadderSpectrum,
    params: &JCParams,
) -> Result<(f64, f64, f64, f64)> {
    let e = check_block(m, spectrum)?;
    if e == 0.0 {
        return Err(Error::DegenerateLadder(m + 1));
    }
    let b = params.hbar() * params.delta() / params.alpha().abs();
    let root = (e * e + b * b).sqrt();
    // rho_+ rho_- = 1; form the small one as a reciprocal to avoid cancellation
    let (rho_p, rho_m) = if b >= 0.0 {
        (e / (root + b), (root + b) / e)
    } else {
        ((root - b) / e, e / (root - b))
    };
    let norm = |rho: f64| (1.0 + rho * rho).sqrt();
    let (np, nm) = (norm(rho_p), norm(rho_m));
    Ok((1.0 / np, 1.0 / nm, rho_p / np, rho_m / nm))
}

/// `psi_+- = C_m^+- e_m +- C_{m+1}^+- g_{m+1}` as a `2N` vector.
pub fn dressed_state(m: usize, spectrum: &LadderSpectrum, params: &JCParams, branch: Branch) -> Result<CVec> {
    let (cmp, cmm, c1p, c1m) = dressed_coefficients(m, spectrum, params)?;
    let basis = Basis::new(spectrum.dim());
    let (upper, lower) = match branch {
        Branch::Plus => (cmp, c1p),
        Branch::Minus => (cmm, -c1m),
    };
    let lower = lower * params.alpha().signum();
    let mut v = CVec::zeros(basis.dim());
    let (i, j) = basis.block(m);
    v[i] = c(upper);
    v[j] = c(lower);
    Ok(v)
}

pub fn dressed_pair(m: usize, spectrum: &LadderSpectrum, params: &JCParams) -> Result<DressedPair> {
    let (e_plus, e_minus) = dressed_eigenvalues(m, spectrum, params)?;
    let (c_m_plus, c_m_minus, c_m1_plus, c_m1_minus) = dressed_coefficients(m, spectrum, params)?;
    let lam = interaction_gap(spectrum.energy(m + 1), params);
    Ok(DressedPair {
        m,
        e_plus,
        e_minus,
        lambda_plus: lam,
        lambda_minus: -lam,
        c_m_plus,
        c_m_minus,
        c_m1_plus,
        c_m1_minus,
        psi_plus: dressed_state(m, spectrum, params, Branch::Plus)?,
        psi_minus: dressed_state(m, spectrum, params, Branch::Minus)?,
    })
}

/// Every dressed pair `m = 0..=N-2`.
pub fn dressed_pairs(spectrum: &LadderSpectrum, params: &JCParams, exec: Execution) -> Vec<DressedPair> {
    let ms: Vec<usize> = (0..spectrum.dim() - 1).collect();
    par::map(exec, &ms, |&m| dressed_pair(m, spectrum, params).expect("m in range"))
}

/// Closed-form harmonic-oscillator energies and mixing ratios for block `m`
/// with field frequency `omega` and transition frequency `omega0`.
/// `alpha` and `hbar` come from `params`; its detuning is not used.
pub fn ho_limit_eigensystem(
    m: usize,
    omega: f64,
    omega0: f64,
    params: &JCParams,
) -> Result<(f64, f64, HOLimitData)> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidFrequency(omega));
    }
    let (alpha, hbar) = (params.alpha(), params.hbar());
    let k = (m + 1) as f64;
    let det = omega - omega0;
    let root = ((alpha * omega * k).powi(2) + det * det).sqrt();
    let e_plus = k * hbar * omega + hbar * root;
    let e_minus = k * hbar * omega - hbar * root;
    let delta_m = det / (alpha * omega * k);
    let s = delta_m.hypot(1.0);
    let (gamma_m_plus, gamma_m_minus) = if delta_m >= 0.0 {
        (1.0 / (s + delta_m), s + delta_m)
    } else {
        (s - delta_m, 1.0 / (s - delta_m))
    };
    let data = HOLimitData { omega, omega0, delta_m, gamma_m_plus, gamma_m_minus };
    Ok((e_plus, e_minus, data))
}

/// The field ground level with the atom down, `g_0`. It has no partner in
/// the coupling and is an exact eigenstate of `H_total`.
pub fn uncoupled_ground(bundle: &OperatorBundle) -> (f64, CVec) {
    let idx = bundle.basis.g(0);
    (bundle.h_total[(idx, idx)].re, bundle.basis.unit(idx))
}

/// The truncation-edge level `e_{N-1}`. Its partner `g_N` lies outside the
/// basis, so it is an eigenstate of the truncated matrix only.
pub fn edge_level(bundle: &OperatorBundle) -> (f64, CVec) {
    let idx = bundle.basis.e(bundle.n() - 1);
    (bundle.h_total[(idx, idx)].re, bundle.basis.unit(idx))
}
