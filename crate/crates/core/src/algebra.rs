//! Shape-invariant ladder spectra and the truncated operator matrices of the
//! intensity-dependent Jaynes-Cummings Hamiltonian.
//!
//! The reparametrization operator `T` is never materialized. The excited
//! sector basis is taken to be `e_m = T|m>`, so every `T`-conjugation is an
//! index relabeling and sector-crossing operators are plain `N x N` matrices
//! with rows in the excited sector and columns in the ground sector.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{block2, c, diag, sigma3, Basis, CMat, ONE, ZERO};

/// Sign of the operator root `sqrt(T B_-)`.
///
/// The negative root makes the closed-form evolution matrix coincide with
/// `exp(-i H_int t / hbar)` at resonance. Every identity that involves the
/// root quadratically is independent of this choice.
pub const ROOT_BRANCH: f64 = -1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelKind {
    /// Constant remainder `R_k = hbar * omega`.
    Harmonic { omega: f64 },
    /// Geometric remainders `R_k = r1 * q^(k-1)`.
    SelfSimilar { r1: f64, q: f64 },
    /// Remainders `R_1, R_2, ...` listed directly.
    Explicit { remainders: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeInvariantModel {
    pub kind: ModelKind,
    pub hbar: f64,
}

impl ShapeInvariantModel {
    pub fn harmonic(omega: f64, hbar: f64) -> Self {
        ShapeInvariantModel { kind: ModelKind::Harmonic { omega }, hbar }
    }

    pub fn self_similar(r1: f64, q: f64, hbar: f64) -> Self {
        ShapeInvariantModel { kind: ModelKind::SelfSimilar { r1, q }, hbar }
    }

    pub fn explicit(remainders: Vec<f64>, hbar: f64) -> Self {
        ShapeInvariantModel { kind: ModelKind::Explicit { remainders }, hbar }
    }

    pub fn is_harmonic(&self) -> bool {
        matches!(self.kind, ModelKind::Harmonic { .. })
    }

    /// `R_k` for `k >= 1`, or `None` when an explicit list runs out.
    pub fn remainder(&self, k: usize) -> Option<f64> {
        debug_assert!(k >= 1);
        match &self.kind {
            ModelKind::Harmonic { omega } => Some(self.hbar * omega),
            ModelKind::SelfSimilar { r1, q } => Some(r1 * q.powi(k as i32 - 1)),
            ModelKind::Explicit { remainders } => remainders.get(k - 1).copied(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::InvalidModel(format!("hbar must be positive, got {}", self.hbar)));
        }
        match &self.kind {
            ModelKind::Harmonic { omega } if !(*omega > 0.0 && omega.is_finite()) => {
                Err(Error::InvalidModel(format!("harmonic omega must be positive, got {omega}")))
            }
            ModelKind::SelfSimilar { q, .. } if !(*q > 0.0 && q.is_finite()) => {
                Err(Error::InvalidModel(format!("self-similar ratio q must be positive, got {q}")))
            }
            _ => Ok(()),
        }
    }
}

/// Cumulative energies `E_0 = 0 < E_1 < ... < E_{N-1}` of `H_1`, plus the
/// first level beyond the cutoff (used only on the truncation edge of `H_2`).
#[derive(Debug, Clone, PartialEq)]
pub struct LadderSpectrum {
    energies: Vec<f64>,
    edge: f64,
    model: ShapeInvariantModel,
}

impl LadderSpectrum {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, m: usize) -> f64 {
        self.energies[m]
    }

    /// `E_{m+1}`: the `H_2` eigenvalue on `e_m`.
    pub fn shifted(&self, m: usize) -> f64 {
        if m + 1 < self.dim() {
            self.energies[m + 1]
        } else {
            self.edge
        }
    }

    pub fn edge_energy(&self) -> f64 {
        self.edge
    }

    pub fn model(&self) -> &ShapeInvariantModel {
        &self.model
    }
}

/// `E_m = sum_{k=1}^{m} R_k` for `m = 0..N-1`.
///
/// The edge energy `E_N` uses `R_N` when the model supplies it and repeats
/// `R_{N-1}` otherwise.
pub fn build_spectrum(model: &ShapeInvariantModel, n: usize) -> Result<LadderSpectrum> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    model.validate()?;
    if let ModelKind::Explicit { remainders } = &model.kind {
        if remainders.len() < n - 1 {
            return Err(Error::MissingRemainders { given: remainders.len(), needed: n - 1, dim: n });
        }
    }
    let mut energies = Vec::with_capacity(n);
    energies.push(0.0);
    let mut last = 0.0;
    for k in 1..n {
        let r = model.remainder(k).expect("length checked above");
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::NonPositiveRemainder(k));
        }
        last = r;
        energies.push(energies[k - 1] + r);
    }
    let r_edge = match model.remainder(n) {
        Some(r) if !(r > 0.0) || !r.is_finite() => return Err(Error::NonPositiveRemainder(n)),
        Some(r) => r,
        None => last,
    };
    let edge = energies[n - 1] + r_edge;
    for m in 1..n {
        if energies[m] <= energies[m - 1] {
            // positive remainders that vanish below roundoff
            return Err(Error::NonPositiveRemainder(m));
        }
    }
    Ok(LadderSpectrum { energies, edge, model: model.clone() })
}

/// Coupling `alpha`, detuning `Delta` and `hbar`. `beta` and `gamma` are
/// always derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JCParams {
    alpha: f64,
    delta: f64,
    hbar: f64,
}

impl JCParams {
    pub fn new(alpha: f64, delta: f64, hbar: f64) -> Result<Self> {
        if alpha == 0.0 || !alpha.is_finite() {
            return Err(Error::ZeroCoupling);
        }
        if !delta.is_finite() {
            return Err(Error::InvalidModel(format!("detuning must be finite, got {delta}")));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidModel(format!("hbar must be positive, got {hbar}")));
        }
        Ok(JCParams { alpha, delta, hbar })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `beta = hbar * Delta / alpha`.
    pub fn beta(&self) -> f64 {
        self.hbar * self.delta / self.alpha
    }

    /// `gamma = 4 alpha^2 beta / hbar^2`.
    pub fn gamma(&self) -> f64 {
        4.0 * self.alpha * self.alpha * self.beta() / (self.hbar * self.hbar)
    }

    pub fn is_resonant(&self) -> bool {
        self.delta == 0.0
    }
}

/// Truncated matrix realizations of every operator in the Hamiltonian.
#[derive(Debug, Clone)]
pub struct OperatorBundle {
    pub spectrum: Arc<LadderSpectrum>,
    pub params: JCParams,
    pub basis: Basis,
    /// `B_+`: `|m> -> sqrt(E_{m+1}) |m+1>`.
    pub b_plus: CMat,
    pub b_minus: CMat,
    pub h1: CMat,
    pub h2: CMat,
    /// Normalized raising operator `H_1^{-1/2} B_+`.
    pub q_dagger: CMat,
    /// `T B_-`, ground to excited sector: `g_{m+1} -> sqrt(E_{m+1}) e_m`.
    pub tb_minus: CMat,
    /// `sqrt(T B_-)`: `g_{m+1} -> ROOT_BRANCH * E_{m+1}^{1/4} e_m`.
    pub sqrt_tb_minus: CMat,
    /// `sqrt(B_+ T^dagger)`, the adjoint of `sqrt_tb_minus`.
    pub sqrt_bt_plus: CMat,
    /// Intensity-dependent coupling block `T B_- sqrt(H_1)`:
    /// `g_{m+1} -> E_{m+1} e_m`.
    pub coupling: CMat,
    pub s_i: CMat,
    pub h_int: CMat,
    pub h_o: CMat,
    pub h_total: CMat,
    pub sigma3: CMat,
    pub sigma_plus: CMat,
    pub sigma_minus: CMat,
}

pub fn build_operators(spectrum: Arc<LadderSpectrum>, params: JCParams) -> OperatorBundle {
    let n = spectrum.dim();
    let basis = Basis::new(n);
    let e = |m: usize| spectrum.energy(m);

    let mut b_plus = CMat::zeros(n, n);
    let mut q_dagger = CMat::zeros(n, n);
    let mut tb_minus = CMat::zeros(n, n);
    let mut sqrt_tb_minus = CMat::zeros(n, n);
    let mut coupling = CMat::zeros(n, n);
    for m in 0..n - 1 {
        let em1 = e(m + 1);
        b_plus[(m + 1, m)] = c(em1.sqrt());
        q_dagger[(m + 1, m)] = ONE;
        tb_minus[(m, m + 1)] = c(em1.sqrt());
        sqrt_tb_minus[(m, m + 1)] = c(ROOT_BRANCH * em1.powf(0.25));
        coupling[(m, m + 1)] = c(em1);
    }
    let b_minus = b_plus.adjoint();
    let sqrt_bt_plus = sqrt_tb_minus.adjoint();

    let h1 = diag(spectrum.energies());
    let h2_diag: Vec<f64> = (0..n).map(|m| spectrum.shifted(m)).collect();
    let h2 = diag(&h2_diag);

    let zero = CMat::zeros(n, n);
    let ident = CMat::identity(n, n);
    let s_i = block2(&zero, &coupling, &coupling.adjoint(), &zero);
    let sig3 = sigma3(n);
    let hbar_delta = params.hbar() * params.delta();
    let h_int = s_i.scale(params.alpha()) + sig3.scale(hbar_delta);
    let h_o = block2(&h2, &zero, &zero, &h1);
    let h_total = &h_o + &h_int;
    let sigma_plus = block2(&zero, &ident, &zero, &zero);
    let sigma_minus = sigma_plus.adjoint();

    OperatorBundle {
        spectrum,
        params,
        basis,
        b_plus,
        b_minus,
        h1,
        h2,
        q_dagger,
        tb_minus,
        sqrt_tb_minus,
        sqrt_bt_plus,
        coupling,
        s_i,
        h_int,
        h_o,
        h_total,
        sigma3: sig3,
        sigma_plus,
        sigma_minus,
    }
}

impl OperatorBundle {
    pub fn n(&self) -> usize {
        self.basis.n
    }

    /// `H_1^p` with `0^p = 0`.
    pub fn h1_pow(&self, p: f64) -> CMat {
        spectral_function(&self.h1, |x| if x > 0.0 { x.powf(p) } else { 0.0 })
            .expect("H1 is diagonal")
    }

    /// `H_2^p` with `0^p = 0`.
    pub fn h2_pow(&self, p: f64) -> CMat {
        spectral_function(&self.h2, |x| if x > 0.0 { x.powf(p) } else { 0.0 })
            .expect("H2 is diagonal")
    }

    /// The 2x2 restriction of a `2N x 2N` matrix to block `(e_m, g_{m+1})`.
    pub fn block_of(&self, a: &CMat, m: usize) -> CMat {
        let (i, j) = self.basis.block(m);
        let idx = [i, j];
        CMat::from_fn(2, 2, |r, s| a[(idx[r], idx[s])])
    }
}

/// Real diagonal of an exactly diagonal matrix.
pub fn diagonal_values(op: &CMat) -> Result<Vec<f64>> {
    for r in 0..op.nrows() {
        for col in 0..op.ncols() {
            let z = op[(r, col)];
            if r != col && z != ZERO {
                return Err(Error::NotDiagonal { row: r, col, value: z.norm() });
            }
        }
    }
    Ok((0..op.nrows()).map(|i| op[(i, i)].re).collect())
}

/// Apply `f` entrywise to the diagonal of an exactly diagonal operator.
pub fn spectral_function(op: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let d = diagonal_values(op)?;
    Ok(diag(&d.into_iter().map(f).collect::<Vec<_>>()))
}
