//! Closed-form interaction-picture evolution matrix
//! `U = [[cos(w1 t), sin(w1 t) C], [-sin(w2 t) C^dagger, cos(w2 t)]]`.

use crate::algebra::{spectral_function, JCParams, OperatorBundle};
use crate::error::{Error, Result};
use crate::linalg::{block2, diag, op_norm, restrict, Basis, CMat, Region, I};
use crate::oracle::HermitianPropagator;
use crate::par::{self, Execution};

/// Diagonal frequency operators and the unit sector-crossing operators
/// `C = i H_2^{-1/4} sqrt(T B_-)` and `D = -C^dagger`.
#[derive(Debug, Clone)]
pub struct FrequencyOperators {
    pub params: JCParams,
    /// `omega_1[m] = sqrt(alpha^2 E_{m+1}^2 + hbar^2 Delta^2) / hbar`.
    pub omega1: Vec<f64>,
    /// `omega_2[m] = sqrt(alpha^2 E_m^2 + hbar^2 Delta^2) / hbar`.
    pub omega2: Vec<f64>,
    pub c_op: CMat,
    pub d_op: CMat,
    h1: Vec<f64>,
    h2: Vec<f64>,
}

fn frequency(alpha: f64, e: f64, hbar: f64, delta: f64) -> f64 {
    let a = alpha * e;
    let d = hbar * delta;
    (a * a + d * d).sqrt() / hbar
}

pub fn build_frequencies(bundle: &OperatorBundle) -> FrequencyOperators {
    let p = bundle.params;
    let n = bundle.n();
    let h1: Vec<f64> = bundle.spectrum.energies().to_vec();
    let h2: Vec<f64> = (0..n).map(|m| bundle.spectrum.shifted(m)).collect();
    let w = |e: f64| frequency(p.alpha(), e, p.hbar(), p.delta());
    let omega1 = h2.iter().map(|&e| w(e)).collect();
    let omega2 = h1.iter().map(|&e| w(e)).collect();
    let c_op = (bundle.h2_pow(-0.25) * &bundle.sqrt_tb_minus) * I;
    let d_op = -c_op.adjoint();
    FrequencyOperators { params: p, omega1, omega2, c_op, d_op, h1, h2 }
}

impl FrequencyOperators {
    pub fn n(&self) -> usize {
        self.omega1.len()
    }

    pub fn omega1_op(&self) -> CMat {
        diag(&self.omega1)
    }

    pub fn omega2_op(&self) -> CMat {
        diag(&self.omega2)
    }

    pub fn h1(&self) -> &[f64] {
        &self.h1
    }

    pub fn h2(&self) -> &[f64] {
        &self.h2
    }

    /// `cos`/`sin` of `omega_j t` as diagonal matrices.
    pub fn trig(&self, j: usize, t: f64) -> (CMat, CMat) {
        let w = if j == 1 { &self.omega1 } else { &self.omega2 };
        let wt = diag(w);
        let cos = spectral_function(&wt, |x| (x * t).cos()).expect("diagonal");
        let sin = spectral_function(&wt, |x| (x * t).sin()).expect("diagonal");
        (cos, sin)
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionMatrix {
    pub t: f64,
    pub u: CMat,
    /// 2x2 restrictions to `(e_m, g_{m+1})`, `m = 0..=N-2`.
    pub blocks: Vec<CMat>,
}

impl EvolutionMatrix {
    fn from_full(t: f64, u: CMat) -> Self {
        let n = u.nrows() / 2;
        let basis = Basis::new(n);
        let blocks = (0..n - 1)
            .map(|m| {
                let (i, j) = basis.block(m);
                let idx = [i, j];
                CMat::from_fn(2, 2, |r, s| u[(idx[r], idx[s])])
            })
            .collect();
        EvolutionMatrix { t, u, blocks }
    }

    /// Rotation angle `theta_m = omega_1[m] t` recovered from block `m`.
    pub fn angle(&self, m: usize) -> f64 {
        let b = &self.blocks[m];
        b[(0, 1)].norm().atan2(b[(0, 0)].re)
    }
}

fn assemble(c1: &CMat, s1: &CMat, c2: &CMat, s2: &CMat, c_op: &CMat) -> CMat {
    block2(c1, &(s1 * c_op), &-(s2 * c_op.adjoint()), c2)
}

pub fn evolution_matrix(freqs: &FrequencyOperators, t: f64) -> EvolutionMatrix {
    let (c1, s1) = freqs.trig(1, t);
    let (c2, s2) = freqs.trig(2, t);
    EvolutionMatrix::from_full(t, assemble(&c1, &s1, &c2, &s2, &freqs.c_op))
}

/// The resonant form with `omega_j` replaced by `nu_j / 2 = alpha H_j / hbar`.
pub fn resonant_evolution(freqs: &FrequencyOperators, t: f64) -> Result<EvolutionMatrix> {
    let p = freqs.params;
    if !p.is_resonant() {
        return Err(Error::NotResonant(p.delta()));
    }
    let half = |h: &[f64]| diag(&h.iter().map(|e| p.alpha() * e / p.hbar()).collect::<Vec<_>>());
    let (n1, n2) = (half(freqs.h2()), half(freqs.h1()));
    let f = |op: &CMat, g: fn(f64) -> f64| spectral_function(op, |x| g(x * t)).expect("diagonal");
    let u = assemble(&f(&n1, f64::cos), &f(&n1, f64::sin), &f(&n2, f64::cos), &f(&n2, f64::sin), &freqs.c_op);
    debug_assert!(crate::linalg::max_abs(&(&u - &evolution_matrix(freqs, t).u)) < 1e-12);
    Ok(EvolutionMatrix::from_full(t, u))
}

/// `max(|U^dagger U - I|, |U U^dagger - I|)` in operator norm on `region`.
pub fn unitarity_defect(u: &CMat, region: Region) -> f64 {
    let idx = Basis::new(u.nrows() / 2).indices(region);
    let r = restrict(u, &idx);
    let id = CMat::identity(idx.len(), idx.len());
    let a = op_norm(&(r.adjoint() * &r - &id));
    let b = op_norm(&(&r * r.adjoint() - &id));
    a.max(b)
}

/// Operator-norm distance on `region` between the closed-form matrix and
/// `exp(-i H_int t / hbar)`, for each time.
pub fn fidelity_vs_oracle(
    bundle: &OperatorBundle,
    freqs: &FrequencyOperators,
    times: &[f64],
    region: Region,
    exec: Execution,
) -> Result<Vec<f64>> {
    let prop = HermitianPropagator::new(&bundle.h_int, bundle.params.hbar())?;
    let idx = bundle.basis.indices(region);
    Ok(par::map(exec, times, |&t| {
        let d = evolution_matrix(freqs, t).u - prop.at(t);
        op_norm(&restrict(&d, &idx))
    }))
}

/// `count` equally spaced points on `[start, stop]`.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![start],
        _ => (0..count).map(|k| start + (stop - start) * k as f64 / (count - 1) as f64).collect(),
    }
}
