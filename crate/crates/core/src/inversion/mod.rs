//! Population inversion `sigma_3(t) = sigma^H(t) + sigma^P(t)`.
//!
//! Row `r` of `sigma_3` obeys `x'' + nu_r^2 x = F_r(t)` with
//! `F(t) = gamma U(t)^dagger S_i U(t)`, `U` the closed-form evolution
//! matrix. The particular solution vanishes with its derivative at `t = 0`
//! and is computed by one of three backends:
//!
//! * `series`: variation of parameters with the double-series kernels,
//! * `quadrature`: Gauss-Legendre on the Green-function integral of `F`,
//! * `ho_closed_form`: trigonometric Green kernels (harmonic models only).
//!
//! The series and closed-form backends expand `F` into eight products
//! `P T_a(omega_a s) M T_b(omega_b s) Q` with constant sparse `P, M, Q` and
//! diagonal trigonometric factors, then integrate each sparse path exactly.

pub mod closed_form;
pub mod printed;
pub mod series;

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::OperatorBundle;
use crate::error::{Error, Result};
use crate::evolution::{build_frequencies, evolution_matrix, FrequencyOperators};
use crate::linalg::{c, hermitian_defect, nonzeros, op_norm, scale_rows, vec_norm, CMat, CVec, I, ZERO};
use crate::oracle::{integrate_with, DEFAULT_NODE_BUDGET};
use crate::par::{self, Execution};

use series::{Kernels, Kind, Sign};

/// `nu_1 = 2 alpha H_2 / hbar` and `nu_2 = 2 alpha H_1 / hbar` (diagonals).
#[derive(Debug, Clone, PartialEq)]
pub struct NuOperators {
    pub nu1: Vec<f64>,
    pub nu2: Vec<f64>,
}

impl NuOperators {
    /// `nu` of row `idx` of a `2N x 2N` matrix.
    pub fn row(&self, idx: usize) -> f64 {
        let n = self.nu1.len();
        if idx < n {
            self.nu1[idx]
        } else {
            self.nu2[idx - n]
        }
    }

    pub fn sector(&self, j: usize) -> &[f64] {
        if j == 1 {
            &self.nu1
        } else {
            &self.nu2
        }
    }
}

pub fn build_nu(bundle: &OperatorBundle) -> NuOperators {
    let p = bundle.params;
    let k = 2.0 * p.alpha() / p.hbar();
    let n = bundle.n();
    NuOperators {
        nu1: (0..n).map(|m| k * bundle.spectrum.shifted(m)).collect(),
        nu2: bundle.spectrum.energies().iter().map(|e| k * e).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Backend {
    Series { order: usize },
    Quadrature { tol: f64 },
    HoClosedForm,
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Series { .. } => "series",
            Backend::Quadrature { .. } => "quadrature",
            Backend::HoClosedForm => "ho_closed_form",
        }
    }
}

/// How a particular solution was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Series { order: usize, bound: f64 },
    Quadrature { nodes: usize, change: f64 },
    HoClosedForm,
}

impl Provenance {
    /// Error estimate reported alongside results.
    pub fn truncation_bound(&self) -> f64 {
        match *self {
            Provenance::Series { bound, .. } => bound,
            Provenance::Quadrature { change, .. } => change,
            Provenance::HoClosedForm => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

impl Trig {
    fn eval(self, x: f64) -> f64 {
        match self {
            Trig::Cos => x.cos(),
            Trig::Sin => x.sin(),
        }
    }
}

/// One product `coef * P T_a(omega_{fa} t) M T_b(omega_{fb} t) Q` contributing
/// to sector block `(j, k)` of `F`. `fa`, `fb` select `omega_1` or `omega_2`.
#[derive(Debug, Clone)]
pub struct ForcingTerm {
    pub block: (usize, usize),
    pub coef: Complex64,
    pub left: CMat,
    pub a: (Trig, usize),
    pub mid: CMat,
    pub b: (Trig, usize),
    pub right: CMat,
}

/// A single nonzero chain `P[r,i] M[i,k] Q[k,c]`.
#[derive(Debug, Clone, Copy)]
struct Path {
    r: usize,
    c: usize,
    i: usize,
    k: usize,
    weight: Complex64,
}

#[derive(Debug, Clone)]
struct CompiledTerm {
    term: ForcingTerm,
    paths: Vec<Path>,
}

fn compile(term: ForcingTerm) -> CompiledTerm {
    let n = term.mid.nrows();
    let mut by_row: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); n];
    for (i, k, z) in nonzeros(&term.mid) {
        by_row[i].push((k, z));
    }
    let mut q_rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); n];
    for (k, col, z) in nonzeros(&term.right) {
        q_rows[k].push((col, z));
    }
    let mut paths = Vec::new();
    for (r, i, p) in nonzeros(&term.left) {
        for &(k, m) in &by_row[i] {
            for &(col, q) in &q_rows[k] {
                paths.push(Path { r, c: col, i, k, weight: p * m * q });
            }
        }
    }
    CompiledTerm { term, paths }
}

/// Everything needed to evaluate `sigma_3(t)` for one bundle.
#[derive(Debug, Clone)]
pub struct Inversion {
    pub bundle: OperatorBundle,
    pub freqs: FrequencyOperators,
    pub nus: NuOperators,
    pub exec: Execution,
    terms: Vec<CompiledTerm>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particular {
    pub value: CMat,
    pub provenance: Provenance,
}

impl Inversion {
    pub fn new(bundle: OperatorBundle) -> Self {
        let freqs = build_frequencies(&bundle);
        let nus = build_nu(&bundle);
        let terms = forcing_terms(&bundle, &freqs).into_iter().map(compile).collect();
        Inversion { bundle, freqs, nus, exec: Execution::default(), terms }
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn n(&self) -> usize {
        self.bundle.n()
    }

    pub fn gamma(&self) -> f64 {
        self.bundle.params.gamma()
    }

    fn omega(&self, f: usize) -> &[f64] {
        if f == 1 {
            &self.freqs.omega1
        } else {
            &self.freqs.omega2
        }
    }

    /// `gamma U^dagger S_i U` by direct matrix products.
    pub fn forcing_matrix(&self, t: f64) -> CMat {
        let u = evolution_matrix(&self.freqs, t).u;
        (u.adjoint() * &self.bundle.s_i * &u).scale(self.gamma())
    }

    /// `F(t)` re-assembled from the product decomposition.
    pub fn forcing_from_terms(&self, t: f64) -> CMat {
        let n = self.n();
        let mut out = CMat::zeros(2 * n, 2 * n);
        for ct in &self.terms {
            let tm = &ct.term;
            let (j, k) = tm.block;
            for p in &ct.paths {
                let ta = tm.a.0.eval(self.omega(tm.a.1)[p.i] * t);
                let tb = tm.b.0.eval(self.omega(tm.b.1)[p.k] * t);
                out[((j - 1) * n + p.r, (k - 1) * n + p.c)] += tm.coef * p.weight * (ta * tb);
            }
        }
        out
    }

    /// `sigma^P(t)`, zero with zero derivative at `t = 0`.
    pub fn particular_solution(&self, t: f64, backend: Backend) -> Result<Particular> {
        let n = self.n();
        if let Backend::HoClosedForm = backend {
            if !self.bundle.spectrum.model().is_harmonic() {
                return Err(Error::BackendDomainError {
                    backend: "ho_closed_form",
                    reason: "the closed form applies to harmonic models only".into(),
                });
            }
        }
        if self.gamma() == 0.0 {
            let provenance = match backend {
                Backend::Series { order } => Provenance::Series { order, bound: 0.0 },
                Backend::Quadrature { .. } => Provenance::Quadrature { nodes: 0, change: 0.0 },
                Backend::HoClosedForm => Provenance::HoClosedForm,
            };
            return Ok(Particular { value: CMat::zeros(2 * n, 2 * n), provenance });
        }
        match backend {
            Backend::Series { order } => self.series_particular(t, order),
            Backend::Quadrature { tol } => self.quadrature_particular(t, tol),
            Backend::HoClosedForm => Ok(Particular { value: self.closed_form_particular(t), provenance: Provenance::HoClosedForm }),
        }
    }

    fn quadrature_particular(&self, t: f64, tol: f64) -> Result<Particular> {
        let dim = 2 * self.n();
        let nus: Vec<f64> = (0..dim).map(|r| self.nus.row(r)).collect();
        let green = |nu: f64, u: f64| if nu == 0.0 { u } else { (nu * u).sin() / nu };
        let r = integrate_with(
            |s| {
                let w: Vec<f64> = nus.iter().map(|&nu| green(nu, t - s)).collect();
                scale_rows(&w, &self.forcing_matrix(s))
            },
            t,
            tol,
            DEFAULT_NODE_BUDGET,
            self.exec,
        )?;
        Ok(Particular { value: r.value, provenance: Provenance::Quadrature { nodes: r.nodes, change: r.change } })
    }

    fn closed_form_particular(&self, t: f64) -> CMat {
        use closed_form::{green_c, green_s};
        let n = self.n();
        let mut out = CMat::zeros(2 * n, 2 * n);
        for ct in &self.terms {
            let tm = &ct.term;
            let (j, k) = tm.block;
            for p in &ct.paths {
                let nu = self.nus.sector(j)[p.r];
                let a = self.omega(tm.a.1)[p.i];
                let b = self.omega(tm.b.1)[p.k];
                let v = match (tm.a.0, tm.b.0) {
                    (Trig::Cos, Trig::Cos) => 0.5 * (green_c(t, b + a, nu) + green_c(t, b - a, nu)),
                    (Trig::Sin, Trig::Sin) => 0.5 * (green_c(t, b - a, nu) - green_c(t, b + a, nu)),
                    (Trig::Sin, Trig::Cos) => 0.5 * (green_s(t, b + a, nu) - green_s(t, b - a, nu)),
                    (Trig::Cos, Trig::Sin) => 0.5 * (green_s(t, b + a, nu) + green_s(t, b - a, nu)),
                };
                out[((j - 1) * n + p.r, (k - 1) * n + p.c)] += tm.coef * p.weight * v;
            }
        }
        out
    }

    fn series_particular(&self, t: f64, order: usize) -> Result<Particular> {
        let n = self.n();
        // every kernel argument pair (x, w) the paths need
        let mut needed: BTreeMap<(u64, u64), (f64, f64)> = BTreeMap::new();
        let mut push = |x: f64, w: f64| {
            needed.insert((x.to_bits(), w.to_bits()), (x, w));
        };
        for ct in &self.terms {
            let tm = &ct.term;
            for p in &ct.paths {
                let nu = self.nus.sector(tm.block.0)[p.r];
                if nu == 0.0 {
                    continue;
                }
                let q = self.omega(tm.a.1)[p.i];
                let r = self.omega(tm.b.1)[p.k];
                push(nu - q, r);
                push(nu + q, r);
            }
        }
        let args: Vec<(f64, f64)> = needed.values().copied().collect();
        for &(x, w) in &args {
            series::check_argument(x.abs(), t)?;
            series::check_argument(w.abs(), t)?;
        }
        let values = par::map(self.exec, &args, |&(x, w)| series::scalar_kernels(x, w, t, order));
        let table: BTreeMap<(u64, u64), Kernels> =
            needed.keys().copied().zip(values).collect();
        let mut lookup = |x: f64, w: f64| table[&(x.to_bits(), w.to_bits())];

        let mut out = CMat::zeros(2 * n, 2 * n);
        let mut bound = 0.0;
        for ct in &self.terms {
            let tm = &ct.term;
            let (j, k) = tm.block;
            let y_is_sin = tm.b.0 == Trig::Sin;
            for p in &ct.paths {
                let nu = self.nus.sector(j)[p.r];
                if nu == 0.0 {
                    continue;
                }
                let q = self.omega(tm.a.1)[p.i];
                let r = self.omega(tm.b.1)[p.k];
                let g = |x_sin: bool, sign: Sign, lk: &mut dyn FnMut(f64, f64) -> Kernels| {
                    let kind = Kind::from_trig(x_sin, y_is_sin);
                    let (a, b) = (lk(nu - q, r), lk(nu + q, r));
                    let v = match sign {
                        Sign::Plus => a.get(kind) + b.get(kind),
                        Sign::Minus => a.get(kind) - b.get(kind),
                    };
                    (v, a.bound + b.bound)
                };
                // int cos(nu s) T_a T_b and int sin(nu s) T_a T_b
                let ((iy, by), (iz, bz)) = match tm.a.0 {
                    Trig::Cos => {
                        let (y, by) = g(false, Sign::Plus, &mut lookup);
                        let (z, bz) = g(true, Sign::Plus, &mut lookup);
                        ((0.5 * y, by), (0.5 * z, bz))
                    }
                    Trig::Sin => {
                        let (y, by) = g(true, Sign::Minus, &mut lookup);
                        let (z, bz) = g(false, Sign::Minus, &mut lookup);
                        ((-0.5 * y, by), (0.5 * z, bz))
                    }
                };
                let (zt, yt) = ((nu * t).sin(), (nu * t).cos());
                let v = (zt * iy - yt * iz) / nu;
                let amp = (tm.coef * p.weight).norm();
                bound += amp * 0.5 * (zt.abs() * by + yt.abs() * bz) / nu.abs();
                out[((j - 1) * n + p.r, (k - 1) * n + p.c)] += tm.coef * p.weight * v;
            }
        }
        Ok(Particular { value: out, provenance: Provenance::Series { order, bound } })
    }

    /// `cos(nu t) sigma_3(0) + (2 i alpha / hbar) sin(nu t) nu^{-1} S_i sigma_3(0)`,
    /// rows scaled by their own `nu` (`sin(nu t) / nu -> t` at `nu = 0`).
    pub fn homogeneous(&self, t: f64, sigma0: &CMat) -> CMat {
        let dim = 2 * self.n();
        let p = self.bundle.params;
        let cosv: Vec<f64> = (0..dim).map(|r| (self.nus.row(r) * t).cos()).collect();
        let sinv: Vec<f64> = (0..dim)
            .map(|r| {
                let nu = self.nus.row(r);
                if nu == 0.0 {
                    t
                } else {
                    (nu * t).sin() / nu
                }
            })
            .collect();
        let d = (&self.bundle.s_i * sigma0) * (I * (2.0 * p.alpha() / p.hbar()));
        scale_rows(&cosv, sigma0) + scale_rows(&sinv, &d)
    }

    /// `(sigma_3(t), sigma^H(t), sigma^P(t))`.
    pub fn sigma3_of_t(&self, t: f64, sigma0: &CMat, backend: Backend) -> Result<(CMat, CMat, Particular)> {
        let h = self.homogeneous(t, sigma0);
        let p = self.particular_solution(t, backend)?;
        Ok((&h + &p.value, h, p))
    }

    pub fn check_initial(&self, sigma0: &CMat) -> Result<()> {
        let dim = 2 * self.n();
        if sigma0.shape() != (dim, dim) {
            return Err(Error::ShapeMismatch(format!("initial sigma_3 is {:?}, need {dim}x{dim}", sigma0.shape())));
        }
        let defect = hermitian_defect(sigma0);
        if defect > 1e-12 * op_norm(sigma0).max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(())
    }

    /// `sigma_3` over a time grid, parallel over time points.
    pub fn solve(&self, times: &[f64], sigma0: &CMat, backend: Backend) -> Result<InversionSolution> {
        self.check_initial(sigma0)?;
        let parts = par::try_map(self.exec, times, |&t| self.sigma3_of_t(t, sigma0, backend))?;
        let mut sol = InversionSolution {
            times: times.to_vec(),
            sigma3: Vec::with_capacity(times.len()),
            homogeneous_part: Vec::with_capacity(times.len()),
            particular_part: Vec::with_capacity(times.len()),
            provenance: Vec::with_capacity(times.len()),
            backend,
            initial_sigma3: sigma0.clone(),
        };
        for (s, h, p) in parts {
            sol.sigma3.push(s);
            sol.homogeneous_part.push(h);
            sol.particular_part.push(p.value);
            sol.provenance.push(p.provenance);
        }
        Ok(sol)
    }
}

/// `F = gamma U^dagger S_i U` expanded blockwise with `U` written as
/// `[[c1, s1 C], [-s2 C^dagger, c2]]` and `S_i = [[0, X], [X^dagger, 0]]`.
pub fn forcing_terms(bundle: &OperatorBundle, freqs: &FrequencyOperators) -> Vec<ForcingTerm> {
    let g = c(bundle.params.gamma());
    let n = bundle.n();
    let id = CMat::identity(n, n);
    let x = bundle.coupling.clone();
    let xd = x.adjoint();
    let cc = freqs.c_op.clone();
    let cd = cc.adjoint();
    use Trig::{Cos, Sin};
    let term = |block, coef, left: &CMat, a, mid: &CMat, b, right: &CMat| ForcingTerm {
        block,
        coef,
        left: left.clone(),
        a,
        mid: mid.clone(),
        b,
        right: right.clone(),
    };
    vec![
        term((1, 1), -g, &id, (Cos, 1), &x, (Sin, 2), &cd),
        term((1, 1), -g, &cc, (Sin, 2), &xd, (Cos, 1), &id),
        term((1, 2), g, &id, (Cos, 1), &x, (Cos, 2), &id),
        term((1, 2), -g, &cc, (Sin, 2), &xd, (Sin, 1), &cc),
        term((2, 1), g, &id, (Cos, 2), &xd, (Cos, 1), &id),
        term((2, 1), -g, &cd, (Sin, 1), &x, (Sin, 2), &cd),
        term((2, 2), g, &cd, (Sin, 1), &x, (Cos, 2), &id),
        term((2, 2), g, &id, (Cos, 2), &xd, (Sin, 1), &cc),
    ]
}

#[derive(Debug, Clone)]
pub struct InversionSolution {
    pub times: Vec<f64>,
    pub sigma3: Vec<CMat>,
    pub homogeneous_part: Vec<CMat>,
    pub particular_part: Vec<CMat>,
    pub provenance: Vec<Provenance>,
    pub backend: Backend,
    pub initial_sigma3: CMat,
}

/// `W(t_k) = <state| sigma_3(t_k) |state>`; the imaginary residue is dropped.
pub fn inversion_expectation(solution: &InversionSolution, state: &CVec) -> Result<Vec<f64>> {
    let norm = vec_norm(state);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NonNormalizedState(norm));
    }
    if let Some(s) = solution.sigma3.first() {
        if s.nrows() != state.len() {
            return Err(Error::ShapeMismatch(format!("state length {} vs {}", state.len(), s.nrows())));
        }
    }
    Ok(solution.sigma3.iter().map(|s| state.dotc(&(s * state)).re).collect())
}

/// `<state| A |state>` with its imaginary part.
pub fn expectation(a: &CMat, state: &CVec) -> Complex64 {
    if state.is_empty() {
        return ZERO;
    }
    state.dotc(&(a * state))
}
