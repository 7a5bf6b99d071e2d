//! Double power series for `F_XY(t; x, w) = int_0^t X(x s) Y(w s) ds`,
//! `X, Y in {cos, sin}`, truncated at total order `m + n <= K`.
//!
//! The alternating terms grow like `cosh(|x| t) cosh(|w| t)` before they
//! decay, so sums with large arguments are accumulated in binary floating
//! point with just enough extra precision to absorb the cancellation.

use dashu_float::{round::mode::HalfEven, FBig};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat};

type Big = FBig<HalfEven, 2>;

/// Largest admissible `|x| t` (and `|w| t`).
pub const MAX_ARGUMENT: f64 = 40.0;
pub const DEFAULT_ORDER: usize = 60;

/// Below this combined argument plain `f64` summation loses at most a few bits.
const F64_ARGUMENT: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    CC,
    CS,
    SC,
    SS,
}

impl Kind {
    pub const ALL: [Kind; 4] = [Kind::CC, Kind::CS, Kind::SC, Kind::SS];

    pub fn from_trig(x_is_sin: bool, w_is_sin: bool) -> Kind {
        match (x_is_sin, w_is_sin) {
            (false, false) => Kind::CC,
            (false, true) => Kind::CS,
            (true, false) => Kind::SC,
            (true, true) => Kind::SS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// All four kernels at one `(x, w, t)` plus a common truncation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernels {
    pub cc: f64,
    pub cs: f64,
    pub sc: f64,
    pub ss: f64,
    pub bound: f64,
}

impl Kernels {
    pub fn get(&self, kind: Kind) -> f64 {
        match kind {
            Kind::CC => self.cc,
            Kind::CS => self.cs,
            Kind::SC => self.sc,
            Kind::SS => self.ss,
        }
    }
}

/// Arithmetic needed by the summation, implemented for `f64` and `Big`.
trait Field: Clone {
    fn lift(v: f64, prec: usize) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div_int(&self, d: u64) -> Self;
    fn neg(&self) -> Self;
    fn lower(&self) -> f64;
}

impl Field for f64 {
    fn lift(v: f64, _: usize) -> Self {
        v
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div_int(&self, d: u64) -> Self {
        self / d as f64
    }
    fn neg(&self) -> Self {
        -self
    }
    fn lower(&self) -> f64 {
        *self
    }
}

impl Field for Big {
    fn lift(v: f64, prec: usize) -> Self {
        Big::try_from(v).expect("finite").with_precision(prec).value()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div_int(&self, d: u64) -> Self {
        self / Big::from(d)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn lower(&self) -> f64 {
        self.to_f64().value()
    }
}

fn sum_kernels<T: Field>(x: f64, w: f64, t: f64, order: usize, prec: usize) -> [f64; 4] {
    let tt = T::lift(t, prec);
    let xt = T::lift(x, prec).mul(&tt);
    let wt = T::lift(w, prec).mul(&tt);
    // a_e[m] = (-1)^m (xt)^{2m} / (2m)!,  a_o[m] = (-1)^m (xt)^{2m+1} / (2m+1)!
    let coefficients = |u: &T| {
        let u2 = u.mul(u);
        let mut even = Vec::with_capacity(order + 1);
        let mut odd = Vec::with_capacity(order + 1);
        even.push(T::lift(1.0, prec));
        odd.push(u.clone());
        for m in 1..=order as u64 {
            let e = even[m as usize - 1].mul(&u2).div_int((2 * m - 1) * (2 * m)).neg();
            let o = odd[m as usize - 1].mul(&u2).div_int((2 * m) * (2 * m + 1)).neg();
            even.push(e);
            odd.push(o);
        }
        (even, odd)
    };
    let (ae, ao) = coefficients(&xt);
    let (be, bo) = coefficients(&wt);
    let zero = T::lift(0.0, prec);
    let mut acc = [zero.clone(), zero.clone(), zero.clone(), zero];
    for s in 0..=order {
        let mut conv = [T::lift(0.0, prec), T::lift(0.0, prec), T::lift(0.0, prec), T::lift(0.0, prec)];
        for m in 0..=s {
            let n = s - m;
            conv[0] = conv[0].add(&ae[m].mul(&be[n]));
            conv[1] = conv[1].add(&ae[m].mul(&bo[n]));
            conv[2] = conv[2].add(&ao[m].mul(&be[n]));
            conv[3] = conv[3].add(&ao[m].mul(&bo[n]));
        }
        let s = s as u64;
        acc[0] = acc[0].add(&conv[0].div_int(2 * s + 1));
        acc[1] = acc[1].add(&conv[1].div_int(2 * s + 2));
        acc[2] = acc[2].add(&conv[2].div_int(2 * s + 2));
        acc[3] = acc[3].add(&conv[3].div_int(2 * s + 3));
    }
    let mut out = [0.0; 4];
    for (o, a) in out.iter_mut().zip(&acc) {
        *o = a.mul(&tt).lower();
    }
    out
}

/// Bound on the omitted tail `sum_{s > K}` for every kind.
///
/// With `U = (|x| + |w|) |t|`, the order-`s` contribution is at most
/// `|t| U^{2s} / (2s)! * max(1, U)^2`; consecutive terms shrink by at least
/// `rho = U^2 / ((2K+3)(2K+4))`.
pub fn truncation_bound(x: f64, w: f64, t: f64, order: usize) -> f64 {
    let u = (x.abs() + w.abs()) * t.abs();
    if u == 0.0 || t == 0.0 {
        return 0.0;
    }
    let s = order + 1;
    let rho = u * u / (((2 * order + 3) * (2 * order + 4)) as f64);
    if rho >= 1.0 {
        return f64::INFINITY;
    }
    let ln_fact: f64 = (1..=2 * s).map(|k| (k as f64).ln()).sum();
    let ln_term = t.abs().ln() + 2.0 * s as f64 * u.ln() - ln_fact + 2.0 * u.max(1.0).ln();
    ln_term.exp() / (1.0 - rho)
}

/// Working precision in bits for the given arguments.
fn precision_bits(x: f64, w: f64, t: f64) -> usize {
    let growth = (x.abs() + w.abs()) * t.abs() / std::f64::consts::LN_2;
    80 + growth.ceil() as usize + t.abs().max(1.0).log2().ceil() as usize
}

/// The four scalar kernels at `(x, w, t)`, truncated at total order `order`.
/// No argument guard is applied.
pub fn scalar_kernels(x: f64, w: f64, t: f64, order: usize) -> Kernels {
    let v = if (x.abs() + w.abs()) * t.abs() <= F64_ARGUMENT {
        sum_kernels::<f64>(x, w, t, order, 53)
    } else {
        sum_kernels::<Big>(x, w, t, order, precision_bits(x, w, t))
    };
    Kernels { cc: v[0], cs: v[1], sc: v[2], ss: v[3], bound: truncation_bound(x, w, t, order) }
}

pub fn check_argument(norm: f64, t: f64) -> Result<()> {
    let a = norm * t.abs();
    if !(a <= MAX_ARGUMENT) {
        return Err(Error::ConvergenceBudgetExceeded(a));
    }
    Ok(())
}

/// A matrix-valued series result and its truncation bound.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesValue {
    pub value: CMat,
    pub bound: f64,
}

fn diag_entries(a: &CMat) -> Result<Vec<f64>> {
    crate::algebra::diagonal_values(a)
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// `F_XY(t; X, W)` for commuting diagonal operators.
pub fn series_fxy(x: &CMat, w: &CMat, t: f64, kind: Kind, order: usize) -> Result<SeriesValue> {
    let (xs, ws) = (diag_entries(x)?, diag_entries(w)?);
    if xs.len() != ws.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {}", xs.len(), ws.len())));
    }
    check_argument(max_norm(&xs), t)?;
    check_argument(max_norm(&ws), t)?;
    let mut value = CMat::zeros(xs.len(), xs.len());
    let mut bound = 0.0_f64;
    for (i, (&a, &b)) in xs.iter().zip(&ws).enumerate() {
        let k = scalar_kernels(a, b, t, order);
        value[(i, i)] = c(k.get(kind));
        bound = bound.max(k.bound);
    }
    Ok(SeriesValue { value, bound })
}

/// `int_0^t X(X s) M Y(W s) ds` for diagonal `X`, `W` and any `M`: entry
/// `(i, j)` is `M[i, j] F_XY(t; x_i, w_j)`.
pub fn series_fxy_sandwich(x: &CMat, m: &CMat, w: &CMat, t: f64, kind: Kind, order: usize) -> Result<SeriesValue> {
    let (xs, ws) = (diag_entries(x)?, diag_entries(w)?);
    if m.nrows() != xs.len() || m.ncols() != ws.len() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} middle factor between {} and {}",
            m.nrows(),
            m.ncols(),
            xs.len(),
            ws.len()
        )));
    }
    check_argument(max_norm(&xs), t)?;
    check_argument(max_norm(&ws), t)?;
    let mut value = CMat::zeros(m.nrows(), m.ncols());
    let mut bound = 0.0_f64;
    for (r, col, z) in crate::linalg::nonzeros(m) {
        let k = scalar_kernels(xs[r], ws[col], t, order);
        value[(r, col)] = z * k.get(kind);
        bound = bound.max(k.bound * z.norm());
    }
    Ok(SeriesValue { value, bound })
}

/// `G^(+-)_XY(t; p, q, r) = F_XY(t; p - q, r) +- F_XY(t; p + q, r)`.
pub fn aux_g(p: &CMat, q: &CMat, r: &CMat, t: f64, kind: Kind, sign: Sign, order: usize) -> Result<SeriesValue> {
    let minus = series_fxy(&(p - q), r, t, kind, order)?;
    let plus = series_fxy(&(p + q), r, t, kind, order)?;
    let value = match sign {
        Sign::Plus => &minus.value + &plus.value,
        Sign::Minus => &minus.value - &plus.value,
    };
    Ok(SeriesValue { value, bound: minus.bound + plus.bound })
}

/// Scalar `G^(+-)_XY(t; p, q, r)` from cached kernels.
pub fn aux_g_scalar(kernel: &mut impl FnMut(f64, f64) -> Kernels, p: f64, q: f64, r: f64, kind: Kind, sign: Sign) -> (f64, f64) {
    let a = kernel(p - q, r);
    let b = kernel(p + q, r);
    let v = match sign {
        Sign::Plus => a.get(kind) + b.get(kind),
        Sign::Minus => a.get(kind) - b.get(kind),
    };
    (v, a.bound + b.bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, max_abs};
    use crate::oracle::integrate_scalar;
    use proptest::prelude::*;

    fn trig(sin: bool, a: f64) -> f64 {
        if sin {
            a.sin()
        } else {
            a.cos()
        }
    }

    fn quad(x: f64, w: f64, t: f64, kind: Kind) -> f64 {
        let (sx, sw) = match kind {
            Kind::CC => (false, false),
            Kind::CS => (false, true),
            Kind::SC => (true, false),
            Kind::SS => (true, true),
        };
        integrate_scalar(|s| trig(sx, x * s) * trig(sw, w * s), t, 1e-15).unwrap()
    }

    #[test]
    fn trivial_cases() {
        let z = CMat::zeros(3, 3);
        let r = series_fxy(&z, &z, 1.3, Kind::CC, 10).unwrap();
        assert!(max_abs(&(r.value - CMat::identity(3, 3).scale(1.3))) < 1e-15);
        let x = diag(&[0.5, 1.0, 2.0]);
        let r = series_fxy(&x, &z, 1.3, Kind::SS, 10).unwrap();
        assert_eq!(max_abs(&r.value), 0.0);
    }

    #[test]
    fn scalar_example_against_quadrature() {
        let k = scalar_kernels(2.0, 3.0, 0.7, 40);
        let exact = 0.5 * ((0.7f64).sin() + (3.5f64).sin() / 5.0);
        assert!((k.cc - exact).abs() < 1e-12);
        assert!((k.cc - quad(2.0, 3.0, 0.7, Kind::CC)).abs() < 1e-12);
        assert!(k.bound < 1e-12);
    }

    #[test]
    fn large_arguments_keep_precision() {
        for kind in Kind::ALL {
            let (x, w, t) = (4.23, 1.43, 5.0);
            let v = scalar_kernels(x, w, t, 80).get(kind);
            assert!((v - quad(x, w, t, kind)).abs() < 1e-13, "{kind:?}");
        }
    }

    #[test]
    fn aux_g_examples() {
        let p = diag(&[3.0]);
        let r = diag(&[2.0]);
        let zero = CMat::zeros(1, 1);
        let g = aux_g(&p, &zero, &r, 0.5, Kind::CC, Sign::Minus, 40).unwrap();
        assert_eq!(max_abs(&g.value), 0.0);
        let g = aux_g(&p, &zero, &r, 0.5, Kind::CC, Sign::Plus, 40).unwrap();
        let f = series_fxy(&p, &r, 0.5, Kind::CC, 40).unwrap();
        assert!(max_abs(&(g.value - f.value.scale(2.0))) < 1e-15);
        let q = diag(&[1.0]);
        let g = aux_g(&p, &q, &r, 0.5, Kind::CC, Sign::Plus, 40).unwrap();
        let want = quad(2.0, 2.0, 0.5, Kind::CC) + quad(4.0, 2.0, 0.5, Kind::CC);
        assert!((g.value[(0, 0)].re - want).abs() < 1e-12);
    }

    #[test]
    fn guard_rejects_large_arguments() {
        let x = diag(&[100.0]);
        assert_eq!(
            series_fxy(&x, &x, 1.0, Kind::CC, 60).unwrap_err(),
            Error::ConvergenceBudgetExceeded(100.0)
        );
    }

    #[test]
    fn bound_tracks_actual_error() {
        for order in [5, 10, 20] {
            let k = scalar_kernels(1.5, 2.5, 2.0, order);
            let err = (k.sc - quad(1.5, 2.5, 2.0, Kind::SC)).abs();
            assert!(err <= k.bound * 1.0001 + 1e-15, "order {order}: {err} > {}", k.bound);
        }
    }

    #[test]
    fn sandwich_matches_matrix_quadrature() {
        let xs = [0.3, 1.1, 2.6];
        let ws = [1.9, 0.4, 3.2];
        let mut m = CMat::zeros(3, 3);
        m[(0, 1)] = c(1.5);
        m[(1, 2)] = crate::linalg::I;
        m[(2, 0)] = c(-0.7);
        let t = 1.7;
        let r = series_fxy_sandwich(&diag(&xs), &m, &diag(&ws), t, Kind::CS, 60).unwrap();
        let q = crate::oracle::integrate_matrix_function(
            |s| {
                let a = diag(&xs.map(|x| (x * s).cos()));
                let b = diag(&ws.map(|w| (w * s).sin()));
                a * &m * b
            },
            t,
            1e-14,
        )
        .unwrap();
        assert!(max_abs(&(r.value - q.value)) < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn kernels_match_quadrature(x in -4.0f64..4.0, w in -4.0f64..4.0, t in 0.01f64..2.5) {
            let k = scalar_kernels(x, w, t, 60);
            for kind in Kind::ALL {
                prop_assert!((k.get(kind) - quad(x, w, t, kind)).abs() < 1e-12);
            }
        }
    }
}
