//! Literal transcriptions of published closed forms that do not reduce to
//! the forcing matrix in a concrete matrix representation.
//!
//! They are evaluated exactly as written so their deviation from the
//! working backends can be reported. None of them is used by the solvers.
//!
//! Conventions: `rt = sqrt(T B_-)`, `rt_h2 = sqrt(H_2 T B_-)` (amplitude
//! `E^{3/4}` with the same branch), daggers are adjoints. In the harmonic
//! limit `sqrt(a)` is read as `rt`, `(a a^dagger)^{3/4}` as `H_2^{3/4}`,
//! `(a^dagger a)^{1/4}` as `H_1^{1/4}` and `sqrt(a a^dagger a)` as `rt_h2`.

use crate::algebra::ROOT_BRANCH;
use crate::error::Result;
use crate::linalg::{block2, c, diag, CMat, I};

use super::closed_form::{k_c, k_s};
use super::series::{aux_g, Kind, Sign};
use super::Inversion;

struct Ops {
    rt: CMat,
    rt_d: CMat,
    rt_h2: CMat,
    rt_h2_d: CMat,
    x: CMat,
    x_d: CMat,
    h1_q: CMat,
    h2_q: CMat,
    h2_3q: CMat,
    c_op: CMat,
    c_d: CMat,
}

fn ops(inv: &Inversion) -> Ops {
    let b = &inv.bundle;
    let n = b.n();
    let mut rt_h2 = CMat::zeros(n, n);
    for m in 0..n - 1 {
        rt_h2[(m, m + 1)] = c(ROOT_BRANCH * b.spectrum.energy(m + 1).powf(0.75));
    }
    Ops {
        rt: b.sqrt_tb_minus.clone(),
        rt_d: b.sqrt_bt_plus.clone(),
        rt_h2_d: rt_h2.adjoint(),
        rt_h2,
        x: b.tb_minus.clone(),
        x_d: b.tb_minus.adjoint(),
        h1_q: b.h1_pow(0.25),
        h2_q: b.h2_pow(0.25),
        h2_3q: b.h2_pow(0.75),
        c_op: inv.freqs.c_op.clone(),
        c_d: inv.freqs.c_op.adjoint(),
    }
}

fn trig(v: &[f64], t: f64, f: fn(f64) -> f64) -> CMat {
    diag(&v.iter().map(|x| f(x * t)).collect::<Vec<_>>())
}

struct Trig {
    c1: CMat,
    s1: CMat,
    c2: CMat,
    s2: CMat,
}

fn omega_trig(inv: &Inversion, t: f64) -> Trig {
    Trig {
        c1: trig(&inv.freqs.omega1, t, f64::cos),
        s1: trig(&inv.freqs.omega1, t, f64::sin),
        c2: trig(&inv.freqs.omega2, t, f64::cos),
        s2: trig(&inv.freqs.omega2, t, f64::sin),
    }
}

/// Forcing blocks `[F11, F12, F21, F22]` with `T B_-` as the middle factor.
pub fn forcing_first_forms(inv: &Inversion, t: f64) -> [CMat; 4] {
    let o = ops(inv);
    let w = omega_trig(inv, t);
    let g = inv.gamma();
    [
        -(&w.c1 * &o.x * &w.s2 * &o.c_d + &o.c_op * &w.s2 * &o.x_d * &w.c1).scale(g),
        (&w.c1 * &o.x * &w.c2 - &o.c_op * &w.s2 * &o.x_d * &w.s1 * &o.c_op).scale(g),
        (&w.c2 * &o.x_d * &w.c1 - &o.c_d * &w.s1 * &o.x * &w.s2 * &o.c_d).scale(g),
        (&o.c_d * &w.s1 * &o.x * &w.c2 + &w.c2 * &o.x_d * &w.s1 * &o.c_op).scale(g),
    ]
}

/// The reduced forcing blocks written with `sqrt(T B_-)` and `H_j^{1/4}`.
pub fn forcing_second_forms(inv: &Inversion, t: f64) -> [CMat; 4] {
    let o = ops(inv);
    let w = omega_trig(inv, t);
    let g = inv.gamma();
    let ig = I * g;
    [
        (&o.rt * &w.c2 * &w.s1 * &o.h2_q - &o.h2_q * &w.s1 * &w.c2 * &o.rt_d) * ig,
        (&o.rt * &w.c2 * &w.c1 * &o.rt + &o.h2_q * &w.s1 * &w.s2 * &o.h1_q).scale(g),
        (&o.rt_d * &w.c1 * &w.c2 * &o.rt_d + &o.h1_q * &w.s2 * &w.s1 * &o.h2_q).scale(g),
        (&o.rt_d * &w.c1 * &w.s2 * &o.h1_q - &o.h1_q * &w.s2 * &w.c1 * &o.rt) * ig,
    ]
}

fn nu_trig(inv: &Inversion, t: f64, sign: f64, j: usize, f: fn(f64) -> f64) -> CMat {
    // f((nu_j + sign * omega_j) t)
    let (nu, om) = if j == 1 { (&inv.nus.nu1, &inv.freqs.omega1) } else { (&inv.nus.nu2, &inv.freqs.omega2) };
    diag(&nu.iter().zip(om).map(|(a, b)| f((a + sign * b) * t)).collect::<Vec<_>>())
}

/// `(y_1 F11, expansion)` using the reduced `F11`.
pub fn y1_f11(inv: &Inversion, t: f64) -> (CMat, CMat) {
    let o = ops(inv);
    let w = omega_trig(inv, t);
    let y1 = trig(&inv.nus.nu1, t, f64::cos);
    let lhs = &y1 * &forcing_second_forms(inv, t)[0];
    let h = I * (0.5 * inv.gamma());
    let a = nu_trig(inv, t, -1.0, 2, f64::cos) * &w.s1 + nu_trig(inv, t, 1.0, 2, f64::cos) * &w.s1;
    let b = nu_trig(inv, t, -1.0, 1, f64::sin) * &w.c2 - nu_trig(inv, t, 1.0, 1, f64::sin) * &w.c2;
    let rhs = (&o.rt * a * &o.h2_q) * h + (&o.h2_q * b * &o.rt_d) * h;
    (lhs, rhs)
}

/// `(z_1 F11, expansion)` using the reduced `F11`.
pub fn z1_f11(inv: &Inversion, t: f64) -> (CMat, CMat) {
    let o = ops(inv);
    let w = omega_trig(inv, t);
    let z1 = trig(&inv.nus.nu1, t, f64::sin);
    let lhs = &z1 * &forcing_second_forms(inv, t)[0];
    let h = I * (0.5 * inv.gamma());
    let a = nu_trig(inv, t, -1.0, 2, f64::sin) * &w.s1 + nu_trig(inv, t, 1.0, 2, f64::sin) * &w.s1;
    let b = nu_trig(inv, t, -1.0, 1, f64::cos) * &w.c2 - nu_trig(inv, t, 1.0, 1, f64::cos) * &w.c2;
    let rhs = (&o.rt * a * &o.h2_q) * h - (&o.h2_q * b * &o.rt_d) * h;
    (lhs, rhs)
}

fn pinv(v: &[f64]) -> CMat {
    diag(&v.iter().map(|&x| if x == 0.0 { 0.0 } else { 1.0 / x }).collect::<Vec<_>>())
}

/// The operator-series particular solution as printed.
pub fn series_particular(inv: &Inversion, t: f64, order: usize) -> Result<CMat> {
    let o = ops(inv);
    let (nu1, nu2) = (diag(&inv.nus.nu1), diag(&inv.nus.nu2));
    let (w1, w2) = (inv.freqs.omega1_op(), inv.freqs.omega2_op());
    let y1 = trig(&inv.nus.nu1, t, f64::cos);
    let z1 = trig(&inv.nus.nu1, t, f64::sin);
    let y2 = trig(&inv.nus.nu2, t, f64::cos);
    let z2 = trig(&inv.nus.nu2, t, f64::sin);
    let (n1i, n2i) = (pinv(&inv.nus.nu1), pinv(&inv.nus.nu2));
    let g = |p: &CMat, q: &CMat, r: &CMat, kind, sign| aux_g(p, q, r, t, kind, sign, order).map(|v| v.value);
    // G(nu_2, omega_2, omega_1) and G(nu_1, omega_1, omega_2)
    let g2 = |kind, sign| g(&nu2, &w2, &w1, kind, sign);
    let g1 = |kind, sign| g(&nu1, &w1, &w2, kind, sign);
    use Kind::*;
    use Sign::*;
    let h = 0.5 * inv.gamma();
    let ih = I * h;

    let s11 = (&n1i * &o.rt * (&z2 * g2(CS, Plus)? - &y2 * g2(SS, Plus)?) * &o.h2_3q) * ih
        + (&n1i * &o.h2_3q * (&z1 * g1(SC, Minus)? - &y1 * g1(CC, Minus)?) * &o.rt_d) * ih;
    let s12 = (&n1i * &o.rt * (&z2 * g2(CC, Plus)? - &y2 * g2(SC, Plus)?) * &o.rt_h2).scale(h)
        + (&n1i * &o.h2_3q * (&z1 * g1(SS, Minus)? + &y1 * g1(CS, Minus)?) * &o.h1_q).scale(h);
    let s21 = (&n2i * &o.rt_h2_d * (&z1 * g1(CC, Plus)? - &y1 * g1(SC, Plus)?) * &o.rt_d).scale(h)
        + (&n2i * &o.h1_q * (&z2 * g2(SS, Minus)? - &y2 * g2(CS, Minus)?) * &o.h2_3q).scale(h);
    let s22 = (&n2i * &o.rt_h2_d * (&z1 * g1(CS, Plus)? - &y1 * g1(SS, Plus)?) * &o.h1_q) * ih
        + (&n2i * &o.h1_q * (&z2 * g2(SC, Minus)? + &y2 * g2(CC, Minus)?) * &o.rt_h2) * ih;
    Ok(block2(&s11, &s12, &s21, &s22))
}

/// The harmonic-oscillator particular solution as printed.
pub fn ho_particular(inv: &Inversion, t: f64) -> CMat {
    let o = ops(inv);
    let (w1, w2) = (&inv.freqs.omega1, &inv.freqs.omega2);
    let (n1i, n2i) = (pinv(&inv.nus.nu1), pinv(&inv.nus.nu2));
    // K(t; omega_2, +-omega_1, nu) with p + q = omega_2 +- omega_1, entrywise
    let kern = |f: fn(f64, f64, f64) -> f64, sign: f64, nu: &[f64]| {
        diag(&(0..nu.len()).map(|m| f(t, w2[m] + sign * w1[m], nu[m])).collect::<Vec<_>>())
    };
    let (nu1, nu2) = (&inv.nus.nu1, &inv.nus.nu2);
    let ks = |sign, nu| kern(k_s, sign, nu);
    let kc = |sign, nu| kern(k_c, sign, nu);
    let h = 0.5 * inv.gamma();
    let ih = I * h;

    let s11 = (&n1i * &o.rt * (ks(1.0, nu2) - ks(-1.0, nu2)) * &o.h2_3q) * ih
        - (&n1i * &o.h2_3q * (ks(1.0, nu1) - ks(-1.0, nu1)) * &o.rt_d) * ih;
    let s12 = (&n1i * &o.rt * (kc(1.0, nu2) - kc(-1.0, nu2)) * &o.rt_h2).scale(h)
        - (&n1i * &o.h2_3q * (kc(1.0, nu1) - kc(-1.0, nu1)) * &o.h1_q).scale(h);
    let s21 = (&n2i * &o.rt_h2_d * (kc(1.0, nu1) + kc(-1.0, nu1)) * &o.rt_d).scale(h)
        - (&n2i * &o.h1_q * (kc(1.0, nu2) - kc(-1.0, nu2)) * &o.h2_3q).scale(h);
    let s22 = (&n2i * &o.rt_h2_d * (ks(1.0, nu1) + ks(-1.0, nu1)) * &o.h1_q) * ih
        - (&n2i * &o.h1_q * (ks(1.0, nu2) + ks(-1.0, nu2)) * &o.rt_h2) * ih;
    block2(&s11, &s12, &s21, &s22)
}
