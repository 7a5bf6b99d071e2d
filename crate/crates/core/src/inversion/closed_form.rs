//! Driven-oscillator Green kernels for harmonic forcing.
//!
//! `K_S(t; k, r) = int_0^t sin(r (t - s)) sin(k s) ds
//!             = (r sin(k t) - k sin(r t)) / (r^2 - k^2)` and
//! `K_C(t; k, r) = int_0^t sin(r (t - s)) cos(k s) ds
//!             = r (cos(k t) - cos(r t)) / (r^2 - k^2)`.
//!
//! Both are evaluated through `sinc` so the removable singularities at
//! `r = +-k` need no special window.

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `(sin(r t) - sin(k t)) / (r - k)`.
fn dsin(t: f64, r: f64, k: f64) -> f64 {
    t * ((r + k) * t / 2.0).cos() * sinc((r - k) * t / 2.0)
}

/// `(cos(k t) - cos(r t)) / (r - k)`.
fn dcos(t: f64, r: f64, k: f64) -> f64 {
    t * ((r + k) * t / 2.0).sin() * sinc((r - k) * t / 2.0)
}

pub fn k_s(t: f64, k: f64, r: f64) -> f64 {
    // (sin rt + sin kt)/(r + k) = dsin(t, r, -k)
    0.5 * (dsin(t, r, -k) - dsin(t, r, k))
}

pub fn k_c(t: f64, k: f64, r: f64) -> f64 {
    // (cos kt - cos rt)/(r + k) = dcos(t, r, -k)
    0.5 * (dcos(t, r, k) + dcos(t, r, -k))
}

/// `int_0^t g_r(t - s) sin(k s) ds` with `g_r(u) = sin(r u) / r` (`u` at `r = 0`).
pub fn green_s(t: f64, k: f64, r: f64) -> f64 {
    if r != 0.0 {
        return k_s(t, k, r) / r;
    }
    // (k t - sin k t) / k^2
    let x = k * t;
    if x.abs() < 1e-2 {
        let x2 = x * x;
        k * t * t * t * (1.0 / 6.0 - x2 / 120.0 + x2 * x2 / 5040.0 - x2 * x2 * x2 / 362_880.0)
    } else {
        (x - x.sin()) / (k * k)
    }
}

/// `int_0^t g_r(t - s) cos(k s) ds`.
pub fn green_c(t: f64, k: f64, r: f64) -> f64 {
    if r != 0.0 {
        return k_c(t, k, r) / r;
    }
    // (1 - cos k t) / k^2
    let s = sinc(k * t / 2.0);
    0.5 * t * t * s * s
}
