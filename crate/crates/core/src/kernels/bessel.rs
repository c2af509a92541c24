//! Bessel functions of the first kind of orders zero and one.
//!
//! Power series for small arguments, Miller's backward recurrence for
//! moderate ones and the Hankel asymptotic expansion beyond `x = 25`.

use std::f64::consts::{FRAC_PI_4, PI};

pub fn j0(x: f64) -> f64 {
    bessel(x.abs()).0
}

pub fn j1(x: f64) -> f64 {
    let v = bessel(x.abs()).1;
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// `(J0(x), J1(x))` for `x >= 0`.
pub fn bessel(x: f64) -> (f64, f64) {
    if x < 1.0 {
        series(x)
    } else if x <= 25.0 {
        miller(x)
    } else {
        (hankel(0.0, x), hankel(1.0, x))
    }
}

fn series(x: f64) -> (f64, f64) {
    let q = -0.25 * x * x;
    let (mut t0, mut s0) = (1.0, 1.0);
    let (mut t1, mut s1) = (0.5 * x, 0.5 * x);
    for k in 1..30 {
        let kf = k as f64;
        t0 *= q / (kf * kf);
        t1 *= q / (kf * (kf + 1.0));
        s0 += t0;
        s1 += t1;
        if t0.abs() < 1e-18 && t1.abs() < 1e-18 {
            break;
        }
    }
    (s0, s1)
}

fn miller(x: f64) -> (f64, f64) {
    let start = 2 * ((x + 20.0 + 12.0 * x.sqrt()) as usize / 2 + 2);
    let (mut jp, mut j) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    let (mut j0, mut j1) = (0.0, 0.0);
    for k in (1..=start).rev() {
        let jm = 2.0 * k as f64 / x * j - jp;
        jp = j;
        j = jm;
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j;
        }
        if k - 1 == 1 {
            j1 = j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
        if k - 1 == 0 {
            j0 = j;
        }
    }
    norm += j0;
    (j0 / norm, j1 / norm)
}

fn hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let z = 8.0 * x;
    let (mut p, mut q) = (1.0, 0.0);
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= (mu - odd * odd) / (kf * z);
        if term.abs() > prev || term.abs() < 1e-17 {
            break;
        }
        prev = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
    }
    let chi = x - (0.5 * nu * PI + FRAC_PI_4);
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
