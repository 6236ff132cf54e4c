//! Round-annulus spectrum from the separated radial equation.
//!
//! For angular frequency `ν` the radial problem
//! `-(r u')' + (ν²/r) u = λ r u` on `(r_in, r_out)` is solved in Prüfer
//! form, scaled by a constant `S` so that the angle turns at a comparable
//! rate in both quadrants: `tan θ = S u / (r u')`. A constant scale keeps
//! the boundary angles at multiples of `π/2`, and the end angle is strictly
//! increasing in `λ`, so the `n`-th eigenvalue is found by bisection on the
//! angle target, with no risk of skipping a root.

use serde::Serialize;

use super::{Bc, BcPair};
use crate::error::{Error, Result};

const RK_STEPS: usize = 4000;
const REL_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialEigenvalue {
    pub value: f64,
    /// Angular index `m`; the angular frequency is `m / degree`.
    pub angular_mode: u32,
    pub radial_index: u32,
}

fn prufer_end_angle(r_in: f64, r_out: f64, nu2: f64, lambda: f64, theta0: f64) -> f64 {
    let r_mid = 0.5 * (r_in + r_out);
    let scale = (lambda.abs() * r_mid * r_mid).max(nu2).max(1.0).sqrt();
    let rhs = |r: f64, th: f64| {
        let (s, c) = th.sin_cos();
        scale / r * c * c + (lambda * r - nu2 / r) / scale * s * s
    };
    let h = (r_out - r_in) / RK_STEPS as f64;
    let mut th = theta0;
    let mut r = r_in;
    for _ in 0..RK_STEPS {
        let k1 = rhs(r, th);
        let k2 = rhs(r + 0.5 * h, th + 0.5 * h * k1);
        let k3 = rhs(r + 0.5 * h, th + 0.5 * h * k2);
        let k4 = rhs(r + h, th + h * k3);
        th += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        r += h;
    }
    th
}

fn radial_eigenvalue(r_in: f64, r_out: f64, nu: f64, bc: BcPair, n: u32) -> Result<f64> {
    let theta0 = match bc.bottom {
        Bc::Dirichlet => 0.0,
        Bc::Neumann => std::f64::consts::FRAC_PI_2,
    };
    let first = match bc.top {
        Bc::Dirichlet => std::f64::consts::PI,
        Bc::Neumann => std::f64::consts::FRAC_PI_2,
    };
    if bc == BcPair::NN && nu == 0.0 && n == 0 {
        return Ok(0.0);
    }
    let target = first + f64::from(n) * std::f64::consts::PI;
    let nu2 = nu * nu;
    let angle = |lambda: f64| prufer_end_angle(r_in, r_out, nu2, lambda, theta0);

    let mut lo = 0.0;
    let mut hi = {
        let width = r_out - r_in;
        (std::f64::consts::PI * f64::from(n + 1) / width).powi(2) + nu2 / (r_in * r_in) + 1.0
    };
    let mut guard = 0;
    while angle(hi) <= target {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::NumericalFailure {
                message: format!("could not bracket radial eigenvalue n={n} for nu={nu}"),
                residuals: vec![],
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if angle(mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= REL_TOL * hi.abs().max(1e-300) {
            break;
        }
    }
    let value = 0.5 * (lo + hi);
    if !value.is_finite() {
        return Err(Error::NumericalFailure {
            message: format!("radial bisection diverged for n={n}, nu={nu}"),
            residuals: vec![],
        });
    }
    Ok(value)
}

/// First `count` eigenvalues (with multiplicity) of the round annulus
/// `r_in < r < r_out`. Conditions: `bc.bottom` on the inner circle,
/// `bc.top` on the outer one.
pub fn annulus_spectrum_round(
    r_in: f64,
    r_out: f64,
    bc: BcPair,
    count: usize,
) -> Result<Vec<RadialEigenvalue>> {
    annulus_spectrum_round_cover(r_in, r_out, bc, 1, count)
}

/// Same as [`annulus_spectrum_round`] on the `degree`-fold angular cover,
/// where angular frequencies are `m / degree`.
pub fn annulus_spectrum_round_cover(
    r_in: f64,
    r_out: f64,
    bc: BcPair,
    degree: u32,
    count: usize,
) -> Result<Vec<RadialEigenvalue>> {
    if !(r_in > 0.0 && r_out > r_in) {
        return Err(Error::invalid(format!(
            "need 0 < r_in < r_out, got ({r_in}, {r_out})"
        )));
    }
    if count == 0 {
        return Err(Error::invalid("count must be at least 1"));
    }
    if degree == 0 {
        return Err(Error::invalid("degree must be positive"));
    }
    let nu = |m: u32| f64::from(m) / f64::from(degree);
    let mult = |m: u32| if m == 0 { 1 } else { 2 };

    // Cap from the ν = 0 radial ladder and the n = 0 angular ladder.
    let cap_radial = radial_eigenvalue(r_in, r_out, 0.0, bc, count as u32 - 1)?;
    let mut seen = 0usize;
    let mut m = 0u32;
    let cap_angular = loop {
        seen += mult(m);
        if seen >= count {
            break radial_eigenvalue(r_in, r_out, nu(m), bc, 0)?;
        }
        m += 1;
    };
    let cap = cap_radial.min(cap_angular) * (1.0 + 1e-9);

    let mut found = Vec::new();
    let mut m = 0u32;
    loop {
        let first = radial_eigenvalue(r_in, r_out, nu(m), bc, 0)?;
        if first > cap {
            break;
        }
        let mut n = 0u32;
        let mut value = first;
        while value <= cap {
            for _ in 0..mult(m) {
                found.push(RadialEigenvalue {
                    value,
                    angular_mode: m,
                    radial_index: n,
                });
            }
            n += 1;
            value = radial_eigenvalue(r_in, r_out, nu(m), bc, n)?;
        }
        m += 1;
    }
    found.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.angular_mode.cmp(&b.angular_mode))
    });
    found.truncate(count);
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumann_ground_state_is_zero() {
        let s = annulus_spectrum_round(1.0, 1.1, BcPair::NN, 1).unwrap();
        assert_eq!(s[0].value, 0.0);
    }

    #[test]
    fn first_angular_mode() {
        let s = annulus_spectrum_round(1.0, 1.1, BcPair::NN, 3).unwrap();
        assert_eq!(s[1].angular_mode, 1);
        assert_eq!(s[1].value, s[2].value);
        let guess = 1.0 / (1.05f64 * 1.05);
        assert!((s[1].value / guess - 1.0).abs() < 0.01, "{}", s[1].value);
    }

    #[test]
    fn dirichlet_radial_bounds() {
        // u = v / sqrt(r) turns the ν = 0 problem into -v'' - v/(4r²) = λ v,
        // so π²/L² - 1/(4 r_in²) ≤ λ₁ ≤ π²/L² - 1/(4 r_out²).
        let s = annulus_spectrum_round(1.0, 1.1, BcPair::DD, 1).unwrap();
        let base = (std::f64::consts::PI / 0.1).powi(2);
        assert!(s[0].value >= base - 0.25);
        assert!(s[0].value <= base - 0.25 / 1.21);
    }

    #[test]
    fn matches_closed_form_for_thin_limit() {
        // Far from the origin the annulus looks like an interval; compare a
        // mode of a very thin annulus against the interval value.
        let s = annulus_spectrum_round(100.0, 100.01, BcPair::DN, 1).unwrap();
        let interval = (std::f64::consts::PI / (2.0 * 0.01)).powi(2);
        assert!((s[0].value / interval - 1.0).abs() < 1e-4, "{} vs {interval}", s[0].value);
    }

    #[test]
    fn cover_halves_the_angular_frequency() {
        let base = annulus_spectrum_round(1.0, 1.1, BcPair::NN, 5).unwrap();
        let cover = annulus_spectrum_round_cover(1.0, 1.1, BcPair::NN, 2, 5).unwrap();
        // m = 2 on the cover is m = 1 on the base.
        assert!((cover[3].value - base[1].value).abs() < 1e-10 * base[1].value);
        assert_eq!(cover[1].angular_mode, 1);
    }

    #[test]
    fn rejects_bad_radii() {
        assert!(annulus_spectrum_round(1.1, 1.0, BcPair::NN, 1).is_err());
        assert!(annulus_spectrum_round(0.0, 1.0, BcPair::NN, 1).is_err());
    }
}
