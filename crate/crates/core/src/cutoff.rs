//! Smooth cutoff profiles chi with chi = 1 on [0,1], chi = 0 on [2,oo)
//! and -chi' = eta^2 for a continuous eta supported in (1,2).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffKind {
    /// -chi'(t) = (8/3) sin^4(pi (t-1)) on [1,2]; chi is C^2 with a closed-form primitive.
    Poly,
    /// -chi' proportional to exp(-1/((t-1)(2-t))), normalized; C^infinity.
    Bump,
}

/// A cutoff profile with derivatives up to third order.
#[derive(Debug, Clone)]
pub struct CutoffProfile {
    kind: CutoffKind,
    /// bump only: normalization so that the integral of -chi' is 1
    norm: f64,
    /// bump only: cumulative integral of the unnormalized -chi' at the grid 1 + k/n
    cumulative: Vec<f64>,
}

const BUMP_CELLS: usize = 4096;

fn bump_integrand(t: f64) -> f64 {
    if t <= 1.0 || t >= 2.0 {
        return 0.0;
    }
    (-1.0 / ((t - 1.0) * (2.0 - t))).exp()
}

/// 3-point Simpson on [a,b].
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

pub fn make_cutoff(kind: CutoffKind) -> CutoffProfile {
    match kind {
        CutoffKind::Poly => CutoffProfile {
            kind,
            norm: 1.0,
            cumulative: Vec::new(),
        },
        CutoffKind::Bump => {
            let h = 1.0 / BUMP_CELLS as f64;
            let mut cumulative = Vec::with_capacity(BUMP_CELLS + 1);
            cumulative.push(0.0);
            let mut acc = 0.0;
            for k in 0..BUMP_CELLS {
                let a = 1.0 + k as f64 * h;
                acc += simpson(bump_integrand, a, a + h);
                cumulative.push(acc);
            }
            CutoffProfile {
                kind,
                norm: 1.0 / acc,
                cumulative,
            }
        }
    }
}

impl CutoffProfile {
    pub fn kind(&self) -> CutoffKind {
        self.kind
    }

    /// Unnormalized integral of the bump integrand over [1, t].
    fn bump_cum(&self, t: f64) -> f64 {
        if t <= 1.0 {
            return 0.0;
        }
        if t >= 2.0 {
            return *self.cumulative.last().unwrap();
        }
        let h = 1.0 / BUMP_CELLS as f64;
        let k = (((t - 1.0) / h) as usize).min(BUMP_CELLS - 1);
        let a = 1.0 + k as f64 * h;
        self.cumulative[k] + simpson(bump_integrand, a, t)
    }

    pub fn chi(&self, t: f64) -> f64 {
        if t <= 1.0 {
            return 1.0;
        }
        if t >= 2.0 {
            return 0.0;
        }
        match self.kind {
            CutoffKind::Poly => {
                // primitive of sin^4(pi x) = (3 - 4 cos(2 pi x) + cos(4 pi x)) / 8
                let x = t - 1.0;
                let tau = std::f64::consts::TAU;
                1.0 - x + 2.0 / (3.0 * std::f64::consts::PI) * (tau * x).sin()
                    - 1.0 / (12.0 * std::f64::consts::PI) * (2.0 * tau * x).sin()
            }
            CutoffKind::Bump => 1.0 - self.norm * self.bump_cum(t),
        }
    }

    pub fn dchi(&self, t: f64) -> f64 {
        if !(1.0..2.0).contains(&t) {
            return 0.0;
        }
        match self.kind {
            CutoffKind::Poly => {
                let s = (std::f64::consts::PI * (t - 1.0)).sin();
                -(8.0 / 3.0) * s.powi(4)
            }
            CutoffKind::Bump => -self.norm * bump_integrand(t),
        }
    }

    pub fn d2chi(&self, t: f64) -> f64 {
        if !(1.0..2.0).contains(&t) {
            return 0.0;
        }
        match self.kind {
            CutoffKind::Poly => {
                let pi = std::f64::consts::PI;
                let s = (pi * (t - 1.0)).sin();
                let c = (pi * (t - 1.0)).cos();
                -(32.0 * pi / 3.0) * s.powi(3) * c
            }
            CutoffKind::Bump => {
                // chi'' = chi' * g'(t) with g(t) = -1/u, u = (t-1)(2-t)
                let u = (t - 1.0) * (2.0 - t);
                let du = 3.0 - 2.0 * t;
                let dg = du / (u * u);
                self.dchi(t) * dg
            }
        }
    }

    pub fn d3chi(&self, t: f64) -> f64 {
        if !(1.0..2.0).contains(&t) {
            return 0.0;
        }
        match self.kind {
            CutoffKind::Poly => {
                let pi = std::f64::consts::PI;
                let s = (pi * (t - 1.0)).sin();
                let c = (pi * (t - 1.0)).cos();
                -(32.0 * pi * pi / 3.0) * (3.0 * s.powi(2) * c.powi(2) - s.powi(4))
            }
            CutoffKind::Bump => {
                let u = (t - 1.0) * (2.0 - t);
                let du = 3.0 - 2.0 * t;
                let dg = du / (u * u);
                let d2g = -2.0 / (u * u) - 2.0 * du * du / (u * u * u);
                // d2g: d/dt [du u^-2] = d2u u^-2 - 2 du^2 u^-3, d2u = -2
                self.dchi(t) * (d2g + dg * dg)
            }
        }
    }

    /// eta(t) with -chi' = eta^2.
    pub fn eta(&self, t: f64) -> f64 {
        (-self.dchi(t)).max(0.0).sqrt()
    }

    /// Verifies the structural invariants; returns the quadrature value of
    /// the integral of -chi' (which must be 1).
    pub fn validate(&self, tol: f64) -> Result<f64> {
        let n = 20_000;
        let h = 3.0 / n as f64;
        let mut integral = 0.0;
        for k in 0..n {
            let a = k as f64 * h;
            integral += simpson(|t| -self.dchi(t), a, a + h);
        }
        for k in 0..=n {
            let t = k as f64 * h;
            if self.dchi(t) > 0.0 {
                return Err(Error::Diagnostic(format!("chi' > 0 at t = {t}")));
            }
            if !(1.0..2.0).contains(&t) && self.dchi(t) != 0.0 {
                return Err(Error::Diagnostic(format!(
                    "-chi' supported outside (1,2) at t = {t}"
                )));
            }
        }
        if (self.chi(0.5) - 1.0).abs() > tol || self.chi(2.5).abs() > tol {
            return Err(Error::Diagnostic("chi plateau values violated".into()));
        }
        if (integral - 1.0).abs() > tol {
            return Err(Error::Diagnostic(format!(
                "integral of -chi' = {integral}, expected 1"
            )));
        }
        Ok(integral)
    }
}
