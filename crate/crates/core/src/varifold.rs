//! Discrete varifolds: weighted samples of Legendrian planes, the windowed
//! density quantity Theta and its small-radius limit, stationarity pairing,
//! and mass-ratio diagnostics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cutoff::CutoffProfile;
use crate::error::{Error, Result};
use crate::field::{ArctanSigma, GaugeProfile, Product, Profile, ScalarField, Translated};
use crate::heisenberg::{dilate, gauge, group_inv, group_mul, HPoint, HTangent};
use crate::plane::{plane_gradient, LegendrianPlane, RatioProfile};

/// Kahan-compensated sum in a fixed (slice) order: deterministic regardless
/// of how the terms were produced.
pub fn stable_sum(terms: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut c = 0.0;
    for &x in terms {
        let y = x - c;
        let t = s + y;
        c = (t - s) - y;
        s = t;
    }
    s
}

#[derive(Debug, Clone, Default)]
pub struct DiscreteVarifold {
    samples: Vec<(LegendrianPlane, f64)>,
}

impl DiscreteVarifold {
    pub fn new(samples: Vec<(LegendrianPlane, f64)>) -> Result<Self> {
        if samples.iter().any(|(_, w)| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidInput("sample weights must be positive and finite".into()));
        }
        Ok(DiscreteVarifold { samples })
    }

    pub fn samples(&self) -> &[(LegendrianPlane, f64)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        let w: Vec<f64> = self.samples.iter().map(|(_, w)| *w).collect();
        stable_sum(&w)
    }

    /// Mass carried by base points with d_K(q, p) < r.
    pub fn mass_in_ball(&self, q: HPoint, r: f64) -> f64 {
        let w: Vec<f64> = self
            .samples
            .iter()
            .filter(|(pl, _)| crate::heisenberg::koranyi_dist(q, pl.base()) < r)
            .map(|(_, w)| *w)
            .collect();
        stable_sum(&w)
    }

    pub fn union(mut self, other: DiscreteVarifold) -> DiscreteVarifold {
        self.samples.extend(other.samples);
        self
    }

    pub fn translate(&self, q: HPoint) -> DiscreteVarifold {
        DiscreteVarifold {
            samples: self
                .samples
                .iter()
                .map(|(pl, w)| (pl.translate(q), *w))
                .collect(),
        }
    }

    /// Pushforward under the dilation delta_t: bases dilate, frame
    /// coefficients are dilation-invariant, two-dimensional weights scale
    /// by t^2.
    pub fn dilate(&self, t: f64) -> DiscreteVarifold {
        DiscreteVarifold {
            samples: self
                .samples
                .iter()
                .map(|(pl, w)| {
                    let b = dilate(t, pl.base());
                    let (z1, z2) = pl.frame();
                    (
                        LegendrianPlane::new_unchecked(
                            HTangent::new(b, z1.coeffs),
                            HTangent::new(b, z2.coeffs),
                        ),
                        w * t * t,
                    )
                })
                .collect(),
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header: Vec<String> = Vec::new();
        for pre in ["base", "Z1", "Z2"] {
            for k in 1..=5 {
                header.push(format!("{pre}_{k}"));
            }
        }
        header.push("weight".into());
        out.write_record(&header)?;
        for (pl, wt) in &self.samples {
            let mut rec = Vec::with_capacity(16);
            rec.extend(pl.base().coords().iter().map(|x| x.to_string()));
            rec.extend(pl.frame().0.ambient().iter().map(|x| x.to_string()));
            rec.extend(pl.frame().1.ambient().iter().map(|x| x.to_string()));
            rec.push(wt.to_string());
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        {
            let head = rdr.headers().map_err(|e| Error::Parse {
                line: 1,
                msg: e.to_string(),
            })?;
            let mut want: Vec<String> = Vec::new();
            for pre in ["base", "Z1", "Z2"] {
                for k in 1..=5 {
                    want.push(format!("{pre}_{k}"));
                }
            }
            want.push("weight".into());
            if head.len() != 16 || head.iter().zip(&want).any(|(a, b)| a != b) {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!("bad header: expected {}", want.join(",")),
                });
            }
        }
        let mut samples = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let line = k + 2; // header is line 1
            let rec = rec.map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
            if rec.len() != 16 {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected 16 columns, got {}", rec.len()),
                });
            }
            let mut vals = [0.0f64; 16];
            for (m, field) in rec.iter().enumerate() {
                vals[m] = field.trim().parse().map_err(|e| Error::Parse {
                    line,
                    msg: format!("column {}: {e}", m + 1),
                })?;
            }
            let base = HPoint::from_coords(std::array::from_fn(|m| vals[m]));
            let z1 = HTangent::from_ambient(base, std::array::from_fn(|m| vals[5 + m]));
            let z2 = HTangent::from_ambient(base, std::array::from_fn(|m| vals[10 + m]));
            let plane = LegendrianPlane::new(z1, z2).map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
            let weight = vals[15];
            if !(weight > 0.0) {
                return Err(Error::Parse {
                    line,
                    msg: "weight must be positive".into(),
                });
            }
            samples.push((plane, weight));
        }
        DiscreteVarifold::new(samples)
    }
}

/// chi'(t/a)/a and its first two derivatives in t.
struct DchiProfile {
    chi: CutoffProfile,
    a: f64,
}

impl Profile for DchiProfile {
    fn eval(&self, t: f64) -> (f64, f64, f64) {
        let a = self.a;
        (
            self.chi.dchi(t / a) / a,
            self.chi.d2chi(t / a) / (a * a),
            self.chi.d3chi(t / a) / (a * a * a),
        )
    }
}

/// Per-sample contributions to the windowed density at scale a: the full
/// three-term integrand and the two-term limit integrand.
fn theta_integrands(
    plane: &LegendrianPlane,
    q: HPoint,
    a: f64,
    chi: &CutoffProfile,
) -> (f64, f64) {
    let p = plane.base();
    let rel = group_mul(group_inv(q), p);
    let r = gauge(rel);
    if r == 0.0 || r <= a || r >= 2.0 * a {
        return (0.0, 0.0);
    }
    let dchi = chi.dchi(r / a) / a;
    let atan_s = (2.0 * rel.phi).atan2(rel.rho_sq());
    let gauge_q = Translated::new(crate::field::Gauge, q);
    let pg_r = plane_gradient(&gauge_q, plane);
    let term1 = -pg_r.norm_sq() / r * dchi;
    let term2 = -(2.0 * rel.phi / r.powi(3)) * dchi * atan_s;
    let atan_q = Translated::new(ArctanSigma, q);
    let pg_atan = plane_gradient(&atan_q, plane);
    // T = r^{-3} (chi'(r/a)/a) arctan(sigma), translated to the center q
    let t_field = Translated::new(
        Product(
            GaugeProfile(RatioProfile {
                inner: DchiProfile { chi: chi.clone(), a },
                k: 3,
            }),
            ArctanSigma,
        ),
        q,
    );
    let pg_t = plane_gradient(&t_field, plane);
    let term3 = 0.25 * r.powi(4) * pg_atan.dot(&pg_t);
    (term1 + term2 + term3, term1 + term2)
}

/// The windowed density quantity Theta(q, a): a cutoff-smoothed density
/// ratio which is nondecreasing in a when the varifold is Hamiltonian
/// stationary. Samples at the center are skipped (the integrand vanishes
/// there identically).
pub fn capital_theta(
    v: &DiscreteVarifold,
    q: HPoint,
    a: f64,
    chi: &CutoffProfile,
) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("window scale must be positive, got {a}")));
    }
    let terms: Vec<f64> = v
        .samples
        .par_iter()
        .map(|(pl, w)| w * theta_integrands(pl, q, a, chi).0)
        .collect();
    Ok(stable_sum(&terms))
}

/// The two-term limit integrand sum at scale a: this is the quantity whose
/// a -> 0 limit defines the density, and it is nonnegative sample-wise.
pub fn theta_limit_form(
    v: &DiscreteVarifold,
    q: HPoint,
    a: f64,
    chi: &CutoffProfile,
) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("window scale must be positive, got {a}")));
    }
    let terms: Vec<f64> = v
        .samples
        .par_iter()
        .map(|(pl, w)| w * theta_integrands(pl, q, a, chi).1)
        .collect();
    Ok(stable_sum(&terms))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityReport {
    pub center: HPoint,
    /// ascending window scales
    pub radii: Vec<f64>,
    pub theta_values: Vec<f64>,
    /// two-term limit integrand at the same scales
    pub limit_form_values: Vec<f64>,
    pub extrapolated_density: f64,
    /// max over consecutive scale pairs of (Theta(small) - Theta(big))_+
    pub monotonicity_violation: f64,
}

fn fit_power_law(radii: &[f64], theta: &[f64]) -> f64 {
    // Theta(a) = theta0 + c a^alpha, alpha in [0.5, 2]: golden-section on
    // alpha with linear least squares for (theta0, c).
    let lsq = |alpha: f64| -> (f64, f64) {
        let n = radii.len() as f64;
        let xs: Vec<f64> = radii.iter().map(|a| a.powf(alpha)).collect();
        let mx = xs.iter().sum::<f64>() / n;
        let my = theta.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        if sxx == 0.0 {
            return (my, f64::INFINITY);
        }
        let sxy: f64 = xs
            .iter()
            .zip(theta)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum();
        let c = sxy / sxx;
        let t0 = my - c * mx;
        let res: f64 = xs
            .iter()
            .zip(theta)
            .map(|(x, y)| (t0 + c * x - y).powi(2))
            .sum();
        (t0, res)
    };
    let (mut lo, mut hi) = (0.5f64, 2.0f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut f1, mut f2) = (lsq(x1).1, lsq(x2).1);
    for _ in 0..60 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = lsq(x1).1;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = lsq(x2).1;
        }
    }
    lsq(0.5 * (lo + hi)).0
}

fn theta_scan(
    v: &DiscreteVarifold,
    q: HPoint,
    radii: &[f64],
    chi: &CutoffProfile,
    extrapolate: bool,
) -> Result<DensityReport> {
    let mut radii: Vec<f64> = radii.to_vec();
    radii.retain(|a| *a > 0.0);
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    radii.dedup();
    if radii.len() < 3 {
        return Err(Error::Diagnostic(
            "density scan needs at least 3 distinct positive radii".into(),
        ));
    }
    let mut theta_values = Vec::with_capacity(radii.len());
    let mut limit_form_values = Vec::with_capacity(radii.len());
    for &a in &radii {
        theta_values.push(capital_theta(v, q, a, chi)?);
        limit_form_values.push(theta_limit_form(v, q, a, chi)?);
    }
    let mut violation = 0.0f64;
    for k in 1..radii.len() {
        violation = violation.max(theta_values[k - 1] - theta_values[k]);
    }
    let extrapolated = if extrapolate {
        let m = radii.len().min(5);
        fit_power_law(&radii[..m], &theta_values[..m])
    } else {
        theta_values[0]
    };
    Ok(DensityReport {
        center: q,
        radii,
        theta_values,
        limit_form_values,
        extrapolated_density: extrapolated,
        monotonicity_violation: violation.max(0.0),
    })
}

/// Evaluates Theta across the given scales and extrapolates the a -> 0
/// limit by fitting Theta(a) = theta + c a^alpha over the smallest scales.
pub fn density(
    v: &DiscreteVarifold,
    q: HPoint,
    chi: &CutoffProfile,
    radii: &[f64],
) -> Result<DensityReport> {
    theta_scan(v, q, radii, chi, true)
}

/// Theta values across scales with the worst monotonicity violation; no
/// extrapolation (the smallest-scale value is reported as the density).
pub fn monotonicity_scan(
    v: &DiscreteVarifold,
    q: HPoint,
    radii: &[f64],
    chi: &CutoffProfile,
) -> Result<DensityReport> {
    theta_scan(v, q, radii, chi, false)
}

/// First-variation pairing: sum of weight * div_P W_F over samples. Zero
/// (to quadrature accuracy) exactly when the varifold is Hamiltonian
/// stationary in the support of F.
pub fn stationarity_pairing(v: &DiscreteVarifold, f: &dyn ScalarField) -> f64 {
    let terms: Vec<f64> = v
        .samples
        .par_iter()
        .map(|(pl, w)| w * crate::plane::plane_divergence(f, pl))
        .collect();
    stable_sum(&terms)
}

/// Ratio of the ball mass ratio at radius r to the annulus mass ratio at
/// scale s: |v|(B_r)/r^2 over |v|(B_2s \ B_s)/s^2. A diagnostic for the
/// universal mass bound; flat planes through q give 1/3 in the limit.
pub fn mass_ratio_check(v: &DiscreteVarifold, q: HPoint, r: f64, s: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 0.5 * s) {
        return Err(Error::Domain(format!(
            "mass ratio needs 0 < r <= s/2 (got r = {r}, s = {s})"
        )));
    }
    let annulus = v.mass_in_ball(q, 2.0 * s) - v.mass_in_ball(q, s);
    if annulus <= 0.0 {
        return Err(Error::Diagnostic("annulus carries no mass".into()));
    }
    Ok((v.mass_in_ball(q, r) / (r * r)) / (annulus / (s * s)))
}

/// The tangential Dirichlet integral of arctan(sigma_q) over the punctured
/// ball 0 < r_q < b (sharp indicator window).
pub fn arctan_sigma_dirichlet(v: &DiscreteVarifold, q: HPoint, b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::Domain("ball radius must be positive".into()));
    }
    let terms: Vec<f64> = v
        .samples
        .par_iter()
        .map(|(pl, w)| {
            let r = crate::heisenberg::koranyi_dist(q, pl.base());
            if r == 0.0 || r >= b {
                return 0.0;
            }
            let atan_q = Translated::new(ArctanSigma, q);
            w * plane_gradient(&atan_q, pl).norm_sq()
        })
        .collect();
    Ok(stable_sum(&terms))
}

// ---------------------------------------------------------------------------
// exactly-sampled model varifolds
// ---------------------------------------------------------------------------

/// Samples the flat Legendrian disk of radius `extent` through the base of
/// `plane`, spanned by its frame, on a polar grid (midpoint rule), with the
/// given multiplicity. The disk {base * (t1 a + t2 b, 0)} of a Lagrangian
/// direction plane is an exact Legendrian surface with constant tangent
/// plane.
pub fn flat_plane_varifold(
    plane: &LegendrianPlane,
    extent: f64,
    n_r: usize,
    n_ang: usize,
    mult: u32,
) -> Result<DiscreteVarifold> {
    if !(extent > 0.0) || n_r < 2 || n_ang < 4 {
        return Err(Error::InvalidInput("flat plane sampler needs extent > 0, n_r >= 2, n_ang >= 4".into()));
    }
    let (z1, z2) = plane.frame();
    let (a, b) = (z1.coeffs, z2.coeffs);
    let dr = extent / n_r as f64;
    let dth = std::f64::consts::TAU / n_ang as f64;
    let mut samples = Vec::with_capacity(n_r * n_ang);
    for i in 0..n_r {
        let r = (i as f64 + 0.5) * dr;
        for j in 0..n_ang {
            let th = (j as f64 + 0.5) * dth;
            let (t1, t2) = (r * th.cos(), r * th.sin());
            let z: [f64; 4] = std::array::from_fn(|k| t1 * a[k] + t2 * b[k]);
            let p = group_mul(plane.base(), HPoint::new(z, 0.0));
            let pl = LegendrianPlane::new_unchecked(
                HTangent::new(p, a),
                HTangent::new(p, b),
            );
            samples.push((pl, mult as f64 * r * dr * dth));
        }
    }
    DiscreteVarifold::new(samples)
}

/// The Clifford blow-down varifold at the origin: plane measure uniform in
/// the two rotation angles of P^{(a,b)} = span{cos a X_1 + sin a Y_1,
/// cos b X_2 + sin b Y_2}, base measure 2 pi H^1 on the phi-axis segment
/// |phi| <= phi_extent.
pub fn clifford_blowdown_varifold(
    phi_extent: f64,
    n_phi: usize,
    n_ang: usize,
) -> Result<DiscreteVarifold> {
    if !(phi_extent > 0.0) || n_phi < 2 || n_ang < 2 {
        return Err(Error::InvalidInput("blow-down sampler needs positive extent and n >= 2".into()));
    }
    let dphi = 2.0 * phi_extent / n_phi as f64;
    let dang = std::f64::consts::TAU / n_ang as f64;
    // weight = 2 pi dphi * (da db / (2 pi)^2)
    let w = 2.0 * std::f64::consts::PI * dphi * dang * dang
        / std::f64::consts::TAU.powi(2);
    let mut samples = Vec::with_capacity(n_phi * n_ang * n_ang);
    for m in 0..n_phi {
        let phi = -phi_extent + (m as f64 + 0.5) * dphi;
        let p = HPoint::new([0.0; 4], phi);
        for ia in 0..n_ang {
            let a = (ia as f64 + 0.5) * dang;
            for ib in 0..n_ang {
                let b = (ib as f64 + 0.5) * dang;
                let pl = LegendrianPlane::new_unchecked(
                    HTangent::new(p, [a.cos(), a.sin(), 0.0, 0.0, 0.0]),
                    HTangent::new(p, [0.0, 0.0, b.cos(), b.sin(), 0.0]),
                );
                samples.push((pl, w));
            }
        }
    }
    DiscreteVarifold::new(samples)
}
