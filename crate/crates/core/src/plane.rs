//! Legendrian two-planes, plane-tangential gradients and divergences of
//! Hamiltonian vector fields, and the pointwise monotonicity identity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cutoff::CutoffProfile;
use crate::error::{Error, Result};
use crate::field::{
    ArctanSigma, GaugeProfile, Phi, Product, Profile, RhoSq, ScalarField, Scaled, Sum, Translated,
};
use crate::heisenberg::{
    gauge, group_mul, koranyi_dist, HPoint, HTangent, UnitaryRotation,
};

pub const PLANE_TOL: f64 = 1e-10;

/// A Legendrian two-plane: a base point and an orthonormal horizontal
/// spanning pair (Z_1, Z_2) additionally satisfying the Lagrangian
/// condition <J_H Z_1, Z_2> = 0. Serializes as JSON {base, Z1, Z2} with
/// the frame vectors in ambient R^5 coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "PlaneWire", try_from = "PlaneWire")]
pub struct LegendrianPlane {
    base: HPoint,
    z1: HTangent,
    z2: HTangent,
}

#[derive(Serialize, Deserialize)]
struct PlaneWire {
    base: HPoint,
    #[serde(rename = "Z1")]
    z1: [f64; 5],
    #[serde(rename = "Z2")]
    z2: [f64; 5],
}

impl From<LegendrianPlane> for PlaneWire {
    fn from(p: LegendrianPlane) -> Self {
        PlaneWire {
            base: p.base,
            z1: p.z1.ambient(),
            z2: p.z2.ambient(),
        }
    }
}

impl TryFrom<PlaneWire> for LegendrianPlane {
    type Error = Error;
    fn try_from(w: PlaneWire) -> Result<Self> {
        LegendrianPlane::new(
            HTangent::from_ambient(w.base, w.z1),
            HTangent::from_ambient(w.base, w.z2),
        )
    }
}

impl LegendrianPlane {
    pub fn new(z1: HTangent, z2: HTangent) -> Result<Self> {
        if z1.base != z2.base {
            return Err(Error::InvalidInput("frame vectors have different base points".into()));
        }
        let plane = LegendrianPlane {
            base: z1.base,
            z1,
            z2,
        };
        plane.check_invariants(PLANE_TOL)?;
        Ok(plane)
    }

    /// Builds the plane without validating; used where the invariants hold
    /// by construction only up to discretization error.
    pub fn new_unchecked(z1: HTangent, z2: HTangent) -> Self {
        LegendrianPlane {
            base: z1.base,
            z1,
            z2,
        }
    }

    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        for (name, v) in [("Z1", &self.z1), ("Z2", &self.z2)] {
            if v.alpha().abs() > tol {
                return Err(Error::InvalidInput(format!(
                    "{name} is not horizontal: alpha = {:.3e}",
                    v.alpha()
                )));
            }
        }
        if (self.z1.norm_sq() - 1.0).abs() > tol
            || (self.z2.norm_sq() - 1.0).abs() > tol
            || self.z1.dot(&self.z2).abs() > tol
        {
            return Err(Error::InvalidInput("frame is not orthonormal".into()));
        }
        let j1 = crate::heisenberg::jh_unchecked(&self.z1);
        if j1.dot(&self.z2).abs() > tol {
            return Err(Error::InvalidInput(format!(
                "Lagrangian condition violated: <J_H Z1, Z2> = {:.3e}",
                j1.dot(&self.z2)
            )));
        }
        if (self.grad_z_norm_sq() - 2.0).abs() > tol {
            return Err(Error::InvalidInput("|grad^P z|^2 != 2".into()));
        }
        Ok(())
    }

    pub fn base(&self) -> HPoint {
        self.base
    }

    pub fn frame(&self) -> (&HTangent, &HTangent) {
        (&self.z1, &self.z2)
    }

    /// |grad^P z|^2 = sum over coordinates of the squared tangential gradient.
    pub fn grad_z_norm_sq(&self) -> f64 {
        let mut s = 0.0;
        for k in 0..4 {
            s += self.z1.coeffs[k].powi(2) + self.z2.coeffs[k].powi(2);
        }
        s
    }

    /// Rotates the spanning pair in-plane by angle `t` (same plane, new basis).
    pub fn rebase(&self, t: f64) -> LegendrianPlane {
        let (c, s) = (t.cos(), t.sin());
        LegendrianPlane::new_unchecked(
            self.z1.scale(c).add(&self.z2.scale(s)),
            self.z1.scale(-s).add(&self.z2.scale(c)),
        )
    }

    /// Left translation by q: base moves to q * base, frame coefficients are
    /// unchanged (the frame is left-invariant).
    pub fn translate(&self, q: HPoint) -> LegendrianPlane {
        let b = group_mul(q, self.base);
        LegendrianPlane {
            base: b,
            z1: HTangent::new(b, self.z1.coeffs),
            z2: HTangent::new(b, self.z2.coeffs),
        }
    }
}

/// Draws an approximately Haar-distributed element of U(2) by Gram-Schmidt
/// of a complex Gaussian 2x2 matrix (phases fixed by positive R diagonal).
pub fn haar_unitary<R: Rng>(rng: &mut R) -> UnitaryRotation {
    use rand::distributions::Distribution;
    let normal = rand_distr_standard_normal();
    let mut g = [[(0.0, 0.0); 2]; 2];
    for row in &mut g {
        for e in row.iter_mut() {
            *e = (normal.sample(rng), normal.sample(rng));
        }
    }
    // columns of g
    let c0 = [g[0][0], g[1][0]];
    let c1 = [g[0][1], g[1][1]];
    let n0 = (cnorm_sq(&c0)).sqrt();
    let q0 = [cscale(c0[0], 1.0 / n0), cscale(c0[1], 1.0 / n0)];
    // w = c1 - <q0, c1> q0
    let inner = cadd(cmul(cconj(q0[0]), c1[0]), cmul(cconj(q0[1]), c1[1]));
    let w = [
        csub(c1[0], cmul(inner, q0[0])),
        csub(c1[1], cmul(inner, q0[1])),
    ];
    let n1 = (cnorm_sq(&w)).sqrt();
    let q1 = [cscale(w[0], 1.0 / n1), cscale(w[1], 1.0 / n1)];
    UnitaryRotation::from_complex_unchecked([[q0[0], q1[0]], [q0[1], q1[1]]])
}

// minimal complex helpers on (re, im) pairs
type C = (f64, f64);
fn cmul(a: C, b: C) -> C {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}
fn cadd(a: C, b: C) -> C {
    (a.0 + b.0, a.1 + b.1)
}
fn csub(a: C, b: C) -> C {
    (a.0 - b.0, a.1 - b.1)
}
fn cconj(a: C) -> C {
    (a.0, -a.1)
}
fn cscale(a: C, t: f64) -> C {
    (a.0 * t, a.1 * t)
}
fn cnorm_sq(v: &[C; 2]) -> f64 {
    v[0].0 * v[0].0 + v[0].1 * v[0].1 + v[1].0 * v[1].0 + v[1].1 * v[1].1
}

fn rand_distr_standard_normal() -> impl rand::distributions::Distribution<f64> {
    // Box-Muller via the rand uniform; avoids a rand_distr dependency.
    struct BoxMuller;
    impl rand::distributions::Distribution<f64> for BoxMuller {
        fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        }
    }
    BoxMuller
}

/// Deterministic random Legendrian plane at p: samples A in U(2) Haar-like,
/// maps the Lagrangian plane span{e_1, e_3} of C^2 by A and lifts to
/// horizontal vectors at p through the frame isometry.
pub fn random_legendrian_plane(p: HPoint, seed: u64) -> LegendrianPlane {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_legendrian_plane_with(&mut rng, p)
}

pub fn random_legendrian_plane_with<R: Rng>(rng: &mut R, p: HPoint) -> LegendrianPlane {
    let a = haar_unitary(rng);
    let v1 = a.apply(&[1.0, 0.0, 0.0, 0.0]);
    let v2 = a.apply(&[0.0, 0.0, 1.0, 0.0]);
    let z1 = HTangent::new(p, [v1[0], v1[1], v1[2], v1[3], 0.0]);
    let z2 = HTangent::new(p, [v2[0], v2[1], v2[2], v2[3], 0.0]);
    LegendrianPlane::new(z1, z2).expect("construction satisfies the plane invariants")
}

/// Orthonormalizes a horizontal pair into a Legendrian plane, used when the
/// pair comes from discretized surface tangents. Fails on degenerate pairs.
pub fn plane_from_horizontal_pair(p: HPoint, a4: [f64; 4], b4: [f64; 4]) -> Result<LegendrianPlane> {
    let na = (a4.iter().map(|x| x * x).sum::<f64>()).sqrt();
    if na == 0.0 {
        return Err(Error::Domain("degenerate tangent pair".into()));
    }
    let e1: [f64; 4] = std::array::from_fn(|k| a4[k] / na);
    let d: f64 = (0..4).map(|k| e1[k] * b4[k]).sum();
    let w: [f64; 4] = std::array::from_fn(|k| b4[k] - d * e1[k]);
    let nw = (w.iter().map(|x| x * x).sum::<f64>()).sqrt();
    if nw == 0.0 {
        return Err(Error::Domain("degenerate tangent pair".into()));
    }
    let e2: [f64; 4] = std::array::from_fn(|k| w[k] / nw);
    Ok(LegendrianPlane::new_unchecked(
        HTangent::new(p, [e1[0], e1[1], e1[2], e1[3], 0.0]),
        HTangent::new(p, [e2[0], e2[1], e2[2], e2[3], 0.0]),
    ))
}

/// Components of the tangential gradient grad^P f in the basis (Z_1, Z_2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneGradient {
    pub coeffs: [f64; 2],
}

impl PlaneGradient {
    pub fn norm_sq(&self) -> f64 {
        self.coeffs[0] * self.coeffs[0] + self.coeffs[1] * self.coeffs[1]
    }

    pub fn dot(&self, other: &PlaneGradient) -> f64 {
        self.coeffs[0] * other.coeffs[0] + self.coeffs[1] * other.coeffs[1]
    }
}

/// Tangential gradient of f at the base point of P.
pub fn plane_gradient(f: &dyn ScalarField, plane: &LegendrianPlane) -> PlaneGradient {
    plane_gradient_from(plane, &f.gradient(plane.base))
}

/// Tangential gradient from a precomputed coordinate gradient.
pub fn plane_gradient_from(plane: &LegendrianPlane, g: &[f64; 5]) -> PlaneGradient {
    let (z1, z2) = plane.frame();
    let c = |v: &HTangent| {
        let a = v.ambient();
        (0..5).map(|k| g[k] * a[k]).sum::<f64>()
    };
    PlaneGradient {
        coeffs: [c(z1), c(z2)],
    }
}

fn plane_grad_coordinate(plane: &LegendrianPlane, k: usize) -> PlaneGradient {
    // tangential gradient of the coordinate z_k (k < 4): Z_i(z_k) = coeff k
    let (z1, z2) = plane.frame();
    PlaneGradient {
        coeffs: [z1.coeffs[k], z2.coeffs[k]],
    }
}

fn plane_grad_rho_sq(plane: &LegendrianPlane) -> PlaneGradient {
    let z = plane.base().z;
    let (z1, z2) = plane.frame();
    let c = |v: &HTangent| 2.0 * (0..4).map(|k| z[k] * v.coeffs[k]).sum::<f64>();
    PlaneGradient {
        coeffs: [c(z1), c(z2)],
    }
}

/// div_P W_F at the base point of P, via the tangential-derivative formula:
/// 2 div = sum_l [grad^P(dF/dz_{2l-1}) . grad^P z_{2l}
///              - grad^P(dF/dz_{2l}) . grad^P z_{2l-1}]
///       - |grad^P z|^2 dF/dphi - (1/2) grad^P(dF/dphi) . grad^P rho^2.
pub fn plane_divergence(f: &dyn ScalarField, plane: &LegendrianPlane) -> f64 {
    let p = plane.base();
    let grad = f.gradient(p);
    let hess = f.hessian(p);
    let pg_row = |k: usize| plane_gradient_from(plane, &hess[k]);
    let mut two_div = 0.0;
    for l in 0..2 {
        let i = 2 * l; // z_{2l-1} -> index 2l, z_{2l} -> index 2l+1
        two_div += pg_row(i).dot(&plane_grad_coordinate(plane, i + 1));
        two_div -= pg_row(i + 1).dot(&plane_grad_coordinate(plane, i));
    }
    two_div -= plane.grad_z_norm_sq() * grad[4];
    two_div -= 0.5 * pg_row(4).dot(&plane_grad_rho_sq(plane));
    0.5 * two_div
}

/// Derivatives of a potential F = F(rho^2, phi).
#[derive(Debug, Clone, Copy, Default)]
pub struct RadialDerivs {
    pub f: f64,
    pub fr: f64,
    pub fp: f64,
    pub frr: f64,
    pub frp: f64,
    pub fpp: f64,
}

pub trait RadialField: Sync {
    fn derivs(&self, rho_sq: f64, phi: f64) -> RadialDerivs;
}

/// div_P W_F for radial F = F(rho^2, phi) via the reduced formula:
/// 2 div = 2 grad^P(dF/drho^2) . grad^P phi - |grad^P z|^2 dF/dphi
///       - (1/2) grad^P(dF/dphi) . grad^P rho^2.
pub fn plane_divergence_radial(f: &dyn RadialField, plane: &LegendrianPlane) -> f64 {
    let p = plane.base();
    let d = f.derivs(p.rho_sq(), p.phi);
    let z = p.z;
    // coordinate gradient of dF/drho^2: (frr * 2 z_k, frp)
    let g_fr = [
        d.frr * 2.0 * z[0],
        d.frr * 2.0 * z[1],
        d.frr * 2.0 * z[2],
        d.frr * 2.0 * z[3],
        d.frp,
    ];
    let g_fp = [
        d.frp * 2.0 * z[0],
        d.frp * 2.0 * z[1],
        d.frp * 2.0 * z[2],
        d.frp * 2.0 * z[3],
        d.fpp,
    ];
    let pg_fr = plane_gradient_from(plane, &g_fr);
    let pg_fp = plane_gradient_from(plane, &g_fp);
    let pg_phi = plane_gradient(&Phi, plane);
    let two_div = 2.0 * pg_fr.dot(&pg_phi)
        - plane.grad_z_norm_sq() * d.fp
        - 0.5 * pg_fp.dot(&plane_grad_rho_sq(plane));
    0.5 * two_div
}

// ---------------------------------------------------------------------------
// annular monotonicity Hamiltonian and the pointwise identity
// ---------------------------------------------------------------------------

/// cw(t) = chi(t/a) - chi(t/eps), the annular window with derivatives.
#[derive(Clone)]
pub struct WindowProfile {
    pub chi: CutoffProfile,
    pub a: f64,
    pub eps: f64,
}

impl Profile for WindowProfile {
    fn eval(&self, t: f64) -> (f64, f64, f64) {
        let (a, e) = (self.a, self.eps);
        (
            self.chi.chi(t / a) - self.chi.chi(t / e),
            self.chi.dchi(t / a) / a - self.chi.dchi(t / e) / e,
            self.chi.d2chi(t / a) / (a * a) - self.chi.d2chi(t / e) / (e * e),
        )
    }
}

/// cduo(t) = a^{-1} chi'(t/a) - eps^{-1} chi'(t/eps), i.e. the derivative of
/// the window, again with its own derivatives.
#[derive(Clone)]
pub struct WindowDerivProfile {
    pub chi: CutoffProfile,
    pub a: f64,
    pub eps: f64,
}

impl Profile for WindowDerivProfile {
    fn eval(&self, t: f64) -> (f64, f64, f64) {
        let (a, e) = (self.a, self.eps);
        (
            self.chi.dchi(t / a) / a - self.chi.dchi(t / e) / e,
            self.chi.d2chi(t / a) / (a * a) - self.chi.d2chi(t / e) / (e * e),
            self.chi.d3chi(t / a) / (a * a * a) - self.chi.d3chi(t / e) / (e * e * e),
        )
    }
}

/// p(t) / t^k for a profile p.
pub struct RatioProfile<P> {
    pub inner: P,
    pub k: i32,
}

impl<P: Profile> Profile for RatioProfile<P> {
    fn eval(&self, t: f64) -> (f64, f64, f64) {
        let (v, d1, d2) = self.inner.eval(t);
        let k = self.k as f64;
        let tk = t.powi(self.k);
        (
            v / tk,
            d1 / tk - k * v / (tk * t),
            d2 / tk - 2.0 * k * d1 / (tk * t) + k * (k + 1.0) * v / (tk * t * t),
        )
    }
}

/// The monotonicity Hamiltonian F = (chi(r_q/a) - chi(r_q/eps)) arctan(sigma_q),
/// centered at q, smooth on all of H^2 and supported in the gauge annulus
/// eps <= r_q <= 2a.
pub struct MonotonicityHamiltonian {
    q: HPoint,
    a: f64,
    eps: f64,
    window: Translated<GaugeProfile<WindowProfile>>,
    angle: Translated<ArctanSigma>,
}

pub fn monotonicity_hamiltonian(
    q: HPoint,
    a: f64,
    eps: f64,
    chi: &CutoffProfile,
) -> Result<MonotonicityHamiltonian> {
    if !(eps > 0.0 && eps < a) {
        return Err(Error::Domain(format!(
            "monotonicity Hamiltonian requires 0 < eps < a (got eps = {eps}, a = {a})"
        )));
    }
    Ok(MonotonicityHamiltonian {
        q,
        a,
        eps,
        window: Translated::new(
            GaugeProfile(WindowProfile {
                chi: chi.clone(),
                a,
                eps,
            }),
            q,
        ),
        angle: Translated::new(ArctanSigma, q),
    })
}

impl MonotonicityHamiltonian {
    fn in_support(&self, p: HPoint) -> bool {
        let t = koranyi_dist(self.q, p);
        t > self.eps && t < 2.0 * self.a
    }
}

impl ScalarField for MonotonicityHamiltonian {
    fn value(&self, p: HPoint) -> f64 {
        if !self.in_support(p) {
            return 0.0;
        }
        self.window.value(p) * self.angle.value(p)
    }
    fn gradient(&self, p: HPoint) -> [f64; 5] {
        if !self.in_support(p) {
            return [0.0; 5];
        }
        let (w, a) = (self.window.value(p), self.angle.value(p));
        let (dw, da) = (self.window.gradient(p), self.angle.gradient(p));
        std::array::from_fn(|k| dw[k] * a + w * da[k])
    }
    fn hessian(&self, p: HPoint) -> [[f64; 5]; 5] {
        if !self.in_support(p) {
            return [[0.0; 5]; 5];
        }
        let (w, a) = (self.window.value(p), self.angle.value(p));
        let (dw, da) = (self.window.gradient(p), self.angle.gradient(p));
        let (hw, ha) = (self.window.hessian(p), self.angle.hessian(p));
        std::array::from_fn(|i| {
            std::array::from_fn(|j| hw[i][j] * a + w * ha[i][j] + dw[i] * da[j] + dw[j] * da[i])
        })
    }
}

/// dF/dphi of the monotonicity Hamiltonian (center 0), assembled from the
/// smooth closed-form expression
/// dF/dphi = (2 phi / r^3) cduo(r) arctan(sigma) + 2 cw(r) rho^2 / r^4.
pub fn mono_dphi_field(chi: &CutoffProfile, a: f64, eps: f64) -> Box<dyn ScalarField> {
    let cduo3 = GaugeProfile(RatioProfile {
        inner: WindowDerivProfile {
            chi: chi.clone(),
            a,
            eps,
        },
        k: 3,
    });
    let w4 = GaugeProfile(RatioProfile {
        inner: WindowProfile {
            chi: chi.clone(),
            a,
            eps,
        },
        k: 4,
    });
    Box::new(Sum(
        Scaled(2.0, Product(Phi, Product(cduo3, ArctanSigma))),
        Scaled(2.0, Product(w4, RhoSq)),
    ))
}

/// dF/drho^2 of the monotonicity Hamiltonian (center 0):
/// dF/drho^2 = (rho^2 / (2 r^3)) cduo(r) arctan(sigma) - 2 cw(r) phi / r^4.
pub fn mono_drho2_field(chi: &CutoffProfile, a: f64, eps: f64) -> Box<dyn ScalarField> {
    let cduo3 = GaugeProfile(RatioProfile {
        inner: WindowDerivProfile {
            chi: chi.clone(),
            a,
            eps,
        },
        k: 3,
    });
    let w4 = GaugeProfile(RatioProfile {
        inner: WindowProfile {
            chi: chi.clone(),
            a,
            eps,
        },
        k: 4,
    });
    Box::new(Sum(
        Scaled(0.5, Product(RhoSq, Product(cduo3, ArctanSigma))),
        Scaled(-2.0, Product(w4, Phi)),
    ))
}

/// Pointwise residual of the monotonicity identity at the plane P, with
/// window scales (a, eps) and center 0: the absolute difference between
///
///   (1/2) grad^P rho^2 . grad^P[dF/dphi] + |grad^P z|^2 dF/dphi
///   - 2 grad^P phi . grad^P[dF/drho^2]
///
/// and its cutoff-side closed form. Requires the base point off the phi-axis.
pub fn magic_identity_residual(
    plane: &LegendrianPlane,
    a: f64,
    eps: f64,
    chi: &CutoffProfile,
) -> Result<f64> {
    let p = plane.base();
    if p.rho() == 0.0 {
        return Err(Error::Domain(
            "the pointwise identity is evaluated off the phi-axis".into(),
        ));
    }
    if !(eps > 0.0 && eps < a) {
        return Err(Error::Domain("requires 0 < eps < a".into()));
    }
    let dphi = mono_dphi_field(chi, a, eps);
    let drho2 = mono_drho2_field(chi, a, eps);
    let lhs = 0.5
        * plane_grad_rho_sq(plane).dot(&plane_gradient(dphi.as_ref(), plane))
        + plane.grad_z_norm_sq() * dphi.value(p)
        - 2.0 * plane_gradient(&Phi, plane).dot(&plane_gradient(drho2.as_ref(), plane));

    let r = gauge(p);
    let cduo = chi.dchi(r / a) / a - chi.dchi(r / eps) / eps;
    let cw = chi.chi(r / a) - chi.chi(r / eps);
    let atan_s = crate::heisenberg::arctan_sigma(p)?;
    let pg_r = plane_gradient(&crate::field::Gauge, plane);
    let pg_atan = plane_gradient(&ArctanSigma, plane);
    // T = r^{-3} cduo(r) arctan(sigma)
    let t_field = Product(
        GaugeProfile(RatioProfile {
            inner: WindowDerivProfile {
                chi: chi.clone(),
                a,
                eps,
            },
            k: 3,
        }),
        ArctanSigma,
    );
    let pg_t = plane_gradient(&t_field, plane);
    let rhs = 2.0 * pg_r.norm_sq() / r * cduo
        + plane.grad_z_norm_sq() * (2.0 * p.phi / r.powi(3)) * cduo * atan_s
        - 0.5 * r.powi(4) * pg_atan.dot(&pg_t)
        + 2.0 * pg_atan.norm_sq() * cw;
    Ok((lhs - rhs).abs())
}

/// Residual of the algebraic identity
/// (1/2) rho^2 |grad^P z|^2 = rho^2 |grad^P rho|^2 + |grad^P phi|^2.
pub fn kinetic_split_residual(plane: &LegendrianPlane) -> f64 {
    let p = plane.base();
    let rho2 = p.rho_sq();
    let pg_rho2 = plane_grad_rho_sq(plane);
    let pg_phi = plane_gradient(&Phi, plane);
    // rho^2 |grad^P rho|^2 = |grad^P rho^2|^2 / 4
    let lhs = 0.5 * rho2 * plane.grad_z_norm_sq();
    let rhs = 0.25 * pg_rho2.norm_sq() + pg_phi.norm_sq();
    (lhs - rhs).abs()
}

/// Residual of the identity
/// grad^P rho^2 . grad^P(rho^2/r^4) + 2 |grad^P z|^2 rho^2/r^4
///   + 4 grad^P phi . grad^P(phi/r^4) = 2 |grad^P arctan(sigma)|^2.
pub fn angular_energy_residual(plane: &LegendrianPlane) -> f64 {
    struct InvPow4;
    impl Profile for InvPow4 {
        fn eval(&self, t: f64) -> (f64, f64, f64) {
            let t4 = t.powi(4);
            (1.0 / t4, -4.0 / (t4 * t), 20.0 / (t4 * t * t))
        }
    }
    let rho2_over_r4 = Product(RhoSq, GaugeProfile(InvPow4));
    let phi_over_r4 = Product(Phi, GaugeProfile(InvPow4));
    let lhs = plane_grad_rho_sq(plane).dot(&plane_gradient(&rho2_over_r4, plane))
        + 2.0 * plane.grad_z_norm_sq() * rho2_over_r4.value(plane.base())
        + 4.0 * plane_gradient(&Phi, plane).dot(&plane_gradient(&phi_over_r4, plane));
    let rhs = 2.0 * plane_gradient(&ArctanSigma, plane).norm_sq();
    (lhs - rhs).abs()
}

/// |grad^{P^perp,H} r|^2, the squared norm of the horizontal gauge gradient
/// projected off the plane; used in the Dirichlet-term identity
/// |grad^P arctan(sigma)|^2 = (4 / r^2) |grad^{P^perp,H} r|^2.
pub fn grad_r_perp_norm_sq(plane: &LegendrianPlane) -> f64 {
    let gh = crate::field::horizontal_gradient(&crate::field::Gauge, plane.base());
    let pg = plane_gradient_from(plane, &crate::field::Gauge.gradient(plane.base()));
    gh.norm_sq() - pg.norm_sq()
}
