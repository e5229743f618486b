//! Scalar fields on H^2 with a derivative-evaluation contract.
//!
//! A [`ScalarField`] exposes its value, coordinate gradient and coordinate
//! Hessian in the variables (z_1,..,z_4, phi). The analytic implementations
//! below (gauge, phase, left translations, cutoff windows) are the workhorses
//! of the divergence and monotonicity computations; a centered
//! finite-difference fallback is provided for fields given only by values.

use crate::error::Result;
use crate::heisenberg::{
    arctan_sigma_unchecked, gauge, group_inv, group_mul, jh_unchecked, HPoint, HTangent,
};

/// Scalar-valued map on H^2 with first and second coordinate derivatives.
pub trait ScalarField: Sync {
    fn value(&self, p: HPoint) -> f64;

    /// Coordinate gradient (d/dz_1, .., d/dz_4, d/dphi).
    fn gradient(&self, p: HPoint) -> [f64; 5];

    /// Coordinate Hessian, symmetric 5x5.
    fn hessian(&self, p: HPoint) -> [[f64; 5]; 5];
}

/// Horizontal gradient: the projection of the Riemannian gradient onto H,
/// with frame coefficients (df(X_1), df(Y_1), df(X_2), df(Y_2), 0).
pub fn horizontal_gradient(f: &dyn ScalarField, p: HPoint) -> HTangent {
    horizontal_gradient_from(p, &f.gradient(p))
}

/// Same as [`horizontal_gradient`] but from a precomputed coordinate gradient.
pub fn horizontal_gradient_from(p: HPoint, g: &[f64; 5]) -> HTangent {
    let z = p.z;
    HTangent::new(
        p,
        [
            g[0] - z[1] * g[4],
            g[1] + z[0] * g[4],
            g[2] - z[3] * g[4],
            g[3] + z[2] * g[4],
            0.0,
        ],
    )
}

/// Full Riemannian gradient in frame coefficients (the d_phi coefficient is
/// df(d_phi) = dF/dphi since the frame is orthonormal).
pub fn riemannian_gradient(f: &dyn ScalarField, p: HPoint) -> HTangent {
    let g = f.gradient(p);
    let mut h = horizontal_gradient_from(p, &g);
    h.coeffs[4] = g[4];
    h
}

/// Hamiltonian vector field W_F at p: 2 W_F = J_H grad^H F - 2 F d_phi.
pub fn hamiltonian_vector(f: &dyn ScalarField, p: HPoint) -> HTangent {
    let gh = horizontal_gradient(f, p);
    let mut w = jh_unchecked(&gh).scale(0.5);
    w.coeffs[4] = -f.value(p);
    w
}

// ---------------------------------------------------------------------------
// analytic fields
// ---------------------------------------------------------------------------

/// The coordinate function z_k (k = 0..3) or phi (k = 4).
pub struct Coordinate(pub usize);

impl ScalarField for Coordinate {
    fn value(&self, p: HPoint) -> f64 {
        p.coords()[self.0]
    }
    fn gradient(&self, _p: HPoint) -> [f64; 5] {
        let mut g = [0.0; 5];
        g[self.0] = 1.0;
        g
    }
    fn hessian(&self, _p: HPoint) -> [[f64; 5]; 5] {
        [[0.0; 5]; 5]
    }
}

/// The Legendrian coordinate phi.
pub struct Phi;

impl ScalarField for Phi {
    fn value(&self, p: HPoint) -> f64 {
        p.phi
    }
    fn gradient(&self, _p: HPoint) -> [f64; 5] {
        [0.0, 0.0, 0.0, 0.0, 1.0]
    }
    fn hessian(&self, _p: HPoint) -> [[f64; 5]; 5] {
        [[0.0; 5]; 5]
    }
}

/// rho^2 = |z|^2.
pub struct RhoSq;

impl ScalarField for RhoSq {
    fn value(&self, p: HPoint) -> f64 {
        p.rho_sq()
    }
    fn gradient(&self, p: HPoint) -> [f64; 5] {
        [2.0 * p.z[0], 2.0 * p.z[1], 2.0 * p.z[2], 2.0 * p.z[3], 0.0]
    }
    fn hessian(&self, _p: HPoint) -> [[f64; 5]; 5] {
        let mut h = [[0.0; 5]; 5];
        for (k, row) in h.iter_mut().enumerate().take(4) {
            row[k] = 2.0;
        }
        h
    }
}

/// The Folland-Koranyi gauge r = (rho^4 + 4 phi^2)^{1/4}. Derivatives are
/// singular at the origin and must not be evaluated there.
pub struct Gauge;

impl Gauge {
    fn g_and_derivs(p: HPoint) -> (f64, [f64; 5], [[f64; 5]; 5]) {
        // g = rho^4 + 4 phi^2
        let rho2 = p.rho_sq();
        let g = rho2 * rho2 + 4.0 * p.phi * p.phi;
        let mut dg = [0.0; 5];
        for k in 0..4 {
            dg[k] = 4.0 * rho2 * p.z[k];
        }
        dg[4] = 8.0 * p.phi;
        let mut hg = [[0.0; 5]; 5];
        for i in 0..4 {
            for j in 0..4 {
                hg[i][j] = 8.0 * p.z[i] * p.z[j];
            }
            hg[i][i] += 4.0 * rho2;
        }
        hg[4][4] = 8.0;
        (g, dg, hg)
    }
}

impl ScalarField for Gauge {
    fn value(&self, p: HPoint) -> f64 {
        gauge(p)
    }
    fn gradient(&self, p: HPoint) -> [f64; 5] {
        let (g, dg, _) = Self::g_and_derivs(p);
        let c = 0.25 * g.powf(-0.75);
        let mut out = [0.0; 5];
        for k in 0..5 {
            out[k] = c * dg[k];
        }
        out
    }
    fn hessian(&self, p: HPoint) -> [[f64; 5]; 5] {
        let (g, dg, hg) = Self::g_and_derivs(p);
        let c1 = 0.25 * g.powf(-0.75);
        let c2 = -0.1875 * g.powf(-1.75);
        let mut out = [[0.0; 5]; 5];
        for i in 0..5 {
            for j in 0..5 {
                out[i][j] = c1 * hg[i][j] + c2 * dg[i] * dg[j];
            }
        }
        out
    }
}

/// arctan(sigma) = atan2(2 phi, rho^2), smooth on H^2 \ {0}.
pub struct ArctanSigma;

impl ScalarField for ArctanSigma {
    fn value(&self, p: HPoint) -> f64 {
        arctan_sigma_unchecked(p)
    }
    fn gradient(&self, p: HPoint) -> [f64; 5] {
        // d atan2(y,x) = (x dy - y dx) / (x^2 + y^2), x = rho^2, y = 2 phi
        let x = p.rho_sq();
        let y = 2.0 * p.phi;
        let g = x * x + y * y;
        let mut out = [0.0; 5];
        for k in 0..4 {
            out[k] = -y * 2.0 * p.z[k] / g;
        }
        out[4] = x * 2.0 / g;
        out
    }
    fn hessian(&self, p: HPoint) -> [[f64; 5]; 5] {
        let x = p.rho_sq();
        let y = 2.0 * p.phi;
        let g = x * x + y * y;
        let mut dx = [0.0; 5];
        for k in 0..4 {
            dx[k] = 2.0 * p.z[k];
        }
        let mut dy = [0.0; 5];
        dy[4] = 2.0;
        let mut dg = [0.0; 5];
        for k in 0..5 {
            dg[k] = 2.0 * x * dx[k] + 2.0 * y * dy[k];
        }
        // N_i = x dy_i - y dx_i; hess = dN/g - N dg / g^2
        let mut n = [0.0; 5];
        for k in 0..5 {
            n[k] = x * dy[k] - y * dx[k];
        }
        let mut out = [[0.0; 5]; 5];
        for i in 0..5 {
            for j in 0..5 {
                // d_j N_i = dx_j dy_i - dy_j dx_i - y d2x_ij (d2y = 0)
                let d2x = if i == j && i < 4 { 2.0 } else { 0.0 };
                let dn = dx[j] * dy[i] - dy[j] * dx[i] - y * d2x;
                out[i][j] = dn / g - n[i] * dg[j] / (g * g);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// combinators
// ---------------------------------------------------------------------------

/// Left translation F |-> F(q^{-1} * x). The map x -> q^{-1} * x is affine
/// with a constant Jacobian, so derivatives pull back exactly.
pub struct Translated<F> {
    inner: F,
    qinv: HPoint,
    /// row k of the constant Jacobian of x -> qinv * x
    jac: [[f64; 5]; 5],
}

impl<F> Translated<F> {
    pub fn new(inner: F, q: HPoint) -> Self {
        let qinv = group_inv(q);
        let w = qinv.z;
        let mut jac = [[0.0; 5]; 5];
        for (k, row) in jac.iter_mut().enumerate().take(4) {
            row[k] = 1.0;
        }
        // phi'' = psi + x_phi + (w1 x2 - w2 x1 + w3 x4 - w4 x3)
        jac[4] = [-w[1], w[0], -w[3], w[2], 1.0];
        Translated { inner, qinv, jac }
    }

    fn map(&self, p: HPoint) -> HPoint {
        group_mul(self.qinv, p)
    }
}

impl<F: ScalarField> ScalarField for Translated<F> {
    fn value(&self, p: HPoint) -> f64 {
        self.inner.value(self.map(p))
    }
    fn gradient(&self, p: HPoint) -> [f64; 5] {
        let g = self.inner.gradient(self.map(p));
        let mut out = [0.0; 5];
        for j in 0..5 {
            out[j] = (0..5).map(|i| self.jac[i][j] * g[i]).sum();
        }
        out
    }
    fn hessian(&self, p: HPoint) -> [[f64; 5]; 5] {
        let h = self.inner.hessian(self.map(p));
        let mut out = [[0.0; 5]; 5];
        for a in 0..5 {
            for b in 0..5 {
                let mut s = 0.0;
                for i in 0..5 {
                    for j in 0..5 {
                        s += self.jac[i][a] * h[i][j] * self.jac[j][b];
                    }
                }
                out[a][b] = s;
            }
        }
        out
    }
}

/// Pointwise product of two fields.
pub struct Product<A, B>(pub A, pub B);

impl<A: ScalarField, B: ScalarField> ScalarField for Product<A, B> {
    fn value(&self, p: HPoint) -> f64 {
        self.0.value(p) * self.1.value(p)
    }
    fn gradient(&self, p: HPoint) -> [f64; 5] {
        let (u, v) = (self.0.value(p), self.1.value(p));
        let (du, dv) = (self.0.gradient(p), self.1.gradient(p));
        let mut out = [0.0; 5];
        for k in 0..5 {
            out[k] = du[k] * v + u * dv[k];
        }
        out
    }
    fn hessian(&self, p: HPoint) -> [[f64; 5]; 5] {
        let (u, v) = (self.0.value(p), self.1.value(p));
        let (du, dv) = (self.0.gradient(p), self.1.gradient(p));
        let (hu, hv) = (self.0.hessian(p), self.1.hessian(p));
        let mut out = [[0.0; 5]; 5];
        for i in 0..5 {
            for j in 0..5 {
                out[i][j] = hu[i][j] * v + u * hv[i][j] + du[i] * dv[j] + du[j] * dv[i];
            }
        }
        out
    }
}

/// Constant multiple of a field.
pub struct Scaled<F>(pub f64, pub F);

impl<F: ScalarField> ScalarField for Scaled<F> {
    fn value(&self, p: HPoint) -> f64 {
        self.0 * self.1.value(p)
    }
    fn gradient(&self, p: HPoint) -> [f64; 5] {
        let mut g = self.1.gradient(p);
        for x in &mut g {
            *x *= self.0;
        }
        g
    }
    fn hessian(&self, p: HPoint) -> [[f64; 5]; 5] {
        let mut h = self.1.hessian(p);
        for row in &mut h {
            for x in row {
                *x *= self.0;
            }
        }
        h
    }
}

/// Sum of two fields.
pub struct Sum<A, B>(pub A, pub B);

impl<A: ScalarField, B: ScalarField> ScalarField for Sum<A, B> {
    fn value(&self, p: HPoint) -> f64 {
        self.0.value(p) + self.1.value(p)
    }
    fn gradient(&self, p: HPoint) -> [f64; 5] {
        let (a, b) = (self.0.gradient(p), self.1.gradient(p));
        std::array::from_fn(|k| a[k] + b[k])
    }
    fn hessian(&self, p: HPoint) -> [[f64; 5]; 5] {
        let (a, b) = (self.0.hessian(p), self.1.hessian(p));
        std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] + b[i][j]))
    }
}

/// A C^2 real profile t -> (value, first, second derivative).
pub trait Profile: Sync {
    fn eval(&self, t: f64) -> (f64, f64, f64);
}

/// Composition profile(r) with the gauge. Where the profile has vanishing
/// first and second derivative, the (singular at 0) gauge derivatives are
/// not evaluated, so the composition is usable on all of H^2 for windowed
/// profiles that are flat near 0.
pub struct GaugeProfile<P>(pub P);

impl<P: Profile> ScalarField for GaugeProfile<P> {
    fn value(&self, p: HPoint) -> f64 {
        self.0.eval(gauge(p)).0
    }
    fn gradient(&self, p: HPoint) -> [f64; 5] {
        let (_, d1, _) = self.0.eval(gauge(p));
        if d1 == 0.0 {
            return [0.0; 5];
        }
        let dr = Gauge.gradient(p);
        std::array::from_fn(|k| d1 * dr[k])
    }
    fn hessian(&self, p: HPoint) -> [[f64; 5]; 5] {
        let (_, d1, d2) = self.0.eval(gauge(p));
        if d1 == 0.0 && d2 == 0.0 {
            return [[0.0; 5]; 5];
        }
        let dr = Gauge.gradient(p);
        let hr = Gauge.hessian(p);
        std::array::from_fn(|i| std::array::from_fn(|j| d2 * dr[i] * dr[j] + d1 * hr[i][j]))
    }
}

/// Centered second-order finite-difference fallback for a field given only
/// by its values. The stencil step is h_fd = scale * (1 + r(p)).
pub struct FiniteDiff<F> {
    f: F,
    scale: f64,
}

impl<F: Fn(HPoint) -> f64 + Sync> FiniteDiff<F> {
    pub fn new(f: F) -> Self {
        FiniteDiff { f, scale: 1e-5 }
    }

    pub fn with_step_scale(f: F, scale: f64) -> Self {
        FiniteDiff { f, scale }
    }

    fn step(&self, p: HPoint) -> f64 {
        self.scale * (1.0 + gauge(p))
    }

    fn shifted(p: HPoint, k: usize, h: f64) -> HPoint {
        let mut c = p.coords();
        c[k] += h;
        HPoint::from_coords(c)
    }
}

impl<F: Fn(HPoint) -> f64 + Sync> ScalarField for FiniteDiff<F> {
    fn value(&self, p: HPoint) -> f64 {
        (self.f)(p)
    }
    fn gradient(&self, p: HPoint) -> [f64; 5] {
        let h = self.step(p);
        std::array::from_fn(|k| {
            let fp = (self.f)(Self::shifted(p, k, h));
            let fm = (self.f)(Self::shifted(p, k, -h));
            (fp - fm) / (2.0 * h)
        })
    }
    fn hessian(&self, p: HPoint) -> [[f64; 5]; 5] {
        let h = self.step(p);
        let f0 = (self.f)(p);
        let mut out = [[0.0; 5]; 5];
        for i in 0..5 {
            let fp = (self.f)(Self::shifted(p, i, h));
            let fm = (self.f)(Self::shifted(p, i, -h));
            out[i][i] = (fp - 2.0 * f0 + fm) / (h * h);
        }
        for i in 0..5 {
            for j in (i + 1)..5 {
                let pp = (self.f)(Self::shifted(Self::shifted(p, i, h), j, h));
                let pm = (self.f)(Self::shifted(Self::shifted(p, i, h), j, -h));
                let mp = (self.f)(Self::shifted(Self::shifted(p, i, -h), j, h));
                let mm = (self.f)(Self::shifted(Self::shifted(p, i, -h), j, -h));
                let v = (pp - pm - mp + mm) / (4.0 * h * h);
                out[i][j] = v;
                out[j][i] = v;
            }
        }
        out
    }
}

/// Named built-in fields available for left translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldName {
    Gauge,
    ArctanSigma,
    Phi,
}

/// The left-translated field x -> f(q^{-1} * x) for a named built-in,
/// with analytic derivatives pulled back through the translation.
pub fn translated_field(name: FieldName, q: HPoint) -> Box<dyn ScalarField> {
    match name {
        FieldName::Gauge => Box::new(Translated::new(Gauge, q)),
        FieldName::ArctanSigma => Box::new(Translated::new(ArctanSigma, q)),
        FieldName::Phi => Box::new(Translated::new(Phi, q)),
    }
}

impl ScalarField for Box<dyn ScalarField> {
    fn value(&self, p: HPoint) -> f64 {
        (**self).value(p)
    }
    fn gradient(&self, p: HPoint) -> [f64; 5] {
        (**self).gradient(p)
    }
    fn hessian(&self, p: HPoint) -> [[f64; 5]; 5] {
        (**self).hessian(p)
    }
}

impl<F: ScalarField + ?Sized> ScalarField for &F {
    fn value(&self, p: HPoint) -> f64 {
        (**self).value(p)
    }
    fn gradient(&self, p: HPoint) -> [f64; 5] {
        (**self).gradient(p)
    }
    fn hessian(&self, p: HPoint) -> [[f64; 5]; 5] {
        (**self).hessian(p)
    }
}

/// Checks the finite-difference contract: analytic and stencil derivatives
/// of `f` agree to O(h_fd^2) at `p`. Returns the worst absolute deviation.
pub fn derivative_consistency(f: &dyn ScalarField, p: HPoint) -> Result<f64> {
    let fd = FiniteDiff::new(|x| f.value(x));
    let (ga, gn) = (f.gradient(p), fd.gradient(p));
    let mut worst: f64 = 0.0;
    for k in 0..5 {
        worst = worst.max((ga[k] - gn[k]).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::koranyi_dist;
    use crate::testutil::rand_point;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check_against_fd(f: &dyn ScalarField, p: HPoint, tol_g: f64, tol_h: f64) {
        let fd = FiniteDiff::new(|x| f.value(x));
        let ga = f.gradient(p);
        let gn = fd.gradient(p);
        for k in 0..5 {
            assert_abs_diff_eq!(ga[k], gn[k], epsilon = tol_g);
        }
        let ha = f.hessian(p);
        let hn = fd.hessian(p);
        for i in 0..5 {
            for j in 0..5 {
                assert_abs_diff_eq!(ha[i][j], hn[i][j], epsilon = tol_h);
            }
        }
    }

    #[test]
    fn analytic_fields_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..30 {
            let p = rand_point(&mut rng, 1.5);
            if gauge(p) < 0.3 {
                continue;
            }
            check_against_fd(&Gauge, p, 1e-7, 1e-4);
            check_against_fd(&ArctanSigma, p, 1e-7, 1e-4);
            check_against_fd(&RhoSq, p, 1e-6, 1e-4);
            let q = rand_point(&mut rng, 1.0);
            let tg = Translated::new(Gauge, q);
            if koranyi_dist(q, p) > 0.3 {
                check_against_fd(&tg, p, 1e-6, 1e-3);
            }
        }
    }

    #[test]
    fn translated_gauge_is_koranyi_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..100 {
            let q = rand_point(&mut rng, 2.0);
            let x = rand_point(&mut rng, 2.0);
            let f = translated_field(FieldName::Gauge, q);
            assert_abs_diff_eq!(f.value(x), koranyi_dist(q, x), epsilon = 1e-13);
            assert_abs_diff_eq!(f.value(q), 0.0, epsilon = 1e-13);
        }
        let f = translated_field(FieldName::Gauge, HPoint::ORIGIN);
        let p = HPoint::from_coords([0.3, -0.4, 0.5, 0.1, 0.7]);
        assert_eq!(f.value(p), gauge(p));
    }

    #[test]
    fn horizontal_gradient_of_coordinates() {
        // grad^H z_1 = X_1 at any point
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..50 {
            let p = rand_point(&mut rng, 2.0);
            let g = horizontal_gradient(&Coordinate(0), p);
            assert_eq!(g.coeffs, [1.0, 0.0, 0.0, 0.0, 0.0]);
            let g = horizontal_gradient(&Coordinate(1), p);
            assert_eq!(g.coeffs, [0.0, 1.0, 0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn gauge_gradient_norm_identity() {
        // |grad^H r|^2 = rho^2 / r^2
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..500 {
            let p = rand_point(&mut rng, 2.0);
            if gauge(p) < 1e-3 {
                continue;
            }
            let g = horizontal_gradient(&Gauge, p);
            let expected = p.rho_sq() / gauge(p).powi(2);
            assert_abs_diff_eq!(g.norm_sq(), expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn gauge_sigma_rotation_identity() {
        // r^3 J_H grad^H r = (rho^4 / 2) grad^H sigma, off the phi-axis;
        // equivalently r^3 J_H grad^H r = (r^4 / 2) grad^H arctan(sigma)
        // since grad arctan(sigma) = grad sigma / (1 + sigma^2).
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        for _ in 0..500 {
            let p = rand_point(&mut rng, 2.0);
            if p.rho() < 1e-2 {
                continue;
            }
            let r = gauge(p);
            let lhs = jh_unchecked(&horizontal_gradient(&Gauge, p)).scale(r.powi(3));
            let rhs = horizontal_gradient(&ArctanSigma, p).scale(0.5 * r.powi(4));
            for k in 0..5 {
                assert_abs_diff_eq!(lhs.coeffs[k], rhs.coeffs[k], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn phi_gradient_is_jh_of_half_rho_sq() {
        // grad^H phi = J_H grad^H (rho^2 / 2)
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..200 {
            let p = rand_point(&mut rng, 2.0);
            let lhs = horizontal_gradient(&Phi, p);
            let rhs = jh_unchecked(&horizontal_gradient(&Scaled(0.5, RhoSq), p));
            for k in 0..5 {
                assert_abs_diff_eq!(lhs.coeffs[k], rhs.coeffs[k], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn hamiltonian_vector_constant_potential() {
        // F = 1 gives W_F = -d_phi
        struct One;
        impl ScalarField for One {
            fn value(&self, _p: HPoint) -> f64 {
                1.0
            }
            fn gradient(&self, _p: HPoint) -> [f64; 5] {
                [0.0; 5]
            }
            fn hessian(&self, _p: HPoint) -> [[f64; 5]; 5] {
                [[0.0; 5]; 5]
            }
        }
        let p = HPoint::from_coords([0.2, 0.5, -0.8, 0.1, 0.9]);
        let w = hamiltonian_vector(&One, p);
        assert_eq!(w.coeffs, [0.0, 0.0, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn hamiltonian_vector_of_phi_generates_dilations() {
        // -2 W_phi = sum_j z_j grad^H z_j + 2 phi d_phi
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for _ in 0..100 {
            let p = rand_point(&mut rng, 2.0);
            let w = hamiltonian_vector(&Phi, p).scale(-2.0);
            // sum_j z_j grad^H z_j has frame coefficients (z_1, z_2, z_3, z_4)
            let expect = [p.z[0], p.z[1], p.z[2], p.z[3], 2.0 * p.phi];
            for k in 0..5 {
                assert_abs_diff_eq!(w.coeffs[k], expect[k], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn finite_diff_consistency_contract() {
        let f = Translated::new(ArctanSigma, HPoint::from_coords([0.1, 0.2, 0.3, 0.4, 0.5]));
        let p = HPoint::from_coords([1.0, -0.5, 0.3, 0.8, -0.2]);
        let worst = derivative_consistency(&f, p).unwrap();
        assert!(worst < 1e-7, "worst deviation {worst}");
    }
}
