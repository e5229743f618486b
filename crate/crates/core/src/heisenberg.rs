//! Closed-form primitives of the Heisenberg group H^2 = C^2 x R:
//! group law, Folland-Koranyi gauge, Koranyi distance, dilations,
//! unitary rotations and the left-invariant orthonormal frame.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symplectic pairing sum_j (z_{2j-1} w_{2j} - z_{2j} w_{2j-1}) on R^4 ~ C^2.
#[inline]
pub fn symplectic(z: &[f64; 4], w: &[f64; 4]) -> f64 {
    z[0] * w[1] - z[1] * w[0] + z[2] * w[3] - z[3] * w[2]
}

/// The standard complex structure J on R^4 ~ C^2, acting as z -> iz.
#[inline]
pub fn complex_j(z: &[f64; 4]) -> [f64; 4] {
    [-z[1], z[0], -z[3], z[2]]
}

/// A point (z_1,..,z_4, phi) of H^2. Serializes as the JSON array
/// `[z1, z2, z3, z4, phi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 5]", try_from = "[f64; 5]")]
pub struct HPoint {
    pub z: [f64; 4],
    pub phi: f64,
}

impl From<HPoint> for [f64; 5] {
    fn from(p: HPoint) -> Self {
        [p.z[0], p.z[1], p.z[2], p.z[3], p.phi]
    }
}

impl TryFrom<[f64; 5]> for HPoint {
    type Error = Error;
    fn try_from(v: [f64; 5]) -> Result<Self> {
        let p = HPoint::new([v[0], v[1], v[2], v[3]], v[4]);
        if !p.is_finite() {
            return Err(Error::InvalidInput("non-finite point coordinates".into()));
        }
        Ok(p)
    }
}

impl HPoint {
    pub const ORIGIN: HPoint = HPoint {
        z: [0.0; 4],
        phi: 0.0,
    };

    pub fn new(z: [f64; 4], phi: f64) -> Self {
        HPoint { z, phi }
    }

    pub fn from_coords(v: [f64; 5]) -> Self {
        HPoint::new([v[0], v[1], v[2], v[3]], v[4])
    }

    pub fn coords(&self) -> [f64; 5] {
        (*self).into()
    }

    pub fn is_finite(&self) -> bool {
        self.z.iter().all(|c| c.is_finite()) && self.phi.is_finite()
    }

    /// rho^2 = |z|^2, the squared norm of the C^2 projection.
    pub fn rho_sq(&self) -> f64 {
        self.z.iter().map(|c| c * c).sum()
    }

    pub fn rho(&self) -> f64 {
        self.rho_sq().sqrt()
    }
}

/// Group law (z,phi)*(z',phi') = (z+z', phi+phi' + sum(z_{2j-1}z'_{2j} - z_{2j}z'_{2j-1})).
pub fn group_mul(p: HPoint, q: HPoint) -> HPoint {
    let z = [
        p.z[0] + q.z[0],
        p.z[1] + q.z[1],
        p.z[2] + q.z[2],
        p.z[3] + q.z[3],
    ];
    HPoint::new(z, p.phi + q.phi + symplectic(&p.z, &q.z))
}

/// Group inverse (z,phi)^{-1} = (-z,-phi).
pub fn group_inv(p: HPoint) -> HPoint {
    HPoint::new(
        [-p.z[0], -p.z[1], -p.z[2], -p.z[3]],
        -p.phi,
    )
}

/// Folland-Koranyi gauge r with r^4 = rho^4 + 4 phi^2.
pub fn gauge(p: HPoint) -> f64 {
    let rho2 = p.rho_sq();
    (rho2 * rho2 + 4.0 * p.phi * p.phi).powf(0.25)
}

/// Koranyi distance d_K(p,q) = r(p^{-1} * q).
pub fn koranyi_dist(p: HPoint, q: HPoint) -> f64 {
    gauge(group_mul(group_inv(p), q))
}

/// Dilation delta_t(z,phi) = (tz, t^2 phi), a group homomorphism.
pub fn dilate(t: f64, p: HPoint) -> HPoint {
    HPoint::new(
        [t * p.z[0], t * p.z[1], t * p.z[2], t * p.z[3]],
        t * t * p.phi,
    )
}

/// An element of U(2) represented as the corresponding real orthogonal
/// 4x4 matrix commuting with the standard complex structure J.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitaryRotation {
    pub a: [[f64; 4]; 4],
}

impl UnitaryRotation {
    pub const TOL: f64 = 1e-12;

    /// Validates orthogonality and commutation with J.
    pub fn new(a: [[f64; 4]; 4]) -> Result<Self> {
        let r = UnitaryRotation { a };
        // a^T a = id
        for i in 0..4 {
            for j in 0..4 {
                let dot: f64 = (0..4).map(|k| a[k][i] * a[k][j]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                if (dot - expect).abs() > Self::TOL {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not orthogonal: (a^T a)[{i}][{j}] = {dot}"
                    )));
                }
            }
        }
        // a J = J a, tested on the basis vectors
        for k in 0..4 {
            let mut e = [0.0; 4];
            e[k] = 1.0;
            let aje = r.apply(&complex_j(&e));
            let jae = complex_j(&r.apply(&e));
            for i in 0..4 {
                if (aje[i] - jae[i]).abs() > Self::TOL {
                    return Err(Error::InvalidInput(
                        "matrix does not commute with the complex structure".into(),
                    ));
                }
            }
        }
        Ok(r)
    }

    pub fn identity() -> Self {
        let mut a = [[0.0; 4]; 4];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        UnitaryRotation { a }
    }

    /// Builds the real 4x4 matrix from a complex 2x2 unitary, given as
    /// entries (re, im) in row-major order, without validating unitarity.
    pub fn from_complex_unchecked(u: [[(f64, f64); 2]; 2]) -> Self {
        // w_j = z_{2j-1} + i z_{2j}; each complex entry a+ib acts as the
        // 2x2 real block [[a,-b],[b,a]].
        let mut a = [[0.0; 4]; 4];
        for bi in 0..2 {
            for bj in 0..2 {
                let (re, im) = u[bi][bj];
                a[2 * bi][2 * bj] = re;
                a[2 * bi][2 * bj + 1] = -im;
                a[2 * bi + 1][2 * bj] = im;
                a[2 * bi + 1][2 * bj + 1] = re;
            }
        }
        UnitaryRotation { a }
    }

    pub fn apply(&self, z: &[f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for i in 0..4 {
            out[i] = (0..4).map(|k| self.a[i][k] * z[k]).sum();
        }
        out
    }
}

/// Rotation R_A(z,phi) = (Az, phi).
pub fn rotate(a: &UnitaryRotation, p: HPoint) -> HPoint {
    HPoint::new(a.apply(&p.z), p.phi)
}

/// A tangent vector at `base`, stored by its coefficients in the
/// orthonormal frame (X_1, Y_1, X_2, Y_2, d_phi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HTangent {
    pub base: HPoint,
    pub coeffs: [f64; 5],
}

impl HTangent {
    pub fn new(base: HPoint, coeffs: [f64; 5]) -> Self {
        HTangent { base, coeffs }
    }

    pub fn zero(base: HPoint) -> Self {
        HTangent::new(base, [0.0; 5])
    }

    /// Value of the contact form: alpha(X_j) = alpha(Y_j) = 0, alpha(d_phi) = -1.
    pub fn alpha(&self) -> f64 {
        -self.coeffs[4]
    }

    pub fn is_horizontal(&self, tol: f64) -> bool {
        self.alpha().abs() <= tol
    }

    /// Ambient R^5 components of this tangent vector.
    pub fn ambient(&self) -> [f64; 5] {
        let c = self.coeffs;
        let z = self.base.z;
        // X_1 = (1,0,0,0,-z2), Y_1 = (0,1,0,0,z1), X_2 = (0,0,1,0,-z4), Y_2 = (0,0,0,1,z3)
        [
            c[0],
            c[1],
            c[2],
            c[3],
            c[4] - z[1] * c[0] + z[0] * c[1] - z[3] * c[2] + z[2] * c[3],
        ]
    }

    /// Inverse of [`ambient`]: reads off frame coefficients from ambient components.
    pub fn from_ambient(base: HPoint, a: [f64; 5]) -> Self {
        let z = base.z;
        let c4 = a[4] + z[1] * a[0] - z[0] * a[1] + z[3] * a[2] - z[2] * a[3];
        HTangent::new(base, [a[0], a[1], a[2], a[3], c4])
    }

    pub fn dot(&self, other: &HTangent) -> f64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, t: f64) -> HTangent {
        let mut c = self.coeffs;
        for x in &mut c {
            *x *= t;
        }
        HTangent::new(self.base, c)
    }

    pub fn add(&self, other: &HTangent) -> HTangent {
        let mut c = self.coeffs;
        for (x, y) in c.iter_mut().zip(other.coeffs.iter()) {
            *x += y;
        }
        HTangent::new(self.base, c)
    }

    pub fn sub(&self, other: &HTangent) -> HTangent {
        self.add(&other.scale(-1.0))
    }
}

/// The frame (X_1, Y_1, X_2, Y_2, d_phi) at p.
pub fn frame_at(p: HPoint) -> [HTangent; 5] {
    let mut out = [HTangent::zero(p); 5];
    for (k, v) in out.iter_mut().enumerate() {
        v.coeffs[k] = 1.0;
    }
    out
}

/// The complex structure J_H on horizontal vectors: J_H X_j = Y_j.
pub fn jh(v: &HTangent) -> Result<HTangent> {
    if !v.is_horizontal(1e-10 * (1.0 + v.norm())) {
        return Err(Error::Domain(format!(
            "jh applied to a non-horizontal vector (alpha = {:.3e})",
            v.alpha()
        )));
    }
    let c = v.coeffs;
    Ok(HTangent::new(v.base, [-c[1], c[0], -c[3], c[2], 0.0]))
}

/// J_H without the horizontality check; drops any d_phi component.
pub fn jh_unchecked(v: &HTangent) -> HTangent {
    let c = v.coeffs;
    HTangent::new(v.base, [-c[1], c[0], -c[3], c[2], 0.0])
}

/// arctan(sigma) = atan2(2 phi, rho^2), extended by continuity to H^2 \ {0}
/// (equals sgn(phi) * pi/2 on the punctured phi-axis).
pub fn arctan_sigma(p: HPoint) -> Result<f64> {
    if gauge(p) == 0.0 {
        return Err(Error::Domain("arctan_sigma is undefined at the origin".into()));
    }
    Ok(arctan_sigma_unchecked(p))
}

pub(crate) fn arctan_sigma_unchecked(p: HPoint) -> f64 {
    f64::atan2(2.0 * p.phi, p.rho_sq())
}
