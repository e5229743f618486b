//! Discrete parameter domains and grid-sampled surfaces in H^2.
//!
//! A domain is either a rectangle (both endpoints sampled, one-sided
//! second-order differences at the boundary) or a torus given by two lattice
//! vectors (fully periodic, centered differences everywhere). Surface values
//! on a torus may pick up a constant phi shift when wrapping a lattice
//! generator; this is the monodromy of a Legendrian lift and is stored with
//! the surface.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heisenberg::{HPoint, HTangent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Rectangle,
    Torus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDomain {
    pub topology: Topology,
    /// lattice / side vectors in the parameter plane
    pub v1: [f64; 2],
    pub v2: [f64; 2],
    pub origin: [f64; 2],
    pub n1: usize,
    pub n2: usize,
}

fn det2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

impl GridDomain {
    pub fn rectangle(origin: [f64; 2], extents: [f64; 2], n1: usize, n2: usize) -> Result<Self> {
        let d = GridDomain {
            topology: Topology::Rectangle,
            v1: [extents[0], 0.0],
            v2: [0.0, extents[1]],
            origin,
            n1,
            n2,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn torus(v1: [f64; 2], v2: [f64; 2], n1: usize, n2: usize) -> Result<Self> {
        let d = GridDomain {
            topology: Topology::Torus,
            v1,
            v2,
            origin: [0.0, 0.0],
            n1,
            n2,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 < 4 || self.n2 < 4 {
            return Err(Error::InvalidInput("grid needs n1, n2 >= 4".into()));
        }
        let scale = (self.v1[0].abs() + self.v1[1].abs()) * (self.v2[0].abs() + self.v2[1].abs());
        if !(det2(self.v1, self.v2).abs() > 1e-12 * (1.0 + scale)) {
            return Err(Error::InvalidInput(
                "grid vectors are linearly dependent or degenerate".into(),
            ));
        }
        Ok(())
    }

    /// Number of samples along each axis (periodic axes omit the endpoint).
    pub fn node_count(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_periodic(&self) -> bool {
        self.topology == Topology::Torus
    }

    /// Index step vectors: the parameter displacement per unit index.
    pub fn steps(&self) -> ([f64; 2], [f64; 2]) {
        let d1 = if self.is_periodic() { self.n1 } else { self.n1 - 1 } as f64;
        let d2 = if self.is_periodic() { self.n2 } else { self.n2 - 1 } as f64;
        (
            [self.v1[0] / d1, self.v1[1] / d1],
            [self.v2[0] / d2, self.v2[1] / d2],
        )
    }

    pub fn node_xy(&self, i: usize, j: usize) -> [f64; 2] {
        let (h1, h2) = self.steps();
        [
            self.origin[0] + i as f64 * h1[0] + j as f64 * h2[0],
            self.origin[1] + i as f64 * h1[1] + j as f64 * h2[1],
        ]
    }

    pub fn cell_area(&self) -> f64 {
        let (h1, h2) = self.steps();
        det2(h1, h2).abs()
    }

    /// Quadrature weight of a node (trapezoid in each non-periodic axis).
    pub fn node_weight(&self, i: usize, j: usize) -> f64 {
        let mut w = self.cell_area();
        if !self.is_periodic() {
            if i == 0 || i == self.n1 - 1 {
                w *= 0.5;
            }
            if j == 0 || j == self.n2 - 1 {
                w *= 0.5;
            }
        }
        w
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n1 && j < self.n2);
        j * self.n1 + i
    }

    /// Characteristic mesh size: the longer of the two step vectors.
    pub fn mesh_size(&self) -> f64 {
        let (h1, h2) = self.steps();
        f64::max(h1[0].hypot(h1[1]), h2[0].hypot(h2[1]))
    }
}

/// A grid-sampled map into H^2 with integer multiplicity. `phi_shift[k]`
/// is the amount added to the phi component when wrapping lattice axis k
/// once (zero for rectangles).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSurface {
    pub domain: GridDomain,
    /// row-major (j * n1 + i) node values (z1, z2, z3, z4, phi)
    pub values: Vec<[f64; 5]>,
    pub mult: Vec<u32>,
    pub phi_shift: [f64; 2],
}

impl GridSurface {
    pub fn from_fn(
        domain: GridDomain,
        phi_shift: [f64; 2],
        f: impl Fn([f64; 2]) -> [f64; 5],
    ) -> Result<Self> {
        domain.validate()?;
        let mut values = Vec::with_capacity(domain.node_count());
        for j in 0..domain.n2 {
            for i in 0..domain.n1 {
                let v = f(domain.node_xy(i, j));
                if !v.iter().all(|x| x.is_finite()) {
                    return Err(Error::Domain(format!(
                        "non-finite surface value at node ({i}, {j})"
                    )));
                }
                values.push(v);
            }
        }
        Ok(GridSurface {
            mult: vec![1; domain.node_count()],
            domain,
            values,
            phi_shift,
        })
    }

    pub fn with_multiplicity(mut self, n: u32) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidInput("multiplicity must be >= 1".into()));
        }
        self.mult = vec![n; self.domain.node_count()];
        Ok(self)
    }

    pub fn node(&self, i: usize, j: usize) -> HPoint {
        HPoint::from_coords(self.values[self.domain.idx(i, j)])
    }

    pub fn multiplicity(&self, i: usize, j: usize) -> u32 {
        self.mult[self.domain.idx(i, j)]
    }

    /// Node value with periodic wrapping; wrapping adds the phi monodromy.
    fn wrapped(&self, i: isize, j: isize) -> [f64; 5] {
        let d = &self.domain;
        let (n1, n2) = (d.n1 as isize, d.n2 as isize);
        let mut phi_extra = 0.0;
        let (iw, jw) = if d.is_periodic() {
            let (qi, ri) = (i.div_euclid(n1), i.rem_euclid(n1));
            let (qj, rj) = (j.div_euclid(n2), j.rem_euclid(n2));
            phi_extra = qi as f64 * self.phi_shift[0] + qj as f64 * self.phi_shift[1];
            (ri as usize, rj as usize)
        } else {
            debug_assert!(i >= 0 && i < n1 && j >= 0 && j < n2);
            (i as usize, j as usize)
        };
        let mut v = self.values[d.idx(iw, jw)];
        v[4] += phi_extra;
        v
    }

    /// Second-order derivatives of the node values with respect to the two
    /// grid indices (centered in the interior / on tori, one-sided at
    /// rectangle boundaries).
    pub fn index_derivs(&self, i: usize, j: usize) -> ([f64; 5], [f64; 5]) {
        let d = &self.domain;
        let (i, j) = (i as isize, j as isize);
        let diff = |axis: usize, k: isize, n: isize| -> [f64; 5] {
            let at = |t: isize| {
                if axis == 0 {
                    self.wrapped(t, j)
                } else {
                    self.wrapped(i, t)
                }
            };
            if d.is_periodic() || (k > 0 && k < n - 1) {
                let (a, b) = (at(k + 1), at(k - 1));
                std::array::from_fn(|m| 0.5 * (a[m] - b[m]))
            } else if k == 0 {
                let (f0, f1, f2) = (at(0), at(1), at(2));
                std::array::from_fn(|m| -1.5 * f0[m] + 2.0 * f1[m] - 0.5 * f2[m])
            } else {
                let (f0, f1, f2) = (at(n - 1), at(n - 2), at(n - 3));
                std::array::from_fn(|m| 1.5 * f0[m] - 2.0 * f1[m] + 0.5 * f2[m])
            }
        };
        (diff(0, i, d.n1 as isize), diff(1, j, d.n2 as isize))
    }

    /// Derivatives with respect to the parameter-plane coordinates (x1, x2),
    /// obtained from the index derivatives by inverting the lattice map.
    pub fn xy_derivs(&self, i: usize, j: usize) -> ([f64; 5], [f64; 5]) {
        let (d1, d2) = self.index_derivs(i, j);
        let (h1, h2) = self.domain.steps();
        // d_k[m] = h_k . grad u_m; invert the 2x2 system per component
        let det = det2(h1, h2);
        let dx: [f64; 5] = std::array::from_fn(|m| (d1[m] * h2[1] - d2[m] * h1[1]) / det);
        let dy: [f64; 5] = std::array::from_fn(|m| (d2[m] * h1[0] - d1[m] * h2[0]) / det);
        (dx, dy)
    }

    /// The two coordinate tangent vectors as horizontal-frame tangents at
    /// the node image.
    pub fn tangents(&self, i: usize, j: usize) -> (HTangent, HTangent) {
        let p = self.node(i, j);
        let (dx, dy) = self.xy_derivs(i, j);
        (HTangent::from_ambient(p, dx), HTangent::from_ambient(p, dy))
    }

    /// Writes CSV rows (x1, x2, z1, z2, z3, z4, phi, N).
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x1", "x2", "z1", "z2", "z3", "z4", "phi", "N"])?;
        for j in 0..self.domain.n2 {
            for i in 0..self.domain.n1 {
                let xy = self.domain.node_xy(i, j);
                let v = self.values[self.domain.idx(i, j)];
                let mut rec = Vec::with_capacity(8);
                rec.push(xy[0].to_string());
                rec.push(xy[1].to_string());
                rec.extend(v.iter().map(|x| x.to_string()));
                rec.push(self.mult[self.domain.idx(i, j)].to_string());
                out.write_record(&rec)?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Total winding number (in full turns) of a closed chain of nonzero
/// complex values, by summing principal-branch argument increments.
pub fn winding_number(values: &[(f64, f64)]) -> i64 {
    let mut total = 0.0;
    for k in 0..values.len() {
        let (a, b) = (values[k], values[(k + 1) % values.len()]);
        // arg(b / a)
        let cross = a.0 * b.1 - a.1 * b.0;
        let dot = a.0 * b.0 + a.1 * b.1;
        total += cross.atan2(dot);
    }
    (total / std::f64::consts::TAU).round() as i64
}

/// Least-squares slope of log(err) against log(h): the observed convergence
/// order of a refinement ladder.
pub fn convergence_slope(h: &[f64], err: &[f64]) -> Result<f64> {
    if h.len() != err.len() || h.len() < 2 {
        return Err(Error::InvalidInput(
            "slope fit needs matching lists of length >= 2".into(),
        ));
    }
    if h.iter().chain(err.iter()).any(|&x| !(x > 0.0)) {
        return Err(Error::Domain("slope fit needs positive values".into()));
    }
    let n = h.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = h
        .iter()
        .zip(err)
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}
