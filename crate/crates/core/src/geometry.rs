//! Convex planar contact surfaces, halfspace polytopes and rotations.

use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::{Error, Result};

/// Maximum distance of a vertex from the fitted plane, in meters.
pub const COPLANAR_TOL: f64 = 1e-6;
/// Smallest admissible vertical component of a surface normal.
pub const MIN_NORMAL_Z: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    pub fn normalized(self) -> Vec3 {
        self * (1.0 / self.norm())
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn l1(self) -> f64 {
        self.x.abs() + self.y.abs() + self.z.abs()
    }

    pub fn lerp(self, o: Vec3, t: f64) -> Vec3 {
        self + (o - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Row-major 3x3 matrix, used for rotations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3 {
    pub rows: [Vec3; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 =
        Mat3 { rows: [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)] };

    /// Rotation by `yaw` radians about the vertical axis.
    pub fn rot_z(yaw: f64) -> Mat3 {
        let (s, c) = (libm::sin(yaw), libm::cos(yaw));
        Mat3 { rows: [Vec3::new(c, -s, 0.0), Vec3::new(s, c, 0.0), Vec3::new(0.0, 0.0, 1.0)] }
    }

    /// The minimal rotation taking the vertical axis onto the unit vector `d`.
    pub fn align_z_to(d: Vec3) -> Mat3 {
        let k = Vec3::Z.cross(d);
        let s2 = k.dot(k);
        let c = d.z;
        if s2 < 1e-24 {
            return Mat3::IDENTITY;
        }
        // Rodrigues with an unnormalised axis: R = I + [k]x + [k]x^2 (1 - c) / |k|^2
        let kx = Mat3 { rows: [Vec3::new(0.0, -k.z, k.y), Vec3::new(k.z, 0.0, -k.x), Vec3::new(-k.y, k.x, 0.0)] };
        let kx2 = kx.mul_mat(&kx);
        let f = (1.0 - c) / s2;
        let mut rows = [Vec3::ZERO; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            *row = Mat3::IDENTITY.rows[i] + kx.rows[i] + kx2.rows[i] * f;
        }
        Mat3 { rows }
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        Vec3::new(self.rows[0].dot(v), self.rows[1].dot(v), self.rows[2].dot(v))
    }

    pub fn transpose(&self) -> Mat3 {
        let r = &self.rows;
        Mat3 {
            rows: [
                Vec3::new(r[0].x, r[1].x, r[2].x),
                Vec3::new(r[0].y, r[1].y, r[2].y),
                Vec3::new(r[0].z, r[1].z, r[2].z),
            ],
        }
    }

    pub fn mul_mat(&self, o: &Mat3) -> Mat3 {
        let t = o.transpose();
        let mut rows = [Vec3::ZERO; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            *row = t.mul_vec(self.rows[i]);
        }
        Mat3 { rows }
    }
}

/// Axis-aligned box, used for initial/goal tolerances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub lo: Vec3,
    pub hi: Vec3,
}

impl Aabb {
    pub fn around(center: Vec3, half: Vec3) -> Aabb {
        Aabb { lo: center - half, hi: center + half }
    }

    pub fn contains(&self, x: Vec3, tol: f64) -> bool {
        x.x >= self.lo.x - tol
            && x.y >= self.lo.y - tol
            && x.z >= self.lo.z - tol
            && x.x <= self.hi.x + tol
            && x.y <= self.hi.y + tol
            && x.z <= self.hi.z + tol
    }

    pub fn to_polytope(&self) -> Polytope {
        Polytope::axis_box(self.lo, self.hi)
    }
}

/// Halfspace set `{x : A x <= b}` in three dimensions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polytope {
    pub rows: Vec<Vec3>,
    pub rhs: Vec<f64>,
}

impl Polytope {
    pub fn new(rows: Vec<Vec3>, rhs: Vec<f64>) -> Polytope {
        assert_eq!(rows.len(), rhs.len(), "polytope rows and rhs differ in length");
        Polytope { rows, rhs }
    }

    pub fn axis_box(lo: Vec3, hi: Vec3) -> Polytope {
        let mut p = Polytope::default();
        for (axis, (l, h)) in [(lo.x, hi.x), (lo.y, hi.y), (lo.z, hi.z)].into_iter().enumerate() {
            let mut e = [0.0; 3];
            e[axis] = 1.0;
            p.push(Vec3::from_array(e), h);
            p.push(-Vec3::from_array(e), -l);
        }
        p
    }

    /// Axis-aligned rectangle in the xy plane, with zero z coefficients.
    pub fn xy_rect(lo: (f64, f64), hi: (f64, f64)) -> Polytope {
        let mut p = Polytope::default();
        p.push(Vec3::new(1.0, 0.0, 0.0), hi.0);
        p.push(Vec3::new(-1.0, 0.0, 0.0), -lo.0);
        p.push(Vec3::new(0.0, 1.0, 0.0), hi.1);
        p.push(Vec3::new(0.0, -1.0, 0.0), -lo.1);
        p
    }

    /// Halfspaces of a convex polygon in the xy plane, vertices in either
    /// winding. Fails on fewer than three vertices or a non-convex outline.
    pub fn from_polygon_xy(vertices: &[(f64, f64)]) -> Result<Polytope> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::TooFewVertices { count: n });
        }
        let cross = |i: usize| {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            (b.0 - a.0) * (c.1 - b.1) - (b.1 - a.1) * (c.0 - b.0)
        };
        let area2: f64 = (0..n)
            .map(|i| {
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                a.0 * b.1 - a.1 * b.0
            })
            .sum();
        if area2.abs() <= 1e-12 {
            return Err(Error::DegenerateNormal);
        }
        let sign = area2.signum();
        if let Some(i) = (0..n).find(|&i| cross(i) * sign < -1e-12) {
            return Err(Error::NonConvex { vertex: (i + 1) % n });
        }
        let mut p = Polytope::default();
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            let len = libm::sqrt(dx * dx + dy * dy);
            if len <= 1e-12 {
                continue;
            }
            // Outward normal of a counter-clockwise edge is (dy, -dx).
            let normal = Vec3::new(dy * sign / len, -dx * sign / len, 0.0);
            p.push(normal, normal.x * a.0 + normal.y * a.1);
        }
        Ok(p)
    }

    pub fn push(&mut self, row: Vec3, rhs: f64) {
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Largest row violation `max(A x - b)`; negative inside.
    pub fn max_violation(&self, x: Vec3) -> f64 {
        self.rows.iter().zip(&self.rhs).map(|(a, b)| a.dot(x) - b).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, x: Vec3, tol: f64) -> bool {
        self.rows.iter().zip(&self.rhs).all(|(a, b)| a.dot(x) <= b + tol)
    }

    /// The polytope carried by the rotation `rot` (`x_world = rot * x_local`).
    pub fn transformed(&self, rot: &Mat3) -> Polytope {
        Polytope { rows: self.rows.iter().map(|a| rot.mul_vec(*a)).collect(), rhs: self.rhs.clone() }
    }

    /// True when no row has a z coefficient.
    pub fn is_xy_only(&self) -> bool {
        self.rows.iter().all(|a| a.z == 0.0)
    }
}

/// The polytope rotated by `yaw` about the vertical axis: `A * Rot(yaw)^T`.
pub fn rotate_polytope(p: &Polytope, yaw: f64) -> Polytope {
    p.transformed(&Mat3::rot_z(yaw))
}

/// A convex planar contact region.
#[derive(Clone, Debug, PartialEq)]
pub struct Surface {
    pub id: usize,
    pub vertices: Vec<Vec3>,
    /// Unit normal `d`, pointing upwards.
    pub normal: Vec3,
    /// Plane offset `e` with `d . x = e` on the surface.
    pub offset: f64,
    /// In-plane boundary `S x <= s`, one unit row per edge.
    pub boundary: Polytope,
}

impl Surface {
    /// Builds a surface from an ordered vertex loop (either winding).
    ///
    /// The plane is fitted with Newell's method; vertices are projected onto
    /// it so that the stored loop is exactly planar.
    pub fn from_vertices(id: usize, vertices: &[Vec3]) -> Result<Surface> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::TooFewVertices { count: n });
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateNormal);
        }
        let mut newell = Vec3::ZERO;
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            newell += Vec3::new((a.y - b.y) * (a.z + b.z), (a.z - b.z) * (a.x + b.x), (a.x - b.x) * (a.y + b.y));
        }
        let len = newell.norm();
        if !(len > 1e-12) {
            return Err(Error::DegenerateNormal);
        }
        let mut normal = newell * (1.0 / len);
        // Newell's normal follows the winding: ccw loops (seen from the
        // normal side) give a positive orientation.
        let ccw = normal.z >= 0.0;
        if normal.z < 0.0 {
            normal = -normal;
        }
        if normal.z < MIN_NORMAL_Z {
            return Err(Error::DegenerateNormal);
        }
        let centroid = vertex_mean(vertices);
        let offset = normal.dot(centroid);
        for (i, v) in vertices.iter().enumerate() {
            let residual = (normal.dot(*v) - offset).abs();
            if residual > COPLANAR_TOL {
                return Err(Error::NonPlanar { vertex: i, residual });
            }
        }
        let projected: Vec<Vec3> = vertices.iter().map(|v| *v - normal * (normal.dot(*v) - offset)).collect();

        let sign = if ccw { 1.0 } else { -1.0 };
        for i in 0..n {
            let a = projected[i];
            let b = projected[(i + 1) % n];
            let c = projected[(i + 2) % n];
            let turn = (b - a).cross(c - b).dot(normal) * sign;
            if turn < -1e-12 {
                return Err(Error::NonConvex { vertex: (i + 1) % n });
            }
        }

        let mut boundary = Polytope::default();
        for i in 0..n {
            let a = projected[i];
            let b = projected[(i + 1) % n];
            let edge = b - a;
            if edge.norm() < 1e-12 {
                continue;
            }
            let outward = edge.cross(normal) * sign;
            let row = outward.normalized();
            boundary.push(row, row.dot(a));
        }
        // Consistent turning signs still admit self-overlapping loops such
        // as a pentagram; every vertex must lie inside every edge.
        for (i, v) in projected.iter().enumerate() {
            if !boundary.contains(*v, 1e-9) {
                return Err(Error::NonConvex { vertex: i });
            }
        }
        Ok(Surface { id, vertices: projected, normal, offset, boundary })
    }

    /// Membership with tolerance: on the plane and inside every edge row.
    pub fn contains(&self, x: Vec3, tol: f64) -> bool {
        (self.normal.dot(x) - self.offset).abs() <= tol && self.boundary.contains(x, tol)
    }

    /// Mean of the vertices; interior for a convex loop.
    pub fn centroid(&self) -> Vec3 {
        vertex_mean(&self.vertices)
    }

    pub fn is_quasi_flat(&self, mu: f64) -> bool {
        is_quasi_flat(self, mu)
    }

    /// Rotation from a flat effector frame with heading `yaw` onto this surface.
    pub fn frame(&self, yaw: f64) -> Mat3 {
        Mat3::align_z_to(self.normal).mul_mat(&Mat3::rot_z(yaw))
    }

    pub fn same_orientation(&self, other: &Surface) -> bool {
        (self.normal - other.normal).max_abs() <= 1e-9
    }
}

/// Free-function form of [`Surface::from_vertices`].
pub fn surface_from_vertices(id: usize, vertices: &[Vec3]) -> Result<Surface> {
    Surface::from_vertices(id, vertices)
}

/// True iff the friction cone of coefficient `mu` around the surface normal
/// contains the vertical: `d_z >= 1 / sqrt(1 + mu^2)`.
pub fn is_quasi_flat(surface: &Surface, mu: f64) -> bool {
    surface.normal.z >= 1.0 / libm::sqrt(1.0 + mu * mu) - 1e-12
}

pub fn contains(surface: &Surface, x: Vec3, tol: f64) -> bool {
    surface.contains(x, tol)
}

fn vertex_mean(vertices: &[Vec3]) -> Vec3 {
    let mut sum = Vec3::ZERO;
    for v in vertices {
        sum += *v;
    }
    sum * (1.0 / vertices.len() as f64)
}
