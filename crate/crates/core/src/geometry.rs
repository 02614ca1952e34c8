//! Small 2D geometry toolkit: points, second-order tensors, rectangles and
//! polygon helpers.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Scalar;

/// Coordinate axis of the structured free-flow grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }

    #[inline]
    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }

    #[inline]
    pub fn from_index(i: usize) -> Axis {
        if i == 0 {
            Axis::X
        } else {
            Axis::Y
        }
    }
}

/// Point or vector in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    /// Unit vector along `axis`.
    #[inline]
    pub fn unit(axis: Axis) -> Self {
        match axis {
            Axis::X => Self::new(T::one(), T::zero()),
            Axis::Y => Self::new(T::zero(), T::one()),
        }
    }

    #[inline]
    pub fn coord(&self, axis: Axis) -> T {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
        }
    }

    #[inline]
    pub fn with_coord(mut self, axis: Axis, v: T) -> Self {
        match axis {
            Axis::X => self.x = v,
            Axis::Y => self.y = v,
        }
        self
    }

    #[inline]
    pub fn dot(&self, o: &Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(&self, o: &Self) -> T {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn midpoint(&self, o: &Self) -> Self {
        Self::new((self.x + o.x) * T::half(), (self.y + o.y) * T::half())
    }

    #[inline]
    pub fn distance(&self, o: &Self) -> T {
        (*self - *o).norm()
    }

    /// Rotates by -90 degrees; for a CCW boundary edge direction this gives
    /// the outward normal.
    #[inline]
    pub fn perp_cw(&self) -> Self {
        Self::new(self.y, -self.x)
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self::new(self.x / n, self.y / n)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl<T: Scalar> Add for Point<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> Sub for Point<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> Mul<T> for Point<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl<T: Scalar> Div<T> for Point<T> {
    type Output = Self;
    #[inline]
    fn div(self, s: T) -> Self {
        Self::new(self.x / s, self.y / s)
    }
}

impl<T: Scalar> Neg for Point<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// 2x2 tensor, stored row-major. Permeabilities are symmetric positive
/// definite instances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor<T> {
    pub xx: T,
    pub xy: T,
    pub yx: T,
    pub yy: T,
}

impl<T: Scalar> Tensor<T> {
    pub fn new(xx: T, xy: T, yx: T, yy: T) -> Self {
        Self { xx, xy, yx, yy }
    }

    pub fn isotropic(k: T) -> Self {
        Self::new(k, T::zero(), T::zero(), k)
    }

    pub fn symmetric(xx: T, xy: T, yy: T) -> Self {
        Self::new(xx, xy, xy, yy)
    }

    #[inline]
    pub fn apply(&self, v: Point<T>) -> Point<T> {
        Point::new(self.xx * v.x + self.xy * v.y, self.yx * v.x + self.yy * v.y)
    }

    /// Quadratic form `t . K t`.
    #[inline]
    pub fn quadratic(&self, t: Point<T>) -> T {
        t.dot(&self.apply(t))
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        (self.xy - self.yx).abs() <= tol * (self.xx.abs() + self.yy.abs())
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn eigenvalues(&self) -> (T, T) {
        let off = (self.xy + self.yx) * T::half();
        let mean = (self.xx + self.yy) * T::half();
        let diff = (self.xx - self.yy) * T::half();
        let r = (diff * diff + off * off).sqrt();
        (mean - r, mean + r)
    }

    pub fn is_spd(&self) -> bool {
        self.is_symmetric(T::lit(1e-12)) && self.eigenvalues().0 > T::zero()
    }

    /// Scalar value of an isotropic tensor, if it is one.
    pub fn as_isotropic(&self) -> Option<T> {
        let tol = T::lit(1e-14) * (self.xx.abs() + self.yy.abs());
        if self.xy.abs() <= tol && self.yx.abs() <= tol && (self.xx - self.yy).abs() <= tol {
            Some(self.xx)
        } else {
            None
        }
    }
}

/// Axis-aligned rectangle `(x0, y0) - (x1, y1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect<T> {
    pub x0: T,
    pub y0: T,
    pub x1: T,
    pub y1: T,
}

impl<T: Scalar> Rect<T> {
    pub fn new(x0: T, y0: T, x1: T, y1: T) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> T {
        self.x1 - self.x0
    }

    pub fn height(&self) -> T {
        self.y1 - self.y0
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point<T> {
        Point::new((self.x0 + self.x1) * T::half(), (self.y0 + self.y1) * T::half())
    }

    pub fn lo(&self, axis: Axis) -> T {
        match axis {
            Axis::X => self.x0,
            Axis::Y => self.y0,
        }
    }

    pub fn hi(&self, axis: Axis) -> T {
        match axis {
            Axis::X => self.x1,
            Axis::Y => self.y1,
        }
    }

    pub fn contains(&self, p: Point<T>, tol: T) -> bool {
        p.x >= self.x0 - tol && p.x <= self.x1 + tol && p.y >= self.y0 - tol && p.y <= self.y1 + tol
    }
}

/// Signed area of a polygon (positive for counter-clockwise ordering).
pub fn signed_area<T: Scalar>(poly: &[Point<T>]) -> T {
    let n = poly.len();
    let mut a = T::zero();
    for i in 0..n {
        a += poly[i].cross(&poly[(i + 1) % n]);
    }
    a * T::half()
}

/// Area centroid of a simple polygon.
pub fn polygon_centroid<T: Scalar>(poly: &[Point<T>]) -> Point<T> {
    let n = poly.len();
    let mut a = T::zero();
    let mut c = Point::zero();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let w = p.cross(&q);
        a += w;
        c = c + (p + q) * w;
    }
    c / (T::lit(3.0) * a)
}

/// Arithmetic mean of the corner positions.
pub fn vertex_average<T: Scalar>(poly: &[Point<T>]) -> Point<T> {
    let mut c = Point::zero();
    for p in poly {
        c = c + *p;
    }
    c / T::from_count(poly.len())
}
