//! Points in space and in the transverse plane.
//!
//! The propagation axis is `x` throughout; `(y, z)` span the transverse plane.

use crate::scalar::Real;
use std::ops::{Add, Mul, Neg, Sub};

/// A point in 3-D space, coordinates in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Point3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn norm_sq(&self) -> T {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    /// Euclidean distance. Symmetric bit-for-bit: `a.distance(b) == b.distance(a)`.
    pub fn distance(&self, other: &Self) -> T {
        (*self - *other).norm()
    }

    pub fn dot(&self, other: &Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Splits the point into axial position and transverse offset.
    pub fn to_paraxial(self) -> ParaxialCoords<T> {
        ParaxialCoords::new(self.x, TransversePoint::new(self.y, self.z))
    }
}

impl<T: Real> Add for Point3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for Point3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for Point3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<T> for Point3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Transverse vector `ρ = (y, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransversePoint<T> {
    pub y: T,
    pub z: T,
}

impl<T: Real> TransversePoint<T> {
    pub const fn new(y: T, z: T) -> Self {
        Self { y, z }
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.y.is_finite() && self.z.is_finite()
    }

    pub fn norm_sq(&self) -> T {
        self.y * self.y + self.z * self.z
    }

    pub fn distance_sq(&self, other: &Self) -> T {
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        dy * dy + dz * dz
    }

    pub fn dot(&self, other: &Self) -> T {
        self.y * other.y + self.z * other.z
    }
}

impl<T: Real> Neg for TransversePoint<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.y, -self.z)
    }
}

/// Axial position plus transverse offset, the natural coordinates of paraxial propagation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ParaxialCoords<T> {
    pub x: T,
    pub rho: TransversePoint<T>,
}

impl<T: Real> ParaxialCoords<T> {
    pub const fn new(x: T, rho: TransversePoint<T>) -> Self {
        Self { x, rho }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.rho.is_finite()
    }

    pub fn to_point(self) -> Point3<T> {
        Point3::new(self.x, self.rho.y, self.rho.z)
    }
}

impl<T: Real> From<Point3<T>> for ParaxialCoords<T> {
    fn from(p: Point3<T>) -> Self {
        p.to_paraxial()
    }
}
