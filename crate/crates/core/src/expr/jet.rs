//! Second-order forward-mode jets.
//!
//! A [`Jet`] carries the value, gradient and Hessian of a scalar field at a
//! single point. Arithmetic on jets propagates all three exactly (up to
//! floating round-off), so a closed-form field evaluated on jets seeded with
//! the coordinate variables yields its derivatives without finite differences.

use smallvec::{smallvec, SmallVec};

/// Gradient storage, inline up to four variables.
pub type Gradient = SmallVec<[f64; 4]>;
/// Hessian storage, inline up to four variables.
pub type Hessian = SmallVec<[f64; 16]>;

/// Value, gradient and Hessian of a scalar field at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub gradient: Gradient,
    /// Row-major `n x n`, symmetric.
    pub hessian: Hessian,
}

impl Jet {
    pub fn constant(value: f64, n: usize) -> Self {
        Jet {
            value,
            gradient: smallvec![0.0; n],
            hessian: smallvec![0.0; n * n],
        }
    }

    /// The coordinate function `u_{index+1}` at `value`.
    pub fn variable(value: f64, index: usize, n: usize) -> Self {
        let mut jet = Jet::constant(value, n);
        jet.gradient[index] = 1.0;
        jet
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    #[inline]
    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.hessian[i * self.dim() + j]
    }

    pub fn grad_norm_sq(&self) -> f64 {
        self.gradient.iter().map(|g| g * g).sum()
    }

    pub fn grad_norm(&self) -> f64 {
        self.grad_norm_sq().sqrt()
    }

    pub fn laplacian(&self) -> f64 {
        (0..self.dim()).map(|i| self.hess(i, i)).sum()
    }

    /// `sum_ij g_i g_j H_ij`.
    pub fn hessian_quadratic_form(&self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.hessian[i * n + j] * self.gradient[j];
            }
            acc += self.gradient[i] * row;
        }
        acc
    }

    /// Compose with a scalar function given its value and first two derivatives
    /// at `self.value`.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet {
        let mut out = self.clone();
        out.chain_in_place(f0, f1, f2);
        out
    }

    pub fn chain_in_place(&mut self, f0: f64, f1: f64, f2: f64) {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                self.hessian[k] = f1 * self.hessian[k] + f2 * self.gradient[i] * self.gradient[j];
            }
        }
        self.gradient.iter_mut().for_each(|g| *g *= f1);
        self.value = f0;
    }

    pub fn neg(&self) -> Jet {
        self.chain(-self.value, -1.0, 0.0)
    }

    pub fn neg_in_place(&mut self) {
        self.scale_in_place(-1.0);
    }

    /// Multiply by the constant `c`.
    pub fn scale_in_place(&mut self, c: f64) {
        self.value *= c;
        self.gradient.iter_mut().for_each(|g| *g *= c);
        self.hessian.iter_mut().for_each(|h| *h *= c);
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &Jet) {
        self.zip_assign(other, 1.0);
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let mut out = self.clone();
        out.sub_assign(other);
        out
    }

    pub fn sub_assign(&mut self, other: &Jet) {
        self.zip_assign(other, -1.0);
    }

    fn zip_assign(&mut self, other: &Jet, sign: f64) {
        self.value += sign * other.value;
        for (a, b) in self.gradient.iter_mut().zip(&other.gradient) {
            *a += sign * b;
        }
        for (a, b) in self.hessian.iter_mut().zip(&other.hessian) {
            *a += sign * b;
        }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let mut out = self.clone();
        out.mul_assign(other);
        out
    }

    pub fn mul_assign(&mut self, other: &Jet) {
        let n = self.dim();
        let (a, b) = (self.value, other.value);
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                self.hessian[k] = a * other.hessian[k]
                    + b * self.hessian[k]
                    + (self.gradient[i] * other.gradient[j] + other.gradient[i] * self.gradient[j]);
            }
        }
        for (ga, gb) in self.gradient.iter_mut().zip(&other.gradient) {
            *ga = a * gb + b * *ga;
        }
        self.value = a * b;
    }

    /// Quotient; the caller guarantees `other.value != 0`.
    pub fn div(&self, other: &Jet) -> Jet {
        let mut out = self.clone();
        out.div_assign(other);
        out
    }

    pub fn div_assign(&mut self, other: &Jet) {
        let n = self.dim();
        let b = other.value;
        let q = self.value / b;
        // gradient of the quotient first; the Hessian is written in terms of it
        for (ga, gb) in self.gradient.iter_mut().zip(&other.gradient) {
            *ga = (*ga - q * gb) / b;
        }
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                self.hessian[k] = (self.hessian[k]
                    - q * other.hessian[k]
                    - (self.gradient[i] * other.gradient[j] + other.gradient[i] * self.gradient[j]))
                    / b;
            }
        }
        self.value = q;
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.gradient.iter().all(|g| g.is_finite())
            && self.hessian.iter().all(|h| h.is_finite())
    }
}
