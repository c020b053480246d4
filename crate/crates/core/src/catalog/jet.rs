use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A Hermitian 2×2 matrix `[[a11, a12], [conj(a12), a22]]`.
///
/// For n = 1 only `a11` is meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Herm2 {
    pub a11: f64,
    pub a22: f64,
    pub a12: Complex64,
}

impl Herm2 {
    pub const ZERO: Herm2 = Herm2 { a11: 0.0, a22: 0.0, a12: Complex64 { re: 0.0, im: 0.0 } };
    pub const IDENTITY: Herm2 = Herm2 { a11: 1.0, a22: 1.0, a12: Complex64 { re: 0.0, im: 0.0 } };

    pub fn diag(a11: f64, a22: f64) -> Self {
        Herm2 { a11, a22, a12: Complex64::new(0.0, 0.0) }
    }

    /// `g g*`, i.e. entries `g_j conj(g_k)`.
    pub fn outer(g: &[Complex64; 2]) -> Self {
        Herm2 { a11: g[0].norm_sqr(), a22: g[1].norm_sqr(), a12: g[0] * g[1].conj() }
    }

    /// `g h* + h g*`.
    pub fn sym_outer(g: &[Complex64; 2], h: &[Complex64; 2]) -> Self {
        Herm2 {
            a11: 2.0 * (g[0] * h[0].conj()).re,
            a22: 2.0 * (g[1] * h[1].conj()).re,
            a12: g[0] * h[1].conj() + h[0] * g[1].conj(),
        }
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12.norm_sqr()
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    /// The symmetric bilinear form with `mixed(A, A) = 2 det A`.
    pub fn mixed(&self, b: &Herm2) -> f64 {
        self.a11 * b.a22 + self.a22 * b.a11 - 2.0 * (self.a12 * b.a12.conj()).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = 0.5 * self.trace();
        let d = (0.25 * (self.a11 - self.a22).powi(2) + self.a12.norm_sqr()).sqrt();
        m - d
    }

    pub fn max_abs(&self) -> f64 {
        self.a11.abs().max(self.a22.abs()).max(self.a12.norm())
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a22.is_finite() && self.a12.re.is_finite() && self.a12.im.is_finite()
    }
}

impl Add for Herm2 {
    type Output = Herm2;
    fn add(self, o: Herm2) -> Herm2 {
        Herm2 { a11: self.a11 + o.a11, a22: self.a22 + o.a22, a12: self.a12 + o.a12 }
    }
}

impl Mul<Herm2> for f64 {
    type Output = Herm2;
    fn mul(self, o: Herm2) -> Herm2 {
        Herm2 { a11: self * o.a11, a22: self * o.a22, a12: o.a12 * self }
    }
}

/// Value, complex gradient `(∂u/∂z_j)` and complex Hessian `(∂²u/∂z_j∂z̄_k)`
/// of a real function at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub grad: [Complex64; 2],
    pub hess: Herm2,
}

const CZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

impl Jet {
    pub fn constant(value: f64) -> Self {
        Jet { value, grad: [CZERO; 2], hess: Herm2::ZERO }
    }

    /// Jet of a function of one variable with the given derivatives.
    pub fn single(var: usize, value: f64, g: Complex64, h: f64) -> Self {
        let mut grad = [CZERO; 2];
        grad[var] = g;
        let mut hess = Herm2::ZERO;
        if var == 0 {
            hess.a11 = h;
        } else {
            hess.a22 = h;
        }
        Jet { value, grad, hess }
    }

    pub fn scale(&self, c: f64) -> Self {
        Jet { value: c * self.value, grad: [self.grad[0] * c, self.grad[1] * c], hess: c * self.hess }
    }

    pub fn add(&self, o: &Jet) -> Self {
        Jet {
            value: self.value + o.value,
            grad: [self.grad[0] + o.grad[0], self.grad[1] + o.grad[1]],
            hess: self.hess + o.hess,
        }
    }

    /// `g ∘ self` for a real function `g` with derivatives `g'`, `g''`.
    pub fn compose(&self, value: f64, d1: f64, d2: f64) -> Self {
        Jet {
            value,
            grad: [self.grad[0] * d1, self.grad[1] * d1],
            hess: d1 * self.hess + d2 * Herm2::outer(&self.grad),
        }
    }

    pub fn mul(&self, o: &Jet) -> Self {
        Jet {
            value: self.value * o.value,
            grad: [
                self.grad[0] * o.value + o.grad[0] * self.value,
                self.grad[1] * o.value + o.grad[1] * self.value,
            ],
            hess: o.value * self.hess + self.value * o.hess + Herm2::sym_outer(&self.grad, &o.grad),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.grad.iter().all(|g| g.re.is_finite() && g.im.is_finite()) && self.hess.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_of_identity() {
        assert_eq!(Herm2::IDENTITY.mixed(&Herm2::IDENTITY), 2.0);
        assert_eq!(Herm2::IDENTITY.det(), 1.0);
    }

    #[test]
    fn eigenvalue_of_rank_one() {
        let g = [Complex64::new(1.0, 2.0), Complex64::new(0.5, -1.0)];
        let m = Herm2::outer(&g);
        assert!(m.det().abs() < 1e-14);
        assert!(m.min_eigenvalue().abs() < 1e-14);
    }
}
