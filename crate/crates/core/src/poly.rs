//! Univariate polynomials over a field, just enough to decide whether a
//! minimal polynomial is irreducible.
//!
//! Coefficients are stored lowest degree first with no trailing zeros.

use crate::scalar::{Field, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Poly {
    field: Field,
    coeffs: Vec<Scalar>,
}

/// Outcome of an irreducibility test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Irreducibility {
    Irreducible,
    /// A root in the base field.
    HasRoot(Option<Scalar>),
    /// Reducible without a known root.
    Reducible,
    Unknown,
}

impl Poly {
    pub fn new(field: Field, mut coeffs: Vec<Scalar>) -> Self {
        while coeffs.last().is_some_and(Scalar::is_zero) {
            coeffs.pop();
        }
        Poly { field, coeffs }
    }

    fn x(field: Field) -> Self {
        Poly::new(field, vec![field.zero(), field.one()])
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn lead(&self) -> &Scalar {
        self.coeffs.last().expect("nonzero polynomial")
    }

    fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let z = self.field.zero();
        let c = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&z) - other.coeffs.get(i).unwrap_or(&z))
            .collect();
        Poly::new(self.field, c)
    }

    fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::new(self.field, vec![]);
        }
        let mut c = vec![self.field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j].add_mul_assign(a, b);
            }
        }
        Poly::new(self.field, c)
    }

    fn rem(&self, m: &Poly) -> Poly {
        let mut r = self.coeffs.clone();
        let dm = m.coeffs.len() - 1;
        let inv = m.lead().inv().expect("nonzero leading coefficient");
        while r.len() > dm && !r.is_empty() {
            let top = r.len() - 1;
            let f = &r[top] * &inv;
            if !f.is_zero() {
                let neg = -&f;
                for (k, mc) in m.coeffs.iter().enumerate() {
                    r[top - dm + k].add_mul_assign(&neg, mc);
                }
            }
            r.pop();
            while r.last().is_some_and(Scalar::is_zero) {
                r.pop();
            }
        }
        Poly::new(self.field, r)
    }

    fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }

    fn pow_mod(&self, mut e: u128, m: &Poly) -> Poly {
        let mut base = self.rem(m);
        let mut acc = Poly::new(self.field, vec![self.field.one()]).rem(m);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
            e >>= 1;
        }
        acc
    }

    fn eval(&self, x: &Scalar) -> Scalar {
        let mut acc = self.field.zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    /// x^(p^k) mod self, by repeated p-th powers.
    fn frobenius_power(&self, p: u64, k: usize) -> Poly {
        let mut y = Poly::x(self.field).rem(self);
        for _ in 0..k {
            y = y.pow_mod(p as u128, self);
        }
        y
    }

    /// Decide irreducibility where that is cheap: Rabin's test over GF(p),
    /// the discriminant for quadratics over Q.
    pub fn irreducibility(&self) -> Irreducibility {
        let Some(n) = self.degree() else {
            return Irreducibility::Unknown;
        };
        if n <= 1 {
            return Irreducibility::Irreducible;
        }
        match self.field {
            Field::Rationals => {
                if n != 2 {
                    return Irreducibility::Unknown;
                }
                let (c, b, a) = (&self.coeffs[0], &self.coeffs[1], &self.coeffs[2]);
                let disc = &(b * b) - &(&(a * c) * &self.field.from_i64(4));
                if let Some(root) = self.field.sqrt(&disc) {
                    let two_a = &self.field.from_i64(2) * a;
                    Irreducibility::HasRoot(Some((&root - b).try_div(&two_a).expect("nonzero leading coefficient")))
                } else {
                    Irreducibility::Irreducible
                }
            }
            Field::PrimeField { p } => {
                if p <= 1 << 16 {
                    let field = self.field;
                    if let Some(r) = (0..p as i64).map(|v| field.from_i64(v)).find(|r| self.eval(r).is_zero()) {
                        return Irreducibility::HasRoot(Some(r));
                    }
                }
                let x = Poly::x(self.field);
                if self.frobenius_power(p, n).sub(&x).rem(self).degree().is_some() {
                    return Irreducibility::Reducible;
                }
                for q in prime_divisors(n) {
                    let g = self.frobenius_power(p, n / q).sub(&x).gcd(self);
                    if g.degree() != Some(0) {
                        return if n / q == 1 { Irreducibility::HasRoot(None) } else { Irreducibility::Reducible };
                    }
                }
                Irreducibility::Irreducible
            }
        }
    }
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}
