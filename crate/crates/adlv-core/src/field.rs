//! Table-driven arithmetic for `F_{p^n}` with the Frobenius `x ↦ x^p`.
//!
//! Elements are codes in `0..p^n`, the base-`p` digits being the coefficients
//! of the polynomial representative. Multiplication goes through discrete
//! log tables for a primitive element, so the field order must stay modest;
//! the defaults (`p = 2`, `n = 4`) are tiny.

use alloc::vec::Vec;

use crate::error::Error;

/// An element of a [`FiniteField`], as a polynomial code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fq(pub u32);

#[derive(Debug, Clone)]
pub struct FiniteField {
    p: u32,
    deg: u32,
    order: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    frob: Vec<u32>,
    frob_inv: Vec<u32>,
}

const MAX_ORDER: u64 = 1 << 16;

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FiniteField {
    /// Builds `F_{p^deg}` by searching monic degree-`deg` polynomials until
    /// one makes `x` a primitive root; such a polynomial is automatically
    /// irreducible.
    pub fn new(p: u32, deg: u32) -> Result<Self, Error> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let order = (0..deg).try_fold(1u64, |acc, _| {
            let next = acc * p as u64;
            if next > MAX_ORDER {
                None
            } else {
                Some(next)
            }
        });
        let order = match order {
            Some(o) if deg >= 1 => o as u32,
            _ => return Err(Error::FieldTooLarge((p as u64).pow(deg.max(1)))),
        };
        // multiply-by-x modulo the candidate, digitwise base p
        let mul_x = |code: u32, modulus: &[u32]| -> u32 {
            let mut digits = to_digits(code, p, deg);
            let top = digits[deg as usize - 1];
            for i in (1..deg as usize).rev() {
                digits[i] = digits[i - 1];
            }
            digits[0] = 0;
            if top != 0 {
                for i in 0..deg as usize {
                    // subtract top * modulus[i]
                    let v = (digits[i] + p * p - (top * modulus[i]) % p) % p;
                    digits[i] = v;
                }
            }
            from_digits(&digits, p)
        };
        for tail in 0..order {
            let modulus = to_digits(tail, p, deg);
            let mut exp = Vec::with_capacity(order as usize);
            let mut cur = 1u32;
            let mut primitive = true;
            for _ in 0..order - 1 {
                exp.push(cur);
                cur = mul_x(cur, &modulus);
                if cur == 0 {
                    primitive = false;
                    break;
                }
                if cur == 1 && exp.len() < (order - 1) as usize {
                    primitive = false;
                    break;
                }
            }
            if !primitive || cur != 1 {
                continue;
            }
            let mut log = alloc::vec![0u32; order as usize];
            for (i, &e) in exp.iter().enumerate() {
                log[e as usize] = i as u32;
            }
            let group = (order - 1) as u64;
            let mut frob = alloc::vec![0u32; order as usize];
            let mut frob_inv = alloc::vec![0u32; order as usize];
            let pn1 = mod_pow(p as u64, deg as u64 - 1, group);
            for c in 1..order {
                let l = log[c as usize] as u64;
                frob[c as usize] = exp[((l * p as u64) % group) as usize];
                frob_inv[c as usize] = exp[((l * pn1) % group) as usize];
            }
            return Ok(FiniteField {
                p,
                deg,
                order,
                exp,
                log,
                frob,
                frob_inv,
            });
        }
        Err(Error::FieldTooLarge(order as u64))
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn zero(&self) -> Fq {
        Fq(0)
    }

    pub fn one(&self) -> Fq {
        Fq(1)
    }

    /// The element with the given code; codes enumerate the field.
    pub fn element(&self, code: u32) -> Fq {
        debug_assert!(code < self.order);
        Fq(code % self.order)
    }

    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        if self.p == 2 {
            return Fq(a.0 ^ b.0);
        }
        let xs = to_digits(a.0, self.p, self.deg);
        let ys = to_digits(b.0, self.p, self.deg);
        let sum: Vec<u32> = xs.iter().zip(&ys).map(|(x, y)| (x + y) % self.p).collect();
        Fq(from_digits(&sum, self.p))
    }

    pub fn neg(&self, a: Fq) -> Fq {
        if self.p == 2 {
            return a;
        }
        let xs = to_digits(a.0, self.p, self.deg);
        let neg: Vec<u32> = xs.iter().map(|x| (self.p - x) % self.p).collect();
        Fq(from_digits(&neg, self.p))
    }

    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        if a.0 == 0 || b.0 == 0 {
            return Fq(0);
        }
        let l = (self.log[a.0 as usize] as u64 + self.log[b.0 as usize] as u64)
            % (self.order - 1) as u64;
        Fq(self.exp[l as usize])
    }

    pub fn inv(&self, a: Fq) -> Fq {
        debug_assert!(a.0 != 0, "inverse of zero");
        let group = (self.order - 1) as u64;
        let l = (group - self.log[a.0 as usize] as u64) % group;
        Fq(self.exp[l as usize])
    }

    pub fn div(&self, a: Fq, b: Fq) -> Fq {
        self.mul(a, self.inv(b))
    }

    /// The Frobenius `σ: x ↦ x^p` over the prime field.
    pub fn frobenius(&self, a: Fq) -> Fq {
        Fq(self.frob[a.0 as usize])
    }

    /// `σ^{-1}`, i.e. `x ↦ x^{p^{n-1}}`.
    pub fn frobenius_inv(&self, a: Fq) -> Fq {
        Fq(self.frob_inv[a.0 as usize])
    }
}

fn to_digits(code: u32, p: u32, deg: u32) -> Vec<u32> {
    let mut d = alloc::vec![0u32; deg as usize];
    let mut c = code;
    for slot in d.iter_mut() {
        *slot = c % p;
        c /= p;
    }
    d
}

fn from_digits(digits: &[u32], p: u32) -> u32 {
    digits.iter().rev().fold(0, |acc, &d| acc * p + d)
}

fn mod_pow(mut base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_16_axioms() {
        let f = FiniteField::new(2, 4).unwrap();
        assert_eq!(f.order(), 16);
        for a in 0..16 {
            let a = f.element(a);
            assert_eq!(f.add(a, f.zero()), a);
            assert_eq!(f.mul(a, f.one()), a);
            assert_eq!(f.add(a, a), f.zero());
            if a != f.zero() {
                assert_eq!(f.mul(a, f.inv(a)), f.one());
            }
            for b in 0..16 {
                let b = f.element(b);
                assert_eq!(f.mul(a, b), f.mul(b, a));
                // Frobenius is additive and multiplicative
                assert_eq!(f.frobenius(f.add(a, b)), f.add(f.frobenius(a), f.frobenius(b)));
                assert_eq!(f.frobenius(f.mul(a, b)), f.mul(f.frobenius(a), f.frobenius(b)));
            }
        }
    }

    #[test]
    fn frobenius_fixes_exactly_the_prime_field() {
        let f = FiniteField::new(2, 4).unwrap();
        let fixed: alloc::vec::Vec<u32> = (0..16)
            .filter(|&c| f.frobenius(f.element(c)) == f.element(c))
            .collect();
        assert_eq!(fixed, alloc::vec![0, 1]);
        // sigma^4 = id, sigma^2 != id
        let mut nontrivial_square = false;
        for c in 0..16 {
            let a = f.element(c);
            let s4 = f.frobenius(f.frobenius(f.frobenius(f.frobenius(a))));
            assert_eq!(s4, a);
            if f.frobenius(f.frobenius(a)) != a {
                nontrivial_square = true;
            }
        }
        assert!(nontrivial_square);
    }

    #[test]
    fn frobenius_inverse_round_trips() {
        for (p, n) in [(2, 4), (2, 2), (3, 2), (5, 1)] {
            let f = FiniteField::new(p, n).unwrap();
            for c in 0..f.order() {
                let a = f.element(c);
                assert_eq!(f.frobenius_inv(f.frobenius(a)), a);
                assert_eq!(f.frobenius(f.frobenius_inv(a)), a);
            }
        }
    }

    #[test]
    fn odd_characteristic_addition() {
        let f = FiniteField::new(3, 2).unwrap();
        assert_eq!(f.order(), 9);
        for a in 0..9 {
            let a = f.element(a);
            assert_eq!(f.add(a, f.neg(a)), f.zero());
            assert_eq!(f.sub(a, a), f.zero());
        }
        // frobenius is x^3 here
        for c in 0..9 {
            let a = f.element(c);
            let cube = f.mul(f.mul(a, a), a);
            assert_eq!(f.frobenius(a), cube);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(FiniteField::new(4, 2), Err(Error::NotPrime(4))));
        assert!(matches!(
            FiniteField::new(2, 40),
            Err(Error::FieldTooLarge(_))
        ));
    }
}
