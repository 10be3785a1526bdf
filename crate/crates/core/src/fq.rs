//! Arithmetic in the finite residue fields F_{p^m} and polynomial machinery
//! over them: the residue-level half of Hensel lifting, distinct-degree
//! splitting and the cyclicity tests used by the lattice oracles.
//!
//! Every field uses the deterministic "lexicographically smallest monic
//! irreducible" defining polynomial for its degree, so that repeated
//! constructions of F_{p^m} agree and embeddings are reproducible.

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, PartialEq, Eq, Hash)]
struct FqInner {
    p: u64,
    m: usize,
    /// Monic defining polynomial of degree m over F_p, coefficients in [0,p),
    /// length m+1, last entry 1. For m = 1 this is [0, 1] (i.e. y).
    modulus: Vec<u64>,
}

/// The finite field F_{p^m}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FqField(Arc<FqInner>);

/// Element of an [`FqField`]: coefficient vector of length m, entries in [0,p).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FqElt {
    pub(crate) c: Vec<u64>,
}

impl fmt::Debug for FqElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fq{:?}", self.c)
    }
}

fn poly_is_irreducible_fp(p: u64, poly: &[u64]) -> bool {
    // Trial division by all monic polynomials of degree <= deg/2 over F_p.
    // Only used for tiny degrees when constructing defining polynomials.
    let deg = poly.len() - 1;
    for d in 1..=deg / 2 {
        let count = p.pow(d as u32);
        for idx in 0..count {
            let mut div = Vec::with_capacity(d + 1);
            let mut k = idx;
            for _ in 0..d {
                div.push(k % p);
                k /= p;
            }
            div.push(1);
            if fp_poly_rem(p, poly, &div).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn fp_poly_rem(p: u64, num: &[u64], den: &[u64]) -> Vec<u64> {
    let mut r: Vec<u64> = num.to_vec();
    let dd = den.len() - 1;
    while r.len() > dd {
        let lead = *r.last().unwrap() % p;
        let shift = r.len() - 1 - dd;
        if lead != 0 {
            for i in 0..=dd {
                let idx = shift + i;
                let sub = (lead * (den[i] % p)) % p;
                r[idx] = (r[idx] + p * p - sub) % p;
            }
        }
        r.pop();
    }
    r
}

/// Lexicographically smallest monic irreducible of degree m over F_p.
pub fn canonical_modulus(p: u64, m: usize) -> Vec<u64> {
    if m == 1 {
        return vec![0, 1];
    }
    let count = p.pow(m as u32);
    for idx in 0..count {
        let mut poly = Vec::with_capacity(m + 1);
        let mut k = idx;
        for _ in 0..m {
            poly.push(k % p);
            k /= p;
        }
        poly.push(1);
        if poly[0] != 0 && poly_is_irreducible_fp(p, &poly) {
            return poly;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists")
}

impl FqField {
    pub fn new(p: u64, m: usize) -> Self {
        assert!(m >= 1);
        let modulus = canonical_modulus(p, m);
        FqField(Arc::new(FqInner { p, m, modulus }))
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }
    pub fn degree(&self) -> usize {
        self.0.m
    }
    pub fn order(&self) -> u64 {
        self.0.p.pow(self.0.m as u32)
    }
    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    pub fn zero(&self) -> FqElt {
        FqElt { c: vec![0; self.0.m] }
    }
    pub fn one(&self) -> FqElt {
        self.from_u64(1)
    }
    pub fn from_u64(&self, v: u64) -> FqElt {
        let mut c = vec![0; self.0.m];
        c[0] = v % self.0.p;
        FqElt { c }
    }
    pub fn gen(&self) -> FqElt {
        let mut c = vec![0; self.0.m];
        if self.0.m > 1 {
            c[1] = 1;
        }
        FqElt { c }
    }
    pub fn from_coeffs(&self, coeffs: &[u64]) -> FqElt {
        let mut c = vec![0; self.0.m];
        for (i, &v) in coeffs.iter().enumerate() {
            assert!(i < self.0.m, "coefficient vector too long");
            c[i] = v % self.0.p;
        }
        FqElt { c }
    }

    /// Enumerate all field elements in a deterministic order.
    pub fn elements(&self) -> impl Iterator<Item = FqElt> + '_ {
        let total = self.order();
        (0..total).map(move |idx| {
            let mut c = vec![0; self.0.m];
            let mut k = idx;
            for slot in c.iter_mut() {
                *slot = k % self.0.p;
                k /= self.0.p;
            }
            FqElt { c }
        })
    }

    pub fn is_zero(&self, a: &FqElt) -> bool {
        a.c.iter().all(|&x| x == 0)
    }

    pub fn add(&self, a: &FqElt, b: &FqElt) -> FqElt {
        let p = self.0.p;
        FqElt { c: a.c.iter().zip(&b.c).map(|(&x, &y)| (x + y) % p).collect() }
    }
    pub fn sub(&self, a: &FqElt, b: &FqElt) -> FqElt {
        let p = self.0.p;
        FqElt { c: a.c.iter().zip(&b.c).map(|(&x, &y)| (x + p - y) % p).collect() }
    }
    pub fn neg(&self, a: &FqElt) -> FqElt {
        let p = self.0.p;
        FqElt { c: a.c.iter().map(|&x| (p - x) % p).collect() }
    }

    pub fn mul(&self, a: &FqElt, b: &FqElt) -> FqElt {
        let p = self.0.p;
        let m = self.0.m;
        let mut prod = vec![0u64; 2 * m - 1];
        for (i, &x) in a.c.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.c.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        // reduce modulo the defining polynomial
        for i in (m..prod.len()).rev() {
            let lead = prod[i];
            if lead != 0 {
                prod[i] = 0;
                for j in 0..m {
                    let sub = (lead * self.0.modulus[j]) % p;
                    prod[i - m + j] = (prod[i - m + j] + p * p - sub) % p;
                }
            }
        }
        prod.truncate(m);
        FqElt { c: prod }
    }

    pub fn pow(&self, a: &FqElt, mut e: u64) -> FqElt {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &FqElt) -> Result<FqElt> {
        if self.is_zero(a) {
            return Err(Error::domain("inverse of zero in residue field"));
        }
        Ok(self.pow(a, self.order() - 2))
    }

    /// The q0-power Frobenius relative to the prime field is x ↦ x^p.
    pub fn frobenius(&self, a: &FqElt) -> FqElt {
        self.pow(a, self.0.p)
    }

    /// Image of `a` under the embedding into `target` (degree divisible by ours),
    /// determined by the deterministically chosen root of our modulus there.
    pub fn embed(&self, a: &FqElt, target: &FqField) -> Result<FqElt> {
        if target.p() != self.p() || target.degree() % self.degree() != 0 {
            return Err(Error::TowerMismatch(format!(
                "cannot embed F_{}^{} into F_{}^{}",
                self.p(),
                self.degree(),
                target.p(),
                target.degree()
            )));
        }
        if self.degree() == target.degree() {
            return Ok(a.clone());
        }
        let root = self.embedding_root(target)?;
        // evaluate a's coefficient vector at the root
        let mut acc = target.zero();
        for &co in a.c.iter().rev() {
            acc = target.mul(&acc, &root);
            acc = target.add(&acc, &target.from_u64(co));
        }
        Ok(acc)
    }

    /// Deterministic root of our modulus inside `target` (first in scan order).
    pub fn embedding_root(&self, target: &FqField) -> Result<FqElt> {
        for cand in target.elements() {
            let mut acc = target.zero();
            for &co in self.0.modulus.iter().rev() {
                acc = target.mul(&acc, &cand);
                acc = target.add(&acc, &target.from_u64(co));
            }
            if target.is_zero(&acc) {
                return Ok(cand);
            }
        }
        Err(Error::TowerMismatch("no embedding root found".into()))
    }
}

/// Dense polynomial over F_q; coefficient of x^i at index i.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FqPoly {
    pub coeffs: Vec<FqElt>,
}

impl FqPoly {
    pub fn new(field: &FqField, mut coeffs: Vec<FqElt>) -> Self {
        while coeffs.len() > 1 && field.is_zero(coeffs.last().unwrap()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(field.zero());
        }
        FqPoly { coeffs }
    }
    pub fn zero(field: &FqField) -> Self {
        FqPoly { coeffs: vec![field.zero()] }
    }
    pub fn x(field: &FqField) -> Self {
        FqPoly { coeffs: vec![field.zero(), field.one()] }
    }
    pub fn constant(c: FqElt) -> Self {
        FqPoly { coeffs: vec![c] }
    }
    pub fn degree(&self, field: &FqField) -> Option<usize> {
        let mut d = None;
        for (i, c) in self.coeffs.iter().enumerate() {
            if !field.is_zero(c) {
                d = Some(i);
            }
        }
        d
    }
    pub fn is_zero(&self, field: &FqField) -> bool {
        self.degree(field).is_none()
    }
    pub fn is_monic(&self, field: &FqField) -> bool {
        match self.degree(field) {
            Some(d) => self.coeffs[d] == field.one(),
            None => false,
        }
    }

    pub fn add(&self, other: &Self, field: &FqField) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.coeffs.get(i).cloned().unwrap_or_else(|| field.zero());
            let b = other.coeffs.get(i).cloned().unwrap_or_else(|| field.zero());
            out.push(field.add(&a, &b));
        }
        FqPoly::new(field, out)
    }
    pub fn sub(&self, other: &Self, field: &FqField) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.coeffs.get(i).cloned().unwrap_or_else(|| field.zero());
            let b = other.coeffs.get(i).cloned().unwrap_or_else(|| field.zero());
            out.push(field.sub(&a, &b));
        }
        FqPoly::new(field, out)
    }
    pub fn mul(&self, other: &Self, field: &FqField) -> Self {
        if self.is_zero(field) || other.is_zero(field) {
            return FqPoly::zero(field);
        }
        let mut out = vec![field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if field.is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                let t = field.mul(a, b);
                out[i + j] = field.add(&out[i + j], &t);
            }
        }
        FqPoly::new(field, out)
    }
    pub fn scale(&self, c: &FqElt, field: &FqField) -> Self {
        FqPoly::new(field, self.coeffs.iter().map(|a| field.mul(a, c)).collect())
    }

    /// Division with remainder by a polynomial with invertible leading coefficient.
    pub fn divrem(&self, den: &Self, field: &FqField) -> Result<(Self, Self)> {
        let dd = den
            .degree(field)
            .ok_or_else(|| Error::domain("division by zero polynomial"))?;
        let lead_inv = field.inv(&den.coeffs[dd])?;
        let mut rem = self.coeffs.clone();
        let mut quo = vec![field.zero(); self.coeffs.len().saturating_sub(dd)];
        if quo.is_empty() {
            quo.push(field.zero());
        }
        while rem.len() > dd {
            let k = rem.len() - 1;
            let lead = rem[k].clone();
            if !field.is_zero(&lead) {
                let factor = field.mul(&lead, &lead_inv);
                let shift = k - dd;
                if shift < quo.len() {
                    quo[shift] = field.add(&quo[shift], &factor);
                }
                for i in 0..=dd {
                    let t = field.mul(&factor, &den.coeffs[i]);
                    rem[shift + i] = field.sub(&rem[shift + i], &t);
                }
            }
            rem.pop();
            if rem.is_empty() {
                break;
            }
        }
        Ok((FqPoly::new(field, quo), FqPoly::new(field, rem)))
    }

    pub fn monic(&self, field: &FqField) -> Result<Self> {
        let d = self
            .degree(field)
            .ok_or_else(|| Error::domain("monic of zero polynomial"))?;
        let inv = field.inv(&self.coeffs[d])?;
        Ok(self.scale(&inv, field))
    }

    pub fn gcd(&self, other: &Self, field: &FqField) -> Result<Self> {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero(field) {
            let (_, r) = a.divrem(&b, field)?;
            a = b;
            b = r;
        }
        if a.is_zero(field) {
            Ok(a)
        } else {
            a.monic(field)
        }
    }

    /// Extended gcd: returns monic g = gcd(self, other) and s, t with
    /// s·self + t·other = g.
    pub fn xgcd(&self, other: &Self, field: &FqField) -> Result<(Self, Self, Self)> {
        let mut r0 = self.clone();
        let mut r1 = other.clone();
        let mut s0 = FqPoly::new(field, vec![field.one()]);
        let mut s1 = FqPoly::zero(field);
        let mut t0 = FqPoly::zero(field);
        let mut t1 = FqPoly::new(field, vec![field.one()]);
        while !r1.is_zero(field) {
            let (q, r) = r0.divrem(&r1, field)?;
            let ns = s0.sub(&q.mul(&s1, field), field);
            let nt = t0.sub(&q.mul(&t1, field), field);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = ns;
            t0 = t1;
            t1 = nt;
        }
        let d = r0
            .degree(field)
            .ok_or_else(|| Error::domain("xgcd of zero polynomials"))?;
        let lead_inv = field.inv(&r0.coeffs[d])?;
        Ok((
            r0.scale(&lead_inv, field),
            s0.scale(&lead_inv, field),
            t0.scale(&lead_inv, field),
        ))
    }

    pub fn derivative(&self, field: &FqField) -> Self {
        if self.coeffs.len() <= 1 {
            return FqPoly::zero(field);
        }
        let p = field.p();
        let out = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = ((i as u64) + 1) % p;
                field.mul(c, &field.from_u64(k))
            })
            .collect();
        FqPoly::new(field, out)
    }

    pub fn eval(&self, x: &FqElt, field: &FqField) -> FqElt {
        let mut acc = field.zero();
        for c in self.coeffs.iter().rev() {
            acc = field.mul(&acc, x);
            acc = field.add(&acc, c);
        }
        acc
    }

    /// x^e modulo self (self monic, degree >= 1), by square and multiply.
    pub fn x_powmod(&self, e: u128, field: &FqField) -> Result<Self> {
        let d = self
            .degree(field)
            .ok_or_else(|| Error::domain("modulus is zero"))?;
        if d == 0 {
            return Err(Error::domain("modulus is constant"));
        }
        let mut result = FqPoly::new(field, vec![field.one()]);
        let mut base = FqPoly::x(field);
        let (_, r) = base.divrem(self, field)?;
        base = r;
        let mut k = e;
        while k > 0 {
            if k & 1 == 1 {
                let prod = result.mul(&base, field);
                result = prod.divrem(self, field)?.1;
            }
            let sq = base.mul(&base, field);
            base = sq.divrem(self, field)?.1;
            k >>= 1;
        }
        Ok(result)
    }

    /// Deterministic irreducibility test: f (monic, degree d) is irreducible over
    /// F_q iff x^{q^d} ≡ x (mod f) and gcd(x^{q^{d/ℓ}} − x, f) = 1 for every
    /// prime ℓ | d.
    pub fn is_irreducible(&self, field: &FqField) -> Result<bool> {
        let d = match self.degree(field) {
            None | Some(0) => return Ok(false),
            Some(d) => d,
        };
        if d == 1 {
            return Ok(true);
        }
        let q = field.order() as u128;
        let f = self.monic(field)?;
        let xq_d = f.x_powmod(q.pow(d as u32), field)?;
        let x = FqPoly::x(field).divrem(&f, field)?.1;
        if xq_d.sub(&x, field).degree(field).is_some() {
            return Ok(false);
        }
        let mut primes = vec![];
        let mut dd = d;
        let mut cand = 2;
        while dd > 1 {
            if dd % cand == 0 {
                primes.push(cand);
                while dd % cand == 0 {
                    dd /= cand;
                }
            }
            cand += 1;
        }
        for ell in primes {
            let e = q.pow((d / ell) as u32);
            let pow = f.x_powmod(e, field)?;
            let diff = pow.sub(&x, field);
            let g = diff.gcd(&f, field)?;
            if g.degree(field) != Some(0) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// All roots in F_q (no multiplicity), by scanning the field.
    pub fn roots(&self, field: &FqField) -> Vec<FqElt> {
        field
            .elements()
            .filter(|x| field.is_zero(&self.eval(x, field)))
            .collect()
    }

    /// Complete factorization into monic irreducibles with multiplicities.
    ///
    /// Distinct-degree splitting first, then equal-degree splitting for the
    /// tiny sizes here: degree-1 parts by root scan, higher-degree parts by
    /// trial division over all monic irreducibles of that degree.
    pub fn factor(&self, field: &FqField) -> Result<Vec<(FqPoly, usize)>> {
        let mut out: Vec<(FqPoly, usize)> = Vec::new();
        let mut f = self.monic(field)?;
        // strip repeated content via gcds with the derivative by repeatedly
        // dividing out each irreducible as it is found, so multiplicities are
        // counted directly
        while f.degree(field) != Some(0) {
            let g = Self::some_irreducible_factor(&f, field)?;
            let mut mult = 0;
            loop {
                let (q, r) = f.divrem(&g, field)?;
                if r.is_zero(field) {
                    mult += 1;
                    f = q;
                } else {
                    break;
                }
            }
            out.push((g, mult));
        }
        out.sort_by_key(|(g, _)| {
            (g.coeffs.len(), g.coeffs.iter().map(|c| c.c.clone()).collect::<Vec<_>>())
        });
        Ok(out)
    }

    fn some_irreducible_factor(f: &Self, field: &FqField) -> Result<FqPoly> {
        let d = f.degree(field).unwrap();
        // roots first
        for r in field.elements() {
            if field.is_zero(&f.eval(&r, field)) {
                return Ok(FqPoly::new(field, vec![field.neg(&r), field.one()]));
            }
        }
        // trial division by monic irreducibles of degree k = 2..d/2
        for k in 2..=d / 2 {
            let total = (field.order() as u128).pow(k as u32);
            if total > 2_000_000 {
                return Err(Error::unsupported(
                    "residue factorization budget exceeded (trial division space too large)",
                ));
            }
            let mut idx = 0u128;
            while idx < total {
                let mut coeffs = Vec::with_capacity(k + 1);
                let mut t = idx;
                let qo = field.order() as u128;
                for _ in 0..k {
                    let digit = (t % qo) as u64;
                    t /= qo;
                    // decode digit into an element
                    let mut c = vec![0u64; field.degree()];
                    let mut dd = digit;
                    for slot in c.iter_mut() {
                        *slot = dd % field.p();
                        dd /= field.p();
                    }
                    coeffs.push(FqElt { c });
                }
                coeffs.push(field.one());
                let cand = FqPoly::new(field, coeffs);
                let (_, r) = f.divrem(&cand, field)?;
                if r.is_zero(field) && cand.is_irreducible(field)? {
                    return Ok(cand);
                }
                idx += 1;
            }
        }
        // f itself is irreducible
        Ok(f.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f4_arithmetic() {
        let f4 = FqField::new(2, 2);
        let g = f4.gen();
        // modulus is y^2 + y + 1 (smallest irreducible over F_2)
        assert_eq!(f4.modulus(), &[1, 1, 1]);
        let g2 = f4.mul(&g, &g);
        // g^2 = g + 1
        assert_eq!(g2, f4.add(&g, &f4.one()));
        let g3 = f4.mul(&g2, &g);
        assert_eq!(g3, f4.one());
        let inv = f4.inv(&g).unwrap();
        assert_eq!(f4.mul(&inv, &g), f4.one());
    }

    #[test]
    fn poly_factor_over_f3() {
        let f3 = FqField::new(3, 1);
        // x^2 + 1 irreducible over F_3
        let f = FqPoly::new(&f3, vec![f3.one(), f3.zero(), f3.one()]);
        assert!(f.is_irreducible(&f3).unwrap());
        // x^2 - 1 = (x-1)(x+1)
        let g = FqPoly::new(&f3, vec![f3.from_u64(2), f3.zero(), f3.one()]);
        let factors = g.factor(&f3).unwrap();
        assert_eq!(factors.len(), 2);
        assert!(factors.iter().all(|(_, m)| *m == 1));
    }

    #[test]
    fn embedding_f2_to_f4() {
        let f2 = FqField::new(2, 1);
        let f4 = FqField::new(2, 2);
        let one = f2.one();
        assert_eq!(f2.embed(&one, &f4).unwrap(), f4.one());
    }

    #[test]
    fn equal_degree_trial_division() {
        let f2 = FqField::new(2, 1);
        // (x^2+x+1)^2 * (x+1)
        let irr = FqPoly::new(&f2, vec![f2.one(), f2.one(), f2.one()]);
        let lin = FqPoly::new(&f2, vec![f2.one(), f2.one()]);
        let f = irr.mul(&irr, &f2).mul(&lin, &f2);
        let factors = f.factor(&f2).unwrap();
        assert_eq!(factors.len(), 2);
        let total: usize = factors
            .iter()
            .map(|(g, m)| g.degree(&f2).unwrap() * m)
            .sum();
        assert_eq!(total, 5);
    }
}
