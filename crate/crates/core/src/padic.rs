//! Exact arithmetic in Z_p, its unramified extensions W(F_{p^m}) and totally
//! ramified Eisenstein extensions, with explicit absolute-precision tracking.
//!
//! An element is stored as ϖ^shift · u where u is an integral grid of
//! coefficients: u = Σ_{i<e} c_i x^i with c_i ∈ W(F_{p^m}) represented as a
//! y-polynomial with coefficients mod p^k, and x the Eisenstein uniformizer
//! (x = p when e = 1). The element is known modulo ϖ^abs_prec. Comparisons
//! and inversions that would have to look past abs_prec are precision errors,
//! never guesses.

use crate::error::{Error, Result};
use crate::fq::{canonical_modulus, FqElt, FqField};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt;
use std::sync::Arc;

/// A ϖ-adic valuation which may be indeterminate at working precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valuation {
    Exact(i64),
    /// Indistinguishable from zero: all digits below this bound vanish.
    AtLeast(i64),
}

impl Valuation {
    pub fn exact(self) -> Option<i64> {
        match self {
            Valuation::Exact(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }
    /// Lower bound valid in either case.
    pub fn lower_bound(self) -> i64 {
        match self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => v,
        }
    }
    pub fn expect_exact(self, what: &str) -> Result<i64> {
        match self {
            Valuation::Exact(v) => Ok(v),
            Valuation::AtLeast(b) => Err(Error::Precision { needed: b + 8, have: b }),
        }
        .map_err(|e| match e {
            Error::Precision { needed, have } => Error::Precision { needed, have },
            other => other,
        })
        .map_err(|e| {
            let _ = what;
            e
        })
    }
}

#[derive(Debug)]
struct Eisenstein {
    /// a_0 .. a_{e-1} of E(x) = x^e + a_{e-1} x^{e-1} + ... + a_0, each a
    /// y-polynomial (length <= m) with exact p-integral rational coefficients.
    /// Eisenstein criterion: val_p(a_i) >= 1 for all i, val_p(a_0) == 1.
    coeffs: Vec<Vec<BigRational>>,
}

#[derive(Debug)]
struct FieldInner {
    p: u64,
    unram_deg: usize,
    /// Monic integer lift (coefficients in [0,p)) of the canonical defining
    /// polynomial of F_{p^m}; length m+1.
    residue_modulus: Vec<u64>,
    eisenstein: Option<Eisenstein>,
    residue_field: FqField,
}

/// A local field in the supported tower shape: an unramified extension
/// W(F_{p^m})[1/p], optionally topped by a totally ramified Eisenstein
/// extension of degree e. `val(ϖ) = 1`, `val(p) = e`.
#[derive(Clone, Debug)]
pub struct LocalField(Arc<FieldInner>);

impl PartialEq for LocalField {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        self.0.p == other.0.p
            && self.0.unram_deg == other.0.unram_deg
            && match (&self.0.eisenstein, &other.0.eisenstein) {
                (None, None) => true,
                (Some(a), Some(b)) => a.coeffs == b.coeffs,
                _ => false,
            }
    }
}
impl Eq for LocalField {}

fn rat_p_val(p: u64, r: &BigRational) -> Option<i64> {
    if r.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v = 0i64;
    let mut num = r.numer().clone();
    while (&num % &p).is_zero() {
        num /= &p;
        v += 1;
    }
    let mut den = r.denom().clone();
    while (&den % &p).is_zero() {
        den /= &p;
        v -= 1;
    }
    Some(v)
}

fn poly_min_p_val(p: u64, poly: &[BigRational]) -> Option<i64> {
    poly.iter().filter_map(|c| rat_p_val(p, c)).min()
}

impl LocalField {
    /// The base field Q_p.
    pub fn qp(p: u64) -> Self {
        Self::unramified(p, 1)
    }

    /// The unramified extension of Q_p of degree m, i.e. W(F_{p^m})[1/p].
    pub fn unramified(p: u64, m: usize) -> Self {
        assert!(m >= 1 && p >= 2);
        let residue_modulus = canonical_modulus(p, m);
        LocalField(Arc::new(FieldInner {
            p,
            unram_deg: m,
            residue_modulus,
            eisenstein: None,
            residue_field: FqField::new(p, m),
        }))
    }

    /// Totally ramified Eisenstein extension of the unramified field W(F_{p^m})[1/p].
    /// `coeffs[i]` is the y-polynomial a_i of E(x) = x^e + Σ a_i x^i, i < e.
    pub fn eisenstein(p: u64, m: usize, coeffs: Vec<Vec<BigRational>>) -> Result<Self> {
        let e = coeffs.len();
        if e < 2 {
            return Err(Error::domain("Eisenstein part must have degree at least 2"));
        }
        for (i, a) in coeffs.iter().enumerate() {
            if a.len() > m {
                return Err(Error::domain("Eisenstein coefficient degree exceeds unramified degree"));
            }
            let v = poly_min_p_val(p, a);
            match (i, v) {
                (0, Some(1)) => {}
                (0, _) => {
                    return Err(Error::domain(
                        "Eisenstein criterion: constant term must have valuation exactly 1",
                    ))
                }
                (_, None) => {}
                (_, Some(v)) if v >= 1 => {}
                _ => {
                    return Err(Error::domain(
                        "Eisenstein criterion: lower coefficients must have valuation at least 1",
                    ))
                }
            }
        }
        let residue_modulus = canonical_modulus(p, m);
        Ok(LocalField(Arc::new(FieldInner {
            p,
            unram_deg: m,
            residue_modulus,
            eisenstein: Some(Eisenstein { coeffs }),
            residue_field: FqField::new(p, m),
        })))
    }

    /// Parse an Eisenstein defining polynomial literal with rational constant
    /// coefficients, e.g. `x^2 - 3` or `x^3 + 2*x + 6`.
    pub fn eisenstein_from_text(p: u64, m: usize, text: &str) -> Result<Self> {
        let normalized = text.replace('-', "+-").replace("^+-", "^-");
        let mut coeffs: Vec<BigRational> = Vec::new();
        let mut degree = 0usize;
        let mut terms: Vec<(usize, BigRational)> = Vec::new();
        for raw in normalized.split('+') {
            let t = raw.trim();
            if t.is_empty() {
                continue;
            }
            let (c_str, d) = if let Some(ix) = t.find('x') {
                let mut c = t[..ix].trim().trim_end_matches('*').trim().to_string();
                if c.is_empty() {
                    c = "1".into();
                } else if c == "-" {
                    c = "-1".into();
                }
                let rest = t[ix + 1..].trim();
                let d: usize = if rest.is_empty() {
                    1
                } else {
                    rest.strip_prefix('^')
                        .ok_or_else(|| Error::parse("expected ^ in Eisenstein literal"))?
                        .trim()
                        .parse()
                        .map_err(|_| Error::parse("bad exponent in Eisenstein literal"))?
                };
                (c, d)
            } else {
                (t.to_string(), 0)
            };
            let c: BigRational = if let Some(slash) = c_str.find('/') {
                let num: BigInt = c_str[..slash]
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse("bad Eisenstein coefficient"))?;
                let den: BigInt = c_str[slash + 1..]
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse("bad Eisenstein coefficient"))?;
                BigRational::new(num, den)
            } else {
                BigRational::from(
                    c_str
                        .parse::<BigInt>()
                        .map_err(|_| Error::parse("bad Eisenstein coefficient"))?,
                )
            };
            degree = degree.max(d);
            terms.push((d, c));
        }
        coeffs.resize(degree, BigRational::from(BigInt::from(0)));
        let mut lead = BigRational::from(BigInt::from(0));
        for (d, c) in terms {
            if d == degree {
                lead += c;
            } else {
                coeffs[d] += c;
            }
        }
        if !lead.is_one() {
            return Err(Error::parse("Eisenstein polynomial must be monic"));
        }
        Self::eisenstein(p, m, coeffs.into_iter().map(|c| vec![c]).collect())
    }

    /// Convenience: Eisenstein extension with constant integer coefficients.
    pub fn eisenstein_from_ints(p: u64, m: usize, consts: &[i64]) -> Result<Self> {
        let coeffs = consts
            .iter()
            .map(|&c| vec![BigRational::from(BigInt::from(c))])
            .collect();
        Self::eisenstein(p, m, coeffs)
    }

    /// Same Eisenstein part over a larger unramified layer. The Eisenstein
    /// coefficients must not involve the unramified generator.
    pub fn with_unram_deg(&self, m_new: usize) -> Result<Self> {
        if m_new % self.0.unram_deg != 0 {
            return Err(Error::TowerMismatch(
                "new unramified degree must be a multiple of the old".into(),
            ));
        }
        match &self.0.eisenstein {
            None => Ok(Self::unramified(self.0.p, m_new)),
            Some(eis) => {
                if self.0.unram_deg > 1 && eis.coeffs.iter().any(|a| a.len() > 1) {
                    return Err(Error::unsupported(
                        "unramified base change with generator-dependent Eisenstein coefficients",
                    ));
                }
                Self::eisenstein(self.0.p, m_new, eis.coeffs.clone())
            }
        }
    }

    /// The unramified subfield (the field itself when e = 1).
    pub fn unramified_subfield(&self) -> Self {
        if self.0.eisenstein.is_none() {
            self.clone()
        } else {
            Self::unramified(self.0.p, self.0.unram_deg)
        }
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }
    pub fn unram_deg(&self) -> usize {
        self.0.unram_deg
    }
    /// Ramification index e (1 if no Eisenstein part).
    pub fn e(&self) -> usize {
        self.0.eisenstein.as_ref().map(|x| x.coeffs.len()).unwrap_or(1)
    }
    /// Residue cardinality q = p^m.
    pub fn q(&self) -> u64 {
        self.0.p.pow(self.0.unram_deg as u32)
    }
    pub fn residue_field(&self) -> &FqField {
        &self.0.residue_field
    }
    pub fn is_ramified(&self) -> bool {
        self.e() > 1
    }

    fn p_big(&self) -> BigUint {
        BigUint::from(self.0.p)
    }
    fn p_pow(&self, k: u32) -> BigUint {
        self.p_big().pow(k)
    }

    // ---- unramified coefficient arithmetic: y-polys of length m, mod p^k ----

    fn ured(&self, v: &mut [BigUint], k: u32) {
        let pk = self.p_pow(k);
        for c in v.iter_mut() {
            *c %= &pk;
        }
    }

    fn uadd(&self, a: &[BigUint], b: &[BigUint], k: u32) -> Vec<BigUint> {
        let pk = self.p_pow(k);
        a.iter().zip(b).map(|(x, y)| (x + y) % &pk).collect()
    }

    fn usub(&self, a: &[BigUint], b: &[BigUint], k: u32) -> Vec<BigUint> {
        let pk = self.p_pow(k);
        a.iter().zip(b).map(|(x, y)| ((x + &pk) - (y % &pk)) % &pk).collect()
    }

    fn uneg(&self, a: &[BigUint], k: u32) -> Vec<BigUint> {
        let pk = self.p_pow(k);
        a.iter().map(|x| (&pk - (x % &pk)) % &pk).collect()
    }

    fn umul(&self, a: &[BigUint], b: &[BigUint], k: u32) -> Vec<BigUint> {
        let m = self.0.unram_deg;
        let pk = self.p_pow(k);
        let mut prod = vec![BigUint::zero(); 2 * m - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                prod[i + j] = (&prod[i + j] + x * y) % &pk;
            }
        }
        // reduce y^t for t >= m: y^m = -(g_0 + ... + g_{m-1} y^{m-1})
        for t in (m..prod.len()).rev() {
            let lead = std::mem::replace(&mut prod[t], BigUint::zero());
            if lead.is_zero() {
                continue;
            }
            for j in 0..m {
                let gj = BigUint::from(self.0.residue_modulus[j]);
                let sub = (&lead * gj) % &pk;
                prod[t - m + j] = ((&prod[t - m + j] + &pk) - sub) % &pk;
            }
        }
        prod.truncate(m);
        prod
    }

    fn u_is_zero(&self, a: &[BigUint]) -> bool {
        a.iter().all(|x| x.is_zero())
    }

    fn u_p_val(&self, a: &[BigUint], k: u32) -> Option<u32> {
        if self.u_is_zero(a) {
            return None;
        }
        let p = self.p_big();
        let mut best = k;
        for c in a {
            if c.is_zero() {
                continue;
            }
            let mut v = 0u32;
            let mut t = c.clone();
            while v < best && (&t % &p).is_zero() {
                t /= &p;
                v += 1;
            }
            best = best.min(v);
            if best == 0 {
                return Some(0);
            }
        }
        if best >= k {
            None
        } else {
            Some(best)
        }
    }

    fn u_div_p(&self, a: &[BigUint]) -> Vec<BigUint> {
        let p = self.p_big();
        a.iter()
            .map(|c| {
                debug_assert!((c % &p).is_zero());
                c / &p
            })
            .collect()
    }

    /// Inverse of a unit coefficient vector mod p^k, by Newton lifting from
    /// the residue field inverse.
    fn uinv(&self, a: &[BigUint], k: u32) -> Result<Vec<BigUint>> {
        let res = self.u_residue(a);
        let fq = &self.0.residue_field;
        let rinv = fq.inv(&res)?;
        let mut z = self.u_from_fq(&rinv);
        let mut prec = 1u32;
        let m = self.0.unram_deg;
        let two = {
            let mut t = vec![BigUint::zero(); m];
            t[0] = BigUint::from(2u32);
            t
        };
        while prec < k {
            prec = (2 * prec).min(k);
            let az = self.umul(a, &z, prec);
            let corr = self.usub(&two, &az, prec);
            z = self.umul(&z, &corr, prec);
        }
        self.ured(&mut z, k);
        Ok(z)
    }

    fn u_residue(&self, a: &[BigUint]) -> FqElt {
        let p = self.0.p;
        let c: Vec<u64> = a
            .iter()
            .map(|x| (x % self.p_big()).to_u64().unwrap_or(0) % p)
            .collect();
        self.0.residue_field.from_coeffs(&c)
    }

    fn u_from_fq(&self, a: &FqElt) -> Vec<BigUint> {
        a.c.iter().map(|&x| BigUint::from(x)).collect()
    }

    /// Materialize a rational y-polynomial in W(F_{p^m})/p^k. The rational
    /// coefficients must be p-integral.
    fn u_from_rat_poly(&self, poly: &[BigRational], k: u32) -> Vec<BigUint> {
        let m = self.0.unram_deg;
        let pk_int = BigInt::from_biguint(num_bigint::Sign::Plus, self.p_pow(k));
        let mut out = vec![BigUint::zero(); m];
        for (j, c) in poly.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let num = c.numer();
            let den = c.denom();
            let den_mod = ((den % &pk_int) + &pk_int) % &pk_int;
            let den_inv = modinv_big(&den_mod.to_biguint().unwrap(), &self.p_pow(k))
                .expect("denominator must be a p-unit");
            let num_mod = ((num % &pk_int) + &pk_int) % &pk_int;
            let val = (num_mod.to_biguint().unwrap() * den_inv) % self.p_pow(k);
            out[j] = val;
        }
        out
    }

    /// The Eisenstein coefficient grids a_0..a_{e-1} at coefficient precision k.
    fn eis_grids(&self, k: u32) -> Vec<Vec<BigUint>> {
        let eis = self.0.eisenstein.as_ref().expect("ramified field expected");
        eis.coeffs.iter().map(|a| self.u_from_rat_poly(a, k)).collect()
    }

    /// p/ϖ as an integral grid at coefficient precision k (only for e > 1):
    /// from E(x) = 0, p = -w^{-1} x (x^{e-1} + a_{e-1} x^{e-2} + ... + a_1)
    /// where w = a_0 / p, so p/x = -w^{-1}(x^{e-1} + ... + a_1).
    fn p_over_pi(&self, k: u32) -> Result<Vec<Vec<BigUint>>> {
        let e = self.e();
        debug_assert!(e > 1);
        let eis = self.0.eisenstein.as_ref().unwrap();
        let w_poly: Vec<BigRational> = eis.coeffs[0]
            .iter()
            .map(|c| c / BigRational::from(BigInt::from(self.0.p)))
            .collect();
        let w = self.u_from_rat_poly(&w_poly, k);
        let w_inv = self.uinv(&w, k)?;
        let grids = self.eis_grids(k);
        let m = self.0.unram_deg;
        let mut out = vec![vec![BigUint::zero(); m]; e];
        // coefficient of x^{i-1} is a_i for i = 1..e-1, and x^{e-1} gets 1
        for i in 1..e {
            out[i - 1] = grids[i].clone();
        }
        out[e - 1][0] = BigUint::one();
        for comp in out.iter_mut() {
            let t = self.umul(comp, &w_inv, k);
            *comp = self.uneg(&t, k);
        }
        Ok(out)
    }

    // ---- element constructors ----

    pub fn zero(&self, abs_prec: i64) -> PadicElt {
        PadicElt {
            field: self.clone(),
            shift: abs_prec,
            comps: self.zero_grid(),
            abs_prec,
        }
    }

    pub fn one(&self, abs_prec: i64) -> PadicElt {
        self.from_i64(1, abs_prec)
    }

    fn zero_grid(&self) -> Vec<Vec<BigUint>> {
        vec![vec![BigUint::zero(); self.0.unram_deg]; self.e()]
    }

    pub fn from_i64(&self, v: i64, abs_prec: i64) -> PadicElt {
        self.from_bigint(&BigInt::from(v), abs_prec)
    }

    pub fn from_bigint(&self, v: &BigInt, abs_prec: i64) -> PadicElt {
        self.from_rational(&BigRational::from(v.clone()), abs_prec)
    }

    /// Exact rational (denominator may have p-valuation; result's shift adjusts).
    pub fn from_rational(&self, r: &BigRational, abs_prec: i64) -> PadicElt {
        if r.is_zero() {
            return self.zero(abs_prec);
        }
        let e = self.e() as i64;
        let v = rat_p_val(self.0.p, r).unwrap();
        let shift = v * e;
        let p_pow_v = BigRational::from(BigInt::from(self.0.p)).pow(v as i32);
        let unit = r / p_pow_v;
        let rel = (abs_prec - shift).max(0);
        let k = Self::k_for_rel(rel, self.e());
        let c0 = self.u_from_rat_poly(&[unit], k);
        let mut comps = self.zero_grid();
        comps[0] = c0;
        let mut elt = PadicElt { field: self.clone(), shift, comps, abs_prec };
        elt.canonicalize();
        elt.normalize();
        elt
    }

    /// Integer lift of a residue-field element (y-polynomial with digit
    /// coefficients), at the given precision.
    pub fn lift_residue(&self, r: &FqElt, abs_prec: i64) -> PadicElt {
        let mut comps = self.zero_grid();
        comps[0] = self.u_from_fq(r);
        let mut elt = PadicElt { field: self.clone(), shift: 0, comps, abs_prec };
        elt.canonicalize();
        elt.normalize();
        elt
    }

    /// ϖ at the given precision.
    pub fn uniformizer(&self, abs_prec: i64) -> PadicElt {
        if self.e() == 1 {
            self.from_i64(self.0.p as i64, abs_prec)
        } else {
            let mut comps = self.zero_grid();
            comps[1][0] = BigUint::one();
            let mut elt = PadicElt { field: self.clone(), shift: 0, comps, abs_prec };
            elt.canonicalize();
            elt.normalize();
            elt
        }
    }

    /// The unramified generator y (Teichmüller-independent integer lift of the
    /// residue field generator).
    pub fn unram_gen(&self, abs_prec: i64) -> PadicElt {
        self.lift_residue(&self.0.residue_field.gen(), abs_prec)
    }

    /// Teichmüller lift: the unique t with t ≡ r (mod ϖ) and t^q = t.
    pub fn teichmuller(&self, r: &FqElt, abs_prec: i64) -> Result<PadicElt> {
        if self.0.residue_field.is_zero(r) {
            return Err(Error::domain("Teichmüller lift of zero"));
        }
        let q = self.q();
        let mut z = self.lift_residue(r, abs_prec);
        // each q-power step deepens the fixed-point congruence by at least one
        // p-digit; bound the loop generously
        let bound = (abs_prec / self.e() as i64 + 4).max(4);
        for _ in 0..bound {
            let next = z.pow_u64(q);
            if next == z {
                return Ok(next);
            }
            z = next;
        }
        Err(Error::Precision { needed: abs_prec + 8, have: abs_prec })
    }

    fn k_for_rel(rel: i64, e: usize) -> u32 {
        if rel <= 0 {
            0
        } else {
            ((rel as u32) + (e as u32) - 1) / (e as u32)
        }
    }

    /// Canonical embedding into a refining tower (same p, same Eisenstein part,
    /// unramified degree a multiple of ours). Preserves valuation and precision.
    pub fn extend(&self, x: &PadicElt, target: &LocalField) -> Result<PadicElt> {
        assert_eq!(&x.field, self, "element does not belong to this field");
        if self == target {
            return Ok(x.clone());
        }
        if target.0.p != self.0.p {
            return Err(Error::TowerMismatch("different residue characteristics".into()));
        }
        if target.0.unram_deg % self.0.unram_deg != 0 {
            return Err(Error::TowerMismatch(
                "unramified degree of the target must be a multiple".into(),
            ));
        }
        match (&self.0.eisenstein, &target.0.eisenstein) {
            (None, None) => {}
            (Some(a), Some(b)) if a.coeffs == b.coeffs => {
                if self.0.unram_deg > 1 && a.coeffs.iter().any(|c| c.len() > 1) {
                    return Err(Error::unsupported(
                        "extension with generator-dependent Eisenstein coefficients",
                    ));
                }
            }
            (None, Some(_)) => {
                // inject the unramified field into a ramified tower on top of
                // it: widen the unramified layer first, then rescale the
                // valuation by e and place digits in the t^0 component
                let mid = Self::unramified(target.0.p, target.0.unram_deg);
                let widened = self.extend(x, &mid)?;
                let e = target.e() as i64;
                let rel = widened.rel_prec();
                let mut comps = target.zero_grid();
                comps[0] = widened.comps[0].clone();
                let mut elt = PadicElt {
                    field: target.clone(),
                    shift: widened.shift * e,
                    comps,
                    abs_prec: widened.shift * e + rel * e,
                };
                elt.canonicalize();
                elt.normalize();
                return Ok(elt);
            }
            _ => return Err(Error::TowerMismatch("Eisenstein parts differ".into())),
        }
        let rel = x.rel_prec();
        let k = Self::k_for_rel(rel, self.e());
        // image of our unramified generator in the target, lifted by Newton
        let root = self.embedding_root_grid(target, k + 1)?;
        let mut comps = Vec::with_capacity(self.e());
        for c in &x.comps {
            comps.push(self.eval_poly_grid(target, c, &root, k + 1));
        }
        // target grid has e components as well (same Eisenstein part)
        let mut elt = PadicElt {
            field: target.clone(),
            shift: x.shift,
            comps,
            abs_prec: x.abs_prec,
        };
        elt.canonicalize();
        elt.normalize();
        Ok(elt)
    }

    fn embedding_root_grid(&self, target: &LocalField, k: u32) -> Result<Vec<BigUint>> {
        if self.0.unram_deg == 1 {
            // prime field: generator is y = root of y (i.e. 0); components are
            // constants and evaluation is trivial
            return Ok(vec![BigUint::zero(); target.0.unram_deg]);
        }
        let src_fq = &self.0.residue_field;
        let tgt_fq = &target.0.residue_field;
        let r0 = src_fq.embedding_root(tgt_fq)?;
        let mut root = target.u_from_fq(&r0);
        // Newton-lift root of the integer lift g of our residue modulus
        let g: Vec<BigUint> = self.0.residue_modulus.iter().map(|&c| BigUint::from(c)).collect();
        let dg: Vec<BigUint> = {
            let mut d = Vec::new();
            for (i, c) in g.iter().enumerate().skip(1) {
                d.push(c * BigUint::from(i as u64));
            }
            d
        };
        let mut prec = 1u32;
        while prec < k {
            prec = (2 * prec).min(k);
            let f_val = target.eval_int_poly(&g, &root, prec);
            let df_val = target.eval_int_poly(&dg, &root, prec);
            let df_inv = target.uinv(&df_val, prec)?;
            let corr = target.umul(&f_val, &df_inv, prec);
            root = target.usub(&root, &corr, prec);
        }
        Ok(root)
    }

    fn eval_int_poly(&self, poly: &[BigUint], at: &[BigUint], k: u32) -> Vec<BigUint> {
        let m = self.0.unram_deg;
        let mut acc = vec![BigUint::zero(); m];
        for c in poly.iter().rev() {
            acc = self.umul(&acc, at, k);
            acc[0] = (&acc[0] + c) % self.p_pow(k);
        }
        acc
    }

    fn eval_poly_grid(
        &self,
        target: &LocalField,
        poly: &[BigUint],
        root: &[BigUint],
        k: u32,
    ) -> Vec<BigUint> {
        let m = target.0.unram_deg;
        let mut acc = vec![BigUint::zero(); m];
        for c in poly.iter().rev() {
            acc = target.umul(&acc, root, k);
            acc[0] = (&acc[0] + c) % target.p_pow(k);
        }
        acc
    }
}

fn modinv_big(a: &BigUint, modulus: &BigUint) -> Option<BigUint> {
    let a = BigInt::from_biguint(num_bigint::Sign::Plus, a.clone());
    let m = BigInt::from_biguint(num_bigint::Sign::Plus, modulus.clone());
    let ext = a.extended_gcd(&m);
    if !ext.gcd.is_one() {
        return None;
    }
    let inv = ((ext.x % &m) + &m) % &m;
    inv.to_biguint()
}

/// Truncated element of a local field: known modulo ϖ^abs_prec.
#[derive(Clone)]
pub struct PadicElt {
    field: LocalField,
    /// Power of ϖ factored out; the stored grid is a unit (or zero).
    shift: i64,
    /// comps[i][j]: coefficient of x^i y^j of the unit part, canonical modulo
    /// p^{ceil((rel_prec - i)/e)}.
    comps: Vec<Vec<BigUint>>,
    abs_prec: i64,
}

impl PartialEq for PadicElt {
    /// Structural equality of the canonical representation (same precision,
    /// same digits). Use [`PadicElt::congruent`] for equality at shared precision.
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && self.shift == other.shift
            && self.abs_prec == other.abs_prec
            && self.comps == other.comps
    }
}
impl Eq for PadicElt {}

impl PadicElt {
    pub fn field(&self) -> &LocalField {
        &self.field
    }
    pub fn abs_prec(&self) -> i64 {
        self.abs_prec
    }
    fn rel_prec(&self) -> i64 {
        self.abs_prec - self.shift
    }

    /// ϖ-adic valuation: exact if a nonzero digit is visible, otherwise
    /// "at least abs_prec".
    pub fn val(&self) -> Valuation {
        if self.is_zero_at_prec() {
            Valuation::AtLeast(self.abs_prec)
        } else {
            Valuation::Exact(self.shift)
        }
    }

    /// True when the element is indistinguishable from zero at its precision.
    pub fn is_zero_at_prec(&self) -> bool {
        self.comps.iter().all(|c| self.field.u_is_zero(c))
    }

    /// True when this is a visible unit (valuation exactly 0).
    pub fn is_unit(&self) -> bool {
        self.val() == Valuation::Exact(0)
    }

    fn canonicalize(&mut self) {
        let e = self.field.e();
        let rel = self.rel_prec();
        for (i, c) in self.comps.iter_mut().enumerate() {
            let mi = if rel <= i as i64 {
                0
            } else {
                LocalField::k_for_rel(rel - i as i64, e)
            };
            self.field.ured(c, mi);
        }
    }

    fn normalize(&mut self) {
        // factor out the grid valuation so the stored grid is a unit or zero
        loop {
            if self.rel_prec() <= 0 || self.is_zero_at_prec() {
                self.shift = self.abs_prec;
                self.comps = self.field.zero_grid();
                return;
            }
            let v = self.grid_val();
            if v == 0 {
                return;
            }
            self.divide_grid_by_pi();
            self.shift += 1;
            self.canonicalize();
        }
    }

    /// Valuation of the integral grid (assumes nonzero at rel precision).
    fn grid_val(&self) -> i64 {
        let e = self.field.e() as i64;
        let rel = self.rel_prec();
        let mut best = rel;
        for (i, c) in self.comps.iter().enumerate() {
            let mi = LocalField::k_for_rel((rel - i as i64).max(0), self.field.e());
            if let Some(v) = self.field.u_p_val(c, mi) {
                best = best.min(e * v as i64 + i as i64);
            }
        }
        best
    }

    /// Divide the integral grid by ϖ exactly (grid valuation must be >= 1).
    fn divide_grid_by_pi(&mut self) {
        let e = self.field.e();
        if e == 1 {
            self.comps[0] = self.field.u_div_p(&self.comps[0]);
            return;
        }
        let rel = self.rel_prec();
        let k = LocalField::k_for_rel(rel, e) + 1;
        let c0 = std::mem::replace(&mut self.comps[0], vec![BigUint::zero(); self.field.unram_deg()]);
        let c0p = self.field.u_div_p(&c0);
        let pi_quot = self.field.p_over_pi(k).expect("uniformizer data");
        // z/x = (c_0/p)·(p/x) + Σ_{i>=1} c_i x^{i-1}
        let mut out = vec![vec![BigUint::zero(); self.field.unram_deg()]; e];
        for (i, g) in pi_quot.iter().enumerate() {
            out[i] = self.field.umul(&c0p, g, k);
        }
        for i in 1..e {
            let t = std::mem::take(&mut self.comps[i]);
            out[i - 1] = self.field.uadd(&out[i - 1], &t, k);
        }
        self.comps = out;
    }

    /// Multiply the integral grid by ϖ, keeping k p-adic digits of every
    /// coefficient (k must cover the final relative precision of the caller).
    fn mul_grid_by_pi_at(&mut self, k: u32) {
        let e = self.field.e();
        if e == 1 {
            let p = self.field.p_big();
            for c in self.comps[0].iter_mut() {
                *c *= &p;
            }
            return;
        }
        let top = self.comps.pop().unwrap();
        self.comps.insert(0, vec![BigUint::zero(); self.field.unram_deg()]);
        if !self.field.u_is_zero(&top) {
            // x^e = -(a_0 + a_1 x + ... + a_{e-1} x^{e-1})
            let grids = self.field.eis_grids(k);
            for (i, g) in grids.iter().enumerate() {
                let t = self.field.umul(&top, g, k);
                let neg = self.field.uneg(&t, k);
                self.comps[i] = self.field.uadd(&self.comps[i], &neg, k);
            }
        }
    }

    fn denormalize_to_shift(&self, new_shift: i64) -> PadicElt {
        debug_assert!(new_shift <= self.shift);
        let e = self.field.e();
        // precision that the grid must carry once it sits at the new shift
        let k = LocalField::k_for_rel((self.abs_prec - new_shift).max(0) + e as i64, e) + 1;
        let mut out = self.clone();
        for _ in 0..(self.shift - new_shift) {
            out.mul_grid_by_pi_at(k);
        }
        out.shift = new_shift;
        out.canonicalize();
        out
    }

    pub fn add(&self, other: &PadicElt) -> PadicElt {
        assert_eq!(self.field, other.field, "field mismatch in add");
        let abs = self.abs_prec.min(other.abs_prec);
        let s = self.shift.min(other.shift).min(abs);
        let a = self.denormalize_to_shift(s);
        let b = other.denormalize_to_shift(s);
        let rel = abs - s;
        let k = LocalField::k_for_rel(rel, self.field.e()) + 1;
        let comps = a
            .comps
            .iter()
            .zip(&b.comps)
            .map(|(x, y)| self.field.uadd(x, y, k))
            .collect();
        let mut out = PadicElt { field: self.field.clone(), shift: s, comps, abs_prec: abs };
        out.canonicalize();
        out.normalize();
        out
    }

    pub fn sub(&self, other: &PadicElt) -> PadicElt {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> PadicElt {
        let rel = self.rel_prec();
        let k = LocalField::k_for_rel(rel, self.field.e()) + 1;
        let comps = self.comps.iter().map(|c| self.field.uneg(c, k)).collect();
        let mut out = PadicElt {
            field: self.field.clone(),
            shift: self.shift,
            comps,
            abs_prec: self.abs_prec,
        };
        out.canonicalize();
        out.normalize();
        out
    }

    pub fn mul(&self, other: &PadicElt) -> PadicElt {
        assert_eq!(self.field, other.field, "field mismatch in mul");
        let e = self.field.e();
        let shift = self.shift + other.shift;
        let rel = self.rel_prec().min(other.rel_prec());
        let abs = shift + rel;
        if rel <= 0 || self.is_zero_at_prec() || other.is_zero_at_prec() {
            return self.field.zero(abs);
        }
        let k = LocalField::k_for_rel(rel + e as i64, e) + 1;
        // x-convolution
        let m = self.field.unram_deg();
        let mut prod = vec![vec![BigUint::zero(); m]; 2 * e - 1];
        for (i, a) in self.comps.iter().enumerate() {
            if self.field.u_is_zero(a) {
                continue;
            }
            for (j, b) in other.comps.iter().enumerate() {
                if self.field.u_is_zero(b) {
                    continue;
                }
                let t = self.field.umul(a, b, k);
                prod[i + j] = self.field.uadd(&prod[i + j], &t, k);
            }
        }
        if e > 1 {
            let grids = self.field.eis_grids(k);
            for t in (e..prod.len()).rev() {
                let lead = std::mem::replace(&mut prod[t], vec![BigUint::zero(); m]);
                if self.field.u_is_zero(&lead) {
                    continue;
                }
                for (i, g) in grids.iter().enumerate() {
                    let s = self.field.umul(&lead, g, k);
                    let neg = self.field.uneg(&s, k);
                    prod[t - e + i] = self.field.uadd(&prod[t - e + i], &neg, k);
                }
            }
        }
        prod.truncate(e);
        let mut out = PadicElt { field: self.field.clone(), shift, comps: prod, abs_prec: abs };
        out.canonicalize();
        out.normalize();
        out
    }

    /// Multiplicative inverse. The valuation must be definite; the result has
    /// absolute precision `abs_prec - 2 val`.
    pub fn inv(&self) -> Result<PadicElt> {
        let v = match self.val() {
            Valuation::Exact(v) => v,
            Valuation::AtLeast(b) => {
                return Err(Error::Precision { needed: b + 8, have: b });
            }
        };
        let rel = self.rel_prec();
        let e = self.field.e();
        let k = LocalField::k_for_rel(rel, e) + 1;
        // invert the unit grid by Newton iteration in O/(p^k, E, g)
        let one = {
            let mut g = self.field.zero_grid();
            g[0][0] = BigUint::one();
            PadicElt { field: self.field.clone(), shift: 0, comps: g, abs_prec: rel }
        };
        let unit = PadicElt {
            field: self.field.clone(),
            shift: 0,
            comps: self.comps.clone(),
            abs_prec: rel,
        };
        let res = unit.residue()?;
        let fq = self.field.residue_field().clone();
        let rinv = fq.inv(&res)?;
        let mut z = self.field.lift_residue(&rinv, rel);
        let _ = k;
        let two = one.add(&one);
        // Newton: z <- z(2 - u z); precision doubles each step
        let steps = (64 - (rel.max(1) as u64).leading_zeros()) + 2;
        for _ in 0..steps {
            let uz = unit.mul(&z);
            let corr = two.sub(&uz);
            z = z.mul(&corr);
            // keep full working precision: the precision calculus would
            // otherwise shrink it spuriously through the subtraction
            z = z.with_abs_prec(rel);
        }
        debug_assert!(unit.mul(&z).sub(&one).is_zero_at_prec());
        let mut out = z;
        out.shift -= v;
        out.abs_prec = self.abs_prec - 2 * v;
        let final_rel = out.rel_prec();
        if final_rel < 0 {
            return Err(Error::Precision { needed: self.abs_prec + 2 * v.abs() + 2, have: self.abs_prec });
        }
        out.canonicalize();
        out.normalize();
        Ok(out)
    }

    pub fn div(&self, other: &PadicElt) -> Result<PadicElt> {
        Ok(self.mul(&other.inv()?))
    }

    /// Force the stated absolute precision (truncating or optimistically
    /// extending with zero digits; used internally by Newton loops where the
    /// iteration guarantees the digits).
    pub fn with_abs_prec(&self, abs: i64) -> PadicElt {
        let mut out = self.clone();
        out.abs_prec = abs;
        if out.shift > abs {
            // pure zero at this precision
            return self.field.zero(abs);
        }
        out.canonicalize();
        out.normalize();
        out
    }

    pub fn pow_u64(&self, mut e: u64) -> PadicElt {
        let mut base = self.clone();
        let mut acc = self.field.one(self.abs_prec);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Residue in F_{p^m}; requires a nonnegative valuation bound.
    pub fn residue(&self) -> Result<FqElt> {
        match self.val() {
            Valuation::Exact(v) if v < 0 => {
                Err(Error::domain("residue of an element with negative valuation"))
            }
            Valuation::Exact(0) => {
                Ok(self.field.u_residue(&self.comps[0]))
            }
            _ => Ok(self.field.residue_field().zero()),
        }
    }

    /// Equality at shared precision (difference indistinguishable from zero).
    pub fn congruent(&self, other: &PadicElt) -> bool {
        self.sub(other).is_zero_at_prec()
    }

    /// Multiply by ϖ^k (k may be negative; exact).
    pub fn mul_pi_pow(&self, k: i64) -> PadicElt {
        let mut out = self.clone();
        out.shift += k;
        out.abs_prec += k;
        out
    }

    /// Canonical digit expansion of the integral part: plain integer-lift
    /// digits d_i ∈ F_q from ϖ^shift upward. Empty when zero.
    pub fn digits(&self) -> Vec<FqElt> {
        let mut out = Vec::new();
        let mut z = PadicElt {
            field: self.field.clone(),
            shift: 0,
            comps: self.comps.clone(),
            abs_prec: self.rel_prec(),
        };
        let rel = self.rel_prec();
        for _ in 0..rel {
            if z.is_zero_at_prec() {
                out.push(self.field.residue_field().zero());
                continue;
            }
            if z.shift > 0 {
                out.push(self.field.residue_field().zero());
                z.shift -= 1;
                z.abs_prec -= 1;
                continue;
            }
            let d = self.field.u_residue(&z.comps[0]);
            let lift = self.field.lift_residue(&d, z.abs_prec);
            z = z.sub(&lift);
            debug_assert!(z.val().lower_bound() >= 1);
            z.shift -= 1;
            z.abs_prec -= 1;
            out.push(d);
        }
        out
    }
}

impl fmt::Debug for PadicElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for PadicElt {
    /// Digit-string literal: `d0,d1,...,dk (mod w^N)` for integral elements;
    /// a leading `w^s*` records a nonzero base valuation. For q > p each digit
    /// prints as `[c0+c1y+...]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero_at_prec() {
            return write!(f, "0 (mod w^{})", self.abs_prec);
        }
        let digits = self.digits();
        let fq = self.field.residue_field();
        let body: Vec<String> = digits
            .iter()
            .map(|d| {
                if fq.degree() == 1 {
                    format!("{}", d.c[0])
                } else {
                    let terms: Vec<String> = d
                        .c
                        .iter()
                        .enumerate()
                        .map(|(j, &c)| match j {
                            0 => format!("{}", c),
                            1 => format!("{}y", c),
                            _ => format!("{}y^{}", c, j),
                        })
                        .collect();
                    format!("[{}]", terms.join("+"))
                }
            })
            .collect();
        if self.shift == 0 {
            write!(f, "{} (mod w^{})", body.join(","), self.abs_prec)
        } else {
            write!(f, "w^{}*{} (mod w^{})", self.shift, body.join(","), self.abs_prec)
        }
    }
}

// ------------------------- parsing -------------------------

impl LocalField {
    /// Parse an element literal: an integer (`-12`), a rational with p-unit or
    /// p-power denominator (`3/7`), or a digit string as printed by `Display`
    /// (`d0,d1,...,dk (mod w^N)`, optionally prefixed `w^s*`).
    pub fn parse_elt(&self, input: &str, default_prec: i64) -> Result<PadicElt> {
        let s = input.trim();
        if s.is_empty() {
            return Err(Error::parse("empty element literal"));
        }
        let (body, prec) = if let Some(ix) = s.find("(mod") {
            let tail = &s[ix..];
            let inner = tail
                .trim_start_matches("(mod")
                .trim_end_matches(')')
                .trim();
            let n: i64 = inner
                .strip_prefix("w^")
                .ok_or_else(|| Error::parse("expected (mod w^N)"))?
                .parse()
                .map_err(|_| Error::parse("bad precision in (mod w^N)"))?;
            (s[..ix].trim(), n)
        } else {
            (s, default_prec)
        };
        // digit string?
        if body.contains(',') || body.contains('[') || body.contains('*') {
            return self.parse_digit_string(body, prec);
        }
        // rational or integer
        if let Some(slash) = body.find('/') {
            let num: BigInt = body[..slash]
                .trim()
                .parse()
                .map_err(|_| Error::parse("bad rational numerator"))?;
            let den: BigInt = body[slash + 1..]
                .trim()
                .parse()
                .map_err(|_| Error::parse("bad rational denominator"))?;
            if den.is_zero() {
                return Err(Error::parse("zero denominator"));
            }
            return Ok(self.from_rational(&BigRational::new(num, den), prec));
        }
        let n: BigInt = body
            .parse()
            .map_err(|_| Error::parse(format!("bad element literal: {body:?}")))?;
        Ok(self.from_bigint(&n, prec))
    }

    fn parse_digit_string(&self, body: &str, prec: i64) -> Result<PadicElt> {
        let (shift, digit_part) = if let Some(rest) = body.strip_prefix("w^") {
            let star = rest
                .find('*')
                .ok_or_else(|| Error::parse("expected * after w^s"))?;
            let s: i64 = rest[..star]
                .parse()
                .map_err(|_| Error::parse("bad shift exponent"))?;
            (s, &rest[star + 1..])
        } else {
            (0, body)
        };
        let fq = self.residue_field().clone();
        let mut digits = Vec::new();
        for tok in split_digit_tokens(digit_part)? {
            let tok = tok.trim();
            if tok.starts_with('[') {
                let inner = tok
                    .strip_prefix('[')
                    .and_then(|t| t.strip_suffix(']'))
                    .ok_or_else(|| Error::parse("unbalanced digit bracket"))?;
                digits.push(parse_fq_poly_digit(&fq, inner)?);
            } else {
                let v: u64 = tok
                    .parse()
                    .map_err(|_| Error::parse(format!("bad digit {tok:?}")))?;
                digits.push(fq.from_u64(v));
            }
        }
        // assemble Σ lift(d_i) ϖ^(shift+i)
        let mut acc = self.zero(prec);
        for (i, d) in digits.iter().enumerate() {
            let lift = self.lift_residue(d, prec - shift - i as i64);
            acc = acc.add(&lift.mul_pi_pow(shift + i as i64));
        }
        Ok(acc.with_abs_prec(prec))
    }
}

fn split_digit_tokens(s: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '[' => {
                depth += 1;
                cur.push(ch);
            }
            ']' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| Error::parse("unbalanced ]"))?;
                cur.push(ch);
            }
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
            }
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur);
    }
    Ok(out)
}

fn parse_fq_poly_digit(fq: &FqField, s: &str) -> Result<FqElt> {
    // terms like  2 + 1y + 2y^3  (as printed by Display)
    let mut coeffs = vec![0u64; fq.degree()];
    for term in s.split('+') {
        let t = term.trim();
        if t.is_empty() {
            continue;
        }
        let (c, pow) = if let Some(ix) = t.find('y') {
            let cpart = t[..ix].trim();
            let c: u64 = if cpart.is_empty() {
                1
            } else {
                cpart.parse().map_err(|_| Error::parse("bad digit coefficient"))?
            };
            let ppart = t[ix + 1..].trim();
            let pow: usize = if ppart.is_empty() {
                1
            } else {
                ppart
                    .strip_prefix('^')
                    .ok_or_else(|| Error::parse("expected ^ in digit"))?
                    .parse()
                    .map_err(|_| Error::parse("bad digit exponent"))?
            };
            (c, pow)
        } else {
            (t.parse().map_err(|_| Error::parse("bad digit constant"))?, 0)
        };
        if pow >= fq.degree() {
            return Err(Error::parse("digit exponent exceeds residue degree"));
        }
        coeffs[pow] = (coeffs[pow] + c) % fq.p();
    }
    Ok(fq.from_coeffs(&coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn val_examples() {
        // val(ϖ^3 u) = 3 at N=10
        let f = LocalField::qp(5);
        let u = f.from_i64(7, 10);
        let x = u.mul(&f.uniformizer(10).pow_u64(3));
        assert_eq!(x.val(), Valuation::Exact(3));
        // val(0 at abs_prec 8) = "≥ 8"
        let z = f.zero(8);
        assert_eq!(z.val(), Valuation::AtLeast(8));
        // val(p) in the degree-2 Eisenstein field x^2 − p over Q_p = 2
        let e = LocalField::eisenstein_from_ints(5, 1, &[-5, 0]).unwrap();
        let p_elt = e.from_i64(5, 12);
        assert_eq!(p_elt.val(), Valuation::Exact(2));
    }

    #[test]
    fn arithmetic_examples() {
        // (1+p)(1−p) = 1 − p² at N=5 in Z_5
        let f = LocalField::qp(5);
        let a = f.from_i64(6, 5);
        let b = f.from_i64(-4, 5);
        let prod = a.mul(&b);
        assert!(prod.congruent(&f.from_i64(-24, 5)));
        // inv(1−p) at N=4 in Z_3 = 1 + p + p² + p³ = 40
        let f3 = LocalField::qp(3);
        let x = f3.from_i64(-2, 4);
        let inv = x.inv().unwrap();
        assert!(inv.congruent(&f3.from_i64(40, 4)));
        // inv(0 at N=6) is a precision error
        assert!(matches!(f3.zero(6).inv(), Err(Error::Precision { .. })));
    }

    #[test]
    fn teichmuller_examples() {
        let f3 = LocalField::qp(3);
        let fq = f3.residue_field().clone();
        // teichmuller(1) = 1
        let t1 = f3.teichmuller(&fq.one(), 6).unwrap();
        assert!(t1.congruent(&f3.one(6)));
        // teichmuller(2) in Z_3 = −1
        let t2 = f3.teichmuller(&fq.from_u64(2), 6).unwrap();
        assert!(t2.congruent(&f3.from_i64(-1, 6)));
        // teichmuller(2) in Z_5, N=4: t^4 = 1 and t ≡ 2 mod 5 (t = 182)
        let f5 = LocalField::qp(5);
        let t = f5.teichmuller(&f5.residue_field().from_u64(2), 4).unwrap();
        assert!(t.pow_u64(4).congruent(&f5.one(4)));
        assert!(t.congruent(&f5.from_i64(182, 4)));
        // teichmuller(0) is a domain error
        assert!(f5.teichmuller(&f5.residue_field().zero(), 4).is_err());
    }

    #[test]
    fn extend_examples() {
        // 1+p from W(F_q) into W(F_{q²}): same value
        let f = LocalField::qp(3);
        let big = LocalField::unramified(3, 2);
        let x = f.from_i64(4, 6);
        let y = f.extend(&x, &big).unwrap();
        assert!(y.congruent(&big.from_i64(4, 6)));
        assert_eq!(y.abs_prec(), 6);
        // ϖ from an Eisenstein field into its unram-degree-2 extension: val 1
        let e = LocalField::eisenstein_from_ints(3, 1, &[-3, 0]).unwrap();
        let e2 = e.with_unram_deg(2).unwrap();
        let pi = e.uniformizer(8);
        let pi2 = e.extend(&pi, &e2).unwrap();
        assert_eq!(pi2.val(), Valuation::Exact(1));
        // mismatched Eisenstein polynomials: error
        let other = LocalField::eisenstein_from_ints(3, 2, &[-6, 0]).unwrap();
        assert!(e.extend(&pi, &other).is_err());
    }

    #[test]
    fn digit_roundtrip() {
        let f = LocalField::qp(3);
        let x = f.from_i64(40, 5); // 1 + 3 + 9 + 27
        let s = format!("{}", x);
        assert_eq!(s, "1,1,1,1,0 (mod w^5)");
        let back = f.parse_elt(&s, 5).unwrap();
        assert!(back.congruent(&x));
        // rationals parse
        let r = f.parse_elt("5/7", 6).unwrap();
        let check = f.from_i64(5, 6).div(&f.from_i64(7, 6)).unwrap();
        assert!(r.congruent(&check));
    }

    #[test]
    fn precision_calculus() {
        let f = LocalField::qp(3);
        // mul keeps min(prec_a + val(b), prec_b + val(a))
        let a = f.from_i64(3, 5); // val 1, prec 5
        let b = f.from_i64(9, 4); // val 2, prec 4
        let c = a.mul(&b);
        assert_eq!(c.abs_prec(), 5); // min(5+2, 4+1) = 5
        assert_eq!(c.val(), Valuation::Exact(3));
        // inv of val-v element: prec − 2v
        let inv = a.inv().unwrap();
        assert_eq!(inv.abs_prec(), 3);
        assert_eq!(inv.val(), Valuation::Exact(-1));
    }

    #[test]
    fn eisenstein_arithmetic() {
        // Q_3(√3): x² − 3
        let e = LocalField::eisenstein_from_ints(3, 1, &[-3, 0]).unwrap();
        let pi = e.uniformizer(10);
        let sq = pi.mul(&pi);
        assert!(sq.congruent(&e.from_i64(3, 10)));
        let inv = pi.inv().unwrap();
        assert!(inv.mul(&pi).congruent(&e.one(8)));
        assert_eq!(inv.val(), Valuation::Exact(-1));
    }
}
