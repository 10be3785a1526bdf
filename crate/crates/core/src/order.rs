//! Maximal orders in the field cut out by an irreducible polynomial over a
//! local field (Pohst–Zassenhaus / Round-2 at the prime ϖ), and the
//! factorization report that packages per-factor ramification data,
//! discriminant valuations and order indices.

use crate::error::{Error, Result};
use crate::fq::FqElt;
use crate::padic::{LocalField, PadicElt, Valuation};
use crate::poly::{disc_val_poly, factor_squarefree, resultant, IntPoly};
use serde::Serialize;

/// Result of the maximal-order computation for one irreducible factor.
#[derive(Clone, Debug)]
pub struct MaximalOrder {
    /// val_F of the field discriminant d(E/F).
    pub disc_val: i64,
    /// length_O( O_E / O[x]/(f) ).
    pub index_val: i64,
    /// Ramification index of E/F.
    pub e: usize,
    /// Residue degree of E/F.
    pub f: usize,
    /// O-basis of O_E in power-basis coordinates (columns; entries in F with
    /// denominators allowed).
    pub basis: Vec<Vec<PadicElt>>,
}

/// Multiplication table for A = F[x]/(f): reduce power-basis products.
pub(crate) struct AlgebraCtx {
    pub(crate) field: LocalField,
    pub(crate) n: usize,
    /// x^{n+k} for k = 0..n-2 expressed in the power basis.
    high_powers: Vec<Vec<PadicElt>>,
}

impl AlgebraCtx {
    pub(crate) fn new(f: &IntPoly) -> Self {
        let field = f.field().clone();
        let n = f.degree();
        let prec = f.min_prec();
        let mut high_powers: Vec<Vec<PadicElt>> = Vec::with_capacity(n.saturating_sub(1));
        // x^n = -(a_0 + ... + a_{n-1}x^{n-1})
        let mut cur: Vec<PadicElt> = (0..n).map(|i| f.coeff(i).neg()).collect();
        high_powers.push(cur.clone());
        for _ in 1..n.saturating_sub(1).max(1) {
            // multiply cur by x
            let carry = cur[n - 1].clone();
            let mut next = vec![field.zero(prec); n];
            for i in (1..n).rev() {
                next[i] = cur[i - 1].clone();
            }
            for i in 0..n {
                next[i] = next[i].add(&carry.mul(&f.coeff(i).neg()));
            }
            cur = next;
            high_powers.push(cur.clone());
            if high_powers.len() == n.saturating_sub(1) {
                break;
            }
        }
        AlgebraCtx { field, n, high_powers }
    }

    /// Product of two elements given in power-basis coordinates.
    pub(crate) fn mul(&self, a: &[PadicElt], b: &[PadicElt]) -> Vec<PadicElt> {
        let n = self.n;
        let prec = a
            .iter()
            .chain(b.iter())
            .map(|x| x.abs_prec())
            .min()
            .unwrap_or(0);
        let mut conv = vec![self.field.zero(prec); 2 * n - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                conv[i + j] = conv[i + j].add(&x.mul(y));
            }
        }
        let mut out: Vec<PadicElt> = conv[..n].to_vec();
        for k in 0..n.saturating_sub(1) {
            let c = &conv[n + k];
            if c.is_zero_at_prec() {
                continue;
            }
            for i in 0..n {
                out[i] = out[i].add(&c.mul(&self.high_powers[k][i]));
            }
        }
        out
    }
}

/// Column-echelon form of a full-rank O-lattice in F^n given by spanning
/// columns: returns n columns, column r with its minimal-valuation pivot at
/// row r and zeros below-at-precision; the sum of pivot valuations is
/// val(det).
fn lattice_echelon(_field: &LocalField, cols: Vec<Vec<PadicElt>>, n: usize) -> Result<Vec<Vec<PadicElt>>> {
    let mut active: Vec<Vec<PadicElt>> = cols;
    let mut placed: Vec<Option<Vec<PadicElt>>> = vec![None; n];
    for r in (0..n).rev() {
        // pick the active column with minimal valuation at row r
        let mut best: Option<(usize, i64)> = None;
        for (ci, c) in active.iter().enumerate() {
            if let Valuation::Exact(v) = c[r].val() {
                if best.map(|(_, bv)| v < bv).unwrap_or(true) {
                    best = Some((ci, v));
                }
            }
        }
        let Some((ci, _)) = best else {
            // no visible pivot in this row among remaining columns
            return Err(Error::Precision {
                needed: active
                    .iter()
                    .map(|c| c[r].abs_prec())
                    .max()
                    .unwrap_or(8)
                    + 8,
                have: 0,
            });
        };
        let pivot = active.swap_remove(ci);
        let pinv = pivot[r].inv()?;
        for c in active.iter_mut() {
            if c[r].is_zero_at_prec() {
                continue;
            }
            let t = c[r].mul(&pinv);
            for i in 0..n {
                c[i] = c[i].sub(&t.mul(&pivot[i]));
            }
        }
        placed[r] = Some(pivot);
    }
    Ok(placed.into_iter().map(|c| c.unwrap()).collect())
}

/// Valuation of the determinant of an echelonized basis.
fn echelon_det_val(basis: &[Vec<PadicElt>]) -> Result<i64> {
    let mut acc = 0i64;
    for (r, c) in basis.iter().enumerate() {
        match c[r].val() {
            Valuation::Exact(v) => acc += v,
            Valuation::AtLeast(b) => return Err(Error::Precision { needed: b + 8, have: b }),
        }
    }
    Ok(acc)
}

/// Solve for the coordinates of `v` with respect to an echelonized basis.
fn coords_in_basis(basis: &[Vec<PadicElt>], v: &[PadicElt]) -> Result<Vec<PadicElt>> {
    let n = v.len();
    let mut rem: Vec<PadicElt> = v.to_vec();
    let mut coords = vec![basis[0][0].field().zero(0); n];
    for r in (0..n).rev() {
        let t = rem[r].div(&basis[r][r])?;
        for i in 0..n {
            rem[i] = rem[i].sub(&t.mul(&basis[r][i]));
        }
        coords[r] = t;
    }
    Ok(coords)
}

/// Round-2 maximal order of the field E = F[x]/(f) for f monic irreducible
/// integral. Computed entirely in truncated arithmetic; raises a precision
/// error (with a suggested retry bound) if the working precision cannot
/// certify a step.
pub fn maximal_order(f: &IntPoly) -> Result<MaximalOrder> {
    let field = f.field().clone();
    let n = f.degree();
    let prec = f.min_prec();
    let disc0 = disc_val_poly(f)?;
    if prec < disc0 + 4 {
        return Err(Error::Precision { needed: 2 * disc0 + 8, have: prec });
    }
    let ctx = AlgebraCtx::new(f);
    let fq = field.residue_field().clone();
    let q = field.q();
    // q^t >= n
    let mut t = 1u32;
    while (q as u128).pow(t) < n as u128 {
        t += 1;
    }
    // current order basis (echelonized columns in power coordinates)
    let mut basis: Vec<Vec<PadicElt>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { field.one(prec) } else { field.zero(prec) })
                .collect()
        })
        .collect();
    let mut index_val = 0i64;
    let max_iters = disc0 / 2 + 2;
    for _iter in 0..=max_iters {
        // residue-algebra data: mod-ϖ coordinates of products
        let reduce = |coords: &[PadicElt]| -> Result<Vec<FqElt>> {
            coords.iter().map(|c| c.residue()).collect()
        };
        // Frobenius^t matrix on O/ϖO in the order basis
        let mut frob_cols: Vec<Vec<FqElt>> = Vec::with_capacity(n);
        for b in basis.iter() {
            // b^{q^t} in the algebra: b · b^{q^t − 1} by square-and-multiply
            let mut k = (q as u128).pow(t) - 1;
            let mut sq = b.clone();
            let acc = {
                let mut res: Option<Vec<PadicElt>> = None;
                while k > 0 {
                    if k & 1 == 1 {
                        res = Some(match res {
                            None => sq.clone(),
                            Some(r) => ctx.mul(&r, &sq),
                        });
                    }
                    k >>= 1;
                    if k > 0 {
                        sq = ctx.mul(&sq, &sq);
                    }
                }
                match res {
                    None => b.clone(),
                    Some(r) => ctx.mul(&r, b),
                }
            };
            let coords = coords_in_basis(&basis, &acc)?;
            for c in &coords {
                if c.val().lower_bound() < 0 {
                    return Err(Error::Domain(
                        "order basis is not multiplicatively closed".into(),
                    ));
                }
            }
            frob_cols.push(reduce(&coords)?);
        }
        // kernel of Frobenius^t over F_q = radical / ϖO
        let rad_mod = fq_kernel(&fq, &frob_cols, n);
        // radical lattice I = span(lifts) + ϖ·basis, in power coordinates
        let mut rad_cols: Vec<Vec<PadicElt>> = Vec::new();
        for v in &rad_mod {
            let mut col = vec![field.zero(prec); n];
            for (j, d) in v.iter().enumerate() {
                if fq.is_zero(d) {
                    continue;
                }
                let lift = field.lift_residue(d, prec);
                for i in 0..n {
                    col[i] = col[i].add(&lift.mul(&basis[j][i]));
                }
            }
            rad_cols.push(col);
        }
        let pi = field.uniformizer(prec);
        for b in basis.iter() {
            rad_cols.push(b.iter().map(|x| x.mul(&pi)).collect());
        }
        let rad_basis = lattice_echelon(&field, rad_cols, n)?;
        // ring of multipliers: z in ϖ^{-1}O with z·I ⊆ I; condition is
        // F_q-linear in z mod ϖO
        let mut cond_cols: Vec<Vec<FqElt>> = Vec::with_capacity(n);
        let rad_gens: Vec<Vec<PadicElt>> = rad_basis.clone();
        for b in basis.iter() {
            // for each order-basis element w = b: coordinates of w·r_j w.r.t.
            // the radical basis, reduced mod ϖ, stacked over j
            let mut stacked: Vec<FqElt> = Vec::new();
            for r_j in &rad_gens {
                let prod = ctx.mul(b, r_j);
                let coords = coords_in_basis(&rad_basis, &prod)?;
                for c in &coords {
                    if c.val().lower_bound() < 0 {
                        return Err(Error::Precision { needed: prec + 8, have: prec });
                    }
                    stacked.push(c.residue()?);
                }
            }
            cond_cols.push(stacked);
        }
        let rows = cond_cols[0].len();
        let ker = fq_kernel_rect(&fq, &cond_cols, rows);
        // enlarge: O' = O + ϖ^{-1}·(kernel lifts)
        let mut new_cols: Vec<Vec<PadicElt>> = basis.clone();
        let pi_inv = field.uniformizer(prec).inv()?;
        let mut enlarged = false;
        for v in &ker {
            let mut col = vec![field.zero(prec); n];
            for (j, d) in v.iter().enumerate() {
                if fq.is_zero(d) {
                    continue;
                }
                let lift = field.lift_residue(d, prec);
                for i in 0..n {
                    col[i] = col[i].add(&lift.mul(&basis[j][i]));
                }
            }
            let scaled: Vec<PadicElt> = col.iter().map(|x| x.mul(&pi_inv)).collect();
            new_cols.push(scaled);
        }
        let new_basis = lattice_echelon(&field, new_cols, n)?;
        let new_det = echelon_det_val(&new_basis)?;
        if -new_det > index_val {
            enlarged = true;
            index_val = -new_det;
            basis = new_basis;
        }
        if !enlarged {
            // p-maximal: compute residue data and return
            let fdeg = n - rad_mod.len();
            if fdeg == 0 || n % fdeg != 0 {
                return Err(Error::Precision { needed: prec + 8, have: prec });
            }
            return Ok(MaximalOrder {
                disc_val: disc0 - 2 * index_val,
                index_val,
                e: n / fdeg,
                f: fdeg,
                basis,
            });
        }
    }
    Err(Error::Precision { needed: 2 * prec, have: prec })
}

/// Kernel of a square F_q-linear map given by columns.
fn fq_kernel(fq: &crate::fq::FqField, cols: &[Vec<FqElt>], n: usize) -> Vec<Vec<FqElt>> {
    fq_kernel_rect(fq, cols, n)
}

/// Kernel of a rows×cols F_q-linear map given column-wise.
fn fq_kernel_rect(fq: &crate::fq::FqField, cols: &[Vec<FqElt>], rows: usize) -> Vec<Vec<FqElt>> {
    let ncols = cols.len();
    // row-reduce the matrix [A | I-tracking] by columns: standard kernel via
    // column operations on A^T
    let mut a: Vec<Vec<FqElt>> = (0..rows)
        .map(|i| (0..ncols).map(|j| cols[j][i].clone()).collect())
        .collect();
    let mut track: Vec<Vec<FqElt>> = (0..ncols)
        .map(|j| {
            (0..ncols)
                .map(|i| if i == j { fq.one() } else { fq.zero() })
                .collect()
        })
        .collect();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut used = vec![false; ncols];
    for r in 0..rows {
        // find unused column with nonzero entry in row r
        let piv = (0..ncols).find(|&j| !used[j] && !fq.is_zero(&a[r][j]));
        let Some(pj) = piv else { continue };
        used[pj] = true;
        pivot_cols.push(pj);
        let inv = fq.inv(&a[r][pj]).unwrap();
        for j in 0..ncols {
            if j == pj || fq.is_zero(&a[r][j]) {
                continue;
            }
            let factor = fq.mul(&a[r][j], &inv);
            for i in 0..rows {
                let t = fq.mul(&factor, &a[i][pj]);
                a[i][j] = fq.sub(&a[i][j], &t);
            }
            let tr = track[pj].clone();
            for i in 0..ncols {
                let t = fq.mul(&factor, &tr[i]);
                track[j][i] = fq.sub(&track[j][i], &t);
            }
        }
    }
    let mut out = Vec::new();
    for j in 0..ncols {
        if !used[j] {
            // column j reduced to zero: track[j] is a kernel vector
            if a.iter().all(|row| fq.is_zero(&row[j])) {
                out.push(track[j].clone());
            }
        }
    }
    out
}

// -------------------------- factorization report --------------------------

#[derive(Clone, Debug, Serialize)]
pub struct FactorRecord {
    /// The monic irreducible factor, printed in the polynomial literal format.
    pub poly: String,
    pub degree: usize,
    pub e: usize,
    pub f: usize,
    pub disc_val: i64,
    pub index_val: i64,
    /// val(disc(factor)) — satisfies the order-index identity
    /// disc_val_poly = 2·index_val + disc_val.
    pub poly_disc_val: i64,
    pub tame: bool,
}

/// Complete factorization data of a squarefree monic integral polynomial:
/// irreducible factors with ramification data plus the cross-factor resultant
/// valuations that enter the conductor identity.
#[derive(Clone, Debug)]
pub struct FactorizationReport {
    pub factors: Vec<(IntPoly, FactorRecord, MaximalOrder)>,
    /// Σ_{i<j} val Res(f_i, f_j).
    pub cross_index_val: i64,
    /// val disc of the input polynomial.
    pub input_disc_val: i64,
}

impl FactorizationReport {
    /// length_O(O_Ẽ / O[γ]) for the étale algebra Ẽ = Π E_i: per-factor
    /// indices plus the cross terms.
    pub fn total_index_val(&self) -> i64 {
        self.factors.iter().map(|(_, r, _)| r.index_val).sum::<i64>() + self.cross_index_val
    }
    pub fn sum_disc_val(&self) -> i64 {
        self.factors.iter().map(|(_, r, _)| r.disc_val).sum()
    }
    pub fn sum_ef(&self) -> usize {
        self.factors.iter().map(|(_, r, _)| r.e * r.f).sum()
    }
}

/// Factor a squarefree monic integral polynomial and attach maximal-order data
/// to every irreducible factor, with the classical consistency identities
/// asserted along the way.
pub fn factorization_report(f: &IntPoly) -> Result<FactorizationReport> {
    let input_disc_val = disc_val_poly(f)?;
    let certified = factor_squarefree(f)?;
    let mut factors = Vec::new();
    for c in &certified {
        let rec = if c.poly.degree() == 1 {
            let ord = MaximalOrder {
                disc_val: 0,
                index_val: 0,
                e: 1,
                f: 1,
                basis: vec![vec![f.field().one(f.min_prec())]],
            };
            let record = FactorRecord {
                poly: format!("{}", c.poly),
                degree: 1,
                e: 1,
                f: 1,
                disc_val: 0,
                index_val: 0,
                poly_disc_val: 0,
                tame: true,
            };
            (c.poly.clone(), record, ord)
        } else {
            let ord = maximal_order(&c.poly)?;
            let pd = disc_val_poly(&c.poly)?;
            // order-index identity, exact
            if pd != 2 * ord.index_val + ord.disc_val {
                return Err(Error::Domain(format!(
                    "order-index identity failed: {} != 2*{} + {}",
                    pd, ord.index_val, ord.disc_val
                )));
            }
            // certificate agreement when the polygon certified (e, f)
            if let Some((e, fr)) = c.ef {
                if e != ord.e || fr != ord.f {
                    return Err(Error::Domain(format!(
                        "ramification certificates disagree: polygon ({}, {}) vs order ({}, {})",
                        e, fr, ord.e, ord.f
                    )));
                }
            }
            let p = f.field().p() as usize;
            let tame = ord.e % p != 0;
            // tame ⟺ disc_val = f(e−1), Artin = defect in the tame case
            let tame_bound = (ord.f * (ord.e - 1)) as i64;
            if ord.disc_val < tame_bound || (tame && ord.disc_val != tame_bound) {
                return Err(Error::Domain(format!(
                    "discriminant bound violated: disc_val {} vs tame bound {}",
                    ord.disc_val, tame_bound
                )));
            }
            if !tame && ord.disc_val == tame_bound {
                return Err(Error::Domain(
                    "wild factor met the tame bound exactly".into(),
                ));
            }
            let record = FactorRecord {
                poly: format!("{}", c.poly),
                degree: c.poly.degree(),
                e: ord.e,
                f: ord.f,
                disc_val: ord.disc_val,
                index_val: ord.index_val,
                poly_disc_val: pd,
                tame,
            };
            (c.poly.clone(), record, ord)
        };
        factors.push(rec);
    }
    // cross terms
    let mut cross = 0i64;
    for i in 0..factors.len() {
        for j in i + 1..factors.len() {
            let r = resultant(&factors[i].0, &factors[j].0);
            match r.val() {
                Valuation::Exact(v) => cross += v,
                Valuation::AtLeast(_) => {
                    return Err(Error::NotRegularSemisimple);
                }
            }
        }
    }
    let report = FactorizationReport { factors, cross_index_val: cross, input_disc_val };
    // Σ e_i f_i = deg
    if report.sum_ef() != f.degree() {
        return Err(Error::Domain("Σ e_i·f_i does not match the degree".into()));
    }
    // disc(input) = Σ disc(f_i) + 2·cross-index accounting
    let lhs = report.input_disc_val;
    let rhs = report
        .factors
        .iter()
        .map(|(_, r, _)| r.poly_disc_val)
        .sum::<i64>()
        + 2 * report.cross_index_val;
    if lhs != rhs {
        return Err(Error::Domain(format!(
            "discriminant additivity failed: {} != {}",
            lhs, rhs
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximal_order_x2_minus_p() {
        // x² − p, p odd: disc_val 1, index 0 (Eisenstein ⇒ O_E = O[x])
        let f5 = LocalField::qp(5);
        let f = IntPoly::from_i64_coeffs(&f5, &[-5, 0, 1], 14);
        let ord = maximal_order(&f).unwrap();
        assert_eq!((ord.disc_val, ord.index_val, ord.e, ord.f), (1, 0, 2, 1));
    }

    #[test]
    fn maximal_order_x2_minus_2_over_q2() {
        // x² − 2 over Q_2: disc_val 3, index 0
        let f2 = LocalField::qp(2);
        let f = IntPoly::from_i64_coeffs(&f2, &[-2, 0, 1], 14);
        let ord = maximal_order(&f).unwrap();
        assert_eq!((ord.disc_val, ord.index_val, ord.e, ord.f), (3, 0, 2, 1));
    }

    #[test]
    fn maximal_order_x2_minus_p3() {
        // x² − p³, p odd: disc_val 1, index 1; identity 3 = 2·1 + 1
        let f3 = LocalField::qp(3);
        let f = IntPoly::from_i64_coeffs(&f3, &[-27, 0, 1], 16);
        let ord = maximal_order(&f).unwrap();
        assert_eq!((ord.disc_val, ord.index_val, ord.e, ord.f), (1, 1, 2, 1));
    }

    #[test]
    fn maximal_order_unramified() {
        // x² + 1 over Q_3: unramified quadratic, disc_val 0
        let f3 = LocalField::qp(3);
        let f = IntPoly::from_i64_coeffs(&f3, &[1, 0, 1], 12);
        let ord = maximal_order(&f).unwrap();
        assert_eq!((ord.disc_val, ord.index_val, ord.e, ord.f), (0, 0, 1, 2));
    }

    #[test]
    fn report_with_cross_terms() {
        // (x²−p)(x²−2p) over Q_5: art = 1+1, cross = 2,
        // disc additivity: 1 + 1 + 2·2 = 6 = val disc(input)
        let f5 = LocalField::qp(5);
        let a = IntPoly::from_i64_coeffs(&f5, &[-5, 0, 1], 18);
        let b = IntPoly::from_i64_coeffs(&f5, &[-10, 0, 1], 18);
        let f = a.mul(&b);
        let rep = factorization_report(&f).unwrap();
        assert_eq!(rep.factors.len(), 2);
        assert_eq!(rep.cross_index_val, 2);
        assert_eq!(rep.input_disc_val, 6);
        assert_eq!(rep.sum_disc_val(), 2);
        assert_eq!(rep.total_index_val(), 2);
        // conductor identity: d_lie = 2·total_index + art
        assert_eq!(rep.input_disc_val, 2 * rep.total_index_val() + rep.sum_disc_val());
    }

    #[test]
    fn report_x3_minus_3_over_q3() {
        // wild cubic: disc_val 5, e=3, f=1, index 0
        let f3 = LocalField::qp(3);
        let f = IntPoly::from_i64_coeffs(&f3, &[-3, 0, 0, 1], 16);
        let rep = factorization_report(&f).unwrap();
        assert_eq!(rep.factors.len(), 1);
        let r = &rep.factors[0].1;
        assert_eq!((r.e, r.f, r.disc_val, r.index_val), (3, 1, 5, 0));
        assert!(!r.tame);
    }
}
