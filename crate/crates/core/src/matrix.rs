//! Dense matrices over a local field with division-free characteristic
//! polynomials (Samuelson–Berkowitz), determinants and inverses.

use crate::error::{Error, Result};
use crate::padic::{LocalField, PadicElt, Valuation};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    field: LocalField,
    n: usize,
    /// row-major
    data: Vec<PadicElt>,
}

impl Matrix {
    pub fn from_rows(field: &LocalField, rows: Vec<Vec<PadicElt>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "square matrices only");
        Matrix { field: field.clone(), n, data: rows.into_iter().flatten().collect() }
    }

    pub fn identity(field: &LocalField, n: usize, prec: i64) -> Self {
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                row.push(if i == j { field.one(prec) } else { field.zero(prec) });
            }
            rows.push(row);
        }
        Matrix::from_rows(field, rows)
    }

    pub fn zero(field: &LocalField, n: usize, prec: i64) -> Self {
        let rows = vec![vec![field.zero(prec); n]; n];
        Matrix::from_rows(field, rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn field(&self) -> &LocalField {
        &self.field
    }
    pub fn at(&self, i: usize, j: usize) -> &PadicElt {
        &self.data[i * self.n + j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: PadicElt) {
        self.data[i * self.n + j] = v;
    }

    pub fn entries(&self) -> &[PadicElt] {
        &self.data
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.add(b)).collect();
        Matrix { field: self.field.clone(), n: self.n, data }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.sub(b)).collect();
        Matrix { field: self.field.clone(), n: self.n, data }
    }

    pub fn neg(&self) -> Matrix {
        let data = self.data.iter().map(|a| a.neg()).collect();
        Matrix { field: self.field.clone(), n: self.n, data }
    }

    pub fn scale(&self, c: &PadicElt) -> Matrix {
        let data = self.data.iter().map(|a| a.mul(c)).collect();
        Matrix { field: self.field.clone(), n: self.n, data }
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = self.at(i, 0).mul(other.at(0, j));
                for k in 1..n {
                    acc = acc.add(&self.at(i, k).mul(other.at(k, j)));
                }
                data.push(acc);
            }
        }
        Matrix { field: self.field.clone(), n, data }
    }

    pub fn mul_vec(&self, v: &[PadicElt]) -> Vec<PadicElt> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut acc = self.at(i, 0).mul(&v[0]);
                for k in 1..n {
                    acc = acc.add(&self.at(i, k).mul(&v[k]));
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.n;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].clone();
            }
        }
        out
    }

    pub fn pow(&self, mut e: u64, prec: i64) -> Matrix {
        let mut base = self.clone();
        let mut acc = Matrix::identity(&self.field, self.n, prec);
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

    /// Coefficients of det(x·Id − A), constant term first, leading coefficient
    /// 1 at index n. Division-free (Samuelson–Berkowitz), so it is safe over
    /// the truncated ring at any precision.
    pub fn charpoly(&self) -> Vec<PadicElt> {
        let n = self.n;
        let prec = self
            .data
            .iter()
            .map(|x| x.abs_prec())
            .min()
            .unwrap_or(0);
        let one = self.field.one(prec);
        if n == 0 {
            return vec![one];
        }
        // p holds the charpoly of the r×r leading principal block, highest
        // degree first
        let mut p = vec![one.clone()];
        for r in 1..=n {
            // s_0 = 1, s_1 = -a_rr, s_i = -(R · M^{i-2} · C) for 2 <= i <= r
            let mut s = Vec::with_capacity(r + 1);
            s.push(one.clone());
            s.push(self.at(r - 1, r - 1).neg());
            if r >= 2 {
                let mut v: Vec<PadicElt> = (0..r - 1).map(|i| self.at(i, r - 1).clone()).collect();
                for _ in 2..=r {
                    let mut dot = self.at(r - 1, 0).mul(&v[0]);
                    for k in 1..r - 1 {
                        dot = dot.add(&self.at(r - 1, k).mul(&v[k]));
                    }
                    s.push(dot.neg());
                    // v <- M v with M the (r-1)×(r-1) principal block
                    let mut nv = Vec::with_capacity(r - 1);
                    for i in 0..r - 1 {
                        let mut acc = self.at(i, 0).mul(&v[0]);
                        for k in 1..r - 1 {
                            acc = acc.add(&self.at(i, k).mul(&v[k]));
                        }
                        nv.push(acc);
                    }
                    v = nv;
                }
            }
            // p_new[i] = Σ_{j <= i, j < len(p)} s_{i-j} p[j]
            let mut pnew = Vec::with_capacity(r + 1);
            for i in 0..=r {
                let mut acc: Option<PadicElt> = None;
                for (j, pj) in p.iter().enumerate() {
                    if j > i || i - j >= s.len() {
                        continue;
                    }
                    let t = s[i - j].mul(pj);
                    acc = Some(match acc {
                        None => t,
                        Some(a) => a.add(&t),
                    });
                }
                pnew.push(acc.unwrap_or_else(|| self.field.zero(prec)));
            }
            p = pnew;
        }
        p.reverse(); // constant term first
        p
    }

    /// Determinant via the charpoly constant term: det A = (−1)^n · c_0.
    pub fn det(&self) -> PadicElt {
        let cp = self.charpoly();
        let c0 = cp[0].clone();
        if self.n % 2 == 1 {
            c0.neg()
        } else {
            c0
        }
    }

    /// Trace.
    pub fn trace(&self) -> PadicElt {
        let mut acc = self.at(0, 0).clone();
        for i in 1..self.n {
            acc = acc.add(self.at(i, i));
        }
        acc
    }

    /// Inverse by Gaussian elimination with minimal-valuation pivoting.
    /// Requires the determinant valuation to be definite.
    pub fn inverse(&self) -> Result<Matrix> {
        let n = self.n;
        let prec = self.data.iter().map(|x| x.abs_prec()).min().unwrap_or(0);
        let mut a = self.clone();
        let mut inv = Matrix::identity(&self.field, n, prec);
        let mut col_perm: Vec<usize> = (0..n).collect();
        for step in 0..n {
            // find the minimal-valuation pivot in the remaining block
            let mut best: Option<(usize, usize, i64)> = None;
            for i in step..n {
                for j in step..n {
                    if let Valuation::Exact(v) = a.at(i, j).val() {
                        if best.map(|(_, _, bv)| v < bv).unwrap_or(true) {
                            best = Some((i, j, v));
                        }
                    }
                }
            }
            let (pi, pj, _) = best.ok_or(Error::Precision { needed: prec + 8, have: prec })?;
            // swap rows step<->pi in both a and inv; swap cols step<->pj in a
            for j in 0..n {
                a.data.swap(step * n + j, pi * n + j);
                inv.data.swap(step * n + j, pi * n + j);
            }
            if pj != step {
                for i in 0..n {
                    a.data.swap(i * n + step, i * n + pj);
                }
                col_perm.swap(step, pj);
            }
            let piv_inv = a.at(step, step).inv()?;
            for j in 0..n {
                let t = a.at(step, j).mul(&piv_inv);
                a.set(step, j, t);
                let t2 = inv.at(step, j).mul(&piv_inv);
                inv.set(step, j, t2);
            }
            for i in 0..n {
                if i == step {
                    continue;
                }
                let factor = a.at(i, step).clone();
                if factor.is_zero_at_prec() {
                    continue;
                }
                for j in 0..n {
                    let t = a.at(i, j).sub(&factor.mul(a.at(step, j)));
                    a.set(i, j, t);
                    let t2 = inv.at(i, j).sub(&factor.mul(inv.at(step, j)));
                    inv.set(i, j, t2);
                }
            }
        }
        // undo the column permutation: A P = L means A^{-1} = P (L^{-1})
        let mut out = Matrix::zero(&self.field, n, prec);
        for (row, &orig) in col_perm.iter().enumerate() {
            for j in 0..n {
                out.set(orig, j, inv.at(row, j).clone());
            }
        }
        Ok(out)
    }

    /// Matrix of X ↦ A X A^{-1} − X on n²-dimensional coordinate space
    /// (row-major vectorization). Used by the group-discriminant route that
    /// reads d_G off the characteristic polynomial of Id − Ad(γ).
    pub fn id_minus_ad(&self) -> Result<Matrix> {
        let n = self.n;
        let ainv = self.inverse()?;
        let prec = self.data.iter().map(|x| x.abs_prec()).min().unwrap_or(0);
        // (A X A^{-1})_{ij} = Σ_{k,l} A_{ik} X_{kl} A^{-1}_{lj}
        let mut out = Matrix::zero(&self.field, n * n, prec);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let coeff = self.at(i, k).mul(ainv.at(l, j));
                        let row = i * n + j;
                        let col = k * n + l;
                        let cur = out.at(row, col).clone();
                        out.set(row, col, cur.add(&coeff));
                    }
                }
            }
        }
        let id = Matrix::identity(&self.field, n * n, prec);
        Ok(id.sub(&out))
    }

    /// Parse a row-major matrix literal like `[[1,2],[3/5,w-digit-string]]`.
    pub fn parse(field: &LocalField, input: &str, prec: i64) -> Result<Matrix> {
        let s = input.trim();
        let inner = s
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| Error::parse("matrix literal must be [[...],[...]]"))?;
        let mut rows: Vec<Vec<PadicElt>> = Vec::new();
        let mut depth = 0usize;
        let mut cur = String::new();
        let mut row_strs: Vec<String> = Vec::new();
        for ch in inner.chars() {
            match ch {
                '[' => {
                    depth += 1;
                    if depth == 1 {
                        cur.clear();
                        continue;
                    }
                    cur.push(ch);
                }
                ']' => {
                    depth = depth.checked_sub(1).ok_or_else(|| Error::parse("unbalanced ]"))?;
                    if depth == 0 {
                        row_strs.push(cur.clone());
                        continue;
                    }
                    cur.push(ch);
                }
                ',' if depth == 0 => {}
                _ => cur.push(ch),
            }
        }
        for rs in &row_strs {
            let mut row = Vec::new();
            for tok in rs.split(',') {
                if tok.trim().is_empty() {
                    continue;
                }
                row.push(field.parse_elt(tok, prec)?);
            }
            rows.push(row);
        }
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::parse("matrix literal must be square and nonempty"));
        }
        Ok(Matrix::from_rows(field, rows))
    }
}

impl std::fmt::Display for Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for j in 0..self.n {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.at(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charpoly_2x2() {
        let f = LocalField::qp(5);
        let m = Matrix::from_rows(
            &f,
            vec![
                vec![f.from_i64(1, 8), f.from_i64(2, 8)],
                vec![f.from_i64(3, 8), f.from_i64(4, 8)],
            ],
        );
        let cp = m.charpoly();
        // x^2 - 5x - 2
        assert!(cp[2].congruent(&f.one(8)));
        assert!(cp[1].congruent(&f.from_i64(-5, 8)));
        assert!(cp[0].congruent(&f.from_i64(-2, 8)));
        assert!(m.det().congruent(&f.from_i64(-2, 8)));
    }

    #[test]
    fn identity_charpoly_n2() {
        let f = LocalField::qp(3);
        let m = Matrix::identity(&f, 2, 6);
        let cp = m.charpoly();
        // x² − 2x + 1
        assert!(cp[0].congruent(&f.one(6)));
        assert!(cp[1].congruent(&f.from_i64(-2, 6)));
        assert!(cp[2].congruent(&f.one(6)));
    }

    #[test]
    fn inverse_roundtrip() {
        let f = LocalField::qp(3);
        let m = Matrix::from_rows(
            &f,
            vec![
                vec![f.from_i64(2, 10), f.from_i64(3, 10)],
                vec![f.from_i64(1, 10), f.from_i64(1, 10)],
            ],
        );
        let inv = m.inverse().unwrap();
        let prod = m.mul(&inv);
        let id = Matrix::identity(&f, 2, 6);
        for i in 0..2 {
            for j in 0..2 {
                assert!(prod.at(i, j).congruent(id.at(i, j)), "entry ({i},{j})");
            }
        }
        // pivoting handles a non-unit corner
        let m2 = Matrix::from_rows(
            &f,
            vec![
                vec![f.from_i64(3, 10), f.from_i64(1, 10)],
                vec![f.from_i64(1, 10), f.from_i64(0, 10)],
            ],
        );
        let inv2 = m2.inverse().unwrap();
        let prod2 = m2.mul(&inv2);
        for i in 0..2 {
            for j in 0..2 {
                assert!(prod2.at(i, j).congruent(id.at(i, j)));
            }
        }
    }
}
