//! Numerical invariants of regular semisimple conjugacy classes in GL_n over a
//! local field: discriminant valuations for the group and the Lie algebra,
//! Artin conductor and defect of the centralizer torus, Kottwitz invariant and
//! its defect, boundedness predicates, the two dimension formulas, topological
//! Jordan decompositions and the quasi-logarithm.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::order::{factorization_report, AlgebraCtx, FactorizationReport};
use crate::padic::{LocalField, PadicElt, Valuation};
use crate::poly::{disc_val_poly, hensel_split_parts, newton_polygon, restrict_elt, IntPoly};
use num_integer::Integer;
use serde::Serialize;

/// Boundedness and regularity predicates, all read off the characteristic
/// polynomial.
#[derive(Clone, Copy, Debug, Default, Serialize, PartialEq, Eq)]
pub struct Flags {
    pub bounded: bool,
    pub bounded_mod_center: bool,
    pub top_nilpotent: bool,
    pub top_unipotent: bool,
    pub strongly_top_unipotent: bool,
    pub regular_semisimple: bool,
}

/// The full invariant record of a conjugacy class.
#[derive(Clone, Debug, Serialize)]
pub struct ConjugacyInvariants {
    pub n: usize,
    pub charpoly: String,
    pub d_lie: i64,
    pub d_grp: Option<i64>,
    pub art: i64,
    pub torus_def: i64,
    pub swan: i64,
    pub kappa: Option<i64>,
    pub kappa_def: Option<i64>,
    pub dim_lie_pred: Option<i64>,
    pub dim_grp_pred: Option<i64>,
    pub flags: Flags,
}

/// Characteristic polynomial of γ — the type-A Chevalley base point — plus the
/// boundedness flag (all coefficients integral).
pub fn chevalley(gamma: &Matrix) -> (IntPoly, bool) {
    let cp = gamma.charpoly();
    let poly = IntPoly::new(gamma.field(), cp);
    let bounded = poly.is_integral();
    (poly, bounded)
}

/// Companion-matrix section of the Chevalley map; defined over O, so the
/// coefficients must be integral.
pub fn kostant_section(a: &IntPoly) -> Result<Matrix> {
    if !a.is_monic_visibly() {
        return Err(Error::domain("Kostant section requires a monic coefficient vector"));
    }
    if !a.is_integral() {
        return Err(Error::domain("Kostant section is defined over O: non-integral input"));
    }
    Ok(a.companion())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DiscriminantValuations {
    pub d_lie: i64,
    pub d_grp: Option<i64>,
}

/// d_lie = val disc(charpoly); for invertible γ also d_grp, computed two
/// independent ways — the closed form d_lie − (n−1)·val det γ and the direct
/// ad-operator route (characteristic polynomial of Id − Ad(γ) on n²-space,
/// coefficient of t^n) — which must agree exactly.
pub fn discriminant_valuations(gamma: &Matrix) -> Result<DiscriminantValuations> {
    let (cp, _) = chevalley(gamma);
    let d_lie = disc_val_poly(&cp)?;
    let n = gamma.n() as i64;
    let det = gamma.det();
    let d_grp = match det.val() {
        Valuation::Exact(kappa) => {
            let closed = d_lie - (n - 1) * kappa;
            let big = gamma.id_minus_ad()?;
            let bigcp = big.charpoly();
            // the kernel of Id − Ad(γ) is the n-dimensional centralizer, so
            // coefficients below t^n must vanish
            for c in bigcp.iter().take(gamma.n()) {
                if let Valuation::Exact(_) = c.val() {
                    return Err(Error::domain(
                        "Id − Ad(γ) has visible coefficients below the centralizer rank",
                    ));
                }
            }
            let direct = bigcp[gamma.n()]
                .val()
                .exact()
                .ok_or(Error::Precision { needed: cp.min_prec() + 8, have: cp.min_prec() })?;
            if direct != closed {
                return Err(Error::domain(format!(
                    "discriminant routes disagree: ad-route {} vs closed form {}",
                    direct, closed
                )));
            }
            Some(closed)
        }
        Valuation::AtLeast(_) => None,
    };
    Ok(DiscriminantValuations { d_lie, d_grp })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ArtinData {
    pub art: i64,
    pub torus_def: i64,
    pub swan: i64,
}

/// Artin conductor, defect and Swan conductor of the centralizer torus in the
/// geometric normalization: art = Σ val_F d(E_i/F) (conductor–discriminant
/// with inertia only), def = Σ (e_i f_i − f_i).
pub fn artin_conductor(report: &FactorizationReport) -> ArtinData {
    let art: i64 = report.sum_disc_val();
    let torus_def: i64 = report
        .factors
        .iter()
        .map(|(_, r, _)| (r.e * r.f - r.f) as i64)
        .sum();
    ArtinData { art, torus_def, swan: art - torus_def }
}

/// Kottwitz invariant of γ ∈ GL_n(F): val det γ.
pub fn kottwitz(gamma: &Matrix) -> Result<i64> {
    match gamma.det().val() {
        Valuation::Exact(v) => Ok(v),
        Valuation::AtLeast(b) => Err(Error::Precision { needed: b + 8, have: b }),
    }
}

/// Defect of the Kottwitz invariant a for GL_n: n − gcd(n, a), computed both
/// through the gcd and as n minus the cycle count of i ↦ i + a on Z/n.
pub fn kappa_defect(n: usize, a: i64) -> i64 {
    let am = a.rem_euclid(n as i64) as usize;
    let gcd_form = if am == 0 { 0 } else { n as i64 - n.gcd(&am) as i64 };
    // cycle count of the permutation i ↦ i + a on Z/n
    let mut seen = vec![false; n];
    let mut cycles = 0i64;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = (i + am) % n;
        }
    }
    let cycle_form = n as i64 - cycles;
    assert_eq!(gcd_form, cycle_form, "gcd and cycle-count forms of the defect disagree");
    cycle_form
}

// ------------------------- boundedness predicates -------------------------

/// Flags computed from the characteristic polynomial of γ (group reading:
/// group-boundedness requires a unit constant term).
pub fn flags_from_charpoly(cp: &IntPoly) -> Flags {
    let n = cp.degree();
    let integral = cp.is_integral();
    let const_val = cp.coeff(0).val();
    let bounded_grp = integral && const_val == Valuation::Exact(0);
    let bounded_mod_center = match newton_polygon(cp) {
        Ok(np) => np.segments.len() <= 1,
        Err(_) => false,
    };
    let top_nilpotent = integral
        && cp
            .coeffs()
            .iter()
            .take(n)
            .all(|c| c.val().lower_bound() >= 1);
    let top_unipotent = integral && {
        let field = cp.field();
        let one = field.one(cp.min_prec());
        let shifted = cp.compose_shift(&one);
        shifted.coeffs().iter().take(n).all(|c| c.val().lower_bound() >= 1)
    };
    // for GL_n, π₁ = Z is torsion-free, so topologically unipotent elements
    // are strongly topologically unipotent (det is automatically a unit)
    let strongly_top_unipotent = top_unipotent;
    let regular_semisimple = disc_val_poly(cp).is_ok();
    Flags {
        bounded: bounded_grp,
        bounded_mod_center,
        top_nilpotent,
        top_unipotent,
        strongly_top_unipotent,
        regular_semisimple,
    }
}

/// Lie-algebra boundedness: integral characteristic polynomial.
pub fn bounded_lie(cp: &IntPoly) -> bool {
    cp.is_integral()
}

// ------------------------- dimension predictions -------------------------

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DimensionPrediction {
    pub dim_lie_pred: Option<i64>,
    pub dim_grp_pred: Option<i64>,
}

/// The two dimension formulas for split GL_n (Art(G) = 0):
/// dim_lie = (d_lie − Art_γ)/2 for bounded γ;
/// dim_grp = (d_grp + def(κ) − Art_γ)/2 for bounded-mod-center γ.
/// Non-integrality of either quantity is a hard internal-consistency failure.
pub fn predict_dimension(
    n: usize,
    d: &DiscriminantValuations,
    art: &ArtinData,
    kappa: Option<i64>,
    flags: &Flags,
) -> Result<DimensionPrediction> {
    if !flags.regular_semisimple {
        return Err(Error::NotRegularSemisimple);
    }
    let dim_lie_pred = if bounded_for_lie(flags) {
        let num = d.d_lie - art.art;
        if num < 0 || num % 2 != 0 {
            return Err(Error::domain(format!(
                "dimension formula integrality failed on the Lie side: ({} - {})/2",
                d.d_lie, art.art
            )));
        }
        Some(num / 2)
    } else {
        None
    };
    let dim_grp_pred = match (d.d_grp, kappa, flags.bounded_mod_center) {
        (Some(dg), Some(k), true) => {
            let kd = kappa_defect(n, k);
            let num = dg + kd - art.art;
            if num < 0 || num % 2 != 0 {
                return Err(Error::domain(format!(
                    "dimension formula integrality failed on the group side: ({} + {} - {})/2",
                    dg, kd, art.art
                )));
            }
            Some(num / 2)
        }
        _ => None,
    };
    if dim_lie_pred.is_none() && dim_grp_pred.is_none() {
        return Err(Error::domain(
            "nonempty fails: unbounded (neither bounded nor bounded mod center)",
        ));
    }
    Ok(DimensionPrediction { dim_lie_pred, dim_grp_pred })
}

fn bounded_for_lie(flags: &Flags) -> bool {
    // Lie-side boundedness is recorded in `bounded` by the assembler for Lie
    // elements; for group elements boundedness implies it as well.
    flags.bounded
}

/// Which reading of the input: an element of the Lie algebra gl_n or of the
/// group GL_n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ElementKind {
    Lie,
    Group,
}

/// Assemble the full invariant record for a matrix.
pub fn conjugacy_invariants(gamma: &Matrix, kind: ElementKind) -> Result<ConjugacyInvariants> {
    let n = gamma.n();
    let (cp, integral) = chevalley(gamma);
    let mut flags = flags_from_charpoly(&cp);
    if kind == ElementKind::Lie {
        flags.bounded = integral;
        flags.top_unipotent = false;
        flags.strongly_top_unipotent = false;
    }
    if !flags.regular_semisimple {
        return Err(Error::NotRegularSemisimple);
    }
    let d = discriminant_valuations(gamma)?;
    let report = factorization_of_centralizer(&cp)?;
    let art = artin_conductor(&report);
    let kappa = gamma.det().val().exact();
    let kappa_def = kappa.map(|k| kappa_defect(n, k));
    let dims = predict_dimension(n, &d, &art, kappa, &flags).ok();
    Ok(ConjugacyInvariants {
        n,
        charpoly: format!("{}", cp),
        d_lie: d.d_lie,
        d_grp: d.d_grp,
        art: art.art,
        torus_def: art.torus_def,
        swan: art.swan,
        kappa,
        kappa_def,
        dim_lie_pred: dims.as_ref().and_then(|x| x.dim_lie_pred),
        dim_grp_pred: dims.as_ref().and_then(|x| x.dim_grp_pred),
        flags,
    })
}

/// Factorization report of the centralizer algebra F[γ]. Non-integral
/// characteristic polynomials (bounded-mod-center classes) are centered by a
/// uniformizer power first; the centralizer is unchanged.
pub fn factorization_of_centralizer(cp: &IntPoly) -> Result<FactorizationReport> {
    if cp.is_integral() {
        return factorization_report(cp);
    }
    let n = cp.degree();
    let mut c = 0i64;
    for (i, a) in cp.coeffs().iter().enumerate().take(n) {
        if let Valuation::Exact(v) = a.val() {
            if v < 0 {
                let denom = (n - i) as i64;
                let need = (-v + denom - 1) / denom;
                c = c.max(need);
            }
        }
    }
    let pi_c = cp.field().uniformizer(cp.min_prec() + 2 * c * n as i64).pow_u64(c as u64);
    let scaled = cp.unscale_root(&pi_c);
    factorization_report(&scaled)
}

// ------------------------- quasi-logarithm -------------------------

/// Quasi-logarithm for GL_n with the standard trace pairing: Φ(g) = g − Id.
/// Conjugation-equivariant, Φ(1) = 0, identity differential; a bijection
/// between topologically unipotent group elements and topologically nilpotent
/// Lie elements with inverse g = Id + X.
pub fn quasi_log(g: &Matrix) -> Matrix {
    let id = Matrix::identity(
        g.field(),
        g.n(),
        g.entries().iter().map(|x| x.abs_prec()).min().unwrap_or(0),
    );
    g.sub(&id)
}

// ------------------------- topological Jordan -------------------------

/// Topological Jordan decomposition γ = s·u of a bounded regular semisimple
/// group element: s strongly semisimple (Teichmüller eigenvalues), u
/// topologically unipotent, both polynomials in γ.
#[derive(Clone, Debug)]
pub struct GroupJordan {
    pub s: Matrix,
    pub u: Matrix,
    /// coordinates of s and u in the power basis of F[γ]
    pub s_coords: Vec<PadicElt>,
    pub u_coords: Vec<PadicElt>,
    /// q^r-power map used for the limit
    pub r: u32,
}

pub fn topological_jordan_group(gamma: &Matrix, prec: i64) -> Result<GroupJordan> {
    let (cp, _) = chevalley(gamma);
    let flags = flags_from_charpoly(&cp);
    if !flags.bounded {
        return Err(Error::domain(
            "topological Jordan decomposition requires a bounded element",
        ));
    }
    if !flags.regular_semisimple {
        return Err(Error::NotRegularSemisimple);
    }
    let field = gamma.field().clone();
    let fq = field.residue_field().clone();
    let fbar = cp.residue_poly()?;
    let mut r: u32 = 1;
    for (g, _) in fbar.factor(&fq)? {
        let d = g.degree(&fq).unwrap() as u32;
        r = num_integer::lcm(r, d);
    }
    let q_r: u128 = (field.q() as u128).pow(r);
    if q_r > u64::MAX as u128 {
        return Err(Error::unsupported("q^r exceeds the supported exponent range"));
    }
    let ctx = AlgebraCtx::new(&cp);
    let n = cp.degree();
    // iterate z ← z^{q^r} on the algebra element x until fixed at precision
    let mut z: Vec<PadicElt> = (0..n)
        .map(|i| if i == 1 { field.one(prec) } else { field.zero(prec) })
        .collect();
    if n == 1 {
        z = vec![field.one(prec)];
    }
    let dv = disc_val_poly(&cp)?;
    let bound = 4 * (prec + dv).max(4);
    let mut converged = false;
    for _ in 0..bound {
        let next = alg_pow(&ctx, &z, q_r as u64);
        if coords_eq(&next, &z) {
            z = next;
            converged = true;
            break;
        }
        z = next;
    }
    if !converged {
        return Err(Error::Precision { needed: prec + 8, have: prec });
    }
    let s_coords = z;
    // u = s^{-1} γ in the algebra
    let s_inv = alg_inverse(&ctx, &s_coords)?;
    let x_elt: Vec<PadicElt> = (0..n)
        .map(|i| if i == 1 { field.one(prec) } else { field.zero(prec) })
        .collect();
    let x_elt = if n == 1 {
        // A = F[x]/(x - a): x ≡ a
        vec![cp.coeff(0).neg()]
    } else {
        x_elt
    };
    let u_coords = ctx.mul(&s_inv, &x_elt);
    let s = eval_coords(&ctx, gamma, &s_coords);
    let u = eval_coords(&ctx, gamma, &u_coords);
    // certificates
    let su = s.mul(&u);
    let us = u.mul(&s);
    for (a, b) in su.entries().iter().zip(gamma.entries()) {
        if !a.congruent(b) {
            return Err(Error::domain("su = γ certificate failed"));
        }
    }
    for (a, b) in us.entries().iter().zip(gamma.entries()) {
        if !a.congruent(b) {
            return Err(Error::domain("us = γ certificate failed"));
        }
    }
    let (ucp, _) = chevalley(&u);
    let one = field.one(ucp.min_prec());
    let shifted = ucp.compose_shift(&one);
    if !shifted
        .coeffs()
        .iter()
        .take(n)
        .all(|c| c.val().lower_bound() >= 1)
    {
        return Err(Error::domain("u is not topologically unipotent"));
    }
    // s is a fixed point of the q^r-power map: Teichmüller eigenvalues
    let s_again = alg_pow(&ctx, &s_coords, q_r as u64);
    if !coords_eq(&s_again, &s_coords) {
        return Err(Error::domain("s^{q^r} = s certificate failed"));
    }
    Ok(GroupJordan { s, u, s_coords, u_coords, r })
}

/// Additive topological Jordan decomposition γ = γ0 + γ1 of a bounded regular
/// semisimple Lie element: γ0 strongly semisimple (Teichmüller-lift
/// eigenvalues, clustered by residue), γ1 topologically nilpotent.
#[derive(Clone, Debug)]
pub struct LieJordan {
    pub gamma0: Matrix,
    pub gamma1: Matrix,
    pub gamma0_coords: Vec<PadicElt>,
    /// cluster data: (residue factor degree, multiplicity)
    pub clusters: Vec<(usize, usize)>,
}

pub fn topological_jordan_lie(gamma: &Matrix, prec: i64) -> Result<LieJordan> {
    let (cp, integral) = chevalley(gamma);
    if !integral {
        return Err(Error::domain("Lie Jordan decomposition requires a bounded element"));
    }
    if disc_val_poly(&cp).is_err() {
        return Err(Error::NotRegularSemisimple);
    }
    let field = gamma.field().clone();
    let fq = field.residue_field().clone();
    let n = cp.degree();
    let ctx = AlgebraCtx::new(&cp);
    let fbar = cp.residue_poly()?;
    let rfact = fbar.factor(&fq)?;
    let clusters: Vec<(usize, usize)> = rfact
        .iter()
        .map(|(g, m)| (g.degree(&fq).unwrap(), *m))
        .collect();
    // cluster factorization f = Π f_c over O
    let parts: Vec<crate::fq::FqPoly> = rfact
        .iter()
        .map(|(g, m)| {
            let mut acc = crate::fq::FqPoly::new(&fq, vec![fq.one()]);
            for _ in 0..*m {
                acc = acc.mul(g, &fq);
            }
            acc
        })
        .collect();
    let lifted = hensel_split_parts(&cp, &parts)?;
    // CRT idempotents by Newton refinement from the residue level
    let idems = crt_idempotents(&ctx, &cp, &lifted)?;
    let mut gamma0_coords = vec![field.zero(prec); n];
    for (ci, ((gbar, _m), e_c)) in rfact.iter().zip(&idems).enumerate() {
        let d = gbar.degree(&fq).unwrap();
        let zero_cluster = d == 1 && fq.is_zero(&gbar.coeffs[0]);
        if zero_cluster {
            continue; // contributes 0 to γ0
        }
        let g_t = teichmuller_factor_poly(&field, gbar, prec)?;
        // Newton-solve g_t(z) = 0 in the e_c component, starting from x·e_c
        let x_elt: Vec<PadicElt> = (0..n)
            .map(|i| if i == 1 { field.one(prec) } else { field.zero(prec) })
            .collect();
        let x_elt = if n == 1 { vec![cp.coeff(0).neg()] } else { x_elt };
        let mut z = ctx.mul(&x_elt, e_c);
        let max_steps = 3 * (64 - (prec.max(2) as u64).leading_zeros()) + 8;
        let mut done = false;
        for _ in 0..max_steps {
            let val_g = eval_poly_alg(&ctx, &g_t, &z);
            let resid = ctx.mul(&val_g, e_c);
            if resid.iter().all(|c| c.is_zero_at_prec()) {
                done = true;
                break;
            }
            let dpoly = g_t.derivative();
            let val_dg = eval_poly_alg(&ctx, &dpoly, &z);
            // invert val_dg·e_c + (1 − e_c), a unit of the full algebra
            let mut v = ctx.mul(&val_dg, e_c);
            let one_minus = one_minus_alg(&ctx, e_c, prec);
            for i in 0..n {
                v[i] = v[i].add(&one_minus[i]);
            }
            let vinv = alg_inverse(&ctx, &v)?;
            let corr = ctx.mul(&ctx.mul(&val_g, &vinv), e_c);
            for i in 0..n {
                z[i] = z[i].sub(&corr[i]).with_abs_prec(prec);
            }
        }
        if !done {
            return Err(Error::Precision { needed: prec + 8, have: prec });
        }
        let _ = ci;
        for i in 0..n {
            gamma0_coords[i] = gamma0_coords[i].add(&z[i]);
        }
    }
    let gamma0 = eval_coords(&ctx, gamma, &gamma0_coords);
    let gamma1 = gamma.sub(&gamma0);
    // certificates: γ0γ1 = γ1γ0 (both are polynomials in γ); γ1 top-nilpotent
    let (g1cp, _) = chevalley(&gamma1);
    if !g1cp
        .coeffs()
        .iter()
        .take(n)
        .all(|c| c.val().lower_bound() >= 1)
    {
        return Err(Error::domain("γ1 is not topologically nilpotent"));
    }
    let comm = gamma0.mul(&gamma1).sub(&gamma1.mul(&gamma0));
    if !comm.entries().iter().all(|c| c.is_zero_at_prec()) {
        return Err(Error::domain("γ0 and γ1 do not commute"));
    }
    Ok(LieJordan { gamma0, gamma1, gamma0_coords, clusters })
}

/// Monic polynomial over O whose roots are the Teichmüller lifts of the roots
/// of the (separable, irreducible, nonzero-root) residue factor gbar.
fn teichmuller_factor_poly(
    field: &LocalField,
    gbar: &crate::fq::FqPoly,
    prec: i64,
) -> Result<IntPoly> {
    let fq = field.residue_field().clone();
    let d = gbar.degree(&fq).unwrap();
    if d == 1 {
        let root = fq.neg(&gbar.coeffs[0]);
        let t = field.teichmuller(&root, prec)?;
        return Ok(IntPoly::new(field, vec![t.neg(), field.one(prec)]));
    }
    let big = field.with_unram_deg(field.unram_deg() * d)?;
    let big_fq = big.residue_field().clone();
    // root of gbar in the big residue field
    let gbar_big = crate::fq::FqPoly::new(
        &big_fq,
        gbar.coeffs
            .iter()
            .map(|c| fq.embed(c, &big_fq))
            .collect::<Result<Vec<_>>>()?,
    );
    let roots = gbar_big.roots(&big_fq);
    let mu = roots
        .into_iter()
        .next()
        .ok_or_else(|| Error::domain("residue factor has no root in its splitting field"))?;
    let t = big.teichmuller(&mu, prec)?;
    // Π_{j<d} (x − t^{q^j}) has coefficients in the base
    let q = field.q();
    let mut factors = Vec::with_capacity(d);
    let mut cur = t.clone();
    for _ in 0..d {
        factors.push(IntPoly::new(&big, vec![cur.neg(), big.one(prec)]));
        cur = cur.pow_u64(q).with_abs_prec(prec);
    }
    let mut prod = IntPoly::new(&big, vec![big.one(prec)]);
    for f in &factors {
        prod = prod.mul(f);
    }
    let mut coeffs = Vec::with_capacity(d + 1);
    for c in prod.coeffs() {
        let r = restrict_elt(field, c)?
            .ok_or_else(|| Error::domain("Teichmüller factor polynomial is not Galois-stable"))?;
        coeffs.push(r);
    }
    Ok(IntPoly::new(field, coeffs))
}

/// CRT idempotents of F[x]/(f) for the coprime factorization f = Π f_c,
/// refined by the idempotent Newton iteration e ← 3e² − 2e³.
fn crt_idempotents(
    ctx: &AlgebraCtx,
    f: &IntPoly,
    parts: &[IntPoly],
) -> Result<Vec<Vec<PadicElt>>> {
    let field = f.field().clone();
    let fq = field.residue_field().clone();
    let n = f.degree();
    let prec = f.min_prec();
    let mut out = Vec::with_capacity(parts.len());
    for c in parts {
        if parts.len() == 1 {
            let mut one = vec![field.zero(prec); n];
            one[0] = field.one(prec);
            out.push(one);
            continue;
        }
        // residue-level idempotent: u·h ≡ 1 mod c̄ with h = f/c
        let (h, rem) = f.divrem_monic(c);
        debug_assert!(rem.coeffs().iter().all(|x| x.is_zero_at_prec()));
        let cbar = c.residue_poly()?;
        let hbar = h.residue_poly()?;
        let (d, u, _) = hbar.xgcd(&cbar, &fq)?;
        if d.degree(&fq) != Some(0) {
            return Err(Error::domain("cluster parts are not coprime mod ϖ"));
        }
        // e0 = u·h mod f, lifted
        let uh = crate::fq::FqPoly::new(&fq, u.coeffs.clone()).mul(&hbar, &fq);
        let mut e: Vec<PadicElt> = (0..n)
            .map(|i| {
                let digit = uh.coeffs.get(i).cloned().unwrap_or_else(|| fq.zero());
                field.lift_residue(&digit, prec)
            })
            .collect();
        // Newton: e ← 3e² − 2e³
        let steps = (64 - (prec.max(2) as u64).leading_zeros()) + 2;
        for _ in 0..steps {
            let e2 = ctx.mul(&e, &e);
            let e3 = ctx.mul(&e2, &e);
            let three = field.from_i64(3, prec);
            let two = field.from_i64(2, prec);
            for i in 0..n {
                e[i] = e2[i].mul(&three).sub(&e3[i].mul(&two)).with_abs_prec(prec);
            }
        }
        let e2 = ctx.mul(&e, &e);
        for i in 0..n {
            if !e2[i].congruent(&e[i]) {
                return Err(Error::Precision { needed: prec + 8, have: prec });
            }
        }
        out.push(e);
    }
    // Σ e_c = 1
    let mut sum = vec![field.zero(prec); n];
    for e in &out {
        for i in 0..n {
            sum[i] = sum[i].add(&e[i]);
        }
    }
    let mut one = vec![field.zero(prec); n];
    one[0] = field.one(prec);
    for i in 0..n {
        if !sum[i].congruent(&one[i]) {
            return Err(Error::domain("idempotents do not sum to 1"));
        }
    }
    Ok(out)
}

/// Coordinates of the CRT idempotents of F[x]/(cp) for a coprime monic
/// factorization cp = Π parts (used by the centralizer-action generators).
pub fn crt_idempotent_coords(cp: &IntPoly, parts: &[IntPoly]) -> Result<Vec<Vec<PadicElt>>> {
    let ctx = AlgebraCtx::new(cp);
    crt_idempotents(&ctx, cp, parts)
}

fn one_minus_alg(ctx: &AlgebraCtx, e: &[PadicElt], prec: i64) -> Vec<PadicElt> {
    let n = ctx.n;
    let field = &ctx.field;
    (0..n)
        .map(|i| {
            if i == 0 {
                field.one(prec).sub(&e[0])
            } else {
                e[i].neg()
            }
        })
        .collect()
}

fn eval_poly_alg(ctx: &AlgebraCtx, p: &IntPoly, z: &[PadicElt]) -> Vec<PadicElt> {
    let n = ctx.n;
    let prec = z.iter().map(|c| c.abs_prec()).min().unwrap_or(0);
    let mut acc = vec![ctx.field.zero(prec); n];
    acc[0] = p.leading().clone();
    for c in p.coeffs().iter().rev().skip(1) {
        acc = ctx.mul(&acc, z);
        acc[0] = acc[0].add(c);
    }
    acc
}

fn alg_pow(ctx: &AlgebraCtx, z: &[PadicElt], mut e: u64) -> Vec<PadicElt> {
    let n = ctx.n;
    let field = &ctx.field;
    let prec = z.iter().map(|c| c.abs_prec()).min().unwrap_or(0);
    let mut acc = vec![field.zero(prec); n];
    acc[0] = field.one(prec);
    let mut base = z.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = ctx.mul(&acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = ctx.mul(&base, &base);
        }
    }
    acc
}

/// Inverse of a unit in the algebra, by solving the multiplication matrix.
fn alg_inverse(ctx: &AlgebraCtx, z: &[PadicElt]) -> Result<Vec<PadicElt>> {
    let n = ctx.n;
    let field = &ctx.field;
    let prec = z.iter().map(|c| c.abs_prec()).min().unwrap_or(0);
    // multiplication matrix M_z (columns: z·x^j)
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut xj = vec![field.zero(prec); n];
        xj[j] = field.one(prec);
        cols.push(ctx.mul(z, &xj));
    }
    let mut m = Matrix::zero(field, n, prec);
    for (j, col) in cols.iter().enumerate() {
        for i in 0..n {
            m.set(i, j, col[i].clone());
        }
    }
    let minv = m.inverse()?;
    // inverse = M^{-1}·e_0
    Ok((0..n).map(|i| minv.at(i, 0).clone()).collect())
}

fn eval_coords(ctx: &AlgebraCtx, gamma: &Matrix, coords: &[PadicElt]) -> Matrix {
    let field = &ctx.field;
    let n_mat = gamma.n();
    let prec = coords.iter().map(|c| c.abs_prec()).min().unwrap_or(0);
    let mut acc = Matrix::zero(field, n_mat, prec);
    let mut pw = Matrix::identity(field, n_mat, prec);
    for c in coords {
        acc = acc.add(&pw.scale(c));
        pw = pw.mul(gamma);
    }
    acc
}

fn coords_eq(a: &[PadicElt], b: &[PadicElt]) -> bool {
    a.iter().zip(b).all(|(x, y)| x.congruent(y))
}

// ------------------------- Harish-Chandra descent -------------------------

/// Per-cluster invariant bookkeeping for the descent identity
/// d_G(γ) = Σ_c d_{H_c}(u_c) and the Art/def identity specialized to GL_n.
#[derive(Clone, Debug, Serialize)]
pub struct HcDescentReport {
    pub d_g: i64,
    pub block_d_sum: i64,
    pub art_direct: i64,
    pub art_blocks: i64,
    pub kappa_def_direct: i64,
    pub kappa_def_blocks: i64,
    pub blocks: Vec<HcBlock>,
    pub identities_hold: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct HcBlock {
    pub degree: usize,
    pub d_block: i64,
    pub art_block: i64,
    pub kappa_def_block: i64,
}

pub fn hc_descent_invariants(gamma: &Matrix, prec: i64) -> Result<HcDescentReport> {
    let jordan = topological_jordan_group(gamma, prec)?;
    let (cp, _) = chevalley(gamma);
    let d = discriminant_valuations(gamma)?;
    let d_g = d
        .d_grp
        .ok_or_else(|| Error::domain("group discriminant undefined"))?;
    let art_direct = artin_conductor(&factorization_of_centralizer(&cp)?).art;
    let kappa = kottwitz(gamma)?;
    let kappa_def_direct = kappa_defect(gamma.n(), kappa);
    // cluster factorization of the characteristic polynomial by residue factors
    let field = gamma.field().clone();
    let fq = field.residue_field().clone();
    let fbar = cp.residue_poly()?;
    let rfact = fbar.factor(&fq)?;
    let parts: Vec<crate::fq::FqPoly> = rfact
        .iter()
        .map(|(g, m)| {
            let mut acc = crate::fq::FqPoly::new(&fq, vec![fq.one()]);
            for _ in 0..*m {
                acc = acc.mul(g, &fq);
            }
            acc
        })
        .collect();
    let lifted = hensel_split_parts(&cp, &parts)?;
    let mut blocks = Vec::new();
    let mut block_d_sum = 0i64;
    let mut art_blocks = 0i64;
    let mut kappa_def_blocks = 0i64;
    for fc in &lifted {
        let nc = fc.degree();
        // u restricted to the cluster block: reduce the algebra coordinates of
        // u modulo f_c and take the multiplication matrix on F[x]/(f_c)
        let u_poly = IntPoly::new(&field, jordan.u_coords.clone());
        let (_, u_mod) = u_poly.divrem_monic(fc);
        let sub_ctx = AlgebraCtx::new(fc);
        let mut u_coords: Vec<PadicElt> = u_mod.coeffs().to_vec();
        u_coords.resize(nc, field.zero(prec));
        let mut m = Matrix::zero(&field, nc, prec);
        for j in 0..nc {
            let mut xj = vec![field.zero(prec); nc];
            xj[j] = field.one(prec);
            let col = sub_ctx.mul(&u_coords, &xj);
            for i in 0..nc {
                m.set(i, j, col[i].clone());
            }
        }
        let dv = discriminant_valuations(&m)?;
        let d_block = dv
            .d_grp
            .ok_or_else(|| Error::domain("block discriminant undefined"))?;
        let (bcp, _) = chevalley(&m);
        let art_block = artin_conductor(&factorization_of_centralizer(&bcp)?).art;
        let kappa_block = kottwitz(&m)?;
        let kd_block = kappa_defect(nc, kappa_block);
        block_d_sum += d_block;
        art_blocks += art_block;
        kappa_def_blocks += kd_block;
        blocks.push(HcBlock { degree: nc, d_block, art_block, kappa_def_block: kd_block });
    }
    let identities_hold =
        d_g == block_d_sum && art_direct == art_blocks && kappa_def_direct == kappa_def_blocks;
    Ok(HcDescentReport {
        d_g,
        block_d_sum,
        art_direct,
        art_blocks,
        kappa_def_direct,
        kappa_def_blocks,
        blocks,
        identities_hold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qp(p: u64) -> LocalField {
        LocalField::qp(p)
    }

    #[test]
    fn chevalley_examples() {
        let f = qp(3);
        // companion matrix of f has charpoly f
        let poly = IntPoly::from_i64_coeffs(&f, &[5, -2, 1], 10);
        let m = poly.companion();
        let (cp, bounded) = chevalley(&m);
        assert!(bounded);
        for i in 0..=2 {
            assert!(cp.coeff(i).congruent(poly.coeff(i)));
        }
        // diag(p, 1) → x² − (1+p)x + p
        let d = Matrix::from_rows(
            &f,
            vec![
                vec![f.from_i64(3, 10), f.zero(10)],
                vec![f.zero(10), f.one(10)],
            ],
        );
        let (cp2, b2) = chevalley(&d);
        assert!(b2);
        assert!(cp2.coeff(0).congruent(&f.from_i64(3, 10)));
        assert!(cp2.coeff(1).congruent(&f.from_i64(-4, 10)));
    }

    #[test]
    fn kostant_examples() {
        let f = qp(5);
        let a = IntPoly::from_i64_coeffs(&f, &[-125, 0, 1], 10); // x² − p³
        let m = kostant_section(&a).unwrap();
        // [[0, p³], [1, 0]]
        assert!(m.at(0, 1).congruent(&f.from_i64(125, 10)));
        assert!(m.at(1, 0).congruent(&f.one(10)));
        let (cp, _) = chevalley(&m);
        for i in 0..=2 {
            assert!(cp.coeff(i).congruent(a.coeff(i)));
        }
        // non-integral a → domain error
        let bad = IntPoly::new(
            &f,
            vec![f.from_i64(1, 10).div(&f.from_i64(5, 10)).unwrap(), f.zero(10), f.one(10)],
        );
        assert!(kostant_section(&bad).is_err());
    }

    #[test]
    fn discriminant_examples() {
        // diag(a,b) → d_lie = 2·val(a−b)
        let f = qp(3);
        let m = Matrix::from_rows(
            &f,
            vec![
                vec![f.from_i64(1, 12), f.zero(12)],
                vec![f.zero(12), f.from_i64(10, 12)],
            ],
        );
        let d = discriminant_valuations(&m).unwrap();
        assert_eq!(d.d_lie, 4); // val(9)² = 4
        assert_eq!(d.d_grp, Some(4)); // unit det
        // charpoly x²−2 over Q_2: d_lie = 3, d_grp = 2
        let f2 = qp(2);
        let cp = IntPoly::from_i64_coeffs(&f2, &[-2, 0, 1], 14);
        let g = cp.companion();
        let d2 = discriminant_valuations(&g).unwrap();
        assert_eq!(d2.d_lie, 3);
        assert_eq!(d2.d_grp, Some(2));
    }

    #[test]
    fn kottwitz_and_defect() {
        let f2 = qp(2);
        // Π₂ = [[0,1],[p,0]] → κ = 1
        let pi2 = Matrix::from_rows(
            &f2,
            vec![
                vec![f2.zero(10), f2.one(10)],
                vec![f2.from_i64(2, 10), f2.zero(10)],
            ],
        );
        assert_eq!(kottwitz(&pi2).unwrap(), 1);
        // p·Id_n → n
        let pid = Matrix::identity(&f2, 3, 10).scale(&f2.from_i64(2, 10));
        assert_eq!(kottwitz(&pid).unwrap(), 3);
        assert_eq!(kappa_defect(2, 0), 0);
        assert_eq!(kappa_defect(2, 1), 1);
        assert_eq!(kappa_defect(4, 2), 2);
    }

    #[test]
    fn artin_examples() {
        let f5 = qp(5);
        // split: art 0, def 0
        let split = IntPoly::from_i64_coeffs(&f5, &[2, -3, 1], 12); // (x-1)(x-2)
        let rep = factorization_report(&split).unwrap();
        let a = artin_conductor(&rep);
        assert_eq!((a.art, a.torus_def, a.swan), (0, 0, 0));
        // x² − p: art 1, def 1, swan 0
        let tame = IntPoly::from_i64_coeffs(&f5, &[-5, 0, 1], 12);
        let a2 = artin_conductor(&factorization_report(&tame).unwrap());
        assert_eq!((a2.art, a2.torus_def, a2.swan), (1, 1, 0));
        // x² − 2 over Q_2: art 3, def 1, swan 2
        let f2 = qp(2);
        let wild = IntPoly::from_i64_coeffs(&f2, &[-2, 0, 1], 14);
        let a3 = artin_conductor(&factorization_report(&wild).unwrap());
        assert_eq!((a3.art, a3.torus_def, a3.swan), (3, 1, 2));
    }

    #[test]
    fn predict_examples() {
        // x² − p³ over Q_3: dim_lie = (3−1)/2 = 1
        let f3 = qp(3);
        let cp = IntPoly::from_i64_coeffs(&f3, &[-27, 0, 1], 16);
        let inv = conjugacy_invariants(&cp.companion(), ElementKind::Lie).unwrap();
        assert_eq!(inv.d_lie, 3);
        assert_eq!(inv.art, 1);
        assert_eq!(inv.dim_lie_pred, Some(1));
        // Π₂ over Q_2: dim_grp = (2 + 1 − 3)/2 = 0
        let f2 = qp(2);
        let pi2 = Matrix::from_rows(
            &f2,
            vec![
                vec![f2.zero(14), f2.one(14)],
                vec![f2.from_i64(2, 14), f2.zero(14)],
            ],
        );
        let inv2 = conjugacy_invariants(&pi2, ElementKind::Group).unwrap();
        assert_eq!(inv2.d_grp, Some(2));
        assert_eq!(inv2.kappa, Some(1));
        assert_eq!(inv2.kappa_def, Some(1));
        assert_eq!(inv2.art, 3);
        assert_eq!(inv2.dim_grp_pred, Some(0));
        assert!(!inv2.flags.bounded);
        assert!(inv2.flags.bounded_mod_center);
    }

    #[test]
    fn jordan_group_example() {
        // γ = diag(2, 1+3) over Q_3 → s = diag(−1, 1), u = diag(−2, 4)
        let f3 = qp(3);
        let g = Matrix::from_rows(
            &f3,
            vec![
                vec![f3.from_i64(2, 10), f3.zero(10)],
                vec![f3.zero(10), f3.from_i64(4, 10)],
            ],
        );
        let j = topological_jordan_group(&g, 10).unwrap();
        assert!(j.s.at(0, 0).congruent(&f3.from_i64(-1, 10)));
        assert!(j.s.at(1, 1).congruent(&f3.one(10)));
        assert!(j.u.at(0, 0).congruent(&f3.from_i64(-2, 10)));
        assert!(j.u.at(1, 1).congruent(&f3.from_i64(4, 10)));
        // idempotence: jordan of s is (s, Id)
        let js = topological_jordan_group(&j.s, 10).unwrap();
        for (a, b) in js.s.entries().iter().zip(j.s.entries()) {
            assert!(a.congruent(b));
        }
        let id = Matrix::identity(&f3, 2, 10);
        for (a, b) in js.u.entries().iter().zip(id.entries()) {
            assert!(a.congruent(b));
        }
    }

    #[test]
    fn jordan_lie_example() {
        // γ = diag(1+p, 2+p) over Q_3 → γ0 = diag(1, −1)
        let f3 = qp(3);
        let g = Matrix::from_rows(
            &f3,
            vec![
                vec![f3.from_i64(4, 10), f3.zero(10)],
                vec![f3.zero(10), f3.from_i64(5, 10)],
            ],
        );
        let j = topological_jordan_lie(&g, 10).unwrap();
        assert!(j.gamma0.at(0, 0).congruent(&f3.one(10)));
        assert!(j.gamma0.at(1, 1).congruent(&f3.from_i64(-1, 10)));
        // γ1 = diag(3, 6)
        assert!(j.gamma1.at(0, 0).congruent(&f3.from_i64(3, 10)));
        assert!(j.gamma1.at(1, 1).congruent(&f3.from_i64(6, 10)));
        // nilpotent-reduction input: γ0 = 0
        let nil = IntPoly::from_i64_coeffs(&f3, &[-3, 0, 1], 12).companion();
        let jn = topological_jordan_lie(&nil, 12).unwrap();
        assert!(jn.gamma0.entries().iter().all(|c| c.is_zero_at_prec()));
    }

    #[test]
    fn quasi_log_examples() {
        let f3 = qp(3);
        let id = Matrix::identity(&f3, 2, 8);
        assert!(quasi_log(&id).entries().iter().all(|c| c.is_zero_at_prec()));
        // Φ(Id + ϖX) = ϖX and two-sided inverse
        let x = IntPoly::from_i64_coeffs(&f3, &[-1, -1, 1], 8).companion();
        let arg = Matrix::identity(&f3, 2, 8).add(&x.scale(&f3.from_i64(3, 8)));
        let phi = quasi_log(&arg);
        for (a, b) in phi.entries().iter().zip(x.scale(&f3.from_i64(3, 8)).entries()) {
            assert!(a.congruent(b));
        }
    }

    #[test]
    fn hc_descent_two_clusters() {
        // block-diagonal with two residue clusters over Q_3
        let f3 = qp(3);
        let g = Matrix::from_rows(
            &f3,
            vec![
                vec![f3.from_i64(1 + 3, 14), f3.zero(14)],
                vec![f3.zero(14), f3.from_i64(2 + 3, 14)],
            ],
        );
        let rep = hc_descent_invariants(&g, 14).unwrap();
        assert!(rep.identities_hold);
        assert_eq!(rep.blocks.len(), 2);
        // cross-cluster roots contribute 0 to d_G
        assert_eq!(rep.d_g, 0);
    }
}
