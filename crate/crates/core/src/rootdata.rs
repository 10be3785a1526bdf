//! Static structural data for irreducible root systems: bad primes, torsion
//! primes, fundamental groups of adjoint groups, Weyl group orders, and the
//! good-prime / datum-torsion predicates. Pure lookup tables with invariant
//! cross-checks; the computations elsewhere use these facts only as hypothesis
//! gates.

use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Series {
    A,
    B,
    C,
    D,
    E6,
    E7,
    E8,
    F4,
    G2,
}

/// Isogeny tag for type A.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum IsogenyA {
    Gl,
    Sl,
    Pgl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RootTypeDescriptor {
    pub series: Series,
    /// Rank parameter (ignored for the exceptional series).
    pub rank: usize,
    pub isogeny: Option<IsogenyA>,
}

impl RootTypeDescriptor {
    pub fn new(series: Series, rank: usize) -> Result<Self> {
        let ok = match series {
            Series::A => rank >= 1,
            Series::B => rank >= 2,
            Series::C => rank >= 3,
            Series::D => rank >= 4,
            Series::E6 => rank == 6,
            Series::E7 => rank == 7,
            Series::E8 => rank == 8,
            Series::F4 => rank == 4,
            Series::G2 => rank == 2,
        };
        if !ok {
            return Err(Error::domain(format!(
                "invalid rank {rank} for series {series:?}"
            )));
        }
        Ok(RootTypeDescriptor { series, rank, isogeny: None })
    }

    pub fn type_a(rank: usize, isogeny: IsogenyA) -> Result<Self> {
        let mut d = Self::new(Series::A, rank)?;
        d.isogeny = Some(isogeny);
        Ok(d)
    }

    pub fn name(&self) -> String {
        match self.series {
            Series::A => format!("A{}", self.rank),
            Series::B => format!("B{}", self.rank),
            Series::C => format!("C{}", self.rank),
            Series::D => format!("D{}", self.rank),
            Series::E6 => "E6".into(),
            Series::E7 => "E7".into(),
            Series::E8 => "E8".into(),
            Series::F4 => "F4".into(),
            Series::G2 => "G2".into(),
        }
    }
}

/// Bad primes of the irreducible root system.
pub fn bad_primes(t: &RootTypeDescriptor) -> Vec<u64> {
    match t.series {
        Series::A => vec![],
        Series::B | Series::C | Series::D => vec![2],
        Series::E6 | Series::E7 | Series::F4 | Series::G2 => vec![2, 3],
        Series::E8 => vec![2, 3, 5],
    }
}

/// Torsion primes of the irreducible root system.
pub fn torsion_primes(t: &RootTypeDescriptor) -> Vec<u64> {
    match t.series {
        Series::A | Series::C => vec![],
        Series::B => {
            if t.rank >= 3 {
                vec![2]
            } else {
                vec![]
            }
        }
        Series::D | Series::G2 => vec![2],
        Series::E6 | Series::E7 | Series::F4 => vec![2, 3],
        Series::E8 => vec![2, 3, 5],
    }
}

/// Finite abelian group descriptor as a list of cyclic orders.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AbelianGroup(pub Vec<u64>);

impl AbelianGroup {
    pub fn order(&self) -> u64 {
        self.0.iter().product::<u64>().max(1)
    }
    pub fn label(&self) -> String {
        if self.0.is_empty() {
            "0".into()
        } else {
            self.0
                .iter()
                .map(|n| format!("Z/{}", n))
                .collect::<Vec<_>>()
                .join(" x ")
        }
    }
}

/// π₁ of the adjoint group of the given type. For A the rank parameter r
/// means A_r, so π₁ = Z/(r+1).
pub fn pi1_adjoint(t: &RootTypeDescriptor) -> AbelianGroup {
    match t.series {
        Series::A => AbelianGroup(vec![(t.rank + 1) as u64]),
        Series::B | Series::C | Series::E7 => AbelianGroup(vec![2]),
        Series::D => {
            if t.rank % 2 == 0 {
                AbelianGroup(vec![2, 2])
            } else {
                AbelianGroup(vec![4])
            }
        }
        Series::E6 => AbelianGroup(vec![3]),
        Series::E8 | Series::F4 | Series::G2 => AbelianGroup(vec![]),
    }
}

/// Order of the Weyl group of the irreducible root system.
pub fn weyl_order(t: &RootTypeDescriptor) -> u128 {
    fn fact(n: usize) -> u128 {
        (1..=n as u128).product::<u128>().max(1)
    }
    match t.series {
        Series::A => fact(t.rank + 1),
        Series::B | Series::C => (1u128 << t.rank) * fact(t.rank),
        Series::D => (1u128 << (t.rank - 1)) * fact(t.rank),
        Series::G2 => 12,
        Series::F4 => 1152,
        Series::E6 => 51840,
        Series::E7 => 2903040,
        Series::E8 => 696729600,
    }
}

/// p is good ⟺ p is not a bad prime.
pub fn is_good(p: u64, t: &RootTypeDescriptor) -> bool {
    !bad_primes(t).contains(&p)
}

/// Torsion primes for the root *datum*: the torsion primes of the system plus
/// the primes dividing the order of ker(G^sc → G), tabulated for the type-A
/// isogeny tags (the kernel has order 1 for GL and SL tags, n for PGL_n).
pub fn torsion_for_datum(p: u64, t: &RootTypeDescriptor) -> bool {
    if torsion_primes(t).contains(&p) {
        return true;
    }
    match (t.series, t.isogeny) {
        (Series::A, Some(IsogenyA::Pgl)) => ((t.rank + 1) as u64) % p == 0,
        _ => false,
    }
}

/// Tame / essentially tame gate: a group splitting over a ramified extension
/// of degree e is tamely ramified iff p ∤ e; essential tameness additionally
/// allows an unramified Weil-restriction layer, which does not change the
/// p ∤ e condition on the ramified part.
pub fn is_essentially_tame(p: u64, ramified_degree: u64) -> bool {
    ramified_degree % p != 0
}

/// All descriptors used by the invariant tables (ranks capped for the
/// classical series).
pub fn standard_descriptors(max_rank: usize) -> Vec<RootTypeDescriptor> {
    let mut out = Vec::new();
    for r in 1..=max_rank {
        out.push(RootTypeDescriptor::new(Series::A, r).unwrap());
    }
    for r in 2..=max_rank {
        out.push(RootTypeDescriptor::new(Series::B, r).unwrap());
    }
    for r in 3..=max_rank {
        out.push(RootTypeDescriptor::new(Series::C, r).unwrap());
    }
    for r in 4..=max_rank {
        out.push(RootTypeDescriptor::new(Series::D, r).unwrap());
    }
    out.push(RootTypeDescriptor::new(Series::E6, 6).unwrap());
    out.push(RootTypeDescriptor::new(Series::E7, 7).unwrap());
    out.push(RootTypeDescriptor::new(Series::E8, 8).unwrap());
    out.push(RootTypeDescriptor::new(Series::F4, 4).unwrap());
    out.push(RootTypeDescriptor::new(Series::G2, 2).unwrap());
    out
}

/// One TSV row per descriptor: name, bad primes, torsion primes, π₁(G_ad),
/// Weyl order.
pub fn tables_tsv(max_rank: usize) -> String {
    let mut out = String::from("type\tbad_primes\ttorsion_primes\tpi1_adjoint\tweyl_order\n");
    for d in standard_descriptors(max_rank) {
        let bad = bad_primes(&d)
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let tor = torsion_primes(&d)
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&format!(
            "{}\t{{{}}}\t{{{}}}\t{}\t{}\n",
            d.name(),
            bad,
            tor,
            pi1_adjoint(&d).label(),
            weyl_order(&d)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_examples() {
        let a5 = RootTypeDescriptor::new(Series::A, 5).unwrap();
        assert!(bad_primes(&a5).is_empty());
        let b3 = RootTypeDescriptor::new(Series::B, 3).unwrap();
        assert_eq!(bad_primes(&b3), vec![2]);
        let e8 = RootTypeDescriptor::new(Series::E8, 8).unwrap();
        assert_eq!(bad_primes(&e8), vec![2, 3, 5]);
        let c4 = RootTypeDescriptor::new(Series::C, 4).unwrap();
        assert!(torsion_primes(&c4).is_empty());
        let g2 = RootTypeDescriptor::new(Series::G2, 2).unwrap();
        assert_eq!(torsion_primes(&g2), vec![2]);
        let e7 = RootTypeDescriptor::new(Series::E7, 7).unwrap();
        assert_eq!(torsion_primes(&e7), vec![2, 3]);
        // π₁: A_{n−1} → Z/n; D_n even → Z/2×Z/2; E8/F4/G2 → 0
        let a = RootTypeDescriptor::new(Series::A, 3).unwrap();
        assert_eq!(pi1_adjoint(&a).label(), "Z/4");
        let d4 = RootTypeDescriptor::new(Series::D, 4).unwrap();
        assert_eq!(pi1_adjoint(&d4).label(), "Z/2 x Z/2");
        let d5 = RootTypeDescriptor::new(Series::D, 5).unwrap();
        assert_eq!(pi1_adjoint(&d5).label(), "Z/4");
        assert_eq!(pi1_adjoint(&e8).label(), "0");
        // good/datum examples
        assert!(is_good(7, &e8));
        let pgl2 = RootTypeDescriptor::type_a(1, IsogenyA::Pgl).unwrap();
        assert!(torsion_for_datum(2, &pgl2));
        let sl3 = RootTypeDescriptor::type_a(2, IsogenyA::Sl).unwrap();
        assert!(!torsion_for_datum(3, &sl3));
        let pgl3 = RootTypeDescriptor::type_a(2, IsogenyA::Pgl).unwrap();
        assert!(torsion_for_datum(3, &pgl3));
        // invalid rank
        assert!(RootTypeDescriptor::new(Series::C, 2).is_err());
    }

    #[test]
    fn torsion_subset_of_bad_and_weyl_divisibility() {
        for d in standard_descriptors(9) {
            let bad = bad_primes(&d);
            for t in torsion_primes(&d) {
                assert!(bad.contains(&t), "torsion ⊄ bad for {}", d.name());
            }
            let w = weyl_order(&d);
            for b in bad {
                assert_eq!(w % b as u128, 0, "bad prime {} ∤ |W| for {}", b, d.name());
            }
        }
    }
}
