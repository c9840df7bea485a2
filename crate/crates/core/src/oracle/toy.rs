//! Hand-built chain complexes small enough for exhaustive enumeration.

use crate::complex::{build_cubic_complex, to_chain_complex, ChainComplex, ChainKind, Lattice};
use crate::error::{Error, Result};
use crate::gf2::SparseGf2;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Named toy complexes, parseable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "code", content = "size")]
pub enum ToyCode {
    /// Four vertex spins coupled by one 4-body term; no syndrome bits.
    SingleTetrahedron,
    /// Two tetrahedra sharing a face: five spins, two terms.
    TwoTetrahedra,
    /// Open repetition code on `n` bits with `n - 1` parity checks and no
    /// stabilizers (so no spins).
    Repetition(usize),
    /// 2D toric code on an `L x L` torus: face spins, edge terms.
    Toric(usize),
    /// Random plaquette model complex on an `L^3` cubic torus.
    Rpim(usize),
}

impl ToyCode {
    pub fn build(self) -> Result<ChainComplex> {
        match self {
            ToyCode::SingleTetrahedron => single_tetrahedron(),
            ToyCode::TwoTetrahedra => two_tetrahedra(),
            ToyCode::Repetition(n) => repetition(n),
            ToyCode::Toric(l) => toric_2d(l),
            ToyCode::Rpim(l) => {
                let lattice = Lattice::Cubic(build_cubic_complex(l)?);
                to_chain_complex(&lattice, ChainKind::Rpim)
            }
        }
    }
}

impl fmt::Display for ToyCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ToyCode::SingleTetrahedron => write!(f, "tetrahedron"),
            ToyCode::TwoTetrahedra => write!(f, "two-tetrahedra"),
            ToyCode::Repetition(n) => write!(f, "repetition-{n}"),
            ToyCode::Toric(l) => write!(f, "toric-{l}"),
            ToyCode::Rpim(l) => write!(f, "rpim-{l}"),
        }
    }
}

impl FromStr for ToyCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let sized = |prefix: &str| -> Option<Result<usize>> {
            s.strip_prefix(prefix).map(|rest| {
                rest.parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad size in {s:?}")))
            })
        };
        if s == "tetrahedron" {
            return Ok(ToyCode::SingleTetrahedron);
        }
        if s == "two-tetrahedra" {
            return Ok(ToyCode::TwoTetrahedra);
        }
        if let Some(n) = sized("repetition-") {
            return Ok(ToyCode::Repetition(n?));
        }
        if let Some(n) = sized("toric-") {
            return Ok(ToyCode::Toric(n?));
        }
        if let Some(n) = sized("rpim-") {
            return Ok(ToyCode::Rpim(n?));
        }
        Err(Error::InvalidParameter(format!(
            "unknown toy code {s:?}; expected tetrahedron, two-tetrahedra, repetition-N, toric-L or rpim-L"
        )))
    }
}

pub fn single_tetrahedron() -> Result<ChainComplex> {
    let d2 = SparseGf2::from_columns(1, vec![vec![0]; 4]);
    let d1 = SparseGf2::zero(0, 1);
    ChainComplex::new(ChainKind::Custom, d2, d1)
}

/// Vertices 0, 1, 2 form the shared face; 3 and 4 are the apexes.
pub fn two_tetrahedra() -> Result<ChainComplex> {
    let d2 = SparseGf2::from_columns(
        2,
        vec![vec![0, 1], vec![0, 1], vec![0, 1], vec![0], vec![1]],
    );
    let d1 = SparseGf2::zero(0, 2);
    ChainComplex::new(ChainKind::Custom, d2, d1)
}

pub fn repetition(n: usize) -> Result<ChainComplex> {
    if n < 2 {
        return Err(Error::InvalidParameter("repetition code needs n >= 2".into()));
    }
    let d2 = SparseGf2::zero(n, 0);
    let d1 = SparseGf2::from_columns(
        n - 1,
        (0..n)
            .map(|i| {
                let mut c = Vec::new();
                if i > 0 {
                    c.push(i - 1);
                }
                if i + 1 < n {
                    c.push(i);
                }
                c
            })
            .collect(),
    );
    ChainComplex::new(ChainKind::Custom, d2, d1)
}

/// Edge `h(x, y)` has index `2 (y L + x)`, `v(x, y)` the next one.
pub fn toric_2d(l: usize) -> Result<ChainComplex> {
    if l < 2 {
        return Err(Error::InvalidParameter("toric code needs L >= 2".into()));
    }
    let site = |x: usize, y: usize| (y % l) * l + (x % l);
    let h = |x: usize, y: usize| 2 * site(x, y);
    let v = |x: usize, y: usize| 2 * site(x, y) + 1;
    let mut faces = Vec::with_capacity(l * l);
    let mut edges = vec![Vec::new(); 2 * l * l];
    for y in 0..l {
        for x in 0..l {
            faces.push(vec![h(x, y), h(x, y + 1), v(x, y), v(x + 1, y)]);
            edges[h(x, y)] = vec![site(x, y), site(x + 1, y)];
            edges[v(x, y)] = vec![site(x, y), site(x, y + 1)];
        }
    }
    let d2 = SparseGf2::from_columns(2 * l * l, faces);
    let d1 = SparseGf2::from_columns(l * l, edges);
    ChainComplex::new(ChainKind::Custom, d2, d1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        let t = single_tetrahedron().unwrap();
        assert_eq!((t.dim2(), t.dim1(), t.dim0()), (4, 1, 0));
        let r = repetition(3).unwrap();
        assert_eq!((r.dim2(), r.dim1(), r.dim0()), (0, 3, 2));
        let k = toric_2d(3).unwrap();
        assert_eq!((k.dim2(), k.dim1(), k.dim0()), (9, 18, 9));
        let p = ToyCode::Rpim(2).build().unwrap();
        assert_eq!((p.dim2(), p.dim1(), p.dim0()), (24, 24, 8));
    }

    #[test]
    fn names_round_trip() {
        for c in [
            ToyCode::SingleTetrahedron,
            ToyCode::TwoTetrahedra,
            ToyCode::Repetition(5),
            ToyCode::Toric(2),
            ToyCode::Rpim(2),
        ] {
            assert_eq!(c.to_string().parse::<ToyCode>().unwrap(), c);
        }
        assert!("cube".parse::<ToyCode>().is_err());
    }
}
