//! Supertranslation algebras, their Chevalley–Eilenberg algebras and Lie
//! algebra cohomology as presented R-modules.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::graded::{fmt_q, parse_q, qfrac, qi, Bidegree, GradedSpace, SVec, SparseMat, Q};
use crate::poly::{enumerate_basis, Derivation, GenKind, GeneratorTable, Mono, SuperPoly};
use crate::resolution::homology_modules;
use crate::rmodule::{LamModule, Presentation, RPoly};
use crate::Error;

/// Brackets [d_α, d_β] = f^μ_{αβ} e_μ; `f[μ][α][β]`, symmetric in α, β.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraSpec {
    pub name: String,
    pub n1: usize,
    pub n2: usize,
    pub f: Vec<Vec<Vec<Q>>>,
    pub labels: BTreeMap<String, String>,
}

/// On-disk form: indices are 1-based.
#[derive(Serialize, Deserialize)]
struct SpecFile {
    #[serde(default)]
    name: String,
    n1: usize,
    n2: usize,
    f: Vec<(usize, usize, usize, String)>,
    #[serde(default)]
    labels: BTreeMap<String, String>,
}

impl AlgebraSpec {
    /// Builds f from (μ, α, β, value) entries (0-based), completing symmetry.
    pub fn from_entries(name: &str, n1: usize, n2: usize, entries: &[(usize, usize, usize, Q)]) -> Result<Self, Error> {
        if n1 + n2 == 0 {
            return Err(Error::Schema("algebra has no generators".into()));
        }
        let mut f = vec![vec![vec![Q::zero(); n1]; n1]; n2];
        let mut set = vec![vec![vec![false; n1]; n1]; n2];
        for (mu, a, b, x) in entries {
            let (mu, a, b) = (*mu, *a, *b);
            if mu >= n2 || a >= n1 || b >= n1 {
                return Err(Error::Schema(format!("index ({mu},{a},{b}) out of range")));
            }
            for (i, j) in [(a, b), (b, a)] {
                if set[mu][i][j] && f[mu][i][j] != *x {
                    return Err(Error::AsymmetricStructureConstants(format!(
                        "f^{}_{}{} given as {} and {}",
                        mu + 1,
                        i + 1,
                        j + 1,
                        fmt_q(&f[mu][i][j]),
                        fmt_q(x)
                    )));
                }
                f[mu][i][j] = x.clone();
                set[mu][i][j] = true;
            }
        }
        Ok(AlgebraSpec { name: name.into(), n1, n2, f, labels: BTreeMap::new() })
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let sf: SpecFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        let mut entries = Vec::new();
        for (mu, a, b, x) in &sf.f {
            if *mu == 0 || *a == 0 || *b == 0 {
                return Err(Error::Schema("indices are 1-based".into()));
            }
            entries.push((mu - 1, a - 1, b - 1, parse_q(x)?));
        }
        let mut s = AlgebraSpec::from_entries(&sf.name, sf.n1, sf.n2, &entries)?;
        s.labels = sf.labels;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        let mut f = Vec::new();
        for mu in 0..self.n2 {
            for a in 0..self.n1 {
                for b in a..self.n1 {
                    if !self.f[mu][a][b].is_zero() {
                        f.push((mu + 1, a + 1, b + 1, fmt_q(&self.f[mu][a][b])));
                    }
                }
            }
        }
        let sf = SpecFile { name: self.name.clone(), n1: self.n1, n2: self.n2, f, labels: self.labels.clone() };
        serde_json::to_string_pretty(&sf).unwrap()
    }

    pub fn is_symmetric(&self) -> bool {
        self.f.iter().all(|m| (0..self.n1).all(|a| (0..self.n1).all(|b| m[a][b] == m[b][a])))
    }

    /// The quadrics λ^α f^μ_{αβ} λ^β.
    pub fn ideal(&self) -> Vec<RPoly> {
        (0..self.n2)
            .map(|mu| {
                let mut p = RPoly::new();
                for a in 0..self.n1 {
                    for b in 0..self.n1 {
                        let x = &self.f[mu][a][b];
                        if x.is_zero() {
                            continue;
                        }
                        let mut m = vec![0u32; self.n1];
                        m[a] += 1;
                        m[b] += 1;
                        *p.entry(m).or_insert_with(Q::zero) += x;
                    }
                }
                p.retain(|_, c| !c.is_zero());
                p
            })
            .collect()
    }
}

/// Preset names accepted by [`preset`].
pub const PRESETS: &[&str] = &["3dN1", "qm1", "qm2", "qm2-lc", "4dN1", "pure1", "pure3", "pure4"];

/// Standard algebras. `qmN` has d v = Σ (λ^α)²; `qm2-lc` is the N=2 case in
/// the light-cone basis d v = λ¹λ²; `pureN` is N translations without odd part.
pub fn preset(name: &str) -> Result<AlgebraSpec, Error> {
    let mut s = match name {
        "3dN1" => AlgebraSpec::from_entries(
            name,
            2,
            3,
            &[(0, 0, 0, qi(1)), (1, 0, 1, qfrac(1, 2)), (2, 1, 1, qi(1))],
        )?,
        "qm2-lc" => AlgebraSpec::from_entries(name, 2, 1, &[(0, 0, 1, qfrac(1, 2))])?,
        "4dN1" => {
            // λ1, λ2 = λ^α; λ3, λ4 = λ̄^α̇; v index (α, α̇) ↦ 2α + α̇
            let mut e = Vec::new();
            for a in 0..2 {
                for ad in 0..2 {
                    e.push((2 * a + ad, a, 2 + ad, qi(1)));
                }
            }
            AlgebraSpec::from_entries(name, 4, 4, &e)?
        }
        _ if name.starts_with("qm") => {
            let n: usize = name[2..].parse().map_err(|_| Error::Unknown(name.into()))?;
            let e: Vec<_> = (0..n).map(|a| (0, a, a, qi(1))).collect();
            AlgebraSpec::from_entries(name, n, 1, &e)?
        }
        _ if name.starts_with("pure") => {
            let n: usize = name[4..].parse().map_err(|_| Error::Unknown(name.into()))?;
            AlgebraSpec::from_entries(name, 0, n, &[])?
        }
        _ => return Err(Error::Unknown(name.into())),
    };
    if s.name == "4dN1" {
        for (k, l) in ["λ1", "λ2", "λ̄1", "λ̄2"].iter().enumerate() {
            s.labels.insert(format!("l{}", k + 1), l.to_string());
        }
    }
    Ok(s)
}

#[derive(Clone, Debug)]
pub struct CEAlgebra {
    pub spec: AlgebraSpec,
    /// λ¹..λⁿ¹ then v¹..vⁿ².
    pub table: Arc<GeneratorTable>,
    pub d: Derivation,
    pub ideal: Vec<RPoly>,
}

pub fn build_ce(spec: &AlgebraSpec) -> Result<CEAlgebra, Error> {
    if !spec.is_symmetric() {
        return Err(Error::AsymmetricStructureConstants(spec.name.clone()));
    }
    let table = Arc::new(GeneratorTable::standard(&[(GenKind::Lambda, "l", spec.n1), (GenKind::V, "v", spec.n2)]));
    let ideal = spec.ideal();
    let mut images = vec![SuperPoly::zero(&table); spec.n1];
    for q in &ideal {
        let mut p = SuperPoly::zero(&table);
        for (m, c) in q {
            let mut mm = m.clone();
            mm.resize(table.len(), 0);
            p.add_term(mm, c.clone());
        }
        images.push(p);
    }
    let d = Derivation { table: table.clone(), images, shift: Bidegree::new(0, 1) };
    for (i, img) in d.images.iter().enumerate() {
        let dd = d.apply(img)?;
        if !dd.is_zero() {
            return Err(Error::DgConditionViolated { generator: i, residual: dd.render() });
        }
    }
    Ok(CEAlgebra { spec: spec.clone(), table, d, ideal })
}

/// Truncated C•(n) as a complex: basis monomials, d as a sparse matrix and
/// the λ multiplications.
#[derive(Clone, Debug)]
pub struct CEComplex {
    pub space: GradedSpace,
    pub monos: Vec<Mono>,
    pub index: HashMap<Mono, usize>,
    pub d: SparseMat,
    pub lam: Vec<SparseMat>,
}

impl CEAlgebra {
    pub fn complex(&self, cutoff: i64) -> Result<CEComplex, Error> {
        let (space, monos) = enumerate_basis(&self.table, (0, cutoff), (i64::MIN / 4, i64::MAX / 4))?;
        let index: HashMap<Mono, usize> = monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let n = monos.len();
        let mut d = SparseMat::zero(n, n);
        for (j, m) in monos.iter().enumerate() {
            let img = self.d.apply(&SuperPoly::mono(&self.table, m.clone(), qi(1)))?;
            d.cols[j] = img.terms.iter().map(|(mm, c)| (index[mm], c.clone())).collect();
        }
        let mut lam = Vec::new();
        for a in 0..self.spec.n1 {
            let mut l = SparseMat::zero(n, n);
            for (j, m) in monos.iter().enumerate() {
                let mut mm = m.clone();
                mm[a] += 1;
                if let Some(&i) = index.get(&mm) {
                    l.cols[j] = SVec::from([(i, qi(1))]);
                }
            }
            lam.push(l);
        }
        Ok(CEComplex { space, monos, index, d, lam })
    }

    /// Element of C•(n) from coordinates in a truncated complex.
    pub fn poly_of(&self, c: &CEComplex, v: &SVec) -> SuperPoly {
        let mut p = SuperPoly::zero(&self.table);
        for (&i, x) in v {
            p.add_term(c.monos[i].clone(), x.clone());
        }
        p
    }
}

#[derive(Clone, Debug)]
pub struct CohomologyTable {
    pub cutoff: i64,
    /// dim H^k per weight 0..=cutoff, keyed by totalized degree k = d − w.
    pub dims: BTreeMap<i64, Vec<usize>>,
    /// Cocycle representatives with their bidegrees.
    pub reps: Vec<(Bidegree, SuperPoly)>,
    /// H^k as truncated λ-modules.
    pub modules: BTreeMap<i64, LamModule>,
    /// Presentations extracted from the modules, valid up to `cutoff`.
    pub presentations: BTreeMap<i64, Presentation>,
}

pub fn lie_cohomology(ce: &CEAlgebra, cutoff: i64) -> Result<CohomologyTable, Error> {
    let cx = ce.complex(cutoff)?;
    let h = homology_modules(&cx.space, &cx.d, &cx.lam, cutoff)?;
    let c = &h.contraction;
    let reps = c.reps.iter().zip(&c.small_deg).map(|(r, b)| (*b, ce.poly_of(&cx, r))).collect();
    Ok(CohomologyTable { cutoff, dims: h.dims, reps, modules: h.modules, presentations: h.presentations })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CiReport {
    pub cutoff: i64,
    pub concentrated_in_degree_zero: bool,
    /// First (k, w) with H^k_w ≠ 0 and k < 0.
    pub witness: Option<(i64, i64)>,
}

/// Whether H^k vanishes for k < 0 up to the cutoff (a certificate, not a proof).
pub fn is_complete_intersection_window(ce: &CEAlgebra, cutoff: i64) -> Result<CiReport, Error> {
    let t = lie_cohomology(ce, cutoff)?;
    let witness = t
        .dims
        .iter()
        .filter(|(&k, _)| k < 0)
        .flat_map(|(&k, v)| v.iter().enumerate().filter(|(_, &x)| x > 0).map(move |(w, _)| (k, w as i64)))
        .min_by_key(|&(_, w)| w);
    Ok(CiReport { cutoff, concentrated_in_degree_zero: witness.is_none(), witness })
}
