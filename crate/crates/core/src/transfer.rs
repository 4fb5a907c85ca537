//! Operators with coefficients in Q[δ], staged contractions, the
//! perturbation lemma and transfer of the module structure ρ.

use std::collections::BTreeMap;

use num_traits::Zero;
use rayon::prelude::*;

use crate::graded::{fmt_q, qi, svec_add_scaled, Bidegree, Contraction, GradedSpace, SVec, SparseMat, Q};
use crate::Error;

/// Exponents of δ_1..δ_{n2}.
pub type DMon = Vec<u32>;

/// Σ_m δ^m ⊗ v_m.
pub type DVec = BTreeMap<DMon, SVec>;

pub fn dmon_order(m: &DMon) -> u32 {
    m.iter().sum()
}

pub fn dmon_mul(a: &DMon, b: &DMon) -> DMon {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn dvec_const(n2: usize, v: SVec) -> DVec {
    if v.is_empty() {
        DVec::new()
    } else {
        DVec::from([(vec![0; n2], v)])
    }
}

pub fn dvec_add_scaled(acc: &mut DVec, v: &DVec, c: &Q) {
    for (m, x) in v {
        let e = acc.entry(m.clone()).or_default();
        svec_add_scaled(e, x, c);
        if e.is_empty() {
            acc.remove(m);
        }
    }
}

pub fn dvec_scale(v: &DVec, c: &Q) -> DVec {
    let mut out = DVec::new();
    dvec_add_scaled(&mut out, v, c);
    out
}

pub fn dvec_is_zero(v: &DVec) -> bool {
    v.values().all(|x| x.is_empty())
}

/// Constant-coefficient map applied componentwise.
pub fn apply_const(m: &SparseMat, v: &DVec) -> DVec {
    let mut out = DVec::new();
    for (mon, x) in v {
        let y = m.apply(x);
        if !y.is_empty() {
            out.insert(mon.clone(), y);
        }
    }
    out
}

/// Linear operator Σ_m δ^m A_m.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DOp {
    pub n2: usize,
    pub rows: usize,
    pub cols: usize,
    pub terms: BTreeMap<DMon, SparseMat>,
}

impl DOp {
    pub fn zero(n2: usize, rows: usize, cols: usize) -> DOp {
        DOp { n2, rows, cols, terms: BTreeMap::new() }
    }

    /// Adds x · δ^m e_row ⊗ e_col^*.
    pub fn add_entry(&mut self, m: DMon, row: usize, col: usize, x: Q) {
        let (r, c) = (self.rows, self.cols);
        let mat = self.terms.entry(m).or_insert_with(|| SparseMat::zero(r, c));
        crate::graded::add_entry(&mut mat.cols[col], row, x);
    }

    pub fn apply(&self, v: &DVec) -> DVec {
        let mut out = DVec::new();
        for (m, a) in &self.terms {
            for (vm, x) in v {
                let y = a.apply(x);
                if y.is_empty() {
                    continue;
                }
                dvec_add_scaled(&mut out, &DVec::from([(dmon_mul(m, vm), y)]), &qi(1));
            }
        }
        out
    }

    pub fn apply_basis(&self, j: usize) -> DVec {
        self.apply(&dvec_const(self.n2, SVec::from([(j, qi(1))])))
    }

    pub fn add(&self, o: &DOp) -> DOp {
        let mut out = self.clone();
        for (m, a) in &o.terms {
            let e = out.terms.entry(m.clone()).or_insert_with(|| SparseMat::zero(self.rows, self.cols));
            *e = e.add(a);
        }
        out.prune();
        out
    }

    pub fn scale(&self, c: &Q) -> DOp {
        let mut out = self.clone();
        for a in out.terms.values_mut() {
            for col in a.cols.iter_mut() {
                *col = crate::graded::svec_scale(col, c);
            }
        }
        out.prune();
        out
    }

    pub fn prune(&mut self) {
        self.terms.retain(|_, a| !a.is_zero());
    }

    pub fn order0(&self) -> SparseMat {
        self.terms.get(&vec![0; self.n2]).cloned().unwrap_or_else(|| SparseMat::zero(self.rows, self.cols))
    }

    /// Keeps the terms for which `keep(mon, row, col)` holds.
    pub fn filter(&self, keep: impl Fn(&DMon, usize, usize) -> bool) -> DOp {
        let mut out = DOp::zero(self.n2, self.rows, self.cols);
        for (m, a) in &self.terms {
            let mut b = SparseMat::zero(a.rows, a.cols.len());
            for (j, c) in a.cols.iter().enumerate() {
                b.cols[j] = c.iter().filter(|(&i, _)| keep(m, i, j)).map(|(&i, x)| (i, x.clone())).collect();
            }
            if !b.is_zero() {
                out.terms.insert(m.clone(), b);
            }
        }
        out
    }

    /// self ∘ o
    pub fn compose(&self, o: &DOp) -> DOp {
        let cols: Vec<DVec> = (0..o.cols).into_par_iter().map(|j| self.apply(&o.apply_basis(j))).collect();
        DOp::from_columns(self.n2, self.rows, &cols)
    }

    pub fn from_columns(n2: usize, rows: usize, cols: &[DVec]) -> DOp {
        let mut out = DOp::zero(n2, rows, cols.len());
        for (j, v) in cols.iter().enumerate() {
            for (m, x) in v {
                for (&i, c) in x {
                    out.add_entry(m.clone(), i, j, c.clone());
                }
            }
        }
        out.prune();
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|a| a.is_zero())
    }

    /// Largest δ-order present.
    pub fn max_order(&self) -> u32 {
        self.terms.keys().map(dmon_order).max().unwrap_or(0)
    }

    /// Entry (row, col) as a rendered δ-polynomial.
    pub fn render_entry(&self, row: usize, col: usize, names: &[String]) -> String {
        let mut parts = Vec::new();
        for (m, a) in self.terms.iter().rev() {
            if let Some(x) = a.cols[col].get(&row) {
                let mono: Vec<String> = m
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| if e == 1 { names[i].clone() } else { format!("{}^{}", names[i], e) })
                    .collect();
                if mono.is_empty() {
                    parts.push(fmt_q(x));
                } else {
                    parts.push(format!("{} {}", fmt_q(x), mono.join(" ")));
                }
            }
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// Graded space with a δ-polynomial differential and an integer tag per
/// basis vector (the provenance degree k).
#[derive(Clone, Debug)]
pub struct DComplex {
    pub n2: usize,
    pub space: GradedSpace,
    pub tag: Vec<i64>,
    pub d: DOp,
}

impl DComplex {
    pub fn degs(&self) -> Vec<Bidegree> {
        self.space.elems.iter().map(|e| e.deg).collect()
    }

    /// d ∘ d = 0, reporting the first failing column.
    pub fn check_square_zero(&self) -> Result<(), Error> {
        let bad = (0..self.d.cols)
            .into_par_iter()
            .find_first(|&j| !dvec_is_zero(&self.d.apply(&self.d.apply_basis(j))));
        match bad {
            Some(j) => Err(Error::Invariant(format!(
                "differential does not square to zero on basis {j} at {}",
                self.space.deg(j)
            ))),
            None => Ok(()),
        }
    }
}

/// Iteration bound for the geometric series; exceeding it means the
/// perturbation is not nilpotent on the data.
pub const SERIES_CAP: usize = 512;

/// One contraction onto the cohomology of a chosen part d₀ of the
/// differential, with the rest treated as a perturbation.
#[derive(Clone, Debug)]
pub struct Stage {
    pub c: Contraction,
    pub pert: DOp,
    pub small: DComplex,
    pub big_len: usize,
}

impl Stage {
    /// `select(mon, row_tag, col_tag)` picks the entries that form d₀;
    /// only δ-order-0 entries may be selected.
    pub fn build(cx: &DComplex, select: impl Fn(&DMon, i64, i64) -> bool + Sync) -> Result<Stage, Error> {
        let zero: DMon = vec![0; cx.n2];
        let d0 = cx.d.filter(|m, i, j| *m == zero && select(m, cx.tag[i], cx.tag[j])).order0();
        Stage::build_with(cx, d0)
    }

    /// Contracts onto the cohomology of an explicit constant part `d0` of the
    /// differential.
    pub fn build_with(cx: &DComplex, d0: SparseMat) -> Result<Stage, Error> {
        let mut d0op = DOp::zero(cx.n2, cx.d.rows, cx.d.cols);
        d0op.terms.insert(vec![0; cx.n2], d0.clone());
        let pert = cx.d.add(&d0op.scale(&qi(-1)));
        if !d0.compose(&d0).is_zero() {
            return Err(Error::Invariant("selected part of the differential does not square to zero".into()));
        }
        let degs = cx.degs();
        let c = Contraction::build(&degs, &d0)?;
        let n = c.small_len();
        let mut small_space = GradedSpace::default();
        let mut tags = Vec::with_capacity(n);
        for k in 0..n {
            let a = c.anchor[k];
            small_space.push(c.small_deg[k], cx.space.elems[a].label.clone());
            tags.push(cx.tag[a]);
        }
        let mut st = Stage {
            c,
            pert,
            small: DComplex { n2: cx.n2, space: small_space, tag: tags, d: DOp::zero(cx.n2, n, n) },
            big_len: cx.d.cols,
        };
        let cols: Result<Vec<DVec>, Error> =
            (0..n).into_par_iter().map(|k| Ok(st.p_plain(&st.pert.apply(&st.i_prime_basis(k)?)))).collect();
        st.small.d = DOp::from_columns(cx.n2, n, &cols?);
        Ok(st)
    }

    fn p_plain(&self, v: &DVec) -> DVec {
        apply_const(&self.c.p, v)
    }

    /// Σ (hδ)ⁿ applied to a big vector.
    fn series_h_pert(&self, v: DVec) -> Result<DVec, Error> {
        let mut acc = v.clone();
        let mut cur = v;
        for _ in 0..SERIES_CAP {
            cur = apply_const(&self.c.h, &self.pert.apply(&cur));
            if dvec_is_zero(&cur) {
                return Ok(acc);
            }
            dvec_add_scaled(&mut acc, &cur, &qi(1));
        }
        Err(Error::NonNilpotentPerturbation(format!("(h∘δ)^n nonzero after {SERIES_CAP} steps")))
    }

    /// Σ (δh)ⁿ applied to a big vector.
    fn series_pert_h(&self, v: DVec) -> Result<DVec, Error> {
        let mut acc = v.clone();
        let mut cur = v;
        for _ in 0..SERIES_CAP {
            cur = self.pert.apply(&apply_const(&self.c.h, &cur));
            if dvec_is_zero(&cur) {
                return Ok(acc);
            }
            dvec_add_scaled(&mut acc, &cur, &qi(1));
        }
        Err(Error::NonNilpotentPerturbation(format!("(δ∘h)^n nonzero after {SERIES_CAP} steps")))
    }

    pub fn i_prime_basis(&self, k: usize) -> Result<DVec, Error> {
        self.series_h_pert(dvec_const(self.small.n2, self.c.reps[k].clone()))
    }

    pub fn i_prime(&self, x: &DVec) -> Result<DVec, Error> {
        let mut v = DVec::new();
        for (m, s) in x {
            v.insert(m.clone(), self.c.i_apply(s));
        }
        v.retain(|_, s| !s.is_empty());
        self.series_h_pert(v)
    }

    pub fn p_prime(&self, y: &DVec) -> Result<DVec, Error> {
        Ok(self.p_plain(&self.series_pert_h(y.clone())?))
    }

    pub fn h_prime(&self, y: &DVec) -> Result<DVec, Error> {
        Ok(apply_const(&self.c.h, &self.series_pert_h(y.clone())?))
    }
}

/// Chain of stages; maps compose to a single contraction from the first
/// big complex onto the last small one.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub big: DComplex,
    pub stages: Vec<Stage>,
}

impl Pipeline {
    pub fn new(big: DComplex) -> Pipeline {
        Pipeline { big, stages: vec![] }
    }

    pub fn current(&self) -> &DComplex {
        self.stages.last().map_or(&self.big, |s| &s.small)
    }

    pub fn push(&mut self, select: impl Fn(&DMon, i64, i64) -> bool + Sync) -> Result<(), Error> {
        let st = Stage::build(self.current(), select)?;
        self.stages.push(st);
        Ok(())
    }

    pub fn push_with(&mut self, d0: SparseMat) -> Result<(), Error> {
        let st = Stage::build_with(self.current(), d0)?;
        self.stages.push(st);
        Ok(())
    }

    pub fn small(&self) -> &DComplex {
        self.current()
    }

    pub fn i(&self, x: &DVec) -> Result<DVec, Error> {
        let mut v = x.clone();
        for s in self.stages.iter().rev() {
            v = s.i_prime(&v)?;
        }
        Ok(v)
    }

    pub fn p(&self, y: &DVec) -> Result<DVec, Error> {
        let mut v = y.clone();
        for s in &self.stages {
            v = s.p_prime(&v)?;
        }
        Ok(v)
    }

    /// h = h₁ + i₁h₂p₁ + i₁i₂h₃p₂p₁ + …
    pub fn h(&self, y: &DVec) -> Result<DVec, Error> {
        let mut out = DVec::new();
        let mut proj = y.clone();
        for (t, s) in self.stages.iter().enumerate() {
            let mut term = s.h_prime(&proj)?;
            for prev in self.stages[..t].iter().rev() {
                term = prev.i_prime(&term)?;
            }
            dvec_add_scaled(&mut out, &term, &qi(1));
            if t + 1 < self.stages.len() {
                proj = s.p_prime(&proj)?;
            }
        }
        Ok(out)
    }

    /// Checks p∘i = id and i∘p − id = Dh + hD on every basis vector of the
    /// big complex whose weight is at most `wmax` (δ-linear identities).
    pub fn verify(&self, wmax: i64) -> Result<(), Error> {
        let n2 = self.big.n2;
        let small = self.small();
        for k in 0..small.d.cols {
            let x = dvec_const(n2, SVec::from([(k, qi(1))]));
            let pi = self.p(&self.i(&x)?)?;
            if pi != x {
                return Err(Error::Invariant(format!("p∘i ≠ id on small basis {k}")));
            }
        }
        let bad = (0..self.big.d.cols)
            .into_par_iter()
            .filter(|&j| self.big.space.deg(j).w <= wmax)
            .map(|j| -> Result<Option<usize>, Error> {
                let e = dvec_const(n2, SVec::from([(j, qi(1))]));
                let mut lhs = self.i(&self.p(&e)?)?;
                dvec_add_scaled(&mut lhs, &e, &qi(-1));
                let mut rhs = self.big.d.apply(&self.h(&e)?);
                dvec_add_scaled(&mut rhs, &self.h(&self.big.d.apply(&e))?, &qi(1));
                dvec_add_scaled(&mut lhs, &rhs, &qi(-1));
                Ok((!dvec_is_zero(&lhs)).then_some(j))
            })
            .collect::<Result<Vec<_>, Error>>()?;
        if let Some(Some(j)) = bad.into_iter().find(|b| b.is_some()) {
            return Err(Error::Invariant(format!("homotopy identity fails on big basis {j}")));
        }
        Ok(())
    }
}

/// Drops components whose basis weight exceeds `wmax`.
pub fn truncate(v: &DVec, space: &GradedSpace, wmax: i64) -> DVec {
    let mut out = DVec::new();
    for (m, x) in v {
        let y: SVec = x.iter().filter(|(&i, _)| space.deg(i).w <= wmax).map(|(&i, c)| (i, c.clone())).collect();
        if !y.is_empty() {
            out.insert(m.clone(), y);
        }
    }
    out
}

/// Transferred module structure on the small complex.
#[derive(Clone, Debug)]
pub struct Transferred {
    pub rho1: Vec<DOp>,
    /// ρ′²(α, β) for α ≤ β.
    pub rho2: BTreeMap<(usize, usize), DOp>,
    /// Targets above this weight are not trusted.
    pub trusted_weight: i64,
}

/// ρ′¹_α = p L_α i and ρ′²_{αβ} = −(p L_α h L_β i + p L_β h L_α i), from a
/// strict action `l` on the big complex.
pub fn transfer_rho(pl: &Pipeline, l: &[DOp], cutoff: i64) -> Result<Transferred, Error> {
    transfer_module(pl, l, &BTreeMap::new(), cutoff)
}

/// As `transfer_rho` for a big action that already carries ρ²; adds p ρ² i.
pub fn transfer_module(
    pl: &Pipeline,
    l: &[DOp],
    l2: &BTreeMap<(usize, usize), DOp>,
    cutoff: i64,
) -> Result<Transferred, Error> {
    let small = pl.small();
    let n2 = small.n2;
    let n = small.d.cols;
    let ivecs: Vec<DVec> =
        (0..n).into_par_iter().map(|k| pl.i(&dvec_const(n2, SVec::from([(k, qi(1))])))).collect::<Result<_, _>>()?;
    let li: Vec<Vec<DVec>> = l.iter().map(|la| ivecs.iter().map(|v| la.apply(v)).collect()).collect();
    let mut rho1 = Vec::new();
    for lv in &li {
        let cols: Vec<DVec> = lv.par_iter().map(|v| pl.p(v)).collect::<Result<_, _>>()?;
        rho1.push(DOp::from_columns(n2, n, &cols));
    }
    // h L_β i per β
    let hli: Vec<Vec<DVec>> = li
        .iter()
        .map(|lv| lv.par_iter().map(|v| pl.h(v)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()?;
    let mut rho2 = BTreeMap::new();
    for a in 0..l.len() {
        for b in a..l.len() {
            let cols: Vec<DVec> = (0..n)
                .into_par_iter()
                .map(|k| -> Result<DVec, Error> {
                    let mut t = pl.p(&l[a].apply(&hli[b][k]))?;
                    dvec_add_scaled(&mut t, &pl.p(&l[b].apply(&hli[a][k]))?, &qi(1));
                    let mut t = dvec_scale(&t, &qi(-1));
                    if let Some(r) = l2.get(&(a, b)) {
                        dvec_add_scaled(&mut t, &pl.p(&r.apply(&ivecs[k]))?, &qi(1));
                    }
                    Ok(t)
                })
                .collect::<Result<_, _>>()?;
            rho2.insert((a, b), DOp::from_columns(n2, n, &cols));
        }
    }
    Ok(Transferred { rho1, rho2, trusted_weight: cutoff - 2 })
}

/// Symmetrized p L h L h L i, restricted to trusted targets; must vanish.
pub fn check_third_order(pl: &Pipeline, l: &[DOp], cutoff: i64) -> Result<(), Error> {
    let small = pl.small();
    let n2 = small.n2;
    let n = small.d.cols;
    let na = l.len();
    let bad = (0..n)
        .into_par_iter()
        .map(|k| -> Result<Option<String>, Error> {
            let iv = pl.i(&dvec_const(n2, SVec::from([(k, qi(1))])))?;
            let hl: Vec<DVec> = l.iter().map(|la| pl.h(&la.apply(&iv))).collect::<Result<_, _>>()?;
            for a in 0..na {
                for b in a..na {
                    for c in b..na {
                        let mut acc = DVec::new();
                        let idx = [a, b, c];
                        for perm in PERMS {
                            let (x, y, z) = (idx[perm[0]], idx[perm[1]], idx[perm[2]]);
                            let t = pl.p(&l[x].apply(&pl.h(&l[y].apply(&hl[z]))?))?;
                            dvec_add_scaled(&mut acc, &t, &qi(1));
                        }
                        let acc = truncate(&acc, &small.space, cutoff - 3);
                        if !dvec_is_zero(&acc) {
                            return Ok(Some(format!("({a},{b},{c}) on small basis {k}")));
                        }
                    }
                }
            }
            Ok(None)
        })
        .collect::<Result<Vec<_>, _>>()?;
    match bad.into_iter().flatten().next() {
        Some(s) => Err(Error::HigherHomotopyPresent(s)),
        None => Ok(()),
    }
}

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// {ρ¹_α, ρ¹_β} − 2 f^μ_{αβ} δ_μ = {D, ρ²_{αβ}} on targets of weight ≤ `wmax`.
pub fn check_linf(
    space: &GradedSpace,
    d: &DOp,
    rho1: &[DOp],
    rho2: &BTreeMap<(usize, usize), DOp>,
    f: &[Vec<Vec<Q>>],
    wmax: i64,
) -> Result<(), Error> {
    let n2 = d.n2;
    let n = d.cols;
    for a in 0..rho1.len() {
        for b in a..rho1.len() {
            let r2 = rho2.get(&(a, b)).cloned().unwrap_or_else(|| DOp::zero(n2, n, n));
            for k in 0..n {
                let e = dvec_const(n2, SVec::from([(k, qi(1))]));
                let mut lhs = rho1[a].apply(&rho1[b].apply(&e));
                dvec_add_scaled(&mut lhs, &rho1[b].apply(&rho1[a].apply(&e)), &qi(1));
                for (mu, fm) in f.iter().enumerate() {
                    let x = &fm[a][b];
                    if x.is_zero() {
                        continue;
                    }
                    let mut m = vec![0; n2];
                    m[mu] = 1;
                    dvec_add_scaled(&mut lhs, &DVec::from([(m, SVec::from([(k, qi(1))]))]), &(qi(-2) * x));
                }
                let mut rhs = d.apply(&r2.apply(&e));
                dvec_add_scaled(&mut rhs, &r2.apply(&d.apply(&e)), &qi(1));
                dvec_add_scaled(&mut lhs, &rhs, &qi(-1));
                if !dvec_is_zero(&truncate(&lhs, space, wmax)) {
                    return Err(Error::Invariant(format!("module relation fails for ({a},{b}) on basis {k}")));
                }
            }
        }
    }
    Ok(())
}

/// Whether d is a chain map-compatible family: {D, ρ¹_α} = 0 on trusted targets.
pub fn check_rho1_closed(space: &GradedSpace, d: &DOp, rho1: &[DOp], wmax: i64) -> Result<(), Error> {
    for (a, r) in rho1.iter().enumerate() {
        let s = d.compose(r).add(&r.compose(d));
        for k in 0..d.cols {
            if !dvec_is_zero(&truncate(&s.apply_basis(k), space, wmax)) {
                return Err(Error::Invariant(format!("ρ¹_{a} does not anticommute with D on basis {k}")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_term(x: i64, dx: i64) -> DComplex {
        // e0 (0,0) → e1 (2,1), d = x + dx δ
        let mut d = DOp::zero(1, 2, 2);
        if x != 0 {
            d.add_entry(vec![0], 1, 0, qi(x));
        }
        if dx != 0 {
            d.add_entry(vec![1], 1, 0, qi(dx));
        }
        DComplex {
            n2: 1,
            space: GradedSpace::from_degrees(&[Bidegree::new(0, 0), Bidegree::new(2, 1)]),
            tag: vec![0, 0],
            d,
        }
    }

    #[test]
    fn zero_perturbation_keeps_inclusion() {
        let cx = two_term(0, 1);
        let mut pl = Pipeline::new(cx.clone());
        pl.push(|_, _, _| true).unwrap();
        // nothing contracted at order 0: D′ = δ
        assert_eq!(pl.small().d.cols, 2);
        assert_eq!(pl.small().d.render_entry(1, 0, &["d".into()]), "1 d");
        pl.verify(10).unwrap();
    }

    #[test]
    fn acyclic_pair_vanishes() {
        let mut pl = Pipeline::new(two_term(3, 0));
        pl.push(|_, _, _| true).unwrap();
        assert_eq!(pl.small().d.cols, 0);
        pl.verify(10).unwrap();
    }

    #[test]
    fn weight_preserving_delta_is_not_nilpotent() {
        // 3 + δ with δ not raising weight: the series 1/(3 + δ) never ends
        let mut pl = Pipeline::new(two_term(3, 1));
        pl.push(|_, _, _| true).unwrap();
        assert!(matches!(pl.verify(10), Err(Error::NonNilpotentPerturbation(_))));
    }

    #[test]
    fn perturbed_koszul_pair() {
        // a (0,0), b (1,1) ← d0 = 1 ; c (2,1) with a → δ c ; result: only c survives
        let mut d = DOp::zero(1, 3, 3);
        d.add_entry(vec![0], 1, 0, qi(1));
        d.add_entry(vec![1], 2, 0, qi(1));
        let cx = DComplex {
            n2: 1,
            space: GradedSpace::from_degrees(&[Bidegree::new(0, 0), Bidegree::new(0, 1), Bidegree::new(2, 1)]),
            tag: vec![0; 3],
            d,
        };
        let mut pl = Pipeline::new(cx);
        pl.push(|_, _, _| true).unwrap();
        assert_eq!(pl.small().d.cols, 1);
        assert!(pl.small().d.is_zero());
        pl.verify(10).unwrap();
    }

    #[test]
    fn two_stages_compose() {
        // chain a → b → c → e with d = 1 on a→b (tag 0) and c→e (tag 1), δ on b→c
        let mut d = DOp::zero(1, 4, 4);
        d.add_entry(vec![0], 1, 0, qi(1));
        d.add_entry(vec![0], 3, 2, qi(2));
        let cx = DComplex {
            n2: 1,
            space: GradedSpace::from_degrees(&[
                Bidegree::new(0, 0),
                Bidegree::new(0, 1),
                Bidegree::new(0, 1),
                Bidegree::new(0, 2),
            ]),
            tag: vec![0, 0, 1, 1],
            d,
        };
        let mut pl = Pipeline::new(cx);
        pl.push(|_, r, c| r == 0 && c == 0).unwrap();
        assert_eq!(pl.small().d.cols, 2);
        pl.push(|_, _, _| true).unwrap();
        assert_eq!(pl.small().d.cols, 0);
        pl.verify(10).unwrap();
    }
}
