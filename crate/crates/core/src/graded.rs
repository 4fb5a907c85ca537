//! Exact scalars, bidegrees, graded spaces and blockwise linear algebra.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::Error;

pub type Q = BigRational;

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qfrac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"n"` or `"n/d"`.
pub fn parse_q(s: &str) -> Result<Q, Error> {
    let s = s.trim();
    let bad = || Error::Schema(format!("bad rational `{s}`"));
    match s.split_once('/') {
        None => s.parse::<BigInt>().map(Q::from_integer).map_err(|_| bad()),
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
    }
}

pub fn fmt_q(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Always `num/den`, used by matrix dumps.
pub fn fmt_q_frac(q: &Q) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bidegree {
    pub w: i64,
    pub d: i64,
}

impl Bidegree {
    pub const ZERO: Bidegree = Bidegree { w: 0, d: 0 };

    pub fn new(w: i64, d: i64) -> Self {
        Bidegree { w, d }
    }

    /// Total parity (w + d) mod 2.
    pub fn parity(self) -> u8 {
        (self.w + self.d).rem_euclid(2) as u8
    }

    pub fn is_odd(self) -> bool {
        self.parity() == 1
    }

    /// Sheared array position (column w - d, row d).
    pub fn sheared(self) -> (i64, i64) {
        (self.w - self.d, self.d)
    }

    /// Totalized degree d - w (lambda at 0, v at -1).
    pub fn total(self) -> i64 {
        self.d - self.w
    }
}

impl std::ops::Add for Bidegree {
    type Output = Bidegree;
    fn add(self, o: Bidegree) -> Bidegree {
        Bidegree::new(self.w + o.w, self.d + o.d)
    }
}

impl std::ops::Sub for Bidegree {
    type Output = Bidegree;
    fn sub(self, o: Bidegree) -> Bidegree {
        Bidegree::new(self.w - o.w, self.d - o.d)
    }
}

impl fmt::Display for Bidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.w, self.d)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisElem {
    pub deg: Bidegree,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// Finite graded space with a deterministic basis order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedSpace {
    pub elems: Vec<BasisElem>,
}

impl GradedSpace {
    /// Sorts by (w, d, insertion index). Returns the space and `perm` with
    /// `perm[old] = new`.
    pub fn sorted(elems: Vec<BasisElem>) -> (Self, Vec<usize>) {
        let mut idx: Vec<usize> = (0..elems.len()).collect();
        idx.sort_by_key(|&i| (elems[i].deg.w, elems[i].deg.d, i));
        let mut perm = vec![0; elems.len()];
        for (new, &old) in idx.iter().enumerate() {
            perm[old] = new;
        }
        let sorted = idx.iter().map(|&i| elems[i].clone()).collect();
        (GradedSpace { elems: sorted }, perm)
    }

    pub fn from_degrees(degs: &[Bidegree]) -> Self {
        GradedSpace::sorted(degs.iter().map(|&deg| BasisElem { deg, label: None }).collect()).0
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn deg(&self, i: usize) -> Bidegree {
        self.elems[i].deg
    }

    pub fn dim(&self, deg: Bidegree) -> usize {
        self.elems.iter().filter(|e| e.deg == deg).count()
    }

    /// Dimensions per bidegree, ascending.
    pub fn dims(&self) -> BTreeMap<Bidegree, usize> {
        let mut m = BTreeMap::new();
        for e in &self.elems {
            *m.entry(e.deg).or_insert(0) += 1;
        }
        m
    }

    pub fn push(&mut self, deg: Bidegree, label: Option<String>) -> usize {
        self.elems.push(BasisElem { deg, label });
        self.elems.len() - 1
    }
}

// ---------------------------------------------------------------- sparse vectors

pub type SVec = BTreeMap<usize, Q>;

pub fn svec_add_scaled(acc: &mut SVec, v: &SVec, c: &Q) {
    if c.is_zero() {
        return;
    }
    for (&i, x) in v {
        add_entry(acc, i, x * c);
    }
}

pub fn add_entry(acc: &mut SVec, i: usize, x: Q) {
    if x.is_zero() {
        return;
    }
    match acc.entry(i) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(x);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            *e.get_mut() += x;
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}

pub fn svec_scale(v: &SVec, c: &Q) -> SVec {
    if c.is_zero() {
        return SVec::new();
    }
    v.iter().map(|(&i, x)| (i, x * c)).collect()
}

/// Sparse matrix stored by columns.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseMat {
    pub rows: usize,
    pub cols: Vec<SVec>,
}

impl SparseMat {
    pub fn zero(rows: usize, ncols: usize) -> Self {
        SparseMat { rows, cols: vec![SVec::new(); ncols] }
    }

    pub fn identity(n: usize) -> Self {
        SparseMat { rows: n, cols: (0..n).map(|i| SVec::from([(i, qi(1))])).collect() }
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn apply(&self, v: &SVec) -> SVec {
        let mut out = SVec::new();
        for (&j, x) in v {
            svec_add_scaled(&mut out, &self.cols[j], x);
        }
        out
    }

    /// self ∘ other
    pub fn compose(&self, other: &SparseMat) -> SparseMat {
        SparseMat { rows: self.rows, cols: other.cols.iter().map(|c| self.apply(c)).collect() }
    }

    pub fn add(&self, other: &SparseMat) -> SparseMat {
        let mut cols = self.cols.clone();
        for (j, c) in other.cols.iter().enumerate() {
            svec_add_scaled(&mut cols[j], c, &qi(1));
        }
        SparseMat { rows: self.rows, cols }
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.is_empty())
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }

    pub fn to_dense(&self) -> Mat {
        let mut m = Mat::zero(self.rows, self.cols.len());
        for (j, c) in self.cols.iter().enumerate() {
            for (&i, x) in c {
                m.set(i, j, x.clone());
            }
        }
        m
    }
}

// ---------------------------------------------------------------- dense matrices

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Q>,
}

impl Mat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zero(n, n);
        for i in 0..n {
            m.set(i, i, qi(1));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Mat::zero(r, c);
        for (i, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, x) in row.into_iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&x| qi(x)).collect()).collect())
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Q) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[Q] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Q> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        assert_eq!(self.cols, o.rows);
        let mut m = Mat::zero(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        let v = m.get(i, j) + a * b;
                        m.set(i, j, v);
                    }
                }
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        (0..self.rows)
            .map(|i| {
                let mut s = Q::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        s += a * b;
                    }
                }
                s
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn permute_cols(&self, perm: &[usize]) -> Mat {
        // new column perm[j] holds old column j
        let mut m = Mat::zero(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, perm[j], self.get(i, j).clone());
            }
        }
        m
    }

    /// Inverse of a square matrix, `None` if singular.
    pub fn inverse(&self) -> Option<Mat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        for c in 0..n {
            let p = (c..n).find(|&r| !a.get(r, c).is_zero())?;
            if p != c {
                for j in 0..n {
                    a.data.swap(p * n + j, c * n + j);
                    inv.data.swap(p * n + j, c * n + j);
                }
            }
            let piv = a.get(c, c).recip();
            for j in 0..n {
                if !a.get(c, j).is_zero() {
                    let v = a.get(c, j) * &piv;
                    a.set(c, j, v);
                }
                if !inv.get(c, j).is_zero() {
                    let v = inv.get(c, j) * &piv;
                    inv.set(c, j, v);
                }
            }
            for r in 0..n {
                if r == c || a.get(r, c).is_zero() {
                    continue;
                }
                let f = a.get(r, c).clone();
                for j in 0..n {
                    if !a.get(c, j).is_zero() {
                        let v = a.get(r, j) - &f * a.get(c, j);
                        a.set(r, j, v);
                    }
                    if !inv.get(c, j).is_zero() {
                        let v = inv.get(r, j) - &f * inv.get(c, j);
                        inv.set(r, j, v);
                    }
                }
            }
        }
        Some(inv)
    }
}

/// Result of [`block_rref`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub rank: usize,
    /// Pivot columns in increasing order.
    pub pivots: Vec<usize>,
    pub reduced: Mat,
    /// One vector per free column, with a 1 in that column.
    pub kernel: Vec<Vec<Q>>,
}

/// Reduced row-echelon form with canonical kernel basis.
pub fn block_rref(m: &Mat) -> Rref {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a.get(i, c).is_zero()) else { continue };
        if p != r {
            for j in 0..cols {
                a.data.swap(p * cols + j, r * cols + j);
            }
        }
        let inv = a.get(r, c).recip();
        for j in c..cols {
            if !a.get(r, j).is_zero() {
                let v = a.get(r, j) * &inv;
                a.set(r, j, v);
            }
        }
        for i in 0..rows {
            if i == r || a.get(i, c).is_zero() {
                continue;
            }
            let f = a.get(i, c).clone();
            for j in c..cols {
                if !a.get(r, j).is_zero() {
                    let v = a.get(i, j) - &f * a.get(r, j);
                    a.set(i, j, v);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let mut kernel = Vec::new();
    let mut is_piv = vec![false; cols];
    for &p in &pivots {
        is_piv[p] = true;
    }
    for f in (0..cols).filter(|&c| !is_piv[c]) {
        let mut v = vec![Q::zero(); cols];
        v[f] = qi(1);
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = -a.get(i, f).clone();
        }
        kernel.push(v);
    }
    Rref { rank: pivots.len(), pivots, reduced: a, kernel }
}

pub fn rank(m: &Mat) -> usize {
    block_rref(m).rank
}

// ---------------------------------------------------------------- graded maps and complexes

/// Linear map between graded spaces with a fixed bidegree shift.
#[derive(Clone, Debug)]
pub struct GradedMap {
    pub shift: Bidegree,
    pub mat: SparseMat,
}

impl GradedMap {
    /// Checks that every entry respects the declared shift.
    pub fn check(&self, src: &GradedSpace, tgt: &GradedSpace) -> Result<(), Error> {
        for (j, c) in self.mat.cols.iter().enumerate() {
            for &i in c.keys() {
                if tgt.deg(i) != src.deg(j) + self.shift {
                    return Err(Error::Invariant(format!(
                        "map entry {j}->{i} breaks shift {}",
                        self.shift
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Space with a differential given as a sum of graded maps, each raising d by one.
#[derive(Clone, Debug)]
pub struct GradedComplex {
    pub space: GradedSpace,
    pub summands: Vec<GradedMap>,
}

impl GradedComplex {
    pub fn new(space: GradedSpace, summands: Vec<GradedMap>) -> Result<Self, Error> {
        for s in &summands {
            if s.shift.d != 1 {
                return Err(Error::Invariant("differential summand must raise d by 1".into()));
            }
            s.check(&space, &space)?;
        }
        let c = GradedComplex { space, summands };
        c.assert_square_zero()?;
        Ok(c)
    }

    pub fn total(&self) -> SparseMat {
        let mut t = SparseMat::zero(self.space.len(), self.space.len());
        for s in &self.summands {
            t = t.add(&s.mat);
        }
        t
    }

    pub fn assert_square_zero(&self) -> Result<(), Error> {
        let t = self.total();
        if t.compose(&t).is_zero() {
            Ok(())
        } else {
            Err(Error::Invariant("d∘d ≠ 0".into()))
        }
    }
}

/// Window of weights and degrees, inclusive.
#[derive(Clone, Copy, Debug)]
pub struct Window {
    pub w: (i64, i64),
    pub d: (i64, i64),
}

impl Window {
    pub fn contains(&self, b: Bidegree) -> bool {
        (self.w.0..=self.w.1).contains(&b.w) && (self.d.0..=self.d.1).contains(&b.d)
    }
}

/// Cohomology with canonical representatives.
#[derive(Clone, Debug)]
pub struct Cohomology {
    pub space: GradedSpace,
    /// Representative of each cohomology basis vector in the complex.
    pub reps: Vec<SVec>,
}

/// Cohomology of `c` restricted to `window`. The complex must carry data one
/// degree beyond the window on each side, otherwise `WindowTooSmall`.
pub fn cohomology(c: &GradedComplex, window: Window) -> Result<Cohomology, Error> {
    let degs: Vec<Bidegree> = c.space.elems.iter().map(|e| e.deg).collect();
    let (dmin, dmax) = match (degs.iter().map(|b| b.d).min(), degs.iter().map(|b| b.d).max()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Ok(Cohomology { space: GradedSpace::default(), reps: vec![] }),
    };
    if window.d.0 < dmin - 1 || window.d.1 > dmax + 1 {
        return Err(Error::WindowTooSmall(format!(
            "degree window {:?} exceeds available data {}..{}",
            window.d, dmin, dmax
        )));
    }
    let t = c.total();
    let ctr = Contraction::build(&degs, &t)?;
    let mut space = GradedSpace::default();
    let mut reps = Vec::new();
    for (k, r) in ctr.reps.iter().enumerate() {
        let deg = ctr.small_deg[k];
        if window.contains(deg) {
            space.push(deg, None);
            reps.push(r.clone());
        }
    }
    // exactness check of representatives
    for r in &reps {
        if !t.apply(r).is_empty() {
            return Err(Error::Invariant("representative is not closed".into()));
        }
    }
    Ok(Cohomology { space, reps })
}

// ---------------------------------------------------------------- contractions

/// Deformation retract of a finite complex onto its cohomology, built from
/// pivot-based splittings per connected block. Sign convention:
/// `i∘p − id = d∘h + h∘d`, with `h∘i = 0`, `p∘h = 0`, `h∘h = 0`.
#[derive(Clone, Debug)]
pub struct Contraction {
    /// Representatives (columns of i).
    pub reps: Vec<SVec>,
    /// Bidegrees of the small basis.
    pub small_deg: Vec<Bidegree>,
    /// Which big basis index the small vector is "anchored" at.
    pub anchor: Vec<usize>,
    /// p, columns indexed by big basis, rows by small basis.
    pub p: SparseMat,
    /// h, big to big.
    pub h: SparseMat,
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let n = self.0[y];
            self.0[y] = r;
            y = n;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            self.0[hi] = lo;
        }
    }
}

struct BlockOut {
    reps: Vec<(SVec, usize)>,
    p_cols: Vec<(usize, Vec<(usize, Q)>)>, // big index -> (local small index, coeff)
    h_cols: Vec<(usize, SVec)>,
}

impl Contraction {
    /// `degs[j]` is the bidegree of basis vector j, `d` the differential.
    pub fn build(degs: &[Bidegree], d: &SparseMat) -> Result<Contraction, Error> {
        let n = degs.len();
        let mut dsu = Dsu((0..n).collect());
        for (j, c) in d.cols.iter().enumerate() {
            for &i in c.keys() {
                if degs[i].d != degs[j].d + 1 {
                    return Err(Error::Invariant(format!("d0 entry {j}->{i} does not raise d by 1")));
                }
                dsu.union(i, j);
            }
        }
        let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for j in 0..n {
            let r = dsu.find(j);
            comps.entry(r).or_default().push(j);
        }
        let comps: Vec<Vec<usize>> = comps.into_values().collect();
        let outs: Vec<Result<BlockOut, Error>> =
            comps.par_iter().map(|members| contract_block(members, degs, d)).collect();
        let mut reps = Vec::new();
        let mut small_deg = Vec::new();
        let mut anchor = Vec::new();
        let mut p = SparseMat::zero(0, n);
        let mut h = SparseMat::zero(n, n);
        for out in outs {
            let out = out?;
            let base = reps.len();
            for (r, a) in out.reps {
                small_deg.push(degs[a]);
                anchor.push(a);
                reps.push(r);
            }
            for (j, entries) in out.p_cols {
                for (k, x) in entries {
                    add_entry(&mut p.cols[j], base + k, x);
                }
            }
            for (j, col) in out.h_cols {
                h.cols[j] = col;
            }
        }
        p.rows = reps.len();
        Ok(Contraction { reps, small_deg, anchor, p, h })
    }

    pub fn small_len(&self) -> usize {
        self.reps.len()
    }

    pub fn i_apply(&self, v: &SVec) -> SVec {
        let mut out = SVec::new();
        for (&k, x) in v {
            svec_add_scaled(&mut out, &self.reps[k], x);
        }
        out
    }

    /// Checks p∘i = id, i∘p − id = dh + hd and the three side conditions.
    pub fn verify(&self, d: &SparseMat) -> Result<(), Error> {
        let n = d.cols.len();
        for (k, r) in self.reps.iter().enumerate() {
            let pi = self.p.apply(r);
            if pi != SVec::from([(k, qi(1))]) {
                return Err(Error::Invariant("p∘i ≠ id".into()));
            }
            if !self.h.apply(r).is_empty() {
                return Err(Error::Invariant("h∘i ≠ 0".into()));
            }
        }
        for j in 0..n {
            let e = SVec::from([(j, qi(1))]);
            let hj = self.h.apply(&e);
            if !self.p.apply(&hj).is_empty() {
                return Err(Error::Invariant("p∘h ≠ 0".into()));
            }
            if !self.h.apply(&hj).is_empty() {
                return Err(Error::Invariant("h∘h ≠ 0".into()));
            }
            let mut lhs = self.i_apply(&self.p.apply(&e));
            add_entry(&mut lhs, j, qi(-1));
            let mut rhs = d.apply(&hj);
            svec_add_scaled(&mut rhs, &self.h.apply(&d.apply(&e)), &qi(1));
            if lhs != rhs {
                return Err(Error::Invariant(format!("homotopy identity fails at basis {j}")));
            }
        }
        Ok(())
    }
}

fn contract_block(members: &[usize], degs: &[Bidegree], d: &SparseMat) -> Result<BlockOut, Error> {
    // levels by cohomological degree
    let mut levels: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for &j in members {
        levels.entry(degs[j].d).or_default().push(j);
    }
    let lv: Vec<(i64, Vec<usize>)> = levels.into_iter().collect();
    let pos = |level: &Vec<usize>, g: usize| level.binary_search(&g).ok();
    // dense differential from level t to level t+1
    let dense = |t: usize| -> Option<Mat> {
        if t + 1 >= lv.len() || lv[t + 1].0 != lv[t].0 + 1 {
            return None;
        }
        let (src, tgt) = (&lv[t].1, &lv[t + 1].1);
        let mut m = Mat::zero(tgt.len(), src.len());
        for (jl, &g) in src.iter().enumerate() {
            for (&i, x) in &d.cols[g] {
                let il = pos(tgt, i).expect("component closure");
                m.set(il, jl, x.clone());
            }
        }
        Some(m)
    };
    let mut out = BlockOut { reps: vec![], p_cols: vec![], h_cols: vec![] };
    // C-complement (pivot columns) of each level, with image vectors
    let mut c_sets: Vec<Vec<usize>> = vec![vec![]; lv.len()];
    let mut douts: Vec<Option<Mat>> = Vec::with_capacity(lv.len());
    for t in 0..lv.len() {
        let m = dense(t);
        if let Some(m) = &m {
            c_sets[t] = block_rref(m).pivots;
        }
        douts.push(m);
    }
    for t in 0..lv.len() {
        let level = &lv[t].1;
        let nl = level.len();
        // B basis: images of previous level's C vectors
        let mut b_vecs: Vec<Vec<Q>> = Vec::new();
        let mut b_src: Vec<usize> = Vec::new(); // global index of c-vector in previous level
        if t > 0 {
            if let Some(m) = &douts[t - 1] {
                for &c in &c_sets[t - 1] {
                    b_vecs.push(m.col(c));
                    b_src.push(lv[t - 1].1[c]);
                }
            }
        }
        // kernel of outgoing map
        let z: Vec<Vec<Q>> = match &douts[t] {
            Some(m) => block_rref(m).kernel,
            None => (0..nl)
                .map(|i| {
                    let mut v = vec![Q::zero(); nl];
                    v[i] = qi(1);
                    v
                })
                .collect(),
        };
        // H: complement of B in Z via pivots of [B | Z]
        let mut bz = Mat::zero(nl, b_vecs.len() + z.len());
        for (j, v) in b_vecs.iter().chain(z.iter()).enumerate() {
            for (i, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    bz.set(i, j, x.clone());
                }
            }
        }
        let piv = block_rref(&bz).pivots;
        let h_vecs: Vec<Vec<Q>> =
            piv.iter().filter(|&&c| c >= b_vecs.len()).map(|&c| z[c - b_vecs.len()].clone()).collect();
        // full basis [B | H | C]
        let c_loc = &c_sets[t];
        let total = b_vecs.len() + h_vecs.len() + c_loc.len();
        if total != nl {
            return Err(Error::Invariant(format!(
                "splitting dimension mismatch at d={}: {} != {}",
                lv[t].0, total, nl
            )));
        }
        let mut basis = Mat::zero(nl, nl);
        for (j, v) in b_vecs.iter().chain(h_vecs.iter()).enumerate() {
            for (i, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    basis.set(i, j, x.clone());
                }
            }
        }
        for (k, &c) in c_loc.iter().enumerate() {
            basis.set(c, b_vecs.len() + h_vecs.len() + k, qi(1));
        }
        let inv = basis
            .inverse()
            .ok_or_else(|| Error::Invariant("splitting basis is singular".into()))?;
        let nb = b_vecs.len();
        let base_small = out.reps.len();
        for hv in &h_vecs {
            let mut r = SVec::new();
            let mut anchor = None;
            for (i, x) in hv.iter().enumerate() {
                if !x.is_zero() {
                    r.insert(level[i], x.clone());
                    if anchor.is_none() {
                        anchor = Some(level[i]);
                    }
                }
            }
            out.reps.push((r, anchor.expect("nonzero representative")));
        }
        for (jl, &g) in level.iter().enumerate() {
            let mut pe = Vec::new();
            for k in 0..h_vecs.len() {
                let x = inv.get(nb + k, jl);
                if !x.is_zero() {
                    pe.push((base_small + k, x.clone()));
                }
            }
            if !pe.is_empty() {
                out.p_cols.push((g, pe));
            }
            let mut hc = SVec::new();
            for (bi, &src) in b_src.iter().enumerate() {
                let x = inv.get(bi, jl);
                if !x.is_zero() {
                    hc.insert(src, -x.clone());
                }
            }
            if !hc.is_empty() {
                out.h_cols.push((g, hc));
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- matrix dumps

/// Plain-text block dump: header `w d rows cols`, then `row col num/den`.
pub fn dump_block(deg: Bidegree, m: &Mat) -> String {
    let mut s = format!("{} {} {} {}\n", deg.w, deg.d, m.rows, m.cols);
    for i in 0..m.rows {
        for j in 0..m.cols {
            let x = m.get(i, j);
            if !x.is_zero() {
                s.push_str(&format!("{} {} {}\n", i, j, fmt_q_frac(x)));
            }
        }
    }
    s
}

pub fn parse_dump(text: &str) -> Result<Vec<(Bidegree, Mat)>, Error> {
    let mut out = Vec::new();
    let mut lines = text.lines().filter(|l| !l.trim().is_empty()).peekable();
    let bad = |l: &str| Error::Schema(format!("bad dump line `{l}`"));
    while let Some(h) = lines.next() {
        let f: Vec<&str> = h.split_whitespace().collect();
        if f.len() != 4 {
            return Err(bad(h));
        }
        let p = |s: &str| s.parse::<i64>().map_err(|_| bad(h));
        let (w, d, r, c) = (p(f[0])?, p(f[1])?, p(f[2])? as usize, p(f[3])? as usize);
        let mut m = Mat::zero(r, c);
        while let Some(l) = lines.peek() {
            let g: Vec<&str> = l.split_whitespace().collect();
            if g.len() != 3 {
                break;
            }
            let (i, j) = (g[0].parse::<usize>().map_err(|_| bad(l))?, g[1].parse::<usize>().map_err(|_| bad(l))?);
            if i >= r || j >= c {
                return Err(bad(l));
            }
            m.set(i, j, parse_q(g[2])?);
            lines.next();
        }
        out.push((Bidegree::new(w, d), m));
    }
    Ok(out)
}

pub fn is_positive(q: &Q) -> bool {
    q.is_positive()
}

pub fn one() -> Q {
    Q::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_examples() {
        let r = block_rref(&Mat::identity(2));
        assert_eq!(r.rank, 2);
        assert!(r.kernel.is_empty());
        let r = block_rref(&Mat::zero(3, 2));
        assert_eq!(r.rank, 0);
        assert_eq!(r.kernel.len(), 2);
        let r = block_rref(&Mat::from_i64(&[&[1, 2], &[2, 4]]));
        assert_eq!(r.rank, 1);
        assert_eq!(r.kernel, vec![vec![qi(-2), qi(1)]]);
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("6/-4").unwrap(), qfrac(-3, 2));
        assert_eq!(fmt_q(&qfrac(-3, 2)), "-3/2");
        assert_eq!(fmt_q(&qi(5)), "5");
        assert!(parse_q("1/0").is_err());
    }

    #[test]
    fn dump_roundtrip() {
        let m = Mat::from_rows(vec![vec![qfrac(1, 2), qi(0)], vec![qi(0), qi(-3)]]);
        let s = dump_block(Bidegree::new(2, 1), &m);
        assert!(s.starts_with("2 1 2 2\n0 0 1/2\n"));
        let back = parse_dump(&s).unwrap();
        assert_eq!(back, vec![(Bidegree::new(2, 1), m)]);
    }

    #[test]
    fn acyclic_pair_contracts_to_zero() {
        let degs = [Bidegree::new(0, 0), Bidegree::new(0, 1)];
        let mut d = SparseMat::zero(2, 2);
        d.cols[0].insert(1, qi(1));
        let c = Contraction::build(&degs, &d).unwrap();
        assert_eq!(c.small_len(), 0);
        c.verify(&d).unwrap();
        assert_eq!(c.h.cols[1], SVec::from([(0, qi(-1))]));
    }

    #[test]
    fn zero_differential_keeps_everything() {
        let degs = [Bidegree::new(0, 0), Bidegree::new(1, 0), Bidegree::new(1, 1)];
        let d = SparseMat::zero(3, 3);
        let c = Contraction::build(&degs, &d).unwrap();
        assert_eq!(c.small_len(), 3);
        c.verify(&d).unwrap();
    }

    #[test]
    fn cohomology_window() {
        let space = GradedSpace::from_degrees(&[Bidegree::new(0, 0), Bidegree::new(0, 1)]);
        let mut m = SparseMat::zero(2, 2);
        m.cols[0].insert(1, qi(1));
        let c = GradedComplex::new(space, vec![GradedMap { shift: Bidegree::new(0, 1), mat: m }]).unwrap();
        let h = cohomology(&c, Window { w: (0, 0), d: (0, 1) }).unwrap();
        assert!(h.space.is_empty());
        assert!(matches!(
            cohomology(&c, Window { w: (0, 0), d: (-5, 1) }),
            Err(Error::WindowTooSmall(_))
        ));
    }
}
