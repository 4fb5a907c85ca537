//! Weight-truncated graded modules over R = Q[λ] (or a quotient R/J), stored
//! as finite vector spaces per bidegree with the action of each λ.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;

use crate::graded::{add_entry, block_rref, qi, BasisElem, Bidegree, GradedSpace, Mat, SVec, SparseMat, Q};
use crate::poly::Mono;
use crate::Error;

/// Commutative polynomial in λ¹..λⁿ.
pub type RPoly = BTreeMap<Mono, Q>;

pub fn rpoly_weight(p: &RPoly) -> Option<i64> {
    let mut it = p.keys().map(|m| m.iter().map(|&e| e as i64).sum::<i64>());
    let f = it.next()?;
    it.all(|x| x == f).then_some(f)
}

pub fn rpoly_mul(a: &RPoly, b: &RPoly) -> RPoly {
    let mut r = RPoly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m: Mono = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
            let e = r.entry(m.clone()).or_insert_with(Q::zero);
            *e += ca * cb;
            if e.is_zero() {
                r.remove(&m);
            }
        }
    }
    r
}

pub fn render_rpoly(p: &RPoly, names: &[String]) -> String {
    if p.is_empty() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (m, c) in p.iter().rev() {
        let mono: Vec<String> = m
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| if e == 1 { names[i].clone() } else { format!("{}^{}", names[i], e) })
            .collect();
        let mono = if mono.is_empty() { "1".to_string() } else { mono.join(" ") };
        parts.push(format!("{}*{}", crate::graded::fmt_q(c), mono));
    }
    parts.join(" + ")
}

/// All monomials of degree `k` in `n` variables, in descending lex order.
pub fn monomials(n: usize, k: u32) -> Vec<Mono> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(i: usize, left: u32, cur: &mut Mono, out: &mut Vec<Mono>) {
        let n = cur.len();
        if i + 1 == n {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e;
            rec(i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    if n == 0 {
        if k == 0 {
            out.push(vec![]);
        }
        return out;
    }
    rec(0, k, &mut cur, &mut out);
    out
}

/// Quotient of Q^dim by a span, with normal forms on a complement basis.
#[derive(Clone, Debug)]
pub struct Quot {
    pub dim: usize,
    rows: Vec<(usize, SVec)>,
    /// Coordinates surviving in the quotient.
    pub basis: Vec<usize>,
    pos: HashMap<usize, usize>,
}

impl Quot {
    pub fn new(dim: usize, span: &[SVec]) -> Quot {
        let mut m = Mat::zero(span.len(), dim);
        for (i, v) in span.iter().enumerate() {
            for (&j, x) in v {
                m.set(i, j, x.clone());
            }
        }
        let r = block_rref(&m);
        let mut rows = Vec::new();
        for (i, &p) in r.pivots.iter().enumerate() {
            let mut v = SVec::new();
            for j in 0..dim {
                let x = r.reduced.get(i, j);
                if !x.is_zero() {
                    v.insert(j, x.clone());
                }
            }
            rows.push((p, v));
        }
        let piv: std::collections::BTreeSet<usize> = r.pivots.iter().copied().collect();
        let basis: Vec<usize> = (0..dim).filter(|j| !piv.contains(j)).collect();
        let pos = basis.iter().enumerate().map(|(k, &j)| (j, k)).collect();
        Quot { dim, rows, basis, pos }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Coordinates of the class of `v` in the complement basis.
    pub fn normal(&self, v: &SVec) -> SVec {
        let mut v = v.clone();
        for (p, row) in &self.rows {
            if let Some(c) = v.get(p).cloned() {
                crate::graded::svec_add_scaled(&mut v, row, &-c);
            }
        }
        v.into_iter().map(|(j, x)| (self.pos[&j], x)).collect()
    }
}

/// R = Q[λ¹..λⁿ] or a homogeneous quotient R/J, truncated at weight `cutoff`.
#[derive(Clone, Debug)]
pub struct Ring {
    pub n: usize,
    pub ideal: Vec<RPoly>,
    pub cutoff: i64,
    mons: Vec<Vec<Mono>>,
    mon_index: Vec<HashMap<Mono, usize>>,
    quot: Vec<Quot>,
}

impl Ring {
    pub fn polynomial(n: usize, cutoff: i64) -> Ring {
        Ring::quotient(n, vec![], cutoff)
    }

    pub fn quotient(n: usize, ideal: Vec<RPoly>, cutoff: i64) -> Ring {
        let cutoff = cutoff.max(0);
        let mut mons = Vec::new();
        let mut mon_index = Vec::new();
        let mut quot = Vec::new();
        for w in 0..=cutoff {
            let ms = monomials(n, w as u32);
            let idx: HashMap<Mono, usize> = ms.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
            let mut span = Vec::new();
            for j in &ideal {
                let Some(jw) = rpoly_weight(j) else { continue };
                if jw > w {
                    continue;
                }
                for u in monomials(n, (w - jw) as u32) {
                    let mut v = SVec::new();
                    for (m, c) in j {
                        let mm: Mono = m.iter().zip(&u).map(|(a, b)| a + b).collect();
                        add_entry(&mut v, idx[&mm], c.clone());
                    }
                    span.push(v);
                }
            }
            quot.push(Quot::new(ms.len(), &span));
            mons.push(ms);
            mon_index.push(idx);
        }
        Ring { n, ideal, cutoff, mons, mon_index, quot }
    }

    /// Dimension of the ring in weight `w`.
    pub fn dim(&self, w: i64) -> usize {
        if w < 0 || w > self.cutoff {
            0
        } else {
            self.quot[w as usize].basis.len()
        }
    }

    /// Standard monomial `k` of weight `w`.
    pub fn basis_mono(&self, w: i64, k: usize) -> &Mono {
        let q = &self.quot[w as usize];
        &self.mons[w as usize][q.basis[k]]
    }

    /// Normal form of a polynomial of weight `w`.
    pub fn normal(&self, w: i64, p: &RPoly) -> SVec {
        if w < 0 || w > self.cutoff {
            return SVec::new();
        }
        let mut v = SVec::new();
        for (m, c) in p {
            add_entry(&mut v, self.mon_index[w as usize][m], c.clone());
        }
        self.quot[w as usize].normal(&v)
    }

    pub fn normal_mono(&self, m: &Mono) -> SVec {
        let w = m.iter().map(|&e| e as i64).sum::<i64>();
        self.normal(w, &RPoly::from([(m.clone(), qi(1))]))
    }
}

/// Graded module with λ action, truncated at `cutoff`.
#[derive(Clone, Debug)]
pub struct LamModule {
    pub n: usize,
    pub cutoff: i64,
    pub space: GradedSpace,
    /// λ_α as maps space → space.
    pub lam: Vec<SparseMat>,
}

impl LamModule {
    pub fn blocks(&self) -> BTreeMap<Bidegree, Vec<usize>> {
        let mut m: BTreeMap<Bidegree, Vec<usize>> = BTreeMap::new();
        for (i, e) in self.space.elems.iter().enumerate() {
            m.entry(e.deg).or_default().push(i);
        }
        m
    }

    /// Hilbert coefficients per totalized degree d − w, indexed by weight.
    pub fn hilbert(&self) -> BTreeMap<i64, Vec<usize>> {
        let mut out: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for e in &self.space.elems {
            let v = out.entry(e.deg.total()).or_insert_with(|| vec![0; (self.cutoff + 1).max(0) as usize]);
            if e.deg.w >= 0 && e.deg.w <= self.cutoff {
                v[e.deg.w as usize] += 1;
            }
        }
        out
    }

    /// Applies the monomial λ^m to a vector.
    pub fn act_mono(&self, m: &[u32], v: &SVec) -> SVec {
        let mut cur = v.clone();
        for (a, &e) in m.iter().enumerate() {
            for _ in 0..e {
                cur = self.lam[a].apply(&cur);
            }
        }
        cur
    }

    /// Checks λ_α λ_β = λ_β λ_α and (optionally) that `ideal` acts by zero.
    pub fn check(&self, ideal: &[RPoly]) -> Result<(), Error> {
        for a in 0..self.n {
            for b in 0..a {
                if self.lam[a].compose(&self.lam[b]) != self.lam[b].compose(&self.lam[a]) {
                    return Err(Error::Invariant("λ actions do not commute".into()));
                }
            }
        }
        for (k, j) in ideal.iter().enumerate() {
            for i in 0..self.space.len() {
                let e = SVec::from([(i, qi(1))]);
                let mut acc = SVec::new();
                for (m, c) in j {
                    crate::graded::svec_add_scaled(&mut acc, &self.act_mono(m, &e), c);
                }
                if !acc.is_empty() {
                    return Err(Error::NotAnnihilated(format!("ideal generator {k} on basis element {i}")));
                }
            }
        }
        Ok(())
    }
}

/// Generators with bidegrees and relations (one vector over the generators
/// per relation), over R/J.
#[derive(Clone, Debug, PartialEq)]
pub struct Presentation {
    pub n: usize,
    pub gens: Vec<Bidegree>,
    pub relations: Vec<Vec<RPoly>>,
}

impl Presentation {
    /// Bidegree of a relation column, if homogeneous.
    pub fn relation_degree(&self, r: &[RPoly]) -> Option<Bidegree> {
        let mut deg = None;
        for (g, p) in r.iter().enumerate() {
            if p.is_empty() {
                continue;
            }
            let w = rpoly_weight(p)?;
            let b = self.gens[g] + Bidegree::new(w, w);
            match deg {
                None => deg = Some(b),
                Some(d) if d != b => return None,
                _ => {}
            }
        }
        deg
    }

    /// Truncated module `F / relations`, basis by bidegree.
    pub fn to_module(&self, ring: &Ring) -> Result<LamModule, Error> {
        let n = self.n;
        let cutoff = ring.cutoff;
        let mut rel_deg = Vec::new();
        for (k, r) in self.relations.iter().enumerate() {
            match self.relation_degree(r) {
                Some(d) => rel_deg.push(Some(d)),
                None if r.iter().all(|p| p.is_empty()) => rel_deg.push(None),
                None => return Err(Error::Schema(format!("relation {k} is not homogeneous"))),
            }
        }
        // blocks of the free module: (bidegree) -> coordinates (g, k)
        let mut blocks: BTreeMap<Bidegree, Vec<(usize, usize)>> = BTreeMap::new();
        for (g, &gd) in self.gens.iter().enumerate() {
            for a in 0..=(cutoff - gd.w).max(-1) {
                for k in 0..ring.dim(a) {
                    blocks.entry(gd + Bidegree::new(a, a)).or_default().push((g, k));
                }
            }
        }
        let mut quots: BTreeMap<Bidegree, (Vec<(usize, usize)>, HashMap<(usize, usize), usize>, Quot)> =
            BTreeMap::new();
        for (&b, coords) in &blocks {
            let index: HashMap<(usize, usize), usize> = coords.iter().enumerate().map(|(i, &c)| (c, i)).collect();
            let mut span = Vec::new();
            for (r, rd) in self.relations.iter().zip(&rel_deg) {
                let Some(rd) = rd else { continue };
                if rd.total() != b.total() || rd.w > b.w {
                    continue;
                }
                for u in monomials(n, (b.w - rd.w) as u32) {
                    let up = RPoly::from([(u, qi(1))]);
                    let mut v = SVec::new();
                    for (g, p) in r.iter().enumerate() {
                        if p.is_empty() {
                            continue;
                        }
                        let prod = rpoly_mul(&up, p);
                        let pw = b.w - self.gens[g].w;
                        for (k, x) in ring.normal(pw, &prod) {
                            add_entry(&mut v, index[&(g, k)], x);
                        }
                    }
                    span.push(v);
                }
            }
            let q = Quot::new(coords.len(), &span);
            quots.insert(b, (coords.clone(), index, q));
        }
        // global basis
        let mut elems = Vec::new();
        let mut gidx: HashMap<(Bidegree, usize), usize> = HashMap::new();
        for (&b, (coords, _, q)) in &quots {
            for (k, &c) in q.basis.iter().enumerate() {
                gidx.insert((b, k), elems.len());
                let (g, mk) = coords[c];
                let mono = ring.basis_mono(b.w - self.gens[g].w, mk);
                elems.push(BasisElem { deg: b, label: Some(format!("g{}·{}", g, mono_label(mono))) });
            }
        }
        let total = elems.len();
        let mut lam = vec![SparseMat::zero(total, total); n];
        for (&b, (coords, _, q)) in &quots {
            let tb = b + Bidegree::new(1, 1);
            let target = quots.get(&tb);
            for (k, &c) in q.basis.iter().enumerate() {
                let src = gidx[&(b, k)];
                let (g, mk) = coords[c];
                let a = b.w - self.gens[g].w;
                let mono = ring.basis_mono(a, mk).clone();
                for al in 0..n {
                    let Some((_, tindex, tq)) = target else { continue };
                    let mut m2 = mono.clone();
                    m2[al] += 1;
                    let nf = ring.normal_mono(&m2);
                    let mut v = SVec::new();
                    for (kk, x) in nf {
                        add_entry(&mut v, tindex[&(g, kk)], x);
                    }
                    let red = tq.normal(&v);
                    lam[al].cols[src] = red.into_iter().map(|(kk, x)| (gidx[&(tb, kk)], x)).collect();
                }
            }
        }
        Ok(LamModule { n, cutoff, space: GradedSpace { elems }, lam })
    }
}

pub fn mono_label(m: &[u32]) -> String {
    let parts: Vec<String> = m
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| if e == 1 { format!("l{}", i + 1) } else { format!("l{}^{}", i + 1, e) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("")
    }
}

pub fn rp(terms: &[(&[u32], i64)]) -> RPoly {
    let mut p = RPoly::new();
    for (m, c) in terms {
        let e = p.entry(m.to_vec()).or_insert_with(Q::zero);
        *e += qi(*c);
    }
    p.retain(|_, c| !c.is_zero());
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotient_ring_dims() {
        // Q[l1,l2]/(l1 l2): dims 1,2,2,2,...
        let r = Ring::quotient(2, vec![rp(&[(&[1, 1], 1)])], 5);
        let d: Vec<usize> = (0..=5).map(|w| r.dim(w)).collect();
        assert_eq!(d, vec![1, 2, 2, 2, 2, 2]);
        let r = Ring::polynomial(3, 3);
        assert_eq!((0..=3).map(|w| r.dim(w)).collect::<Vec<_>>(), vec![1, 3, 6, 10]);
    }

    #[test]
    fn r_mod_i_3d() {
        let ring = Ring::polynomial(2, 5);
        let p = Presentation {
            n: 2,
            gens: vec![Bidegree::ZERO],
            relations: vec![
                vec![rp(&[(&[2, 0], 1)])],
                vec![rp(&[(&[1, 1], 1)])],
                vec![rp(&[(&[0, 2], 1)])],
            ],
        };
        let m = p.to_module(&ring).unwrap();
        assert_eq!(m.hilbert()[&0], vec![1, 2, 0, 0, 0, 0]);
        m.check(&p.relations.iter().map(|r| r[0].clone()).collect::<Vec<_>>()).unwrap();
    }
}
