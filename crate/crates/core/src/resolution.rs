//! Minimal free resolutions by degreewise syzygies, Betti tables and the
//! Koszul Tor oracle.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_traits::Zero;
use rayon::prelude::*;

use crate::graded::{add_entry, block_rref, qi, Bidegree, Mat, SVec, Q};
use crate::poly::Mono;
use crate::rmodule::{rpoly_mul, LamModule, Presentation, RPoly, Ring};
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BettiTable {
    /// β_{i,b} keyed by homological index and bidegree of the generator.
    pub entries: BTreeMap<(usize, Bidegree), usize>,
    pub cutoff: i64,
    pub stable: Vec<bool>,
}

impl BettiTable {
    pub fn get(&self, i: usize, w: i64) -> usize {
        self.entries.iter().filter(|((j, b), _)| *j == i && b.w == w).map(|(_, &n)| n).sum()
    }

    /// Nonzero β_{i,w} summed over d.
    pub fn by_weight(&self) -> BTreeMap<(usize, i64), usize> {
        let mut m = BTreeMap::new();
        for (&(i, b), &n) in &self.entries {
            if n > 0 {
                *m.entry((i, b.w)).or_insert(0) += n;
            }
        }
        m
    }

    pub fn columns(&self) -> usize {
        self.entries.keys().map(|(i, _)| i + 1).max().unwrap_or(0)
    }

    /// Rows are homological index, columns weight 0..=cutoff.
    pub fn to_tsv(&self) -> String {
        let bw = self.by_weight();
        let mut s = String::from("i");
        for w in 0..=self.cutoff {
            write!(s, "\t{w}").unwrap();
        }
        s.push_str("\tstable\n");
        for i in 0..self.columns() {
            write!(s, "{i}").unwrap();
            for w in 0..=self.cutoff {
                write!(s, "\t{}", bw.get(&(i, w)).copied().unwrap_or(0)).unwrap();
            }
            let st = self.stable.get(i).copied().unwrap_or(true);
            writeln!(s, "\t{}", if st { "yes" } else { "no" }).unwrap();
        }
        s
    }

    fn same_numbers(&self, o: &BettiTable) -> bool {
        let a: BTreeMap<_, _> = self.entries.iter().filter(|(_, &n)| n > 0).collect();
        let b: BTreeMap<_, _> = o.entries.iter().filter(|(_, &n)| n > 0).collect();
        a == b
    }

    pub fn agrees_with(&self, o: &BettiTable) -> bool {
        self.same_numbers(o)
    }
}

/// Free module over the ring with generators of given bidegrees.
#[derive(Clone, Debug)]
struct Free {
    gens: Vec<Bidegree>,
    blocks: BTreeMap<Bidegree, (Vec<(usize, usize)>, HashMap<(usize, usize), usize>)>,
}

impl Free {
    fn new(ring: &Ring, gens: Vec<Bidegree>) -> Free {
        let mut raw: BTreeMap<Bidegree, Vec<(usize, usize)>> = BTreeMap::new();
        for (g, &gd) in gens.iter().enumerate() {
            for a in 0..=(ring.cutoff - gd.w) {
                for k in 0..ring.dim(a) {
                    raw.entry(gd + Bidegree::new(a, a)).or_default().push((g, k));
                }
            }
        }
        let blocks = raw
            .into_iter()
            .map(|(b, c)| {
                let idx = c.iter().enumerate().map(|(i, &x)| (x, i)).collect();
                (b, (c, idx))
            })
            .collect();
        Free { gens, blocks }
    }

    fn dim(&self, b: Bidegree) -> usize {
        self.blocks.get(&b).map_or(0, |x| x.0.len())
    }

    /// λ^m · v for v in block b.
    fn act(&self, ring: &Ring, b: Bidegree, m: &Mono, v: &SVec) -> SVec {
        let k = m.iter().map(|&e| e as i64).sum::<i64>();
        let tb = b + Bidegree::new(k, k);
        let (Some((coords, _)), Some((_, tidx))) = (self.blocks.get(&b), self.blocks.get(&tb)) else {
            return SVec::new();
        };
        let mut out = SVec::new();
        for (&j, x) in v {
            let (g, mk) = coords[j];
            let a = b.w - self.gens[g].w;
            let mm: Mono = ring.basis_mono(a, mk).iter().zip(m).map(|(p, q)| p + q).collect();
            for (kk, y) in ring.normal_mono(&mm) {
                add_entry(&mut out, tidx[&(g, kk)], x * y);
            }
        }
        out
    }

    /// Vector in block b as polynomials per generator.
    fn to_polys(&self, ring: &Ring, b: Bidegree, v: &SVec) -> Vec<(usize, RPoly)> {
        let coords = &self.blocks[&b].0;
        let mut m: BTreeMap<usize, RPoly> = BTreeMap::new();
        for (&j, x) in v {
            let (g, k) = coords[j];
            let mono = ring.basis_mono(b.w - self.gens[g].w, k).clone();
            m.entry(g).or_default().insert(mono, x.clone());
        }
        m.into_iter().collect()
    }
}

/// What a column of the resolution maps onto: the module itself or the
/// previous free module.
enum Target<'a> {
    Module { m: &'a LamModule, blocks: BTreeMap<Bidegree, Vec<usize>>, local: HashMap<usize, usize> },
    Free(&'a Free),
}

impl Target<'_> {
    fn dim(&self, b: Bidegree) -> usize {
        match self {
            Target::Module { blocks, .. } => blocks.get(&b).map_or(0, |v| v.len()),
            Target::Free(f) => f.dim(b),
        }
    }

    fn act(&self, ring: &Ring, b: Bidegree, m: &Mono, v: &SVec) -> SVec {
        match self {
            Target::Module { m: lm, blocks, local } => {
                let Some(bl) = blocks.get(&b) else { return SVec::new() };
                let g: SVec = v.iter().map(|(&j, x)| (bl[j], x.clone())).collect();
                lm.act_mono(m, &g).into_iter().map(|(j, x)| (local[&j], x)).collect()
            }
            Target::Free(f) => f.act(ring, b, m, v),
        }
    }
}

fn unit(n: usize, a: usize) -> Mono {
    let mut m = vec![0; n];
    m[a] = 1;
    m
}

/// Columns of `cols` as a dense matrix with `rows` rows.
fn dense(rows: usize, cols: &[SVec]) -> Mat {
    let mut m = Mat::zero(rows, cols.len());
    for (j, v) in cols.iter().enumerate() {
        for (&i, x) in v {
            m.set(i, j, x.clone());
        }
    }
    m
}

fn kernel_cols(rows: usize, cols: &[SVec]) -> Vec<SVec> {
    if cols.is_empty() {
        return vec![];
    }
    let r = block_rref(&dense(rows, cols));
    r.kernel
        .iter()
        .map(|k| k.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect())
        .collect()
}

#[derive(Clone, Debug)]
pub struct FreeResolution {
    pub n: usize,
    pub cutoff: i64,
    /// Generator bidegrees of each L_i.
    pub columns: Vec<Vec<Bidegree>>,
    /// Images of column-0 generators in the module (global basis indices).
    pub augmentation: Vec<SVec>,
    /// d_L on L_i (i ≥ 1): per generator, its image as polynomials on generators of L_{i−1}.
    pub diffs: Vec<Vec<Vec<(usize, RPoly)>>>,
    pub betti: BettiTable,
}

impl FreeResolution {
    /// Scans every differential entry for a weight-0 term.
    pub fn is_minimal(&self) -> bool {
        self.diffs.iter().flatten().flatten().all(|(_, p)| p.keys().all(|m| m.iter().any(|&e| e > 0)))
    }

    /// d_L ∘ d_L = 0 modulo the ring's ideal.
    pub fn check_square_zero(&self, ring: &Ring) -> Result<(), Error> {
        for i in 2..self.diffs.len() {
            for (g, img) in self.diffs[i].iter().enumerate() {
                let mut acc: BTreeMap<usize, RPoly> = BTreeMap::new();
                for (g1, p1) in img {
                    for (g2, p2) in &self.diffs[i - 1][*g1] {
                        let e = acc.entry(*g2).or_default();
                        for (m, c) in rpoly_mul(p1, p2) {
                            let x = e.entry(m.clone()).or_insert_with(Q::zero);
                            *x += c;
                        }
                    }
                }
                for (g2, p) in acc {
                    let w = self.columns[i][g].w - self.columns[i - 2][g2].w;
                    if !ring.normal(w, &p).is_empty() {
                        return Err(Error::Invariant(format!("d_L^2 != 0 at column {i}, generator {g}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Generators and relations read off the first two columns.
    pub fn presentation(&self) -> Presentation {
        let gens = self.columns.first().cloned().unwrap_or_default();
        let relations = self
            .diffs
            .get(1)
            .map(|d| {
                d.iter()
                    .map(|img| {
                        let mut r = vec![RPoly::new(); gens.len()];
                        for (g, p) in img {
                            r[*g] = p.clone();
                        }
                        r
                    })
                    .collect()
            })
            .unwrap_or_default();
        Presentation { n: self.n, gens, relations }
    }

    /// Σ_i (−1)^i dim(L_i)_w per weight.
    pub fn euler(&self, ring: &Ring) -> Vec<i64> {
        let mut e = vec![0i64; (self.cutoff + 1) as usize];
        for (i, col) in self.columns.iter().enumerate() {
            let s = if i % 2 == 0 { 1 } else { -1 };
            for g in col {
                for w in g.w..=self.cutoff {
                    e[w as usize] += s * ring.dim(w - g.w) as i64;
                }
            }
        }
        e
    }
}


/// New generators in each block: K_b modulo Σ λ_α K_{b−(1,1)}.
fn select_generators(
    ring: &Ring,
    target: &Target,
    kernels: &BTreeMap<Bidegree, Vec<SVec>>,
) -> Vec<(Bidegree, SVec)> {
    let n = ring.n;
    let out: Vec<Vec<(Bidegree, SVec)>> = kernels
        .par_iter()
        .map(|(&b, kb)| {
            if kb.is_empty() {
                return vec![];
            }
            let mut cols = Vec::new();
            if let Some(prev) = kernels.get(&(b - Bidegree::new(1, 1))) {
                for v in prev {
                    for a in 0..n {
                        cols.push(target.act(ring, b - Bidegree::new(1, 1), &unit(n, a), v));
                    }
                }
            }
            let nl = cols.len();
            cols.extend(kb.iter().cloned());
            let r = block_rref(&dense(target.dim(b), &cols));
            r.pivots.iter().filter(|&&p| p >= nl).map(|&p| (b, cols[p].clone())).collect()
        })
        .collect();
    out.into_iter().flatten().collect()
}

/// Minimal free resolution of `m` over `ring`, exact in weights ≤ cutoff.
pub fn minimal_resolution(m: &LamModule, ring: &Ring) -> Result<FreeResolution, Error> {
    let cutoff = ring.cutoff;
    if let Some(e) = m.space.elems.iter().find(|e| e.deg.w > cutoff) {
        return Err(Error::CutoffTooSmall(format!("module has basis in weight {} > {}", e.deg.w, cutoff)));
    }
    let blocks = m.blocks();
    let mut local = HashMap::new();
    for v in blocks.values() {
        for (k, &g) in v.iter().enumerate() {
            local.insert(g, k);
        }
    }
    let mtarget = Target::Module { m, blocks: blocks.clone(), local };
    let mut kernels: BTreeMap<Bidegree, Vec<SVec>> = blocks
        .iter()
        .map(|(&b, v)| (b, (0..v.len()).map(|k| SVec::from([(k, qi(1))])).collect()))
        .collect();

    let mut columns = Vec::new();
    let mut augmentation = Vec::new();
    let mut diffs: Vec<Vec<Vec<(usize, RPoly)>>> = Vec::new();
    let mut prev_free: Option<Free> = None;
    loop {
        let target = match &prev_free {
            None => &mtarget,
            Some(_) => &Target::Free(prev_free.as_ref().unwrap()),
        };
        let gens = select_generators(ring, target, &kernels);
        if gens.is_empty() {
            break;
        }
        let degs: Vec<Bidegree> = gens.iter().map(|(b, _)| *b).collect();
        match &prev_free {
            None => {
                for (b, v) in &gens {
                    augmentation.push(v.iter().map(|(&j, x)| (blocks[b][j], x.clone())).collect());
                }
                diffs.push(vec![]);
            }
            Some(f) => diffs.push(gens.iter().map(|(b, v)| f.to_polys(ring, *b, v)).collect()),
        }
        let free = Free::new(ring, degs.clone());
        // φ on each block of the new free module, then its kernel
        let new_kernels: BTreeMap<Bidegree, Vec<SVec>> = free
            .blocks
            .par_iter()
            .map(|(&b, (coords, _))| {
                let cols: Vec<SVec> = coords
                    .iter()
                    .map(|&(g, k)| {
                        let (gb, gv) = &gens[g];
                        target.act(ring, *gb, ring.basis_mono(b.w - gb.w, k), gv)
                    })
                    .collect();
                (b, kernel_cols(target.dim(b), &cols))
            })
            .collect();
        columns.push(degs);
        kernels = new_kernels;
        prev_free = Some(free);
        if columns.len() as i64 > cutoff + ring.n as i64 + 2 {
            break;
        }
    }
    let betti = betti_from_columns(&columns, &diffs, cutoff);
    Ok(FreeResolution { n: ring.n, cutoff, columns, augmentation, diffs, betti })
}

fn betti_from_columns(columns: &[Vec<Bidegree>], diffs: &[Vec<Vec<(usize, RPoly)>>], cutoff: i64) -> BettiTable {
    let mut entries = BTreeMap::new();
    for (i, col) in columns.iter().enumerate() {
        for b in col {
            *entries.entry((i, *b)).or_insert(0) += 1;
        }
    }
    let span = diffs
        .iter()
        .flatten()
        .flatten()
        .filter_map(|(_, p)| p.keys().map(|m| m.iter().sum::<u32>() as i64).max())
        .max()
        .unwrap_or(1)
        .max(1);
    let stable = stability(columns.len(), &entries, cutoff, span);
    BettiTable { entries, cutoff, stable }
}

/// Column i is flagged stable when it has no generators in the last `span`
/// weights below the cutoff, so no later syzygy can feed back into it.
fn stability(ncols: usize, entries: &BTreeMap<(usize, Bidegree), usize>, cutoff: i64, span: i64) -> Vec<bool> {
    (0..ncols.max(1))
        .map(|i| !entries.iter().any(|((j, b), &n)| *j == i && n > 0 && b.w > cutoff - span))
        .collect()
}

/// β_{i,b} = dim H_i(M ⊗ Kos(λ)) in bidegree b, over the polynomial ring.
pub fn tor_oracle(m: &LamModule) -> BettiTable {
    let n = m.n;
    let cutoff = m.cutoff;
    let blocks = m.blocks();
    let subsets: Vec<Vec<Vec<usize>>> = (0..=n)
        .map(|i| {
            (0u32..(1 << n))
                .filter(|s| s.count_ones() as usize == i)
                .map(|s| (0..n).filter(|a| s >> a & 1 == 1).collect())
                .collect()
        })
        .collect();
    // chain space C_i at b: pairs (subset, module basis element in b − (i,i))
    let chains = |i: usize, b: Bidegree| -> Vec<(usize, usize)> {
        let mb = b - Bidegree::new(i as i64, i as i64);
        let Some(mv) = blocks.get(&mb) else { return vec![] };
        let mut out = Vec::new();
        for s in 0..subsets[i].len() {
            for &g in mv {
                out.push((s, g));
            }
        }
        out
    };
    let rank_at = |i: usize, b: Bidegree| -> usize {
        if i == 0 || i > n {
            return 0;
        }
        let src = chains(i, b);
        let tgt = chains(i - 1, b);
        if src.is_empty() || tgt.is_empty() {
            return 0;
        }
        let tidx: HashMap<(usize, usize), usize> = tgt.iter().enumerate().map(|(k, &x)| (x, k)).collect();
        let sidx: HashMap<&Vec<usize>, usize> = subsets[i - 1].iter().enumerate().map(|(k, s)| (s, k)).collect();
        let cols: Vec<SVec> = src
            .iter()
            .map(|&(s, g)| {
                let set = &subsets[i][s];
                let mut v = SVec::new();
                for (j, &a) in set.iter().enumerate() {
                    let mut rest = set.clone();
                    rest.remove(j);
                    let sign = if j % 2 == 0 { qi(1) } else { qi(-1) };
                    let img = m.lam[a].apply(&SVec::from([(g, qi(1))]));
                    for (h, x) in img {
                        add_entry(&mut v, tidx[&(sidx[&rest], h)], &sign * x);
                    }
                }
                v
            })
            .collect();
        crate::graded::rank(&dense(tgt.len(), &cols))
    };
    let mut targets = Vec::new();
    for &b in blocks.keys() {
        for i in 0..=n {
            let tb = b + Bidegree::new(i as i64, i as i64);
            if tb.w <= cutoff {
                targets.push((i, tb));
            }
        }
    }
    targets.sort();
    targets.dedup();
    let entries: BTreeMap<(usize, Bidegree), usize> = targets
        .par_iter()
        .filter_map(|&(i, b)| {
            let dim = chains(i, b).len();
            let h = dim - rank_at(i, b) - rank_at(i + 1, b);
            (h > 0).then_some(((i, b), h))
        })
        .collect();
    let ncols = entries.keys().map(|(i, _)| i + 1).max().unwrap_or(0);
    let stable = stability(ncols, &entries, cutoff, 1);
    BettiTable { entries, cutoff, stable }
}

/// Cohomology of a λ-linear differential `d` on a truncated space, split by
/// totalized degree k = d − w into λ-modules with extracted presentations.
#[derive(Clone, Debug)]
pub struct HomologyModules {
    pub cutoff: i64,
    /// dim H^k per weight 0..=cutoff.
    pub dims: BTreeMap<i64, Vec<usize>>,
    pub modules: BTreeMap<i64, LamModule>,
    pub presentations: BTreeMap<i64, Presentation>,
    pub contraction: crate::graded::Contraction,
}

pub fn homology_modules(
    space: &crate::graded::GradedSpace,
    d: &crate::graded::SparseMat,
    lam: &[crate::graded::SparseMat],
    cutoff: i64,
) -> Result<HomologyModules, Error> {
    let degs: Vec<Bidegree> = space.elems.iter().map(|e| e.deg).collect();
    let c = crate::graded::Contraction::build(&degs, d)?;
    let mut by_k: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (s, b) in c.small_deg.iter().enumerate() {
        by_k.entry(b.total()).or_default().push(s);
    }
    let n1 = lam.len();
    let ring = Ring::polynomial(n1, cutoff);
    let mut dims = BTreeMap::new();
    let mut modules = BTreeMap::new();
    let mut presentations = BTreeMap::new();
    for (&k, members) in &by_k {
        let mut dv = vec![0; (cutoff + 1).max(0) as usize];
        for &s in members {
            let w = c.small_deg[s].w;
            if (0..=cutoff).contains(&w) {
                dv[w as usize] += 1;
            }
        }
        dims.insert(k, dv);
        let local: HashMap<usize, usize> = members.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let sp = crate::graded::GradedSpace::from_degrees(&members.iter().map(|&s| c.small_deg[s]).collect::<Vec<_>>());
        let lm = lam
            .iter()
            .map(|l| crate::graded::SparseMat {
                rows: members.len(),
                cols: members
                    .iter()
                    .map(|&s| c.p.apply(&l.apply(&c.reps[s])).into_iter().map(|(t, x)| (local[&t], x)).collect())
                    .collect(),
            })
            .collect();
        let m = LamModule { n: n1, cutoff, space: sp, lam: lm };
        let res = minimal_resolution(&m, &ring)?;
        presentations.insert(k, res.presentation());
        modules.insert(k, m);
    }
    Ok(HomologyModules { cutoff, dims, modules, presentations, contraction: c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmodule::rp;

    fn r_mod_i_3d(w: i64) -> (Ring, LamModule) {
        let ring = Ring::polynomial(2, w);
        let p = Presentation {
            n: 2,
            gens: vec![Bidegree::ZERO],
            relations: vec![vec![rp(&[(&[2, 0], 1)])], vec![rp(&[(&[1, 1], 1)])], vec![rp(&[(&[0, 2], 1)])]],
        };
        let m = p.to_module(&ring).unwrap();
        (ring, m)
    }

    #[test]
    fn free_module_has_no_syzygies() {
        let ring = Ring::polynomial(2, 4);
        let p = Presentation { n: 2, gens: vec![Bidegree::new(1, 1)], relations: vec![] };
        let m = p.to_module(&ring).unwrap();
        let r = minimal_resolution(&m, &ring).unwrap();
        assert_eq!(r.betti.by_weight(), BTreeMap::from([((0, 1), 1)]));
        assert!(tor_oracle(&m).agrees_with(&r.betti));
    }

    #[test]
    fn three_dim_ideal() {
        let (ring, m) = r_mod_i_3d(6);
        let r = minimal_resolution(&m, &ring).unwrap();
        assert_eq!(r.betti.by_weight(), BTreeMap::from([((0, 0), 1), ((1, 2), 3), ((2, 3), 2)]));
        assert!(r.is_minimal());
        r.check_square_zero(&ring).unwrap();
        assert!(tor_oracle(&m).agrees_with(&r.betti));
        let h = m.hilbert()[&0].iter().map(|&x| x as i64).collect::<Vec<_>>();
        assert_eq!(r.euler(&ring), h);
        assert!(r.betti.stable.iter().all(|&s| s));
        let back = r.presentation().to_module(&ring).unwrap();
        assert_eq!(back.hilbert(), m.hilbert());
    }

    #[test]
    fn residue_field_over_hypersurface_is_periodic() {
        let ring = Ring::quotient(1, vec![rp(&[(&[2], 1)])], 6);
        let p = Presentation { n: 1, gens: vec![Bidegree::ZERO], relations: vec![vec![rp(&[(&[1], 1)])]] };
        let m = p.to_module(&ring).unwrap();
        let r = minimal_resolution(&m, &ring).unwrap();
        for i in 0..=6 {
            assert_eq!(r.betti.get(i, i as i64), 1, "column {i}");
        }
        r.check_square_zero(&ring).unwrap();
    }

    #[test]
    fn tsv_shape() {
        let (ring, m) = r_mod_i_3d(4);
        let t = minimal_resolution(&m, &ring).unwrap().betti.to_tsv();
        assert_eq!(t.lines().next().unwrap(), "i\t0\t1\t2\t3\t4\tstable");
        assert_eq!(t.lines().nth(2).unwrap(), "1\t0\t0\t3\t0\t0\tyes");
    }
}
