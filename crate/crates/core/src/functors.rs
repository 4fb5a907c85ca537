//! The component-multiplet functor μA, derived invariants and roundtrips.
//!
//! Every input becomes a curved module Y (finite graded basis, λ action and
//! a δ-polynomial differential D_Y with D_Y² = Σ_μ (λfλ)^μ δ_μ). The
//! superspace arena is Λ[θ] ⊗ Y over Q[δ] with
//! 𝒟 = λ^α ∂_{θ^α} − λ^α f^μ_{αβ} θ^β δ_μ + D_Y and the supercharges act by
//! L_α = ∂_{θ^α} + f^μ_{αβ} θ^β δ_μ.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;

use crate::algebra::{build_ce, AlgebraSpec};
use crate::graded::{qfrac, qi, BasisElem, Bidegree, GradedSpace, SVec, SparseMat, Q};
use crate::module_io::{AlgebraRef, Input, MultipletFiber, PresentedRModule, SemifreeDGModule};
use crate::poly::{enumerate_basis, mono_mul, SuperPoly};
use crate::resolution::{homology_modules, HomologyModules};
use crate::rmodule::{monomials, LamModule, Ring};
use crate::transfer::{
    check_linf, check_rho1_closed, check_third_order, dmon_order, transfer_rho, DComplex, DMon, DOp, Pipeline,
};
use crate::Error;

#[derive(Clone, Debug)]
pub struct CurvedModule {
    pub n1: usize,
    pub n2: usize,
    pub cutoff: i64,
    pub space: GradedSpace,
    /// Totalized degree d − w of each basis vector.
    pub tag: Vec<i64>,
    pub lam: Vec<SparseMat>,
    pub dy: DOp,
}

fn dunit(n2: usize, mu: usize) -> DMon {
    let mut m = vec![0; n2];
    m[mu] = 1;
    m
}

impl CurvedModule {
    pub fn from_lam_module(m: &LamModule, n2: usize) -> CurvedModule {
        let n = m.space.len();
        CurvedModule {
            n1: m.n,
            n2,
            cutoff: m.cutoff,
            space: m.space.clone(),
            tag: m.space.elems.iter().map(|e| e.deg.total()).collect(),
            lam: m.lam.clone(),
            dy: DOp::zero(n2, n, n),
        }
    }

    pub fn from_presented(m: &PresentedRModule, spec: &AlgebraSpec, cutoff: i64) -> Result<CurvedModule, Error> {
        let lm = m.presentation.to_module(&Ring::polynomial(spec.n1, cutoff))?;
        if m.rmod_i {
            lm.check(&spec.ideal())?;
        }
        Ok(CurvedModule::from_lam_module(&lm, spec.n2))
    }

    /// ℚ[λ, v] ⊗ generators with D_Y = d_Γ + v^μ δ_μ.
    pub fn from_semifree(m: &SemifreeDGModule, spec: &AlgebraSpec, cutoff: i64) -> Result<CurvedModule, Error> {
        let ce = build_ce(spec)?;
        crate::module_io::validate_semifree(m, &ce)?;
        let t = ce.table.clone();
        let mut elems = Vec::new();
        let mut keys = Vec::new();
        for (g, &gd) in m.gens.iter().enumerate() {
            let (_, monos) = enumerate_basis(&t, (0, cutoff - gd.w), (i64::MIN / 4, i64::MAX / 4))?;
            for mono in monos {
                let label = format!("{}·{}", t.render_mono(&mono), m.labels.get(g).filter(|l| !l.is_empty()).cloned().unwrap_or(format!("e{g}")));
                elems.push(BasisElem { deg: t.mono_deg(&mono) + gd, label: Some(label) });
                keys.push((mono, g));
            }
        }
        let (space, perm) = GradedSpace::sorted(elems);
        let mut sorted_keys = vec![(vec![], 0); keys.len()];
        for (old, k) in keys.into_iter().enumerate() {
            sorted_keys[perm[old]] = k;
        }
        let index: HashMap<(Vec<u32>, usize), usize> =
            sorted_keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        let n = space.len();
        let (n1, n2) = (spec.n1, spec.n2);
        let mut dy = DOp::zero(n2, n, n);
        let mut lam = vec![SparseMat::zero(n, n); n1];
        for (j, (mono, g)) in sorted_keys.iter().enumerate() {
            let img = m.apply(&ce, &[(*g, SuperPoly::mono(&t, mono.clone(), qi(1)))])?;
            for (h, p) in img {
                for (mm, c) in &p.terms {
                    if let Some(&i) = index.get(&(mm.clone(), h)) {
                        dy.add_entry(vec![0; n2], i, j, c.clone());
                    }
                }
            }
            for mu in 0..n2 {
                let mut v = vec![0; t.len()];
                v[n1 + mu] = 1;
                if let Some((neg, mm)) = mono_mul(&t, &v, mono) {
                    if let Some(&i) = index.get(&(mm, *g)) {
                        dy.add_entry(dunit(n2, mu), i, j, if neg { qi(-1) } else { qi(1) });
                    }
                }
            }
            for (a, l) in lam.iter_mut().enumerate() {
                let mut mm = mono.clone();
                mm[a] += 1;
                if let Some(&i) = index.get(&(mm, *g)) {
                    l.cols[j] = SVec::from([(i, qi(1))]);
                }
            }
        }
        dy.prune();
        let tag = space.elems.iter().map(|e| e.deg.total()).collect();
        Ok(CurvedModule { n1, n2, cutoff, space, tag, lam, dy })
    }

    /// R ⊗ E₀ with D_Y = D₀ + λ^α ρ¹_α − ½ λ^α λ^β ρ²_{αβ}.
    pub fn from_fiber(f: &MultipletFiber, spec: &AlgebraSpec, cutoff: i64) -> Result<CurvedModule, Error> {
        let (n1, n2) = (spec.n1, spec.n2);
        let mut elems = Vec::new();
        let mut keys = Vec::new();
        for (e, el) in f.space.elems.iter().enumerate() {
            for k in 0..=(cutoff - el.deg.w) {
                for m in monomials(n1, k as u32) {
                    let lbl = format!("{}·{}", crate::rmodule::mono_label(&m), el.label.clone().unwrap_or(format!("e{e}")));
                    elems.push(BasisElem { deg: el.deg + Bidegree::new(k, k), label: Some(lbl) });
                    keys.push((m, e));
                }
            }
        }
        let (space, perm) = GradedSpace::sorted(elems);
        let mut sk = vec![(vec![], 0); keys.len()];
        for (old, k) in keys.into_iter().enumerate() {
            sk[perm[old]] = k;
        }
        let index: HashMap<(Vec<u32>, usize), usize> = sk.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        let n = space.len();
        let mut dy = DOp::zero(n2, n, n);
        let mut lam = vec![SparseMat::zero(n, n); n1];
        let push = |dy: &mut DOp, mon: &DMon, m: &Vec<u32>, i: usize, j: usize, c: Q| {
            if let Some(&t) = index.get(&(m.clone(), i)) {
                dy.add_entry(mon.clone(), t, j, c);
            }
        };
        let half = qfrac(1, 2);
        for (j, (m, e)) in sk.iter().enumerate() {
            for (mon, a) in &f.d0.terms {
                for (&i, x) in &a.cols[*e] {
                    push(&mut dy, mon, m, i, j, x.clone());
                }
            }
            for (al, r) in f.rho1.iter().enumerate() {
                let mut mm = m.clone();
                mm[al] += 1;
                for (mon, a) in &r.terms {
                    for (&i, x) in &a.cols[*e] {
                        push(&mut dy, mon, &mm, i, j, x.clone());
                    }
                }
            }
            for (&(al, be), r) in &f.rho2 {
                let mut mm = m.clone();
                mm[al] += 1;
                mm[be] += 1;
                // ordered pairs (α,β) and (β,α) both contribute
                let c = if al == be { -half.clone() } else { qi(-1) };
                for (mon, a) in &r.terms {
                    for (&i, x) in &a.cols[*e] {
                        push(&mut dy, mon, &mm, i, j, &c * x);
                    }
                }
            }
            for (al, l) in lam.iter_mut().enumerate() {
                let mut mm = m.clone();
                mm[al] += 1;
                if let Some(&t) = index.get(&(mm, *e)) {
                    l.cols[j] = SVec::from([(t, qi(1))]);
                }
            }
        }
        dy.prune();
        let tag = space.elems.iter().map(|e| e.deg.total()).collect();
        Ok(CurvedModule { n1, n2, cutoff, space, tag, lam, dy })
    }

    pub fn from_input(x: &Input, cutoff: i64) -> Result<CurvedModule, Error> {
        let spec = x.algebra().spec()?;
        match x {
            Input::Presented(m) => CurvedModule::from_presented(m, &spec, cutoff),
            Input::Semifree(m) => CurvedModule::from_semifree(m, &spec, cutoff),
            Input::Fiber(f) => CurvedModule::from_fiber(f, &spec, cutoff),
        }
    }

    /// D_Y² = Σ_μ (λfλ)^μ δ_μ on every basis vector.
    pub fn check_curvature(&self, spec: &AlgebraSpec) -> Result<(), Error> {
        let ideal = spec.ideal();
        for j in 0..self.space.len() {
            let mut lhs = self.dy.apply(&self.dy.apply_basis(j));
            for (mu, q) in ideal.iter().enumerate() {
                let e = SVec::from([(j, qi(1))]);
                let mut acc = SVec::new();
                for (m, c) in q {
                    let mut v = e.clone();
                    for (a, &k) in m.iter().enumerate() {
                        for _ in 0..k {
                            v = self.lam[a].apply(&v);
                        }
                    }
                    crate::graded::svec_add_scaled(&mut acc, &v, c);
                }
                crate::transfer::dvec_add_scaled(&mut lhs, &crate::transfer::DVec::from([(dunit(self.n2, mu), acc)]), &qi(-1));
            }
            if !crate::transfer::dvec_is_zero(&lhs) {
                return Err(Error::Invariant(format!("D_Y² ≠ λfλ δ on basis {j} at {}", self.space.deg(j))));
            }
        }
        Ok(())
    }
}

/// Λ[θ] ⊗ Y with 𝒟 and the supercharge operators.
#[derive(Clone, Debug)]
pub struct Arena {
    pub cx: DComplex,
    pub l: Vec<DOp>,
    /// Constant part of 1 ⊗ D_Y.
    pub dy0: SparseMat,
    pub keys: Vec<(u32, usize)>,
}

fn sign_before(s: u32, a: usize) -> Q {
    if (s & ((1u32 << a) - 1)).count_ones() % 2 == 0 {
        qi(1)
    } else {
        qi(-1)
    }
}

pub fn build_arena(y: &CurvedModule, spec: &AlgebraSpec, cutoff: i64) -> Arena {
    let (n1, n2) = (y.n1, y.n2);
    let mut elems = Vec::new();
    let mut keys = Vec::new();
    for s in 0u32..(1 << n1) {
        let k = s.count_ones() as i64;
        for (j, e) in y.space.elems.iter().enumerate() {
            if e.deg.w + k <= cutoff {
                let th: Vec<String> = (0..n1).filter(|a| s >> a & 1 == 1).map(|a| format!("t{}", a + 1)).collect();
                let lbl = if th.is_empty() {
                    e.label.clone().unwrap_or_default()
                } else {
                    format!("{}·{}", th.join(""), e.label.clone().unwrap_or_default())
                };
                elems.push(BasisElem { deg: e.deg + Bidegree::new(k, 0), label: Some(lbl) });
                keys.push((s, j));
            }
        }
    }
    let (space, perm) = GradedSpace::sorted(elems);
    let mut sk = vec![(0, 0); keys.len()];
    for (old, k) in keys.into_iter().enumerate() {
        sk[perm[old]] = k;
    }
    let index: HashMap<(u32, usize), usize> = sk.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let n = space.len();
    let zero = vec![0u32; n2];
    let mut d = DOp::zero(n2, n, n);
    let mut dy0 = SparseMat::zero(n, n);
    let mut l = vec![DOp::zero(n2, n, n); n1];
    for (j, &(s, yj)) in sk.iter().enumerate() {
        let par = if s.count_ones() % 2 == 0 { qi(1) } else { qi(-1) };
        for a in 0..n1 {
            if s >> a & 1 == 1 {
                let sg = sign_before(s, a);
                let s2 = s & !(1 << a);
                for (&i, x) in &y.lam[a].cols[yj] {
                    if let Some(&t) = index.get(&(s2, i)) {
                        d.add_entry(zero.clone(), t, j, &sg * x);
                    }
                }
                if let Some(&t) = index.get(&(s2, yj)) {
                    l[a].add_entry(zero.clone(), t, j, sg.clone());
                }
            }
        }
        for mu in 0..n2 {
            for a in 0..n1 {
                for b in 0..n1 {
                    let f = &spec.f[mu][a][b];
                    if f.is_zero() || s >> b & 1 == 1 {
                        continue;
                    }
                    let sg = sign_before(s, b);
                    let s2 = s | (1 << b);
                    for (&i, x) in &y.lam[a].cols[yj] {
                        if let Some(&t) = index.get(&(s2, i)) {
                            d.add_entry(dunit(n2, mu), t, j, -(f * &sg * x));
                        }
                    }
                    if let Some(&t) = index.get(&(s2, yj)) {
                        l[a].add_entry(dunit(n2, mu), t, j, f * &sg);
                    }
                }
            }
        }
        for (mon, a) in &y.dy.terms {
            for (&i, x) in &a.cols[yj] {
                if let Some(&t) = index.get(&(s, i)) {
                    d.add_entry(mon.clone(), t, j, &par * x);
                    if *mon == zero {
                        crate::graded::add_entry(&mut dy0.cols[j], t, &par * x);
                    }
                }
            }
        }
    }
    d.prune();
    l.iter_mut().for_each(DOp::prune);
    let tag = sk.iter().map(|&(_, yj)| y.tag[yj]).collect();
    Arena { cx: DComplex { n2, space, tag, d }, l, dy0, keys: sk }
}

#[derive(Clone, Debug)]
pub struct MuOptions {
    pub cutoff: i64,
    pub check_third_order: bool,
    /// Also check the composite homotopy identity on the arena (slow).
    pub verify_homotopy: bool,
}

impl MuOptions {
    pub fn new(cutoff: i64) -> MuOptions {
        MuOptions { cutoff, check_third_order: true, verify_homotopy: false }
    }
}

#[derive(Clone, Debug)]
pub struct ComponentMultiplet {
    pub algebra: AlgebraRef,
    pub n1: usize,
    pub n2: usize,
    pub cutoff: i64,
    /// ρ′ entries into weights above this are truncated.
    pub trusted_weight: i64,
    pub fields: GradedSpace,
    /// Totalized degree of the H^k (or module) each field came from.
    pub tag: Vec<i64>,
    pub d: DOp,
    pub rho1: Vec<DOp>,
    pub rho2: BTreeMap<(usize, usize), DOp>,
    /// ⊕_k μA(H^k) with the induced cross terms, before the last contraction.
    pub intermediate: Option<DComplex>,
}

/// Nonzero entries of a differential by (δ-order, source tag, target tag).
pub fn terms_by_order(d: &DOp, tag: &[i64]) -> BTreeMap<(u32, i64, i64), usize> {
    let mut out = BTreeMap::new();
    for (m, a) in &d.terms {
        for (j, c) in a.cols.iter().enumerate() {
            for &i in c.keys() {
                *out.entry((dmon_order(m), tag[j], tag[i])).or_insert(0) += 1;
            }
        }
    }
    out
}

/// Bidegree shifts occurring in a differential, per δ-order.
pub fn shifts_by_order(d: &DOp, space: &GradedSpace) -> BTreeMap<u32, Vec<Bidegree>> {
    let mut out: BTreeMap<u32, Vec<Bidegree>> = BTreeMap::new();
    for (m, a) in &d.terms {
        for (j, c) in a.cols.iter().enumerate() {
            for &i in c.keys() {
                let v = out.entry(dmon_order(m)).or_default();
                let s = space.deg(i) - space.deg(j);
                if !v.contains(&s) {
                    v.push(s);
                }
            }
        }
    }
    out
}

fn euler(space: &GradedSpace, cutoff: i64) -> Vec<i64> {
    let mut e = vec![0i64; (cutoff + 1).max(0) as usize];
    for el in &space.elems {
        if (0..=cutoff).contains(&el.deg.w) {
            e[el.deg.w as usize] += if el.deg.d.rem_euclid(2) == 0 { 1 } else { -1 };
        }
    }
    e
}

impl ComponentMultiplet {
    pub fn dims(&self) -> BTreeMap<Bidegree, usize> {
        self.fields.dims()
    }

    pub fn intermediate_dims(&self) -> BTreeMap<Bidegree, usize> {
        self.intermediate.as_ref().map(|c| c.space.dims()).unwrap_or_default()
    }

    /// The multiplet as fiber data; all fields must lie in trusted weights.
    pub fn to_fiber(&self) -> Result<MultipletFiber, Error> {
        if let Some(e) = self.fields.elems.iter().find(|e| e.deg.w > self.trusted_weight) {
            return Err(Error::CutoffTooSmall(format!(
                "field at {} lies above the trusted weight {}",
                e.deg, self.trusted_weight
            )));
        }
        Ok(MultipletFiber {
            algebra: self.algebra.clone(),
            space: self.fields.clone(),
            d0: self.d.clone(),
            rho1: self.rho1.clone(),
            rho2: self.rho2.iter().filter(|(_, op)| !op.is_zero()).map(|(k, v)| (*k, v.clone())).collect(),
            annotations: BTreeMap::new(),
        })
    }
}

/// Runs the staged transfer on the arena of `y`.
pub fn mu_a(y: &CurvedModule, algebra: &AlgebraRef, opts: &MuOptions) -> Result<ComponentMultiplet, Error> {
    let spec = algebra.spec()?;
    let cutoff = opts.cutoff;
    let arena = build_arena(y, &spec, cutoff);
    log::info!("arena: {} basis vectors", arena.cx.space.len());
    arena.cx.check_square_zero()?;
    let zero = vec![0u32; y.n2];
    let mut pl = Pipeline::new(arena.cx.clone());
    if !arena.dy0.is_zero() {
        pl.push_with(arena.dy0.clone())?;
        log::info!("after D_Y contraction: {}", pl.small().space.len());
    }
    pl.push(|_, r, c| r == c)?;
    let intermediate = pl.small().clone();
    log::info!("after k-preserving contraction: {}", intermediate.space.len());
    if intermediate.d.terms.contains_key(&zero) {
        pl.push(|_, _, _| true)?;
    }
    let small = pl.small().clone();
    small.check_square_zero()?;
    if euler(&arena.cx.space, cutoff) != euler(&small.space, cutoff) {
        return Err(Error::Invariant("Euler characteristic changed under transfer".into()));
    }
    if opts.verify_homotopy {
        pl.verify(cutoff)?;
    }
    let tr = transfer_rho(&pl, &arena.l, cutoff)?;
    check_rho1_closed(&small.space, &small.d, &tr.rho1, tr.trusted_weight)?;
    check_linf(&small.space, &small.d, &tr.rho1, &tr.rho2, &spec.f, tr.trusted_weight)?;
    if opts.check_third_order {
        check_third_order(&pl, &arena.l, cutoff)?;
    }
    let has_stage_b = pl.stages.len() >= 2 || !arena.dy0.is_zero();
    Ok(ComponentMultiplet {
        algebra: algebra.clone(),
        n1: y.n1,
        n2: y.n2,
        cutoff,
        trusted_weight: tr.trusted_weight,
        fields: small.space.clone(),
        tag: small.tag.clone(),
        d: small.d.clone(),
        rho1: tr.rho1,
        rho2: tr.rho2,
        intermediate: has_stage_b.then_some(intermediate),
    })
}

/// Default cutoff: max generator weight + n1 + 4.
pub fn default_cutoff(x: &Input) -> Result<i64, Error> {
    let spec = x.algebra().spec()?;
    let gmax = match x {
        Input::Presented(m) => m.presentation.gens.iter().map(|b| b.w).max().unwrap_or(0),
        Input::Semifree(m) => m.gens.iter().map(|b| b.w).max().unwrap_or(0),
        Input::Fiber(f) => f.space.elems.iter().map(|e| e.deg.w).max().unwrap_or(0),
    };
    Ok(gmax + spec.n1 as i64 + 4)
}

pub fn mu_a_underived(m: &PresentedRModule, opts: &MuOptions) -> Result<ComponentMultiplet, Error> {
    let spec = m.algebra.spec()?;
    let y = CurvedModule::from_presented(m, &spec, opts.cutoff)?;
    mu_a(&y, &m.algebra, opts)
}

pub fn mu_a_derived(g: &SemifreeDGModule, opts: &MuOptions) -> Result<ComponentMultiplet, Error> {
    let spec = g.algebra.spec()?;
    let y = CurvedModule::from_semifree(g, &spec, opts.cutoff)?;
    mu_a(&y, &g.algebra, opts)
}

#[derive(Clone, Debug)]
pub struct InvariantsResult {
    pub cutoff: i64,
    pub homology: HomologyModules,
    /// Totalized degrees with nonzero cohomology.
    pub degrees: Vec<i64>,
    pub concentrated: bool,
}

impl InvariantsResult {
    pub fn hilbert(&self, k: i64) -> Vec<usize> {
        self.homology.dims.get(&k).cloned().unwrap_or_else(|| vec![0; (self.cutoff + 1) as usize])
    }
}

/// Cohomology of (R ⊗ E₀, D_Y at δ = 0).
pub fn derived_invariants(f: &MultipletFiber, cutoff: i64) -> Result<InvariantsResult, Error> {
    let spec = f.algebra.spec()?;
    let y = CurvedModule::from_fiber(f, &spec, cutoff)?;
    let d0 = y.dy.order0();
    if !d0.compose(&d0).is_zero() {
        return Err(Error::Invariant("invariants differential does not square to zero".into()));
    }
    let homology = homology_modules(&y.space, &d0, &y.lam, cutoff)?;
    let degrees: Vec<i64> =
        homology.dims.iter().filter(|(_, v)| v.iter().any(|&x| x > 0)).map(|(&k, _)| k).collect();
    let concentrated = degrees.len() == 1;
    Ok(InvariantsResult { cutoff, homology, degrees, concentrated })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recognition {
    pub underived: bool,
    pub degrees: Vec<i64>,
}

pub fn recognize_underived(f: &MultipletFiber, cutoff: i64) -> Result<Recognition, Error> {
    let r = derived_invariants(f, cutoff)?;
    Ok(Recognition { underived: r.concentrated, degrees: r.degrees })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundtripReport {
    pub kind: char,
    pub passed: bool,
    pub detail: String,
    /// First differing block, if any.
    pub mismatch: Option<String>,
}

fn hilbert_of(m: &LamModule) -> BTreeMap<i64, Vec<usize>> {
    let mut h = m.hilbert();
    h.retain(|_, v| v.iter().any(|&x| x > 0));
    h
}

/// (a) and (c): module → μA → fiber → invariants, compared with the module.
pub fn roundtrip_module(m: &PresentedRModule, opts: &MuOptions) -> Result<RoundtripReport, Error> {
    let spec = m.algebra.spec()?;
    let mult = mu_a_underived(m, opts)?;
    let fiber = mult.to_fiber()?;
    crate::module_io::validate_fiber(&fiber, &spec)?;
    let inv = derived_invariants(&fiber, mult.trusted_weight)?;
    let lm = m.presentation.to_module(&Ring::polynomial(spec.n1, mult.trusted_weight))?;
    let want = hilbert_of(&lm);
    let mut got: BTreeMap<i64, Vec<usize>> = inv.homology.dims.clone();
    got.retain(|_, v| v.iter().any(|&x| x > 0));
    let mismatch = first_mismatch(&want, &got);
    Ok(RoundtripReport {
        kind: 'a',
        passed: mismatch.is_none(),
        detail: format!("recovered degrees {:?} up to weight {}", inv.degrees, mult.trusted_weight),
        mismatch,
    })
}

fn first_mismatch(want: &BTreeMap<i64, Vec<usize>>, got: &BTreeMap<i64, Vec<usize>>) -> Option<String> {
    for k in want.keys().chain(got.keys()) {
        let (a, b) = (want.get(k), got.get(k));
        if a != b {
            return Some(format!("degree {k}: expected {:?}, got {:?}", a, b));
        }
    }
    None
}

/// (c): dg module → μA → fiber → invariants, compared with H(Γ).
pub fn roundtrip_semifree(g: &SemifreeDGModule, opts: &MuOptions) -> Result<RoundtripReport, Error> {
    let spec = g.algebra.spec()?;
    let mult = mu_a_derived(g, opts)?;
    let fiber = mult.to_fiber()?;
    crate::module_io::validate_fiber(&fiber, &spec)?;
    let inv = derived_invariants(&fiber, mult.trusted_weight)?;
    let y = CurvedModule::from_semifree(g, &spec, mult.trusted_weight)?;
    let h = homology_modules(&y.space, &y.dy.order0(), &y.lam, mult.trusted_weight)?;
    let nonzero = |d: &BTreeMap<i64, Vec<usize>>| {
        let mut d = d.clone();
        d.retain(|_, v| v.iter().any(|&x| x > 0));
        d
    };
    let mismatch = first_mismatch(&nonzero(&h.dims), &nonzero(&inv.homology.dims));
    Ok(RoundtripReport {
        kind: 'c',
        passed: mismatch.is_none(),
        detail: format!("recovered degrees {:?} up to weight {}", inv.degrees, mult.trusted_weight),
        mismatch,
    })
}

/// (b): fiber → invariants → μA, compared with the fiber's array.
pub fn roundtrip_fiber(f: &MultipletFiber, opts: &MuOptions) -> Result<RoundtripReport, Error> {
    let spec = f.algebra.spec()?;
    let y = CurvedModule::from_fiber(f, &spec, opts.cutoff)?;
    y.check_curvature(&spec)?;
    let mult = mu_a(&y, &f.algebra, opts)?;
    let want = f.space.dims();
    let got: BTreeMap<Bidegree, usize> =
        mult.dims().into_iter().filter(|(b, _)| b.w <= mult.trusted_weight).collect();
    let want_t: BTreeMap<Bidegree, usize> = want.into_iter().filter(|(b, _)| b.w <= mult.trusted_weight).collect();
    let mismatch = want_t
        .keys()
        .chain(got.keys())
        .find(|b| want_t.get(b) != got.get(b))
        .map(|b| format!("block {b}: expected {:?}, got {:?}", want_t.get(b), got.get(b)));
    Ok(RoundtripReport {
        kind: 'b',
        passed: mismatch.is_none(),
        detail: format!("{} fields up to weight {}", got.values().sum::<usize>(), mult.trusted_weight),
        mismatch,
    })
}

/// Weight-graded R-module M as a presented module for `algebra`.
pub fn presented(algebra: &str, p: crate::rmodule::Presentation) -> PresentedRModule {
    PresentedRModule {
        algebra: AlgebraRef::Preset(algebra.into()),
        labels: vec![String::new(); p.gens.len()],
        presentation: p,
        rmod_i: true,
        annotations: BTreeMap::new(),
    }
}

/// Block sum of two fibers over the same algebra.
pub fn direct_sum(a: &MultipletFiber, b: &MultipletFiber) -> MultipletFiber {
    let (na, nb) = (a.space.len(), b.space.len());
    let n = na + nb;
    let mut space = a.space.clone();
    for e in &b.space.elems {
        space.push(e.deg, e.label.clone());
    }
    let sum = |x: &DOp, y: &DOp| {
        let mut out = DOp::zero(x.n2, n, n);
        for (m, t) in &x.terms {
            for (j, c) in t.cols.iter().enumerate() {
                for (&i, v) in c {
                    out.add_entry(m.clone(), i, j, v.clone());
                }
            }
        }
        for (m, t) in &y.terms {
            for (j, c) in t.cols.iter().enumerate() {
                for (&i, v) in c {
                    out.add_entry(m.clone(), na + i, na + j, v.clone());
                }
            }
        }
        out
    };
    let keys: std::collections::BTreeSet<_> = a.rho2.keys().chain(b.rho2.keys()).copied().collect();
    let rho2 = keys
        .into_iter()
        .map(|k| {
            let x = a.rho2.get(&k).cloned().unwrap_or_else(|| DOp::zero(a.d0.n2, na, na));
            let y = b.rho2.get(&k).cloned().unwrap_or_else(|| DOp::zero(a.d0.n2, nb, nb));
            (k, sum(&x, &y))
        })
        .collect();
    MultipletFiber {
        algebra: a.algebra.clone(),
        space,
        d0: sum(&a.d0, &b.d0),
        rho1: a.rho1.iter().zip(&b.rho1).map(|(x, y)| sum(x, y)).collect(),
        rho2,
        annotations: BTreeMap::new(),
    }
}

/// Shifted linear dual: basis (w, d) goes to shift − (w, d) and each operator
/// X becomes −X^st with δ → −δ, where (X^st)_{ji} = (−1)^{|j|} X_{ij}.
pub fn dual_fiber(f: &MultipletFiber, shift: Bidegree) -> MultipletFiber {
    let n = f.space.len();
    let mut space = GradedSpace::default();
    for e in &f.space.elems {
        let lbl = e.label.clone().map(|l| format!("{l}*"));
        space.push(Bidegree::new(shift.w - e.deg.w, shift.d - e.deg.d), lbl);
    }
    let odd: Vec<bool> = f.space.elems.iter().map(|e| e.deg.is_odd()).collect();
    let tr = |x: &DOp| {
        let mut out = DOp::zero(x.n2, n, n);
        for (m, t) in &x.terms {
            for (j, c) in t.cols.iter().enumerate() {
                for (&i, v) in c {
                    let neg = !(odd[j] ^ (dmon_order(m) % 2 == 1));
                    out.add_entry(m.clone(), j, i, if neg { -v.clone() } else { v.clone() });
                }
            }
        }
        out
    };
    MultipletFiber {
        algebra: f.algebra.clone(),
        space,
        d0: tr(&f.d0),
        rho1: f.rho1.iter().map(tr).collect(),
        rho2: f.rho2.iter().map(|(k, x)| (*k, tr(x))).collect(),
        annotations: BTreeMap::new(),
    }
}

/// Contracts a fiber onto the cohomology of its constant differential and
/// transfers ρ¹, ρ².
pub fn minimal_fiber(f: &MultipletFiber) -> Result<MultipletFiber, Error> {
    let n2 = f.d0.n2;
    let cx = DComplex {
        n2,
        space: f.space.clone(),
        tag: f.space.elems.iter().map(|e| e.deg.total()).collect(),
        d: f.d0.clone(),
    };
    let mut pl = Pipeline::new(cx);
    pl.push(|_, _, _| true)?;
    let small = pl.small().clone();
    let tr = crate::transfer::transfer_module(&pl, &f.rho1, &f.rho2, i64::MAX / 4)?;
    Ok(MultipletFiber {
        algebra: f.algebra.clone(),
        space: small.space,
        d0: small.d,
        rho1: tr.rho1,
        rho2: tr.rho2.into_iter().filter(|(_, x)| !x.is_zero()).collect(),
        annotations: BTreeMap::new(),
    })
}

/// Kinetic couplings K: C → C^∨ between a fiber and its dual making
/// [[D, 0], [K, D^∨]] a fiber with the block-diagonal action: a basis of the
/// solutions of K D + D^∨ K = 0, K ρ¹ + ρ¹^∨ K = 0 and K ρ² + ρ²^∨ K = 0.
pub fn kinetic_terms(c: &MultipletFiber, cd: &MultipletFiber) -> Result<Vec<DOp>, Error> {
    let n2 = c.d0.n2;
    let (nc, nd) = (c.space.len(), cd.space.len());
    let mut unknowns = Vec::new();
    for j in 0..nc {
        for i in 0..nd {
            let s = cd.space.deg(i) - c.space.deg(j);
            if s.d != 1 || s.w < 0 || s.w % 2 != 0 {
                continue;
            }
            let k = (s.w / 2) as u32;
            for m in monomials(n2, k) {
                unknowns.push((m, i, j));
            }
        }
    }
    let mut pairs: Vec<(&DOp, &DOp)> = vec![(&c.d0, &cd.d0)];
    pairs.extend(c.rho1.iter().zip(&cd.rho1));
    let empty_c = DOp::zero(n2, nc, nc);
    let empty_d = DOp::zero(n2, nd, nd);
    for key in c.rho2.keys().chain(cd.rho2.keys()) {
        pairs.push((c.rho2.get(key).unwrap_or(&empty_c), cd.rho2.get(key).unwrap_or(&empty_d)));
    }
    let mut coords: HashMap<(usize, DMon, usize, usize), usize> = HashMap::new();
    let mut columns: Vec<Vec<(usize, Q)>> = Vec::new();
    for (m, i, j) in &unknowns {
        let mut k = DOp::zero(n2, nd, nc);
        k.add_entry(m.clone(), *i, *j, qi(1));
        let mut col = Vec::new();
        for (p, (x, y)) in pairs.iter().enumerate() {
            let r = k.compose(x).add(&y.compose(&k));
            for (mm, t) in &r.terms {
                for (jj, cc) in t.cols.iter().enumerate() {
                    for (&ii, v) in cc {
                        let n = coords.len();
                        let idx = *coords.entry((p, mm.clone(), ii, jj)).or_insert(n);
                        col.push((idx, v.clone()));
                    }
                }
            }
        }
        columns.push(col);
    }
    let mut a = crate::graded::Mat::zero(coords.len(), unknowns.len());
    for (u, col) in columns.iter().enumerate() {
        for (r, v) in col {
            let x = a.get(*r, u) + v;
            a.set(*r, u, x);
        }
    }
    let rr = crate::graded::block_rref(&a);
    Ok(rr
        .kernel
        .iter()
        .map(|v| {
            let mut k = DOp::zero(n2, nd, nc);
            for (u, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    let (m, i, j) = &unknowns[u];
                    k.add_entry(m.clone(), *i, *j, x.clone());
                }
            }
            k
        })
        .collect())
}

/// C ⊕ C^∨ with differential [[D, 0], [K, D^∨]].
pub fn couple(c: &MultipletFiber, cd: &MultipletFiber, k: &DOp) -> MultipletFiber {
    let mut e = direct_sum(c, cd);
    let nc = c.space.len();
    for (m, t) in &k.terms {
        for (j, cc) in t.cols.iter().enumerate() {
            for (&i, v) in cc {
                e.d0.add_entry(m.clone(), nc + i, j, v.clone());
            }
        }
    }
    e.d0.prune();
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmodule::{rp, Presentation};

    fn r_mod_i_3d() -> PresentedRModule {
        presented(
            "3dN1",
            Presentation {
                n: 2,
                gens: vec![Bidegree::ZERO],
                relations: vec![vec![rp(&[(&[2, 0], 1)])], vec![rp(&[(&[1, 1], 1)])], vec![rp(&[(&[0, 2], 1)])]],
            },
        )
    }

    #[test]
    fn residue_field_gives_exterior_algebra() {
        let m = presented(
            "3dN1",
            Presentation {
                n: 2,
                gens: vec![Bidegree::ZERO],
                relations: vec![vec![rp(&[(&[1, 0], 1)])], vec![rp(&[(&[0, 1], 1)])]],
            },
        );
        let mut o = MuOptions::new(5);
        o.verify_homotopy = true;
        let r = mu_a_underived(&m, &o).unwrap();
        assert_eq!(
            r.dims(),
            BTreeMap::from([(Bidegree::ZERO, 1), (Bidegree::new(1, 0), 2), (Bidegree::new(2, 0), 1)])
        );
        assert!(r.d.is_zero());
    }

    #[test]
    fn three_dim_h0_fields() {
        let mut o = MuOptions::new(6);
        o.verify_homotopy = true;
        let r = mu_a_underived(&r_mod_i_3d(), &o).unwrap();
        assert_eq!(
            r.dims(),
            BTreeMap::from([(Bidegree::new(0, 0), 1), (Bidegree::new(2, 1), 3), (Bidegree::new(3, 1), 2)])
        );
        let sh = shifts_by_order(&r.d, &r.fields);
        assert_eq!(sh.get(&1), Some(&vec![Bidegree::new(2, 1)]));
    }

    #[test]
    fn semifree_ce_curvature() {
        let spec = crate::algebra::preset("3dN1").unwrap();
        let g = SemifreeDGModule {
            algebra: AlgebraRef::Preset("3dN1".into()),
            gens: vec![Bidegree::ZERO],
            labels: vec!["1".into()],
            differential: vec![vec![]],
            annotations: BTreeMap::new(),
        };
        let y = CurvedModule::from_semifree(&g, &spec, 5).unwrap();
        y.check_curvature(&spec).unwrap();
        build_arena(&y, &spec, 5).cx.check_square_zero().unwrap();
    }

    #[test]
    fn roundtrip_three_dim_h0() {
        let r = roundtrip_module(&r_mod_i_3d(), &MuOptions::new(7)).unwrap();
        assert!(r.passed, "{:?}", r);
    }

    #[test]
    fn derived_ce_multiplet() {
        let g = SemifreeDGModule {
            algebra: AlgebraRef::Preset("3dN1".into()),
            gens: vec![Bidegree::ZERO],
            labels: vec!["1".into()],
            differential: vec![vec![]],
            annotations: BTreeMap::new(),
        };
        let r = mu_a_derived(&g, &MuOptions::new(6)).unwrap();
        let b = Bidegree::new;
        assert_eq!(
            r.intermediate_dims(),
            BTreeMap::from([(b(0, 0), 1), (b(2, 1), 3), (b(3, 1), 2), (b(3, 2), 2), (b(4, 2), 3), (b(6, 3), 1)])
        );
        assert_eq!(r.dims(), BTreeMap::from([(b(0, 0), 1), (b(2, 1), 3), (b(4, 2), 3), (b(6, 3), 1)]));
        let inter = r.intermediate.as_ref().unwrap();
        assert_eq!(shifts_by_order(&inter.d, &inter.space).get(&0), Some(&vec![b(0, 1)]));
        assert!(shifts_by_order(&r.d, &r.fields)[&1].contains(&b(2, 1)));
    }

    #[test]
    fn vector_antifield_from_dual() {
        let spec = crate::algebra::preset("4dN1").unwrap();
        let g = crate::golden::vector_antifield().unwrap();
        crate::module_io::validate_fiber(&g, &spec).unwrap();
        let b = Bidegree::new;
        assert_eq!(g.space.dims(), BTreeMap::from([(b(0, 0), 1), (b(1, 0), 4), (b(2, 0), 4), (b(4, 1), 1)]));
        let inv = derived_invariants(&g, 7).unwrap();
        assert_eq!(inv.hilbert(0), vec![1, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(inv.hilbert(-1), vec![0, 0, 2, 4, 6, 8, 10, 12]);
        assert!(!inv.concentrated);
    }

    #[test]
    fn chiral_onshell_shape() {
        let spec = crate::algebra::preset("4dN1").unwrap();
        let m = crate::golden::chiral_onshell().unwrap();
        crate::module_io::validate_fiber(&m, &spec).unwrap();
        let b = Bidegree::new;
        assert_eq!(m.space.dims(), BTreeMap::from([(b(0, 0), 2), (b(1, 0), 4), (b(3, 1), 4), (b(4, 1), 2)]));
        assert_eq!(
            shifts_by_order(&m.d0, &m.space),
            BTreeMap::from([(1, vec![b(2, 1)]), (2, vec![b(4, 1)])])
        );
        assert!(!m.rho2.is_empty());
        let inv = derived_invariants(&m, 5).unwrap();
        assert_eq!(inv.hilbert(0), vec![2, 4, 6, 8, 10, 12]);
        assert_eq!(inv.hilbert(-1), vec![0, 0, 2, 4, 6, 8]);
    }
}
