//! Free supercommutative algebras on a typed generator table.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::graded::{fmt_q, qi, BasisElem, Bidegree, GradedSpace, Q};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenKind {
    Lambda,
    Theta,
    V,
    Delta,
    Custom,
}

impl GenKind {
    /// Fixed bidegrees of the standard kinds.
    pub fn standard_degree(self) -> Option<Bidegree> {
        match self {
            GenKind::Lambda => Some(Bidegree::new(1, 1)),
            GenKind::Theta => Some(Bidegree::new(1, 0)),
            GenKind::V => Some(Bidegree::new(2, 1)),
            GenKind::Delta => Some(Bidegree::new(2, 0)),
            GenKind::Custom => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub kind: GenKind,
    pub deg: Bidegree,
}

impl Generator {
    pub fn odd(&self) -> bool {
        self.deg.is_odd()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorTable {
    pub gens: Vec<Generator>,
}

impl GeneratorTable {
    pub fn new(gens: Vec<Generator>) -> Result<Self, Error> {
        let mut seen = std::collections::BTreeSet::new();
        for g in &gens {
            if !seen.insert(g.name.clone()) {
                return Err(Error::Schema(format!("duplicate generator `{}`", g.name)));
            }
            if let Some(sd) = g.kind.standard_degree() {
                if sd != g.deg {
                    return Err(Error::Schema(format!("generator `{}` must sit at {}", g.name, sd)));
                }
            }
        }
        Ok(GeneratorTable { gens })
    }

    /// Standard generators `prefix1..prefixN` of one kind.
    pub fn standard(kinds: &[(GenKind, &str, usize)]) -> Self {
        let mut gens = Vec::new();
        for &(kind, prefix, n) in kinds {
            for i in 1..=n {
                gens.push(Generator {
                    name: format!("{prefix}{i}"),
                    kind,
                    deg: kind.standard_degree().expect("standard kind"),
                });
            }
        }
        GeneratorTable::new(gens).expect("standard table")
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    pub fn indices_of(&self, kind: GenKind) -> Vec<usize> {
        (0..self.gens.len()).filter(|&i| self.gens[i].kind == kind).collect()
    }

    pub fn mono_deg(&self, m: &[u32]) -> Bidegree {
        let mut b = Bidegree::ZERO;
        for (g, &e) in self.gens.iter().zip(m) {
            b = b + Bidegree::new(g.deg.w * e as i64, g.deg.d * e as i64);
        }
        b
    }

    pub fn mono_odd(&self, m: &[u32]) -> bool {
        self.mono_deg(m).is_odd()
    }

    pub fn render_mono(&self, m: &[u32]) -> String {
        let parts: Vec<String> = self
            .gens
            .iter()
            .zip(m)
            .filter(|(_, &e)| e > 0)
            .map(|(g, &e)| if e == 1 { g.name.clone() } else { format!("{}^{}", g.name, e) })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(" ")
        }
    }
}

pub type Mono = Vec<u32>;

/// Sign and product of two monomials, `None` if an odd generator repeats.
pub fn mono_mul(t: &GeneratorTable, a: &[u32], b: &[u32]) -> Option<(bool, Mono)> {
    let mut neg = false;
    // moving each odd factor of b leftwards past the odd factors of a that
    // come after it in table order
    let mut odd_after = 0u32;
    for i in (0..t.len()).rev() {
        if t.gens[i].odd() {
            if a[i] > 0 && b[i] > 0 {
                return None;
            }
            if b[i] > 0 && odd_after % 2 == 1 {
                neg = !neg;
            }
            odd_after += a[i];
        }
    }
    Some((neg, a.iter().zip(b).map(|(x, y)| x + y).collect()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperPoly {
    pub table: Arc<GeneratorTable>,
    pub terms: BTreeMap<Mono, Q>,
}

impl SuperPoly {
    pub fn zero(table: &Arc<GeneratorTable>) -> Self {
        SuperPoly { table: table.clone(), terms: BTreeMap::new() }
    }

    pub fn one(table: &Arc<GeneratorTable>) -> Self {
        Self::mono(table, vec![0; table.len()], qi(1))
    }

    pub fn mono(table: &Arc<GeneratorTable>, m: Mono, c: Q) -> Self {
        let mut p = Self::zero(table);
        p.add_term(m, c);
        p
    }

    pub fn gen(table: &Arc<GeneratorTable>, i: usize) -> Self {
        let mut m = vec![0; table.len()];
        m[i] = 1;
        Self::mono(table, m, qi(1))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    fn same(&self, o: &SuperPoly) -> Result<(), Error> {
        if Arc::ptr_eq(&self.table, &o.table) || self.table == o.table {
            Ok(())
        } else {
            Err(Error::TableMismatch)
        }
    }

    pub fn add(&self, o: &SuperPoly) -> Result<SuperPoly, Error> {
        self.same(o)?;
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), c.clone());
        }
        Ok(r)
    }

    pub fn scale(&self, c: &Q) -> SuperPoly {
        let mut r = Self::zero(&self.table);
        for (m, x) in &self.terms {
            r.add_term(m.clone(), x * c);
        }
        r
    }

    pub fn multiply(&self, o: &SuperPoly) -> Result<SuperPoly, Error> {
        self.same(o)?;
        let mut r = Self::zero(&self.table);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                if let Some((neg, m)) = mono_mul(&self.table, ma, mb) {
                    let c = ca * cb;
                    r.add_term(m, if neg { -c } else { c });
                }
            }
        }
        Ok(r)
    }

    /// Bidegree if homogeneous.
    pub fn bidegree(&self) -> Option<Bidegree> {
        let mut it = self.terms.keys().map(|m| self.table.mono_deg(m));
        let first = it.next()?;
        it.all(|b| b == first).then_some(first)
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c < &Q::zero();
            let a = if neg { -c.clone() } else { c.clone() };
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mono = self.table.render_mono(m);
            if a.is_one() {
                s.push_str(&mono);
            } else if mono == "1" {
                s.push_str(&fmt_q(&a));
            } else {
                s.push_str(&format!("{} {}", fmt_q(&a), mono));
            }
        }
        s
    }
}

/// Graded derivation determined by its values on generators.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub table: Arc<GeneratorTable>,
    pub images: Vec<SuperPoly>,
    pub shift: Bidegree,
}

impl Derivation {
    pub fn odd(&self) -> bool {
        self.shift.is_odd()
    }

    pub fn apply(&self, p: &SuperPoly) -> Result<SuperPoly, Error> {
        if !(Arc::ptr_eq(&self.table, &p.table) || *self.table == *p.table) {
            return Err(Error::TableMismatch);
        }
        let t = &self.table;
        let mut out = SuperPoly::zero(t);
        for (m, c) in &p.terms {
            out = out.add(&self.apply_mono(m)?.scale(c))?;
        }
        Ok(out)
    }

    fn apply_mono(&self, m: &[u32]) -> Result<SuperPoly, Error> {
        let t = &self.table;
        let n = t.len();
        let mut out = SuperPoly::zero(t);
        for i in 0..n {
            if m[i] == 0 || self.images[i].is_zero() {
                continue;
            }
            let mut left = vec![0; n];
            left[..i].copy_from_slice(&m[..i]);
            let mut right = vec![0; n];
            right[i + 1..].copy_from_slice(&m[i + 1..]);
            let mut pow = vec![0; n];
            pow[i] = m[i] - 1;
            // D passes the left factor
            let sign = if self.odd() && t.mono_odd(&left) { qi(-1) } else { qi(1) };
            let coeff = sign * qi(m[i] as i64);
            let l = SuperPoly::mono(t, left, coeff);
            let term = l
                .multiply(&SuperPoly::mono(t, pow, qi(1)))?
                .multiply(&self.images[i])?
                .multiply(&SuperPoly::mono(t, right, qi(1)))?;
            out = out.add(&term)?;
        }
        Ok(out)
    }
}

/// All monomials with weight in `weights` and degree in `degrees`, in
/// canonical order. Returns the graded space (labels are rendered
/// monomials) and the monomials in the same order.
pub fn enumerate_basis(
    table: &GeneratorTable,
    weights: (i64, i64),
    degrees: (i64, i64),
) -> Result<(GradedSpace, Vec<Mono>), Error> {
    for g in &table.gens {
        if g.deg.w <= 0 {
            return Err(Error::NonPositiveWeightGenerator(g.name.clone()));
        }
    }
    let mut monos = Vec::new();
    let mut cur = vec![0u32; table.len()];
    rec(table, 0, weights.1, &mut cur, &mut monos);
    let mut elems: Vec<(Bidegree, Mono)> = monos
        .into_iter()
        .map(|m| (table.mono_deg(&m), m))
        .filter(|(b, _)| b.w >= weights.0 && b.w <= weights.1 && b.d >= degrees.0 && b.d <= degrees.1)
        .collect();
    elems.sort_by(|a, b| (a.0.w, a.0.d).cmp(&(b.0.w, b.0.d)).then_with(|| b.1.cmp(&a.1)));
    let space = GradedSpace {
        elems: elems
            .iter()
            .map(|(b, m)| BasisElem { deg: *b, label: Some(table.render_mono(m)) })
            .collect(),
    };
    Ok((space, elems.into_iter().map(|(_, m)| m).collect()))
}

fn rec(t: &GeneratorTable, i: usize, budget: i64, cur: &mut Mono, out: &mut Vec<Mono>) {
    if i == t.len() {
        out.push(cur.clone());
        return;
    }
    let w = t.gens[i].deg.w;
    let max = if t.gens[i].odd() { 1 } else { (budget / w) as u32 };
    for e in 0..=max {
        if e as i64 * w > budget {
            break;
        }
        cur[i] = e;
        rec(t, i + 1, budget - e as i64 * w, cur, out);
    }
    cur[i] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table() -> Arc<GeneratorTable> {
        Arc::new(GeneratorTable::standard(&[
            (GenKind::Lambda, "l", 2),
            (GenKind::Theta, "t", 2),
            (GenKind::V, "v", 2),
        ]))
    }

    #[test]
    fn odd_signs() {
        let t = table();
        let t1 = SuperPoly::gen(&t, 2);
        let t2 = SuperPoly::gen(&t, 3);
        assert!(t1.multiply(&t1).unwrap().is_zero());
        let a = t1.multiply(&t2).unwrap();
        let b = t2.multiply(&t1).unwrap();
        assert_eq!(a, b.scale(&qi(-1)));
        let l1 = SuperPoly::gen(&t, 0);
        let v1 = SuperPoly::gen(&t, 4);
        assert_eq!(l1.multiply(&v1).unwrap(), v1.multiply(&l1).unwrap());
    }

    #[test]
    fn mismatch_detected() {
        let a = SuperPoly::gen(&table(), 0);
        let other = Arc::new(GeneratorTable::standard(&[(GenKind::Lambda, "x", 1)]));
        let b = SuperPoly::gen(&other, 0);
        assert_eq!(a.multiply(&b), Err(Error::TableMismatch));
    }

    #[test]
    fn enumerate_examples() {
        let t = GeneratorTable::standard(&[(GenKind::Lambda, "l", 2)]);
        let (s, _) = enumerate_basis(&t, (0, 2), (-10, 10)).unwrap();
        let per_w: Vec<usize> = (0..=2).map(|w| s.elems.iter().filter(|e| e.deg.w == w).count()).collect();
        assert_eq!(per_w, vec![1, 2, 3]);
        let t = GeneratorTable::standard(&[(GenKind::Lambda, "l", 1), (GenKind::V, "v", 1)]);
        let (s, _) = enumerate_basis(&t, (0, 3), (-10, 10)).unwrap();
        let per_w: Vec<usize> = (0..=3).map(|w| s.elems.iter().filter(|e| e.deg.w == w).count()).collect();
        assert_eq!(per_w, vec![1, 1, 2, 2]);
        let (s, _) = enumerate_basis(&GeneratorTable::default(), (0, 5), (0, 0)).unwrap();
        assert_eq!(s.len(), 1);
        let bad = GeneratorTable {
            gens: vec![Generator { name: "z".into(), kind: GenKind::Custom, deg: Bidegree::new(0, 1) }],
        };
        assert!(matches!(enumerate_basis(&bad, (0, 1), (0, 1)), Err(Error::NonPositiveWeightGenerator(_))));
    }

    #[test]
    fn render_is_deterministic() {
        let t = table();
        let p = SuperPoly::gen(&t, 0)
            .multiply(&SuperPoly::gen(&t, 0))
            .unwrap()
            .add(&SuperPoly::gen(&t, 4).scale(&crate::graded::qfrac(-1, 2)))
            .unwrap();
        assert_eq!(p.render(), "l1^2 - 1/2 v1");
    }

    fn arb_mono() -> impl Strategy<Value = Mono> {
        (0u32..3, 0u32..3, 0u32..2, 0u32..2, 0u32..2, 0u32..2).prop_map(|(a, b, c, d, e, f)| vec![a, b, c, d, e, f])
    }

    proptest! {
        #[test]
        fn associative_and_supercommutative(a in arb_mono(), b in arb_mono(), c in arb_mono()) {
            let t = table();
            let (pa, pb, pc) = (
                SuperPoly::mono(&t, a.clone(), qi(1)),
                SuperPoly::mono(&t, b.clone(), qi(1)),
                SuperPoly::mono(&t, c, qi(1)),
            );
            let l = pa.multiply(&pb).unwrap().multiply(&pc).unwrap();
            let r = pa.multiply(&pb.multiply(&pc).unwrap()).unwrap();
            prop_assert_eq!(l, r);
            let ab = pa.multiply(&pb).unwrap();
            let ba = pb.multiply(&pa).unwrap();
            let s = if t.mono_odd(&a) && t.mono_odd(&b) { qi(-1) } else { qi(1) };
            prop_assert_eq!(ab.clone(), ba.scale(&s));
            if let Some(d) = ab.bidegree() {
                prop_assert_eq!(d, t.mono_deg(&a) + t.mono_deg(&b));
            }
        }

        #[test]
        fn leibniz(a in arb_mono(), b in arb_mono()) {
            let t = table();
            // an odd derivation: t1 -> l1, v1 -> l1 l2
            let mut images = vec![SuperPoly::zero(&t); t.len()];
            images[2] = SuperPoly::gen(&t, 0);
            images[4] = SuperPoly::gen(&t, 0).multiply(&SuperPoly::gen(&t, 1)).unwrap();
            let d = Derivation { table: t.clone(), images, shift: Bidegree::new(0, 1) };
            let pa = SuperPoly::mono(&t, a.clone(), qi(1));
            let pb = SuperPoly::mono(&t, b, qi(1));
            let lhs = d.apply(&pa.multiply(&pb).unwrap()).unwrap();
            let s = if t.mono_odd(&a) { qi(-1) } else { qi(1) };
            let rhs = d.apply(&pa).unwrap().multiply(&pb).unwrap()
                .add(&pa.multiply(&d.apply(&pb).unwrap()).unwrap().scale(&s)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
