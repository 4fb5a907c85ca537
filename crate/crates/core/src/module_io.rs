//! The three input classes, their JSON schema and validation.
//!
//! Polynomials are arrays of `[exponents, "num/den"]`. Basis indices are
//! 0-based; supercharge indices α in `rho1`/`rho2` are 1-based like `l1`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::{build_ce, preset, AlgebraSpec, CEAlgebra};
use crate::graded::{fmt_q, parse_q, qi, BasisElem, Bidegree, GradedSpace, SVec, Q};
use crate::poly::{Mono, SuperPoly};
use crate::rmodule::{rpoly_weight, Presentation, RPoly, Ring};
use crate::transfer::{check_linf, check_rho1_closed, dvec_is_zero, DMon, DOp};
use crate::Error;

/// Reference to an algebra: a preset name or an inline spec.
#[derive(Clone, Debug, PartialEq)]
pub enum AlgebraRef {
    Preset(String),
    Inline(AlgebraSpec),
}

impl AlgebraRef {
    pub fn spec(&self) -> Result<AlgebraSpec, Error> {
        match self {
            AlgebraRef::Preset(p) => preset(p),
            AlgebraRef::Inline(s) => Ok(s.clone()),
        }
    }

    fn to_value(&self) -> Value {
        match self {
            AlgebraRef::Preset(p) => Value::String(p.clone()),
            AlgebraRef::Inline(s) => serde_json::from_str(&s.to_json()).unwrap(),
        }
    }

    fn from_value(v: &Value) -> Result<Self, Error> {
        match v {
            Value::String(s) => {
                preset(s)?;
                Ok(AlgebraRef::Preset(s.clone()))
            }
            Value::Object(_) => Ok(AlgebraRef::Inline(AlgebraSpec::from_json(&v.to_string())?)),
            _ => Err(Error::Schema("`algebra` must be a preset name or a spec object".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PresentedRModule {
    pub algebra: AlgebraRef,
    pub labels: Vec<String>,
    pub presentation: Presentation,
    /// The ideal I must annihilate the module.
    pub rmod_i: bool,
    pub annotations: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemifreeDGModule {
    pub algebra: AlgebraRef,
    pub gens: Vec<Bidegree>,
    pub labels: Vec<String>,
    /// d_Γ(e_g) = Σ poly · e_h, polys over λ¹..λⁿ¹, v¹..vⁿ².
    pub differential: Vec<Vec<(usize, BTreeMap<Mono, Q>)>>,
    pub annotations: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultipletFiber {
    pub algebra: AlgebraRef,
    pub space: GradedSpace,
    pub d0: DOp,
    pub rho1: Vec<DOp>,
    /// ρ²(α, β) for α ≤ β.
    pub rho2: BTreeMap<(usize, usize), DOp>,
    pub annotations: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Input {
    Presented(PresentedRModule),
    Semifree(SemifreeDGModule),
    Fiber(MultipletFiber),
}

impl Input {
    pub fn class(&self) -> &'static str {
        match self {
            Input::Presented(_) => "presented_r_module",
            Input::Semifree(_) => "semifree_dg_module",
            Input::Fiber(_) => "multiplet_fiber",
        }
    }

    pub fn algebra(&self) -> &AlgebraRef {
        match self {
            Input::Presented(m) => &m.algebra,
            Input::Semifree(m) => &m.algebra,
            Input::Fiber(m) => &m.algebra,
        }
    }
}

// ------------------------------------------------------------ json helpers

#[derive(Serialize, Deserialize)]
struct GenJson {
    w: i64,
    d: i64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    label: String,
}

fn poly_to_json(p: &BTreeMap<Mono, Q>) -> Value {
    Value::Array(p.iter().map(|(m, c)| json!([m, fmt_q(c)])).collect())
}

fn poly_from_json(v: &Value, nvars: usize, at: &str) -> Result<BTreeMap<Mono, Q>, Error> {
    let arr = v.as_array().ok_or_else(|| Error::Schema(format!("{at}: polynomial must be an array")))?;
    let mut p = BTreeMap::new();
    for t in arr {
        let pair: (Vec<u32>, String) =
            serde_json::from_value(t.clone()).map_err(|e| Error::Schema(format!("{at}: {e}")))?;
        if pair.0.len() != nvars {
            return Err(Error::Schema(format!("{at}: exponent vector has length {}, expected {nvars}", pair.0.len())));
        }
        let c = parse_q(&pair.1)?;
        let e: &mut Q = p.entry(pair.0).or_insert_with(|| qi(0));
        *e += c;
    }
    p.retain(|_, c| *c != qi(0));
    Ok(p)
}

fn gens_from_json(v: &Value, at: &str) -> Result<(Vec<Bidegree>, Vec<String>), Error> {
    let g: Vec<GenJson> =
        serde_json::from_value(v.clone()).map_err(|e| Error::Schema(format!("{at}: {e}")))?;
    Ok((g.iter().map(|x| Bidegree::new(x.w, x.d)).collect(), g.into_iter().map(|x| x.label).collect()))
}

fn gens_to_json(g: &[Bidegree], labels: &[String]) -> Value {
    Value::Array(
        g.iter()
            .zip(labels.iter().chain(std::iter::repeat(&String::new())))
            .map(|(b, l)| serde_json::to_value(GenJson { w: b.w, d: b.d, label: l.clone() }).unwrap())
            .collect(),
    )
}

fn annotations(v: &Value) -> Result<BTreeMap<String, String>, Error> {
    match v.get("annotations") {
        None => Ok(BTreeMap::new()),
        Some(a) => serde_json::from_value(a.clone()).map_err(|e| Error::Schema(format!("annotations: {e}"))),
    }
}

/// Operator entries `[prefix.., row, col, [δ exps], "c"]`.
fn op_entries(op: &DOp, prefix: &[usize]) -> Vec<Value> {
    let mut out = Vec::new();
    for j in 0..op.cols {
        for (m, a) in &op.terms {
            for (&i, x) in &a.cols[j] {
                let mut e: Vec<Value> = prefix.iter().map(|&p| json!(p)).collect();
                e.push(json!(i));
                e.push(json!(j));
                e.push(json!(m));
                e.push(json!(fmt_q(x)));
                out.push(Value::Array(e));
            }
        }
    }
    out
}

struct OpEntry {
    prefix: Vec<usize>,
    row: usize,
    col: usize,
    mon: DMon,
    c: Q,
}

fn parse_op_entries(v: Option<&Value>, nprefix: usize, n2: usize, dim: usize, at: &str) -> Result<Vec<OpEntry>, Error> {
    let Some(v) = v else { return Ok(vec![]) };
    let arr = v.as_array().ok_or_else(|| Error::Schema(format!("{at} must be an array")))?;
    let mut out = Vec::new();
    for (k, e) in arr.iter().enumerate() {
        let a = e.as_array().filter(|a| a.len() == nprefix + 4).ok_or_else(|| {
            Error::Schema(format!("{at}[{k}]: expected {} fields", nprefix + 4))
        })?;
        let num = |x: &Value| x.as_u64().map(|u| u as usize).ok_or_else(|| Error::Schema(format!("{at}[{k}]: bad index")));
        let prefix = a[..nprefix].iter().map(num).collect::<Result<Vec<_>, _>>()?;
        let row = num(&a[nprefix])?;
        let col = num(&a[nprefix + 1])?;
        if row >= dim || col >= dim {
            return Err(Error::Schema(format!("{at}[{k}]: basis index out of range")));
        }
        let mon: DMon = serde_json::from_value(a[nprefix + 2].clone())
            .map_err(|e| Error::Schema(format!("{at}[{k}]: {e}")))?;
        if mon.len() != n2 {
            return Err(Error::Schema(format!("{at}[{k}]: δ exponent vector must have length {n2}")));
        }
        let c = parse_q(a[nprefix + 3].as_str().ok_or_else(|| Error::Schema(format!("{at}[{k}]: coefficient must be a string")))?)?;
        out.push(OpEntry { prefix, row, col, mon, c });
    }
    Ok(out)
}

// ---------------------------------------------------------------- save/load

pub fn to_json(x: &Input) -> String {
    let v = match x {
        Input::Presented(m) => {
            let rels: Vec<Value> =
                m.presentation.relations.iter().map(|r| Value::Array(r.iter().map(poly_to_json).collect())).collect();
            json!({
                "class": x.class(),
                "algebra": m.algebra.to_value(),
                "generators": gens_to_json(&m.presentation.gens, &m.labels),
                "relations": rels,
                "rmod_i": m.rmod_i,
                "annotations": m.annotations,
            })
        }
        Input::Semifree(m) => {
            let diff: Vec<Value> = m
                .differential
                .iter()
                .map(|img| Value::Array(img.iter().map(|(h, p)| json!({"target": h, "poly": poly_to_json(p)})).collect()))
                .collect();
            json!({
                "class": x.class(),
                "algebra": m.algebra.to_value(),
                "generators": gens_to_json(&m.gens, &m.labels),
                "differential": diff,
                "annotations": m.annotations,
            })
        }
        Input::Fiber(f) => {
            let labels: Vec<String> = f.space.elems.iter().map(|e| e.label.clone().unwrap_or_default()).collect();
            let degs: Vec<Bidegree> = f.space.elems.iter().map(|e| e.deg).collect();
            let mut r1 = Vec::new();
            for (a, op) in f.rho1.iter().enumerate() {
                r1.extend(op_entries(op, &[a + 1]));
            }
            let mut r2 = Vec::new();
            for (&(a, b), op) in &f.rho2 {
                r2.extend(op_entries(op, &[a + 1, b + 1]));
            }
            json!({
                "class": x.class(),
                "algebra": f.algebra.to_value(),
                "basis": gens_to_json(&degs, &labels),
                "d0": op_entries(&f.d0, &[]),
                "rho1": r1,
                "rho2": r2,
                "annotations": f.annotations,
            })
        }
    };
    serde_json::to_string_pretty(&v).unwrap() + "\n"
}

/// Parses and validates; `cutoff` bounds the degreewise checks.
pub fn from_json(text: &str, cutoff: Option<i64>) -> Result<Input, Error> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let class = v.get("class").and_then(Value::as_str).ok_or_else(|| Error::Schema("missing `class`".into()))?;
    let algebra = AlgebraRef::from_value(v.get("algebra").ok_or_else(|| Error::Schema("missing `algebra`".into()))?)?;
    let spec = algebra.spec()?;
    let ann = annotations(&v)?;
    let input = match class {
        "presented_r_module" => {
            let (gens, labels) = gens_from_json(v.get("generators").unwrap_or(&Value::Null), "generators")?;
            let mut relations = Vec::new();
            for (k, r) in v.get("relations").and_then(Value::as_array).cloned().unwrap_or_default().iter().enumerate() {
                let cols = r.as_array().ok_or_else(|| Error::Schema(format!("relations[{k}] must be an array")))?;
                if cols.len() != gens.len() {
                    return Err(Error::Schema(format!("relations[{k}] has {} entries, expected {}", cols.len(), gens.len())));
                }
                let rel = cols
                    .iter()
                    .enumerate()
                    .map(|(g, p)| poly_from_json(p, spec.n1, &format!("relations[{k}][{g}]")))
                    .collect::<Result<Vec<RPoly>, _>>()?;
                relations.push(rel);
            }
            let rmod_i = v.get("rmod_i").and_then(Value::as_bool).unwrap_or(false);
            Input::Presented(PresentedRModule {
                algebra,
                labels,
                presentation: Presentation { n: spec.n1, gens, relations },
                rmod_i,
                annotations: ann,
            })
        }
        "semifree_dg_module" => {
            let (gens, labels) = gens_from_json(v.get("generators").unwrap_or(&Value::Null), "generators")?;
            let nv = spec.n1 + spec.n2;
            let mut differential = Vec::new();
            let diff = v.get("differential").and_then(Value::as_array).cloned().unwrap_or_default();
            for g in 0..gens.len() {
                let mut img = Vec::new();
                if let Some(terms) = diff.get(g).and_then(Value::as_array) {
                    for (t, term) in terms.iter().enumerate() {
                        let at = format!("differential[{g}][{t}]");
                        let h = term
                            .get("target")
                            .and_then(Value::as_u64)
                            .ok_or_else(|| Error::Schema(format!("{at}: missing target")))? as usize;
                        if h >= gens.len() {
                            return Err(Error::Schema(format!("{at}: target out of range")));
                        }
                        img.push((h, poly_from_json(term.get("poly").unwrap_or(&Value::Null), nv, &at)?));
                    }
                }
                differential.push(img);
            }
            Input::Semifree(SemifreeDGModule { algebra, gens, labels, differential, annotations: ann })
        }
        "multiplet_fiber" => {
            let (degs, labels) = gens_from_json(v.get("basis").unwrap_or(&Value::Null), "basis")?;
            let n = degs.len();
            let space = GradedSpace {
                elems: degs
                    .iter()
                    .zip(&labels)
                    .map(|(&deg, l)| BasisElem { deg, label: (!l.is_empty()).then(|| l.clone()) })
                    .collect(),
            };
            let mut d0 = DOp::zero(spec.n2, n, n);
            for e in parse_op_entries(v.get("d0"), 0, spec.n2, n, "d0")? {
                d0.add_entry(e.mon, e.row, e.col, e.c);
            }
            let mut rho1 = vec![DOp::zero(spec.n2, n, n); spec.n1];
            for e in parse_op_entries(v.get("rho1"), 1, spec.n2, n, "rho1")? {
                let a = e.prefix[0];
                if a == 0 || a > spec.n1 {
                    return Err(Error::Schema("rho1: supercharge index out of range".into()));
                }
                rho1[a - 1].add_entry(e.mon, e.row, e.col, e.c);
            }
            let mut rho2 = BTreeMap::new();
            for e in parse_op_entries(v.get("rho2"), 2, spec.n2, n, "rho2")? {
                let (a, b) = (e.prefix[0], e.prefix[1]);
                if a == 0 || b == 0 || a > spec.n1 || b > spec.n1 || a > b {
                    return Err(Error::Schema("rho2: indices must satisfy 1 ≤ α ≤ β ≤ n1".into()));
                }
                rho2.entry((a - 1, b - 1))
                    .or_insert_with(|| DOp::zero(spec.n2, n, n))
                    .add_entry(e.mon, e.row, e.col, e.c);
            }
            d0.prune();
            rho1.iter_mut().for_each(DOp::prune);
            rho2.values_mut().for_each(DOp::prune);
            rho2.retain(|_, op| !op.is_zero());
            Input::Fiber(MultipletFiber { algebra, space, d0, rho1, rho2, annotations: ann })
        }
        other => return Err(Error::Schema(format!("unknown class `{other}`"))),
    };
    validate(&input, cutoff)?;
    Ok(input)
}

pub fn load(path: &std::path::Path, cutoff: Option<i64>) -> Result<Input, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    from_json(&text, cutoff)
}

pub fn save(path: &std::path::Path, x: &Input) -> Result<(), Error> {
    std::fs::write(path, to_json(x)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------- validation

pub fn validate(x: &Input, cutoff: Option<i64>) -> Result<(), Error> {
    let spec = x.algebra().spec()?;
    match x {
        Input::Presented(m) => validate_presented(m, &spec, cutoff),
        Input::Semifree(m) => validate_semifree(m, &build_ce(&spec)?).map(|_| ()),
        Input::Fiber(f) => validate_fiber(f, &spec),
    }
}

fn validate_presented(m: &PresentedRModule, spec: &AlgebraSpec, cutoff: Option<i64>) -> Result<(), Error> {
    let p = &m.presentation;
    for (k, r) in p.relations.iter().enumerate() {
        for (g, q) in r.iter().enumerate() {
            if !q.is_empty() && rpoly_weight(q).is_none() {
                return Err(Error::Schema(format!("relation {k}, generator {g}: entry is not homogeneous")));
            }
        }
        if p.relation_degree(r).is_none() && r.iter().any(|q| !q.is_empty()) {
            return Err(Error::Schema(format!("relation {k} is not homogeneous")));
        }
    }
    if m.rmod_i {
        let w = cutoff.unwrap_or_else(|| p.gens.iter().map(|b| b.w).max().unwrap_or(0) + 4);
        let lm = p.to_module(&Ring::polynomial(spec.n1, w))?;
        lm.check(&spec.ideal())?;
    }
    Ok(())
}

impl SemifreeDGModule {
    /// d_Γ(m e_g) = d_CE(m) e_g + (−1)^{|m|} m d_Γ(e_g), as a map on (poly, gen) pairs.
    pub fn apply(&self, ce: &CEAlgebra, x: &[(usize, SuperPoly)]) -> Result<Vec<(usize, SuperPoly)>, Error> {
        let mut out: BTreeMap<usize, SuperPoly> = BTreeMap::new();
        for (g, p) in x {
            let dp = ce.d.apply(p)?;
            add_to(&mut out, *g, &dp, &ce.table)?;
            for (mono, c) in &p.terms {
                let sign = if ce.table.mono_odd(mono) { qi(-1) } else { qi(1) };
                let m = SuperPoly::mono(&ce.table, mono.clone(), c * sign);
                for (h, q) in &self.differential[*g] {
                    let qp = sp_from(&ce.table, q);
                    add_to(&mut out, *h, &m.multiply(&qp)?, &ce.table)?;
                }
            }
        }
        Ok(out.into_iter().filter(|(_, p)| !p.is_zero()).collect())
    }
}

fn sp_from(t: &Arc<crate::poly::GeneratorTable>, q: &BTreeMap<Mono, Q>) -> SuperPoly {
    let mut p = SuperPoly::zero(t);
    for (m, c) in q {
        p.add_term(m.clone(), c.clone());
    }
    p
}

fn add_to(
    out: &mut BTreeMap<usize, SuperPoly>,
    g: usize,
    p: &SuperPoly,
    t: &Arc<crate::poly::GeneratorTable>,
) -> Result<(), Error> {
    let e = out.entry(g).or_insert_with(|| SuperPoly::zero(t));
    *e = e.add(p)?;
    Ok(())
}

pub fn validate_semifree(m: &SemifreeDGModule, ce: &CEAlgebra) -> Result<(), Error> {
    if m.differential.len() != m.gens.len() {
        return Err(Error::Schema("differential must list every generator".into()));
    }
    for (g, img) in m.differential.iter().enumerate() {
        for (h, q) in img {
            let p = sp_from(&ce.table, q);
            let Some(b) = p.bidegree() else {
                return Err(Error::Schema(format!("generator {g}: differential entry is not homogeneous")));
            };
            if p.is_zero() {
                continue;
            }
            if m.gens[*h] + b != m.gens[g] + Bidegree::new(0, 1) {
                return Err(Error::NotLifted(format!(
                    "generator {g}: term on generator {h} has bidegree {} but {} is required",
                    m.gens[*h] + b,
                    m.gens[g] + Bidegree::new(0, 1)
                )));
            }
        }
    }
    for g in 0..m.gens.len() {
        let dg = m.apply(ce, &[(g, SuperPoly::one(&ce.table))])?;
        let ddg = m.apply(ce, &dg)?;
        if let Some((h, p)) = ddg.first() {
            return Err(Error::DgConditionViolated { generator: g, residual: format!("{} e{}", p.render(), h) });
        }
    }
    Ok(())
}

/// Every operator entry must shift bidegree by the lifted amount for its
/// δ-order k: D₀ by (2k, 1), ρ¹ by (2k − 1, 0), ρ² by (2k − 2, −1).
fn check_shifts(space: &GradedSpace, op: &DOp, base: Bidegree, what: &str) -> Result<(), Error> {
    for (m, a) in &op.terms {
        let k = crate::transfer::dmon_order(m) as i64;
        let shift = base + Bidegree::new(2 * k, 0);
        for (j, col) in a.cols.iter().enumerate() {
            for &i in col.keys() {
                if space.deg(i) != space.deg(j) + shift {
                    return Err(Error::NotLifted(format!(
                        "{what}: entry ({i},{j}) of δ-order {k} maps {} to {}",
                        space.deg(j),
                        space.deg(i)
                    )));
                }
            }
        }
    }
    Ok(())
}

pub fn validate_fiber(f: &MultipletFiber, spec: &AlgebraSpec) -> Result<(), Error> {
    let n = f.space.len();
    if f.rho1.len() != spec.n1 {
        return Err(Error::Schema(format!("expected {} ρ¹ maps", spec.n1)));
    }
    check_shifts(&f.space, &f.d0, Bidegree::new(0, 1), "d0")?;
    for (a, r) in f.rho1.iter().enumerate() {
        check_shifts(&f.space, r, Bidegree::new(-1, 0), &format!("rho1[{}]", a + 1))?;
    }
    for (&(a, b), r) in &f.rho2 {
        check_shifts(&f.space, r, Bidegree::new(-2, -1), &format!("rho2[{},{}]", a + 1, b + 1))?;
    }
    for k in 0..n {
        if !dvec_is_zero(&f.d0.apply(&f.d0.apply_basis(k))) {
            return Err(Error::Invariant(format!("D₀² ≠ 0 on basis {k}")));
        }
    }
    check_rho1_closed(&f.space, &f.d0, &f.rho1, i64::MAX)?;
    check_linf(&f.space, &f.d0, &f.rho1, &f.rho2, &spec.f, i64::MAX)
}

// ---------------------------------------------------------------- catalog

pub const BUNDLED: &[(&str, &str)] = &[
    ("3d-H0", include_str!("../data/3d-H0.json")),
    ("3d-H-1", include_str!("../data/3d-H-1.json")),
    ("3d-CE", include_str!("../data/3d-CE.json")),
    ("qm1-H0", include_str!("../data/qm1-H0.json")),
    ("qm1-residue", include_str!("../data/qm1-residue.json")),
    ("qm2-lc-splus", include_str!("../data/qm2-lc-splus.json")),
    ("4d-sym-splus", include_str!("../data/4d-sym-splus.json")),
    ("scalar", include_str!("../data/scalar.json")),
    ("3d-gauge-fiber", include_str!("../data/3d-gauge-fiber.json")),
    ("4d-vector-antifield", include_str!("../data/4d-vector-antifield.json")),
    ("4d-chiral-onshell", include_str!("../data/4d-chiral-onshell.json")),
];

pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

pub fn bundled(name: &str) -> Result<Input, Error> {
    let (_, text) = BUNDLED.iter().find(|(n, _)| *n == name).ok_or_else(|| Error::Unknown(name.into()))?;
    from_json(text, None)
}

pub fn bundled_examples() -> Result<Vec<(String, Input)>, Error> {
    BUNDLED.iter().map(|(n, t)| Ok((n.to_string(), from_json(t, None)?))).collect()
}

/// Unit vector helper used when building fibers by hand.
pub fn unit(i: usize) -> SVec {
    SVec::from([(i, qi(1))])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmodule::rp;

    fn r_mod_i() -> Input {
        Input::Presented(PresentedRModule {
            algebra: AlgebraRef::Preset("3dN1".into()),
            labels: vec!["1".into()],
            presentation: Presentation {
                n: 2,
                gens: vec![Bidegree::ZERO],
                relations: vec![vec![rp(&[(&[2, 0], 1)])], vec![rp(&[(&[1, 1], 1)])], vec![rp(&[(&[0, 2], 1)])]],
            },
            rmod_i: true,
            annotations: BTreeMap::new(),
        })
    }

    #[test]
    fn presented_roundtrip() {
        let x = r_mod_i();
        let s = to_json(&x);
        assert_eq!(from_json(&s, None).unwrap(), x);
        assert_eq!(to_json(&from_json(&s, None).unwrap()), s);
    }

    #[test]
    fn not_annihilated_is_rejected() {
        let mut x = r_mod_i();
        if let Input::Presented(m) = &mut x {
            m.presentation.relations.pop();
        }
        assert!(matches!(from_json(&to_json(&x), None), Err(Error::NotAnnihilated(_))));
    }

    #[test]
    fn ce_as_semifree() {
        let x = Input::Semifree(SemifreeDGModule {
            algebra: AlgebraRef::Preset("3dN1".into()),
            gens: vec![Bidegree::ZERO],
            labels: vec!["1".into()],
            differential: vec![vec![]],
            annotations: BTreeMap::new(),
        });
        assert_eq!(from_json(&to_json(&x), None).unwrap(), x);
    }

    #[test]
    fn dg_condition_violation_reports_generator() {
        // d e0 = v1 e1 with d e1 = 0: d² e0 = l1^2 e1 ≠ 0
        let x = Input::Semifree(SemifreeDGModule {
            algebra: AlgebraRef::Preset("3dN1".into()),
            gens: vec![Bidegree::new(0, 0), Bidegree::new(-2, 0)],
            labels: vec![],
            differential: vec![vec![(1, BTreeMap::from([(vec![0, 0, 1, 0, 0], qi(1))]))], vec![]],
            annotations: BTreeMap::new(),
        });
        match from_json(&to_json(&x), None) {
            Err(Error::DgConditionViolated { generator, residual }) => {
                assert_eq!(generator, 0);
                assert_eq!(residual, "l1^2 e1");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_class_and_bad_shift() {
        assert!(matches!(from_json(r#"{"class":"x","algebra":"3dN1"}"#, None), Err(Error::Schema(_))));
        let t = r#"{"class":"multiplet_fiber","algebra":"qm1","basis":[{"w":0,"d":0},{"w":0,"d":1}],
                    "d0":[],"rho1":[[1,1,0,[0],"1"]],"rho2":[]}"#;
        assert!(matches!(from_json(t, None), Err(Error::NotLifted(_))));
    }
}
