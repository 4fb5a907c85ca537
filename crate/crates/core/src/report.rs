//! Text and JSON rendering of arrays, tables and multiplets.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::functors::{shifts_by_order, ComponentMultiplet, InvariantsResult};
use crate::graded::{Bidegree, GradedSpace};
use crate::resolution::BettiTable;
use crate::transfer::{dmon_order, DOp};

/// Rows indexed by d, columns by w − d, over the occupied range.
pub fn sheared(dims: &BTreeMap<Bidegree, usize>) -> Vec<Vec<usize>> {
    let occupied: Vec<(&Bidegree, &usize)> = dims.iter().filter(|(_, &n)| n > 0).collect();
    if occupied.is_empty() {
        return vec![];
    }
    let (c0, c1) = occupied.iter().fold((i64::MAX, i64::MIN), |(a, b), (g, _)| (a.min(g.w - g.d), b.max(g.w - g.d)));
    let (r0, r1) = occupied.iter().fold((i64::MAX, i64::MIN), |(a, b), (g, _)| (a.min(g.d), b.max(g.d)));
    let mut out = vec![vec![0; (c1 - c0 + 1) as usize]; (r1 - r0 + 1) as usize];
    for (g, &n) in occupied {
        out[(g.d - r0) as usize][(g.w - g.d - c0) as usize] += n;
    }
    out
}

/// `[1 4 6 4 1; - 2 4 2 -]`, with `-` for empty cells.
pub fn format_array(rows: &[Vec<usize>]) -> String {
    let cells: Vec<String> = rows
        .iter()
        .map(|r| r.iter().map(|&n| if n == 0 { "-".to_string() } else { n.to_string() }).collect::<Vec<_>>().join(" "))
        .collect();
    format!("[{}]", cells.join("; "))
}

pub fn array_of(space: &GradedSpace) -> String {
    format_array(&sheared(&space.dims()))
}

/// Nonzero row entries only, e.g. `(1,4,4;1)`.
pub fn compact_dims(rows: &[Vec<usize>]) -> String {
    let r: Vec<String> = rows
        .iter()
        .map(|r| r.iter().filter(|&&n| n > 0).map(|n| n.to_string()).collect::<Vec<_>>().join(","))
        .collect();
    format!("({})", r.join(";"))
}

pub fn cutoff_banner(cutoff: i64, trusted: Option<i64>) -> String {
    match trusted {
        Some(t) => format!("# weight cutoff {cutoff}; operator data trusted up to weight {t}"),
        None => format!("# weight cutoff {cutoff}"),
    }
}

fn coeffs(v: &[usize]) -> String {
    v.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
}

/// One line per degree with nonzero Hilbert coefficients.
pub fn hilbert_text(dims: &BTreeMap<i64, Vec<usize>>) -> String {
    let mut s = String::new();
    for (k, v) in dims.iter().rev() {
        if v.iter().any(|&n| n > 0) {
            s.push_str(&format!("H^{k}\t({})\n", coeffs(v)));
        }
    }
    if s.is_empty() {
        s.push_str("all cohomology vanishes in the window\n");
    }
    s
}

pub fn hilbert_json(dims: &BTreeMap<i64, Vec<usize>>) -> Value {
    let m: serde_json::Map<String, Value> =
        dims.iter().filter(|(_, v)| v.iter().any(|&n| n > 0)).map(|(k, v)| (k.to_string(), json!(v))).collect();
    Value::Object(m)
}

pub fn betti_json(b: &BettiTable) -> Value {
    let rows: Vec<Value> = b
        .entries
        .iter()
        .filter(|(_, &n)| n > 0)
        .map(|((i, g), n)| json!({"i": i, "w": g.w, "d": g.d, "rank": n}))
        .collect();
    json!({"cutoff": b.cutoff, "stable": b.stable, "entries": rows})
}

fn names(n2: usize) -> Vec<String> {
    (1..=n2).map(|m| format!("∂{m}")).collect()
}

fn op_entries(op: &DOp, space: &GradedSpace) -> Vec<Value> {
    let mut out = Vec::new();
    let nm = names(op.n2);
    let mut seen = std::collections::BTreeSet::new();
    for t in op.terms.values() {
        for (j, c) in t.cols.iter().enumerate() {
            for &i in c.keys() {
                if seen.insert((i, j)) {
                    out.push(json!({
                        "from": label(space, j),
                        "to": label(space, i),
                        "value": op.render_entry(i, j, &nm),
                    }));
                }
            }
        }
    }
    out
}

fn label(space: &GradedSpace, i: usize) -> String {
    space.elems[i].label.clone().unwrap_or_else(|| format!("e{i}"))
}

fn order_summary(op: &DOp, space: &GradedSpace) -> Value {
    let s: serde_json::Map<String, Value> = shifts_by_order(op, space)
        .into_iter()
        .map(|(k, v)| (k.to_string(), json!(v.iter().map(|b| [b.w, b.d]).collect::<Vec<_>>())))
        .collect();
    Value::Object(s)
}

pub fn multiplet_text(m: &ComponentMultiplet) -> String {
    let mut s = cutoff_banner(m.cutoff, Some(m.trusted_weight));
    s.push('\n');
    if let Some(c) = &m.intermediate {
        s.push_str(&format!("sum of component multiplets: {}\n", array_of(&c.space)));
        for (k, v) in shifts_by_order(&c.d, &c.space) {
            s.push_str(&format!("  order {k}: shifts {}\n", fmt_shifts(&v)));
        }
    }
    let rows = sheared(&m.dims());
    s.push_str(&format!("minimal multiplet: {} {}\n", format_array(&rows), compact_dims(&rows)));
    for (k, v) in shifts_by_order(&m.d, &m.fields) {
        s.push_str(&format!("  order {k}: shifts {}\n", fmt_shifts(&v)));
    }
    for e in op_entries(&m.d, &m.fields) {
        s.push_str(&format!("  d {} -> {}: {}\n", e["from"].as_str().unwrap_or(""), e["to"].as_str().unwrap_or(""), e["value"].as_str().unwrap_or("")));
    }
    let r2 = m.rho2.values().filter(|x| !x.is_zero()).count();
    s.push_str(&format!("rho2 blocks nonzero: {r2}\n"));
    s
}

fn fmt_shifts(v: &[Bidegree]) -> String {
    v.iter().map(|b| format!("({},{})", b.w, b.d)).collect::<Vec<_>>().join(" ")
}

pub fn multiplet_json(m: &ComponentMultiplet) -> Value {
    let rho1: Vec<Value> = m.rho1.iter().map(|r| json!(op_entries(r, &m.fields))).collect();
    let rho2: Vec<Value> = m
        .rho2
        .iter()
        .filter(|(_, x)| !x.is_zero())
        .map(|((a, b), x)| json!({"alpha": a + 1, "beta": b + 1, "entries": op_entries(x, &m.fields)}))
        .collect();
    let fields: Vec<Value> = m
        .fields
        .elems
        .iter()
        .enumerate()
        .map(|(i, e)| json!({"label": label(&m.fields, i), "w": e.deg.w, "d": e.deg.d}))
        .collect();
    let mut v = json!({
        "cutoff": m.cutoff,
        "trusted_weight": m.trusted_weight,
        "array": array_of(&m.fields),
        "fields": fields,
        "differential": {
            "orders": order_summary(&m.d, &m.fields),
            "entries": op_entries(&m.d, &m.fields),
        },
        "rho1": rho1,
        "rho2": rho2,
    });
    if let Some(c) = &m.intermediate {
        v["intermediate"] = json!({
            "array": array_of(&c.space),
            "orders": order_summary(&c.d, &c.space),
        });
    }
    v
}

pub fn invariants_text(r: &InvariantsResult) -> String {
    let mut s = cutoff_banner(r.cutoff, None);
    s.push('\n');
    s.push_str(&hilbert_text(&r.homology.dims));
    s
}

pub fn invariants_json(r: &InvariantsResult) -> Value {
    json!({
        "cutoff": r.cutoff,
        "hilbert": hilbert_json(&r.homology.dims),
        "degrees": r.degrees,
        "concentrated": r.concentrated,
    })
}

/// Highest δ-order present in each operator family.
pub fn max_orders(m: &ComponentMultiplet) -> BTreeMap<&'static str, u32> {
    let mo = |op: &DOp| op.terms.keys().map(dmon_order).max().unwrap_or(0);
    BTreeMap::from([
        ("d", mo(&m.d)),
        ("rho1", m.rho1.iter().map(mo).max().unwrap_or(0)),
        ("rho2", m.rho2.values().map(mo).max().unwrap_or(0)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sheared_arrays() {
        let b = Bidegree::new;
        let dims = BTreeMap::from([(b(0, 0), 2), (b(1, 0), 4), (b(2, 0), 2), (b(2, 1), 2), (b(3, 1), 4), (b(4, 1), 2)]);
        assert_eq!(format_array(&sheared(&dims)), "[2 4 2 -; - 2 4 2]");
        let dims = BTreeMap::from([(b(0, 0), 1), (b(1, 0), 4), (b(2, 0), 4), (b(4, 1), 1)]);
        let rows = sheared(&dims);
        assert_eq!(compact_dims(&rows), "(1,4,4;1)");
        assert_eq!(format_array(&sheared(&BTreeMap::new())), "[]");
    }

    #[test]
    fn hilbert_lines() {
        let d = BTreeMap::from([(0, vec![1, 2, 0]), (-1, vec![0, 0, 0])]);
        assert_eq!(hilbert_text(&d), "H^0\t(1,2,0)\n");
    }
}
