//! Builders for the generated bundled examples in `data/`.

use std::collections::BTreeMap;

use crate::algebra::{build_ce, lie_cohomology, preset};
use crate::functors::{couple, direct_sum, dual_fiber, kinetic_terms, minimal_fiber, mu_a_underived, presented, MuOptions};
use crate::graded::{qi, Bidegree};
use crate::module_io::{validate, Input, MultipletFiber, PresentedRModule};
use crate::rmodule::{Presentation, RPoly};
use crate::transfer::DOp;
use crate::Error;

/// Names of the bundled files produced here.
pub const GENERATED: &[&str] = &["3d-H0", "3d-H-1", "3d-gauge-fiber", "4d-vector-antifield", "4d-chiral-onshell"];

fn described(mut x: Input, text: &str) -> Input {
    let a: &mut BTreeMap<String, String> = match &mut x {
        Input::Presented(m) => &mut m.annotations,
        Input::Semifree(m) => &mut m.annotations,
        Input::Fiber(f) => &mut f.annotations,
    };
    a.insert("description".into(), text.into());
    x
}

/// Names basis vectors by bidegree: base name plus a running index.
fn relabel(mut f: MultipletFiber, names: &[((i64, i64), &str)]) -> MultipletFiber {
    let dims = f.space.dims();
    let mut seen: BTreeMap<Bidegree, usize> = BTreeMap::new();
    for e in f.space.elems.iter_mut() {
        let Some((_, base)) = names.iter().find(|(b, _)| Bidegree::new(b.0, b.1) == e.deg) else { continue };
        let k = seen.entry(e.deg).or_insert(0);
        *k += 1;
        e.label = Some(if dims[&e.deg] == 1 { base.to_string() } else { format!("{base}{k}") });
    }
    f
}

fn cohomology_module(k: i64) -> Result<PresentedRModule, Error> {
    let spec = preset("3dN1")?;
    let h = lie_cohomology(&build_ce(&spec)?, 8)?;
    let p = h.presentations.get(&k).cloned().ok_or_else(|| Error::Invariant(format!("no H^{k}")))?;
    Ok(presented("3dN1", p))
}

fn r_mod_i_4d() -> Result<PresentedRModule, Error> {
    let spec = preset("4dN1")?;
    Ok(presented(
        "4dN1",
        Presentation { n: 4, gens: vec![Bidegree::ZERO], relations: spec.ideal().into_iter().map(|q| vec![q]).collect() },
    ))
}

/// R/(λ_a, λ_b) over 4dN1.
fn plane(a: usize, b: usize) -> PresentedRModule {
    let lin = |i: usize| {
        let mut e = vec![0u32; 4];
        e[i] = 1;
        vec![RPoly::from([(e, qi(1))])]
    };
    presented("4dN1", Presentation { n: 4, gens: vec![Bidegree::ZERO], relations: vec![lin(a), lin(b)] })
}

fn fiber_of(m: &PresentedRModule, cutoff: i64) -> Result<MultipletFiber, Error> {
    mu_a_underived(m, &MuOptions::new(cutoff))?.to_fiber()
}

pub fn vector_antifield() -> Result<MultipletFiber, Error> {
    let f = dual_fiber(&fiber_of(&r_mod_i_4d()?, 6)?, Bidegree::new(4, 1));
    Ok(relabel(f, &[((0, 0), "c"), ((1, 0), "chi"), ((2, 0), "B"), ((4, 1), "s")]))
}

/// Off-shell chiral ⊕ its antifields, coupled by the kinetic term with a
/// constant part, then contracted along that constant part.
pub fn chiral_onshell() -> Result<MultipletFiber, Error> {
    let c = direct_sum(&fiber_of(&plane(2, 3), 6)?, &fiber_of(&plane(0, 1), 6)?);
    let cd = dual_fiber(&c, Bidegree::new(4, 1));
    let mut k = DOp::zero(c.d0.n2, cd.space.len(), c.space.len());
    for x in kinetic_terms(&c, &cd)?.iter().filter(|x| !x.order0().is_zero()) {
        k = k.add(x);
    }
    let f = minimal_fiber(&couple(&c, &cd, &k))?;
    Ok(relabel(f, &[((0, 0), "phi"), ((1, 0), "psi"), ((3, 1), "psi*"), ((4, 1), "phi*")]))
}

pub fn generate(name: &str) -> Result<Input, Error> {
    let x = match name {
        "3d-H0" => described(Input::Presented(cohomology_module(0)?), "H^0 of the 3d N=1 supertranslation algebra, R/I"),
        "3d-H-1" => described(Input::Presented(cohomology_module(-1)?), "H^-1 of the 3d N=1 supertranslation algebra"),
        "3d-gauge-fiber" => described(
            Input::Fiber(relabel(fiber_of(&cohomology_module(0)?, 6)?, &[((0, 0), "c"), ((2, 1), "A"), ((3, 1), "lam")])),
            "component multiplet of H^0 in 3d N=1 (gauge multiplet)",
        ),
        "4d-vector-antifield" => {
            described(Input::Fiber(vector_antifield()?), "4d N=1 vector antifield multiplet, dual of the multiplet of R/I")
        }
        "4d-chiral-onshell" => described(
            Input::Fiber(chiral_onshell()?),
            "4d N=1 on-shell chiral multiplet: off-shell chiral plus antifields with kinetic term, auxiliary fields eliminated",
        ),
        _ => return Err(Error::Unknown(name.into())),
    };
    validate(&x, None)?;
    Ok(x)
}
