use criterion::{criterion_group, criterion_main, Criterion};

use msf_core::algebra::{build_ce, lie_cohomology, preset};
use msf_core::functors::{mu_a, CurvedModule, MuOptions};
use msf_core::module_io::{bundled, Input};
use msf_core::resolution::{minimal_resolution, tor_oracle};
use msf_core::rmodule::{Presentation, Ring};
use msf_core::Bidegree;

fn r_mod_i(name: &str, w: i64) -> (msf_core::rmodule::LamModule, Ring) {
    let spec = preset(name).unwrap();
    let ring = Ring::polynomial(spec.n1, w);
    let p = Presentation {
        n: spec.n1,
        gens: vec![Bidegree::ZERO],
        relations: spec.ideal().into_iter().map(|q| vec![q]).collect(),
    };
    (p.to_module(&ring).unwrap(), ring)
}

fn cohomology(c: &mut Criterion) {
    let ce = build_ce(&preset("3dN1").unwrap()).unwrap();
    c.bench_function("cohomology 3dN1 W=8", |b| b.iter(|| lie_cohomology(&ce, 8).unwrap()));
}

fn resolution(c: &mut Criterion) {
    let (m, ring) = r_mod_i("4dN1", 8);
    c.bench_function("resolution 4dN1 R/I W=8", |b| b.iter(|| minimal_resolution(&m, &ring).unwrap()));
    c.bench_function("koszul tor 4dN1 R/I W=8", |b| b.iter(|| tor_oracle(&m)));
}

fn multiplets(c: &mut Criterion) {
    let mut g = c.benchmark_group("multiplet");
    g.sample_size(10);
    for name in ["4d-vector-antifield", "4d-chiral-onshell"] {
        let Input::Fiber(f) = bundled(name).unwrap() else { unreachable!() };
        let spec = f.algebra.spec().unwrap();
        g.bench_function(format!("{name} W=8"), |b| {
            b.iter(|| {
                let y = CurvedModule::from_fiber(&f, &spec, 8).unwrap();
                mu_a(&y, &f.algebra, &MuOptions::new(8)).unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, cohomology, resolution, multiplets);
criterion_main!(benches);
