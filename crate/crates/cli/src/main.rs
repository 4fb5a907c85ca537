use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use msf_core::algebra::{build_ce, is_complete_intersection_window, lie_cohomology, preset, AlgebraSpec, PRESETS};
use msf_core::functors::{
    default_cutoff, derived_invariants, mu_a, recognize_underived, roundtrip_fiber, roundtrip_module, roundtrip_semifree, CurvedModule,
    MuOptions,
};
use msf_core::module_io::{bundled, bundled_names, load, to_json, AlgebraRef, Input, PresentedRModule};
use msf_core::report;
use msf_core::resolution::{minimal_resolution, tor_oracle};
use msf_core::rmodule::{Presentation, Ring};
use msf_core::{Bidegree, Error};

#[derive(Parser)]
#[command(name = "msf", version, about = "Component multiplets from pure spinor superfields, in exact arithmetic")]
struct Cli {
    /// Worker threads for block-parallel linear algebra.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    TextArray,
    Tsv,
}

#[derive(Args, Clone)]
struct Source {
    /// Algebra preset; without --input it stands for R/I.
    #[arg(long)]
    preset: Option<String>,
    /// Input JSON file, or the name of a bundled example.
    #[arg(long)]
    input: Option<String>,
    /// Weight cutoff W.
    #[arg(long)]
    cutoff: Option<i64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lie algebra cohomology H^k(n) as λ-modules.
    Cohomology(Source),
    /// Minimal free resolution and Betti table.
    Resolve {
        #[command(flatten)]
        src: Source,
        /// Resolve over R/I instead of R.
        #[arg(long)]
        over_quotient: bool,
        /// Also compute Tor via the Koszul complex and compare.
        #[arg(long)]
        oracle: bool,
    },
    /// Component multiplet μA of a module, a dg module or a fiber.
    Multiplet {
        #[command(flatten)]
        src: Source,
        /// Skip the third-order homotopy check.
        #[arg(long)]
        no_third_order: bool,
    },
    /// Derived invariants of a multiplet fiber.
    Invariants(Source),
    /// Whether a fiber comes from an R/I-module in a single degree.
    Recognize(Source),
    /// Roundtrip through both functors.
    Roundtrip(Source),
    /// Presets and bundled examples.
    Catalog {
        /// Print one bundled example as JSON.
        #[arg(long)]
        show: Option<String>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Schema(_)
        | Error::NotLifted(_)
        | Error::DgConditionViolated { .. }
        | Error::TableMismatch
        | Error::NonPositiveWeightGenerator(_)
        | Error::AsymmetricStructureConstants(_)
        | Error::NotAnnihilated(_)
        | Error::Unknown(_)
        | Error::Io(_) => 2,
        _ => 3,
    }
}

fn r_mod_i(name: &str, spec: &AlgebraSpec) -> Input {
    Input::Presented(PresentedRModule {
        algebra: AlgebraRef::Preset(name.into()),
        labels: vec!["1".into()],
        presentation: Presentation {
            n: spec.n1,
            gens: vec![Bidegree::ZERO],
            relations: spec.ideal().into_iter().map(|q| vec![q]).collect(),
        },
        rmod_i: true,
        annotations: Default::default(),
    })
}

fn read_input(src: &Source) -> Result<Input, Error> {
    let x = match (&src.input, &src.preset) {
        (Some(p), _) => {
            let path = PathBuf::from(p);
            if path.exists() {
                load(&path, src.cutoff)?
            } else {
                bundled(p.trim_end_matches(".json"))?
            }
        }
        (None, Some(name)) => r_mod_i(name, &preset(name)?),
        (None, None) => return Err(Error::Schema("give --input or --preset".into())),
    };
    if let (Some(name), Some(_)) = (&src.preset, &src.input) {
        let want = preset(name)?;
        let have = x.algebra().spec()?;
        if want.f != have.f {
            return Err(Error::Schema(format!("input algebra `{}` does not match --preset {name}", have.name)));
        }
    }
    Ok(x)
}

fn cutoff_for(src: &Source, x: &Input) -> Result<i64, Error> {
    match src.cutoff {
        Some(w) => Ok(w),
        None => default_cutoff(x),
    }
}

fn presented_of(x: &Input) -> Result<&PresentedRModule, Error> {
    match x {
        Input::Presented(m) => Ok(m),
        _ => Err(Error::Schema(format!("expected a presented_r_module, got {}", x.class()))),
    }
}

fn fiber_of(x: &Input) -> Result<&msf_core::module_io::MultipletFiber, Error> {
    match x {
        Input::Fiber(f) => Ok(f),
        _ => Err(Error::Schema(format!("expected a multiplet_fiber, got {}", x.class()))),
    }
}

fn run(cmd: &Cmd) -> Result<String, Error> {
    match cmd {
        Cmd::Cohomology(src) => {
            let name = src.preset.clone().ok_or_else(|| Error::Schema("cohomology needs --preset".into()))?;
            let spec = preset(&name)?;
            let w = src.cutoff.unwrap_or(8);
            let ce = build_ce(&spec)?;
            let h = lie_cohomology(&ce, w)?;
            let ci = is_complete_intersection_window(&ce, w)?;
            Ok(match src.format {
                Format::Json => json!({
                    "preset": name,
                    "cutoff": w,
                    "hilbert": report::hilbert_json(&h.dims),
                    "complete_intersection_in_window": ci.concentrated_in_degree_zero,
                })
                .to_string(),
                _ => format!("{}\n{}", report::cutoff_banner(w, None), report::hilbert_text(&h.dims)),
            })
        }
        Cmd::Resolve { src, over_quotient, oracle } => {
            let x = read_input(src)?;
            let m = presented_of(&x)?;
            let spec = m.algebra.spec()?;
            let w = cutoff_for(src, &x)?;
            let ring = if *over_quotient { Ring::quotient(spec.n1, spec.ideal(), w) } else { Ring::polynomial(spec.n1, w) };
            let lm = m.presentation.to_module(&ring)?;
            let res = minimal_resolution(&lm, &ring)?;
            let mut out = match src.format {
                Format::Json => report::betti_json(&res.betti).to_string(),
                _ => format!("{}\n{}", report::cutoff_banner(w, None), res.betti.to_tsv()),
            };
            if *oracle {
                if *over_quotient {
                    return Err(Error::Schema("the Koszul oracle only applies over R".into()));
                }
                let t = tor_oracle(&lm);
                if !t.agrees_with(&res.betti) {
                    return Err(Error::Invariant("resolution and Koszul Tor disagree".into()));
                }
                out.push_str("oracle: agrees\n");
            }
            Ok(out)
        }
        Cmd::Multiplet { src, no_third_order } => {
            let x = read_input(src)?;
            let w = cutoff_for(src, &x)?;
            msf_core::module_io::validate(&x, Some(w))?;
            let y = CurvedModule::from_input(&x, w)?;
            let mut opts = MuOptions::new(w);
            opts.check_third_order = !no_third_order;
            let m = mu_a(&y, x.algebra(), &opts)?;
            Ok(match src.format {
                Format::Json => report::multiplet_json(&m).to_string(),
                Format::TextArray => {
                    let c = m.intermediate.as_ref().map(|c| &c.space).unwrap_or(&m.fields);
                    format!("{}\n", report::array_of(c))
                }
                _ => report::multiplet_text(&m),
            })
        }
        Cmd::Invariants(src) => {
            let x = read_input(src)?;
            let w = cutoff_for(src, &x)?;
            let r = derived_invariants(fiber_of(&x)?, w)?;
            Ok(match src.format {
                Format::Json => report::invariants_json(&r).to_string(),
                _ => report::invariants_text(&r),
            })
        }
        Cmd::Recognize(src) => {
            let x = read_input(src)?;
            let w = cutoff_for(src, &x)?;
            let r = recognize_underived(fiber_of(&x)?, w)?;
            let deg = r.degrees.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",");
            Ok(match src.format {
                Format::Json => json!({"underived": r.underived, "degrees": r.degrees}).to_string(),
                _ if r.underived => format!("underived-representable: degree {{{deg}}}\n"),
                _ => format!("NOT underived-representable: degrees {{{deg}}}\n"),
            })
        }
        Cmd::Roundtrip(src) => {
            let x = read_input(src)?;
            let w = cutoff_for(src, &x)?;
            let opts = MuOptions::new(w);
            let r = match &x {
                Input::Presented(m) => roundtrip_module(m, &opts)?,
                Input::Fiber(f) => roundtrip_fiber(f, &opts)?,
                Input::Semifree(g) => roundtrip_semifree(g, &opts)?,
            };
            Ok(match src.format {
                Format::Json => json!({"kind": r.kind.to_string(), "passed": r.passed, "detail": r.detail, "mismatch": r.mismatch}).to_string(),
                _ => format!(
                    "roundtrip ({}) {}: {}{}\n",
                    r.kind,
                    if r.passed { "passed" } else { "FAILED" },
                    r.detail,
                    r.mismatch.map(|m| format!("; {m}")).unwrap_or_default()
                ),
            })
        }
        Cmd::Catalog { show } => {
            if let Some(name) = show {
                return Ok(to_json(&bundled(name)?));
            }
            let mut s = String::from("presets:\n");
            for p in PRESETS {
                let spec = preset(p)?;
                s.push_str(&format!("  {p}\tn1={} n2={}\n", spec.n1, spec.n2));
            }
            s.push_str("bundled examples:\n");
            for n in bundled_names() {
                let x = bundled(n)?;
                s.push_str(&format!("  {n}\t{}\n", x.class()));
            }
            Ok(s)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("MF_LOG")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli.cmd) {
        Ok(text) => {
            let res = match &cli.out {
                Some(p) => std::fs::write(p, &text),
                None => {
                    print!("{text}");
                    if !text.ends_with('\n') {
                        println!();
                    }
                    Ok(())
                }
            };
            match res {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
