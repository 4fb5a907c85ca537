use msf_core::golden::{generate, GENERATED};
use msf_core::module_io::{bundled, bundled_examples, to_json, validate};

#[test]
fn generated_files_are_current() {
    for name in GENERATED {
        let fresh = generate(name).unwrap();
        let stored = bundled(name).unwrap();
        assert_eq!(to_json(&fresh), to_json(&stored), "{name} is stale; rerun the gen_bundled example");
    }
}

#[test]
fn every_bundled_example_validates() {
    for (name, x) in bundled_examples().unwrap() {
        validate(&x, None).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}
