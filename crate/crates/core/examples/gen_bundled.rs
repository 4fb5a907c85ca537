//! Regenerates the derived golden files in data/.
//!
//! cargo run --release -p msf-core --example gen_bundled

use std::path::PathBuf;

fn main() -> Result<(), msf_core::Error> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    for name in msf_core::golden::GENERATED {
        let x = msf_core::golden::generate(name)?;
        let path = dir.join(format!("{name}.json"));
        msf_core::module_io::save(&path, &x)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
