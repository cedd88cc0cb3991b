//! Reads P1 CIF files and converts them to a JSONL dataset.
//!
//!     cargo run --example cif_ingest -- out.jsonl a.cif b.cif ...
//!
//! Without arguments the bundled test fixtures are used; files that are not
//! P1 or name unknown elements are reported and skipped.

use std::path::PathBuf;

use dpcdvae::io::{read_cif_p1, write_jsonl, DatasetRecord};
use dpcdvae::metrics::density;

fn main() -> dpcdvae::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out = PathBuf::from(args.first().map_or("cif_ingest.jsonl", String::as_str));
    let inputs: Vec<PathBuf> = if args.len() > 1 {
        args[1..].iter().map(PathBuf::from).collect()
    } else {
        let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
        ["diamond_p1.cif", "four_symops.cif", "unknown_element.cif"].iter().map(|f| dir.join(f)).collect()
    };

    let mut records = Vec::new();
    for path in &inputs {
        match read_cif_p1(path) {
            Ok(s) => {
                println!(
                    "{}: {} atoms, V = {:.3} Å³, ρ = {:.4} g/cm³",
                    path.display(),
                    s.num_atoms(),
                    s.lattice().volume(),
                    density(&s)?
                );
                let id = path.file_stem().map(|f| f.to_string_lossy().into_owned());
                records.push(DatasetRecord { id, ..DatasetRecord::from_structure(&s) });
            }
            Err(e) => println!("{}: skipped ({e})", path.display()),
        }
    }
    if records.is_empty() {
        println!("nothing to write");
        return Ok(());
    }
    write_jsonl(&out, &records)?;
    println!("wrote {} records to {}", records.len(), out.display());
    Ok(())
}
