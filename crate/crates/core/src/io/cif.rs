//! Reader for P1 CIF files.

use std::collections::HashMap;
use std::path::Path;

use crate::elements::atomic_number;
use crate::error::{Error, Result};
use crate::lattice::{CrystalStructure, Frac, Lattice, LatticeParams};

const SYMOP_TAGS: [&str; 2] = ["_symmetry_equiv_pos_as_xyz", "_space_group_symop_operation_xyz"];

struct Loop {
    tags: Vec<String>,
    rows: Vec<(usize, Vec<String>)>,
}

/// Splits a line into whitespace-separated tokens, honoring single and double
/// quotes.
fn tokenize(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '\'' || c == '"' {
            chars.next();
            let tok: String = chars.by_ref().take_while(|&x| x != c).collect();
            out.push(tok);
        } else if c == '#' {
            break;
        } else {
            let mut tok = String::new();
            while let Some(&x) = chars.peek() {
                if x.is_whitespace() {
                    break;
                }
                tok.push(x);
                chars.next();
            }
            out.push(tok);
        }
    }
    out
}

/// Numeric value with any standard uncertainty such as `5.431(2)` removed.
fn number(s: &str) -> Option<f64> {
    s.split('(').next()?.parse().ok()
}

fn is_identity(op: &str) -> bool {
    let norm: String = op.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    norm == "x,y,z" || norm == "+x,+y,+z"
}

pub fn parse_cif_p1(text: &str, path: &Path) -> Result<CrystalStructure> {
    let err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut values: HashMap<String, (usize, String)> = HashMap::new();
    let mut loops: Vec<Loop> = Vec::new();
    let lines: Vec<&str> = text.lines().collect();
    let mut i = 0;
    while i < lines.len() {
        let toks = tokenize(lines[i]);
        if toks.is_empty() || toks[0].starts_with("data_") {
            i += 1;
            continue;
        }
        if toks[0].eq_ignore_ascii_case("loop_") {
            let mut lp = Loop { tags: Vec::new(), rows: Vec::new() };
            i += 1;
            while i < lines.len() {
                let t = tokenize(lines[i]);
                match t.first() {
                    Some(tag) if tag.starts_with('_') => {
                        lp.tags.push(tag.to_lowercase());
                        i += 1;
                    }
                    _ => break,
                }
            }
            let mut pending: Vec<String> = Vec::new();
            let mut start = i + 1;
            while i < lines.len() {
                let t = tokenize(lines[i]);
                if let Some(first) = t.first() {
                    if first.starts_with('_') || first.eq_ignore_ascii_case("loop_") || first.starts_with("data_") {
                        break;
                    }
                }
                if pending.is_empty() {
                    start = i + 1;
                }
                pending.extend(t);
                i += 1;
                while pending.len() >= lp.tags.len() && !lp.tags.is_empty() {
                    let row: Vec<String> = pending.drain(..lp.tags.len()).collect();
                    lp.rows.push((start, row));
                }
            }
            if !pending.is_empty() {
                return Err(err(start, "incomplete loop row".into()));
            }
            loops.push(lp);
            continue;
        }
        if toks[0].starts_with('_') {
            let Some(v) = toks.get(1) else {
                return Err(err(i + 1, format!("tag {} has no value", toks[0])));
            };
            values.insert(toks[0].to_lowercase(), (i + 1, v.clone()));
        }
        i += 1;
    }

    for lp in &loops {
        if let Some(col) = lp.tags.iter().position(|t| SYMOP_TAGS.contains(&t.as_str())) {
            let ops: Vec<&String> = lp.rows.iter().map(|(_, r)| &r[col]).collect();
            if ops.len() > 1 || ops.iter().any(|op| !is_identity(op)) {
                return Err(Error::UnsupportedSymmetry(format!(
                    "{}: {} symmetry operations; only P1 files are supported",
                    path.display(),
                    ops.len()
                )));
            }
        }
    }
    for tag in SYMOP_TAGS {
        if let Some((line, v)) = values.get(tag) {
            if !is_identity(v) {
                return Err(Error::UnsupportedSymmetry(format!("{}:{line}: operation {v}", path.display())));
            }
        }
    }

    let cell = |name: &str| -> Result<f64> {
        let tag = format!("_cell_{name}");
        let (line, v) = values.get(&tag).ok_or_else(|| err(0, format!("missing tag {tag}")))?;
        number(v).ok_or_else(|| err(*line, format!("{tag} is not a number: {v}")))
    };
    let params = LatticeParams::new(
        cell("length_a")?,
        cell("length_b")?,
        cell("length_c")?,
        cell("angle_alpha")?,
        cell("angle_beta")?,
        cell("angle_gamma")?,
    );
    let lattice = Lattice::from_params(params).map_err(|e| err(0, e.to_string()))?;

    let sites = loops
        .iter()
        .find(|l| l.tags.iter().any(|t| t == "_atom_site_fract_x"))
        .ok_or_else(|| err(0, "missing _atom_site_fract_x loop".into()))?;
    let col = |tag: &str| sites.tags.iter().position(|t| t == tag);
    let missing = |tag: &str| err(0, format!("missing tag {tag}"));
    let (cx, cy, cz) = (
        col("_atom_site_fract_x").ok_or_else(|| missing("_atom_site_fract_x"))?,
        col("_atom_site_fract_y").ok_or_else(|| missing("_atom_site_fract_y"))?,
        col("_atom_site_fract_z").ok_or_else(|| missing("_atom_site_fract_z"))?,
    );
    let csym = col("_atom_site_type_symbol")
        .or_else(|| col("_atom_site_label"))
        .ok_or_else(|| missing("_atom_site_type_symbol"))?;

    let mut frac: Vec<Frac> = Vec::new();
    let mut numbers = Vec::new();
    for (line, row) in &sites.rows {
        let coord = |c: usize| number(&row[c]).ok_or_else(|| err(*line, format!("bad coordinate {}", row[c])));
        frac.push([coord(cx)?, coord(cy)?, coord(cz)?]);
        let z = atomic_number(&row[csym]).ok_or_else(|| err(*line, format!("unknown element symbol {}", row[csym])))?;
        numbers.push(z);
    }
    CrystalStructure::wrapped(lattice, frac, numbers).map_err(|e| err(0, e.to_string()))
}

pub fn read_cif_p1(path: &Path) -> Result<CrystalStructure> {
    let text = std::fs::read_to_string(path)?;
    parse_cif_p1(&text, path)
}
