//! Reader and writer for a PDBQT subset: ATOM/HETATM, ROOT/ENDROOT,
//! BRANCH/ENDBRANCH, TORSDOF and CONECT.
//!
//! Atom records are parsed by whitespace tokens counted from the end of the
//! line (x y z occupancy b-factor charge type). Strict fixed-column parsing is
//! available through [`PdbqtOptions::strict_columns`].

use std::collections::HashMap;
use std::fmt::Write;

use crate::error::ParseError;
use crate::model::{Coords, LigandDraft, LigandTopology, ParameterTable, Protein};

#[derive(Debug, Clone, Copy, Default)]
pub struct PdbqtOptions {
    pub strict_columns: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdbqtAtom {
    pub serial: u32,
    pub name: String,
    pub position: [f32; 3],
    pub charge: f32,
    pub type_label: String,
}

/// A parsed ligand plus what the reader noticed along the way.
#[derive(Debug, Clone)]
pub struct PdbqtLigand {
    pub atoms: Vec<PdbqtAtom>,
    pub topology: LigandTopology,
    pub torsdof: Option<usize>,
    pub warnings: Vec<String>,
}

fn is_atom_record(line: &str) -> bool {
    line.starts_with("ATOM") || line.starts_with("HETATM")
}

fn tokens_with_spans(line: &str) -> Vec<(usize, usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s, i, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, line.len(), &line[s..]));
    }
    out
}

fn field_err(line: usize, start: usize, end: usize, message: impl Into<String>) -> ParseError {
    // reported columns are 1-based and inclusive
    ParseError::Field { line, start: start + 1, end, message: message.into() }
}

fn parse_atom_line(text: &str, line: usize, opts: PdbqtOptions) -> Result<PdbqtAtom, ParseError> {
    let float = |s: &str, start: usize, end: usize, what: &str| -> Result<f32, ParseError> {
        match s.trim().parse::<f32>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(field_err(line, start, end, format!("malformed {what} {:?}", s.trim()))),
        }
    };
    if opts.strict_columns {
        let col = |a: usize, b: usize| -> Result<&str, ParseError> {
            text.get(a..b.min(text.len()))
                .filter(|_| text.len() > a)
                .ok_or_else(|| field_err(line, a, b, "line too short for fixed columns"))
        };
        let serial_s = col(6, 11)?;
        let serial = serial_s
            .trim()
            .parse()
            .map_err(|_| field_err(line, 6, 11, format!("malformed serial {:?}", serial_s.trim())))?;
        let name = col(12, 16)?.trim().to_string();
        let x = float(col(30, 38)?, 30, 38, "x coordinate")?;
        let y = float(col(38, 46)?, 38, 46, "y coordinate")?;
        let z = float(col(46, 54)?, 46, 54, "z coordinate")?;
        let charge = float(col(70, 76)?, 70, 76, "charge")?;
        let type_label = col(77, 79)?.trim().to_string();
        if type_label.is_empty() {
            return Err(field_err(line, 77, 79, "missing atom type"));
        }
        return Ok(PdbqtAtom { serial, name, position: [x, y, z], charge, type_label });
    }
    let toks = tokens_with_spans(text);
    if toks.len() < 10 {
        return Err(ParseError::Line { line, message: format!("atom record has {} fields, need at least 10", toks.len()) });
    }
    let n = toks.len();
    let serial = toks[1]
        .2
        .parse()
        .map_err(|_| field_err(line, toks[1].0, toks[1].1, format!("malformed serial {:?}", toks[1].2)))?;
    let get = |k: usize, what: &str| float(toks[k].2, toks[k].0, toks[k].1, what);
    Ok(PdbqtAtom {
        serial,
        name: toks[2].2.to_string(),
        position: [get(n - 7, "x coordinate")?, get(n - 6, "y coordinate")?, get(n - 5, "z coordinate")?],
        charge: get(n - 2, "charge")?,
        type_label: toks[n - 1].2.to_string(),
    })
}

fn two_serials(text: &str, line: usize) -> Result<(u32, u32), ParseError> {
    let f: Vec<&str> = text.split_whitespace().collect();
    if f.len() < 3 {
        return Err(ParseError::Line { line, message: format!("{} needs two atom serials", f[0]) });
    }
    let p = |s: &str| s.parse::<u32>().map_err(|_| ParseError::Line { line, message: format!("bad serial {s:?}") });
    Ok((p(f[1])?, p(f[2])?))
}

fn covalent_radius(type_label: &str) -> f32 {
    match type_label.chars().next() {
        Some('H') => 0.31,
        Some('C') | Some('A') => 0.76,
        Some('N') => 0.71,
        Some('O') => 0.66,
        Some('S') => 1.05,
        Some('P') => 1.07,
        _ => 0.8,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Open {
    Root,
    Branch(u32, u32),
}

pub fn parse_ligand_pdbqt(text: &str, table: &ParameterTable, opts: PdbqtOptions) -> Result<PdbqtLigand, ParseError> {
    let mut atoms = Vec::new();
    let mut type_index = Vec::new();
    let mut group = Vec::new();
    let mut stack: Vec<(Open, usize)> = Vec::new();
    let mut branches: Vec<(u32, u32, usize)> = Vec::new();
    let mut conect: Vec<(u32, u32, usize)> = Vec::new();
    let mut torsdof = None;
    let mut warnings = Vec::new();
    let mut next_group = 1usize;
    let mut group_stack = vec![0usize];
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim_end();
        let keyword = trimmed.split_whitespace().next().unwrap_or("");
        if is_atom_record(trimmed) {
            let atom = parse_atom_line(trimmed, line, opts)?;
            let t = table.index_of(&atom.type_label).ok_or_else(|| ParseError::Line {
                line,
                message: format!("unknown atom type {:?}", atom.type_label),
            })?;
            type_index.push(t);
            group.push(*group_stack.last().unwrap());
            atoms.push(atom);
            continue;
        }
        match keyword {
            "ROOT" => stack.push((Open::Root, line)),
            "ENDROOT" => match stack.pop() {
                Some((Open::Root, _)) => {}
                _ => return Err(ParseError::Line { line, message: "ENDROOT without matching ROOT".into() }),
            },
            "BRANCH" => {
                let (a, b) = two_serials(trimmed, line)?;
                stack.push((Open::Branch(a, b), line));
                branches.push((a, b, line));
                group_stack.push(next_group);
                next_group += 1;
            }
            "ENDBRANCH" => {
                let (a, b) = two_serials(trimmed, line)?;
                match stack.pop() {
                    Some((Open::Branch(oa, ob), _)) if oa == a && ob == b => {
                        group_stack.pop();
                    }
                    other => {
                        let open = match other {
                            Some((Open::Branch(oa, ob), l)) => format!("BRANCH {oa} {ob} opened at line {l}"),
                            Some((Open::Root, l)) => format!("ROOT opened at line {l}"),
                            None => "nothing open".to_string(),
                        };
                        return Err(ParseError::Line { line, message: format!("ENDBRANCH {a} {b} does not close {open}") });
                    }
                }
            }
            "TORSDOF" => {
                let n = trimmed.split_whitespace().nth(1).and_then(|s| s.parse().ok());
                torsdof = Some(n.ok_or_else(|| ParseError::Line { line, message: "bad TORSDOF".into() })?);
            }
            "CONECT" => {
                let f: Vec<u32> = trimmed
                    .split_whitespace()
                    .skip(1)
                    .map(|s| s.parse().map_err(|_| ParseError::Line { line, message: format!("bad CONECT serial {s:?}") }))
                    .collect::<Result<_, _>>()?;
                if let Some((&from, rest)) = f.split_first() {
                    conect.extend(rest.iter().map(|&to| (from, to, line)));
                }
            }
            _ => {}
        }
    }
    if let Some((open, l)) = stack.last() {
        let what = match open {
            Open::Root => "ROOT".to_string(),
            Open::Branch(a, b) => format!("BRANCH {a} {b}"),
        };
        return Err(ParseError::Line { line: last_line, message: format!("end of file with unclosed {what} from line {l}") });
    }
    if atoms.is_empty() {
        return Err(ParseError::NoAtoms);
    }

    let by_serial: HashMap<u32, usize> = atoms.iter().enumerate().map(|(i, a)| (a.serial, i)).collect();
    let resolve = |s: u32, line: usize| {
        by_serial.get(&s).copied().ok_or(ParseError::Line { line, message: format!("unknown atom serial {s}") })
    };

    let mut rotatable = Vec::with_capacity(branches.len());
    for &(a, b, line) in &branches {
        rotatable.push((resolve(a, line)?, resolve(b, line)?));
    }
    if let Some(t) = torsdof {
        if t != branches.len() {
            let msg = format!("TORSDOF {t} disagrees with {} BRANCH records; using the BRANCH count", branches.len());
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }

    let coords = Coords::from_points(&atoms.iter().map(|a| a.position).collect::<Vec<_>>());
    let mut bonds: Vec<(usize, usize)> = Vec::new();
    let mut add_bond = |a: usize, b: usize| {
        let key = (a.min(b), a.max(b));
        if a != b && !bonds.contains(&key) {
            bonds.push(key);
        }
    };
    if conect.is_empty() {
        // infer covalent bonds within each rigid fragment
        for i in 0..atoms.len() {
            for j in (i + 1)..atoms.len() {
                if group[i] != group[j] {
                    continue;
                }
                let cutoff = covalent_radius(&atoms[i].type_label) + covalent_radius(&atoms[j].type_label) + 0.45;
                if coords.distance(i, j) < cutoff {
                    add_bond(i, j);
                }
            }
        }
    } else {
        for &(a, b, line) in &conect {
            add_bond(resolve(a, line)?, resolve(b, line)?);
        }
    }
    for &(a, b) in &rotatable {
        add_bond(a, b);
    }
    bonds.sort_unstable();

    let draft = LigandDraft {
        coords,
        type_index,
        charge: atoms.iter().map(|a| a.charge).collect(),
        bonds,
        rotatable,
    };
    let topology = LigandTopology::new(draft).map_err(|e| ParseError::Other(format!("invalid ligand: {e}")))?;
    Ok(PdbqtLigand { atoms, topology, torsdof, warnings })
}

pub fn parse_protein_pdbqt(text: &str, table: &ParameterTable, opts: PdbqtOptions) -> Result<Protein, ParseError> {
    let mut coords = Coords::default();
    let mut types = Vec::new();
    let mut charge = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim_end();
        if is_atom_record(trimmed) {
            let atom = parse_atom_line(trimmed, line, opts)?;
            let t = table.index_of(&atom.type_label).ok_or_else(|| ParseError::Line {
                line,
                message: format!("unknown atom type {:?}", atom.type_label),
            })?;
            coords.push(atom.position);
            types.push(t);
            charge.push(atom.charge);
        } else if matches!(trimmed.split_whitespace().next(), Some("BRANCH" | "ENDBRANCH")) {
            return Err(ParseError::Line { line, message: "BRANCH record in receptor; the receptor is rigid".into() });
        }
    }
    if coords.is_empty() {
        return Err(ParseError::NoAtoms);
    }
    Protein::new(coords, types, charge).map_err(|e| ParseError::Other(e.to_string()))
}

fn atom_line(out: &mut String, serial: usize, name: &str, p: [f32; 3], q: f32, label: &str) {
    writeln!(
        out,
        "ATOM  {:>5} {:<4} LIG A   1    {:>8.3}{:>8.3}{:>8.3}  1.00  0.00    {:>+6.3} {:<2}",
        serial, name, p[0], p[1], p[2], q, label
    )
    .unwrap();
}

/// Serialize a receptor as plain PDBQT ATOM records.
pub fn write_protein_pdbqt(protein: &Protein, table: &ParameterTable) -> String {
    let mut out = String::new();
    for i in 0..protein.n_atoms() {
        let label = table.get(protein.type_index()[i]).map_or("C", |p| p.label.as_str());
        let name: String = label.chars().take(1).collect();
        atom_line(&mut out, i + 1, &name, protein.coords().get(i), protein.charge()[i], label);
    }
    out.push_str("END\n");
    out
}

/// Serialize a ligand as PDBQT with ROOT/BRANCH nesting derived from the
/// fragment masks and explicit CONECT records. Atoms are renumbered in output
/// order.
pub fn write_ligand_pdbqt(topology: &LigandTopology, table: &ParameterTable, names: Option<&[String]>) -> String {
    let n = topology.n_atoms();
    let rot = topology.rotatable();
    // innermost branch owning each atom; branch k owns b_k and its moving set
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut by_depth: Vec<usize> = (0..rot.len()).collect();
    // nested fragments have strictly smaller moving sets, so outer ones go first
    by_depth.sort_by_key(|&k| std::cmp::Reverse(rot[k].moving.len()));
    for k in by_depth {
        owner[rot[k].b as usize] = Some(k);
        for &m in &rot[k].moving {
            owner[m as usize] = Some(k);
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut out = String::new();
    let mut serial_of = vec![0usize; n];
    let label = |i: usize| table.get(topology.type_index()[i]).map_or("X", |p| p.label.as_str()).to_string();
    let name = |i: usize| match names {
        Some(ns) if i < ns.len() => ns[i].clone(),
        _ => format!("{}{}", label(i).chars().next().unwrap_or('X'), i + 1),
    };

    fn emit(
        group: Option<usize>,
        topology: &LigandTopology,
        owner: &[Option<usize>],
        order: &mut Vec<usize>,
        serial_of: &mut [usize],
        lines: &mut Vec<(Option<usize>, usize)>,
    ) {
        for i in 0..topology.n_atoms() {
            if owner[i] == group {
                order.push(i);
                serial_of[i] = order.len();
                lines.push((None, i));
            }
        }
        for (k, r) in topology.rotatable().iter().enumerate() {
            if owner[r.a as usize] == group && owner[r.b as usize] == Some(k) {
                lines.push((Some(k), usize::MAX));
                emit(Some(k), topology, owner, order, serial_of, lines);
                lines.push((Some(k), usize::MAX - 1));
            }
        }
    }
    let mut lines = Vec::new();
    emit(None, topology, &owner, &mut order, &mut serial_of, &mut lines);

    out.push_str("REMARK  generated by vecdock\n");
    let mut root_open = false;
    for (i, &(branch, atom)) in lines.iter().enumerate() {
        match (branch, atom) {
            (None, a) => {
                if !root_open && i == 0 {
                    out.push_str("ROOT\n");
                    root_open = true;
                }
                let p = topology.coords0().get(a);
                atom_line(&mut out, serial_of[a], &name(a), p, topology.charge()[a], &label(a));
            }
            (Some(k), usize::MAX) => {
                if root_open {
                    out.push_str("ENDROOT\n");
                    root_open = false;
                }
                let r = &rot[k];
                writeln!(out, "BRANCH {:>3} {:>3}", serial_of[r.a as usize], serial_of[r.b as usize]).unwrap();
            }
            (Some(k), _) => {
                let r = &rot[k];
                writeln!(out, "ENDBRANCH {:>3} {:>3}", serial_of[r.a as usize], serial_of[r.b as usize]).unwrap();
            }
        }
    }
    if root_open {
        out.push_str("ENDROOT\n");
    }
    writeln!(out, "TORSDOF {}", rot.len()).unwrap();
    let mut bonds: Vec<(usize, usize)> =
        topology.bonds().iter().map(|&(a, b)| (serial_of[a as usize], serial_of[b as usize])).collect();
    bonds.iter_mut().for_each(|b| *b = (b.0.min(b.1), b.0.max(b.1)));
    bonds.sort_unstable();
    for (a, b) in bonds {
        writeln!(out, "CONECT{a:>5}{b:>5}").unwrap();
    }
    out
}
