use std::fmt::Write;

use crate::error::ParseError;
use crate::model::{AtomParams, HbondRole, ParameterTable};

impl ParameterTable {
    /// Parse whitespace-separated rows `label r_eq eps volume solpar hbond`;
    /// `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut entries = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 6 {
                return Err(ParseError::Line { line, message: format!("expected 6 fields, found {}", fields.len()) });
            }
            let num = |k: usize, name: &str| -> Result<f32, ParseError> {
                fields[k]
                    .parse::<f32>()
                    .map_err(|_| ParseError::Line { line, message: format!("bad {name} {:?}", fields[k]) })
            };
            let label = fields[0].to_string();
            let r_eq = num(1, "r_eq")?;
            if !(r_eq > 0.0) {
                return Err(ParseError::Line { line, message: format!("r_eq must be positive, got {r_eq}") });
            }
            let eps = num(2, "eps")?;
            let volume = num(3, "volume")?;
            if eps < 0.0 || volume < 0.0 {
                return Err(ParseError::Line { line, message: "eps and volume must be non-negative".into() });
            }
            let solpar = num(4, "solpar")?;
            let hbond = HbondRole::from_flag(fields[5])
                .ok_or_else(|| ParseError::Line { line, message: format!("bad hbond flag {:?}", fields[5]) })?;
            if !seen.insert(label.clone()) {
                return Err(ParseError::Line { line, message: format!("duplicate type label {label:?}") });
            }
            entries.push(AtomParams { label, r_eq, eps, volume, solpar, hbond });
        }
        ParameterTable::new(entries)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# label  r_eq  eps  volume  solpar  hbond\n");
        for p in self.iter() {
            writeln!(out, "{} {} {} {} {} {}", p.label, p.r_eq, p.eps, p.volume, p.solpar, p.hbond.flag()).unwrap();
        }
        out
    }
}
