//! Plain-text code files.
//!
//! ```text
//! CODE v1 field=0x7/2 n=4 k=2
//! 1 0 2 3
//! 0 1 3 3
//! ```
//!
//! One generator row per line, one hex symbol per coordinate (raw field
//! element, polynomial basis). Binary codes use `field=0x2/1`. The
//! self-dual basis is recomputed from the modulus on load.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use crate::binlin::{BitMatrix, FieldMatrix};
use crate::codes::{BinaryCode, OuterCode};
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElement};

#[derive(Clone, Debug, PartialEq)]
pub struct CodeFile {
    pub ctx: Arc<FieldCtx>,
    pub n: usize,
    pub rows: Vec<Vec<FieldElement>>,
}

impl CodeFile {
    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn from_outer(code: &OuterCode) -> Self {
        let gen = code.gen();
        CodeFile {
            ctx: code.ctx().clone(),
            n: code.n(),
            rows: (0..gen.num_rows()).map(|i| gen.row(i).to_vec()).collect(),
        }
    }

    pub fn from_binary(code: &BinaryCode) -> Self {
        let gen = code.gen();
        CodeFile {
            ctx: Arc::new(FieldCtx::new(1).expect("GF(2)")),
            n: code.n(),
            rows: gen
                .rows()
                .iter()
                .map(|r| {
                    r.to_bits()
                        .into_iter()
                        .map(|b| FieldElement::from_raw(b as u32))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_outer(&self) -> Result<OuterCode> {
        OuterCode::new(FieldMatrix::from_rows(self.ctx.clone(), &self.rows)?)
    }

    pub fn to_binary(&self) -> Result<BinaryCode> {
        if self.ctx.k0() != 1 {
            return Err(Error::FieldMismatch(format!(
                "binary code expected, file is over GF(2^{})",
                self.ctx.k0()
            )));
        }
        let bits: Vec<Vec<u8>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|e| e.value() as u8).collect())
            .collect();
        let gen = if bits.is_empty() {
            BitMatrix::zeros(0, self.n)
        } else {
            BitMatrix::from_bit_rows(&bits)?
        };
        BinaryCode::new(gen)
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "CODE v1 field={:#x}/{} n={} k={}\n",
            self.ctx.modulus(),
            self.ctx.k0(),
            self.n,
            self.k()
        );
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|e| format!("{:x}", e.value())).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines
            .next()
            .ok_or_else(|| perr(1, "missing header".into()))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("CODE") || parts.next() != Some("v1") {
            return Err(perr(hl, "expected `CODE v1`".into()));
        }
        let (mut field, mut n, mut k) = (None, None, None);
        for kv in parts {
            let (key, val) = kv
                .split_once('=')
                .ok_or_else(|| perr(hl, format!("malformed token `{kv}`")))?;
            match key {
                "field" => {
                    let (m, k0) = val
                        .split_once('/')
                        .ok_or_else(|| perr(hl, "field must be <modulus>/<k0>".into()))?;
                    let m = u32::from_str_radix(m.trim_start_matches("0x"), 16)
                        .map_err(|e| perr(hl, format!("modulus: {e}")))?;
                    let k0: u32 = k0.parse().map_err(|e| perr(hl, format!("k0: {e}")))?;
                    field = Some((m, k0));
                }
                "n" => {
                    n = Some(
                        val.parse::<usize>()
                            .map_err(|e| perr(hl, format!("n: {e}")))?,
                    )
                }
                "k" => {
                    k = Some(
                        val.parse::<usize>()
                            .map_err(|e| perr(hl, format!("k: {e}")))?,
                    )
                }
                _ => return Err(perr(hl, format!("unknown key `{key}`"))),
            }
        }
        let (m, k0) = field.ok_or_else(|| perr(hl, "missing field=".into()))?;
        let n = n.ok_or_else(|| perr(hl, "missing n=".into()))?;
        let k = k.ok_or_else(|| perr(hl, "missing k=".into()))?;
        let ctx = Arc::new(FieldCtx::with_modulus(k0, m)?);
        let mut rows = Vec::with_capacity(k);
        for (ln, line) in lines {
            let row = line
                .split_whitespace()
                .map(|tok| {
                    let v = u32::from_str_radix(tok, 16)
                        .map_err(|e| perr(ln, format!("symbol `{tok}`: {e}")))?;
                    ctx.element(v).map_err(|e| perr(ln, e.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != n {
                return Err(perr(
                    ln,
                    format!("row has {} symbols, expected {n}", row.len()),
                ));
            }
            rows.push(row);
        }
        if rows.len() != k {
            return Err(perr(
                hl,
                format!("header says k={k}, found {} rows", rows.len()),
            ));
        }
        Ok(CodeFile { ctx, n, rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, &self.render())
    }
}

/// Writes `contents`, creating parent directories.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, contents).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;

    #[test]
    fn outer_round_trip() {
        let ctx = Arc::new(make_field(3).unwrap());
        let code = OuterCode::random(ctx, 6, 3, 4).unwrap();
        let text = CodeFile::from_outer(&code).render();
        assert!(text.starts_with("CODE v1 field=0xb/3 n=6 k=3\n"));
        let back = CodeFile::parse(&text).unwrap().to_outer().unwrap();
        assert_eq!(back, code);
    }

    #[test]
    fn binary_round_trip() {
        let code = BinaryCode::random(9, 4, 2).unwrap();
        let text = CodeFile::from_binary(&code).render();
        assert!(text.starts_with("CODE v1 field=0x2/1 n=9 k=4\n"));
        assert_eq!(CodeFile::parse(&text).unwrap().to_binary().unwrap(), code);
    }

    #[test]
    fn parse_errors_carry_lines() {
        let bad = [
            ("COD v1 field=0x7/2 n=2 k=1\n1 1\n", 1),
            ("CODE v1 field=0x7/2 n=2 k=1\n1 4\n", 2),
            ("CODE v1 field=0x7/2 n=2 k=1\n1 1 1\n", 2),
            ("CODE v1 field=0x7/2 n=2 k=2\n1 1\n", 1),
            ("CODE v1 field=0x5/2 n=2 k=1\n1 1\n", 0),
            ("CODE v1 field=0x7/2 n=2 k=1 extra=3\n1 1\n", 1),
        ];
        for (text, line) in bad {
            match CodeFile::parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                Err(Error::NotIrreducible { .. }) => assert_eq!(line, 0),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn binary_requires_gf2() {
        let ctx = Arc::new(make_field(2).unwrap());
        let f = CodeFile::from_outer(&OuterCode::full_space(ctx, 2));
        assert!(f.to_binary().is_err());
    }

    #[test]
    fn save_and_load() {
        let dir = std::env::temp_dir().join(format!("concatgv-io-{}", std::process::id()));
        let path = dir.join("nested/code.txt");
        let f = CodeFile::from_binary(&BinaryCode::repetition(5));
        f.save(&path).unwrap();
        assert_eq!(CodeFile::load(&path).unwrap(), f);
        std::fs::remove_dir_all(&dir).unwrap();
        assert!(matches!(CodeFile::load(&path), Err(Error::Io { .. })));
    }
}
