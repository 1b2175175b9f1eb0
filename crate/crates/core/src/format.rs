//! Plain-text file formats.
//!
//! All formats are line based; blank lines and lines starting with `#` are
//! comments, except for the `# key=value` headers recognized below.
//!
//! - source spec: `id probability` per line;
//! - codebook: `id bits` per line, optionally preceded by
//!   `# mean_len=` / `# second_moment=` headers;
//! - scheme: a codebook with a `# scheme=<kind>` header, a `# p_null=`
//!   header where applicable and a `NULL bits` line for the null codeword;
//! - arrival script: CSV with header `slot,symbol`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::coding::{Codebook, Codeword};
use crate::error::{Error, Result};
use crate::schemes::{SchemeKind, SchemeSpec};
use crate::source_model::{SourcePmf, NULL_SYMBOL};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Data lines as `(1-based line number, first field, second field)`.
type Rows<'a> = Vec<(usize, &'a str, &'a str)>;

/// `# key=value` headers as `key -> (line number, value)`.
type Headers = HashMap<String, (usize, String)>;

/// Non-comment lines and the `# key=value` headers.
fn records(text: &str) -> Result<(Rows<'_>, Headers)> {
    let mut rows = Vec::new();
    let mut headers = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let n = i + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.trim().split_once('=') {
                headers.insert(k.trim().to_string(), (n, v.trim().to_string()));
            }
            continue;
        }
        let mut fields = line.split_whitespace();
        match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => rows.push((n, a, b)),
            _ => return Err(parse_err(n, format!("expected two fields, got {line:?}"))),
        }
    }
    Ok((rows, headers))
}

/// Parses a source spec.
pub fn parse_source(text: &str) -> Result<SourcePmf> {
    let (rows, _) = records(text)?;
    let mut symbols = Vec::with_capacity(rows.len());
    let mut probs = Vec::with_capacity(rows.len());
    for (n, id, p) in rows {
        let p: f64 = p.parse().map_err(|_| parse_err(n, format!("bad probability {p:?}")))?;
        symbols.push(id.to_string());
        probs.push(p);
    }
    SourcePmf::new(symbols, probs)
}

/// Writes a source spec; [`parse_source`] reads it back exactly.
pub fn write_source(pmf: &SourcePmf) -> String {
    pmf.to_string()
}

/// `(symbol, codeword)` lines of a codebook file, without any validation
/// beyond syntax, plus its headers.
#[allow(clippy::type_complexity)]
pub fn parse_codebook_entries(text: &str) -> Result<(Vec<(String, Codeword)>, HashMap<String, String>)> {
    let (rows, headers) = records(text)?;
    let entries = rows
        .into_iter()
        .map(|(n, id, bits)| Ok((id.to_string(), bits.parse().map_err(|e: String| parse_err(n, e))?)))
        .collect::<Result<Vec<_>>>()?;
    Ok((entries, headers.into_iter().map(|(k, (_, v))| (k, v)).collect()))
}

/// Parses a codebook (`NULL` lines are not allowed).
pub fn parse_codebook(text: &str) -> Result<Codebook> {
    let (entries, _) = parse_codebook_entries(text)?;
    let (symbols, words) = entries.into_iter().unzip();
    Codebook::new(symbols, words)
}

/// Writes a codebook; with a PMF, prefixes the moment headers.
pub fn write_codebook(book: &Codebook, pmf: Option<&SourcePmf>) -> Result<String> {
    let mut s = String::new();
    if let Some(pmf) = pmf {
        let m = book.moments(pmf)?;
        writeln!(s, "# mean_len={}", m.mean_len).unwrap();
        writeln!(s, "# second_moment={}", m.second_moment).unwrap();
    }
    for (id, w) in book.symbols().iter().zip(book.codewords()) {
        writeln!(s, "{id} {w}").unwrap();
    }
    Ok(s)
}

/// Writes a scheme file.
pub fn write_scheme(scheme: &SchemeSpec, pmf: Option<&SourcePmf>) -> Result<String> {
    let mut s = format!("# scheme={}\n", scheme.kind());
    if let Some(p) = scheme.null_prob_used() {
        writeln!(s, "# p_null={p}").unwrap();
    }
    s.push_str(&write_codebook(scheme.message_codebook(), pmf)?);
    if let Some(null) = scheme.null_codeword() {
        writeln!(s, "{NULL_SYMBOL} {null}").unwrap();
    }
    Ok(s)
}

/// Parses a scheme file written by [`write_scheme`].
pub fn parse_scheme(text: &str) -> Result<SchemeSpec> {
    let (rows, headers) = records(text)?;
    let (kind_line, kind) =
        headers.get("scheme").ok_or_else(|| parse_err(1, "missing `# scheme=` header"))?;
    let kind: SchemeKind = kind.parse().map_err(|e: String| parse_err(*kind_line, e))?;
    let p_null = match headers.get("p_null") {
        Some((n, v)) => Some(v.parse::<f64>().map_err(|_| parse_err(*n, format!("bad p_null {v:?}")))?),
        None => None,
    };
    let mut symbols = Vec::new();
    let mut words = Vec::new();
    let mut null = None;
    for (n, id, bits) in rows {
        let w: Codeword = bits.parse().map_err(|e: String| parse_err(n, e))?;
        if id == NULL_SYMBOL {
            if null.replace(w).is_some() {
                return Err(parse_err(n, "duplicate NULL codeword"));
            }
        } else {
            symbols.push(id.to_string());
            words.push(w);
        }
    }
    SchemeSpec::new(kind, Codebook::new(symbols, words)?, null, p_null)
}

/// Parses an arrival script (`slot,symbol` CSV) against `pmf`'s alphabet.
pub fn parse_script(text: &str, pmf: &SourcePmf) -> Result<Vec<(u64, usize)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || (n == 1 && line == "slot,symbol") {
            continue;
        }
        let (slot, sym) = line
            .split_once(',')
            .ok_or_else(|| parse_err(n, format!("expected `slot,symbol`, got {line:?}")))?;
        let slot: u64 = slot.trim().parse().map_err(|_| parse_err(n, format!("bad slot {slot:?}")))?;
        let sym = pmf
            .index_of(sym.trim())
            .ok_or_else(|| parse_err(n, format!("unknown symbol {:?}", sym.trim())))?;
        if out.last().is_some_and(|&(prev, _)| prev >= slot) {
            return Err(parse_err(n, "slots must be strictly increasing"));
        }
        out.push((slot, sym));
    }
    Ok(out)
}

/// Writes an arrival script.
pub fn write_script(script: &[(u64, usize)], pmf: &SourcePmf) -> String {
    let mut s = String::from("slot,symbol\n");
    for &(t, i) in script {
        writeln!(s, "{t},{}", pmf.symbols()[i]).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{build_adaptive, build_predictive};
    use crate::source_model::{uniform_pmf, ArrivalSpec};

    #[test]
    fn source_with_comments() {
        let pmf = parse_source("# a source\nA 0.5\n\nB 0.25 \n C 0.25\n").unwrap();
        assert_eq!(pmf.symbols(), ["A", "B", "C"]);
        assert!(matches!(parse_source("A 0.5 x\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_source("A 0.5\nB zz\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_source("A 0.5\nB 0.4\n"), Err(Error::InvalidPmf(_))));
    }

    #[test]
    fn scheme_roundtrip() {
        let pmf = uniform_pmf(4).unwrap();
        let p = build_predictive(&pmf, ArrivalSpec::new(0.25).unwrap(), 3).unwrap();
        for s in [p.clone(), build_adaptive(&p).unwrap()] {
            let text = write_scheme(&s, Some(&pmf)).unwrap();
            assert!(text.contains("# mean_len="));
            assert_eq!(parse_scheme(&text).unwrap(), s);
        }
        assert!(parse_scheme("A 0\nB 1\n").is_err());
    }

    #[test]
    fn script_roundtrip() {
        let pmf = parse_source("A 0.5\nB 0.5\n").unwrap();
        let script = vec![(0, 1), (4, 0)];
        assert_eq!(parse_script(&write_script(&script, &pmf), &pmf).unwrap(), script);
        assert!(parse_script("slot,symbol\n3,A\n3,B\n", &pmf).is_err());
        assert!(parse_script("1,Z\n", &pmf).is_err());
    }
}
