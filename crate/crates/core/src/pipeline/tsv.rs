//! Headerless tab-separated files exchanged between pipeline stages.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::align::{ScoredPair, SentencePair};
use crate::error::{Error, Result};
use crate::search::{CandidatePair, MarginRecord};

fn partial_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".partial");
    path.with_file_name(name)
}

/// Produce `path` through a `.partial` sibling that is renamed into place
/// only when `write` succeeds; on failure the partial file is left behind.
pub fn write_via_partial<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&Path) -> Result<()>,
{
    let partial = partial_path(path);
    write(&partial)?;
    fs::rename(&partial, path).map_err(|e| Error::io(path, e))
}

fn write_lines<I, S>(path: &Path, lines: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    write_via_partial(path, |p| {
        let file = File::create(p).map_err(|e| Error::io(p, e))?;
        let mut out = BufWriter::new(file);
        for line in lines {
            writeln!(out, "{}", line.as_ref()).map_err(|e| Error::io(p, e))?;
        }
        out.flush().map_err(|e| Error::io(p, e))
    })
}

/// Rows of a TSV file with at least `min_cols` fields (blank lines skipped),
/// paired with their 1-based line numbers.
pub fn read_rows(path: &Path, min_cols: usize) -> Result<Vec<(usize, Vec<String>)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split('\t').map(str::to_string).collect();
        if fields.len() < min_cols {
            return Err(Error::parse(
                path,
                idx + 1,
                format!(
                    "expected at least {min_cols} tab-separated fields, found {}",
                    fields.len()
                ),
            ));
        }
        rows.push((idx + 1, fields));
    }
    Ok(rows)
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, value: &str, what: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::parse(path, line, format!("invalid {what} {value:?}")))
}

/// Replace runs of tabs and line breaks with a single space.
pub fn tab_safe(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_run = false;
    for c in text.chars() {
        if matches!(c, '\t' | '\n' | '\r') {
            if !in_run {
                out.push(' ');
            }
            in_run = true;
        } else {
            out.push(c);
            in_run = false;
        }
    }
    out
}

pub fn write_pairs(path: &Path, pairs: &[(String, String)]) -> Result<()> {
    write_lines(path, pairs.iter().map(|(s, t)| format!("{s}\t{t}")))
}

/// `src_id, tgt_id` pairs; extra columns are ignored.
pub fn read_pairs(path: &Path) -> Result<Vec<(String, String)>> {
    Ok(read_rows(path, 2)?
        .into_iter()
        .map(|(_, mut f)| {
            f.truncate(2);
            let t = f.pop().unwrap();
            let s = f.pop().unwrap();
            (s, t)
        })
        .collect())
}

pub fn write_candidates(path: &Path, cands: &[CandidatePair]) -> Result<()> {
    write_lines(
        path,
        cands
            .iter()
            .map(|c| format!("{}\t{}\t{}\t{}", c.src_id, c.tgt_id, c.rank, c.cosine)),
    )
}

pub fn read_candidates(path: &Path) -> Result<Vec<CandidatePair>> {
    read_rows(path, 4)?
        .into_iter()
        .map(|(line, f)| {
            Ok(CandidatePair {
                rank: field(path, line, &f[2], "rank")?,
                cosine: field(path, line, &f[3], "cosine")?,
                src_id: f[0].clone(),
                tgt_id: f[1].clone(),
            })
        })
        .collect()
}

pub fn write_scored(path: &Path, scored: &[ScoredPair]) -> Result<()> {
    write_lines(
        path,
        scored
            .iter()
            .map(|p| format!("{}\t{}\t{}\t{}", p.src_id, p.tgt_id, p.cosine, p.eq2_score)),
    )
}

pub fn read_scored(path: &Path) -> Result<Vec<ScoredPair>> {
    read_rows(path, 4)?
        .into_iter()
        .map(|(line, f)| {
            Ok(ScoredPair {
                cosine: field(path, line, &f[2], "cosine")?,
                eq2_score: field(path, line, &f[3], "score")?,
                src_id: f[0].clone(),
                tgt_id: f[1].clone(),
            })
        })
        .collect()
}

pub fn write_matches(path: &Path, matches: &[ScoredPair]) -> Result<()> {
    write_lines(
        path,
        matches
            .iter()
            .map(|p| format!("{}\t{}\t{}", p.src_id, p.tgt_id, p.eq2_score)),
    )
}

/// Matches file rows; the stage-1 cosine is not stored there and reads as NaN.
pub fn read_matches(path: &Path) -> Result<Vec<ScoredPair>> {
    read_rows(path, 3)?
        .into_iter()
        .map(|(line, f)| {
            Ok(ScoredPair {
                cosine: f64::NAN,
                eq2_score: field(path, line, &f[2], "score")?,
                src_id: f[0].clone(),
                tgt_id: f[1].clone(),
            })
        })
        .collect()
}

pub fn write_sentence_pairs(
    path: &Path,
    pairs: &[SentencePair],
    text: impl Fn(&str, usize) -> String,
) -> Result<()> {
    write_lines(
        path,
        pairs.iter().map(|p| {
            format!(
                "{}\t{}\t{}",
                p.score,
                tab_safe(&text(&p.src_id, p.src_idx)),
                tab_safe(&text(&p.tgt_id, p.tgt_idx))
            )
        }),
    )
}

pub fn write_margin(path: &Path, records: &[MarginRecord]) -> Result<()> {
    write_lines(
        path,
        records.iter().map(|r| {
            format!(
                "{}\t{}\t{}\t{}\t{}",
                r.src_id, r.src_sent_idx, r.tgt_id, r.tgt_sent_idx, r.margin
            )
        }),
    )
}
