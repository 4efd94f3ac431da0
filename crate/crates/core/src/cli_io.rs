//! Line-delimited JSON records and the command drivers behind the binary.
//!
//! Each input line is one object holding `probs` or `logits` and an optional
//! `id`. Records are processed independently; a failed record turns into an
//! error object and processing continues.

use std::io::{self, BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::decoder::{cost_curve, decode, logits_to_probs, sample_n, top_k_renormalize, DecodeConfig};
use crate::error::{Error, Result};
use crate::simplex::ProbVector;

/// Lines handed to the worker pool at a time.
const CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct InputRecord {
    #[serde(default)]
    pub id: Option<Value>,
    #[serde(default)]
    pub probs: Option<Vec<f64>>,
    #[serde(default)]
    pub logits: Option<Vec<f64>>,
}

impl InputRecord {
    pub fn parse(line: &str) -> Result<Self> {
        serde_json::from_str(line).map_err(|e| Error::Input(format!("malformed record: {e}")))
    }

    /// The record as a probability vector; logits go through a softmax at
    /// `temperature`.
    pub fn distribution(&self, temperature: f64) -> Result<ProbVector> {
        match (&self.probs, &self.logits) {
            (Some(p), None) => ProbVector::new(p.clone()),
            (None, Some(l)) => logits_to_probs(l, temperature),
            (Some(_), Some(_)) => Err(Error::Input("record has both probs and logits".into())),
            (None, None) => Err(Error::Input("record has neither probs nor logits".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<Value>,
    pub k_star: usize,
    pub support: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support_probs: Option<Vec<f64>>,
    pub nu: f64,
    pub cost: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost_curve: Option<Vec<(usize, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenormRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<Value>,
    pub k: usize,
    pub support: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support_probs: Option<Vec<f64>>,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<Value>,
    pub samples: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub id: Option<Value>,
    pub error: ErrorBody,
}

impl ErrorRecord {
    pub fn new(id: Option<Value>, e: &Error) -> Self {
        Self {
            id,
            error: ErrorBody {
                kind: e.name().to_string(),
                message: e.to_string(),
            },
        }
    }
}

/// Output options shared by the record commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub config: DecodeConfig,
    /// Emit `support_probs` instead of the dense `probs`.
    pub compact: bool,
    pub emit_cost_curve: bool,
}

impl Options {
    pub fn new(config: DecodeConfig) -> Self {
        Self {
            config,
            compact: false,
            emit_cost_curve: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Command {
    Decode,
    Renorm { k: usize },
    /// Inclusive `k` range, `None` for `1..=V`.
    CostCurve { range: Option<(usize, usize)> },
    Sample { seed: u64, n: usize },
}

/// Whether every record succeeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    RecordErrors,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::RecordErrors => 2,
        }
    }
}

fn dense_or_compact(compact: bool, support: &[usize], dense: Vec<f64>) -> (Option<Vec<f64>>, Option<Vec<f64>>) {
    if compact {
        (None, Some(support.iter().map(|&i| dense[i]).collect()))
    } else {
        (Some(dense), None)
    }
}

pub fn decode_record(rec: &InputRecord, opts: &Options) -> Result<OutputRecord> {
    let p = rec.distribution(opts.config.temperature)?;
    let r = decode(&p, &opts.config)?;
    let (probs, support_probs) = dense_or_compact(opts.compact, &r.support, r.sparse_probs);
    Ok(OutputRecord {
        id: rec.id.clone(),
        k_star: r.k_star,
        support: r.support,
        probs,
        support_probs,
        nu: r.nu,
        cost: r.cost,
        cost_curve: if opts.emit_cost_curve { r.cost_curve } else { None },
    })
}

pub fn renorm_record(rec: &InputRecord, k: usize, opts: &Options) -> Result<RenormRecord> {
    let p = rec.distribution(opts.config.temperature)?;
    let cfg = &opts.config;
    let t = top_k_renormalize(&p, k, cfg.mode, &cfg.generator, &cfg.tol)?;
    let (probs, support_probs) = dense_or_compact(opts.compact, &t.support, t.sparse_probs);
    Ok(RenormRecord {
        id: rec.id.clone(),
        k,
        support: t.support,
        probs,
        support_probs,
        nu: t.nu,
    })
}

/// Draws for record number `index`; each record gets its own stream derived
/// from `seed`.
pub fn sample_record(rec: &InputRecord, seed: u64, n: usize, index: usize, opts: &Options) -> Result<SampleRecord> {
    let p = rec.distribution(opts.config.temperature)?;
    let r = decode(&p, &opts.config)?;
    Ok(SampleRecord {
        id: rec.id.clone(),
        samples: sample_n(&r, seed.wrapping_add(index as u64), n),
    })
}

fn to_line<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("records serialize")
}

/// Processes one line to its output line; `Err` carries an error record.
fn process_line(line: &str, index: usize, cmd: &Command, opts: &Options) -> std::result::Result<String, String> {
    let rec = InputRecord::parse(line).map_err(|e| to_line(&ErrorRecord::new(None, &e)))?;
    let out = match *cmd {
        Command::Decode => decode_record(&rec, opts).map(|r| to_line(&r)),
        Command::Renorm { k } => renorm_record(&rec, k, opts).map(|r| to_line(&r)),
        Command::Sample { seed, n } => sample_record(&rec, seed, n, index, opts).map(|r| to_line(&r)),
        Command::CostCurve { .. } => unreachable!("cost curves are not line records"),
    };
    out.map_err(|e| to_line(&ErrorRecord::new(rec.id.clone(), &e)))
}

fn flush_chunk<W: Write>(
    chunk: &mut Vec<(usize, String)>,
    cmd: &Command,
    opts: &Options,
    out: &mut W,
    failed: &mut bool,
) -> io::Result<()> {
    let results: Vec<_> = chunk
        .par_iter()
        .map(|(i, line)| process_line(line, *i, cmd, opts))
        .collect();
    for r in results {
        let line = r.unwrap_or_else(|e| {
            *failed = true;
            e
        });
        writeln!(out, "{line}")?;
    }
    chunk.clear();
    Ok(())
}

/// Runs `cmd` over line-delimited input. Blank lines are skipped; output
/// order follows input order.
pub fn run<R: BufRead, W: Write>(cmd: &Command, opts: &Options, input: R, mut output: W) -> io::Result<Outcome> {
    if let Command::CostCurve { range } = *cmd {
        return run_cost_curve(range, opts, input, output);
    }
    let mut failed = false;
    let mut chunk = Vec::with_capacity(CHUNK);
    let mut index = 0;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        chunk.push((index, line));
        index += 1;
        if chunk.len() == CHUNK {
            flush_chunk(&mut chunk, cmd, opts, &mut output, &mut failed)?;
        }
    }
    flush_chunk(&mut chunk, cmd, opts, &mut output, &mut failed)?;
    output.flush()?;
    Ok(if failed { Outcome::RecordErrors } else { Outcome::Success })
}

/// CSV rows `k,cost` for a single record.
pub fn cost_curve_csv(rec: &InputRecord, range: Option<(usize, usize)>, opts: &Options) -> Result<String> {
    let p = rec.distribution(opts.config.temperature)?;
    let (lo, hi) = range.unwrap_or((1, p.len()));
    let curve = cost_curve(&p, &opts.config, lo, hi)?;
    let mut s = String::from("k,cost\n");
    for (k, c) in curve.entries {
        s.push_str(&format!("{k},{c:?}\n"));
    }
    Ok(s)
}

fn run_cost_curve<R: BufRead, W: Write>(
    range: Option<(usize, usize)>,
    opts: &Options,
    input: R,
    mut output: W,
) -> io::Result<Outcome> {
    let mut lines = Vec::new();
    for line in input.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            lines.push(line);
        }
    }
    let result = match lines.as_slice() {
        [line] => InputRecord::parse(line).and_then(|rec| cost_curve_csv(&rec, range, opts)),
        _ => Err(Error::Input(format!("cost-curve expects one record, got {}", lines.len()))),
    };
    match result {
        Ok(csv) => {
            output.write_all(csv.as_bytes())?;
            output.flush()?;
            Ok(Outcome::Success)
        }
        Err(e) => {
            eprintln!("{}: {e}", e.name());
            Ok(Outcome::RecordErrors)
        }
    }
}

/// Parses `a:b` into an inclusive range.
pub fn parse_k_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected a:b, got {s:?}"))?;
    let a: usize = a.trim().parse().map_err(|e| format!("bad range start {a:?}: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("bad range end {b:?}: {e}"))?;
    if a == 0 || a > b {
        return Err(format!("range must satisfy 1 <= a <= b, got {a}:{b}"));
    }
    Ok((a, b))
}

/// Parses `--k-max`: a positive integer or `none`.
pub fn parse_k_max(s: &str) -> std::result::Result<Option<usize>, String> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    match s.parse::<usize>() {
        Ok(0) => Err("k-max must be at least 1".into()),
        Ok(k) => Ok(Some(k)),
        Err(e) => Err(format!("expected an integer or none, got {s:?}: {e}")),
    }
}
