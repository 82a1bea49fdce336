//! `study` subcommands: convergence tables comparing brute-force moment
//! sums against their closed main terms over a list of primes. Studies
//! report, they never assert; a ratio far from 1 is a finding, not a bug.

use std::io::{self, Write};

use estermann_core::moments::{convergence_study, MomentReport, MomentsError, StudyKind};
use serde_json::{json, Value};

use crate::config::OutputFormat;
use crate::render::{complex_json, emit_doc, float_cell, opt_float_cell};

/// One requested variant of a study: a fixed `StudyKind` plus the label
/// columns that distinguish it in the output.
pub struct Lane {
    pub sign: &'static str,
    pub form: &'static str,
    pub kind: StudyKind,
}

impl Lane {
    pub fn plain(kind: StudyKind) -> Self {
        Lane { sign: "", form: "", kind }
    }

    pub fn form(form: &'static str, kind: StudyKind) -> Self {
        Lane { sign: "", form, kind }
    }

    pub fn sign(sign: &'static str, kind: StudyKind) -> Self {
        Lane { sign, form: "", kind }
    }
}

fn csv_io(e: csv::Error) -> io::Error {
    io::Error::new(io::ErrorKind::Other, e)
}

type LaneResults = Vec<(u64, Result<MomentReport, MomentsError>)>;

/// Run every lane over the primes and emit one row per (prime, lane) pair,
/// prime-major. Exit code 0 unless every prime failed in every lane.
pub fn run(
    out: &mut dyn Write,
    study: &str,
    primes: &[u64],
    lanes: &[Lane],
    format: OutputFormat,
    timings: bool,
    config_hash: &str,
) -> io::Result<i32> {
    let results: Vec<LaneResults> =
        lanes.iter().map(|lane| convergence_study(primes, lane.kind)).collect();

    let mut prime_ok = vec![false; primes.len()];
    let mut rows: Vec<(&Lane, u64, &MomentReport)> = Vec::new();
    for (pi, &q) in primes.iter().enumerate() {
        for (lane, lane_results) in lanes.iter().zip(&results) {
            match &lane_results[pi].1 {
                Ok(report) => {
                    prime_ok[pi] = true;
                    rows.push((lane, q, report));
                }
                Err(e) => {
                    let tags = [lane.sign, lane.form].iter().fold(
                        String::new(),
                        |mut acc, t| {
                            if !t.is_empty() {
                                acc.push(' ');
                                acc.push_str(t);
                            }
                            acc
                        },
                    );
                    eprintln!("study {study}: q={q}{tags}: {e}");
                }
            }
        }
    }

    match format {
        OutputFormat::Csv => write_csv(out, study, &rows, timings)?,
        OutputFormat::Json => write_json(out, study, &rows, timings, config_hash)?,
    }

    if !primes.is_empty() && prime_ok.iter().all(|ok| !ok) {
        eprintln!("study {study}: every prime failed");
        return Ok(1);
    }
    Ok(0)
}

fn write_csv(
    out: &mut dyn Write,
    study: &str,
    rows: &[(&Lane, u64, &MomentReport)],
    timings: bool,
) -> io::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec![
        "study", "q", "k", "r", "sign", "form", "brute_re", "brute_im", "main_re", "main_im",
        "ratio_re", "ratio_im", "residual", "truncation_n", "tail_bound",
    ];
    if timings {
        header.push("elapsed");
    }
    writer.write_record(&header).map_err(csv_io)?;
    for (lane, q, report) in rows {
        let mut record = vec![
            study.to_string(),
            q.to_string(),
            report.k.to_string(),
            report.r.map(|r| r.to_string()).unwrap_or_default(),
            lane.sign.to_string(),
            lane.form.to_string(),
            float_cell(report.brute_value.re),
            float_cell(report.brute_value.im),
            float_cell(report.main_term.re),
            float_cell(report.main_term.im),
            opt_float_cell(report.ratio.map(|z| z.re)),
            opt_float_cell(report.ratio.map(|z| z.im)),
            opt_float_cell(report.residual),
            report.truncation_n.to_string(),
            float_cell(report.tail_bound),
        ];
        if timings {
            record.push(float_cell(report.elapsed));
        }
        writer.write_record(&record).map_err(csv_io)?;
    }
    writer.flush()?;
    Ok(())
}

fn write_json(
    out: &mut dyn Write,
    study: &str,
    rows: &[(&Lane, u64, &MomentReport)],
    timings: bool,
    config_hash: &str,
) -> io::Result<()> {
    let tagged: Vec<Value> = rows
        .iter()
        .map(|(lane, q, report)| {
            let label = |t: &str| if t.is_empty() { Value::Null } else { json!(t) };
            let mut row = json!({
                "study": study,
                "q": q,
                "k": report.k,
                "r": report.r,
                "sign": label(lane.sign),
                "form": label(lane.form),
                "brute": complex_json(report.brute_value),
                "main": complex_json(report.main_term),
                "ratio": report.ratio.map(complex_json).unwrap_or(Value::Null),
                "residual": report.residual,
                "truncation_n": report.truncation_n,
                "tail_bound": report.tail_bound,
            });
            if timings {
                row.as_object_mut()
                    .expect("object")
                    .insert("elapsed".into(), json!(report.elapsed));
            }
            row
        })
        .collect();
    emit_doc(out, config_hash, json!({ "study": study, "rows": tagged }))?;
    out.flush()
}
