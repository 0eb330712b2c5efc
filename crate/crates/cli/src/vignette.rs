//! Scripted decoding scenarios with expected numbers.

use std::fmt::Display;
use std::io::{self, Write};

use anyhow::Result;
use serde::Serialize;

use cqhc::oracle::{steane_weight10_alternative, steane_weight10_error, verify_split_logical};
use cqhc::{decode, ConcatCode, DecodeTrace, DecoderKind, PerfectSyndromes};

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub ok: bool,
}

fn check<T: PartialEq + Display>(name: &str, expected: T, actual: T) -> Check {
    Check {
        name: name.to_string(),
        expected: expected.to_string(),
        actual: actual.to_string(),
        ok: expected == actual,
    }
}

#[derive(Debug, Serialize)]
pub struct Vignette {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl Vignette {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }
}

fn code(profile: &str) -> Result<ConcatCode> {
    Ok(ConcatCode::new(profile.parse()?)?)
}

/// `{(1,1), (1,2), (2,1), (2,2)}` on 15x15.
pub fn two_block() -> Result<Vignette> {
    let code = code("15x15")?;
    let error = code.error_from_addresses(&[vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]])?;
    let source = PerfectSyndromes::new(&code, &error)?;
    let local = decode(
        DecoderKind::Local,
        &code,
        &source,
        &mut DecodeTrace::default(),
    )?;
    let mut trace = DecodeTrace::default();
    let bidir = decode(DecoderKind::Bidir, &code, &source, &mut trace)?;
    Ok(Vignette {
        checks: vec![
            check("error weight", 4, error.weight()),
            check("local recovery weight", 5, local.recovery().weight()),
            check(
                "local logical failure",
                true,
                code.is_failure(&error, &local),
            ),
            check("bidir recovery weight", 4, bidir.recovery().weight()),
            check(
                "bidir recovery equals error",
                true,
                bidir.recovery() == error,
            ),
            check(
                "bidir logical failure",
                false,
                code.is_failure(&error, &bidir),
            ),
            check(
                "bidir accepted transfers",
                1,
                trace.transfers.iter().filter(|t| t.accepted).count(),
            ),
        ],
        notes: vec![],
    })
}

/// Two weight-6 halves of a weight-12 logical on 15x15.
pub fn split_logical() -> Result<Vignette> {
    let code = code("15x15")?;
    let r = verify_split_logical(&code)?;
    Ok(Vignette {
        checks: vec![
            check("weight of E1", 6, r.e1_weight),
            check("weight of E2", 6, r.e2_weight),
            check("level-1 syndromes equal", true, r.level1_syndromes_equal),
            check("level-2 syndromes equal", true, r.level2_syndromes_equal),
            check("weight of E1 + E2", 12, r.sum_weight),
            check("E1 + E2 has trivial syndrome", true, r.sum_is_logical),
            check("E1 + E2 is a nontrivial logical", true, r.sum_class_nonzero),
            check("bidir recovery of E1 has weight >= 6", true, r.decoder_weight_e1 >= 6),
        ],
        notes: vec![format!(
            "bidir recovery of E1 has weight {}; the absence of any recovery lighter than 6 is not verified \
             (the stabilizer group is too large to enumerate)",
            r.decoder_weight_e1
        )],
    })
}

/// Weight-10 error on 7x7x7 that the bidirectional decoder miscorrects.
pub fn weight10() -> Result<Vignette> {
    let code = code("7x7x7")?;
    let error = steane_weight10_error(&code)?;
    let source = PerfectSyndromes::new(&code, &error)?;
    let mut trace = DecodeTrace::default();
    let session = decode(DecoderKind::Bidir, &code, &source, &mut trace)?;
    let mut checks = vec![
        check("error weight", 10, error.weight()),
        check(
            "bidir logical failure",
            true,
            code.is_failure(&error, &session),
        ),
        check("bidir recovery weight", 17, session.recovery().weight()),
    ];
    match trace.transfers.iter().find(|t| t.level == 3) {
        Some(t) => {
            checks.push(check(
                "first top-level transfer",
                "(1, 2, 3)".to_string(),
                format!("{:?}", t.triple)
                    .replace('[', "(")
                    .replace(']', ")"),
            ));
            checks.push(check("baseline cost", 17, t.before.iter().sum::<usize>()));
            checks.push(check(
                "cost after transfer",
                18,
                t.after.iter().sum::<usize>(),
            ));
            checks.push(check("transfer accepted", false, t.accepted));
        }
        None => checks.push(check("top-level transfer candidates", "some", "none")),
    }
    checks.push(check(
        "top-level transfers accepted",
        0,
        trace
            .transfers
            .iter()
            .filter(|t| t.level == 3 && t.accepted)
            .count(),
    ));
    let (_, alt) = steane_weight10_alternative(&code)?;
    checks.push(check(
        "alternative cost per block",
        "5 + 5".to_string(),
        format!("{} + {}", alt.block_costs[0], alt.block_costs[1]),
    ));
    checks.push(check("alternative total weight", 10, alt.total_weight));
    checks.push(check(
        "alternative matches level-1 syndromes",
        true,
        alt.level1_syndromes_match,
    ));
    checks.push(check("alternative corrects the error", true, alt.corrects));
    Ok(Vignette {
        checks,
        notes: vec![],
    })
}

pub fn print(out: &mut impl Write, v: &Vignette) -> io::Result<()> {
    for c in &v.checks {
        writeln!(
            out,
            "{} {}: expected {}, actual {}",
            if c.ok { "ok  " } else { "FAIL" },
            c.name,
            c.expected,
            c.actual
        )?;
    }
    for n in &v.notes {
        writeln!(out, "note {n}")?;
    }
    Ok(())
}

/// Prints the checks; returns whether all of them passed.
pub fn report(v: &Vignette, json: bool) -> Result<bool> {
    let mut out = io::stdout().lock();
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(v)?)?;
    } else {
        print(&mut out, v)?;
    }
    Ok(v.passed())
}
