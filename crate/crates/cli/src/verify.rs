//! The audit battery behind `cqhc verify`.

use std::io::{self, Write};

use anyhow::Result;

use cqhc::oracle::{coset_min_agreement, lookup_agreement, representative_audit};
use cqhc::HammingCode;

use crate::vignette;

fn line(out: &mut impl Write, ok: bool, what: &str) -> io::Result<bool> {
    writeln!(out, "{} {what}", if ok { "PASS" } else { "FAIL" })?;
    Ok(ok)
}

pub fn run() -> Result<bool> {
    let mut out = io::stdout().lock();
    let mut all = true;
    for r in 3..=5 {
        let code = HammingCode::new(r)?;
        let a = lookup_agreement(&code)?;
        all &= line(
            &mut out,
            a.passed(),
            &format!(
                "lookup decode vs exhaustive MWE, r = {r}: {} syndromes, {} mismatches",
                a.checked, a.mismatches
            ),
        )?;
    }
    for r in 3..=4 {
        let code = HammingCode::new(r)?;
        let a = coset_min_agreement(&code, 1000, 0x5eed + r as u64)?;
        all &= line(
            &mut out,
            a.passed(),
            &format!(
                "coset minimum vs exhaustive search, r = {r}: {} cases, {} mismatches",
                a.checked, a.mismatches
            ),
        )?;
    }
    for r in 3..=5 {
        let audit = representative_audit(&HammingCode::new(r)?);
        // Steane logicals share cosets with other weight-3 vectors; larger codes do not.
        let expect_unique = r > 3;
        all &= line(
            &mut out,
            audit.unique == expect_unique,
            &format!(
                "weight-3 logical representatives, r = {r}: {} triples, min shifted weight {}, unique = {}",
                audit.triples, audit.min_shifted_weight, audit.unique
            ),
        )?;
    }
    for (name, v) in [
        ("fig1", vignette::two_block()?),
        ("split12", vignette::split_logical()?),
        ("appendixA", vignette::weight10()?),
    ] {
        all &= line(&mut out, v.passed(), &format!("vignette {name}"))?;
        for c in v.checks.iter().filter(|c| !c.ok) {
            writeln!(
                out,
                "     {}: expected {}, actual {}",
                c.name, c.expected, c.actual
            )?;
        }
        for n in &v.notes {
            writeln!(out, "     note {n}")?;
        }
    }
    writeln!(
        out,
        "{}",
        if all {
            "all audits passed"
        } else {
            "some audits FAILED"
        }
    )?;
    Ok(all)
}
