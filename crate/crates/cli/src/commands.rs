use std::fmt::Write as _;
use std::path::Path;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use qdel::codes::{
    build_highrate_partition, find_params_for_rate, highrate_code, rate, vt_code, ClassicalCode,
    HighRateParams,
};
use qdel::partition::{check_conditions, is_homogeneous, search_homogeneous, FamilySet};
use qdel::quantum::{roundtrip_verify_with, CodeInstance, Mode};

use crate::format::{read_family, FamilySetFile, Metadata};
use crate::{CliError, Output, EXIT_OK, EXIT_VALIDATION, SIMULATION_GUARD};

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Writes `VT_n(a)` as a one-set family file and summarizes its size.
pub fn cmd_vt(n: usize, a: i64, out: Option<&Path>) -> Result<Output, CliError> {
    let code = vt_code(n, a)?;
    let mut s = String::new();
    let bound = 2f64.powi(n as i32) / (n as f64 + 1.0);
    writeln!(s, "code\tVT_{n}({a})").unwrap();
    writeln!(s, "length\t{n}").unwrap();
    writeln!(s, "cardinality\t{}", code.len()).unwrap();
    writeln!(s, "rate\t{:.6}", code.rate()).unwrap();
    writeln!(s, "bound\t2^n/(n+1) = {bound:.6}").unwrap();
    writeln!(
        s,
        "meets_bound\t{}",
        if code.len() as f64 >= bound {
            "yes"
        } else {
            "no"
        }
    )
    .unwrap();
    match out {
        Some(path) => {
            let meta = Metadata {
                created_by: Some(format!("qdel vt --n {n} --a {a}")),
                ..Metadata::default()
            };
            let file = FamilySetFile::from_sets(n, &[code.words().clone()], Some(meta));
            write_file(path, &file.to_json())?;
            writeln!(s, "wrote\t{}", path.display()).unwrap();
        }
        None => {
            for w in code.words() {
                writeln!(s, "{w}").unwrap();
            }
        }
    }
    Ok(Output::ok(s))
}

fn params_from_metadata(meta: &Option<Metadata>) -> Result<Option<HighRateParams>, CliError> {
    let Some(m) = meta else { return Ok(None) };
    match (m.bits_per_symbol, m.symbols, m.t.unwrap_or(1)) {
        (Some(e), Some(n), 1) => Ok(Some(HighRateParams::new(e, n)?)),
        _ => Ok(None),
    }
}

/// Checks partition, homogeneity and the three conditions of a family file.
/// Exits 0 iff the three conditions hold.
pub fn cmd_check(path: &Path) -> Result<Output, CliError> {
    let (fam, meta) = read_family(path)?;
    let (code, source): (ClassicalCode, String) = match params_from_metadata(&meta)? {
        Some(p) => (
            highrate_code(&p)?,
            format!("F(S) for E={}, N={}", p.bits_per_symbol(), p.symbols()),
        ),
        None => (fam.union_code(), "union of the sets".into()),
    };
    let homog = is_homogeneous(&fam, &code)?;
    let report = check_conditions(&fam);

    let mut sizes: Vec<usize> = fam.cells().iter().map(|c| c.len()).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let sizes: Vec<String> = sizes.iter().map(usize::to_string).collect();

    let mut s = String::new();
    writeln!(s, "n\t{}", fam.n()).unwrap();
    writeln!(s, "cells\t{}", fam.len()).unwrap();
    writeln!(s, "cell_sizes\t{}", sizes.join(",")).unwrap();
    writeln!(s, "code\t{source}\t{} words", code.len()).unwrap();
    writeln!(s, "partition\t{}", verdict(homog.partition)).unwrap();
    match &homog.code.witness {
        Some((x, y)) => writeln!(
            s,
            "single-deletion-code\tFAIL\t{x} and {y} share a deletion"
        ),
        None => writeln!(s, "single-deletion-code\t{}", verdict(homog.code.holds)),
    }
    .unwrap();
    writeln!(s, "equal-sizes\t{}", verdict(homog.equal_sizes)).unwrap();
    match homog.brs.witness {
        Some((m1, m2, b)) => writeln!(
            s,
            "BRS-stable\tFAIL\t{b}-run supports of X^({m1}) and X^({m2}) differ"
        ),
        None => writeln!(s, "BRS-stable\t{}", verdict(homog.brs.stable)),
    }
    .unwrap();
    if homog.homogeneous() {
        writeln!(s, "homogeneous\tPASS").unwrap();
    } else {
        writeln!(s, "homogeneous\tFAIL\t{}", homog.reason()).unwrap();
    }
    write!(s, "{report}").unwrap();
    let code = if report.all_hold() {
        EXIT_OK
    } else {
        EXIT_VALIDATION
    };
    Ok(Output { stdout: s, code })
}

/// Builds the high-rate partition for `(E, N)` and writes it to `out`.
pub fn cmd_construct(e: u32, n: u64, out: &Path) -> Result<Output, CliError> {
    let p = HighRateParams::new(e, n)?;
    let fam = build_highrate_partition(&p)?;
    let meta = Metadata {
        bits_per_symbol: Some(e),
        symbols: Some(n),
        t: Some(1),
        created_by: Some(format!("qdel construct --E {e} --N {n}")),
    };
    write_file(out, &FamilySetFile::from_family(&fam, Some(meta)).to_json())?;
    let mut s = String::new();
    writeln!(s, "length\t{}", p.code_length()).unwrap();
    writeln!(s, "dimension\t2^{}", p.dimension_log2()).unwrap();
    writeln!(s, "cells\t{}", fam.len()).unwrap();
    writeln!(s, "rate\t{}", rate(&p)).unwrap();
    writeln!(s, "wrote\t{}", out.display()).unwrap();
    Ok(Output::ok(s))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SimulateMode {
    Exhaustive,
    Sampled,
}

/// Validates a family file, then runs the encode/delete/decode round trip
/// for every deletion position. Writes the TSV report to `out` when given,
/// otherwise ahead of the summary on standard output.
pub fn cmd_simulate(
    path: &Path,
    trials: usize,
    seed: u64,
    mode: SimulateMode,
    out: Option<&Path>,
) -> Result<Output, CliError> {
    let (fam, _) = read_family(path)?;
    let total = fam.total_words();
    if total > SIMULATION_GUARD {
        return Err(CliError::Guard(format!(
            "{total} basis strings exceed the simulation limit of {SIMULATION_GUARD}"
        )));
    }
    let report = check_conditions(&fam);
    if !report.all_hold() {
        return Ok(Output {
            stdout: format!("refusing to simulate: conditions fail\n{report}"),
            code: EXIT_VALIDATION,
        });
    }
    let code = CodeInstance::new(fam)?;
    let mode = match mode {
        SimulateMode::Exhaustive => Mode::Exhaustive,
        SimulateMode::Sampled => Mode::Sampled(seed),
    };
    let rt = roundtrip_verify_with(&code, trials, seed, mode)?;

    let mut s = String::new();
    match out {
        Some(p) => write_file(p, &rt.to_tsv())?,
        None => s.push_str(&rt.to_tsv()),
    }
    writeln!(s, "# n\t{}", code.n()).unwrap();
    writeln!(s, "# M\t{}", code.dimension()).unwrap();
    writeln!(
        s,
        "# messages\t{} corner + {trials} random",
        code.dimension() + 1
    )
    .unwrap();
    writeln!(s, "# rows\t{}", rt.rows.len()).unwrap();
    writeln!(s, "# min_fidelity\t{:.15}", rt.min_fidelity).unwrap();
    writeln!(s, "# max_empty_probability\t{:e}", rt.max_empty_probability).unwrap();
    writeln!(s, "# max_probability_error\t{:e}", rt.max_probability_error).unwrap();
    for line in code.lambda().to_string().lines() {
        writeln!(s, "# {line}").unwrap();
    }
    if let Some(p) = out {
        writeln!(s, "# wrote\t{}", p.display()).unwrap();
    }
    writeln!(s, "# result\t{}", verdict(rt.passed())).unwrap();
    let exit = if rt.passed() {
        EXIT_OK
    } else {
        EXIT_VALIDATION
    };
    Ok(Output {
        stdout: s,
        code: exit,
    })
}

/// Parses `0.9`, `.9`, `9/10` or `1` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational, CliError> {
    let bad = || CliError::Parse(format!("cannot read {text:?} as a rate"));
    let int = |s: &str| -> Result<BigInt, CliError> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        s.parse().map_err(|_| bad())
    };
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let den = int(den.trim())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(int(num.trim())?, den));
    }
    let (whole, frac) = text.split_once('.').unwrap_or((text, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    let whole = if whole.is_empty() {
        BigInt::zero()
    } else {
        int(whole)?
    };
    let frac_value = if frac.is_empty() {
        BigInt::zero()
    } else {
        int(frac)?
    };
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    Ok(BigRational::new(whole * &scale + frac_value, scale))
}

fn desk_simulable(p: &HighRateParams) -> bool {
    // |F(S)| = 2^{E(N-1)} basis strings.
    let log2_size = (p.symbols() - BigUint::one()) * BigUint::from(p.bits_per_symbol());
    let limit = (SIMULATION_GUARD as f64).log2().floor() as u32;
    log2_size <= BigUint::from(limit)
}

/// Sweeps `E = 1..6` at the smallest legal `N`, then appends the shortest
/// parameters whose rate exceeds `R`.
pub fn cmd_rate_table(r: &str) -> Result<Output, CliError> {
    let target = parse_rational(r)?;
    if target <= BigRational::zero() || target >= BigRational::one() {
        return Err(CliError::Parse(format!("rate {target} is not in (0, 1)")));
    }
    let mut s = String::new();
    writeln!(s, "# target R = {target}").unwrap();
    writeln!(
        s,
        "E\tN\tlength\tdimension\trate\trate_decimal\tabove_R\tdesk\tnote"
    )
    .unwrap();
    let row = |s: &mut String, p: &HighRateParams, note: &str| {
        let r = rate(p);
        let above = r > target;
        writeln!(
            s,
            "{}\t{}\t{}\t2^{}\t{}\t{:.6}\t{}\t{}\t{}",
            p.bits_per_symbol(),
            p.symbols(),
            p.code_length(),
            p.dimension_log2(),
            r,
            r.to_f64().unwrap_or(f64::NAN),
            if above { "yes" } else { "no" },
            if desk_simulable(p) {
                "simulable"
            } else {
                "not desk-simulable"
            },
            note
        )
        .unwrap();
        above
    };
    let mut first = true;
    for e in 1..=6u32 {
        let n = (1u64 << e).max(4);
        let p = HighRateParams::new(e, n)?;
        let above = rate(&p) > target;
        let note = if above && first { "first above R" } else { "-" };
        if above {
            first = false;
        }
        row(&mut s, &p, note);
    }
    let best = find_params_for_rate(&target)?;
    row(&mut s, &best, "shortest above R");
    Ok(Output::ok(s))
}

fn parse_source(source: &str) -> Result<(ClassicalCode, String), CliError> {
    let parts: Vec<&str> = source.split_whitespace().collect();
    let num = |s: &str| -> Result<i64, CliError> {
        s.parse()
            .map_err(|_| CliError::Parse(format!("{s:?} is not an integer in source {source:?}")))
    };
    match parts[..] {
        ["vt", n, a] => {
            let n = usize::try_from(num(n)?)
                .map_err(|_| CliError::Parse("n must be positive".into()))?;
            Ok((vt_code(n, num(a)?)?, format!("VT_{n}({a})")))
        }
        ["highrate", e, n] => {
            let (e, n) = (num(e)?, num(n)?);
            let bad = || CliError::Parse("E and N must be positive".into());
            let p = HighRateParams::new(
                u32::try_from(e).map_err(|_| bad())?,
                u64::try_from(n).map_err(|_| bad())?,
            )?;
            Ok((highrate_code(&p)?, format!("F(S) for E={e}, N={n}")))
        }
        ["file", path] => {
            let (fam, _) = read_family(Path::new(path))?;
            Ok((fam.union_code(), format!("union of {path}")))
        }
        _ => Err(CliError::Parse(format!(
            "unknown source {source:?}; expected \"vt N A\", \"highrate E N\" or \"file PATH\""
        ))),
    }
}

fn describe(fam: &FamilySet) -> String {
    let cells: Vec<String> = fam
        .cells()
        .iter()
        .map(|c| {
            let words: Vec<String> = c.iter().map(|w| w.to_string()).collect();
            format!("{{{}}}", words.join(","))
        })
        .collect();
    cells.join(" | ")
}

/// Searches a small code for homogeneous partitions.
pub fn cmd_search(source: &str, max_cells: usize) -> Result<Output, CliError> {
    let (code, name) = parse_source(source)?;
    let found = search_homogeneous(&code, max_cells)?;
    let mut s = String::new();
    writeln!(s, "code\t{name}").unwrap();
    writeln!(s, "words\t{}", code.len()).unwrap();
    if found.is_empty() {
        writeln!(s, "none found").unwrap();
    } else {
        writeln!(s, "found\t{}", found.len()).unwrap();
    }
    for (k, fam) in found.iter().enumerate() {
        let ok = check_conditions(fam).all_hold();
        writeln!(
            s,
            "partition {}\t{} cells of {}\tconditions {}\t{}",
            k + 1,
            fam.len(),
            fam.cell(0).len(),
            verdict(ok),
            describe(fam)
        )
        .unwrap();
    }
    Ok(Output::ok(s))
}
