use std::fmt::Write as _;

use thiserror::Error;

use super::{BenchRecord, BenchStats, ByteCounts, Operation};
use crate::registry::SchemeKind;

pub const CSV_HEADER: &str = "scheme,operation,n,mean_us,stddev_us";

/// Appendix cycle-count tables as shipped fixtures.
pub const CYCLES_KEM_TXT: &str = include_str!("../../data/cycles_kem.txt");
pub const CYCLES_SIG_TXT: &str = include_str!("../../data/cycles_sig.txt");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

/// One row of a cycle-count table: a scheme and its cycles per column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleRow {
    pub scheme: String,
    pub cycles: Vec<(Operation, u64)>,
}

impl CycleRow {
    pub fn get(&self, op: Operation) -> Option<u64> {
        self.cycles.iter().find(|(o, _)| *o == op).map(|&(_, c)| c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleTable {
    pub columns: Vec<Operation>,
    pub rows: Vec<CycleRow>,
}

impl CycleTable {
    /// The kind shared by every column, if there is one.
    pub fn kind(&self) -> Option<SchemeKind> {
        let first = self.columns.first()?.kind()?;
        self.columns
            .iter()
            .all(|c| c.kind() == Some(first))
            .then_some(first)
    }

    pub fn row(&self, scheme: &str) -> Option<&CycleRow> {
        self.rows.iter().find(|r| r.scheme == scheme)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub records: Vec<BenchRecord>,
    pub tables: Vec<CycleTable>,
}

impl Report {
    pub fn cycle_rows(&self) -> impl Iterator<Item = &CycleRow> {
        self.tables.iter().flat_map(|t| t.rows.iter())
    }

    pub fn rows_of_kind(&self, kind: SchemeKind) -> usize {
        self.tables
            .iter()
            .filter(|t| t.kind() == Some(kind))
            .map(|t| t.rows.len())
            .sum()
    }

    /// Cycles for `scheme`/`op` from a record or a table row.
    pub fn cycles(&self, scheme: &str, op: Operation) -> Option<u64> {
        self.records
            .iter()
            .find(|r| r.scheme == scheme && r.operation == op)
            .and_then(|r| r.stats.mean_cycles)
            .or_else(|| self.cycle_rows().find(|r| r.scheme == scheme)?.get(op))
    }
}

pub fn emit_record(r: &BenchRecord) -> String {
    let cycles = r
        .stats
        .mean_cycles
        .map_or_else(|| "-".to_string(), |c| c.to_string());
    let mut line = format!(
        "{} | {} | n={} | mean_us={:.3} | stddev_us={:.3} | cycles={}",
        r.scheme, r.operation, r.stats.n, r.stats.mean_us, r.stats.stddev_us, cycles
    );
    if let Some(b) = r.bytes {
        let _ = write!(line, " | read={} | write={}", b.read, b.write);
    }
    line
}

pub fn emit_text(records: &[BenchRecord]) -> String {
    records.iter().map(|r| emit_record(r) + "\n").collect()
}

fn header_op(name: &str) -> Option<Operation> {
    match name.to_ascii_lowercase().as_str() {
        "dec" | "decaps" => Some(Operation::Decaps),
        "enc" | "encaps" => Some(Operation::Encaps),
        other => other.parse().ok(),
    }
}

/// Splits a table line on `&` when present, otherwise on whitespace, after
/// dropping a trailing `\\`.
fn table_cells(line: &str) -> Vec<&str> {
    let line = line.trim_end().trim_end_matches("\\\\").trim_end();
    if line.contains('&') {
        line.split('&').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

fn field<'a>(part: &'a str, key: &str) -> Result<&'a str, String> {
    part.strip_prefix(key)
        .and_then(|s| s.strip_prefix('='))
        .ok_or_else(|| format!("expected {key}=..., found {part:?}"))
}

fn decimal(s: &str, key: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{key} is not a decimal: {s:?}"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("{key} must be a non-negative number"))
    }
}

fn integer(s: &str, key: &str) -> Result<u64, String> {
    s.parse().map_err(|_| format!("{key} is not an integer: {s:?}"))
}

fn parse_record(line: &str) -> Result<BenchRecord, String> {
    let parts: Vec<&str> = line.split('|').map(str::trim).collect();
    if parts.len() != 6 && parts.len() != 8 {
        return Err(format!("expected 6 or 8 fields, found {}", parts.len()));
    }
    let scheme = parts[0];
    if scheme.is_empty() {
        return Err(format!("bad scheme name {scheme:?}"));
    }
    let operation = parts[1].parse::<Operation>()?;
    let n = integer(field(parts[2], "n")?, "n")?;
    if n == 0 {
        return Err("n must be at least 1".into());
    }
    let mean_us = decimal(field(parts[3], "mean_us")?, "mean_us")?;
    let stddev_us = decimal(field(parts[4], "stddev_us")?, "stddev_us")?;
    let mean_cycles = match field(parts[5], "cycles")? {
        "-" => None,
        c => Some(integer(c, "cycles")?),
    };
    let bytes = if parts.len() == 8 {
        Some(ByteCounts {
            read: integer(field(parts[6], "read")?, "read")?,
            write: integer(field(parts[7], "write")?, "write")?,
        })
    } else {
        None
    };
    Ok(BenchRecord {
        scheme: scheme.to_string(),
        operation,
        stats: BenchStats {
            n,
            mean_us,
            stddev_us,
            total_elapsed_us: mean_us * n as f64,
            mean_cycles,
        },
        bytes,
    })
}

/// Parses record lines and cycle tables. A table starts at a header whose
/// first cell is `Cipher` and runs until a blank line or a record line.
pub fn parse_text(text: &str) -> Result<Report, ParseError> {
    let mut report = Report::default();
    let mut table: Option<CycleTable> = None;
    for (i, raw) in text.lines().enumerate() {
        let err = |reason: String| ParseError { line: i + 1, reason };
        let line = raw.trim();
        if line.starts_with('#') || line.starts_with('\\') {
            continue;
        }
        if line.is_empty() {
            report.tables.extend(table.take());
            continue;
        }
        if line.contains('|') {
            report.tables.extend(table.take());
            report.records.push(parse_record(line).map_err(err)?);
            continue;
        }
        let cells = table_cells(line);
        if cells[0].eq_ignore_ascii_case("cipher") {
            report.tables.extend(table.take());
            let columns = cells[1..]
                .iter()
                .map(|c| header_op(c).ok_or_else(|| format!("unknown column {c:?}")))
                .collect::<Result<Vec<_>, _>>()
                .map_err(err)?;
            if columns.is_empty() {
                return Err(err("table header has no columns".into()));
            }
            table = Some(CycleTable { columns, rows: Vec::new() });
            continue;
        }
        let Some(t) = table.as_mut() else {
            return Err(err(format!("unrecognised line {line:?}")));
        };
        if cells.len() != t.columns.len() + 1 {
            return Err(err(format!(
                "expected {} cells, found {}",
                t.columns.len() + 1,
                cells.len()
            )));
        }
        let values = cells[1..]
            .iter()
            .map(|c| integer(c, "cycles"))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        t.rows.push(CycleRow {
            scheme: cells[0].to_string(),
            cycles: t.columns.iter().copied().zip(values).collect(),
        });
    }
    report.tables.extend(table);
    Ok(report)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn emit_csv(records: &[BenchRecord]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{:.3},{:.3}",
            csv_field(&r.scheme),
            r.operation,
            r.stats.n,
            r.stats.mean_us,
            r.stats.stddev_us
        );
    }
    out
}

/// `scheme,<op>,<op>,...` followed by one line per table row.
pub fn emit_cycle_csv(table: &CycleTable) -> String {
    let mut out = String::from("scheme");
    for c in &table.columns {
        let _ = write!(out, ",{c}");
    }
    out.push('\n');
    for row in &table.rows {
        out.push_str(&csv_field(&row.scheme));
        for &(_, c) in &row.cycles {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
    }
    out
}

/// Whitespace-aligned table that [`parse_text`] reads back.
pub fn emit_cycle_table(table: &CycleTable) -> String {
    let width = table.rows.iter().map(|r| r.scheme.len()).max().unwrap_or(0).max(6);
    let mut out = format!("{:<width$}", "Cipher");
    for c in &table.columns {
        let _ = write!(out, " {:>14}", c.as_str());
    }
    out.push('\n');
    for row in &table.rows {
        let _ = write!(out, "{:<width$}", row.scheme);
        for &(_, c) in &row.cycles {
            let _ = write!(out, " {c:>14}");
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    Scheme,
    Operation,
}

/// `# <group>` headers followed by `<label> <mean_us>` lines, groups in order
/// of first appearance.
pub fn emit_chart_data(records: &[BenchRecord], group_by: GroupBy) -> String {
    let key = |r: &BenchRecord| match group_by {
        GroupBy::Scheme => (r.scheme.clone(), r.operation.to_string()),
        GroupBy::Operation => (r.operation.to_string(), r.scheme.clone()),
    };
    let mut groups: Vec<(String, Vec<String>)> = Vec::new();
    for r in records {
        let (group, label) = key(r);
        let line = format!("{label} {:.3}", r.stats.mean_us);
        match groups.iter_mut().find(|(g, _)| *g == group) {
            Some((_, lines)) => lines.push(line),
            None => groups.push((group, vec![line])),
        }
    }
    let mut out = String::new();
    for (group, lines) in groups {
        let _ = writeln!(out, "# {group}");
        for l in lines {
            let _ = writeln!(out, "{l}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(scheme: &str, op: Operation, n: u64, mean: f64) -> BenchRecord {
        BenchRecord::new(
            scheme,
            op,
            BenchStats {
                n,
                mean_us: mean,
                stddev_us: 0.5,
                total_elapsed_us: mean * n as f64,
                mean_cycles: None,
            },
        )
    }

    #[test]
    fn empty_input() {
        assert_eq!(parse_text("").unwrap(), Report::default());
        assert_eq!(parse_text("# only a comment\n\n").unwrap(), Report::default());
        assert_eq!(emit_text(&[]), "");
    }

    #[test]
    fn exact_line_format() {
        let mut r = rec("lwe-toy", Operation::Encaps, 31, 12.3456);
        r.stats.mean_cycles = Some(889439);
        assert_eq!(
            emit_record(&r),
            "lwe-toy | encaps | n=31 | mean_us=12.346 | stddev_us=0.500 | cycles=889439"
        );
        r.stats.mean_cycles = None;
        r.bytes = Some(ByteCounts { read: 10, write: 20 });
        assert_eq!(
            emit_record(&r),
            "lwe-toy | encaps | n=31 | mean_us=12.346 | stddev_us=0.500 | cycles=- | read=10 | write=20"
        );
    }

    #[test]
    fn grammar_line_carrying_cycles() {
        let report =
            parse_text("Kyber768 | keygen | n=30 | mean_us=1.000 | stddev_us=0.000 | cycles=889439\n").unwrap();
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.cycles("Kyber768", Operation::Keygen), Some(889439));
        assert_eq!(report.records[0].stats.total_elapsed_us, 30.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "# header\nx | keygen | n=1 | mean_us=1 | stddev_us=0 | cycles=-\nx | nope | n=1 | mean_us=1 | stddev_us=0 | cycles=-\n";
        assert_eq!(parse_text(text).unwrap_err().line, 3);
        for bad in [
            "x | keygen | n=0 | mean_us=1 | stddev_us=0 | cycles=-",
            "x | keygen | n=1 | mean_us=-1 | stddev_us=0 | cycles=-",
            "x | keygen | n=1 | mean=1 | stddev_us=0 | cycles=-",
            "x | keygen | n=1 | mean_us=1 | stddev_us=0",
            " | keygen | n=1 | mean_us=1 | stddev_us=0 | cycles=-",
            "Kyber768 1 2 3",
            "Cipher Foo",
        ] {
            assert!(parse_text(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn appendix_fixtures() {
        let kem = parse_text(CYCLES_KEM_TXT).unwrap();
        let sig = parse_text(CYCLES_SIG_TXT).unwrap();
        assert_eq!(kem.rows_of_kind(SchemeKind::Kem), 31);
        assert_eq!(sig.rows_of_kind(SchemeKind::Signature), 53);
        assert_eq!(kem.cycles("Kyber768", Operation::Keygen), Some(889439));
        assert_eq!(kem.cycles("Kyber768", Operation::Decaps), Some(1315578));
        assert_eq!(sig.cycles("DILITHIUM_2", Operation::Keypair), Some(955260));
        assert_eq!(sig.cycles("qTESLA_III_speed", Operation::Verify), Some(1250011));
    }

    #[test]
    fn cycle_table_reemits() {
        let kem = parse_text(CYCLES_KEM_TXT).unwrap();
        let again = parse_text(&emit_cycle_table(&kem.tables[0])).unwrap();
        assert_eq!(again.tables, kem.tables);
        let csv = emit_cycle_csv(&kem.tables[0]);
        assert_eq!(csv.lines().next(), Some("scheme,decaps,encaps,keygen"));
        assert_eq!(csv.lines().count(), 32);
    }

    #[test]
    fn csv_shape() {
        let csv = emit_csv(&[rec("a", Operation::Sign, 3, 1.0)]);
        assert_eq!(csv, "scheme,operation,n,mean_us,stddev_us\na,sign,3,1.000,0.500\n");
    }

    #[test]
    fn chart_grouping_keeps_every_record() {
        let recs = vec![
            rec("a", Operation::Keygen, 1, 1.0),
            rec("b", Operation::Keygen, 1, 2.0),
            rec("a", Operation::Encaps, 1, 3.0),
        ];
        let by_scheme = emit_chart_data(&recs, GroupBy::Scheme);
        assert_eq!(by_scheme, "# a\nkeygen 1.000\nencaps 3.000\n# b\nkeygen 2.000\n");
        let by_op = emit_chart_data(&recs, GroupBy::Operation);
        assert_eq!(by_op.lines().filter(|l| !l.starts_with('#')).count(), 3);
        assert_eq!(by_op.lines().filter(|l| l.starts_with('#')).count(), 2);
    }

    proptest! {
        #[test]
        fn text_roundtrip(
            scheme in "[A-Za-z0-9_+-]{1,16}",
            op in 0usize..7,
            n in 1u64..1_000_000,
            mean_milli in 0u64..10_000_000_000,
            sd_milli in 0u64..10_000_000,
            cycles in proptest::option::of(any::<u64>()),
            bytes in proptest::option::of((any::<u32>(), any::<u32>())),
        ) {
            let mut r = rec(&scheme, Operation::ALL[op], n, mean_milli as f64 / 1e3);
            r.stats.stddev_us = sd_milli as f64 / 1e3;
            r.stats.mean_cycles = cycles;
            r.bytes = bytes.map(|(a, b)| ByteCounts { read: a.into(), write: b.into() });
            let text = emit_text(std::slice::from_ref(&r));
            let back = parse_text(&text).unwrap();
            prop_assert_eq!(back.records.len(), 1);
            prop_assert_eq!(&back.records[0], &r);
        }
    }
}
