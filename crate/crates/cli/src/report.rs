//! Rendering of result rows as JSON, CSV or an aligned text table.

use clap::ValueEnum;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// A row type with a fixed column order.
pub trait Tabular: Serialize {
    const HEADERS: &'static [&'static str];
    fn cells(&self) -> Vec<String>;
}

/// Renders `rows`. JSON is an array, CSV and tables always carry the header.
pub fn emit_report<R: Tabular>(rows: &[R], format: Format) -> String {
    match format {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(R::HEADERS).expect("in-memory write");
            for r in rows {
                w.write_record(r.cells()).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
        }
        Format::Table => {
            let body: Vec<Vec<String>> = rows.iter().map(|r| r.cells()).collect();
            let mut widths: Vec<usize> = R::HEADERS.iter().map(|h| h.chars().count()).collect();
            for row in &body {
                for (w, c) in widths.iter_mut().zip(row) {
                    *w = (*w).max(c.chars().count());
                }
            }
            let line = |cells: &mut dyn Iterator<Item = &str>| {
                let padded: Vec<String> = cells
                    .zip(&widths)
                    .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
                    .collect();
                padded.join("  ").trim_end().to_string() + "\n"
            };
            let mut out = line(&mut R::HEADERS.iter().copied());
            for row in &body {
                out += &line(&mut row.iter().map(String::as_str));
            }
            out
        }
    }
}

/// Renders a single result. JSON is an object rather than a one-element array.
pub fn emit_one<R: Tabular>(row: &R, format: Format) -> String {
    match format {
        Format::Json => json(row),
        _ => emit_report(std::slice::from_ref(row), format),
    }
}

pub fn json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        name: String,
        value: i64,
    }

    impl Tabular for Row {
        const HEADERS: &'static [&'static str] = &["name", "value"];
        fn cells(&self) -> Vec<String> {
            vec![self.name.clone(), self.value.to_string()]
        }
    }

    fn rows() -> Vec<Row> {
        vec![Row { name: "FCC(4)".into(), value: 128 }, Row { name: "T(8,4,4)".into(), value: 7 }]
    }

    #[test]
    fn empty_csv_is_header_only() {
        assert_eq!(emit_report::<Row>(&[], Format::Csv), "name,value\n");
    }

    #[test]
    fn json_round_trips() {
        let v: serde_json::Value = serde_json::from_str(&emit_report(&rows(), Format::Json)).unwrap();
        assert_eq!(v[1]["name"], "T(8,4,4)");
        assert_eq!(v[0]["value"], 128);
        let one: serde_json::Value = serde_json::from_str(&emit_one(&rows()[0], Format::Json)).unwrap();
        assert_eq!(one["value"], 128);
    }

    #[test]
    fn table_aligns_columns() {
        let t = emit_report(&rows(), Format::Table);
        assert_eq!(t, "name      value\nFCC(4)    128\nT(8,4,4)  7\n");
    }
}
