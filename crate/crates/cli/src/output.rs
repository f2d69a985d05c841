// SPDX-License-Identifier: Apache-2.0

//! CSV tables with `#` metadata lines on top.

use std::io::Write;
use std::path::Path;

use crate::CliError;

/// Shortest decimal that parses back to the same `f64`.
pub fn number(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            comments: Vec::new(),
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    pub fn metadata(&mut self, pairs: &[(String, String)]) {
        for (k, v) in pairs {
            self.comment(format!("{k} = {v}"));
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<(), CliError> {
        for c in &self.comments {
            writeln!(out, "# {c}").map_err(|e| CliError::Io(e.to_string()))?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(())
    }

    /// Writes to `path`, or to stdout when no path is given.
    pub fn write(&self, path: Option<&Path>) -> Result<(), CliError> {
        match path {
            None => self.write_to(std::io::stdout().lock()),
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir)
                        .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
                }
                let file = std::fs::File::create(p)
                    .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                self.write_to(std::io::BufWriter::new(file))
            }
        }
    }

    pub fn render(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}

/// Reads a table written by [`Table::write_to`].
pub fn read_table(text: &str) -> Result<Table, CliError> {
    let comments = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.trim_start_matches('#').trim().to_string())
        .collect();
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
        .collect::<Result<_, _>>()?;
    Ok(Table {
        comments,
        header,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 6.02e23, -0.0, 0.0, 2f64.sqrt(), 1.0 - 1e-16] {
            let s = number(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn table_round_trip() {
        let mut t = Table::new(["a", "b"]);
        t.comment("x = 1");
        t.push(vec![number(0.1), String::new()]);
        t.push(vec![number(1e-20), number(3.0)]);
        let back = read_table(&t.render()).unwrap();
        assert_eq!(back, t);
    }
}
