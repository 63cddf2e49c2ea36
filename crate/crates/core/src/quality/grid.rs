use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::error::{CfError, Result};

/// A measure's scores laid out as row parameter × column series, e.g.
/// neighbor counts × similarity metrics.
///
/// Cells start empty; [`put`](ResultsGrid::put) fills them by key. The text
/// rendering is a fixed-width table with `-` for empty cells; the CSV
/// export keeps full `f64` precision.
#[derive(Debug, Clone)]
pub struct ResultsGrid {
    pub measure_name: String,
    /// Header label of the row-key column (e.g. `k`).
    pub row_param: String,
    row_keys: Vec<String>,
    column_keys: Vec<String>,
    row_positions: HashMap<String, usize>,
    column_positions: HashMap<String, usize>,
    cells: Vec<Option<f64>>,
}

impl ResultsGrid {
    pub fn new<R, C>(
        measure_name: impl Into<String>,
        row_param: impl Into<String>,
        row_keys: impl IntoIterator<Item = R>,
        column_keys: impl IntoIterator<Item = C>,
    ) -> Self
    where
        R: ToString,
        C: ToString,
    {
        let row_keys: Vec<String> = row_keys.into_iter().map(|k| k.to_string()).collect();
        let column_keys: Vec<String> = column_keys.into_iter().map(|k| k.to_string()).collect();
        let row_positions = row_keys
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i))
            .collect();
        let column_positions = column_keys
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i))
            .collect();
        let cells = vec![None; row_keys.len() * column_keys.len()];
        Self {
            measure_name: measure_name.into(),
            row_param: row_param.into(),
            row_keys,
            column_keys,
            row_positions,
            column_positions,
            cells,
        }
    }

    pub fn row_keys(&self) -> &[String] {
        &self.row_keys
    }

    pub fn column_keys(&self) -> &[String] {
        &self.column_keys
    }

    fn cell_index(&self, row: &str, column: &str) -> Result<usize> {
        let r = *self
            .row_positions
            .get(row)
            .ok_or_else(|| CfError::UnknownGridKey {
                key: row.to_owned(),
                axis: "row",
            })?;
        let c = *self
            .column_positions
            .get(column)
            .ok_or_else(|| CfError::UnknownGridKey {
                key: column.to_owned(),
                axis: "column",
            })?;
        Ok(r * self.column_keys.len() + c)
    }

    pub fn put(&mut self, row: impl ToString, column: impl ToString, value: f64) -> Result<()> {
        let index = self.cell_index(&row.to_string(), &column.to_string())?;
        self.cells[index] = Some(value);
        Ok(())
    }

    pub fn get(&self, row: impl ToString, column: impl ToString) -> Result<Option<f64>> {
        let index = self.cell_index(&row.to_string(), &column.to_string())?;
        Ok(self.cells[index])
    }

    /// Renders the fixed-width text table.
    pub fn to_text(&self) -> String {
        let rendered: Vec<Vec<String>> = self
            .row_keys
            .iter()
            .enumerate()
            .map(|(r, _)| {
                (0..self.column_keys.len())
                    .map(|c| match self.cells[r * self.column_keys.len() + c] {
                        Some(v) => format!("{v:.6}"),
                        None => "-".to_owned(),
                    })
                    .collect()
            })
            .collect();

        let mut widths: Vec<usize> = self.column_keys.iter().map(String::len).collect();
        for row in &rendered {
            for (c, cell) in row.iter().enumerate() {
                widths[c] = widths[c].max(cell.len());
            }
        }
        let key_width = self
            .row_keys
            .iter()
            .map(String::len)
            .chain([self.row_param.len()])
            .max()
            .unwrap_or(0);

        let mut out = String::new();
        out.push_str(&self.measure_name);
        out.push('\n');
        out.push_str(&format!("{:<key_width$}", self.row_param));
        for (c, key) in self.column_keys.iter().enumerate() {
            out.push_str(&format!("  {:>width$}", key, width = widths[c]));
        }
        out.push('\n');
        for (r, key) in self.row_keys.iter().enumerate() {
            out.push_str(&format!("{key:<key_width$}"));
            for (c, cell) in rendered[r].iter().enumerate() {
                out.push_str(&format!("  {:>width$}", cell, width = widths[c]));
            }
            out.push('\n');
        }
        out
    }

    /// Prints the text table to `out`.
    pub fn print(&self, mut out: impl Write) -> std::io::Result<()> {
        out.write_all(self.to_text().as_bytes())
    }

    /// Writes the grid as RFC 4180 CSV: header row `row_param,<columns>`,
    /// one row per row key, empty cells as empty fields. Values use the
    /// shortest decimal form that round-trips to the same `f64`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let io_err = |e: csv::Error| CfError::InvalidArgument(format!("csv write failed: {e}"));
        let mut header = vec![self.row_param.clone()];
        header.extend(self.column_keys.iter().cloned());
        writer.write_record(&header).map_err(io_err)?;
        for (r, key) in self.row_keys.iter().enumerate() {
            let mut record = vec![key.clone()];
            for c in 0..self.column_keys.len() {
                record.push(match self.cells[r * self.column_keys.len() + c] {
                    Some(v) => format!("{v}"),
                    None => String::new(),
                });
            }
            writer.write_record(&record).map_err(io_err)?;
        }
        writer.flush().map_err(|e| CfError::InvalidArgument(format!("csv flush failed: {e}")))?;
        Ok(())
    }

    /// Writes the CSV rendering to a file.
    pub fn export_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|source| CfError::Io {
            path: path.to_owned(),
            source,
        })?;
        self.write_csv(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep_shaped_grid() -> ResultsGrid {
        ResultsGrid::new(
            "MAE",
            "k",
            [50, 100, 150, 200, 250, 300, 350, 400],
            ["COR", "JMSD"],
        )
    }

    #[test]
    fn put_then_get_round_trips() {
        let mut grid = sweep_shaped_grid();
        grid.put(50, "COR", 0.8123).unwrap();
        assert_eq!(grid.get(50, "COR").unwrap(), Some(0.8123));
        assert_eq!(grid.get(100, "COR").unwrap(), None);
    }

    #[test]
    fn unknown_keys_are_errors() {
        let mut grid = sweep_shaped_grid();
        assert!(matches!(
            grid.put(60, "COR", 1.0),
            Err(CfError::UnknownGridKey { axis: "row", .. })
        ));
        assert!(matches!(
            grid.get(50, "MSD"),
            Err(CfError::UnknownGridKey { axis: "column", .. })
        ));
    }

    #[test]
    fn text_table_contains_formatted_values_and_dashes() {
        let mut grid = sweep_shaped_grid();
        grid.put(50, "COR", 0.8123456).unwrap();
        let text = grid.to_text();
        assert!(text.starts_with("MAE\n"));
        assert!(text.contains("0.812346"));
        assert!(text.contains('-'));
        let header = text.lines().nth(1).unwrap();
        assert!(header.starts_with('k'));
        assert!(header.contains("COR") && header.contains("JMSD"));
        // Fixed width: all lines below the title align.
        let widths: Vec<usize> = text.lines().skip(1).map(|l| l.len()).collect();
        assert!(widths.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn csv_round_trips_values_at_full_precision() {
        let mut grid = sweep_shaped_grid();
        let values = [
            (50, "COR", 0.1 + 0.2),
            (50, "JMSD", 1.0 / 3.0),
            (400, "COR", f64::MIN_POSITIVE),
            (250, "JMSD", -0.0),
        ];
        for (row, column, value) in values {
            grid.put(row, column, value).unwrap();
        }
        let mut buffer = Vec::new();
        grid.write_csv(&mut buffer).unwrap();

        let mut reader = csv::Reader::from_reader(buffer.as_slice());
        let header = reader.headers().unwrap().clone();
        assert_eq!(&header[0], "k");
        assert_eq!(&header[1], "COR");
        let mut parsed: Vec<(String, Vec<Option<f64>>)> = Vec::new();
        for record in reader.records() {
            let record = record.unwrap();
            let row = record[0].to_owned();
            let cells = (1..record.len())
                .map(|i| {
                    let field = &record[i];
                    (!field.is_empty()).then(|| field.parse::<f64>().unwrap())
                })
                .collect();
            parsed.push((row, cells));
        }
        assert_eq!(parsed.len(), 8);
        for (row, column, value) in values {
            let row_cells = &parsed
                .iter()
                .find(|(key, _)| key == &row.to_string())
                .unwrap()
                .1;
            let col_pos = if column == "COR" { 0 } else { 1 };
            let got = row_cells[col_pos].unwrap();
            assert_eq!(got.to_bits(), value.to_bits(), "{row}/{column}");
        }
        // Untouched cells stay empty.
        assert!(parsed.iter().find(|(k, _)| k == "100").unwrap().1[0].is_none());
    }
}
