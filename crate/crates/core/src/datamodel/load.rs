use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use indexmap::IndexMap;

use crate::datamodel::RatingTriple;
use crate::error::{CfError, Result};

/// Outcome of parsing a ratings file.
#[derive(Debug)]
pub struct LoadReport {
    /// Parsed triples, de-duplicated by `(user, item)` with the last
    /// occurrence winning.
    pub triples: Vec<RatingTriple>,
    /// Number of lines that repeated an earlier `(user, item)` pair.
    pub duplicates: usize,
    /// Number of lines that carried a fourth field (e.g. a timestamp),
    /// which is ignored.
    pub extra_field_lines: usize,
}

/// Reads rating triples from a UTF-8 text file, one `user<sep>item<sep>rating`
/// per line. Empty lines and lines starting with `#` are skipped.
pub fn load_dataset(path: impl AsRef<Path>, separator: &str) -> Result<LoadReport> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CfError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_ratings(BufReader::new(file), separator)
}

/// Parses rating triples from any buffered reader; see [`load_dataset`].
pub fn parse_ratings(reader: impl BufRead, separator: &str) -> Result<LoadReport> {
    if separator.is_empty() {
        return Err(CfError::InvalidArgument(
            "separator must be non-empty".into(),
        ));
    }

    let mut by_pair: IndexMap<(String, String), f64> = IndexMap::new();
    let mut duplicates = 0;
    let mut extra_field_lines = 0;

    for (line_no, line) in reader.lines().enumerate() {
        let line_no = line_no + 1;
        let line = line.map_err(|e| CfError::Parse {
            line: line_no,
            message: format!("not valid UTF-8 text: {e}"),
        })?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }

        let fields: Vec<&str> = line.split(separator).collect();
        let (user, item, raw_value) = match fields.as_slice() {
            [u, i, v] => (u, i, v),
            [u, i, v, _timestamp] => {
                extra_field_lines += 1;
                (u, i, v)
            }
            _ => {
                return Err(CfError::Parse {
                    line: line_no,
                    message: format!(
                        "expected 3 fields separated by `{separator}`, found {}",
                        fields.len()
                    ),
                });
            }
        };

        if user.is_empty() || item.is_empty() {
            return Err(CfError::Parse {
                line: line_no,
                message: "empty user or item code".into(),
            });
        }
        let value: f64 = raw_value.trim().parse().map_err(|_| CfError::Parse {
            line: line_no,
            message: format!("rating `{raw_value}` is not a number"),
        })?;
        if !value.is_finite() {
            return Err(CfError::Parse {
                line: line_no,
                message: format!("rating `{raw_value}` is not finite"),
            });
        }

        if by_pair
            .insert((user.to_string(), item.to_string()), value)
            .is_some()
        {
            duplicates += 1;
        }
    }

    let triples = by_pair
        .into_iter()
        .map(|((user_code, item_code), value)| RatingTriple {
            user_code,
            item_code,
            value,
        })
        .collect();

    Ok(LoadReport {
        triples,
        duplicates,
        extra_field_lines,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(text: &str, sep: &str) -> Result<LoadReport> {
        parse_ratings(Cursor::new(text), sep)
    }

    #[test]
    fn parses_double_colon_lines() {
        let report = parse("1::10::4.0\n", "::").unwrap();
        assert_eq!(report.triples, vec![RatingTriple::new("1", "10", 4.0)]);
        assert_eq!(report.duplicates, 0);
    }

    #[test]
    fn empty_input_yields_no_triples() {
        let report = parse("", "::").unwrap();
        assert!(report.triples.is_empty());
    }

    #[test]
    fn missing_field_is_a_parse_error_with_line_number() {
        let err = parse("1::10\n", "::").unwrap_err();
        match err {
            CfError::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn error_line_numbers_are_one_based_and_count_all_lines() {
        let err = parse("1::10::4.0\n\n# comment\n2::oops\n", "::").unwrap_err();
        match err {
            CfError::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_rating_is_rejected() {
        assert!(matches!(
            parse("1::10::high\n", "::"),
            Err(CfError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse("1::10::NaN\n", "::"),
            Err(CfError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let report = parse("# header\n\n1::10::4.0\n   \n", "::").unwrap();
        assert_eq!(report.triples.len(), 1);
    }

    #[test]
    fn fourth_field_is_ignored_and_counted() {
        let report = parse("1\t10\t4.0\t978300760\n2\t10\t3.0\t978300761\n", "\t").unwrap();
        assert_eq!(report.triples.len(), 2);
        assert_eq!(report.extra_field_lines, 2);
        assert_eq!(report.triples[0].value, 4.0);
    }

    #[test]
    fn duplicate_pair_keeps_last_value_and_is_counted() {
        let report = parse("1::10::4.0\n2::10::5.0\n1::10::1.0\n", "::").unwrap();
        assert_eq!(report.duplicates, 1);
        assert_eq!(report.triples.len(), 2);
        let dup = report
            .triples
            .iter()
            .find(|t| t.user_code == "1" && t.item_code == "10")
            .unwrap();
        assert_eq!(dup.value, 1.0);
    }

    #[test]
    fn empty_separator_is_rejected() {
        assert!(matches!(
            parse("1::10::4.0\n", ""),
            Err(CfError::InvalidArgument(_))
        ));
    }

    #[test]
    fn missing_file_reports_path() {
        let err = load_dataset("/nonexistent/ratings.dat", "::").unwrap_err();
        match err {
            CfError::Io { path, .. } => {
                assert_eq!(path.to_string_lossy(), "/nonexistent/ratings.dat")
            }
            other => panic!("expected io error, got {other:?}"),
        }
    }
}
