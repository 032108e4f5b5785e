//! Plain CSV emission with `#` provenance comments.

use std::io::Write;

use crate::error::Result;

/// A row type with a fixed header.
pub trait CsvRecord {
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

/// Writes `comments` as `# ` lines followed by the header and one line per row.
pub fn write_csv<W: Write, R: CsvRecord>(mut out: W, comments: &[String], rows: &[R]) -> Result<()> {
    for c in comments {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(R::header())?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

/// Reader that skips `#` comment lines.
pub fn reader<R: std::io::Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Row(u32, f64);

    impl CsvRecord for Row {
        fn header() -> &'static [&'static str] {
            &["id", "value"]
        }

        fn fields(&self) -> Vec<String> {
            vec![self.0.to_string(), self.1.to_string()]
        }
    }

    #[test]
    fn comments_then_rows() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &["seed 7\nmore".to_string()], &[Row(1, 0.1), Row(2, 2.5e-3)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "# seed 7\n# more\nid,value\n1,0.1\n2,0.0025\n");
        let mut r = reader(text.as_bytes());
        let vals: Vec<f64> = r.records().map(|rec| rec.unwrap()[1].parse().unwrap()).collect();
        assert_eq!(vals, vec![0.1, 2.5e-3]);
    }
}
