//! Output files: JSON summaries and CSV tables, each led by a provenance
//! record, with every float written at 17 significant digits.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;

/// Floats as `d.dddddddddddddddde±x`, 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits);
    value.serialize(&mut ser).expect("serialisable value");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub artifact: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config: Value,
}

impl Provenance {
    pub fn new<T: Serialize>(command: &str, seed: u64, config: &T) -> Self {
        Self {
            artifact: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            seed,
            config: serde_json::to_value(config).expect("serialisable config"),
        }
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    provenance: &'a Provenance,
    result: &'a T,
}

/// Writer for `--out <path>` or standard output.
pub fn open(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_json<T: Serialize>(out: Option<&Path>, prov: &Provenance, result: &T) -> io::Result<()> {
    let mut w = open(out)?;
    writeln!(w, "{}", to_json(&Document { provenance: prov, result }))?;
    w.flush()
}

/// Streaming CSV: a `# provenance {json}` line, the header, then rows.
pub struct CsvWriter {
    inner: Box<dyn Write>,
}

impl CsvWriter {
    pub fn create(out: Option<&Path>, prov: &Provenance, header: &str) -> io::Result<Self> {
        let mut inner = open(out)?;
        writeln!(inner, "# provenance {}", to_json(prov))?;
        writeln!(inner, "{header}")?;
        Ok(Self { inner })
    }

    pub fn line(&mut self, row: &str) -> io::Result<()> {
        writeln!(self.inner, "{row}")
    }

    pub fn floats(&mut self, row: &[f64]) -> io::Result<()> {
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        self.line(&cells.join(","))
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.inner.flush()
    }
}
