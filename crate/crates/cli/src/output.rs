use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::Format;
use crate::commands::{CsvTable, Outcome};

pub const SCHEMA_VERSION: &str = "1";

/// The JSON envelope every command emits.
#[derive(Debug, Serialize, Deserialize)]
pub struct OutputRecord {
    pub schema_version: String,
    pub command: String,
    pub inputs: Value,
    pub result: Value,
    pub warnings: Vec<String>,
}

impl OutputRecord {
    pub fn from_outcome(o: &Outcome) -> Self {
        OutputRecord {
            schema_version: SCHEMA_VERSION.to_string(),
            command: o.command.to_string(),
            inputs: o.inputs.clone(),
            result: o.result.clone(),
            warnings: o.warnings.clone(),
        }
    }
}

fn csv_bytes(table: &CsvTable) -> io::Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

/// Renders the outcome. Warnings travel inside the JSON envelope; for the
/// other formats the caller sends them to stderr.
pub fn render(o: &Outcome, format: Format) -> io::Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(&OutputRecord::from_outcome(o))?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => csv_bytes(&o.csv),
        Format::Text => Ok(o.text.clone().into_bytes()),
    }
}

pub fn write_warnings(o: &Outcome, format: Format, err: &mut impl Write) {
    if format != Format::Json {
        for w in &o.warnings {
            let _ = writeln!(err, "warning: {w}");
        }
    }
}
