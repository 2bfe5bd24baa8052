//! The interaction log format.
//!
//! A UTF-8 CSV document whose first line is exactly `winner,loser,type`,
//! followed by one row per interaction naming the winner (or instigator),
//! the loser (or recipient) and the interaction type. Labels are arbitrary
//! strings; they are numbered in order of first appearance, scanning the
//! winner column before the loser column on each row.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use multirank_core::{Dataset, InteractionRecord};

use crate::error::InputError;

pub const HEADER: [&str; 3] = ["winner", "loser", "type"];

#[derive(Default)]
struct Registry {
    index: HashMap<String, usize>,
    labels: Vec<String>,
}

impl Registry {
    fn intern(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.index.insert(label.to_owned(), i);
        self.labels.push(label.to_owned());
        i
    }
}

pub fn parse_interactions<R: Read>(reader: R) -> Result<Dataset, InputError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut rows = csv.records();

    let header = match rows.next() {
        None => {
            return Err(InputError::Validation {
                line: 1,
                message: "empty file; expected header `winner,loser,type`".into(),
            })
        }
        Some(row) => row.map_err(csv_error)?,
    };
    if header.iter().ne(HEADER) {
        return Err(InputError::Parse {
            line: line_of(&header),
            message: format!(
                "expected header `winner,loser,type`, found `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut individuals = Registry::default();
    let mut types = Registry::default();
    let mut records = Vec::new();
    for row in rows {
        let row = row.map_err(csv_error)?;
        let line = line_of(&row);
        if row.len() != 3 {
            return Err(InputError::Parse {
                line,
                message: format!("expected 3 columns, found {}", row.len()),
            });
        }
        if row[0] == row[1] {
            return Err(InputError::Validation {
                line,
                message: format!("`{}` interacts with itself", &row[0]),
            });
        }
        let winner = individuals.intern(&row[0]);
        let loser = individuals.intern(&row[1]);
        let itype = types.intern(&row[2]);
        records.push(InteractionRecord::new(winner, loser, itype));
    }
    if records.is_empty() {
        return Err(InputError::Validation {
            line: 1,
            message: "no interactions after the header".into(),
        });
    }
    Ok(Dataset::new(records, individuals.labels, types.labels)?)
}

fn line_of(row: &csv::StringRecord) -> u64 {
    row.position().map_or(0, |p| p.line())
}

fn csv_error(err: csv::Error) -> InputError {
    let line = err.position().map_or(0, |p| p.line());
    InputError::Parse {
        line,
        message: err.to_string(),
    }
}

pub fn read_interactions(path: &Path) -> Result<Dataset, InputError> {
    let file = File::open(path).map_err(|source| InputError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_interactions(std::io::BufReader::new(file))
}

/// Writes `data` in the interaction format. Parsing the output gives back the
/// same dataset whenever its labels are already in first-appearance order
/// and every individual and type occurs in some record.
pub fn write_interactions<W: Write>(data: &Dataset, writer: W) -> csv::Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(HEADER)?;
    let ind = data.individual_labels();
    let typ = data.type_labels();
    for r in data.records() {
        csv.write_record([&ind[r.winner], &ind[r.loser], &typ[r.itype]])?;
    }
    csv.flush()?;
    Ok(())
}
