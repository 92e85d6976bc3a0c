//! CSV relations and JSON side files.
//!
//! Input CSVs carry a header row of attribute names; tuple ids follow file
//! order starting at 0. The literal `*` marks a suppressed cell, so it is
//! rejected in raw input and only accepted when reading a published file.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constraints::{ConstraintSet, DiversityConstraint};
use crate::error::{Error, Result};
use crate::model::{CellValue, Relation, Schema, TupleId, SUPPRESSED_LITERAL};

/// Attribute roles; every other CSV column is neither QI nor sensitive.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaSpec {
    pub qi: Vec<String>,
    #[serde(default)]
    pub sensitive: Vec<String>,
}

impl SchemaSpec {
    pub fn for_relation(r: &Relation) -> Self {
        SchemaSpec {
            qi: r.schema().qi_names().map(str::to_owned).collect(),
            sensitive: r.schema().sensitive_names().map(str::to_owned).collect(),
        }
    }

    pub fn bind(&self, attributes: &[String]) -> Result<Schema> {
        Schema::new(attributes, &self.qi, &self.sensitive)
    }
}

fn read_csv<R: Read>(reader: R, spec: &SchemaSpec, suppressed_ok: bool) -> Result<Relation> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let schema = Arc::new(spec.bind(&header)?);
    let mut tuples = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let cells = record
            .iter()
            .enumerate()
            .map(|(a, cell)| {
                if cell != SUPPRESSED_LITERAL {
                    Ok(CellValue::value(cell))
                } else if suppressed_ok {
                    Ok(CellValue::Suppressed)
                } else {
                    Err(Error::Schema(format!(
                        "row {} column `{}`: the value `*` is reserved for suppressed cells",
                        i + 1,
                        header[a]
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        tuples.push((TupleId(i as u32), cells));
    }
    Relation::new(schema, tuples)
}

/// Reads a raw relation; cells equal to `*` are an error.
pub fn read_relation<R: Read>(reader: R, spec: &SchemaSpec) -> Result<Relation> {
    read_csv(reader, spec, false)
}

/// Reads a published relation, mapping `*` to a suppressed cell.
pub fn read_published<R: Read>(reader: R, spec: &SchemaSpec) -> Result<Relation> {
    read_csv(reader, spec, true)
}

pub fn read_relation_path(path: impl AsRef<Path>, spec: &SchemaSpec) -> Result<Relation> {
    read_relation(File::open(path)?, spec)
}

/// Writes the header and rows in relation order; suppressed cells become `*`.
pub fn write_relation<W: Write>(writer: W, r: &Relation) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(r.schema().attributes())?;
    for (_, row) in r.tuples() {
        w.write_record(row.iter().map(|c| c.as_str().unwrap_or(SUPPRESSED_LITERAL)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_relation_path(path: impl AsRef<Path>, r: &Relation) -> Result<()> {
    write_relation(File::create(path)?, r)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    Ok(serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?)
}

pub fn read_schema_spec(path: impl AsRef<Path>) -> Result<SchemaSpec> {
    read_json(path)
}

pub fn read_constraints(path: impl AsRef<Path>) -> Result<ConstraintSet> {
    read_json(path)
}

/// Reads one constraint object, or an array of them.
pub fn read_constraint_list(path: impl AsRef<Path>) -> Result<Vec<DiversityConstraint>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(DiversityConstraint),
        Many(Vec<DiversityConstraint>),
    }
    Ok(match read_json::<OneOrMany>(path)? {
        OneOrMany::One(c) => vec![c],
        OneOrMany::Many(v) => v,
    })
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(mut writer: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, value)?;
    writer.write_all(b"\n")?;
    Ok(())
}
