//! The medical-records example relation and its two anonymizations, plus the
//! constraints used alongside them. Tuple ids are 1-based so `t(5)` is the
//! fifth row.

use std::sync::Arc;

use crate::constraints::{ConstraintSet, DiversityConstraint};
use crate::model::{CellValue, Relation, Schema, TupleId};

pub const MEDICAL_ATTRIBUTES: [&str; 6] = ["GEN", "ETH", "AGE", "PRV", "CTY", "DIAG"];
pub const MEDICAL_QI: [&str; 5] = ["GEN", "ETH", "AGE", "PRV", "CTY"];

pub const TABLE_1A: [[&str; 6]; 10] = [
    ["Female", "Caucasian", "80", "AB", "Calgary", "Hypertension"],
    ["Female", "Caucasian", "32", "AB", "Calgary", "Tuberculosis"],
    ["Male", "Caucasian", "59", "AB", "Calgary", "Osteoarthritis"],
    ["Male", "Caucasian", "46", "MB", "Winnipeg", "Migraine"],
    ["Male", "African", "31", "MB", "Winnipeg", "Hypertension"],
    ["Male", "African", "43", "BC", "Vancouver", "Seizure"],
    ["Male", "Caucasian", "29", "BC", "Vancouver", "Hypertension"],
    ["Female", "Asian", "58", "BC", "Vancouver", "Seizure"],
    ["Female", "Asian", "47", "MB", "Winnipeg", "Influenza"],
    ["Female", "Asian", "71", "BC", "Vancouver", "Migraine"],
];

/// 3-anonymous version of [`TABLE_1A`].
pub const TABLE_1B: [[&str; 6]; 10] = [
    ["*", "Caucasian", "*", "AB", "Calgary", "Hypertension"],
    ["*", "Caucasian", "*", "AB", "Calgary", "Tuberculosis"],
    ["*", "Caucasian", "*", "AB", "Calgary", "Osteoarthritis"],
    ["Male", "*", "*", "*", "*", "Migraine"],
    ["Male", "*", "*", "*", "*", "Hypertension"],
    ["Male", "*", "*", "*", "*", "Seizure"],
    ["Male", "*", "*", "*", "*", "Hypertension"],
    ["Female", "Asian", "*", "*", "*", "Seizure"],
    ["Female", "Asian", "*", "*", "*", "Influenza"],
    ["Female", "Asian", "*", "*", "*", "Migraine"],
];

/// Diverse 2-anonymous version of [`TABLE_1A`].
pub const TABLE_1C: [[&str; 6]; 10] = [
    ["Female", "Caucasian", "*", "AB", "Calgary", "Hypertension"],
    ["Female", "Caucasian", "*", "AB", "Calgary", "Tuberculosis"],
    ["Male", "Caucasian", "*", "*", "*", "Osteoarthritis"],
    ["Male", "Caucasian", "*", "*", "*", "Migraine"],
    ["Male", "African", "*", "*", "*", "Hypertension"],
    ["Male", "African", "*", "*", "*", "Seizure"],
    ["*", "*", "*", "BC", "Vancouver", "Hypertension"],
    ["*", "*", "*", "BC", "Vancouver", "Seizure"],
    ["Female", "Asian", "*", "*", "*", "Influenza"],
    ["Female", "Asian", "*", "*", "*", "Migraine"],
];

pub fn t(i: u32) -> TupleId {
    TupleId(i)
}

pub fn medical_schema() -> Arc<Schema> {
    Arc::new(Schema::new(&MEDICAL_ATTRIBUTES, &MEDICAL_QI, &["DIAG"]).expect("valid schema"))
}

/// Builds a relation over the medical schema with ids `1..=n`; `*` cells
/// become `Suppressed`.
pub fn medical_relation(rows: &[[&str; 6]]) -> Relation {
    let tuples = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let cells = row
                .iter()
                .map(|c| if *c == "*" { CellValue::Suppressed } else { CellValue::value(c) })
                .collect();
            (TupleId(i as u32 + 1), cells)
        })
        .collect();
    Relation::new(medical_schema(), tuples).expect("valid fixture")
}

pub fn table_1a() -> Relation {
    medical_relation(&TABLE_1A)
}

pub fn table_1b() -> Relation {
    medical_relation(&TABLE_1B)
}

pub fn table_1c() -> Relation {
    medical_relation(&TABLE_1C)
}

fn single(attr: &str, value: &str, lo: u64, hi: u64) -> DiversityConstraint {
    DiversityConstraint::bounded(&[attr], &[value], lo, hi).expect("valid constraint")
}

/// ETH[Asian] in [2, 5].
pub fn sigma1() -> DiversityConstraint {
    single("ETH", "Asian", 2, 5)
}

/// ETH[African] in [1, 3].
pub fn sigma2() -> DiversityConstraint {
    single("ETH", "African", 1, 3)
}

/// CTY[Vancouver] in [2, 4].
pub fn sigma3() -> DiversityConstraint {
    single("CTY", "Vancouver", 2, 4)
}

/// GEN[Male] in [1, 3].
pub fn sigma4() -> DiversityConstraint {
    single("GEN", "Male", 1, 3)
}

pub fn example_sigma() -> ConstraintSet {
    ConstraintSet::new(vec![sigma1(), sigma2(), sigma3()]).expect("distinct constraints")
}
