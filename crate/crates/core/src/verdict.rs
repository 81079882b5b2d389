//! Pass/fail outcomes with replayable witnesses.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::L0Error;
use crate::l0::{ExtRandomVar, RandomVar};
use crate::prob_space::AtomSpace;
use crate::rational::Rational;

/// The inputs that refute (or certify) a check, stored as descriptor
/// strings that parse back into values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub check: String,
    pub fields: BTreeMap<String, String>,
}

impl Witness {
    pub fn new(check: impl Into<String>) -> Self {
        Witness { check: check.into(), fields: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.fields.insert(key.to_string(), value.to_string());
        self
    }

    pub fn field(&self, key: &str) -> Result<&str, L0Error> {
        self.fields
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| L0Error::Parse(format!("witness has no field {key:?}")))
    }

    pub fn rv(&self, space: &AtomSpace, key: &str) -> Result<RandomVar, L0Error> {
        RandomVar::parse(space, self.field(key)?)
    }

    pub fn ext_rv(&self, space: &AtomSpace, key: &str) -> Result<ExtRandomVar, L0Error> {
        ExtRandomVar::parse(space, self.field(key)?)
    }

    pub fn rational(&self, key: &str) -> Result<Rational, L0Error> {
        self.field(key)?.parse()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub passed: bool,
    pub witness: Option<Witness>,
    pub samples_run: usize,
}

impl Verdict {
    pub fn pass(samples_run: usize) -> Self {
        Verdict { passed: true, witness: None, samples_run }
    }

    pub fn fail(witness: Witness, samples_run: usize) -> Self {
        Verdict { passed: false, witness: Some(witness), samples_run }
    }

    /// A passing verdict that still records a certificate.
    pub fn certified(witness: Witness, samples_run: usize) -> Self {
        Verdict { passed: true, witness: Some(witness), samples_run }
    }
}
