//! Solver results shared by the 2D and 1D optimizers.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::optimize2d::SymmetricFamily;

/// How a configuration was found.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Method {
    Lloyd,
    LloydMultistart,
    Anneal,
    Family(SymmetricFamily),
    CaseEnumeration,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Lloyd => f.write_str("lloyd"),
            Method::LloydMultistart => f.write_str("lloyd-multistart"),
            Method::Anneal => f.write_str("anneal"),
            Method::Family(fam) => write!(f, "family:{}", fam.kind),
            Method::CaseEnumeration => f.write_str("cases"),
        }
    }
}

/// One candidate considered by a driver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub label: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport<C> {
    pub best: C,
    pub value: f64,
    pub method: Method,
    pub starts_used: usize,
    pub iterations: usize,
    /// Shift amplitude when annealing stopped.
    pub final_amplitude: Option<f64>,
    /// Seeds of every randomized start, for replay.
    pub seeds: Vec<u64>,
    /// Every candidate value considered, in generation order.
    pub candidates: Vec<Candidate>,
    /// Difference to an independent cross-check, when one ran.
    pub oracle_delta: Option<f64>,
    /// Two independent solvers disagreed beyond tolerance.
    pub diverged: bool,
    /// Optimality holds only within a symmetry-restricted family.
    pub conjecture_conditional: bool,
    /// No tabulated reference exists for this support and `n`.
    pub unverified: bool,
}

impl<C> SolveReport<C> {
    pub fn new(best: C, value: f64, method: Method) -> Self {
        Self {
            best,
            value,
            method,
            starts_used: 1,
            iterations: 0,
            final_amplitude: None,
            seeds: Vec::new(),
            candidates: Vec::new(),
            oracle_delta: None,
            diverged: false,
            conjecture_conditional: false,
            unverified: false,
        }
    }

    pub fn candidate_values(&self) -> Vec<f64> {
        self.candidates.iter().map(|c| c.value).collect()
    }
}
