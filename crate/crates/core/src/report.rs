//! Residual/tolerance bookkeeping shared by all verification routines.

use serde::Serialize;

use crate::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Passes when `value <= tolerance`.
    AtMost,
    /// Passes when `value >= -tolerance`.
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportEntry {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSummary {
    pub dims: Vec<usize>,
    pub spacing: Vec<f64>,
    pub h_max: f64,
}

impl From<&Grid> for GridSummary {
    fn from(g: &Grid) -> Self {
        Self { dims: g.dims().to_vec(), spacing: g.spacing().to_vec(), h_max: g.h_max() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub identity: String,
    pub grid: Option<GridSummary>,
    pub entries: Vec<ReportEntry>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn new(identity: impl Into<String>, grid: Option<&Grid>) -> Self {
        Self { identity: identity.into(), grid: grid.map(GridSummary::from), entries: Vec::new(), passed: true }
    }

    /// Records `value <= tolerance`; NaN never passes.
    pub fn at_most(&mut self, name: impl Into<String>, value: f64, tolerance: f64) -> &mut Self {
        self.push(name.into(), value, tolerance, Bound::AtMost, value <= tolerance)
    }

    /// Records `value >= -tolerance`; NaN never passes.
    pub fn at_least(&mut self, name: impl Into<String>, value: f64, tolerance: f64) -> &mut Self {
        self.push(name.into(), value, tolerance, Bound::AtLeast, value >= -tolerance)
    }

    /// Records a value that is reported but not judged.
    pub fn info(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.entries.push(ReportEntry {
            name: name.into(),
            value,
            tolerance: f64::INFINITY,
            bound: Bound::AtMost,
            passed: true,
        });
        self
    }

    fn push(&mut self, name: String, value: f64, tolerance: f64, bound: Bound, passed: bool) -> &mut Self {
        self.passed &= passed;
        self.entries.push(ReportEntry { name, value, tolerance, bound, passed });
        self
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.value)
    }
}
