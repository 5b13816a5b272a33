use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

/// How a report's margin is compared with its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// `margin <= tolerance`
    AtMost,
    /// `margin < tolerance`
    Below,
}

impl Criterion {
    pub fn holds(self, margin: f64, tolerance: f64) -> bool {
        match self {
            Criterion::AtMost => margin <= tolerance,
            Criterion::Below => margin < tolerance,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Criterion::AtMost => "<=",
            Criterion::Below => "<",
        }
    }
}

/// Outcome of one numerical property check.
///
/// `margin` is the worst value measured over all samples, oriented so that
/// larger is worse; `pass` is `criterion.holds(margin, tolerance)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub name: String,
    pub pass: bool,
    pub margin: f64,
    pub tolerance: f64,
    pub criterion: Criterion,
    pub samples: usize,
    pub params: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl PropertyReport {
    pub fn new(
        name: &str,
        margin: f64,
        tolerance: f64,
        criterion: Criterion,
        samples: usize,
    ) -> Self {
        Self {
            name: name.to_string(),
            pass: criterion.holds(margin, tolerance),
            margin,
            tolerance,
            criterion,
            samples,
            params: BTreeMap::new(),
            detail: None,
        }
    }

    /// A failing report carrying the error that stopped the check.
    pub fn failed(
        name: &str,
        tolerance: f64,
        criterion: Criterion,
        detail: impl fmt::Display,
    ) -> Self {
        Self {
            pass: false,
            detail: Some(detail.to_string()),
            ..Self::new(name, f64::INFINITY, tolerance, criterion, 0)
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_detail(mut self, detail: impl fmt::Display) -> Self {
        self.detail = Some(detail.to_string());
        self
    }

    /// Folds another report for the same property into this one: worst
    /// margin, summed sample counts, first failure detail kept.
    pub fn absorb(&mut self, other: PropertyReport) {
        debug_assert_eq!(self.name, other.name);
        if other.margin > self.margin || other.margin.is_nan() {
            self.margin = other.margin;
        }
        self.samples += other.samples;
        // parameters describe a single check; keep only those shared by all
        self.params.retain(|k, v| other.params.get(k) == Some(v));
        self.pass = self.pass && other.pass && self.criterion.holds(self.margin, self.tolerance);
        if self.detail.is_none() {
            self.detail = other.detail;
        }
    }
}

/// Merges reports with equal names, keeping first-appearance order.
pub fn merge_reports(reports: impl IntoIterator<Item = PropertyReport>) -> Vec<PropertyReport> {
    let mut out: Vec<PropertyReport> = Vec::new();
    for r in reports {
        match out.iter_mut().find(|o| o.name == r.name) {
            Some(o) => o.absorb(r),
            None => out.push(r),
        }
    }
    out
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<22} {} margin {:.3e} {} {:e} ({} samples)",
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.margin,
            self.criterion.symbol(),
            self.tolerance,
            self.samples
        )?;
        if let Some(d) = &self.detail {
            write!(f, " [{d}]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_follows_criterion() {
        assert!(PropertyReport::new("a", 1.0, 1.0, Criterion::AtMost, 1).pass);
        assert!(!PropertyReport::new("a", 1.0, 1.0, Criterion::Below, 1).pass);
        assert!(!PropertyReport::new("a", f64::NAN, 1.0, Criterion::AtMost, 1).pass);
    }

    #[test]
    fn merge_keeps_worst() {
        let merged = merge_reports([
            PropertyReport::new("a", 0.1, 1.0, Criterion::AtMost, 2),
            PropertyReport::new("b", 0.0, 1.0, Criterion::AtMost, 1),
            PropertyReport::new("a", 2.0, 1.0, Criterion::AtMost, 3),
        ]);
        assert_eq!(merged.len(), 2);
        assert_eq!(merged[0].margin, 2.0);
        assert_eq!(merged[0].samples, 5);
        assert!(!merged[0].pass);
        assert!(merged[1].pass);
    }
}
