use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A time label `t<k>`; labels are ordered by `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeLabel(pub u32);

impl fmt::Display for TimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

impl FromStr for TimeLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let digits = s.strip_prefix('t').ok_or_else(|| format!("time label `{s}` must look like t<k>"))?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("time label `{s}` must look like t<k>"));
        }
        digits.parse::<u32>().map(TimeLabel).map_err(|_| format!("time label `{s}` is out of range"))
    }
}

/// Strictly increasing list of time labels with a uniform slot dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TimeGrid {
    labels: Vec<TimeLabel>,
    dim: usize,
}

impl TimeGrid {
    pub fn new(labels: Vec<TimeLabel>, dim: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::GridMismatch("a time grid needs at least one label".into()));
        }
        if dim == 0 {
            return Err(Error::BadDimension("slot dimension must be at least 1".into()));
        }
        if let Some(w) = labels.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::GridMismatch(format!(
                "labels must be strictly increasing, got {} before {}",
                w[0], w[1]
            )));
        }
        Ok(Self { labels, dim })
    }

    /// Grid `t<first>, t<first+1>, …` with `count` labels.
    pub fn sequential(first: u32, count: usize, dim: usize) -> Result<Self> {
        let labels = (0..count as u32).map(|k| TimeLabel(first + k)).collect();
        Self::new(labels, dim)
    }

    pub fn labels(&self) -> &[TimeLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn first(&self) -> TimeLabel {
        self.labels[0]
    }

    pub fn last(&self) -> TimeLabel {
        self.labels[self.labels.len() - 1]
    }

    pub fn position(&self, label: TimeLabel) -> Option<usize> {
        self.labels.binary_search(&label).ok()
    }

    pub fn contains(&self, label: TimeLabel) -> bool {
        self.position(label).is_some()
    }

    pub fn require(&self, label: TimeLabel) -> Result<usize> {
        self.position(label).ok_or_else(|| Error::GridMismatch(format!("label {label} is not on the grid {self}")))
    }

    /// Grid restricted to `labels`, which must all be present.
    pub fn sub_grid(&self, labels: &[TimeLabel]) -> Result<TimeGrid> {
        let mut sorted = labels.to_vec();
        sorted.sort();
        sorted.dedup();
        for l in &sorted {
            self.require(*l)?;
        }
        TimeGrid::new(sorted, self.dim)
    }

    /// Labels of `self` not in `removed`, in order.
    pub fn without(&self, removed: &[TimeLabel]) -> Vec<TimeLabel> {
        self.labels.iter().copied().filter(|l| !removed.contains(l)).collect()
    }

    pub fn ensure_same(&self, other: &TimeGrid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self} vs {other}")));
        }
        Ok(())
    }
}

impl fmt::Display for TimeGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.labels.iter().map(|l| l.to_string()).collect();
        write!(f, "{{{}}}(d={})", names.join(","), self.dim)
    }
}
