//! Paired observations, the raw input to plug-in estimation.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One X column and one or more Y columns of equal length; several Y columns
/// are treated as a single vector-valued Y.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    x: Column,
    y: Vec<Column>,
}

impl SampleTable {
    pub fn new(x: Column, y: Vec<Column>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::InvalidArgument("need at least one Y column".into()));
        }
        let n = x.len();
        if n < 2 {
            return Err(Error::TooFewSamples(n));
        }
        for (i, c) in y.iter().enumerate() {
            if c.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "Y column {i} has {} rows, X has {n}",
                    c.len()
                )));
            }
        }
        for c in std::iter::once(&x).chain(&y) {
            match c {
                Column::Numeric(v) => {
                    if let Some(i) = v.iter().position(|v| !v.is_finite()) {
                        return Err(Error::Parse(format!("missing or non-finite value in row {i}")));
                    }
                }
                Column::Categorical(v) => {
                    if let Some(i) = v.iter().position(|s| s.trim().is_empty()) {
                        return Err(Error::Parse(format!("missing value in row {i}")));
                    }
                }
            }
        }
        Ok(SampleTable { x, y })
    }

    pub fn pairs(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        Self::new(Column::Numeric(x), vec![Column::Numeric(y)])
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self) -> &Column {
        &self.x
    }

    pub fn y(&self) -> &[Column] {
        &self.y
    }
}
