use std::sync::Arc;

use crate::error::{GeomError, Result};

/// A coordinate chart: an ordered list of distinct coordinate names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chart {
    name: String,
    coords: Vec<String>,
}

impl Chart {
    pub fn new(name: impl Into<String>, coords: &[&str]) -> Result<Arc<Chart>> {
        Self::from_names(name, coords.iter().map(|s| s.to_string()).collect())
    }

    pub fn from_names(name: impl Into<String>, coords: Vec<String>) -> Result<Arc<Chart>> {
        if coords.is_empty() {
            return Err(GeomError::invalid("chart must have at least one coordinate"));
        }
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].contains(c) {
                return Err(GeomError::invalid(format!(
                    "duplicate coordinate name `{c}`"
                )));
            }
        }
        Ok(Arc::new(Chart {
            name: name.into(),
            coords,
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &str {
        &self.coords[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    /// Product chart: base coordinates followed by fiber coordinates.
    /// Fails on a name collision.
    pub fn product(base: &Arc<Chart>, fiber: &Arc<Chart>) -> Result<Arc<Chart>> {
        let mut coords = base.coords.clone();
        for c in &fiber.coords {
            if coords.contains(c) {
                return Err(GeomError::invalid(format!(
                    "coordinate name `{c}` appears in both factors"
                )));
            }
            coords.push(c.clone());
        }
        Chart::from_names(format!("{}x{}", base.name, fiber.name), coords)
    }
}

/// Guard for operations that require both arguments on one chart.
pub fn expect_same_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(GeomError::ChartMismatch {
            expected: a.name.clone(),
            actual: b.name.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_coordinates() {
        assert!(Chart::new("bad", &["x", "x"]).is_err());
        assert!(Chart::new("empty", &[]).is_err());
    }

    #[test]
    fn product_concatenates_and_rejects_collisions() {
        let b = Chart::new("b", &["x", "y"]).unwrap();
        let f = Chart::new("f", &["z"]).unwrap();
        let p = Chart::product(&b, &f).unwrap();
        assert_eq!(p.coords(), &["x", "y", "z"]);
        let clash = Chart::new("g", &["y"]).unwrap();
        assert!(Chart::product(&b, &clash).is_err());
    }
}
