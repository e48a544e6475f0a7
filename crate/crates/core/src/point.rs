use std::collections::BTreeMap;
use std::fmt;

use crate::chart::Chart;

/// An evaluation point: a finite real per coordinate name. Fields only read
/// the coordinates they use, so a product-chart point works unchanged for
/// fields living on either factor.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Point {
    vals: BTreeMap<String, f64>,
}

impl Point {
    pub fn new() -> Self {
        Point::default()
    }

    pub fn from_pairs(pairs: &[(&str, f64)]) -> Self {
        let mut p = Point::new();
        for (k, v) in pairs {
            p.vals.insert((*k).to_string(), *v);
        }
        p
    }

    /// Point on a chart from coordinate values in chart order.
    pub fn on_chart(chart: &Chart, coords: &[f64]) -> Self {
        assert_eq!(coords.len(), chart.dim(), "coordinate count mismatch");
        let mut p = Point::new();
        for (name, v) in chart.coords().iter().zip(coords) {
            p.vals.insert(name.clone(), *v);
        }
        p
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.vals.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.vals.get(name).copied()
    }

    /// Union of two points; `other` wins on shared names.
    pub fn merged(&self, other: &Point) -> Point {
        let mut vals = self.vals.clone();
        for (k, v) in &other.vals {
            vals.insert(k.clone(), *v);
        }
        Point { vals }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, (k, v)) in self.vals.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        write!(f, ")")
    }
}
