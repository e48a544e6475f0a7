//! A chart equipped with a bivector field and a cometric, plus its
//! contravariant Levi-Civita connection.

use std::sync::Arc;

use crate::chart::{expect_same_chart, Chart};
use crate::connection::{levi_civita, ConnectionCoefficients};
use crate::error::Result;
use crate::fields::{BivectorField, Cometric};

/// `(chart, Π, g)` with the connection solved once at construction.
#[derive(Debug, Clone)]
pub struct Space {
    chart: Arc<Chart>,
    pi: BivectorField,
    g: Cometric,
    conn: ConnectionCoefficients,
}

impl Space {
    pub fn new(chart: Arc<Chart>, pi: BivectorField, g: Cometric) -> Result<Self> {
        expect_same_chart(&chart, pi.chart())?;
        expect_same_chart(&chart, g.chart())?;
        let conn = levi_civita(&pi, &g)?;
        Ok(Space { chart, pi, g, conn })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn pi(&self) -> &BivectorField {
        &self.pi
    }

    pub fn cometric(&self) -> &Cometric {
        &self.g
    }

    pub fn connection(&self) -> &ConnectionCoefficients {
        &self.conn
    }
}
