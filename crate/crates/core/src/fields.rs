//! Tensor fields in the coordinate (co)frame: covectors, vectors,
//! antisymmetric bivectors and symmetric cometrics, all with `ScalarField`
//! components.

use std::ops;
use std::sync::Arc;
use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::chart::{expect_same_chart, Chart};
use crate::error::{GeomError, Result};
use crate::expr::{Evaluator, ScalarField};
use crate::point::Point;

/// Points where the cometric matrix exceeds this condition estimate are
/// rejected: traces computed there are meaningless.
pub const CONDITION_LIMIT: f64 = 1e12;

fn check_components(chart: &Arc<Chart>, components: &[ScalarField]) -> Result<()> {
    if components.len() != chart.dim() {
        return Err(GeomError::invalid(format!(
            "expected {} components on chart `{}`, got {}",
            chart.dim(),
            chart.name(),
            components.len()
        )));
    }
    Ok(())
}

/// A 1-form `α = α_i dx^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovectorField {
    chart: Arc<Chart>,
    components: Vec<ScalarField>,
}

impl CovectorField {
    pub fn new(chart: Arc<Chart>, components: Vec<ScalarField>) -> Result<Self> {
        check_components(&chart, &components)?;
        Ok(CovectorField { chart, components })
    }

    /// The coordinate covector `dx^i`.
    pub fn coordinate(chart: Arc<Chart>, i: usize) -> Self {
        let components = (0..chart.dim())
            .map(|k| ScalarField::constant(if k == i { 1.0 } else { 0.0 }))
            .collect();
        CovectorField { chart, components }
    }

    pub fn zero(chart: Arc<Chart>) -> Self {
        let components = vec![ScalarField::zero(); chart.dim()];
        CovectorField { chart, components }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    /// Pointwise multiple `h · α`.
    pub fn scaled(&self, h: &ScalarField) -> Self {
        CovectorField {
            chart: self.chart.clone(),
            components: self.components.iter().map(|c| h * c).collect(),
        }
    }

    pub fn eval(&self, ev: &mut Evaluator) -> Result<Vec<f64>> {
        self.components.iter().map(|c| ev.eval(c)).collect()
    }
}

impl ops::Add<&CovectorField> for &CovectorField {
    type Output = CovectorField;
    fn add(self, rhs: &CovectorField) -> CovectorField {
        assert_eq!(self.chart, rhs.chart, "covector chart mismatch");
        CovectorField {
            chart: self.chart.clone(),
            components: self
                .components
                .iter()
                .zip(&rhs.components)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl ops::Sub<&CovectorField> for &CovectorField {
    type Output = CovectorField;
    fn sub(self, rhs: &CovectorField) -> CovectorField {
        assert_eq!(self.chart, rhs.chart, "covector chart mismatch");
        CovectorField {
            chart: self.chart.clone(),
            components: self
                .components
                .iter()
                .zip(&rhs.components)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl ops::Neg for &CovectorField {
    type Output = CovectorField;
    fn neg(self) -> CovectorField {
        CovectorField {
            chart: self.chart.clone(),
            components: self.components.iter().map(|c| -c).collect(),
        }
    }
}

/// A vector field `X = X^k ∂_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    chart: Arc<Chart>,
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(chart: Arc<Chart>, components: Vec<ScalarField>) -> Result<Self> {
        check_components(&chart, &components)?;
        Ok(VectorField { chart, components })
    }

    pub fn zero(chart: Arc<Chart>) -> Self {
        let components = vec![ScalarField::zero(); chart.dim()];
        VectorField { chart, components }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    /// Directional derivative `X(f) = Σ_k X^k ∂_k f`.
    pub fn apply_to(&self, f: &ScalarField) -> ScalarField {
        let mut acc = ScalarField::zero();
        for (k, name) in self.chart.coords().iter().enumerate() {
            acc = &acc + &(&self.components[k] * &f.differentiate(name));
        }
        acc
    }

    /// Pairing `α(X) = Σ_k α_k X^k`.
    pub fn paired_with(&self, alpha: &CovectorField) -> Result<ScalarField> {
        expect_same_chart(&self.chart, alpha.chart())?;
        let mut acc = ScalarField::zero();
        for k in 0..self.chart.dim() {
            acc = &acc + &(alpha.component(k) * &self.components[k]);
        }
        Ok(acc)
    }

    pub fn eval(&self, ev: &mut Evaluator) -> Result<Vec<f64>> {
        self.components.iter().map(|c| ev.eval(c)).collect()
    }
}

fn upper_strict_len(dim: usize) -> usize {
    dim * (dim - 1) / 2
}

fn upper_strict_idx(dim: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < dim);
    i * dim - i * (i + 1) / 2 + (j - i - 1)
}

fn upper_sym_len(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

fn upper_sym_idx(dim: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < dim);
    // offset of row i is Σ_{r<i}(dim - r) = i(2 dim - i + 1)/2
    i * (2 * dim - i + 1) / 2 + (j - i)
}

/// An antisymmetric bivector field; only entries `Π^{ij}` with `i < j` are
/// stored, so `Π^{ij} + Π^{ji} = 0` holds structurally.
#[derive(Debug, Clone, PartialEq)]
pub struct BivectorField {
    chart: Arc<Chart>,
    upper: Vec<ScalarField>,
}

impl BivectorField {
    pub fn zero(chart: Arc<Chart>) -> Self {
        let upper = vec![ScalarField::zero(); upper_strict_len(chart.dim())];
        BivectorField { chart, upper }
    }

    /// Build from sparse entries `(i, j, Π^{ij})` with `i < j`; unspecified
    /// entries are zero.
    pub fn from_entries(
        chart: Arc<Chart>,
        entries: Vec<(usize, usize, ScalarField)>,
    ) -> Result<Self> {
        let dim = chart.dim();
        let mut upper = vec![ScalarField::zero(); upper_strict_len(dim)];
        let mut seen = vec![false; upper.len()];
        for (i, j, f) in entries {
            if i >= j || j >= dim {
                return Err(GeomError::invalid(format!(
                    "bivector entry ({i},{j}) must satisfy i < j < {dim}"
                )));
            }
            let idx = upper_strict_idx(dim, i, j);
            if seen[idx] {
                return Err(GeomError::invalid(format!(
                    "duplicate bivector entry ({i},{j})"
                )));
            }
            seen[idx] = true;
            upper[idx] = f;
        }
        Ok(BivectorField { chart, upper })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// `Π^{ij} = Π(dx^i, dx^j)`, with the lower triangle given by negation.
    pub fn component(&self, i: usize, j: usize) -> ScalarField {
        use std::cmp::Ordering;
        match i.cmp(&j) {
            Ordering::Less => self.upper[upper_strict_idx(self.dim(), i, j)].clone(),
            Ordering::Equal => ScalarField::zero(),
            Ordering::Greater => -&self.upper[upper_strict_idx(self.dim(), j, i)],
        }
    }

    /// `Π(α, β) = Σ_{i<j} Π^{ij} (α_i β_j − α_j β_i)`.
    pub fn apply(&self, alpha: &CovectorField, beta: &CovectorField) -> Result<ScalarField> {
        expect_same_chart(&self.chart, alpha.chart())?;
        expect_same_chart(&self.chart, beta.chart())?;
        let dim = self.dim();
        let mut acc = ScalarField::zero();
        for i in 0..dim {
            for j in (i + 1)..dim {
                let pij = &self.upper[upper_strict_idx(dim, i, j)];
                if pij.is_zero_const() {
                    continue;
                }
                let anti = &(alpha.component(i) * beta.component(j))
                    - &(alpha.component(j) * beta.component(i));
                acc = &acc + &(pij * &anti);
            }
        }
        Ok(acc)
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(|f| f.is_zero_const())
    }
}

/// A symmetric cometric `g^{ij} = g(dx^i, dx^j)`; entries with `i ≤ j` are
/// stored. Invertibility is a pointwise property checked where it is used.
#[derive(Debug, Clone)]
pub struct Cometric {
    chart: Arc<Chart>,
    upper: Vec<ScalarField>,
    inverse: OnceLock<Vec<ScalarField>>,
}

impl Cometric {
    pub fn from_entries(
        chart: Arc<Chart>,
        entries: Vec<(usize, usize, ScalarField)>,
    ) -> Result<Self> {
        let dim = chart.dim();
        let mut upper = vec![ScalarField::zero(); upper_sym_len(dim)];
        let mut seen = vec![false; upper.len()];
        for (i, j, f) in entries {
            if i > j || j >= dim {
                return Err(GeomError::invalid(format!(
                    "cometric entry ({i},{j}) must satisfy i <= j < {dim}"
                )));
            }
            let idx = upper_sym_idx(dim, i, j);
            if seen[idx] {
                return Err(GeomError::invalid(format!(
                    "duplicate cometric entry ({i},{j})"
                )));
            }
            seen[idx] = true;
            upper[idx] = f;
        }
        Ok(Cometric {
            chart,
            upper,
            inverse: OnceLock::new(),
        })
    }

    pub fn identity(chart: Arc<Chart>) -> Self {
        let dim = chart.dim();
        let entries = (0..dim).map(|i| (i, i, ScalarField::one())).collect();
        Cometric::from_entries(chart, entries).expect("diagonal entries are valid")
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn component(&self, i: usize, j: usize) -> &ScalarField {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        &self.upper[upper_sym_idx(self.dim(), i, j)]
    }

    /// `g(α, β) = Σ_{i,j} g^{ij} α_i β_j`.
    pub fn apply(&self, alpha: &CovectorField, beta: &CovectorField) -> Result<ScalarField> {
        expect_same_chart(&self.chart, alpha.chart())?;
        expect_same_chart(&self.chart, beta.chart())?;
        let dim = self.dim();
        let mut acc = ScalarField::zero();
        for i in 0..dim {
            for j in 0..dim {
                let gij = self.component(i, j);
                if gij.is_zero_const() {
                    continue;
                }
                acc = &acc + &(gij * &(alpha.component(i) * beta.component(j)));
            }
        }
        Ok(acc)
    }

    /// `g(ω, dx^k) = Σ_m ω_m g^{mk}`.
    pub fn pair_coordinate(&self, omega: &CovectorField, k: usize) -> ScalarField {
        let mut acc = ScalarField::zero();
        for m in 0..self.dim() {
            let gmk = self.component(m, k);
            if gmk.is_zero_const() {
                continue;
            }
            acc = &acc + &(omega.component(m) * gmk);
        }
        acc
    }

    /// Numeric matrix `[g^{ij}(p)]`.
    pub fn matrix_at(&self, p: &Point) -> Result<DMatrix<f64>> {
        let dim = self.dim();
        let mut ev = Evaluator::new(p);
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let v = ev.eval(self.component(i, j))?;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(m)
    }

    /// Pointwise matrix inverse with a condition-number guard.
    pub fn inverse_at(&self, p: &Point) -> Result<DMatrix<f64>> {
        let m = self.matrix_at(p)?;
        let svd = m.clone().svd(false, false);
        let (mut smax, mut smin) = (0.0f64, f64::INFINITY);
        for s in svd.singular_values.iter() {
            smax = smax.max(*s);
            smin = smin.min(*s);
        }
        let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !cond.is_finite() || cond > CONDITION_LIMIT {
            return Err(GeomError::SingularCometric {
                point: p.to_string(),
                cond,
            });
        }
        m.try_inverse().ok_or_else(|| GeomError::SingularCometric {
            point: p.to_string(),
            cond,
        })
    }

    /// Symbolic inverse entries (adjugate over determinant), packed `i ≤ j`.
    /// Exact wherever the determinant does not vanish; all entries share the
    /// same determinant subterm.
    pub fn symbolic_inverse(&self) -> &[ScalarField] {
        self.inverse.get_or_init(|| {
            let dim = self.dim();
            let all: Vec<usize> = (0..dim).collect();
            let det = symbolic_det(self, &all, &all);
            let mut inv = Vec::with_capacity(upper_sym_len(dim));
            for i in 0..dim {
                for j in i..dim {
                    // inverse[i][j] = cofactor(j, i) / det; the matrix is
                    // symmetric, so cofactor(j, i) = cofactor(i, j).
                    let rows: Vec<usize> = (0..dim).filter(|&r| r != i).collect();
                    let cols: Vec<usize> = (0..dim).filter(|&c| c != j).collect();
                    let minor = symbolic_det(self, &rows, &cols);
                    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    inv.push(&minor.scale(sign) / &det);
                }
            }
            inv
        })
    }

    /// Entry `(i, j)` of the symbolic inverse.
    pub fn inverse_component(&self, i: usize, j: usize) -> &ScalarField {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        &self.symbolic_inverse()[upper_sym_idx(self.dim(), i, j)]
    }
}

impl PartialEq for Cometric {
    fn eq(&self, other: &Self) -> bool {
        self.chart == other.chart && self.upper == other.upper
    }
}

/// Laplace expansion along the first listed row.
fn symbolic_det(g: &Cometric, rows: &[usize], cols: &[usize]) -> ScalarField {
    debug_assert_eq!(rows.len(), cols.len());
    match rows.len() {
        0 => ScalarField::one(),
        1 => g.component(rows[0], cols[0]).clone(),
        _ => {
            let mut acc = ScalarField::zero();
            let rest_rows = &rows[1..];
            for (pos, &c) in cols.iter().enumerate() {
                let entry = g.component(rows[0], c);
                if entry.is_zero_const() {
                    continue;
                }
                let sub_cols: Vec<usize> =
                    cols.iter().copied().filter(|&cc| cc != c).collect();
                let minor = symbolic_det(g, rest_rows, &sub_cols);
                let term = &entry.clone() * &minor;
                acc = if pos % 2 == 0 {
                    &acc + &term
                } else {
                    &acc - &term
                };
            }
            acc
        }
    }
}
