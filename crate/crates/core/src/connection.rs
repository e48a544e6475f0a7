//! The contravariant Levi-Civita connection of a (bivector, cometric) pair
//! and its derived objects: curvature, Ricci and scalar curvature, the
//! Laplacian and Hessian of a function, and the compatibility residual
//! `DΠ`.
//!
//! Coefficients `Γ^{ij}_k` (with `D_{dx^i} dx^j = Γ^{ij}_k dx^k`) are solved
//! from the six-term Koszul identity
//!
//! ```text
//! 2 g(D_α β, γ) =   ♯(α) g(β,γ) + ♯(β) g(α,γ) − ♯(γ) g(α,β)
//!                 + g([α,β], γ) − g([β,γ], α) + g([γ,α], β)
//! ```
//!
//! instantiated on coordinate covectors, where the coordinate brackets are
//! `[dx^i, dx^j] = d(Π^{ij})`. The linear solve against `[g^{lk}]` is done
//! symbolically through the adjugate inverse, so every derived object keeps
//! exact partial derivatives; numbers only appear at evaluation points.
//!
//! Traces over "any orthonormal coframe" are implemented as inverse-cometric
//! contractions, which insert the signature factors of an indefinite metric
//! automatically.

use std::sync::Arc;
use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::chart::{expect_same_chart, Chart};
use crate::error::Result;
use crate::expr::{Evaluator, ScalarField};
use crate::fields::{BivectorField, Cometric, CovectorField};
use crate::geometry::{differential, j_endomorphism, koszul_bracket, sharp_coordinate_apply};
use crate::point::Point;

/// Contravariant Christoffel symbols of a (Π, g) pair on one chart.
#[derive(Debug, Clone)]
pub struct ConnectionCoefficients {
    chart: Arc<Chart>,
    pi: BivectorField,
    gamma: Vec<ScalarField>, // [i][j][k] flattened: Γ^{ij}_k
    coord_curvature: OnceLock<Vec<CovectorField>>, // [i][j][k]: R(dx^i,dx^j)dx^k
}

/// Coordinate curvature values at one point: `R(dx^i,dx^j)dx^k = R^{ijk}_l dx^l`.
#[derive(Debug, Clone)]
pub struct CurvatureAtPoint {
    pub point: Point,
    dim: usize,
    components: Vec<f64>, // [i][j][k][l]
}

impl CurvatureAtPoint {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let d = self.dim;
        self.components[((i * d + j) * d + k) * d + l]
    }
}

/// Solve the Koszul identity for all coefficients `Γ^{ij}_k`.
pub fn levi_civita(pi: &BivectorField, g: &Cometric) -> Result<ConnectionCoefficients> {
    expect_same_chart(pi.chart(), g.chart())?;
    let chart = pi.chart().clone();
    let dim = chart.dim();
    let coords = chart.coords();

    // d(Π^{ij}) components: dpi[i][j][m] = ∂_m Π^{ij}
    let mut dpi = vec![ScalarField::zero(); dim * dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let pij = pi.component(i, j);
            if pij.is_zero_const() {
                continue;
            }
            for (m, name) in coords.iter().enumerate() {
                dpi[(i * dim + j) * dim + m] = pij.differentiate(name);
            }
        }
    }
    // g(d(Π^{ij}), dx^k) = Σ_m ∂_m Π^{ij} g^{mk}
    let bracket_pair = |i: usize, j: usize, k: usize| -> ScalarField {
        let mut acc = ScalarField::zero();
        for m in 0..dim {
            let d = &dpi[(i * dim + j) * dim + m];
            if d.is_zero_const() {
                continue;
            }
            let gmk = g.component(m, k);
            if gmk.is_zero_const() {
                continue;
            }
            acc = &acc + &(d * gmk);
        }
        acc
    };

    let mut gamma = vec![ScalarField::zero(); dim * dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            // rhs_k = the six Koszul terms with (α, β, γ) = (dx^i, dx^j, dx^k)
            let mut rhs = Vec::with_capacity(dim);
            for k in 0..dim {
                let mut acc = sharp_coordinate_apply(pi, i, g.component(j, k));
                acc = &acc + &sharp_coordinate_apply(pi, j, g.component(i, k));
                acc = &acc - &sharp_coordinate_apply(pi, k, g.component(i, j));
                acc = &acc + &bracket_pair(i, j, k);
                acc = &acc - &bracket_pair(j, k, i);
                acc = &acc + &bracket_pair(k, i, j);
                rhs.push(acc);
            }
            // 2 Γ^{ij}_l g^{lk} = rhs_k  =>  Γ^{ij}_l = ½ Σ_k (g^{-1})_{lk} rhs_k
            for l in 0..dim {
                let mut acc = ScalarField::zero();
                for (k, r) in rhs.iter().enumerate() {
                    if r.is_zero_const() {
                        continue;
                    }
                    acc = &acc + &(g.inverse_component(l, k) * r);
                }
                gamma[(i * dim + j) * dim + l] = acc.scale(0.5);
            }
        }
    }

    Ok(ConnectionCoefficients {
        chart,
        pi: pi.clone(),
        gamma,
        coord_curvature: OnceLock::new(),
    })
}

impl ConnectionCoefficients {
    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn pi(&self) -> &BivectorField {
        &self.pi
    }

    /// `Γ^{ij}_k`.
    pub fn gamma(&self, i: usize, j: usize, k: usize) -> &ScalarField {
        let d = self.dim();
        &self.gamma[(i * d + j) * d + k]
    }

    /// `D_{dx^i} dx^j` as a covector field.
    pub fn derivative_covector(&self, i: usize, j: usize) -> CovectorField {
        let d = self.dim();
        let components = (0..d).map(|k| self.gamma(i, j, k).clone()).collect();
        CovectorField::new(self.chart.clone(), components).expect("component count matches")
    }

    /// Curvature on coordinate covectors, built once and cached.
    fn coordinate_curvature(&self) -> &[CovectorField] {
        self.coord_curvature.get_or_init(|| {
            let d = self.dim();
            let basis: Vec<CovectorField> = (0..d)
                .map(|i| CovectorField::coordinate(self.chart.clone(), i))
                .collect();
            let mut out = Vec::with_capacity(d * d * d);
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        let r = curvature(self, &basis[i], &basis[j], &basis[k])
                            .expect("basis covectors share the chart");
                        out.push(r);
                    }
                }
            }
            out
        })
    }
}

/// Apply the connection: tensorial in `α`, Leibniz in `β`:
/// `(D_α β)_k = Σ_{i,j} α_i β_j Γ^{ij}_k + Σ_i α_i ♯(dx^i)(β_k)`.
pub fn apply_connection(
    conn: &ConnectionCoefficients,
    alpha: &CovectorField,
    beta: &CovectorField,
) -> Result<CovectorField> {
    expect_same_chart(&conn.chart, alpha.chart())?;
    expect_same_chart(&conn.chart, beta.chart())?;
    let dim = conn.dim();
    let mut components = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut acc = ScalarField::zero();
        for i in 0..dim {
            let ai = alpha.component(i);
            if ai.is_zero_const() {
                continue;
            }
            for j in 0..dim {
                let bj = beta.component(j);
                if bj.is_zero_const() {
                    continue;
                }
                let gijk = conn.gamma(i, j, k);
                if gijk.is_zero_const() {
                    continue;
                }
                acc = &acc + &(&(ai * bj) * gijk);
            }
            let leib = sharp_coordinate_apply(&conn.pi, i, beta.component(k));
            if !leib.is_zero_const() {
                acc = &acc + &(ai * &leib);
            }
        }
        components.push(acc);
    }
    CovectorField::new(conn.chart.clone(), components)
}

/// Curvature `R(α,β)γ = D_α D_β γ − D_β D_α γ − D_{[α,β]_Π} γ`.
pub fn curvature(
    conn: &ConnectionCoefficients,
    alpha: &CovectorField,
    beta: &CovectorField,
    gamma: &CovectorField,
) -> Result<CovectorField> {
    let dbg = apply_connection(conn, beta, gamma)?;
    let dadbg = apply_connection(conn, alpha, &dbg)?;
    let dag = apply_connection(conn, alpha, gamma)?;
    let dbdag = apply_connection(conn, beta, &dag)?;
    let br = koszul_bracket(&conn.pi, alpha, beta)?;
    let dbrg = apply_connection(conn, &br, gamma)?;
    Ok(&(&dadbg - &dbdag) - &dbrg)
}

/// All coordinate curvature components at a point.
pub fn curvature_at(conn: &ConnectionCoefficients, p: &Point) -> Result<CurvatureAtPoint> {
    let d = conn.dim();
    let coord = conn.coordinate_curvature();
    let mut ev = Evaluator::new(p);
    let mut components = Vec::with_capacity(d * d * d * d);
    for r in coord {
        for l in 0..d {
            components.push(ev.eval(r.component(l))?);
        }
    }
    Ok(CurvatureAtPoint {
        point: p.clone(),
        dim: d,
        components,
    })
}

fn eval_covector(cv: &CovectorField, ev: &mut Evaluator) -> Result<Vec<f64>> {
    cv.eval(ev)
}

/// Ricci curvature at a point, as the signature-aware coordinate trace
/// `Ric(α,β) = Σ_{k,l} g̃_{kl} g(R(α, dx^k) dx^l, β)` with `g̃` the pointwise
/// inverse of `[g^{kl}]`.
pub fn ricci(
    conn: &ConnectionCoefficients,
    g: &Cometric,
    alpha: &CovectorField,
    beta: &CovectorField,
    p: &Point,
) -> Result<f64> {
    let dim = conn.dim();
    let m = ricci_matrix_at(conn, g, p)?;
    let mut ev = Evaluator::new(p);
    let a = eval_covector(alpha, &mut ev)?;
    let b = eval_covector(beta, &mut ev)?;
    let mut total = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            total += a[i] * b[j] * m[(i, j)];
        }
    }
    Ok(total)
}

/// The matrix `Ric(dx^i, dx^j)(p)`.
pub fn ricci_matrix_at(
    conn: &ConnectionCoefficients,
    g: &Cometric,
    p: &Point,
) -> Result<DMatrix<f64>> {
    expect_same_chart(&conn.chart, g.chart())?;
    let dim = conn.dim();
    let inv = g.inverse_at(p)?;
    let gm = g.matrix_at(p)?;
    let r = curvature_at(conn, p)?;
    let mut out = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut total = 0.0;
            for k in 0..dim {
                for l in 0..dim {
                    if inv[(k, l)] == 0.0 {
                        continue;
                    }
                    // g(R(dx^i, dx^k) dx^l, dx^j) = Σ_m R^{ikl}_m g^{mj}
                    let mut paired = 0.0;
                    for m in 0..dim {
                        paired += r.get(i, k, l, m) * gm[(m, j)];
                    }
                    total += inv[(k, l)] * paired;
                }
            }
            out[(i, j)] = total;
        }
    }
    Ok(out)
}

/// Scalar curvature `S = Σ_{i,j} g̃_{ij} Ric(dx^i, dx^j)` at a point.
pub fn scalar_curvature(conn: &ConnectionCoefficients, g: &Cometric, p: &Point) -> Result<f64> {
    let dim = conn.dim();
    let inv = g.inverse_at(p)?;
    let ric = ricci_matrix_at(conn, g, p)?;
    let mut total = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            total += inv[(i, j)] * ric[(i, j)];
        }
    }
    Ok(total)
}

/// Contravariant Laplacian
/// `Δ(f) = Σ_{k,l} g̃_{kl} g(D_{dx^k}(J df), dx^l)` at a point.
pub fn laplacian(
    conn: &ConnectionCoefficients,
    g: &Cometric,
    f: &ScalarField,
    p: &Point,
) -> Result<f64> {
    let dim = conn.dim();
    let jdf = j_endomorphism(&conn.pi, g, &differential(f, &conn.chart))?;
    let inv = g.inverse_at(p)?;
    let mut ev = Evaluator::new(p);
    let mut total = 0.0;
    for k in 0..dim {
        let dk = apply_connection(conn, &CovectorField::coordinate(conn.chart.clone(), k), &jdf)?;
        for l in 0..dim {
            if inv[(k, l)] == 0.0 {
                continue;
            }
            let paired = ev.eval(&g.pair_coordinate(&dk, l))?;
            total += inv[(k, l)] * paired;
        }
    }
    Ok(total)
}

/// Hessian `H^f(α,β) = −g(D_α(J df), β)`; its signature-aware trace equals
/// `−Δ(f)` by construction.
pub fn hessian(
    conn: &ConnectionCoefficients,
    g: &Cometric,
    f: &ScalarField,
    alpha: &CovectorField,
    beta: &CovectorField,
    p: &Point,
) -> Result<f64> {
    let jdf = j_endomorphism(&conn.pi, g, &differential(f, &conn.chart))?;
    let da = apply_connection(conn, alpha, &jdf)?;
    let val = g.apply(&da, beta)?.evaluate(p)?;
    Ok(-val)
}

/// Max over `(i,j,k)` of the torsion identity residual at `p`:
/// `|Γ^{ij}_k − Γ^{ji}_k − ∂_k Π^{ij}|`, i.e. how far
/// `D_{dx^i}dx^j − D_{dx^j}dx^i` is from `[dx^i, dx^j]_Π`.
pub fn torsion_residual_at(conn: &ConnectionCoefficients, p: &Point) -> Result<f64> {
    let dim = conn.dim();
    let coords = conn.chart.coords();
    let mut ev = Evaluator::new(p);
    let mut max = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let pij = conn.pi.component(i, j);
            for (k, name) in coords.iter().enumerate() {
                let lhs = ev.eval(conn.gamma(i, j, k))? - ev.eval(conn.gamma(j, i, k))?;
                let rhs = ev.eval(&pij.differentiate(name))?;
                max = max.max((lhs - rhs).abs());
            }
        }
    }
    Ok(max)
}

/// Max over `(i,j,k)` of the metric-condition residual at `p`:
/// `|♯(dx^i)(g^{jk}) − Σ_l (Γ^{ij}_l g^{lk} + Γ^{ik}_l g^{jl})|`.
pub fn metric_residual_at(
    conn: &ConnectionCoefficients,
    g: &Cometric,
    p: &Point,
) -> Result<f64> {
    let dim = conn.dim();
    let mut ev = Evaluator::new(p);
    let mut max = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                let lhs = ev.eval(&sharp_coordinate_apply(&conn.pi, i, g.component(j, k)))?;
                let mut rhs = 0.0;
                for l in 0..dim {
                    rhs += ev.eval(conn.gamma(i, j, l))? * ev.eval(g.component(l, k))?;
                    rhs += ev.eval(conn.gamma(i, k, l))? * ev.eval(g.component(j, l))?;
                }
                max = max.max((lhs - rhs).abs());
            }
        }
    }
    Ok(max)
}

/// Components `(D_{dx^i} Π)(dx^j, dx^k)(p)`; all zero (within tolerance)
/// certifies a pseudo-Riemannian Poisson structure at the sampled point:
/// `♯(dx^i)(Π^{jk}) − Σ_l Γ^{ij}_l Π^{lk} − Σ_l Γ^{ik}_l Π^{jl}`.
pub fn compatibility_residual(
    conn: &ConnectionCoefficients,
    p: &Point,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let dim = conn.dim();
    let pi = &conn.pi;
    let mut ev = Evaluator::new(p);
    let mut out = vec![vec![vec![0.0; dim]; dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                let mut total = ev.eval(&sharp_coordinate_apply(pi, i, &pi.component(j, k)))?;
                for l in 0..dim {
                    let plk = pi.component(l, k);
                    if !plk.is_zero_const() {
                        total -= ev.eval(conn.gamma(i, j, l))? * ev.eval(&plk)?;
                    }
                    let pjl = pi.component(j, l);
                    if !pjl.is_zero_const() {
                        total -= ev.eval(conn.gamma(i, k, l))? * ev.eval(&pjl)?;
                    }
                }
                out[i][j][k] = total;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;

    fn sf(text: &str, chart: &Chart) -> ScalarField {
        ScalarField::parse(text, chart.coords()).unwrap()
    }

    /// The plane with Π^{xy} = x and the Euclidean cometric; its geometry
    /// is known in closed form and is re-derived by brute force in the
    /// integration tests.
    fn poisson_x() -> (Arc<Chart>, BivectorField, Cometric) {
        let ch = Chart::new("plane", &["x", "y"]).unwrap();
        let pi = BivectorField::from_entries(ch.clone(), vec![(0, 1, sf("x", &ch))]).unwrap();
        let g = Cometric::identity(ch.clone());
        (ch, pi, g)
    }

    fn sample_points() -> Vec<Point> {
        (0..25)
            .map(|k| {
                let t = k as f64 * 0.16 - 2.0;
                Point::from_pairs(&[("x", 1.0 + 0.4 * t), ("y", -1.0 + 0.3 * t)])
            })
            .collect()
    }

    #[test]
    fn flat_connection_vanishes() {
        let ch = Chart::new("plane", &["x", "y"]).unwrap();
        let pi =
            BivectorField::from_entries(ch.clone(), vec![(0, 1, ScalarField::one())]).unwrap();
        let g = Cometric::identity(ch.clone());
        let conn = levi_civita(&pi, &g).unwrap();
        let p = Point::from_pairs(&[("x", 0.9), ("y", -0.4)]);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    assert_eq!(conn.gamma(i, j, k).evaluate(&p).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn poisson_x_connection_values() {
        let (_, pi, g) = poisson_x();
        let conn = levi_civita(&pi, &g).unwrap();
        for p in sample_points() {
            // D_dx dx = -dy, D_dx dy = dx, D_dy dx = 0, D_dy dy = 0
            let cases = [
                ((0, 0), [0.0, -1.0]),
                ((0, 1), [1.0, 0.0]),
                ((1, 0), [0.0, 0.0]),
                ((1, 1), [0.0, 0.0]),
            ];
            for ((i, j), expected) in cases {
                for k in 0..2 {
                    let v = conn.gamma(i, j, k).evaluate(&p).unwrap();
                    assert!(
                        (v - expected[k]).abs() < 1e-12,
                        "Γ^{{{i}{j}}}_{k} = {v} at {p}"
                    );
                }
            }
        }
    }

    #[test]
    fn apply_connection_is_tensorial_in_first_slot() {
        let (ch, pi, g) = poisson_x();
        let conn = levi_civita(&pi, &g).unwrap();
        let dx = CovectorField::coordinate(ch.clone(), 0);
        let dy = CovectorField::coordinate(ch.clone(), 1);
        let xdx = dx.scaled(&sf("x", &ch));
        let lhs = apply_connection(&conn, &xdx, &dy).unwrap();
        let rhs = apply_connection(&conn, &dx, &dy).unwrap().scaled(&sf("x", &ch));
        for p in sample_points() {
            for k in 0..2 {
                let a = lhs.component(k).evaluate(&p).unwrap();
                let b = rhs.component(k).evaluate(&p).unwrap();
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn apply_connection_leibniz_example() {
        // D_dx (y dy) = y dx + x dy on the Π^{xy} = x plane.
        let (ch, pi, g) = poisson_x();
        let conn = levi_civita(&pi, &g).unwrap();
        let dx = CovectorField::coordinate(ch.clone(), 0);
        let ydy = CovectorField::coordinate(ch.clone(), 1).scaled(&sf("y", &ch));
        let d = apply_connection(&conn, &dx, &ydy).unwrap();
        for p in sample_points() {
            let (x, y) = (p.get("x").unwrap(), p.get("y").unwrap());
            assert!((d.component(0).evaluate(&p).unwrap() - y).abs() < 1e-12);
            assert!((d.component(1).evaluate(&p).unwrap() - x).abs() < 1e-12);
        }
    }

    #[test]
    fn curvature_values_on_poisson_x() {
        let (ch, pi, g) = poisson_x();
        let conn = levi_civita(&pi, &g).unwrap();
        let dx = CovectorField::coordinate(ch.clone(), 0);
        let dy = CovectorField::coordinate(ch.clone(), 1);
        let rdy = curvature(&conn, &dx, &dy, &dy).unwrap();
        let rdx = curvature(&conn, &dx, &dy, &dx).unwrap();
        for p in sample_points() {
            // R(dx,dy)dy = -dx, R(dx,dy)dx = dy
            assert!((rdy.component(0).evaluate(&p).unwrap() + 1.0).abs() < 1e-12);
            assert!(rdy.component(1).evaluate(&p).unwrap().abs() < 1e-12);
            assert!(rdx.component(0).evaluate(&p).unwrap().abs() < 1e-12);
            assert!((rdx.component(1).evaluate(&p).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ricci_and_scalar_on_poisson_x() {
        let (ch, pi, g) = poisson_x();
        let conn = levi_civita(&pi, &g).unwrap();
        let dx = CovectorField::coordinate(ch.clone(), 0);
        let dy = CovectorField::coordinate(ch.clone(), 1);
        for p in sample_points() {
            assert!((ricci(&conn, &g, &dx, &dx, &p).unwrap() + 1.0).abs() < 1e-12);
            assert!((ricci(&conn, &g, &dy, &dy, &p).unwrap() + 1.0).abs() < 1e-12);
            assert!(ricci(&conn, &g, &dx, &dy, &p).unwrap().abs() < 1e-12);
            assert!((scalar_curvature(&conn, &g, &p).unwrap() + 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn one_dimensional_chart_is_flat() {
        let ch = Chart::new("line", &["t"]).unwrap();
        let pi = BivectorField::zero(ch.clone());
        let g = Cometric::from_entries(ch.clone(), vec![(0, 0, sf("-1", &ch))]).unwrap();
        let conn = levi_civita(&pi, &g).unwrap();
        let p = Point::from_pairs(&[("t", 0.8)]);
        assert_eq!(conn.gamma(0, 0, 0).evaluate(&p).unwrap(), 0.0);
        assert_eq!(scalar_curvature(&conn, &g, &p).unwrap(), 0.0);
    }

    #[test]
    fn signature_flip_keeps_flat_space_flat() {
        let ch = Chart::new("mink", &["u", "v"]).unwrap();
        let pi =
            BivectorField::from_entries(ch.clone(), vec![(0, 1, ScalarField::one())]).unwrap();
        let g = Cometric::from_entries(
            ch.clone(),
            vec![(0, 0, sf("-1", &ch)), (1, 1, sf("1", &ch))],
        )
        .unwrap();
        let conn = levi_civita(&pi, &g).unwrap();
        let p = Point::from_pairs(&[("u", 0.3), ("v", 0.9)]);
        let ric = ricci_matrix_at(&conn, &g, &p).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(ric[(i, j)], 0.0);
            }
        }
        assert_eq!(scalar_curvature(&conn, &g, &p).unwrap(), 0.0);
    }

    #[test]
    fn laplacian_of_casimir_vanishes_and_poisson_x_example() {
        let (ch, pi, g) = poisson_x();
        let conn = levi_civita(&pi, &g).unwrap();
        let f = sf("x", &ch);
        for p in sample_points() {
            assert!(laplacian(&conn, &g, &f, &p).unwrap().abs() < 1e-12);
        }
        // constants are Casimir for any Π
        let c = ScalarField::constant(3.5);
        let p = Point::from_pairs(&[("x", 1.2), ("y", 0.2)]);
        assert_eq!(laplacian(&conn, &g, &c, &p).unwrap(), 0.0);
    }

    #[test]
    fn laplacian_is_linear() {
        let (ch, pi, g) = poisson_x();
        let conn = levi_civita(&pi, &g).unwrap();
        let f = sf("x^2*y", &ch);
        let h = sf("sin(x) + y^2", &ch);
        let combo = &f.scale(2.5) + &h.scale(-1.25);
        for p in sample_points().into_iter().take(5) {
            let lf = laplacian(&conn, &g, &f, &p).unwrap();
            let lh = laplacian(&conn, &g, &h, &p).unwrap();
            let lc = laplacian(&conn, &g, &combo, &p).unwrap();
            assert!((lc - (2.5 * lf - 1.25 * lh)).abs() < 1e-10);
        }
    }

    #[test]
    fn hessian_trace_matches_laplacian() {
        let (ch, pi, g) = poisson_x();
        let conn = levi_civita(&pi, &g).unwrap();
        let f = sf("x^2*y + sin(y)", &ch);
        let basis: Vec<CovectorField> = (0..2)
            .map(|i| CovectorField::coordinate(ch.clone(), i))
            .collect();
        for p in sample_points().into_iter().take(5) {
            let inv = g.inverse_at(&p).unwrap();
            let mut trace = 0.0;
            for k in 0..2 {
                for l in 0..2 {
                    trace += inv[(k, l)] * hessian(&conn, &g, &f, &basis[k], &basis[l], &p).unwrap();
                }
            }
            let lap = laplacian(&conn, &g, &f, &p).unwrap();
            assert!((trace + lap).abs() < 1e-10, "trace {trace} vs -Δ {}", -lap);
        }
    }

    #[test]
    fn hessian_flat_example() {
        // Π^{xy} = 1, g Euclidean, f = x²: J df = 2x dy and H(dx, dy) = 0.
        let ch = Chart::new("plane", &["x", "y"]).unwrap();
        let pi =
            BivectorField::from_entries(ch.clone(), vec![(0, 1, ScalarField::one())]).unwrap();
        let g = Cometric::identity(ch.clone());
        let conn = levi_civita(&pi, &g).unwrap();
        let f = sf("x^2", &ch);
        let dx = CovectorField::coordinate(ch.clone(), 0);
        let dy = CovectorField::coordinate(ch.clone(), 1);
        let p = Point::from_pairs(&[("x", 1.7), ("y", -0.3)]);
        assert_eq!(hessian(&conn, &g, &f, &dx, &dy, &p).unwrap(), 0.0);
    }

    #[test]
    fn trace_operations_reject_singular_cometric_points() {
        let ch = Chart::new("plane", &["x", "y"]).unwrap();
        let pi =
            BivectorField::from_entries(ch.clone(), vec![(0, 1, ScalarField::one())]).unwrap();
        // degenerate along x = 0
        let g = Cometric::from_entries(
            ch.clone(),
            vec![(0, 0, sf("x^2", &ch)), (1, 1, sf("1", &ch))],
        )
        .unwrap();
        let conn = levi_civita(&pi, &g).unwrap();
        let p = Point::from_pairs(&[("x", 0.0), ("y", 1.0)]);
        assert!(matches!(
            scalar_curvature(&conn, &g, &p),
            Err(crate::error::GeomError::SingularCometric { .. })
        ));
        assert!(ricci_matrix_at(&conn, &g, &p).is_err());
        let f = sf("x + y", &ch);
        assert!(laplacian(&conn, &g, &f, &p).is_err());
    }

    #[test]
    fn compatibility_residual_detects_poisson_x() {
        let (_, pi, g) = poisson_x();
        let conn = levi_civita(&pi, &g).unwrap();
        let p = Point::from_pairs(&[("x", 1.5), ("y", 0.4)]);
        let res = compatibility_residual(&conn, &p).unwrap();
        // (D_dy Π)(dx, dy) = -x
        assert!((res[1][0][1] + 1.5).abs() < 1e-12);
    }

    #[test]
    fn compatibility_residual_of_constant_pair_vanishes() {
        let ch = Chart::new("plane", &["x", "y"]).unwrap();
        let pi =
            BivectorField::from_entries(ch.clone(), vec![(0, 1, ScalarField::one())]).unwrap();
        let g = Cometric::identity(ch.clone());
        let conn = levi_civita(&pi, &g).unwrap();
        let p = Point::from_pairs(&[("x", -0.8), ("y", 1.1)]);
        let res = compatibility_residual(&conn, &p).unwrap();
        for plane in &res {
            for row in plane {
                for v in row {
                    assert_eq!(*v, 0.0);
                }
            }
        }
        let pi0 = BivectorField::zero(ch.clone());
        let conn0 = levi_civita(&pi0, &g).unwrap();
        let res0 = compatibility_residual(&conn0, &p).unwrap();
        assert!(res0.iter().flatten().flatten().all(|v| *v == 0.0));
    }
}
