//! Pointwise-exact operations tying a bivector field and a cometric
//! together: the sharp (anchor) map, the field endomorphism J, the Koszul
//! bracket on 1-forms, the Jacobi residual of the Schouten bracket and the
//! Casimir test.

use crate::chart::{expect_same_chart, Chart};
use crate::error::Result;
use crate::expr::{Evaluator, ScalarField};
use crate::fields::{BivectorField, Cometric, CovectorField, VectorField};
use crate::point::Point;
use std::sync::Arc;

/// Exterior differential of a scalar field: `df = ∂_i f dx^i`.
pub fn differential(f: &ScalarField, chart: &Arc<Chart>) -> CovectorField {
    let components = chart
        .coords()
        .iter()
        .map(|name| f.differentiate(name))
        .collect();
    CovectorField::new(chart.clone(), components).expect("one component per coordinate")
}

/// Derivative of `f` along the image of the coordinate covector:
/// `♯(dx^i)(f) = Σ_l Π^{il} ∂_l f`.
pub(crate) fn sharp_coordinate_apply(
    pi: &BivectorField,
    i: usize,
    f: &ScalarField,
) -> ScalarField {
    let chart = pi.chart();
    let mut acc = ScalarField::zero();
    for (l, name) in chart.coords().iter().enumerate() {
        let pil = pi.component(i, l);
        if pil.is_zero_const() {
            continue;
        }
        acc = &acc + &(&pil * &f.differentiate(name));
    }
    acc
}

/// Derivative of `f` along `♯(α)` for an arbitrary covector `α`.
pub(crate) fn sharp_apply(pi: &BivectorField, alpha: &CovectorField, f: &ScalarField) -> ScalarField {
    let mut acc = ScalarField::zero();
    for i in 0..pi.dim() {
        let ai = alpha.component(i);
        if ai.is_zero_const() {
            continue;
        }
        acc = &acc + &(ai * &sharp_coordinate_apply(pi, i, f));
    }
    acc
}

/// The sharp map `♯_Π`, defined by `β(♯_Π(α)) = Π(α, β)`; in components
/// `X^k = Σ_i α_i Π^{ik}`.
pub fn sharp(pi: &BivectorField, alpha: &CovectorField) -> Result<VectorField> {
    expect_same_chart(pi.chart(), alpha.chart())?;
    let dim = pi.dim();
    let mut components = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut acc = ScalarField::zero();
        for i in 0..dim {
            let pik = pi.component(i, k);
            if pik.is_zero_const() {
                continue;
            }
            acc = &acc + &(alpha.component(i) * &pik);
        }
        components.push(acc);
    }
    VectorField::new(pi.chart().clone(), components)
}

/// The field endomorphism `J` with `Π(α, β) = g(Jα, β)`: the unique 1-form
/// `Jα` solving `g(Jα, dx^j) = Π(α, dx^j)` for every `j`. Components are
/// exact (symbolic inverse of the cometric matrix).
pub fn j_endomorphism(
    pi: &BivectorField,
    g: &Cometric,
    alpha: &CovectorField,
) -> Result<CovectorField> {
    expect_same_chart(pi.chart(), g.chart())?;
    expect_same_chart(pi.chart(), alpha.chart())?;
    let dim = pi.dim();
    // c^j = Π(α, dx^j) = Σ_i α_i Π^{ij}
    let mut c = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut acc = ScalarField::zero();
        for i in 0..dim {
            let pij = pi.component(i, j);
            if pij.is_zero_const() {
                continue;
            }
            acc = &acc + &(alpha.component(i) * &pij);
        }
        c.push(acc);
    }
    // (Jα)_l = Σ_j (g^{-1})_{lj} c^j
    let mut components = Vec::with_capacity(dim);
    for l in 0..dim {
        let mut acc = ScalarField::zero();
        for (j, cj) in c.iter().enumerate() {
            if cj.is_zero_const() {
                continue;
            }
            acc = &acc + &(g.inverse_component(l, j) * cj);
        }
        components.push(acc);
    }
    CovectorField::new(pi.chart().clone(), components)
}

/// Koszul bracket of 1-forms, computed by bilinear expansion from the
/// coordinate rules `[dx^i, dx^j]_Π = d(Π^{ij})` and the Leibniz rules:
///
/// `([α,β]_Π)_k = Σ_{i,j} α_i β_j ∂_k Π^{ij}
///              + Σ_i α_i ♯(dx^i)(β_k) − Σ_j β_j ♯(dx^j)(α_k)`.
pub fn koszul_bracket(
    pi: &BivectorField,
    alpha: &CovectorField,
    beta: &CovectorField,
) -> Result<CovectorField> {
    expect_same_chart(pi.chart(), alpha.chart())?;
    expect_same_chart(pi.chart(), beta.chart())?;
    let chart = pi.chart();
    let dim = chart.dim();
    let mut components = Vec::with_capacity(dim);
    for (k, name) in chart.coords().iter().enumerate() {
        let mut acc = ScalarField::zero();
        for i in 0..dim {
            for j in 0..dim {
                let pij = pi.component(i, j);
                if pij.is_zero_const() {
                    continue;
                }
                let d = pij.differentiate(name);
                if d.is_zero_const() {
                    continue;
                }
                acc = &acc + &(&(alpha.component(i) * beta.component(j)) * &d);
            }
        }
        acc = &acc + &sharp_apply(pi, alpha, beta.component(k));
        acc = &acc - &sharp_apply(pi, beta, alpha.component(k));
        components.push(acc);
    }
    CovectorField::new(chart.clone(), components)
}

/// Lie derivative of a 1-form along a vector field:
/// `(L_X β)_j = Σ_k (X^k ∂_k β_j + β_k ∂_j X^k)`.
pub fn lie_derivative(x: &VectorField, beta: &CovectorField) -> Result<CovectorField> {
    expect_same_chart(x.chart(), beta.chart())?;
    let chart = x.chart();
    let dim = chart.dim();
    let mut components = Vec::with_capacity(dim);
    for (j, name_j) in chart.coords().iter().enumerate() {
        let mut acc = x.apply_to(beta.component(j));
        for k in 0..dim {
            acc = &acc + &(beta.component(k) * &x.component(k).differentiate(name_j));
        }
        components.push(acc);
    }
    CovectorField::new(chart.clone(), components)
}

/// Koszul bracket straight from its definition
/// `[α,β]_Π = L_{♯α}β − L_{♯β}α − d(Π(α,β))`; used as an independent
/// cross-check of [`koszul_bracket`].
pub fn koszul_bracket_via_lie(
    pi: &BivectorField,
    alpha: &CovectorField,
    beta: &CovectorField,
) -> Result<CovectorField> {
    let xa = sharp(pi, alpha)?;
    let xb = sharp(pi, beta)?;
    let la = lie_derivative(&xa, beta)?;
    let lb = lie_derivative(&xb, alpha)?;
    let d = differential(&pi.apply(alpha, beta)?, pi.chart());
    Ok(&(&la - &lb) - &d)
}

/// Jacobi residual of the Schouten bracket at a point:
/// `J^{ijk} = Σ_l (Π^{li} ∂_l Π^{jk} + Π^{lj} ∂_l Π^{ki} + Π^{lk} ∂_l Π^{ij})`.
/// `Π` is Poisson near the point iff all components vanish.
pub fn jacobi_residual(pi: &BivectorField, p: &Point) -> Result<Vec<Vec<Vec<f64>>>> {
    let chart = pi.chart();
    let dim = chart.dim();
    let mut ev = Evaluator::new(p);
    let mut out = vec![vec![vec![0.0; dim]; dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                let mut total = 0.0;
                for (l, name) in chart.coords().iter().enumerate() {
                    for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                        let pla = pi.component(l, a);
                        if pla.is_zero_const() {
                            continue;
                        }
                        let d = pi.component(b, c).differentiate(name);
                        if d.is_zero_const() {
                            continue;
                        }
                        total += ev.eval(&pla)? * ev.eval(&d)?;
                    }
                }
                out[i][j][k] = total;
            }
        }
    }
    Ok(out)
}

/// Result of a sampled Casimir test.
#[derive(Debug, Clone)]
pub struct CasimirCheck {
    pub is_casimir: bool,
    pub max_residual: f64,
}

/// `f` is Casimir iff `♯_Π(df) = 0`; tested as `‖♯(df)(p)‖_∞ ≤ tol` over
/// the sample points.
pub fn is_casimir(
    pi: &BivectorField,
    f: &ScalarField,
    points: &[Point],
    tol: f64,
) -> Result<CasimirCheck> {
    let x = sharp(pi, &differential(f, pi.chart()))?;
    let mut max_residual = 0.0f64;
    for p in points {
        let mut ev = Evaluator::new(p);
        for v in x.eval(&mut ev)? {
            max_residual = max_residual.max(v.abs());
        }
    }
    Ok(CasimirCheck {
        is_casimir: max_residual <= tol,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;

    fn sf(text: &str, chart: &Chart) -> ScalarField {
        ScalarField::parse(text, chart.coords()).unwrap()
    }

    fn plane_pi_const() -> (Arc<Chart>, BivectorField, Cometric) {
        let ch = Chart::new("plane", &["x", "y"]).unwrap();
        let pi =
            BivectorField::from_entries(ch.clone(), vec![(0, 1, ScalarField::one())]).unwrap();
        let g = Cometric::identity(ch.clone());
        (ch, pi, g)
    }

    fn so3_star() -> (Arc<Chart>, BivectorField) {
        let ch = Chart::new("so3", &["x1", "x2", "x3"]).unwrap();
        let pi = BivectorField::from_entries(
            ch.clone(),
            vec![
                (0, 1, sf("x3", &ch)),
                (1, 2, sf("x1", &ch)),
                (0, 2, sf("-x2", &ch)), // Π^{31} = x2
            ],
        )
        .unwrap();
        (ch, pi)
    }

    #[test]
    fn sharp_of_dx_is_dy_for_unit_bivector() {
        let (ch, pi, _) = plane_pi_const();
        let dx = CovectorField::coordinate(ch.clone(), 0);
        let x = sharp(&pi, &dx).unwrap();
        let p = Point::from_pairs(&[("x", 0.3), ("y", -1.0)]);
        assert_eq!(x.component(0).evaluate(&p).unwrap(), 0.0);
        assert_eq!(x.component(1).evaluate(&p).unwrap(), 1.0);
    }

    #[test]
    fn sharp_of_zero_bivector_vanishes() {
        let ch = Chart::new("plane", &["x", "y"]).unwrap();
        let pi = BivectorField::zero(ch.clone());
        let alpha = CovectorField::new(ch.clone(), vec![sf("x^2", &ch), sf("sin(y)", &ch)]).unwrap();
        let x = sharp(&pi, &alpha).unwrap();
        let p = Point::from_pairs(&[("x", 1.0), ("y", 2.0)]);
        assert_eq!(x.component(0).evaluate(&p).unwrap(), 0.0);
        assert_eq!(x.component(1).evaluate(&p).unwrap(), 0.0);
    }

    #[test]
    fn sharp_on_so3_at_pole() {
        let (ch, pi) = so3_star();
        let dx1 = CovectorField::coordinate(ch.clone(), 0);
        let x = sharp(&pi, &dx1).unwrap();
        let p = Point::from_pairs(&[("x1", 0.0), ("x2", 0.0), ("x3", 1.0)]);
        let vals: Vec<f64> = (0..3).map(|k| x.component(k).evaluate(&p).unwrap()).collect();
        assert_eq!(vals, vec![0.0, 1.0, 0.0]); // ∂_2
    }

    #[test]
    fn j_endomorphism_euclidean_unit_bivector() {
        let (ch, pi, g) = plane_pi_const();
        let dx = CovectorField::coordinate(ch.clone(), 0);
        let dy = CovectorField::coordinate(ch.clone(), 1);
        let jdx = j_endomorphism(&pi, &g, &dx).unwrap();
        let jdy = j_endomorphism(&pi, &g, &dy).unwrap();
        let p = Point::from_pairs(&[("x", 0.2), ("y", 0.4)]);
        assert_eq!(jdx.component(0).evaluate(&p).unwrap(), 0.0);
        assert_eq!(jdx.component(1).evaluate(&p).unwrap(), 1.0); // J dx = dy
        assert_eq!(jdy.component(0).evaluate(&p).unwrap(), -1.0); // J dy = -dx
        assert_eq!(jdy.component(1).evaluate(&p).unwrap(), 0.0);
    }

    #[test]
    fn j_of_zero_bivector_is_zero() {
        let ch = Chart::new("plane", &["x", "y"]).unwrap();
        let pi = BivectorField::zero(ch.clone());
        let g = Cometric::identity(ch.clone());
        let alpha = CovectorField::new(ch.clone(), vec![sf("exp(x)", &ch), sf("y", &ch)]).unwrap();
        let j = j_endomorphism(&pi, &g, &alpha).unwrap();
        let p = Point::from_pairs(&[("x", 0.5), ("y", 0.6)]);
        assert_eq!(j.component(0).evaluate(&p).unwrap(), 0.0);
        assert_eq!(j.component(1).evaluate(&p).unwrap(), 0.0);
    }

    #[test]
    fn j_is_g_antisymmetric() {
        // g(Jα, β) + g(α, Jβ) = 0 for any inputs
        let ch = Chart::new("plane", &["x", "y"]).unwrap();
        let pi = BivectorField::from_entries(ch.clone(), vec![(0, 1, sf("x + sin(y)", &ch))])
            .unwrap();
        let g = Cometric::from_entries(
            ch.clone(),
            vec![
                (0, 0, sf("2 + x^2/4", &ch)),
                (0, 1, sf("x*y/8", &ch)),
                (1, 1, sf("3", &ch)),
            ],
        )
        .unwrap();
        let alpha = CovectorField::new(ch.clone(), vec![sf("y", &ch), sf("x*x", &ch)]).unwrap();
        let beta = CovectorField::new(ch.clone(), vec![sf("1 - x", &ch), sf("y", &ch)]).unwrap();
        let ja = j_endomorphism(&pi, &g, &alpha).unwrap();
        let jb = j_endomorphism(&pi, &g, &beta).unwrap();
        let lhs = g.apply(&ja, &beta).unwrap();
        let rhs = g.apply(&alpha, &jb).unwrap();
        for k in 0..100 {
            let t = k as f64 * 0.04 - 2.0;
            let p = Point::from_pairs(&[("x", t), ("y", 1.3 - 0.7 * t)]);
            let mut ev = Evaluator::new(&p);
            let a = ev.eval(&lhs).unwrap();
            let b = ev.eval(&rhs).unwrap();
            assert!((a + b).abs() < 1e-10 * a.abs().max(1.0), "{a} vs {b} at {p}");
        }
    }

    #[test]
    fn chart_mismatch_is_rejected() {
        let (ch, pi, g) = plane_pi_const();
        let other = Chart::new("other", &["u", "v"]).unwrap();
        let alpha = CovectorField::coordinate(other.clone(), 0);
        assert!(matches!(
            sharp(&pi, &alpha),
            Err(crate::error::GeomError::ChartMismatch { .. })
        ));
        assert!(j_endomorphism(&pi, &g, &alpha).is_err());
        let beta = CovectorField::coordinate(ch.clone(), 0);
        assert!(koszul_bracket(&pi, &beta, &alpha).is_err());
    }

    #[test]
    fn koszul_bracket_of_constant_bivector_coordinates_vanishes() {
        let (ch, pi, _) = plane_pi_const();
        let dx = CovectorField::coordinate(ch.clone(), 0);
        let dy = CovectorField::coordinate(ch.clone(), 1);
        let br = koszul_bracket(&pi, &dx, &dy).unwrap();
        let p = Point::from_pairs(&[("x", 1.0), ("y", 1.0)]);
        assert_eq!(br.component(0).evaluate(&p).unwrap(), 0.0);
        assert_eq!(br.component(1).evaluate(&p).unwrap(), 0.0);
    }

    #[test]
    fn koszul_bracket_coordinate_identity() {
        // Π^{xy} = x gives [dx, dy] = d(x) = dx.
        let ch = Chart::new("plane", &["x", "y"]).unwrap();
        let pi = BivectorField::from_entries(ch.clone(), vec![(0, 1, sf("x", &ch))]).unwrap();
        let dx = CovectorField::coordinate(ch.clone(), 0);
        let dy = CovectorField::coordinate(ch.clone(), 1);
        let br = koszul_bracket(&pi, &dx, &dy).unwrap();
        let p = Point::from_pairs(&[("x", -0.7), ("y", 2.0)]);
        assert_eq!(br.component(0).evaluate(&p).unwrap(), 1.0);
        assert_eq!(br.component(1).evaluate(&p).unwrap(), 0.0);
    }

    #[test]
    fn koszul_bracket_leibniz_example() {
        // Π^{xy} = 1: [x dx, dy] = x [dx,dy] - (♯dy)(x) dx = dx, since ♯dy = -∂x.
        let (ch, pi, _) = plane_pi_const();
        let xdx = CovectorField::new(ch.clone(), vec![sf("x", &ch), sf("0", &ch)]).unwrap();
        let dy = CovectorField::coordinate(ch.clone(), 1);
        let br = koszul_bracket(&pi, &xdx, &dy).unwrap();
        let p = Point::from_pairs(&[("x", 1.3), ("y", -0.2)]);
        assert_eq!(br.component(0).evaluate(&p).unwrap(), 1.0);
        assert_eq!(br.component(1).evaluate(&p).unwrap(), 0.0);
    }

    #[test]
    fn jacobi_residual_vanishes_in_two_dimensions() {
        let ch = Chart::new("plane", &["x", "y"]).unwrap();
        let pi = BivectorField::from_entries(
            ch.clone(),
            vec![(0, 1, sf("x^2*sin(y) + 3", &ch))],
        )
        .unwrap();
        let p = Point::from_pairs(&[("x", 1.4), ("y", 0.3)]);
        let res = jacobi_residual(&pi, &p).unwrap();
        for plane in &res {
            for row in plane {
                for v in row {
                    assert_eq!(*v, 0.0);
                }
            }
        }
    }

    #[test]
    fn jacobi_residual_discriminates_broken_so3() {
        // Π^{12} = x3, Π^{23} = x2, Π^{31} = 0 has J^{123} = -x3.
        let ch = Chart::new("r3", &["x1", "x2", "x3"]).unwrap();
        let pi = BivectorField::from_entries(
            ch.clone(),
            vec![(0, 1, sf("x3", &ch)), (1, 2, sf("x2", &ch))],
        )
        .unwrap();
        let p = Point::from_pairs(&[("x1", 0.5), ("x2", -1.0), ("x3", 1.7)]);
        let res = jacobi_residual(&pi, &p).unwrap();
        assert!((res[0][1][2] - (-1.7)).abs() < 1e-12);
    }

    #[test]
    fn casimir_examples() {
        let (ch, pi) = so3_star();
        let r2 = sf("x1^2 + x2^2 + x3^2", &ch);
        let points: Vec<Point> = (0..20)
            .map(|k| {
                let t = k as f64 * 0.37 - 2.0;
                Point::from_pairs(&[("x1", t), ("x2", 1.0 + t / 3.0), ("x3", -0.5 * t)])
            })
            .collect();
        let check = is_casimir(&pi, &r2, &points, 1e-9).unwrap();
        assert!(check.is_casimir, "residual {}", check.max_residual);

        let (ch2, pi2, _) = plane_pi_const();
        let f = sf("exp(x)", &ch2);
        let pts = vec![Point::from_pairs(&[("x", 0.5), ("y", 0.1)])];
        let check2 = is_casimir(&pi2, &f, &pts, 1e-9).unwrap();
        assert!(!check2.is_casimir);
        assert!((check2.max_residual - 0.5f64.exp()).abs() < 1e-12);
    }
}
