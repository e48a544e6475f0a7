//! Einstein classification of spaces and warped products, and the algebraic
//! solvers for constant warping functions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connection::{laplacian, ricci_matrix_at};
use crate::error::{GeomError, Result};
use crate::expr::Evaluator;
use crate::fields::CovectorField;
use crate::point::Point;
use crate::report::CheckRecord;
use crate::space::Space;
use crate::warped::WarpedSpace;

/// Outcome of the sampled Einstein test `Ric = λ g`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EinsteinVerdict {
    pub is_einstein: bool,
    /// Mean of the per-point least-squares fits of λ.
    pub lambda_estimate: f64,
    /// Max over points and coframe pairs of `|Ric(dx^i,dx^j) − λ g^{ij}|`.
    pub max_residual: f64,
    /// Max − min of the per-point λ fits.
    pub lambda_spread: f64,
    pub per_point_lambdas: Vec<f64>,
}

impl EinsteinVerdict {
    pub fn is_ricci_flat(&self, tol: f64) -> bool {
        self.is_einstein && self.lambda_estimate.abs() <= tol
    }
}

/// Fit `λ` per point by least squares over all coframe pairs
/// (`λ = ⟨Ric, g⟩ / ⟨g, g⟩` in the Frobenius pairing) and test the residual
/// against the mean fit.
pub fn einstein_check(space: &Space, points: &[Point], tol: f64) -> Result<EinsteinVerdict> {
    type PointFit = (f64, nalgebra::DMatrix<f64>, nalgebra::DMatrix<f64>);
    let per_point: Result<Vec<PointFit>> = points
        .par_iter()
        .map(|p| {
            let g = space.cometric().matrix_at(p)?;
            let ric = ricci_matrix_at(space.connection(), space.cometric(), p)?;
            let num: f64 = (ric.component_mul(&g)).sum();
            let den: f64 = (g.component_mul(&g)).sum();
            Ok((num / den, ric, g))
        })
        .collect();
    let per_point = per_point?;

    let lambdas: Vec<f64> = per_point.iter().map(|(l, _, _)| *l).collect();
    let mean = lambdas.iter().sum::<f64>() / lambdas.len().max(1) as f64;
    let spread = lambdas.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v))
        - lambdas.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    let spread = if lambdas.is_empty() { 0.0 } else { spread };

    let mut max_residual = 0.0f64;
    for (_, ric, g) in &per_point {
        for i in 0..ric.nrows() {
            for j in 0..ric.ncols() {
                max_residual = max_residual.max((ric[(i, j)] - mean * g[(i, j)]).abs());
            }
        }
    }

    Ok(EinsteinVerdict {
        is_einstein: max_residual <= tol && spread <= tol,
        lambda_estimate: mean,
        max_residual,
        lambda_spread: spread,
        per_point_lambdas: lambdas,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WarpSolutionKind {
    /// A unique positive constant warp exists.
    ConstantWarp,
    /// No positive warp satisfies the constraint.
    NoSolution,
    /// Any positive constant works (the Ricci-flat family).
    AnyPositiveConstant,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WarpSolution {
    pub kind: WarpSolutionKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_value: Option<f64>,
    pub rationale: String,
}

impl WarpSolution {
    fn constant(f: f64, rationale: impl Into<String>) -> Self {
        WarpSolution {
            kind: WarpSolutionKind::ConstantWarp,
            f_value: Some(f),
            rationale: rationale.into(),
        }
    }

    fn none(rationale: impl Into<String>) -> Self {
        WarpSolution {
            kind: WarpSolutionKind::NoSolution,
            f_value: None,
            rationale: rationale.into(),
        }
    }
}

/// Constant warp making the product scalar curvature equal `mu1`, given a
/// base with constant scalar curvature `s_b` and a fiber with constant
/// nonzero scalar curvature `mu` (Casimir warp assumed, fiber dimension at
/// least 2). Solves `S_B − μ₁ + f²μ = 0`.
pub fn solve_constant_scalar(s_b: f64, mu: f64, mu1: f64, s2: usize) -> Result<WarpSolution> {
    if mu == 0.0 {
        return Err(GeomError::invalid(
            "fiber scalar curvature must be nonzero",
        ));
    }
    if s2 < 2 {
        return Err(GeomError::invalid("fiber dimension must be at least 2"));
    }
    if mu1 == s_b {
        return Ok(WarpSolution::none(
            "target equals the base scalar curvature; f^2 mu = 0 has no positive solution",
        ));
    }
    let ratio = (mu1 - s_b) / mu;
    if ratio > 0.0 {
        Ok(WarpSolution::constant(
            ratio.sqrt(),
            format!("f = sqrt((mu1 - S_B)/mu) with mu1 - S_B = {} and mu = {mu}", mu1 - s_b),
        ))
    } else {
        Ok(WarpSolution::none(
            "mu1 - S_B and mu have opposite signs; f^2 would be negative",
        ))
    }
}

/// Constant warp for an Einstein warped product with Casimir warp: from
/// `λ̂ f² = λ` with `f > 0`. `λ` is the product constant, `λ̂` the fiber
/// constant.
pub fn solve_einstein_warp(lambda: f64, lambda_hat: f64) -> WarpSolution {
    if lambda == 0.0 && lambda_hat == 0.0 {
        return WarpSolution {
            kind: WarpSolutionKind::AnyPositiveConstant,
            f_value: None,
            rationale: "both constants vanish (Ricci-flat family); any positive constant warp"
                .to_string(),
        };
    }
    if lambda == 0.0 || lambda_hat == 0.0 {
        return WarpSolution::none(
            "exactly one of lambda, lambda_hat vanishes; lambda_hat f^2 = lambda has no positive solution",
        );
    }
    if lambda * lambda_hat > 0.0 {
        WarpSolution::constant(
            (lambda / lambda_hat).sqrt(),
            format!(
                "f = sqrt(lambda/lambda_hat) with lambda {} and lambda_hat {}",
                sign_word(lambda),
                sign_word(lambda_hat)
            ),
        )
    } else {
        WarpSolution::none("lambda and lambda_hat have opposite signs; f^2 would be negative")
    }
}

fn sign_word(v: f64) -> &'static str {
    if v > 0.0 {
        "positive"
    } else {
        "negative"
    }
}

/// The three Einstein conditions on a warped product for a given (or
/// estimated) product constant λ, cross-checked against the direct Einstein
/// test of the product chart.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WarpedEinsteinConditions {
    pub lambda: f64,
    pub lambda_tilde: f64,
    pub checks: Vec<CheckRecord>,
    pub conditions_hold: bool,
    pub direct_verdict: EinsteinVerdict,
}

/// Evaluate the three conditions equivalent to `Ric = λ g` on the product:
///
/// 1. horizontal block: `Ric_B = λ g_B + s₂/f² [2A − f H^f_B]` with
///    `A(α,β) = g_B(J₁df,α) g_B(J₁df,β)` and `H^f_B(α,β) = −g_B(D^B_α J₁df, β)`;
/// 2. the fiber is Einstein, `Ric_F = λ̃ g_F`;
/// 3. `λ̃ = [λ f² + (s₂+1)‖J₁df‖²_B + f Δ^B(f)] / f⁴`.
pub fn warped_einstein_conditions(
    w: &WarpedSpace,
    points: &[Point],
    tol: f64,
    lambda: Option<f64>,
) -> Result<WarpedEinsteinConditions> {
    let direct = einstein_check(w.product(), points, tol)?;
    let lambda = lambda.unwrap_or(direct.lambda_estimate);

    let s2 = w.fiber_dim() as f64;
    let base = w.base();
    let fiber = w.fiber();
    let base_basis: Vec<CovectorField> = (0..w.base_dim())
        .map(|i| CovectorField::coordinate(base.chart().clone(), i))
        .collect();

    // a_i = g_B(J₁df, dx^i); h_ij = g_B(D^B_{dx^i} J₁df, dx^j)
    let a_fields: Vec<_> = base_basis
        .iter()
        .map(|e| base.cometric().apply(w.j1df(), e))
        .collect::<Result<Vec<_>>>()?;
    let mut h_fields = Vec::new();
    for bi in &base_basis {
        let d = crate::connection::apply_connection(base.connection(), bi, w.j1df())?;
        let mut row = Vec::new();
        for bj in &base_basis {
            row.push(base.cometric().apply(&d, bj)?);
        }
        h_fields.push(row);
    }
    let norm_sq = base.cometric().apply(w.j1df(), w.j1df())?;

    let fiber_verdict = einstein_check(fiber, points, tol)?;
    let lambda_tilde = fiber_verdict.lambda_estimate;

    let per_point: Result<Vec<(f64, f64)>> = points
        .par_iter()
        .map(|p| {
            let ric_b = ricci_matrix_at(base.connection(), base.cometric(), p)?;
            let g_b = base.cometric().matrix_at(p)?;
            let mut ev = Evaluator::new(p);
            let f = ev.eval(w.warp())?;
            let f2 = f * f;
            let mut horizontal = 0.0f64;
            for i in 0..base_basis.len() {
                let ai = ev.eval(&a_fields[i])?;
                for j in 0..base_basis.len() {
                    let aj = ev.eval(&a_fields[j])?;
                    let hij = ev.eval(&h_fields[i][j])?;
                    // 2A − f H = 2 a_i a_j + f h_ij
                    let correction = s2 / f2 * (2.0 * ai * aj + f * hij);
                    let res = ric_b[(i, j)] - lambda * g_b[(i, j)] - correction;
                    horizontal = horizontal.max(res.abs());
                }
            }
            let lap = laplacian(base.connection(), base.cometric(), w.warp(), p)?;
            let nsq = ev.eval(&norm_sq)?;
            let rhs = (lambda * f2 + (s2 + 1.0) * nsq + f * lap) / (f2 * f2);
            Ok((horizontal, (lambda_tilde - rhs).abs()))
        })
        .collect();
    let per_point = per_point?;

    let horizontal_res = per_point.iter().map(|r| r.0).fold(0.0, f64::max);
    let tilde_res = per_point.iter().map(|r| r.1).fold(0.0, f64::max);

    let mut checks = vec![
        CheckRecord::new("einstein condition horizontal block", horizontal_res, tol)
            .with_sampling(points.len(), 0),
        CheckRecord::new("einstein condition fiber", fiber_verdict.max_residual, tol)
            .with_sampling(points.len(), 0)
            .with_passed(fiber_verdict.is_einstein),
        CheckRecord::new("einstein condition fiber constant", tilde_res, tol)
            .with_sampling(points.len(), 0),
    ];
    let conditions_hold = checks.iter().all(|c| c.passed);
    checks.push(
        CheckRecord::new(
            "einstein conditions agree with direct verdict",
            0.0,
            tol,
        )
        .with_passed(conditions_hold == direct.is_einstein)
        .with_note(format!(
            "conditions {} / direct verdict {}",
            if conditions_hold { "hold" } else { "fail" },
            if direct.is_einstein {
                "einstein"
            } else {
                "not einstein"
            }
        )),
    );

    Ok(WarpedEinsteinConditions {
        lambda,
        lambda_tilde,
        checks,
        conditions_hold,
        direct_verdict: direct,
    })
}

/// Einstein analysis of a one-dimensional-base warped product with zero
/// base bivector (a Robertson–Walker-type space): imposing the Einstein
/// condition forces λ = 0, and the product is Ricci-flat iff both factor
/// Ricci blocks vanish.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrwAnalysis {
    pub verdict: EinsteinVerdict,
    pub base_ricci_max: f64,
    pub fiber_ricci_max: f64,
    pub checks: Vec<CheckRecord>,
}

pub fn grw_ricci_flat_check(w: &WarpedSpace, points: &[Point], tol: f64) -> Result<GrwAnalysis> {
    if w.base_dim() != 1 {
        return Err(GeomError::invalid(
            "analysis requires a one-dimensional base",
        ));
    }
    if !w.base().pi().is_zero() {
        return Err(GeomError::invalid("analysis requires a zero base bivector"));
    }

    let verdict = einstein_check(w.product(), points, tol)?;

    let block_max = |space: &Space| -> Result<f64> {
        let res: Result<Vec<f64>> = points
            .par_iter()
            .map(|p| {
                let m = ricci_matrix_at(space.connection(), space.cometric(), p)?;
                Ok(m.iter().fold(0.0f64, |a, v| a.max(v.abs())))
            })
            .collect();
        Ok(res?.into_iter().fold(0.0, f64::max))
    };
    let base_ricci_max = block_max(w.base())?;
    let fiber_ricci_max = block_max(w.fiber())?;

    let lambda_check = if verdict.is_einstein {
        CheckRecord::new(
            "einstein verdict forces lambda zero",
            verdict.lambda_estimate.abs(),
            tol,
        )
    } else {
        CheckRecord::new("einstein verdict forces lambda zero", 0.0, tol)
            .with_note("product is not einstein; nothing to force")
    };
    let flat_iff = CheckRecord::new(
        "ricci-flat iff factor ricci blocks vanish",
        base_ricci_max.max(fiber_ricci_max),
        tol,
    )
    .with_passed(verdict.is_einstein == (base_ricci_max <= tol && fiber_ricci_max <= tol));

    Ok(GrwAnalysis {
        verdict,
        base_ricci_max,
        fiber_ricci_max,
        checks: vec![lambda_check, flat_iff],
    })
}
