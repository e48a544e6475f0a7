//! Shared fixtures for the benchmark targets.

use pw_core::{BivectorField, Chart, Cometric, ScalarField, Space, WarpedSpace};

pub fn poisson_x_space() -> Space {
    let ch = Chart::new("plane", &["x", "y"]).unwrap();
    let pi = BivectorField::from_entries(
        ch.clone(),
        vec![(0, 1, ScalarField::parse("x", ch.coords()).unwrap())],
    )
    .unwrap();
    Space::new(ch.clone(), pi, Cometric::identity(ch)).unwrap()
}

pub fn noncasimir_warped() -> WarpedSpace {
    let base_ch = Chart::new("b", &["x", "y"]).unwrap();
    let base = Space::new(
        base_ch.clone(),
        BivectorField::from_entries(base_ch.clone(), vec![(0, 1, ScalarField::one())]).unwrap(),
        Cometric::identity(base_ch.clone()),
    )
    .unwrap();
    let fiber_ch = Chart::new("f", &["z"]).unwrap();
    let fiber = Space::new(
        fiber_ch.clone(),
        BivectorField::zero(fiber_ch.clone()),
        Cometric::identity(fiber_ch.clone()),
    )
    .unwrap();
    let warp = ScalarField::parse("exp(x)", base_ch.coords()).unwrap();
    pw_core::warped::build_warped(base, fiber, warp).unwrap()
}
