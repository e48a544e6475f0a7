//! Manifest files: JSON descriptions of charts, scalar fields, manifolds
//! (chart + sparse bivector and cometric entries), warped products and
//! named tasks.
//!
//! Bivector entries are accepted only for `i < j` and cometric entries only
//! for `i <= j`; unspecified entries are zero. Every expression is parsed
//! against its chart's coordinates at load time, so an expression referring
//! to a coordinate outside its chart (a warp function using a fiber
//! coordinate, say) is a load error, not a runtime surprise.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use pw_core::sample::{Exclusion, SampleSpec};
use pw_core::warped::build_warped;
use pw_core::{BivectorField, Chart, Cometric, ScalarField, Space, WarpedSpace};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    #[serde(default)]
    charts: Vec<ChartDef>,
    #[serde(default)]
    fields: Vec<FieldDef>,
    #[serde(default)]
    manifolds: Vec<ManifoldDef>,
    #[serde(default)]
    warped_products: Vec<WarpedDef>,
    #[serde(default)]
    tasks: Vec<TaskDef>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartDef {
    name: String,
    coords: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldDef {
    name: String,
    chart: String,
    expr: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryDef {
    i: usize,
    j: usize,
    expr: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifoldDef {
    name: String,
    chart: String,
    #[serde(default)]
    bivector: Vec<EntryDef>,
    #[serde(default)]
    cometric: Vec<EntryDef>,
    #[serde(default)]
    sampling: Option<SamplingDef>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WarpedDef {
    name: String,
    base: String,
    fiber: String,
    warp: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SamplingDef {
    #[serde(default)]
    r#box: Option<[f64; 2]>,
    #[serde(default)]
    per_coord: BTreeMap<String, [f64; 2]>,
    #[serde(default)]
    exclude: Vec<ExcludeDef>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExcludeDef {
    coord: String,
    abs_below: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskDef {
    #[serde(default)]
    pub name: Option<String>,
    pub op: String,
    pub manifold: String,
    #[serde(default)]
    pub field: Option<String>,
    /// Expected value, as an expression over the manifold's coordinates.
    #[serde(default)]
    pub expect: Option<String>,
    #[serde(default)]
    pub expect_casimir: Option<bool>,
}

/// Per-manifold sampling overrides, merged into the CLI-level spec.
#[derive(Debug, Clone, Default)]
pub struct SamplingOverrides {
    pub range: Option<(f64, f64)>,
    pub per_coord: BTreeMap<String, (f64, f64)>,
    pub exclusions: Vec<Exclusion>,
}

impl SamplingOverrides {
    fn from_def(def: &SamplingDef) -> Result<Self> {
        for b in def.r#box.iter().chain(def.per_coord.values()) {
            if !(b[0] < b[1]) {
                bail!("sampling box [{}, {}] is empty", b[0], b[1]);
            }
        }
        Ok(SamplingOverrides {
            range: def.r#box.map(|b| (b[0], b[1])),
            per_coord: def
                .per_coord
                .iter()
                .map(|(k, v)| (k.clone(), (v[0], v[1])))
                .collect(),
            exclusions: def
                .exclude
                .iter()
                .map(|e| Exclusion {
                    coord: e.coord.clone(),
                    abs_below: e.abs_below,
                })
                .collect(),
        })
    }

    pub fn apply(&self, spec: &mut SampleSpec) {
        if let Some(r) = self.range {
            spec.range = r;
        }
        for (k, v) in &self.per_coord {
            spec.per_coord.insert(k.clone(), *v);
        }
        for e in &self.exclusions {
            if !spec.exclusions.iter().any(|x| x.coord == e.coord) {
                spec.exclusions.push(e.clone());
            }
        }
    }

    pub fn merged(&self, other: &SamplingOverrides) -> SamplingOverrides {
        let mut out = self.clone();
        for (k, v) in &other.per_coord {
            out.per_coord.entry(k.clone()).or_insert(*v);
        }
        for e in &other.exclusions {
            if !out.exclusions.iter().any(|x| x.coord == e.coord) {
                out.exclusions.push(e.clone());
            }
        }
        if out.range.is_none() {
            out.range = other.range;
        }
        out
    }
}

#[derive(Debug)]
pub struct NamedField {
    pub name: String,
    pub chart: String,
    pub field: ScalarField,
}

#[derive(Debug)]
pub struct NamedManifold {
    pub name: String,
    pub space: Space,
    pub sampling: SamplingOverrides,
}

#[derive(Debug)]
pub struct NamedWarped {
    pub name: String,
    pub base_name: String,
    pub fiber_name: String,
    pub warped: WarpedSpace,
    pub sampling: SamplingOverrides,
}

/// A fully resolved manifest: all references checked, all expressions
/// parsed against their charts.
#[derive(Debug)]
pub struct Manifest {
    pub charts: BTreeMap<String, Arc<Chart>>,
    pub fields: Vec<NamedField>,
    pub manifolds: Vec<NamedManifold>,
    pub warped: Vec<NamedWarped>,
    pub tasks: Vec<TaskDef>,
}

impl Manifest {
    pub fn manifold(&self, name: &str) -> Result<&NamedManifold> {
        self.manifolds
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| anyhow!("unknown manifold `{name}`"))
    }

    pub fn field(&self, name: &str) -> Result<&NamedField> {
        self.fields
            .iter()
            .find(|f| f.name == name)
            .ok_or_else(|| anyhow!("unknown field `{name}`"))
    }

    /// Every space in the manifest: standalone manifolds, then assembled
    /// warped products.
    pub fn all_spaces(&self) -> Vec<(String, &Space, SamplingOverrides)> {
        let mut out: Vec<(String, &Space, SamplingOverrides)> = self
            .manifolds
            .iter()
            .map(|m| (m.name.clone(), &m.space, m.sampling.clone()))
            .collect();
        for w in &self.warped {
            out.push((w.name.clone(), w.warped.product(), w.sampling.clone()));
        }
        out
    }
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read manifest `{}`", path.display()))?;
    parse_manifest(&text).with_context(|| format!("in manifest `{}`", path.display()))
}

pub fn parse_manifest(text: &str) -> Result<Manifest> {
    let file: ManifestFile = serde_json::from_str(text).context("manifest is not valid JSON")?;

    let mut charts = BTreeMap::new();
    for def in &file.charts {
        if charts.contains_key(&def.name) {
            bail!("duplicate chart `{}`", def.name);
        }
        let chart = Chart::from_names(def.name.clone(), def.coords.clone())
            .map_err(|e| anyhow!("chart `{}`: {e}", def.name))?;
        charts.insert(def.name.clone(), chart);
    }

    let get_chart = |name: &str| -> Result<&Arc<Chart>> {
        charts
            .get(name)
            .ok_or_else(|| anyhow!("unknown chart `{name}`"))
    };

    let mut fields = Vec::new();
    for def in &file.fields {
        let chart = get_chart(&def.chart)?;
        let field = ScalarField::parse(&def.expr, chart.coords())
            .map_err(|e| anyhow!("field `{}`: {e}", def.name))?;
        fields.push(NamedField {
            name: def.name.clone(),
            chart: def.chart.clone(),
            field,
        });
    }

    let mut manifolds = Vec::new();
    for def in &file.manifolds {
        let chart = get_chart(&def.chart)?.clone();
        let parse_entries = |entries: &[EntryDef], what: &str| -> Result<Vec<(usize, usize, ScalarField)>> {
            entries
                .iter()
                .map(|e| {
                    let f = ScalarField::parse(&e.expr, chart.coords()).map_err(|err| {
                        anyhow!(
                            "manifold `{}` {what} entry ({}, {}): {err}",
                            def.name,
                            e.i,
                            e.j
                        )
                    })?;
                    Ok((e.i, e.j, f))
                })
                .collect()
        };
        let pi = BivectorField::from_entries(chart.clone(), parse_entries(&def.bivector, "bivector")?)
            .map_err(|e| anyhow!("manifold `{}`: {e}", def.name))?;
        let g = Cometric::from_entries(chart.clone(), parse_entries(&def.cometric, "cometric")?)
            .map_err(|e| anyhow!("manifold `{}`: {e}", def.name))?;
        let space =
            Space::new(chart, pi, g).map_err(|e| anyhow!("manifold `{}`: {e}", def.name))?;
        let sampling = match &def.sampling {
            Some(s) => SamplingOverrides::from_def(s)
                .map_err(|e| anyhow!("manifold `{}` sampling: {e}", def.name))?,
            None => SamplingOverrides::default(),
        };
        manifolds.push(NamedManifold {
            name: def.name.clone(),
            space,
            sampling,
        });
    }

    let find_manifold = |name: &str| -> Result<&NamedManifold> {
        manifolds
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| anyhow!("unknown manifold `{name}`"))
    };

    let mut warped = Vec::new();
    for def in &file.warped_products {
        let base = find_manifold(&def.base)?;
        let fiber = find_manifold(&def.fiber)?;
        let warp = ScalarField::parse(&def.warp, base.space.chart().coords())
            .map_err(|e| anyhow!("warped product `{}` warp expression: {e}", def.name))?;
        let w = build_warped(base.space.clone(), fiber.space.clone(), warp)
            .map_err(|e| anyhow!("warped product `{}`: {e}", def.name))?;
        let sampling = base.sampling.merged(&fiber.sampling);
        warped.push(NamedWarped {
            name: def.name.clone(),
            base_name: def.base.clone(),
            fiber_name: def.fiber.clone(),
            warped: w,
            sampling,
        });
    }

    // task references must resolve
    for t in &file.tasks {
        find_manifold(&t.manifold)?;
        if let Some(fname) = &t.field {
            let f = fields
                .iter()
                .find(|f| &f.name == fname)
                .ok_or_else(|| anyhow!("task references unknown field `{fname}`"))?;
            let m = find_manifold(&t.manifold)?;
            if f.chart != m.space.chart().name() {
                bail!(
                    "task field `{fname}` lives on chart `{}` but manifold `{}` uses `{}`",
                    f.chart,
                    t.manifold,
                    m.space.chart().name()
                );
            }
        }
        match t.op.as_str() {
            "laplacian" | "casimir" => {}
            other => bail!("unknown task op `{other}`"),
        }
    }

    Ok(Manifest {
        charts,
        fields,
        manifolds,
        warped,
        tasks: file.tasks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_reversed_bivector_entry() {
        let text = r#"{
            "charts": [{"name": "plane", "coords": ["x", "y"]}],
            "manifolds": [{
                "name": "m", "chart": "plane",
                "bivector": [{"i": 2, "j": 1, "expr": "x"}],
                "cometric": [{"i": 0, "j": 0, "expr": "1"}, {"i": 1, "j": 1, "expr": "1"}]
            }]
        }"#;
        let err = parse_manifest(text).unwrap_err();
        assert!(err.to_string().contains("m"));
    }

    #[test]
    fn rejects_warp_using_fiber_coordinate() {
        let text = r#"{
            "charts": [
                {"name": "b", "coords": ["x"]},
                {"name": "f", "coords": ["z"]}
            ],
            "manifolds": [
                {"name": "base", "chart": "b", "cometric": [{"i": 0, "j": 0, "expr": "1"}]},
                {"name": "fiber", "chart": "f", "cometric": [{"i": 0, "j": 0, "expr": "1"}]}
            ],
            "warped_products": [{"name": "w", "base": "base", "fiber": "fiber", "warp": "1 + z^2"}]
        }"#;
        let err = parse_manifest(text).unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains('z'), "{msg}");
    }

    #[test]
    fn unresolved_references_fail() {
        let text = r#"{
            "charts": [{"name": "plane", "coords": ["x", "y"]}],
            "manifolds": [{"name": "m", "chart": "nope", "cometric": []}]
        }"#;
        assert!(parse_manifest(text).is_err());
    }
}
