//! Model bundles: one JSON document holding an algebra, an action, an
//! optional multiplication system, and default truncations.

use std::path::Path;

use serde::Deserialize;
use starmap_core::action::{ActionSpec, InfinitesimalAction};
use starmap_core::gsystem::{GSystem, GSystemSpec};
use starmap_core::lie::{AlgebraSpec, LieAlgebra};

use crate::CliError;

#[derive(Debug, Deserialize)]
pub struct BundleSpec {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub algebra: AlgebraSpec,
    pub action: ActionSpec,
    #[serde(default)]
    pub gsystem: Option<GSystemSpec>,
    pub truncations: TruncationSpec,
}

#[derive(Debug, Deserialize)]
pub struct TruncationSpec {
    pub order: usize,
    pub vdeg: u32,
}

/// A loaded and validated bundle.  The algebra and action are fully
/// checked on load (antisymmetry, Jacobi, bracket compatibility); the
/// multiplication system is range-checked here and its flatness is
/// examined by the commands that need it.
pub struct Bundle {
    pub name: String,
    pub description: String,
    pub action: InfinitesimalAction,
    pub gsystem: GSystem,
    pub order: usize,
    pub vdeg: u32,
}

impl Bundle {
    pub fn load(path: &Path, order_flag: Option<usize>, vdeg_flag: Option<u32>) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| CliError::new(format!("cannot read {}: {e}", path.display())))?;
        let spec: BundleSpec = serde_json::from_str(&src)
            .map_err(|e| CliError::new(format!("{}: {e}", path.display())))?;
        let algebra = LieAlgebra::from_spec(&spec.algebra)
            .map_err(|e| CliError::new(format!("{}: algebra: {e}", path.display())))?;
        let action = InfinitesimalAction::from_spec(algebra, &spec.action)
            .map_err(|e| CliError::new(format!("{}: action: {e}", path.display())))?;
        let order = order_flag.unwrap_or(spec.truncations.order);
        let vdeg = vdeg_flag.unwrap_or(spec.truncations.vdeg);
        let gsystem = match &spec.gsystem {
            Some(gspec) => GSystem::from_spec(action.clone(), gspec)
                .map_err(|e| CliError::new(format!("{}: gsystem: {e}", path.display())))?,
            None => GSystem::trivial(action.clone(), order, 2),
        };
        let name = if spec.name.is_empty() {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        } else {
            spec.name
        };
        Ok(Bundle {
            name,
            description: spec.description,
            action,
            gsystem,
            order,
            vdeg,
        })
    }
}
