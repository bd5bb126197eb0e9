//! Command implementations.  Every command returns the report value and a
//! pass flag; input problems surface as `CliError` and exit with code 2.

mod suites;

use std::path::Path;

use serde_json::{json, Map, Value};
use starmap_core::feynman::{enumerate_attached, enumerate_graphs, FeynmanGraph};
use starmap_core::parse::parse_poly;
use starmap_core::qmm::{QmmModel, QmmPhase};
use starmap_core::quantize::star_standard as star_standard_series;
use starmap_core::uea::gutt_pbw;
use starmap_core::{Family, HbarSeries, LieAlgebra, MultiPoly, VarUniverse};

use crate::bundle::Bundle;
use crate::render::series_value;
use crate::{CliError, Suite};

/// Every report restates the scope of the group-level checks.
const STATEMENT: &str = "group-level identities are verified in infinitesimal form: \
     as exact polynomial statements obtained by differentiating at the unit along \
     each basis direction; the group-level versions follow by formal exponentiation";

/// Largest th index mentioned in an expression, used to size the default
/// abelian algebra.
fn max_th_index(src: &str) -> usize {
    let bytes = src.as_bytes();
    let mut best = 0usize;
    let mut k = 0;
    while k + 2 < bytes.len() + 1 {
        if bytes[k] == b't' && k + 1 < bytes.len() && bytes[k + 1] == b'h' {
            let mut j = k + 2;
            let mut val = 0usize;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                val = val * 10 + usize::from(bytes[j] - b'0');
                j += 1;
            }
            if j > k + 2 {
                best = best.max(val);
            }
            k = j;
        } else {
            k += 1;
        }
    }
    best
}

fn resolve_algebra(spec: Option<&str>, fallback_dim: usize) -> Result<(LieAlgebra, String), CliError> {
    match spec {
        None => Ok((
            LieAlgebra::abelian(fallback_dim),
            format!("abelian{fallback_dim}"),
        )),
        Some("so3") => Ok((LieAlgebra::so3(), "so3".into())),
        Some("heisenberg") => Ok((LieAlgebra::heisenberg(), "heisenberg".into())),
        Some(s) if s.starts_with("abelian") && s[7..].parse::<usize>().is_ok() => {
            let n = s[7..].parse::<usize>().unwrap();
            if n == 0 {
                return Err(CliError::new("abelian algebra needs a positive dimension"));
            }
            Ok((LieAlgebra::abelian(n), s.to_string()))
        }
        Some(path) => {
            let src = std::fs::read_to_string(path)
                .map_err(|e| CliError::new(format!("cannot read {path}: {e}")))?;
            let algebra = LieAlgebra::from_json(&src)
                .map_err(|e| CliError::new(format!("{path}: {e}")))?;
            Ok((algebra, path.to_string()))
        }
    }
}

pub fn star_gutt(
    algebra: Option<&str>,
    f: &str,
    g: &str,
    order: usize,
) -> Result<(Value, bool), CliError> {
    let hint = max_th_index(f).max(max_th_index(g)).max(1);
    let (algebra, label) = resolve_algebra(algebra, hint)?;
    let universe = VarUniverse::new(0, algebra.dim() as u32);
    let fp = parse_poly(f, universe).map_err(CliError::from_err)?;
    let gp = parse_poly(g, universe).map_err(CliError::from_err)?;
    let series = gutt_pbw(&algebra, &fp, &gp, order).map_err(CliError::from_err)?;
    let value = json!({
        "product": "gutt",
        "algebra": label,
        "f": f,
        "g": g,
        "order": order,
        "series": series_value(&series),
    });
    Ok((value, true))
}

pub fn star_standard(
    dim: u32,
    f: &str,
    g: &str,
    order: usize,
) -> Result<(Value, bool), CliError> {
    if dim == 0 {
        return Err(CliError::new("base dimension must be positive"));
    }
    let universe = VarUniverse::new(dim, 1);
    let parse_symbol = |src: &str| -> Result<MultiPoly, CliError> {
        let p = parse_poly(src, universe).map_err(CliError::from_err)?;
        if !p.uses_only(&[Family::X, Family::Xi]) {
            return Err(CliError::new(format!(
                "expected a polynomial in x and xi variables: {src}"
            )));
        }
        Ok(p)
    };
    let fp = parse_symbol(f)?;
    let gp = parse_symbol(g)?;
    let series = star_standard_series(
        &HbarSeries::from_poly(fp, order),
        &HbarSeries::from_poly(gp, order),
        order,
    );
    let value = json!({
        "product": "standard",
        "dim": dim,
        "f": f,
        "g": g,
        "order": order,
        "series": series_value(&series),
    });
    Ok((value, true))
}

pub fn qmm_apply(
    model: &Path,
    order: Option<usize>,
    vdeg: Option<u32>,
    u: &str,
) -> Result<(Value, bool), CliError> {
    let bundle = Bundle::load(model, order, vdeg)?;
    let qmm = QmmModel::with_truncations(bundle.gsystem.clone(), bundle.order, bundle.vdeg)
        .map_err(|e| CliError::new(format!("model rejected: {e}")))?;
    let up = parse_poly(u, bundle.action.base_universe()).map_err(CliError::from_err)?;
    let image = qmm.apply(&up).map_err(CliError::from_err)?;
    let value = json!({
        "model": bundle.name,
        "u": u,
        "order": bundle.order,
        "image": series_value(&image),
    });
    Ok((value, true))
}

pub fn qmm_verify(
    model: &Path,
    order: Option<usize>,
    vdeg: Option<u32>,
    suite_list: &[Suite],
    deg: u32,
) -> Result<(Value, bool), CliError> {
    let bundle = Bundle::load(model, order, vdeg)?;
    let outcome = suites::run_suites(&bundle, suite_list, deg)?;
    let value = json!({
        "model": bundle.name,
        "order": bundle.order,
        "vdeg": bundle.vdeg,
        "statement": STATEMENT,
        "suites": outcome.entries,
        "status": status(outcome.pass),
    });
    Ok((value, outcome.pass))
}

pub fn gsystem_check(
    model: &Path,
    order: Option<usize>,
    vdeg: Option<u32>,
) -> Result<(Value, bool), CliError> {
    let bundle = Bundle::load(model, order, vdeg)?;
    let residual = bundle
        .gsystem
        .mc_residual(bundle.order, bundle.vdeg)
        .map_err(CliError::from_err)?;
    let pass = residual.is_zero();
    let mut map = Map::new();
    map.insert("model".into(), Value::String(bundle.name));
    map.insert("order".into(), json!(bundle.order));
    map.insert("vdeg".into(), json!(bundle.vdeg));
    map.insert("residual".into(), series_value(&residual));
    if !pass {
        let level = residual
            .coeffs()
            .iter()
            .position(|c| !c.is_zero())
            .unwrap_or(0);
        map.insert("location".into(), json!({ "level": level }));
    }
    map.insert("status".into(), Value::String(status(pass).into()));
    Ok((Value::Object(map), pass))
}

pub fn graphs_enumerate(
    ext: usize,
    max_power: usize,
    full: bool,
) -> Result<(Value, bool), CliError> {
    if ext == 0 {
        return Err(CliError::new("need at least one external vertex"));
    }
    if max_power > 6 {
        return Err(CliError::new(
            "refusing hbar powers above 6; the class count grows too fast",
        ));
    }
    let graphs = if full {
        enumerate_graphs(ext, max_power)
    } else {
        enumerate_attached(ext, max_power)
    };
    let listed: Vec<Value> = graphs.iter().map(|g| graph_value(g)).collect();
    let value = json!({
        "ext": ext,
        "power": max_power,
        "attached_only": !full,
        "count": listed.len(),
        "graphs": listed,
    });
    Ok((value, true))
}

/// Vertices `0..ext` are external; the rest are internal.
fn graph_value(g: &FeynmanGraph) -> Value {
    let edges: Vec<Value> = g
        .edges()
        .iter()
        .map(|(&(a, b), &m)| json!([a, b, m]))
        .collect();
    json!({
        "edges": edges,
        "internal": g.n_int(),
        "power": g.power(),
        "aut": g.aut(),
    })
}

pub fn casimir_check(algebra: Option<&str>, f: &str) -> Result<(Value, bool), CliError> {
    let hint = max_th_index(f).max(1);
    let (algebra, label) = resolve_algebra(algebra, hint)?;
    let universe = VarUniverse::new(0, algebra.dim() as u32);
    let fp = parse_poly(f, universe).map_err(CliError::from_err)?;
    let residuals = algebra.casimir_residuals(&fp).map_err(CliError::from_err)?;
    let mut failing = Map::new();
    for (i, r) in residuals.iter().enumerate() {
        if !r.is_zero() {
            failing.insert(format!("e{}", i + 1), Value::String(r.to_string()));
        }
    }
    let pass = failing.is_empty();
    let value = json!({
        "algebra": label,
        "f": f,
        "residuals": if pass { Value::String("0".into()) } else { Value::Object(failing) },
        "status": status(pass),
    });
    Ok((value, pass))
}

pub fn report(
    model: &Path,
    order: Option<usize>,
    vdeg: Option<u32>,
    deg: u32,
) -> Result<(Value, bool), CliError> {
    let bundle = Bundle::load(model, order, vdeg)?;
    let phase = QmmPhase::build(&bundle.action, bundle.vdeg).map_err(CliError::from_err)?;
    let hessian = phase.hessian_checks().map_err(CliError::from_err)?;
    let hessian_ok = hessian.is_ok();
    let outcome = suites::run_suites(&bundle, &Suite::all(), deg)?;
    let pass = outcome.pass && hessian_ok;
    let value = json!({
        "model": bundle.name,
        "description": bundle.description,
        "order": bundle.order,
        "vdeg": bundle.vdeg,
        "deg": deg,
        "statement": STATEMENT,
        "hessian": {
            "det": hessian.det.to_string(),
            "det_is_unit": hessian.det_is_unit,
            "inverse_exact": hessian.inverse_exact,
            "signature_zero": hessian.signature_zero,
            "status": status(hessian_ok),
        },
        "suites": outcome.entries,
        "status": status(pass),
    });
    Ok((value, pass))
}

pub(crate) fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}
