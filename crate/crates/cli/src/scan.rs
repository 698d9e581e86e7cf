//! Parameter scans: evaluate tracked local quantities on a 1- or 2-D grid,
//! in parallel across cells, and emit deterministic CSV with sign-change
//! flags. `CRN_PLANAR_THREADS` caps the worker count.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crn_planar::equilibrium::{solve_equilibrium, SolveOptions};
use crn_planar::families::Family;
use crn_planar::field::VectorField;
use crn_planar::local::{focal_values, jacobian, taylor_expand, TRACE_TOL};
use crn_planar::network::{parse_network, ReactionNetwork};

use crate::report::g15;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Quantity {
    Trace,
    Det,
    L(usize),
    X,
    Y,
}

impl Quantity {
    fn parse(s: &str) -> Result<Quantity, String> {
        match s {
            "trace" => Ok(Quantity::Trace),
            "det" => Ok(Quantity::Det),
            "L1" => Ok(Quantity::L(1)),
            "L2" => Ok(Quantity::L(2)),
            "L3" => Ok(Quantity::L(3)),
            "L4" => Ok(Quantity::L(4)),
            "x" => Ok(Quantity::X),
            "y" => Ok(Quantity::Y),
            other => Err(format!("unknown tracked quantity `{other}`")),
        }
    }

    fn name(&self) -> String {
        match self {
            Quantity::Trace => "trace".into(),
            Quantity::Det => "det".into(),
            Quantity::L(k) => format!("L{k}"),
            Quantity::X => "x".into(),
            Quantity::Y => "y".into(),
        }
    }
}

struct Axis {
    name: String,
    values: Vec<f64>,
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    let (name, range) = s
        .split_once('=')
        .ok_or_else(|| format!("`{s}` must be name=lo:hi:n"))?;
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("`{s}` must be name=lo:hi:n"));
    }
    let lo: f64 = parts[0].parse().map_err(|_| format!("bad lo in `{s}`"))?;
    let hi: f64 = parts[1].parse().map_err(|_| format!("bad hi in `{s}`"))?;
    let n: usize = parts[2].parse().map_err(|_| format!("bad n in `{s}`"))?;
    if n == 0 {
        return Err(format!("`{s}`: n must be at least 1"));
    }
    let values = if n == 1 {
        vec![lo]
    } else {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    };
    Ok(Axis {
        name: name.to_string(),
        values,
    })
}

pub struct ScanSpec {
    pub file: Option<PathBuf>,
    pub family: Option<String>,
    pub params: Vec<String>,
    pub sets: Vec<String>,
    pub track: Vec<String>,
}

enum Target {
    Family(Family),
    Network(ReactionNetwork),
}

/// Evaluate the tracked quantities for one concrete field + equilibrium.
fn evaluate(vf: &VectorField, eq: (f64, f64), quantities: &[Quantity]) -> Vec<f64> {
    let j = jacobian(vf, eq);
    let depth = quantities
        .iter()
        .filter_map(|q| match q {
            Quantity::L(k) => Some(*k),
            _ => None,
        })
        .max();
    let focal = depth.and_then(|n| {
        if j.trace.abs() < TRACE_TOL && j.det > 0.0 {
            taylor_expand(vf, eq, 2 * n + 1)
                .ok()
                .and_then(|tf| focal_values(&tf, n).ok())
        } else {
            None
        }
    });
    quantities
        .iter()
        .map(|q| match q {
            Quantity::Trace => j.trace,
            Quantity::Det => j.det,
            Quantity::X => eq.0,
            Quantity::Y => eq.1,
            Quantity::L(k) => focal
                .as_ref()
                .and_then(|f| f.values.get(k - 1).copied())
                .unwrap_or(f64::NAN),
        })
        .collect()
}

fn cell_values(
    target: &Target,
    fixed: &BTreeMap<String, f64>,
    assignments: &[(String, f64)],
    quantities: &[Quantity],
) -> Vec<f64> {
    match target {
        Target::Family(family) => {
            let mut params = fixed.clone();
            for (name, value) in assignments {
                params.insert(name.clone(), *value);
            }
            match family.build(&params) {
                Ok(instance) => evaluate(&instance.field, instance.equilibrium, quantities),
                Err(_) => vec![f64::NAN; quantities.len()],
            }
        }
        Target::Network(net) => {
            let mut kappas: Vec<f64> = net.reactions().iter().map(|r| r.kappa).collect();
            for (name, value) in assignments {
                let idx: usize = name
                    .strip_prefix("kappa")
                    .and_then(|i| i.parse().ok())
                    .expect("parameter names validated before scanning");
                kappas[idx - 1] = *value;
            }
            let Ok(adjusted) = net.with_rate_constants(&kappas) else {
                return vec![f64::NAN; quantities.len()];
            };
            match solve_equilibrium(&adjusted, &SolveOptions::default()) {
                Ok(eq) => evaluate(&adjusted.vector_field(), (eq.x, eq.y), quantities),
                Err(_) => vec![f64::NAN; quantities.len()],
            }
        }
    }
}

fn worker_count(cells: usize) -> usize {
    let cap = std::env::var("CRN_PLANAR_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });
    cap.min(cells.max(1))
}

pub fn run_scan(spec: ScanSpec) -> Result<String, String> {
    let target = match (&spec.family, &spec.file) {
        (Some(name), _) => Target::Family(
            Family::from_name(name).ok_or_else(|| format!("unknown family `{name}`"))?,
        ),
        (None, Some(path)) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            Target::Network(parse_network(&text).map_err(|e| e.to_string())?)
        }
        (None, None) => return Err("scan needs --family or a network file".into()),
    };
    if spec.params.is_empty() || spec.params.len() > 2 {
        return Err("provide one or two --param ranges".into());
    }
    let axes: Vec<Axis> = spec
        .params
        .iter()
        .map(|p| parse_axis(p))
        .collect::<Result<_, _>>()?;
    let fixed = crate::collect_sets(&spec.sets)?;
    // Validate parameter names against the target.
    let valid_name = |name: &str| -> bool {
        match &target {
            Target::Family(f) => f.param_names().contains(&name),
            Target::Network(net) => name
                .strip_prefix("kappa")
                .and_then(|i| i.parse::<usize>().ok())
                .is_some_and(|i| i >= 1 && i <= net.reactions().len()),
        }
    };
    for name in axes
        .iter()
        .map(|a| a.name.as_str())
        .chain(fixed.keys().map(|k| k.as_str()))
    {
        if !valid_name(name) {
            return Err(format!("unknown parameter name `{name}`"));
        }
    }
    let quantities: Vec<Quantity> = spec
        .track
        .iter()
        .map(|t| Quantity::parse(t))
        .collect::<Result<_, _>>()?;
    if quantities.is_empty() {
        return Err("nothing to track".into());
    }

    let (nx, ny) = (
        axes[0].values.len(),
        axes.get(1).map(|a| a.values.len()).unwrap_or(1),
    );
    let cells = nx * ny;
    let mut results: Vec<Vec<f64>> = vec![Vec::new(); cells];
    let workers = worker_count(cells);
    let chunk = cells.div_ceil(workers);
    std::thread::scope(|scope| {
        for (w, slot) in results.chunks_mut(chunk).enumerate() {
            let axes = &axes;
            let target = &target;
            let fixed = &fixed;
            let quantities = &quantities;
            scope.spawn(move || {
                for (off, cell) in slot.iter_mut().enumerate() {
                    let idx = w * chunk + off;
                    let (i, j) = (idx / ny, idx % ny);
                    let mut assignments = vec![(axes[0].name.clone(), axes[0].values[i])];
                    if let Some(axis2) = axes.get(1) {
                        assignments.push((axis2.name.clone(), axis2.values[j]));
                    }
                    *cell = cell_values(target, fixed, &assignments, quantities);
                }
            });
        }
    });

    // CSV assembly with sign-change flags against the left (same row) and
    // up (same column) neighbors.
    let mut out = String::new();
    out.push_str(
        &axes
            .iter()
            .map(|a| a.name.clone())
            .collect::<Vec<_>>()
            .join(","),
    );
    for q in &quantities {
        out.push_str(&format!(",{}", q.name()));
    }
    for q in &quantities {
        out.push_str(&format!(",{}_flip", q.name()));
    }
    out.push('\n');
    let sign_change = |a: f64, b: f64| -> bool {
        a.is_finite() && b.is_finite() && a != 0.0 && b != 0.0 && a.signum() != b.signum()
    };
    for idx in 0..cells {
        let (i, j) = (idx / ny, idx % ny);
        out.push_str(&g15(axes[0].values[i]));
        if let Some(axis2) = axes.get(1) {
            out.push(',');
            out.push_str(&g15(axis2.values[j]));
        }
        for v in &results[idx] {
            out.push(',');
            out.push_str(&g15(*v));
        }
        for (qi, v) in results[idx].iter().enumerate() {
            let left = if ny > 1 && j > 0 {
                Some(results[idx - 1][qi])
            } else if ny == 1 && i > 0 {
                Some(results[idx - ny][qi])
            } else {
                None
            };
            let up = if ny > 1 && i > 0 {
                Some(results[idx - ny][qi])
            } else {
                None
            };
            let flip = left.map(|l| sign_change(l, *v)).unwrap_or(false)
                || up.map(|u| sign_change(u, *v)).unwrap_or(false);
            out.push(',');
            out.push(if flip { '1' } else { '0' });
        }
        out.push('\n');
    }
    Ok(out)
}
