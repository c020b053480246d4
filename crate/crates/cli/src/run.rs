//! Execution of validated plans into in-memory artifacts.

use maxpsh::comparison::{capacity_estimate, comparison_check, maximality_certificate, randomized_suite};
use maxpsh::engine::{wedge_with_current, CurrentKind, CurrentSpec};
use maxpsh::grid::{analytic_hessian, complex_hessian, sample, GridDomain};
use maxpsh::lab::{blocki_integral, cegrell_grid_mass, cegrell_mass, m1_truncated_scan, weighted_ma_scan, ScanOptions};
use maxpsh::quad::QuadOptions;
use serde_json::{json, Value};

use crate::config::{Plan, Quantity};
use crate::error::Failure;

/// Everything a run produces before anything touches the disk.
pub struct Artifacts {
    pub summary: Vec<(String, String)>,
    pub result: Value,
    pub scan_csv: Option<String>,
    pub density_csv: Option<String>,
}

fn row(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn grid_json(g: &GridDomain) -> Value {
    json!({ "n": g.n(), "h": g.h(), "lo": &g.lo()[..g.dims()], "hi": &g.hi()[..g.dims()], "nodes": g.len() })
}

fn current_name(t: &CurrentSpec) -> String {
    match t.kind {
        CurrentKind::Trivial => format!("trivial (q = {})", t.q),
        CurrentKind::OmegaPower => format!("omega (q = {})", t.q),
        CurrentKind::Slice(_) => format!("slice (q = {})", t.q),
    }
}

fn csv_string(write: impl FnOnce(&mut Vec<u8>) -> maxpsh::Result<()>) -> Result<String, Failure> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

fn fmt(v: f64) -> String {
    format!("{v:.6e}")
}

pub fn execute(plan: &Plan, seed: u64) -> Result<Artifacts, Failure> {
    match plan {
        Plan::MaDensity { spec, grid, current, finite_difference, density_csv } => {
            let h = if *finite_difference { complex_hessian(&sample(spec, grid)?)? } else { analytic_hessian(spec, grid)? };
            let mu = wedge_with_current(&h, current)?;
            let s = mu.summary();
            let density = if *density_csv { Some(csv_string(|b| mu.write_csv(b))?) } else { None };
            Ok(Artifacts {
                summary: vec![
                    row("spec", spec),
                    row("current", current_name(current)),
                    row("nodes", grid.len()),
                    row("total mass", fmt(s.total_mass)),
                    row("min density", fmt(s.min_density)),
                    row("max density", fmt(s.max_density)),
                    row("clipped nodes", s.clipped_nodes),
                ],
                result: json!({ "spec": spec.to_string(), "grid": grid_json(grid), "current": to_json(current), "summary": to_json(&s) }),
                scan_csv: None,
                density_csv: density,
            })
        }
        Plan::Scan { spec, scheme, quantity, region, js, estimator, grid, smoothing, finite_difference, rule } => {
            let opts = ScanOptions {
                estimator: *estimator,
                grid: grid.clone(),
                rule: *rule,
                smoothing: *smoothing,
                finite_difference: *finite_difference,
                ..ScanOptions::default()
            };
            let r = match quantity {
                Quantity::Weighted(w) => weighted_ma_scan(spec, scheme, *w, region, js, &opts)?,
                Quantity::M1(t) => m1_truncated_scan(spec, scheme, *t, region, js, &opts)?,
            };
            let mut summary = vec![row("spec", spec), row("scheme", scheme), row("estimator", format!("{:?}", r.estimator))];
            for (j, v) in r.j.iter().zip(&r.values) {
                summary.push(row(&format!("j = {j}"), fmt(*v)));
            }
            summary.push(row("verdict", r.verdict));
            let csv = csv_string(|b| r.write_csv(b))?;
            Ok(Artifacts { summary, result: to_json(&r), scan_csv: Some(csv), density_csv: None })
        }
        Plan::Blocki { chi, w0, r } => {
            let rep = blocki_integral(chi, *w0, *r, &QuadOptions::default())?;
            Ok(Artifacts {
                summary: vec![
                    row("chi", chi),
                    row("I", fmt(rep.integral)),
                    row("bound", fmt(rep.bound)),
                    row("chain bound", fmt(rep.chain_bound)),
                    row("relative error", fmt(rep.relative_error)),
                    row("holds", rep.holds),
                ],
                result: to_json(&rep),
                scan_csv: None,
                density_csv: None,
            })
        }
        Plan::Cegrell { js, rho, grid_h } => {
            let mut summary = vec![row("rho", rho)];
            let mut rows = Vec::new();
            let mut csv = String::from(if grid_h.is_some() { "j,mass,grid_mass,relative_gap\n" } else { "j,mass\n" });
            for &j in js {
                let m = cegrell_mass(j, *rho)?;
                summary.push(row(&format!("mass j = {j}"), fmt(m)));
                match grid_h {
                    Some(h) => {
                        let g = cegrell_grid_mass(j, *rho, *h)?;
                        summary.push(row(&format!("grid mass j = {j}"), format!("{} (gap {:.3}%)", fmt(g.grid_mass), 100.0 * g.relative_gap)));
                        csv.push_str(&format!("{j},{m:?},{:?},{:?}\n", g.grid_mass, g.relative_gap));
                        rows.push(json!({ "j": j, "mass": m, "grid": to_json(&g) }));
                    }
                    None => {
                        csv.push_str(&format!("{j},{m:?}\n"));
                        rows.push(json!({ "j": j, "mass": m }));
                    }
                }
            }
            Ok(Artifacts { summary, result: json!({ "rho": rho, "rows": rows }), scan_csv: Some(csv), density_csv: None })
        }
        Plan::Compare { pair: Some((u, v)), grid, current, options, .. } => {
            let r = comparison_check(u, v, current, grid, options)?;
            Ok(Artifacts {
                summary: vec![
                    row("u", u),
                    row("v", v),
                    row("current", current_name(current)),
                    row("lhs", fmt(r.lhs)),
                    row("rhs", fmt(r.rhs)),
                    row("slack", fmt(r.slack)),
                    row("tolerance", fmt(r.tolerance)),
                    row("region nodes", r.region_nodes),
                    row("holds", r.holds),
                ],
                result: json!({ "u": u.to_string(), "v": v.to_string(), "grid": grid_json(grid), "report": to_json(&r) }),
                scan_csv: None,
                density_csv: None,
            })
        }
        Plan::Compare { pair: None, cases, grid, current, options } => {
            let s = randomized_suite(seed, cases.unwrap_or(1), grid, current, options)?;
            let held = s.cases.iter().filter(|c| c.report.holds).count();
            let worst = s.cases.iter().map(|c| c.report.slack + c.report.tolerance).fold(f64::INFINITY, f64::min);
            let mut csv = String::from("case,lhs,rhs,slack,tolerance,holds\n");
            for (k, c) in s.cases.iter().enumerate() {
                let r = &c.report;
                csv.push_str(&format!("{k},{:?},{:?},{:?},{:?},{}\n", r.lhs, r.rhs, r.slack, r.tolerance, r.holds));
            }
            Ok(Artifacts {
                summary: vec![
                    row("seed", seed),
                    row("cases", s.cases.len()),
                    row("rejected draws", s.rejected),
                    row("hold", format!("{held}/{}", s.cases.len())),
                    row("min slack + tolerance", fmt(worst)),
                    row("all hold", s.all_hold),
                ],
                result: json!({ "grid": grid_json(grid), "suite": to_json(&s) }),
                scan_csv: Some(csv),
                density_csv: None,
            })
        }
        Plan::Capacity { grid, k, current, candidates, options } => {
            let r = capacity_estimate(&k.to_mask(grid), grid, current, candidates, options)?;
            let mut summary = vec![row("K nodes", r.k_nodes)];
            for (i, c) in r.candidates.iter().enumerate() {
                summary.push(row(&format!("candidate {i}"), fmt(c.mass)));
            }
            summary.push(row("lower bound", fmt(r.best)));
            Ok(Artifacts {
                summary,
                result: json!({ "grid": grid_json(grid), "k": to_json(k), "report": to_json(&r) }),
                scan_csv: None,
                density_csv: None,
            })
        }
        Plan::Certificate { u, scheme, grid, family, js, options } => {
            let r = maximality_certificate(u, scheme, family, grid, js, options)?;
            let mut csv = String::from("leaf,base_re,base_im,j,mass,omega_mass\n");
            for (k, l) in r.leaves.iter().enumerate() {
                for (j, m) in r.j.iter().zip(&l.masses) {
                    csv.push_str(&format!("{k},{:?},{:?},{j},{m:?},{:?}\n", l.base_point[0], l.base_point[1], l.omega_mass));
                }
            }
            let zero = r.leaves.iter().filter(|l| l.verdict == maxpsh::lab::Verdict::TendsToZero).count();
            Ok(Artifacts {
                summary: vec![
                    row("u", u),
                    row("scheme", scheme),
                    row("leaves", r.leaves.len()),
                    row("empty leaves", r.empty_leaves),
                    row("leaves tending to zero", zero),
                    row("positivity", r.positivity),
                    row("satisfied", r.satisfied),
                ],
                result: to_json(&r),
                scan_csv: Some(csv),
                density_csv: None,
            })
        }
    }
}
