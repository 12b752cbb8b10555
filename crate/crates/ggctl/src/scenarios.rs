//! The eight scenarios. Each writes its CSV tables, returns the
//! scenario-specific part of the JSON summary and the plots to draw.

use ggkdv::critical::{
    enumerate_critical_lengths_with, is_critical, ode_kernel_scan, root_sharing_oracle, verify_tuple_with,
    CriticalLength, KernelVariant,
};
use ggkdv::evolution::{
    boundary_residual, solve_adjoint_backward, trace_norm_max, BoundaryData, Channel, ForwardSolver, NonlinearOptions,
};
use ggkdv::hum::{
    gramian_min_eigenvalue, hum_solve_report, modal_observability_gramian, nonlinear::nonlinear_control_with,
    observability_ratio, one_control_certificate, ControlProblem, Gramian, HumOptions, HumSolution,
};
use ggkdv::model::x_norm;
use ggkdv::{GgError, Grid, Traj};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{Resolved, Scenario};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, OutDir};
use crate::plot::PlotSpec;

/// Result of one scenario.
#[derive(Debug)]
pub struct ScenarioOutput {
    pub result: Value,
    pub plots: Vec<PlotSpec>,
    pub warnings: Vec<String>,
}

/// Dispatches to the scenario implementation.
pub fn run_scenario(scenario: Scenario, rc: &Resolved, force: bool, out: &mut OutDir) -> CliResult<ScenarioOutput> {
    match scenario {
        Scenario::Simulate => simulate(rc, out),
        Scenario::Adjoint => adjoint(rc, out),
        Scenario::Hum => hum(rc, force, out),
        Scenario::NonlinearControl => nonlinear_control(rc, force, out),
        Scenario::CriticalList => critical_list(rc, out),
        Scenario::CriticalCheck => critical_check(rc, out),
        Scenario::ObsScan => obs_scan(rc, out),
        Scenario::GramianScan => gramian_scan(rc, out),
    }
}

fn plot(csv: &str, svg: &str, title: &str, x: &str, ys: &[&str], group: Option<&str>) -> PlotSpec {
    PlotSpec {
        csv: csv.into(),
        svg: svg.into(),
        title: title.into(),
        x: x.into(),
        ys: ys.iter().map(|s| s.to_string()).collect(),
        group: group.map(str::to_string),
    }
}

/// Evenly spaced time levels `0 = n_0 < … < n_{k−1} = nt` (duplicates removed).
fn snapshot_levels(nt: usize, count: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..count).map(|k| (k * nt + (count - 1) / 2) / (count - 1)).collect();
    v.dedup();
    v
}

fn write_trajectory(
    out: &mut OutDir,
    name: &str,
    traj: &Traj,
    grid: &Grid,
    snapshots: usize,
    labels: [&str; 2],
) -> CliResult<()> {
    let xs = grid.xs();
    let mut rows = Vec::new();
    for n in snapshot_levels(grid.nt, snapshots) {
        let s = &traj.states[n];
        for (j, x) in xs.iter().enumerate() {
            rows.push(vec![Cell::from(traj.times[n]), Cell::from(*x), Cell::from(s.u[j]), Cell::from(s.v[j])]);
        }
    }
    out.csv(name, &["t", "x", labels[0], labels[1]], &rows)
}

fn write_state(out: &mut OutDir, name: &str, grid: &Grid, cols: &[(&str, &[f64])]) -> CliResult<()> {
    let xs = grid.xs();
    let mut header = vec!["x"];
    header.extend(cols.iter().map(|(n, _)| *n));
    let rows: Vec<Vec<Cell>> = xs
        .iter()
        .enumerate()
        .map(|(j, x)| std::iter::once(Cell::from(*x)).chain(cols.iter().map(|(_, c)| Cell::from(c[j]))).collect())
        .collect();
    out.csv(name, &header, &rows)
}

fn write_boundary(out: &mut OutDir, name: &str, grid: &Grid, bd: &BoundaryData<f64>) -> CliResult<()> {
    let ts = grid.ts();
    let rows: Vec<Vec<Cell>> = ts
        .iter()
        .enumerate()
        .map(|(n, t)| {
            std::iter::once(Cell::from(*t))
                .chain(Channel::ALL.iter().map(|&ch| Cell::from(bd.channel(ch)[n])))
                .collect()
        })
        .collect();
    out.csv(name, &["t", "h0", "h1", "h2", "g0", "g1", "g2"], &rows)
}

fn norms_at_snapshots(rc: &Resolved, traj: &Traj) -> CliResult<Vec<Value>> {
    snapshot_levels(rc.grid.nt, rc.raw.output.snapshots)
        .into_iter()
        .map(|n| Ok(json!({"t": traj.times[n], "x_norm": x_norm(&traj.states[n], &rc.params, &rc.grid)?})))
        .collect::<ggkdv::Result<Vec<_>>>()
        .map_err(CliError::from)
}

fn simulate(rc: &Resolved, out: &mut OutDir) -> CliResult<ScenarioOutput> {
    let solver = ForwardSolver::new(&rc.params, &rc.grid)?;
    let opts = rc.raw.simulate;
    let traj = if opts.nonlinear {
        let nl = NonlinearOptions { self_terms: opts.self_terms, ..NonlinearOptions::default() };
        solver.run_nonlinear(&rc.init, &rc.boundary, &nl)?
    } else {
        solver.run(&rc.init, &rc.boundary, None)?
    };
    write_trajectory(out, "trajectory.csv", &traj, &rc.grid, rc.raw.output.snapshots, ["u", "v"])?;
    let fin = traj.final_state();
    write_state(out, "final_state.csv", &rc.grid, &[("u", &fin.u), ("v", &fin.v)])?;
    write_boundary(out, "boundary.csv", &rc.grid, &rc.boundary)?;
    let result = json!({
        "nonlinear": opts.nonlinear,
        "final_x_norm": x_norm(fin, &rc.params, &rc.grid)?,
        "final_max_abs": fin.max_abs(),
        "x_norm_at_snapshots": norms_at_snapshots(rc, &traj)?,
    });
    Ok(ScenarioOutput {
        result,
        plots: vec![
            plot("trajectory.csv", "trajectory_u.svg", "u(x, t) snapshots", "x", &["u"], Some("t")),
            plot("trajectory.csv", "trajectory_v.svg", "v(x, t) snapshots", "x", &["v"], Some("t")),
        ],
        warnings: Vec::new(),
    })
}

fn adjoint(rc: &Resolved, out: &mut OutDir) -> CliResult<ScenarioOutput> {
    let (traj, tr) = solve_adjoint_backward(&rc.params, &rc.grid, &rc.final_data)?;
    write_trajectory(out, "adjoint_trajectory.csv", &traj, &rc.grid, rc.raw.output.snapshots, ["phi", "psi"])?;
    let ts = rc.grid.ts();
    let cols: [(&str, &Vec<f64>); 10] = [
        ("phi0", &tr.phi0),
        ("psi0", &tr.psi0),
        ("phi_L", &tr.phi_l),
        ("psi_L", &tr.psi_l),
        ("phi_x_L", &tr.dphi_l),
        ("psi_x_L", &tr.dpsi_l),
        ("phi_xx_0", &tr.d2phi0),
        ("psi_xx_0", &tr.d2psi0),
        ("phi_xx_L", &tr.d2phi_l),
        ("psi_xx_L", &tr.d2psi_l),
    ];
    let mut header = vec!["t"];
    header.extend(cols.iter().map(|(n, _)| *n));
    let rows: Vec<Vec<Cell>> = ts
        .iter()
        .enumerate()
        .map(|(n, t)| std::iter::once(Cell::from(*t)).chain(cols.iter().map(|(_, c)| Cell::from(c[n]))).collect())
        .collect();
    out.csv("traces.csv", &header, &rows)?;
    write_boundary(out, "pairing_coefficients.csv", &rc.grid, &tr.pairing_coefficients(&rc.params))?;
    let result = json!({
        "final_x_norm": x_norm(&rc.final_data, &rc.params, &rc.grid)?,
        "initial_x_norm": x_norm(&traj.states[0], &rc.params, &rc.grid)?,
        "boundary_condition_residual": boundary_residual(&rc.params, &rc.grid, &traj),
        "trace_norm_max": trace_norm_max(&rc.grid, &tr),
    });
    Ok(ScenarioOutput {
        result,
        plots: vec![
            plot("adjoint_trajectory.csv", "adjoint_phi.svg", "phi(x, t) snapshots", "x", &["phi"], Some("t")),
            plot("traces.csv", "traces.svg", "boundary traces", "t", &["phi0", "psi0", "phi_x_L", "psi_x_L"], None),
        ],
        warnings: Vec::new(),
    })
}

/// Builds the control problem, applying the critical-length gate and the
/// one-control certificate.
fn control_problem(rc: &Resolved, force: bool) -> CliResult<(ControlProblem<f64>, Vec<String>, Value)> {
    let mut prob = ControlProblem::new(rc.params, rc.grid, rc.cfg, rc.init.clone(), rc.target.clone())?;
    let mut warnings = std::mem::take(&mut prob.warnings);
    if let Some(gen) = prob.critical_generator(rc.raw.critical.rel_tol) {
        let msg = format!(
            "configuration {:?} at critical length L = {} (generator {gen}); rerun with --force to proceed",
            rc.cfg, rc.grid.length
        );
        if !force {
            return Err(CliError::Precondition(msg));
        }
        warnings.push(format!("forced: {msg}"));
    }
    let mut cert_json = Value::Null;
    if rc.cfg.is_one_control() {
        let c = rc.raw.certificate;
        let cert = one_control_certificate(&rc.params, &rc.grid, c.c_t, c.samples, rc.raw.seed)?;
        cert_json = json!({
            "c_t": cert.c_t,
            "c_t_source": if c.c_t.is_some() { "supplied" } else { "estimated" },
            "beta": cert.beta,
            "condition_value": cert.condition_value,
            "k": cert.k,
            "passes": cert.passes(),
        });
        prob = prob.with_certificate(cert);
    }
    prob.check_preconditions()?;
    Ok((prob, warnings, cert_json))
}

fn hum_options(rc: &Resolved) -> HumOptions<f64> {
    HumOptions { tol: rc.raw.hum.tol, maxit: rc.raw.hum.maxit, multiplier: rc.raw.hum.multiplier.multiplier() }
}

fn write_hum_artifacts(rc: &Resolved, out: &mut OutDir, sol: &HumSolution<f64>) -> CliResult<()> {
    write_boundary(out, "controls.csv", &rc.grid, &sol.controls)?;
    write_trajectory(out, "trajectory.csv", &sol.trajectory, &rc.grid, rc.raw.output.snapshots, ["u", "v"])?;
    let fin = sol.trajectory.final_state();
    write_state(
        out,
        "final_state.csv",
        &rc.grid,
        &[("u", &fin.u), ("v", &fin.v), ("target_u", &rc.target.u), ("target_v", &rc.target.v)],
    )?;
    let rows: Vec<Vec<Cell>> =
        sol.cg_history.iter().enumerate().map(|(k, r)| vec![Cell::from(k), Cell::from(*r)]).collect();
    out.csv("cg_history.csv", &["iteration", "relative_residual"], &rows)
}

fn hum_plots() -> Vec<PlotSpec> {
    vec![
        plot("controls.csv", "controls.svg", "boundary controls", "t", &["h0", "h1", "h2", "g0", "g1", "g2"], None),
        plot(
            "final_state.csv",
            "final_state.svg",
            "final state vs target",
            "x",
            &["u", "v", "target_u", "target_v"],
            None,
        ),
        plot("cg_history.csv", "cg_history.svg", "CG relative residual", "iteration", &["relative_residual"], None),
    ]
}

fn hum_summary(sol: &HumSolution<f64>) -> Value {
    json!({
        "converged": sol.converged,
        "cg_iterations": sol.cg_iterations,
        "relative_residual": sol.relative_residual(),
        "final_error": sol.final_error,
        "gramian_min_eig_estimate": sol.gramian_min_eig_estimate,
        "cg_history": sol.cg_history,
        "controls_max_abs": sol.controls.max_abs(),
    })
}

fn hum(rc: &Resolved, force: bool, out: &mut OutDir) -> CliResult<ScenarioOutput> {
    let (prob, mut warnings, cert) = control_problem(rc, force)?;
    let sol = hum_solve_report(&prob, &hum_options(rc), None)?;
    write_hum_artifacts(rc, out, &sol)?;
    if !sol.converged {
        let err = GgError::CgStagnation {
            iterations: sol.cg_iterations,
            relative_residual: sol.relative_residual(),
            min_eig_estimate: sol.gramian_min_eig_estimate,
        };
        if rc.raw.hum.require_convergence {
            return Err(CliError::Solver(err));
        }
        warnings.push(format!("{}: {err}", err.name()));
    }
    let mut result = hum_summary(&sol);
    result["certificate"] = cert;
    Ok(ScenarioOutput { result, plots: hum_plots(), warnings })
}

fn nonlinear_control(rc: &Resolved, force: bool, out: &mut OutDir) -> CliResult<ScenarioOutput> {
    let (prob, warnings, cert) = control_problem(rc, force)?;
    let n = rc.raw.nonlinear;
    let nl = NonlinearOptions { self_terms: n.self_terms, ..NonlinearOptions::default() };
    let outcome = nonlinear_control_with(&prob, n.delta, n.tol, n.maxit_outer, &hum_options(rc), &nl)?;
    write_hum_artifacts(rc, out, &outcome.solution)?;
    let rows: Vec<Vec<Cell>> = outcome
        .error_history
        .iter()
        .zip(&outcome.drift_history)
        .enumerate()
        .map(|(k, (e, d))| vec![Cell::from(k + 1), Cell::from(*e), Cell::from(*d)])
        .collect();
    out.csv("outer_history.csv", &["iteration", "final_error", "drift_norm"], &rows)?;
    let mut result = hum_summary(&outcome.solution);
    result["outer_iterations"] = json!(outcome.outer_iterations);
    result["outer_converged"] = json!(outcome.converged);
    result["error_history"] = json!(outcome.error_history);
    result["drift_history"] = json!(outcome.drift_history);
    result["certificate"] = cert;
    let mut plots = hum_plots();
    plots.push(plot(
        "outer_history.csv",
        "outer_history.svg",
        "outer iterations",
        "iteration",
        &["final_error", "drift_norm"],
        None,
    ));
    let mut warnings = warnings;
    if !outcome.converged {
        warnings.push(format!("outer loop stopped after {} iterations without meeting tol", outcome.outer_iterations));
    }
    Ok(ScenarioOutput { result, plots, warnings })
}

fn indices_text(c: &CriticalLength) -> String {
    c.generators.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" ")
}

fn critical_list(rc: &Resolved, out: &mut OutDir) -> CliResult<ScenarioOutput> {
    let p = rc.params.get();
    let form = rc.raw.critical.alpha_form.form();
    let set = enumerate_critical_lengths_with(p, rc.raw.critical.lmax, form);
    let rows: Vec<Vec<Cell>> = set
        .lengths
        .iter()
        .map(|c| {
            let res = c.residuals.first();
            vec![
                Cell::from(c.value),
                Cell::from(c.gen().family()),
                Cell::from(c.gen().indices().iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")),
                Cell::from(indices_text(c)),
                Cell::from(c.xi0),
                Cell::from(c.p.map(|z| z.re)),
                Cell::from(c.p.map(|z| z.im)),
                Cell::from(res.map(|r| r.e1.norm())),
                Cell::from(res.map(|_| c.e2_relative(p))),
                Cell::from(res.map(|r| r.e3.norm())),
                Cell::from(res.map(|r| r.e4.norm())),
                Cell::from(res.map(|r| r.e5.norm())),
                Cell::from(res.map(|r| r.e6.norm())),
            ]
        })
        .collect();
    out.csv(
        "critical_lengths.csv",
        &["length", "family", "indices", "generators", "xi0", "p_re", "p_im", "e1", "e2_rel", "e3", "e4", "e5", "e6"],
        &rows,
    )?;
    let result = json!({
        "lmax": rc.raw.critical.lmax,
        "count": set.lengths.len(),
        "lengths": set.values(),
        "generators": set.lengths.iter().map(indices_text).collect::<Vec<_>>(),
    });
    Ok(ScenarioOutput { result, plots: Vec::new(), warnings: Vec::new() })
}

fn lambda_grid(rc: &Resolved) -> Vec<Complex64> {
    rc.raw.scan.lambda_imag.values().into_iter().map(|t| Complex64::new(0.0, t)).collect()
}

fn kernel_scan_csv(rc: &Resolved, out: &mut OutDir, length: f64) -> CliResult<Value> {
    let p = rc.params.get();
    let lambdas = lambda_grid(rc);
    let mut rows = Vec::new();
    let mut summary = serde_json::Map::new();
    for (variant, label) in [(KernelVariant::TwoPoint, "two_point"), (KernelVariant::Cauchy, "cauchy")] {
        let scan = ode_kernel_scan(p, length, &lambdas, variant, rc.raw.scan.kernel_nx)?;
        let mut sig: Vec<f64> = scan.iter().map(|s| s.sigma_min).collect();
        let argmin = scan.iter().min_by(|a, b| a.sigma_min.total_cmp(&b.sigma_min)).map(|s| s.lambda);
        sig.sort_by(f64::total_cmp);
        let median = sig[sig.len() / 2];
        summary.insert(
            label.into(),
            json!({"min": sig[0], "median": median, "min_over_median": sig[0] / median,
                   "argmin_re": argmin.map(|z| z.re), "argmin_im": argmin.map(|z| z.im)}),
        );
        for s in &scan {
            rows.push((label, s.lambda, s.sigma_min));
        }
    }
    // one row per λ with both variants side by side
    let n = lambdas.len();
    let table: Vec<Vec<Cell>> = (0..n)
        .map(|k| {
            vec![Cell::from(rows[k].1.re), Cell::from(rows[k].1.im), Cell::from(rows[k].2), Cell::from(rows[n + k].2)]
        })
        .collect();
    out.csv("kernel_scan.csv", &["lambda_re", "lambda_im", "sigma_min_two_point", "sigma_min_cauchy"], &table)?;
    Ok(Value::Object(summary))
}

fn critical_check(rc: &Resolved, out: &mut OutDir) -> CliResult<ScenarioOutput> {
    let p = rc.params.get();
    let crit = rc.raw.critical;
    let length = crit.length.unwrap_or(rc.grid.length);
    let gen = is_critical(p, length, crit.rel_tol);
    let set = enumerate_critical_lengths_with(p, (2.0 * length).max(crit.lmax), crit.alpha_form.form());
    let nearest = set.lengths.iter().min_by(|a, b| (a.value - length).abs().total_cmp(&(b.value - length).abs()));
    let sharing = root_sharing_oracle(p, Complex64::new(0.0, 0.0), length, crit.root_tol)?;
    let tuple = gen.map(|g| verify_tuple_with(p, g, crit.alpha_form.form()));
    let kernel = kernel_scan_csv(rc, out, length)?;
    out.csv(
        "critical_check.csv",
        &[
            "length",
            "critical",
            "generator",
            "nearest_length",
            "relative_distance",
            "root_sharing_p0",
            "root_spread_p0",
        ],
        &[vec![
            Cell::from(length),
            Cell::from(gen.is_some()),
            Cell::from(gen.map(|g| g.to_string()).unwrap_or_default()),
            Cell::from(nearest.map(|c| c.value)),
            Cell::from(nearest.map(|c| (c.value - length).abs() / c.value)),
            Cell::from(sharing.shared),
            Cell::from(sharing.spread),
        ]],
    )?;
    let result = json!({
        "length": length,
        "critical": gen.is_some(),
        "generator": gen.map(|g| g.to_string()),
        "nearest": nearest.map(|c| json!({"length": c.value, "generators": indices_text(c)})),
        "root_sharing_p0": {"shared": sharing.shared, "spread": sharing.spread},
        "tuple": tuple.map(|t| json!({
            "xi0": t.xi0, "roots": t.roots, "p_re": t.p.map(|z| z.re), "p_im": t.p.map(|z| z.im),
            "e2_relative": t.e2_relative(p),
        })),
        "kernel_scan": kernel,
    });
    Ok(ScenarioOutput {
        result,
        plots: vec![plot(
            "kernel_scan.csv",
            "kernel_scan.svg",
            "smallest singular value vs Im(lambda)",
            "lambda_im",
            &["sigma_min_two_point", "sigma_min_cauchy"],
            None,
        )],
        warnings: Vec::new(),
    })
}

fn scan_grids(rc: &Resolved) -> CliResult<Vec<Grid>> {
    rc.raw.scan.lengths.values().into_iter().map(|l| rc.grid.with_length(l).map_err(CliError::from)).collect()
}

fn obs_scan(rc: &Resolved, out: &mut OutDir) -> CliResult<ScenarioOutput> {
    let s = rc.raw.scan;
    let mult = rc.raw.hum.multiplier.multiplier();
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for g in scan_grids(rc)? {
        let ratio = observability_ratio(rc.cfg, &rc.params, &g, s.samples, rc.raw.seed, mult)?;
        let modal = modal_observability_gramian(rc.cfg, &rc.params, &g, s.modal_modes, mult)?.min();
        let crit = critical_flag(rc, g.length);
        rows.push(vec![
            Cell::from(g.length),
            Cell::from(ratio),
            Cell::from(modal),
            Cell::from(crit.clone().unwrap_or_default()),
        ]);
        entries.push(
            json!({"length": g.length, "observability_ratio": ratio, "modal_min_eigenvalue": modal, "critical": crit}),
        );
    }
    out.csv("obs_scan.csv", &["length", "observability_ratio", "modal_min_eigenvalue", "critical_generator"], &rows)?;
    Ok(ScenarioOutput {
        result: json!({"config_id": format!("{:?}", rc.cfg), "scan": entries}),
        plots: vec![plot(
            "obs_scan.csv",
            "obs_scan.svg",
            "observability vs L",
            "length",
            &["observability_ratio", "modal_min_eigenvalue"],
            None,
        )],
        warnings: Vec::new(),
    })
}

/// Generator of a critical length near `length` when the configuration has critical lengths.
fn critical_flag(rc: &Resolved, length: f64) -> Option<String> {
    if !rc.cfg.has_critical_lengths() {
        return None;
    }
    is_critical(rc.params.get(), length, rc.raw.critical.rel_tol).map(|g| g.to_string())
}

fn gramian_scan(rc: &Resolved, out: &mut OutDir) -> CliResult<ScenarioOutput> {
    let s = rc.raw.scan;
    let mult = rc.raw.hum.multiplier.multiplier();
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for g in scan_grids(rc)? {
        let gram = Gramian::new(&rc.params, &g, rc.cfg, mult)?;
        let (lo, hi) = gramian_min_eigenvalue(&gram, s.lanczos_steps, rc.raw.seed)?;
        let crit = critical_flag(rc, g.length);
        rows.push(vec![
            Cell::from(g.length),
            Cell::from(lo),
            Cell::from(hi),
            Cell::from(crit.clone().unwrap_or_default()),
        ]);
        entries.push(json!({"length": g.length, "min_eigenvalue": lo, "max_eigenvalue": hi, "critical": crit}));
    }
    out.csv("gramian_scan.csv", &["length", "min_eigenvalue", "max_eigenvalue", "critical_generator"], &rows)?;
    Ok(ScenarioOutput {
        result: json!({"config_id": format!("{:?}", rc.cfg), "lanczos_steps": s.lanczos_steps, "scan": entries}),
        plots: vec![plot(
            "gramian_scan.csv",
            "gramian_scan.svg",
            "Gramian min eigenvalue vs L",
            "length",
            &["min_eigenvalue"],
            None,
        )],
        warnings: Vec::new(),
    })
}
