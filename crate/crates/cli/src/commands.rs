use pilotwave::ontology_p::{p_trajectories, weak_position_of};
use pilotwave::ontology_x::{integrate_trajectories, seed_from_density, weak_momentum_profile};
use pilotwave::optics::{calibration_curve, write_calibration_csv};
use pilotwave::oscillator::{quadrature_trajectories, weak_conjugate_quadrature, ThetaFrame};
use pilotwave::wavepacket::{check_aliasing, evolve_analytic, momentum_rep};
use pilotwave::weakmeas::{simulate_pbohm_pipeline, simulate_xbohm_pipeline, CoupledObservable, PipelineReport};
use pilotwave::{TrajectoryBundle, WeakValueProfile};

use crate::config::{RunConfig, TheorySelection};
use crate::error::CliError;
use crate::output::{Output, Table};
use crate::svg::{LineChart, Series, PALETTE};

/// Rows below this fraction of peak density are left out of snapshot tables.
const SNAPSHOT_SUPPORT: f64 = 1e-10;
/// Measured weak values under this fraction of peak counts are not plotted.
const PLOT_SUPPORT: f64 = 1e-4;

/// Outcome of a command whose files were all written.
#[derive(Debug, Default)]
pub struct Warnings {
    /// Set when a numerical guard fired; the command exits with code 3.
    pub guard: Option<String>,
}

fn support_window(density: &[f64], fraction: f64) -> std::ops::Range<usize> {
    let peak = density.iter().copied().fold(0.0, f64::max);
    let first = density.iter().position(|&d| d >= fraction * peak).unwrap_or(0);
    let last = density.iter().rposition(|&d| d >= fraction * peak).unwrap_or(0);
    first..last + 1
}

fn flags(a: &[bool], b: &[bool]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| if *x || *y { 1.0 } else { 0.0 }).collect()
}

fn weak_table(axis_label: &str, ideal: &WeakValueProfile, measured: &WeakValueProfile, window: std::ops::Range<usize>) -> Table {
    let unit = ideal
        .value_label
        .find('[')
        .map_or("", |i| &ideal.value_label[i..]);
    let name = ideal.value_label.split(' ').next().unwrap_or("value");
    let counts_unit = if axis_label.starts_with('x') { "[1/m]" } else { "[1/rad]" };
    let w = window;
    Table::new()
        .column(axis_label, ideal.axis[w.clone()].to_vec())
        .column(&format!("{name} ideal {unit}"), ideal.value[w.clone()].to_vec())
        .column(&format!("{name} measured {unit}"), measured.value[w.clone()].to_vec())
        .column(&format!("spread {unit}"), measured.spread[w.clone()].to_vec())
        .column(&format!("counts {counts_unit}"), measured.counts[w.clone()].to_vec())
        .column("flagged", flags(&ideal.flagged[w.clone()], &measured.flagged[w]))
}

fn weak_chart(title: &str, x_label: &str, ideal: &WeakValueProfile, measured: &WeakValueProfile, window: std::ops::Range<usize>) -> LineChart {
    let mut chart = LineChart::new(title, x_label, ideal.value_label.clone());
    let peak = measured.counts.iter().copied().fold(0.0, f64::max);
    let w = window;
    chart.push(Series::new(
        "ideal weak value",
        w.clone().map(|i| (ideal.axis[i], ideal.value[i])).collect(),
        PALETTE[0],
    ));
    let shown: Vec<usize> = w.filter(|&i| measured.counts[i] >= PLOT_SUPPORT * peak).collect();
    chart.push(
        Series::new(
            "simulated measurement",
            shown.iter().map(|&i| (ideal.axis[i], measured.value[i])).collect(),
            PALETTE[1],
        )
        .errors(shown.iter().map(|&i| measured.spread[i]).collect()),
    );
    chart
}

fn pipeline_guard(name: &str, report: &PipelineReport) -> Option<String> {
    (report.clamped > 0).then(|| format!("{name}: {} contrast values clamped to [-1, 1]", report.clamped))
}

/// Intensities and weak values in both representations at one plane.
pub fn snapshot(cfg: &RunConfig, z: f64, out: &mut Output) -> Result<Warnings, CliError> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(CliError::usage(format!("--z must be positive, got {z}")));
    }
    let scene = &cfg.scene;
    let k = scene.wavenumber();
    let field = evolve_analytic(scene, z)?;
    check_aliasing(&field)?;
    let spectrum = momentum_rep(&field, k)?;
    let tag = format!("snapshot_z{z:.3}");

    let rho = field.density();
    let xw = support_window(&rho, SNAPSHOT_SUPPORT);
    out.table(
        &format!("{tag}_position_intensity"),
        &Table::new()
            .column("x [m]", field.axis[xw.clone()].to_vec())
            .column("intensity [1/m]", rho[xw.clone()].to_vec()),
    )?;
    let mut chart = LineChart::new(format!("position intensity, z = {z:.3} m"), "x [m]", "intensity [1/m]");
    chart.push(Series::new("|psi(x)|^2", xw.clone().map(|i| (field.axis[i], rho[i])).collect(), PALETTE[0]));
    out.chart(&format!("{tag}_position_intensity"), &chart)?;

    let rho_p = spectrum.density();
    let pw = support_window(&rho_p, SNAPSHOT_SUPPORT);
    out.table(
        &format!("{tag}_momentum_intensity"),
        &Table::new()
            .column("theta [rad]", spectrum.axis[pw.clone()].to_vec())
            .column("intensity [1/rad]", rho_p[pw.clone()].to_vec()),
    )?;
    let mut chart = LineChart::new("momentum intensity", "theta [rad]", "intensity [1/rad]");
    chart.push(Series::new("|psi(theta)|^2", pw.clone().map(|i| (spectrum.axis[i], rho_p[i])).collect(), PALETTE[0]));
    out.chart(&format!("{tag}_momentum_intensity"), &chart)?;

    let noise = cfg.weakmeas.noise();
    let ideal_x = weak_momentum_profile(&field, k)?;
    let xrep = simulate_xbohm_pipeline(
        scene,
        &cfg.lenses,
        z,
        &cfg.weakmeas.calcite(CoupledObservable::TransverseMomentum),
        &noise,
    )?;
    out.table(&format!("{tag}_xbohm_weak"), &weak_table("x [m]", &ideal_x, &xrep.profile, xw.clone()))?;
    out.chart(
        &format!("{tag}_xbohm_weak"),
        &weak_chart("x-Bohm: weak momentum, position post-selection", "x [m]", &ideal_x, &xrep.profile, xw),
    )?;

    let ideal_p = weak_position_of(&field, k)?;
    let prep = simulate_pbohm_pipeline(
        scene,
        &cfg.lenses,
        z,
        &cfg.weakmeas.calcite(CoupledObservable::EffectivePosition),
        &noise,
    )?;
    out.table(&format!("{tag}_pbohm_weak"), &weak_table("theta [rad]", &ideal_p, &prep.profile, pw.clone()))?;
    out.chart(
        &format!("{tag}_pbohm_weak"),
        &weak_chart("p-Bohm: weak position, momentum post-selection", "theta [rad]", &ideal_p, &prep.profile, pw),
    )?;

    let guard = [pipeline_guard("x-Bohm pipeline", &xrep), pipeline_guard("p-Bohm pipeline", &prep)]
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    Ok(Warnings {
        guard: (!guard.is_empty()).then(|| guard.join("; ")),
    })
}

fn path_chart(title: &str, y_label: &str, bundle: &TrajectoryBundle, ontic: bool, highlight: Option<usize>) -> LineChart {
    let mut chart = LineChart::new(title, "z [m]", y_label);
    chart.legend = false;
    let paths = if ontic { &bundle.ontic_paths } else { &bundle.derived_paths };
    for (i, path) in paths.iter().enumerate() {
        if Some(i) == highlight {
            continue;
        }
        let points = bundle.planes.iter().copied().zip(path.iter().copied()).collect();
        chart.push(Series::new("", points, "#9aa7b8").width(0.8));
    }
    if let Some(h) = highlight {
        let points = bundle.planes.iter().copied().zip(paths[h].iter().copied()).collect();
        chart.push(Series::new(format!("path {h}"), points, PALETTE[1]).width(2.4));
        chart.legend = true;
    }
    chart
}

fn emit_bundle(out: &mut Output, stem: &str, bundle: &TrajectoryBundle) -> Result<(), CliError> {
    out.data(stem, |buf| bundle.write_csv(buf), || bundle.to_json())
}

/// Position and momentum paths under the selected theories.
pub fn trajectories(
    cfg: &RunConfig,
    theory: TheorySelection,
    seeds: usize,
    highlight: Option<usize>,
    out: &mut Output,
) -> Result<Warnings, CliError> {
    if seeds == 0 {
        return Err(CliError::usage("--seeds must be positive"));
    }
    if let Some(h) = highlight {
        if h >= seeds {
            return Err(CliError::usage(format!("--highlight {h} is out of range for {seeds} seeds")));
        }
    }
    let scene = &cfg.scene;
    let planes = cfg.planes.planes()?;
    check_aliasing(&evolve_analytic(scene, planes[planes.len() - 1])?)?;
    let mut guard = None;

    if matches!(theory, TheorySelection::X | TheorySelection::Both) {
        let start = evolve_analytic(scene, planes[0])?;
        let bundle = integrate_trajectories(scene, &seed_from_density(&start, seeds)?, &planes)?;
        emit_bundle(out, "xbohm_trajectories", &bundle)?;
        out.chart("xbohm_positions", &path_chart("x-Bohm position paths", "x [m]", &bundle, true, highlight))?;
        out.chart(
            "xbohm_momenta",
            &path_chart("x-Bohm momentum (weak value) paths", "theta [rad]", &bundle, false, highlight),
        )?;
        let lost = bundle.truncated.iter().filter(|&&t| t).count();
        if lost > 0 {
            guard = Some(format!("{lost} x-Bohm paths left the grid"));
        }
    }
    if matches!(theory, TheorySelection::P | TheorySelection::Both) {
        let bundle = p_trajectories(scene, &planes, seeds)?;
        emit_bundle(out, "pbohm_trajectories", &bundle)?;
        out.chart(
            "pbohm_positions",
            &path_chart("p-Bohm position (weak value) paths", "x [m]", &bundle, false, highlight),
        )?;
        out.chart("pbohm_momenta", &path_chart("p-Bohm momentum paths", "theta [rad]", &bundle, true, highlight))?;
    }
    Ok(Warnings { guard })
}

/// Lens-2 displacement against effective propagation distance.
pub fn lens_calibration(cfg: &RunConfig, out: &mut Output) -> Result<Warnings, CliError> {
    let c = &cfg.calibration;
    let points = calibration_curve(&cfg.lenses, c.d_min, cfg.lenses.f1, c.points)?;
    out.data(
        "lens_calibration",
        |buf| write_calibration_csv(&points, buf),
        || Ok(serde_json::to_string_pretty(&points)?),
    )?;
    let mut chart = LineChart::new("lens 2 calibration", "lens 2 displacement [m]", "effective distance [m]");
    chart.push(Series::new(
        "y = f1 (f1 - d) / d",
        points.iter().map(|p| (p.displacement, p.effective_distance)).collect(),
        PALETTE[0],
    ));
    chart.markers.push((0.0, "far-field origin".into()));
    out.chart("lens_calibration", &chart)?;
    Ok(Warnings::default())
}

/// θ-Bohm quadrature paths and conjugate weak values for each frame angle.
pub fn oscillator(cfg: &RunConfig, thetas: &[f64], out: &mut Output) -> Result<Warnings, CliError> {
    let o = &cfg.oscillator;
    if thetas.is_empty() {
        return Err(CliError::usage("at least one theta is required"));
    }
    if o.samples < 2 || !(o.periods > 0.0) || o.seeds == 0 {
        return Err(CliError::usage("oscillator needs samples >= 2, periods > 0 and seeds > 0"));
    }
    let mut guard = None;
    for &theta in thetas {
        let frame = ThetaFrame::new(theta, o.omega)?;
        let span = o.periods * frame.period();
        let times: Vec<f64> = (0..o.samples)
            .map(|i| span * i as f64 / (o.samples - 1) as f64)
            .collect();
        let tag = format!("oscillator_theta{theta:.4}");
        let bundle = quadrature_trajectories(&o.state, &frame, &times, o.seeds)?;
        emit_bundle(out, &format!("{tag}_trajectories"), &bundle)?;
        let mut chart = LineChart::new(format!("theta-Bohm paths, theta = {theta:.4}"), "t", "x_theta");
        chart.legend = false;
        for path in &bundle.ontic_paths {
            chart.push(Series::new("", times.iter().copied().zip(path.iter().copied()).collect(), PALETTE[0]).width(0.8));
        }
        out.chart(&format!("{tag}_trajectories"), &chart)?;

        let weak = weak_conjugate_quadrature(&o.state, &frame, 0.0)?;
        out.data(&format!("{tag}_weak"), |buf| weak.write_csv(buf), || weak.to_json())?;
        let window = support_window(&weak.counts, PLOT_SUPPORT);
        let mut chart = LineChart::new(format!("weak p_theta at t = 0, theta = {theta:.4}"), "x_theta", "p_theta_w");
        chart.push(Series::new("p_theta weak value", window.map(|i| (weak.axis[i], weak.value[i])).collect(), PALETTE[0]));
        out.chart(&format!("{tag}_weak"), &chart)?;

        if bundle.truncated.iter().any(|&t| t) {
            guard = Some(format!("oscillator paths left the grid at theta = {theta}"));
        }
    }
    Ok(Warnings { guard })
}
