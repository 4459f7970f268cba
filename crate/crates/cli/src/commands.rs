//! Subcommand implementations. Each returns the tables to write, keyed by
//! file name.

use ris_locbf::beamforming::{nearest_phase_bits, tposj_configure, RisConfiguration, TposjParams};
use ris_locbf::channel::{cascaded_gains, effective_channel, spectral_efficiency};
use ris_locbf::geometry::{
    build_far_field_map, build_fresnel_map, far_field_boundary_conic, far_field_plane_gradient, fraunhofer_distance,
    zone_boundary_conic, ConicSection, FresnelMap, PlaneFrame, Point3,
};
use ris_locbf::harness::{
    linear_fit, run_complexity_bench, run_error_sweep, run_oracle_comparison, scenario_metadata, ComplexityRow,
    ComplexityScheme, Scheme, SweepSpec,
};
use ris_locbf::protocol::{effective_rate, location_driven_crossover, required_overhead, FrameModel, FrameScheme};

use crate::config::{RunConfig, SchemeName};
use crate::table::{format_float, Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    /// Per-element Fresnel maps and zone-boundary conics, near and far field.
    Map,
    /// Spectral efficiency versus location error for the configured schemes.
    SweepError,
    /// Spectral efficiency versus location error across a fine ξ grid.
    SweepXi,
    /// Configuration cost versus element count.
    Complexity,
    /// Frame overhead and effective rate per scheme.
    Frame,
    /// Small-array comparison against exhaustive search.
    Oracle,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Map => "map",
            Command::SweepError => "sweep-error",
            Command::SweepXi => "sweep-xi",
            Command::Complexity => "complexity",
            Command::Frame => "frame",
            Command::Oracle => "oracle",
        }
    }
}

pub type Outputs = Vec<(&'static str, Table)>;

pub fn execute(command: Command, config: &RunConfig, workers: usize) -> ris_locbf::Result<Outputs> {
    match command {
        Command::Map => map(config),
        Command::SweepError => {
            let schemes = sweep_schemes(config);
            Ok(vec![("sweep_error.csv", sweep(config, command, schemes, workers)?)])
        }
        Command::SweepXi => {
            let lam = config.wavelength();
            let schemes = config
                .xi_sweep_wavelengths
                .iter()
                .map(|&x| (Scheme::Tposj { xi: x * lam }, Some(x)))
                .collect();
            Ok(vec![("sweep_xi.csv", sweep(config, command, schemes, workers)?)])
        }
        Command::Complexity => Ok(vec![("complexity.csv", complexity(config)?)]),
        Command::Frame => Ok(vec![("frame.csv", frame(config)?)]),
        Command::Oracle => Ok(vec![("oracle.csv", oracle(config)?)]),
    }
}

fn new_table(command: Command, config: &RunConfig, columns: &[&'static str]) -> ris_locbf::Result<Table> {
    let mut table = Table::new(columns);
    table.comment(format!("ris-locbf {}", command.name()));
    for (key, value) in config.entries() {
        table.comment(format!("config: {key} = {value}"));
    }
    let geometry = config.geometry()?;
    for (key, value) in scenario_metadata(&config.scenario(), &geometry, config.rule) {
        table.comment(format!("info: {key} = {value}"));
    }
    Ok(table)
}

fn map(config: &RunConfig) -> ris_locbf::Result<Outputs> {
    let geom = config.geometry()?;
    let lam = config.wavelength();
    let (tx, rx) = (config.tx, config.rx);
    let params = TposjParams::new(config.map_xi_wavelengths * lam, config.rule);
    let near = build_fresnel_map(tx, rx, &geom, lam)?;
    let far = build_far_field_map(tx, rx, &geom, lam)?;
    let (du, dv) = far_field_plane_gradient(tx, rx, geom.frame())?;

    let columns = ["i", "j", "delta_m", "zone", "residual_m", "mode", "theta_rad"];
    let conic_columns = ["m", "A", "B", "C", "D", "E", "F", "classification"];
    let mut out = Vec::new();
    for (field, fresnel) in [("near", &near), ("far", &far)] {
        let ris = tposj_configure(fresnel, &params)?;
        let mut table = new_table(Command::Map, config, &columns)?;
        table.comment(format!("info: field = {field}"));
        table.comment(format!("info: far_field_gradient_m_per_m = {},{}", format_float(du), format_float(dv)));
        table.comment(format!(
            "info: fraunhofer_distance_m = {}",
            format_float(fraunhofer_distance(geom.aperture_diagonal(), lam))
        ));
        table.comment(format!("info: reflecting_elements = {}", ris.reflect_count()));
        for k in 0..geom.len() {
            let (i, j) = geom.grid_coords(k);
            table.push(vec![
                i.into(),
                j.into(),
                fresnel.excess_paths()[k].into(),
                fresnel.zones()[k].into(),
                fresnel.residuals()[k].into(),
                ris.modes()[k].as_str().into(),
                ris.phases()[k].into(),
            ]);
        }
        let m_max = config.map_m_max.unwrap_or_else(|| fresnel.max_zone().unwrap_or(0) + 1);
        let mut conics = new_table(Command::Map, config, &conic_columns)?;
        conics.comment(format!("info: field = {field}"));
        for m in 1..=m_max {
            let conic = boundary(field, tx, rx, geom.frame(), m, lam)?;
            let mut row: Vec<Cell> = vec![m.into()];
            row.extend(conic.coefficients().map(Cell::Float));
            row.push(conic.kind().as_str().into());
            conics.push(row);
        }
        let (map_name, conic_name) = if field == "near" {
            ("map_near.csv", "conics_near.csv")
        } else {
            ("map_far.csv", "conics_far.csv")
        };
        out.push((map_name, table));
        out.push((conic_name, conics));
    }
    Ok(out)
}

fn boundary(field: &str, tx: Point3, rx: Point3, frame: &PlaneFrame, m: u64, lam: f64) -> ris_locbf::Result<ConicSection> {
    if field == "near" {
        zone_boundary_conic(tx, rx, frame, m, lam)
    } else {
        far_field_boundary_conic(tx, rx, frame, m, lam)
    }
}

/// Configured schemes, with TPOSJ expanded over the ξ list. The second
/// element carries ξ in wavelengths for output.
pub fn sweep_schemes(config: &RunConfig) -> Vec<(Scheme, Option<f64>)> {
    let lam = config.wavelength();
    let mut out = Vec::new();
    for name in &config.schemes {
        match name {
            SchemeName::Tposj => {
                out.extend(config.xi_list_wavelengths.iter().map(|&x| (Scheme::Tposj { xi: x * lam }, Some(x))))
            }
            SchemeName::BenchmarkOneBit => out.push((Scheme::BenchmarkOneBit, None)),
            SchemeName::BenchmarkContinuous => out.push((Scheme::BenchmarkContinuous, None)),
            SchemeName::Random => out.push((Scheme::Random, None)),
            SchemeName::Greedy => out.push((
                Scheme::Greedy {
                    init: config.greedy_init,
                    max_sweeps: config.greedy_max_sweeps,
                },
                None,
            )),
            SchemeName::Exhaustive => out.push((Scheme::Exhaustive, None)),
        }
    }
    out
}

fn sweep(config: &RunConfig, command: Command, schemes: Vec<(Scheme, Option<f64>)>, workers: usize) -> ris_locbf::Result<Table> {
    let lam = config.wavelength();
    let mut spec = SweepSpec::new(
        config.scenario(),
        config.geometry()?,
        schemes.iter().map(|(s, _)| *s).collect(),
        config.error_grid_wavelengths.iter().map(|e| e * lam).collect(),
        config.trials,
    );
    spec.rule = config.rule;
    spec.error_mask = config.error_axes;
    spec.error_on_tx = config.error_on_tx;
    let result = run_error_sweep(&spec, workers)?;

    let columns = ["scheme", "xi_wavelengths", "epsilon_m", "mean_se", "std_se", "p05", "p95", "trials"];
    let mut table = new_table(command, config, &columns)?;
    let points = spec.error_magnitudes.len();
    for (index, row) in result.rows.iter().enumerate() {
        let xi = schemes[index / points].1;
        table.push(vec![
            row.scheme.label().into(),
            xi.into(),
            row.epsilon.into(),
            row.mean_se.into(),
            row.std_se.into(),
            row.p05.into(),
            row.p95.into(),
            row.trials.into(),
        ]);
    }
    Ok(table)
}

fn complexity(config: &RunConfig) -> ris_locbf::Result<Table> {
    let scenario = config.scenario();
    let (exhaustive, others): (Vec<ComplexityScheme>, Vec<ComplexityScheme>) = config
        .complexity_schemes
        .iter()
        .partition(|s| **s == ComplexityScheme::Exhaustive);
    let mut rows: Vec<ComplexityRow> = Vec::new();
    if !others.is_empty() {
        rows.extend(run_complexity_bench(
            &scenario,
            &config.complexity_n_list,
            &others,
            config.complexity_repetitions,
            &config.cost_models,
        )?);
    }
    if !exhaustive.is_empty() {
        rows.extend(run_complexity_bench(
            &scenario,
            &config.complexity_exhaustive_n_list,
            &exhaustive,
            config.complexity_repetitions,
            &config.cost_models,
        )?);
    }

    let columns = ["scheme", "N", "op_count", "wall_seconds", "kind"];
    let mut table = new_table(Command::Complexity, config, &columns)?;
    let tposj: Vec<&ComplexityRow> = rows.iter().filter(|r| r.scheme == ComplexityScheme::Tposj).collect();
    if tposj.len() >= 2 {
        let xs: Vec<f64> = tposj.iter().map(|r| r.n as f64).collect();
        let ys: Vec<f64> = tposj.iter().filter_map(|r| r.wall_seconds).collect();
        let (slope, _, r2) = linear_fit(&xs, &ys);
        table.comment(format!("info: tposj_wall_fit_seconds_per_element = {}", format_float(slope)));
        table.comment(format!("info: tposj_wall_fit_r2 = {}", format_float(r2)));
    }
    for r in &rows {
        table.push(vec![
            r.scheme.label().into(),
            r.n.into(),
            r.op_count.into(),
            r.wall_seconds.into(),
            if r.scheme.is_model() { "model" } else { "measured" }.into(),
        ]);
    }
    Ok(table)
}

/// Zero-error spectral efficiency of TPOSJ (ξ = λ/2) and of the one-bit
/// CSI benchmark on the configured link.
fn zero_error_se(config: &RunConfig) -> ris_locbf::Result<(f64, f64)> {
    let scenario = config.scenario();
    let geom = config.geometry()?;
    let lam = config.wavelength();
    let gains = cascaded_gains(&scenario, &geom)?;
    let fresnel: FresnelMap = build_fresnel_map(scenario.tx_true, scenario.rx_true, &geom, lam)?;
    let tposj = tposj_configure(&fresnel, &TposjParams::new(lam / 2.0, config.rule))?;
    let csi = RisConfiguration::all_reflect_one_bit(nearest_phase_bits(&gains))?;
    let se = |cfg: &RisConfiguration| -> ris_locbf::Result<f64> {
        let h = effective_channel(&gains, cfg)?;
        Ok(spectral_efficiency(h, scenario.transmit_power, scenario.noise_power))
    };
    Ok((se(&tposj)?, se(&csi)?))
}

fn frame(config: &RunConfig) -> ris_locbf::Result<Table> {
    let (se_location, se_csi) = match (config.frame_se_location, config.frame_se_csi) {
        (Some(a), Some(b)) => (a, b),
        (a, b) => {
            let (auto_loc, auto_csi) = zero_error_se(config)?;
            (a.unwrap_or(auto_loc), b.unwrap_or(auto_csi))
        }
    };
    let base: FrameModel = config.frame;
    let columns = ["scheme", "R", "N", "L", "overhead_symbols", "overhead_fraction", "effective_rate"];
    let mut table = new_table(Command::Frame, config, &columns)?;
    table.comment(format!("info: se_location = {}", format_float(se_location)));
    table.comment(format!("info: se_csi = {}", format_float(se_csi)));
    let crossover = location_driven_crossover(se_location, se_csi, &base, base.frame_length)?;
    table.comment(format!(
        "info: location_driven_crossover_n = {}",
        crossover.map_or("none".to_string(), |n| n.to_string())
    ));
    for scheme in FrameScheme::ALL {
        let se = if scheme == FrameScheme::LocationDriven { se_location } else { se_csi };
        for &n in &config.frame_n_list {
            let model = FrameModel {
                scheme,
                elements_per_ris: n,
                ..base
            };
            let overhead = required_overhead(&model)?;
            let rate = if overhead > model.frame_length { 0.0 } else { effective_rate(se, &model)? };
            table.push(vec![
                scheme.as_str().into(),
                model.num_ris.into(),
                n.into(),
                model.frame_length.into(),
                overhead.into(),
                (overhead as f64 / model.frame_length as f64).into(),
                rate.into(),
            ]);
        }
    }
    Ok(table)
}

fn oracle(config: &RunConfig) -> ris_locbf::Result<Table> {
    let geom = config.geometry_with(config.oracle_nx, config.oracle_ny)?;
    let rows = run_oracle_comparison(
        &config.scenario(),
        &geom,
        config.rule,
        config.oracle_instances,
        config.oracle_max_offset_m,
    )?;
    let columns = ["instance", "N", "scheme", "abs_h", "se", "ratio_to_exhaustive"];
    let mut table = new_table(Command::Oracle, config, &columns)?;
    table.comment(format!("info: oracle_elements = {}x{}", geom.nx(), geom.ny()));
    for r in &rows {
        table.push(vec![
            r.instance.into(),
            r.n.into(),
            r.scheme.into(),
            r.abs_h.into(),
            r.se.into(),
            r.ratio_to_exhaustive.into(),
        ]);
    }
    Ok(table)
}
