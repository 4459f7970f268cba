//! Acceptance checks. Prints one PASS/FAIL line per check and exits
//! nonzero if any check fails.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_2_PI, PI, SQRT_2, TAU};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use ris_locbf::beamforming::*;
use ris_locbf::channel::*;
use ris_locbf::geometry::*;
use ris_locbf::harness::linear_fit;
use ris_locbf_cli::Cli;

/// Straight-line summation in 40-digit arithmetic, from
/// `crates/core/tests/oracle/nominal_se.py`.
const NOMINAL_SE_REFERENCE: f64 = 11.573_905_480_945_037;

/// Error grid and per-scheme mean curves of a sweep.
type SweepCurves = (Vec<f64>, BTreeMap<String, Vec<f64>>);

type SweepCheck = fn(&[f64], &BTreeMap<String, Vec<f64>>) -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn nominal_geometry(n: usize) -> RisGeometry {
    let s = Scenario::nominal();
    let frame = PlaneFrame::bisector(Vec3::ZERO, s.tx_true, s.rx_true).unwrap();
    RisGeometry::new(frame, n, n, s.wavelength() / 2.0).unwrap()
}

fn fraunhofer() -> Outcome {
    let d = fraunhofer_distance(SQRT_2, wavelength(30e9));
    outcome((350.0..=450.0).contains(&d), format!("2D²/λ for a √2 m aperture at 30 GHz = {d:.3} m, band [350, 450]"))
}

fn geometry_exactness() -> Outcome {
    let tx = Vec3::new(0.0, 12.0, 0.0);
    let rx = Vec3::new(5.0, 0.0, 0.0);
    let delta = excess_path(tx, rx, Vec3::ZERO).unwrap();
    let exact = (delta - 4.0).abs() <= 2.0 * f64::EPSILON * 4.0;

    let lam = wavelength(28e9);
    let mid = tx.midpoint(&rx);
    let planes = [
        PlaneFrame::from_normal(mid, Vec3::Z, Vec3::X).unwrap(),
        PlaneFrame::from_normal(mid, Vec3::new(0.3, 0.2, 1.0), Vec3::X).unwrap(),
        PlaneFrame::from_normal(tx + (rx - tx) * 0.3, Vec3::new(-1.0, 0.7, 0.4), Vec3::Z).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    for frame in &planes {
        for m in 1..=20 {
            let conic = zone_boundary_conic(tx, rx, frame, m, lam).unwrap();
            for (u, v) in conic.sample(64).unwrap_or_default() {
                let d = excess_path(tx, rx, frame.point(u, v)).unwrap();
                worst = worst.max((d - m as f64 * lam / 2.0).abs());
                samples += 1;
            }
        }
    }
    let bound = 1e-9 * 13.0;
    outcome(
        exact && samples == planes.len() * 20 * 64 && worst < bound,
        format!("δ(5-12-13) − 4 = {:.3e} m; worst conic residual {worst:.3e} m over {samples} points, bound {bound:.1e} m", delta - 4.0),
    )
}

fn tposj_limits() -> Outcome {
    let s = Scenario::nominal();
    let lam = s.wavelength();
    let map = build_fresnel_map(s.tx_true, s.rx_true, &nominal_geometry(80), lam).unwrap();
    let mut ok = true;
    let mut counts = Vec::new();
    for rule in [BucketingRule::ZoneParity, BucketingRule::NearestPhase] {
        let configs: Vec<RisConfiguration> = (0..=10)
            .map(|k| tposj_configure(&map, &TposjParams::new(k as f64 * 0.05 * lam, rule)).unwrap())
            .collect();
        ok &= configs[10].reflect_count() == 6400 && configs[0].reflect_count() == 0;
        for w in configs.windows(2) {
            ok &= (0..map.len()).all(|k| !w[0].is_reflecting(k) || w[1].is_reflecting(k));
        }
        counts.push(format!(
            "{rule}: {:?}",
            configs.iter().map(RisConfiguration::reflect_count).collect::<Vec<_>>()
        ));
    }
    outcome(ok, format!("reflecting counts over ξ = 0..λ/2 ({})", counts.join("; ")))
}

fn quantization_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6400);
    let g = CascadedGains::from_gains((0..6400).map(|_| Complex64::cis(rng.random_range(0.0..TAU))).collect());
    let cfg = RisConfiguration::all_reflect_one_bit(nearest_phase_bits(&g)).unwrap();
    let ratio = effective_channel(&g, &cfg).unwrap().norm() / g.magnitude_sum();
    outcome(
        (ratio - FRAC_2_PI).abs() < 0.03,
        format!("coherent ratio {ratio:.5}, target 2/π = {FRAC_2_PI:.5} ± 0.03"),
    )
}

fn oracle_dominance() -> Outcome {
    let s = Scenario::nominal();
    let lam = s.wavelength();
    let frame = PlaneFrame::bisector(Vec3::ZERO, s.tx_true, s.rx_true).unwrap();
    let geom = RisGeometry::new(frame, 4, 3, lam / 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut violations = 0;
    let mut gray_mismatch = 0;
    for instance in 0..100 {
        let rx = s.rx_true + Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let gains = cascaded_gains_between(s.tx_true, rx, &geom, lam, true).unwrap();
        let abs = |c: &RisConfiguration| effective_channel(&gains, c).unwrap().norm();
        let warm = RisConfiguration::all_reflect_one_bit(nearest_phase_bits(&gains)).unwrap();
        let greedy = greedy_onebit_search(&gains, &warm, 1000).unwrap().config;
        let best = exhaustive_onebit(&gains).unwrap();
        let chain = [abs(&continuous_conjugate(&gains)), abs(&best.config), abs(&greedy), abs(&warm)];
        let tol = 1e-12 * chain[0];
        violations += chain.windows(2).filter(|w| w[0] < w[1] - tol).count();

        if instance < 5 {
            // |h|² is compared on the scale of its largest possible value
            let scale = gains.magnitude_sum().powi(2);
            for_each_onebit_state(&gains, |pattern, value| {
                let bits: Vec<bool> = (0..12).map(|i| pattern & (1 << i) != 0).collect();
                let naive = effective_channel(&gains, &RisConfiguration::from_bits(&bits)).unwrap().norm_sqr();
                if (value - naive).abs() > 1e-12 * scale {
                    gray_mismatch += 1;
                }
            })
            .unwrap();
        }
    }
    outcome(
        violations == 0 && gray_mismatch == 0,
        format!("{violations} ordering violations over 100 instances (N = 12); {gray_mismatch} Gray-code mismatches over 5 × 4096 states"),
    )
}

/// Runs the command line in-process, exactly as the binary would.
fn run_cli(args: &[&str]) -> Result<(), String> {
    let argv = std::iter::once("ris-locbf").chain(args.iter().copied());
    let cli = Cli::try_parse_from(argv).map_err(|e| e.to_string())?;
    ris_locbf_cli::run(&cli).map(|_| ()).map_err(|e| format!("{args:?}: {e}"))
}

fn csv_rows(text: &str) -> Vec<BTreeMap<String, String>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    lines
        .map(|l| header.iter().map(|h| h.to_string()).zip(l.split(',').map(str::to_string)).collect())
        .collect()
}

/// `mean_se[(scheme, xi)][epsilon index]` from a sweep CSV.
fn sweep_means(text: &str) -> SweepCurves {
    let mut eps = Vec::new();
    let mut means: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for row in csv_rows(text) {
        let e: f64 = row["epsilon_m"].parse().unwrap();
        if !eps.contains(&e) {
            eps.push(e);
        }
        let key = if row["xi_wavelengths"].is_empty() {
            row["scheme"].clone()
        } else {
            format!("tposj@{}", row["xi_wavelengths"].parse::<f64>().unwrap())
        };
        means.entry(key).or_default().push(row["mean_se"].parse().unwrap());
    }
    (eps, means)
}

fn fmt_curve(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ")
}

fn ordering_at_zero(means: &BTreeMap<String, Vec<f64>>) -> Outcome {
    let se: Vec<f64> = ["tposj@0.1", "tposj@0.25", "tposj@0.5"].iter().map(|k| means[*k][0]).collect();
    outcome(
        se[0] < se[1] && se[1] < se[2],
        format!("mean SE at ε = 0 for ξ = 0.1λ, 0.25λ, 0.5λ: {}", fmt_curve(&se)),
    )
}

fn crossover(eps: &[f64], means: &BTreeMap<String, Vec<f64>>) -> Outcome {
    let (lo, hi) = (&means["tposj@0.1"], &means["tposj@0.5"]);
    let first_high_wins = (0..eps.len()).find(|&i| hi[i] > lo[i]);
    let later_low_wins = first_high_wins.and_then(|i| (i + 1..eps.len()).find(|&j| lo[j] > hi[j]));
    outcome(
        later_low_wins.is_some(),
        format!(
            "ξ = 0.1λ: [{}] vs ξ = 0.5λ: [{}]; crossover {}",
            fmt_curve(lo),
            fmt_curve(hi),
            later_low_wins.map_or("not found".to_string(), |j| format!("at ε = {:.4e} m", eps[j]))
        ),
    )
}

fn random_floor(eps: &[f64], means: &BTreeMap<String, Vec<f64>>) -> Outcome {
    let last = eps.len() - 1;
    let random = means["random"][last];
    let mut worst = ("", 0.0f64);
    for (name, curve) in means {
        let gap = (curve[last] - random).abs() / random;
        if gap > worst.1 {
            worst = (name.as_str(), gap);
        }
    }
    let summary: Vec<String> = means.iter().map(|(k, v)| format!("{k} {:.3}", v[last])).collect();
    outcome(
        worst.1 <= 0.15,
        format!(
            "at ε = {:.4e} m: {}; largest gap to random {:.1}% ({})",
            eps[last],
            summary.join(", "),
            100.0 * worst.1,
            worst.0
        ),
    )
}

fn complexity_shape(dir: &Path) -> Outcome {
    let cfg = dir.join("complexity.cfg");
    fs::write(
        &cfg,
        "complexity_schemes = tposj, exhaustive, sdr, mjce\ncomplexity_n_list = 100, 1000, 10000\n\
complexity_exhaustive_n_list = 10, 12, 14, 16\ncomplexity_repetitions = 21\n",
    )
    .unwrap();
    let out = dir.join("complexity");
    if let Err(e) = run_cli(&["complexity", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]) {
        return outcome(false, e);
    }
    let rows = csv_rows(&fs::read_to_string(out.join("complexity.csv")).unwrap());
    let pick = |scheme: &str, col: &str| -> Vec<f64> {
        rows.iter().filter(|r| r["scheme"] == scheme).map(|r| r[col].parse().unwrap()).collect()
    };
    let n = pick("tposj", "N");
    let wall = pick("tposj", "wall_seconds");
    let (_, _, r2) = linear_fit(&n, &wall);
    let states = pick("exhaustive", "op_count");
    let sizes = pick("exhaustive", "N");
    let exact_ratio = states
        .windows(2)
        .zip(sizes.windows(2))
        .all(|(s, n)| s[1] / s[0] == 2f64.powf(n[1] - n[0]));
    let labels_ok = rows.iter().all(|r| {
        let model = r["scheme"] == "sdr" || r["scheme"] == "mjce";
        (r["kind"] == "model") == model && r["wall_seconds"].is_empty() == model
    }) && rows.iter().filter(|r| r["kind"] == "model").count() == 6;
    outcome(
        r2 > 0.99 && exact_ratio && labels_ok,
        format!(
            "tposj wall R² = {r2:.5} over N = 1e2, 1e3, 1e4 (medians {}); exhaustive states {:?} exact 2^ΔN: {exact_ratio}; model rows labeled: {labels_ok}",
            wall.iter().map(|w| format!("{w:.2e}")).collect::<Vec<_>>().join(", "),
            states
        ),
    )
}

fn determinism(dir: &Path) -> (Outcome, Option<String>) {
    let mut bodies = Vec::new();
    for (name, workers) in [("a", "1"), ("b", "1"), ("c", "8")] {
        let out = dir.join(name);
        if let Err(e) = run_cli(&["sweep-error", "--seed", "2024", "--workers", workers, "--out", out.to_str().unwrap()]) {
            return (outcome(false, e), None);
        }
        bodies.push(fs::read(out.join("sweep_error.csv")).unwrap());
    }
    let same_runs = bodies[0] == bodies[1];
    let same_workers = bodies[0] == bodies[2];
    let text = String::from_utf8(bodies.swap_remove(0)).ok();
    (
        outcome(
            same_runs && same_workers,
            format!("default sweep, seed 2024: repeat identical {same_runs}, 1 vs 8 workers identical {same_workers}"),
        ),
        text,
    )
}

/// Plain-array evaluation of the nominal link, sharing no code with the
/// library.
fn straight_line_nominal_se() -> f64 {
    let lam = 299_792_458.0 / 28e9;
    let (tx, rx) = ([0.0, 12.0, 0.0], [5.0, 0.0, 0.0]);
    let dist = |a: [f64; 3], b: [f64; 3]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
    let r = 0.5f64.sqrt();
    let (mut re, mut im) = (0.0, 0.0);
    for i in 0..80 {
        for j in 0..80 {
            let a = (i as f64 - 39.5) * lam / 2.0;
            let b = (j as f64 - 39.5) * lam / 2.0;
            let q = [a * r, -a * r, -b];
            let (d1, d2) = (dist(tx, q), dist(q, rx));
            let zone = (2.0 * (d1 + d2 - 13.0) / lam).floor() as i64 + 1;
            let amp = if zone % 2 == 1 { 1.0 } else { -1.0 } * lam * lam / (16.0 * PI * PI * d1 * d2);
            let phase = -2.0 * PI * (d1 + d2) / lam;
            re += amp * phase.cos();
            im += amp * phase.sin();
        }
    }
    (1.0 + (re * re + im * im) / 1e-12).log2()
}

fn pipeline_value() -> Outcome {
    let s = Scenario::nominal();
    let geom = nominal_geometry(80);
    let map = build_fresnel_map(s.tx_true, s.rx_presumed, &geom, s.wavelength()).unwrap();
    let cfg = tposj_configure(&map, &TposjParams::new(s.wavelength() / 2.0, BucketingRule::ZoneParity)).unwrap();
    let h = effective_channel(&cascaded_gains(&s, &geom).unwrap(), &cfg).unwrap();
    let se = spectral_efficiency(h, s.transmit_power, s.noise_power);
    let inline = straight_line_nominal_se();
    let rel_ref = ((se - NOMINAL_SE_REFERENCE) / NOMINAL_SE_REFERENCE).abs();
    let rel_inline = ((se - inline) / inline).abs();
    outcome(
        rel_ref < 1e-9 && rel_inline < 1e-9,
        format!("pipeline SE {se:.15} bit/s/Hz; rel. diff {rel_ref:.2e} to the 40-digit oracle, {rel_inline:.2e} to the f64 summation; bound 1e-9"),
    )
}

fn guarded(check: impl FnOnce() -> Outcome) -> Outcome {
    panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        outcome(false, format!("panicked: {msg}"))
    })
}

fn main() -> ExitCode {
    let dir = TempDir::new().expect("temp dir");
    let (det, sweep_csv) = determinism(dir.path());
    let parsed = sweep_csv.as_deref().map(sweep_means);
    let from_sweep = |check: SweepCheck| match &parsed {
        Some((eps, means)) => guarded(|| check(eps, means)),
        None => outcome(false, "sweep output unavailable"),
    };

    let results = [
        ("1", "Fraunhofer distance", guarded(fraunhofer)),
        ("2", "geometry exactness", guarded(geometry_exactness)),
        ("3", "TPOSJ limits and monotonicity", guarded(tposj_limits)),
        ("4", "one-bit quantization law", guarded(quantization_law)),
        ("5", "oracle dominance and Gray-code enumeration", guarded(oracle_dominance)),
        ("6a", "zero-error ordering in ξ", from_sweep(|_, m| ordering_at_zero(m))),
        ("6b", "small-ξ crossover at large error", from_sweep(crossover)),
        ("6c", "random-phase floor at largest error", from_sweep(random_floor)),
        ("7", "complexity growth", guarded(|| complexity_shape(dir.path()))),
        ("8", "end-to-end determinism", det),
        ("9", "pipeline value against summation oracle", guarded(pipeline_value)),
    ];
    let mut failed = 0;
    for (id, name, result) in &results {
        println!("{} [{id}] {name}: {}", if result.pass { "PASS" } else { "FAIL" }, result.detail);
        failed += usize::from(!result.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
