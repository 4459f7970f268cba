//! Seeded Monte-Carlo experiments: spectral efficiency under location error,
//! configuration cost versus aperture size, and small-array oracle runs.
//!
//! Every trial draws from its own RNG stream derived from the run seed and
//! the trial coordinates, and results are aggregated in index order, so the
//! output does not depend on the number of worker threads.

use std::fmt;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::beamforming::{
    continuous_conjugate, exhaustive_onebit, greedy_onebit_search, nearest_phase_bits, random_configuration,
    tposj_configure, tposj_configure_counted, BucketingRule, RisConfiguration, TposjParams, MAX_EXHAUSTIVE_ELEMENTS,
};
use crate::channel::{cascaded_gains, cascaded_gains_between, effective_channel, spectral_efficiency, CascadedGains, Scenario};
use crate::error::{Error, Result};
use crate::geometry::{build_fresnel_map, PlaneFrame, Point3, RisGeometry, Vec3};
use crate::localization::{sample_location_error, stream_rng, AxisMask, ErrorModel};

const STREAM_LOCATION: u64 = 1;
const STREAM_RANDOM_CONFIG: u64 = 2;
const STREAM_ORACLE: u64 = 3;

fn stream_id(purpose: u64, point: usize, trial: usize) -> u64 {
    (purpose << 56) | ((point as u64 & 0xff_ffff) << 32) | (trial as u64 & 0xffff_ffff)
}

/// Starting point of the greedy search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GreedyInit {
    /// Nearest-phase quantization of the ideal phases.
    #[default]
    Warm,
    /// All phases zero.
    Cold,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// Location-driven TPOSJ with threshold `xi` in meters.
    Tposj { xi: f64 },
    /// Nearest-phase one-bit phases from free-space gains at the presumed
    /// location, every element reflecting.
    BenchmarkOneBit,
    /// Continuous phases from free-space gains at the presumed location.
    BenchmarkContinuous,
    Random,
    Greedy { init: GreedyInit, max_sweeps: usize },
    Exhaustive,
}

impl Scheme {
    pub fn label(&self) -> &'static str {
        match self {
            Scheme::Tposj { .. } => "tposj",
            Scheme::BenchmarkOneBit => "benchmark-onebit",
            Scheme::BenchmarkContinuous => "benchmark-continuous",
            Scheme::Random => "random",
            Scheme::Greedy { .. } => "greedy",
            Scheme::Exhaustive => "exhaustive",
        }
    }

    pub fn xi(&self) -> Option<f64> {
        match self {
            Scheme::Tposj { xi } => Some(*xi),
            _ => None,
        }
    }

    fn needs_gains(&self) -> bool {
        !matches!(self, Scheme::Tposj { .. } | Scheme::Random)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Tposj { xi } => write!(f, "tposj(xi={xi:e} m)"),
            other => f.write_str(other.label()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub scenario: Scenario,
    pub geometry: RisGeometry,
    pub schemes: Vec<Scheme>,
    /// Location error magnitudes in meters.
    pub error_magnitudes: Vec<f64>,
    pub trials: usize,
    pub rule: BucketingRule,
    pub error_mask: AxisMask,
    /// Also perturb the transmitter with an independent draw.
    pub error_on_tx: bool,
}

impl SweepSpec {
    pub fn new(scenario: Scenario, geometry: RisGeometry, schemes: Vec<Scheme>, error_magnitudes: Vec<f64>, trials: usize) -> Self {
        Self {
            scenario,
            geometry,
            schemes,
            error_magnitudes,
            trials,
            rule: BucketingRule::ZoneParity,
            error_mask: AxisMask::ALL,
            error_on_tx: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidParameter("no schemes to run".into()));
        }
        let lam = self.scenario.wavelength();
        for scheme in &self.schemes {
            match scheme {
                Scheme::Tposj { xi } => TposjParams::new(*xi, self.rule).validate(lam)?,
                Scheme::Exhaustive if self.geometry.len() > MAX_EXHAUSTIVE_ELEMENTS => {
                    return Err(Error::TooManyElements {
                        n: self.geometry.len(),
                        max: MAX_EXHAUSTIVE_ELEMENTS,
                    })
                }
                _ => {}
            }
        }
        for &eps in &self.error_magnitudes {
            ErrorModel::fixed_magnitude(eps).with_mask(self.error_mask).validate()?;
        }
        Ok(())
    }
}

/// Summary of one `(scheme, ε)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub epsilon: f64,
    pub mean_se: f64,
    pub std_se: f64,
    pub p05: f64,
    pub p95: f64,
    pub min_se: f64,
    pub max_se: f64,
    pub trials: usize,
    pub seed: u64,
}

impl SweepRow {
    pub fn xi_wavelengths(&self, wavelength: f64) -> Option<f64> {
        self.scheme.xi().map(|xi| xi / wavelength)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Ordered by scheme, then error magnitude.
    pub rows: Vec<SweepRow>,
    pub metadata: Vec<(String, String)>,
}

impl SweepResult {
    pub fn row(&self, scheme: &Scheme, epsilon: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.scheme == *scheme && r.epsilon == epsilon)
    }

    pub fn mean_se(&self, scheme: &Scheme, epsilon: f64) -> Option<f64> {
        self.row(scheme, epsilon).map(|r| r.mean_se)
    }
}

/// Descriptive metadata shared by every output of a scenario run.
pub fn scenario_metadata(scenario: &Scenario, geometry: &RisGeometry, rule: BucketingRule) -> Vec<(String, String)> {
    let frame = geometry.frame();
    let fmt3 = |v: Vec3| format!("{:.16e},{:.16e},{:.16e}", v.x, v.y, v.z);
    vec![
        ("code_version".into(), env!("CARGO_PKG_VERSION").into()),
        ("wavelength_m".into(), format!("{:.16e}", scenario.wavelength())),
        ("ris_frame_center".into(), fmt3(frame.center())),
        ("ris_frame_u".into(), fmt3(frame.u_axis())),
        ("ris_frame_v".into(), fmt3(frame.v_axis())),
        ("ris_frame_normal".into(), fmt3(frame.normal())),
        ("ris_elements".into(), format!("{}x{}", geometry.nx(), geometry.ny())),
        ("ris_spacing_m".into(), format!("{:.16e}", geometry.spacing())),
        ("bucketing_rule".into(), rule.to_string()),
        (
            "phase_reference".into(),
            "tposj: direct-path phase; csi schemes: direct path if present else shortest-path element".into(),
        ),
    ]
}

struct TrialContext<'a> {
    spec: &'a SweepSpec,
    truth: &'a CascadedGains,
    wavelength: f64,
}

impl TrialContext<'_> {
    /// Spectral efficiency of every scheme for one `(ε index, trial)` item.
    fn run(&self, point: usize, trial: usize) -> Result<Vec<f64>> {
        let spec = self.spec;
        let scenario = &spec.scenario;
        let model = ErrorModel::fixed_magnitude(spec.error_magnitudes[point]).with_mask(spec.error_mask);
        let mut loc_rng = stream_rng(scenario.seed, stream_id(STREAM_LOCATION, point, trial));
        let rx_presumed = scenario.rx_true + sample_location_error(&model, &mut loc_rng)?;
        let tx_presumed = if spec.error_on_tx {
            scenario.tx_true + sample_location_error(&model, &mut loc_rng)?
        } else {
            scenario.tx_true
        };

        let map = if spec.schemes.iter().any(|s| matches!(s, Scheme::Tposj { .. })) {
            Some(build_fresnel_map(tx_presumed, rx_presumed, &spec.geometry, self.wavelength)?)
        } else {
            None
        };
        let presumed = if spec.schemes.iter().any(Scheme::needs_gains) {
            Some(cascaded_gains_between(
                tx_presumed,
                rx_presumed,
                &spec.geometry,
                self.wavelength,
                scenario.los_blocked,
            )?)
        } else {
            None
        };

        spec.schemes
            .iter()
            .map(|scheme| {
                let config = match *scheme {
                    Scheme::Tposj { xi } => {
                        tposj_configure(map.as_ref().expect("map built"), &TposjParams::new(xi, spec.rule))?
                    }
                    Scheme::Random => {
                        let mut rng = stream_rng(scenario.seed, stream_id(STREAM_RANDOM_CONFIG, point, trial));
                        random_configuration(spec.geometry.len(), &mut rng)
                    }
                    _ => csi_configuration(scheme, presumed.as_ref().expect("gains built"))?,
                };
                let h = effective_channel(self.truth, &config)?;
                Ok(spectral_efficiency(h, scenario.transmit_power, scenario.noise_power))
            })
            .collect()
    }
}

fn csi_configuration(scheme: &Scheme, gains: &CascadedGains) -> Result<RisConfiguration> {
    match *scheme {
        Scheme::BenchmarkOneBit => RisConfiguration::all_reflect_one_bit(nearest_phase_bits(gains)),
        Scheme::BenchmarkContinuous => Ok(continuous_conjugate(gains)),
        Scheme::Greedy { init, max_sweeps } => {
            let start = greedy_start(gains, init)?;
            Ok(greedy_onebit_search(gains, &start, max_sweeps)?.config)
        }
        Scheme::Exhaustive => Ok(exhaustive_onebit(gains)?.config),
        Scheme::Tposj { .. } | Scheme::Random => unreachable!("not a CSI scheme"),
    }
}

fn greedy_start(gains: &CascadedGains, init: GreedyInit) -> Result<RisConfiguration> {
    match init {
        GreedyInit::Warm => RisConfiguration::all_reflect_one_bit(nearest_phase_bits(gains)),
        GreedyInit::Cold => RisConfiguration::all_reflect_one_bit(vec![0.0; gains.len()]),
    }
}

fn with_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

/// Runs every `(scheme, ε, trial)` combination on `workers` threads.
pub fn run_error_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    spec.validate()?;
    let truth = cascaded_gains(&spec.scenario, &spec.geometry)?;
    let ctx = TrialContext {
        spec,
        truth: &truth,
        wavelength: spec.scenario.wavelength(),
    };
    let points = spec.error_magnitudes.len();
    let items: Vec<(usize, usize)> = (0..points)
        .flat_map(|p| (0..spec.trials).map(move |t| (p, t)))
        .collect();
    let outcomes: Vec<Result<Vec<f64>>> =
        with_pool(workers, || items.par_iter().map(|&(p, t)| ctx.run(p, t)).collect())?;
    let outcomes: Vec<Vec<f64>> = outcomes.into_iter().collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(spec.schemes.len() * points);
    for (s, scheme) in spec.schemes.iter().enumerate() {
        for (p, &epsilon) in spec.error_magnitudes.iter().enumerate() {
            let samples: Vec<f64> = outcomes[p * spec.trials..(p + 1) * spec.trials]
                .iter()
                .map(|v| v[s])
                .collect();
            let stats = SampleStats::from_samples(&samples);
            rows.push(SweepRow {
                scheme: *scheme,
                epsilon,
                mean_se: stats.mean,
                std_se: stats.std,
                p05: stats.p05,
                p95: stats.p95,
                min_se: stats.min,
                max_se: stats.max,
                trials: spec.trials,
                seed: spec.scenario.seed,
            });
        }
    }
    Ok(SweepResult {
        rows,
        metadata: scenario_metadata(&spec.scenario, &spec.geometry, spec.rule),
    })
}

/// Mean, sample standard deviation, extremes and 5th/95th percentiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub p05: f64,
    pub p95: f64,
}

impl SampleStats {
    pub fn from_samples(samples: &[f64]) -> Self {
        assert!(!samples.is_empty(), "statistics of an empty sample");
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
        let n = samples.len() as f64;
        // Rounding can push the mean of identical samples off the sample.
        let mean = if min == max {
            min
        } else {
            (samples.iter().sum::<f64>() / n).clamp(min, max)
        };
        let std = if samples.len() > 1 && min != max {
            (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std,
            min,
            max,
            p05: percentile(&sorted, 0.05),
            p95: percentile(&sorted, 0.95),
        }
    }
}

/// Linear interpolation between closest ranks of sorted data.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

/// Least-squares line through `(x, y)`; returns `(slope, intercept, R²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComplexityScheme {
    Tposj,
    Greedy,
    Exhaustive,
    /// Semidefinite-relaxation beamforming, cost model only.
    SdrModel,
    /// Multiuser joint channel estimation, cost model only.
    MjceModel,
}

impl ComplexityScheme {
    pub fn label(&self) -> &'static str {
        match self {
            ComplexityScheme::Tposj => "tposj",
            ComplexityScheme::Greedy => "greedy",
            ComplexityScheme::Exhaustive => "exhaustive",
            ComplexityScheme::SdrModel => "sdr",
            ComplexityScheme::MjceModel => "mjce",
        }
    }

    pub fn is_model(&self) -> bool {
        matches!(self, ComplexityScheme::SdrModel | ComplexityScheme::MjceModel)
    }

    pub fn parse(s: &str) -> Result<Self> {
        [
            ComplexityScheme::Tposj,
            ComplexityScheme::Greedy,
            ComplexityScheme::Exhaustive,
            ComplexityScheme::SdrModel,
            ComplexityScheme::MjceModel,
        ]
        .into_iter()
        .find(|k| k.label() == s)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown complexity scheme '{s}'")))
    }
}

/// Constants of the closed-form cost curves, in flops: `sdr·N^4.5` and
/// `mjce·N²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModels {
    pub sdr_constant: f64,
    pub mjce_constant: f64,
}

impl Default for CostModels {
    fn default() -> Self {
        Self {
            sdr_constant: 1.0,
            mjce_constant: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityRow {
    pub scheme: ComplexityScheme,
    pub n: usize,
    pub op_count: f64,
    /// Median wall-clock time; `None` for model-only curves.
    pub wall_seconds: Option<f64>,
}

/// Near-square RIS with exactly `n` elements on the scenario's default
/// placement.
pub fn bench_geometry(scenario: &Scenario, n: usize, spacing: f64) -> Result<RisGeometry> {
    if n == 0 {
        return Err(Error::InvalidParameter("element count must be positive".into()));
    }
    let ny = (1..=n).take_while(|d| d * d <= n).filter(|d| n.is_multiple_of(*d)).last().unwrap_or(1);
    let frame = PlaneFrame::bisector(Vec3::ZERO, scenario.tx_true, scenario.rx_true)?;
    RisGeometry::new(frame, n / ny, ny, spacing)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Counted operations and median wall-clock cost of each scheme per
/// element count. Model schemes are evaluated in closed form.
pub fn run_complexity_bench(
    scenario: &Scenario,
    n_list: &[usize],
    schemes: &[ComplexityScheme],
    repetitions: usize,
    models: &CostModels,
) -> Result<Vec<ComplexityRow>> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("element counts must be nonempty and ascending".into()));
    }
    if repetitions == 0 {
        return Err(Error::InvalidParameter("repetitions must be >= 1".into()));
    }
    if schemes.contains(&ComplexityScheme::Exhaustive) {
        if let Some(&n) = n_list.iter().find(|&&n| n > MAX_EXHAUSTIVE_ELEMENTS) {
            return Err(Error::TooManyElements {
                n,
                max: MAX_EXHAUSTIVE_ELEMENTS,
            });
        }
    }
    let lam = scenario.wavelength();
    let params = TposjParams::new(lam / 2.0, BucketingRule::ZoneParity);
    let mut rows = Vec::new();
    for &scheme in schemes {
        for &n in n_list {
            let nf = n as f64;
            let row = match scheme {
                ComplexityScheme::SdrModel => ComplexityRow {
                    scheme,
                    n,
                    op_count: models.sdr_constant * nf.powf(4.5),
                    wall_seconds: None,
                },
                ComplexityScheme::MjceModel => ComplexityRow {
                    scheme,
                    n,
                    op_count: models.mjce_constant * nf * nf,
                    wall_seconds: None,
                },
                _ => {
                    let geom = bench_geometry(scenario, n, lam / 2.0)?;
                    let gains = if scheme == ComplexityScheme::Tposj {
                        None
                    } else {
                        Some(cascaded_gains(scenario, &geom)?)
                    };
                    let mut times = Vec::with_capacity(repetitions);
                    let mut ops = 0u64;
                    for _ in 0..repetitions {
                        let start = Instant::now();
                        ops = measured_run(scheme, scenario, &geom, gains.as_ref(), &params)?;
                        times.push(start.elapsed().as_secs_f64());
                    }
                    ComplexityRow {
                        scheme,
                        n,
                        op_count: ops as f64,
                        wall_seconds: Some(median(times)),
                    }
                }
            };
            rows.push(row);
        }
    }
    Ok(rows)
}

fn measured_run(
    scheme: ComplexityScheme,
    scenario: &Scenario,
    geom: &RisGeometry,
    gains: Option<&CascadedGains>,
    params: &TposjParams,
) -> Result<u64> {
    match scheme {
        ComplexityScheme::Tposj => {
            let (config, ops) =
                tposj_configure_counted(scenario.tx_true, scenario.rx_presumed, geom, scenario.wavelength(), params)?;
            std::hint::black_box(config);
            Ok(ops)
        }
        ComplexityScheme::Greedy => {
            let gains = gains.expect("gains for greedy");
            let start = greedy_start(gains, GreedyInit::Warm)?;
            Ok(greedy_onebit_search(gains, &start, 1000)?.flip_tests)
        }
        ComplexityScheme::Exhaustive => Ok(exhaustive_onebit(gains.expect("gains for exhaustive"))?.states),
        ComplexityScheme::SdrModel | ComplexityScheme::MjceModel => unreachable!("model schemes are not run"),
    }
}

/// One scheme's result on one oracle instance.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub instance: usize,
    pub n: usize,
    pub scheme: &'static str,
    pub abs_h: f64,
    pub se: f64,
    /// `|h_eff|` relative to the exhaustive optimum.
    pub ratio_to_exhaustive: f64,
}

/// Exhaustive, greedy, warm-start, TPOSJ (ξ = λ/2), continuous and random
/// configurations on `instances` small-array links. Instance `k` moves the
/// receiver by a seeded random offset of up to `max_offset` meters.
pub fn run_oracle_comparison(
    scenario: &Scenario,
    geom: &RisGeometry,
    rule: BucketingRule,
    instances: usize,
    max_offset: f64,
) -> Result<Vec<OracleRow>> {
    if geom.len() > MAX_EXHAUSTIVE_ELEMENTS {
        return Err(Error::TooManyElements {
            n: geom.len(),
            max: MAX_EXHAUSTIVE_ELEMENTS,
        });
    }
    let lam = scenario.wavelength();
    let mut rows = Vec::new();
    for k in 0..instances {
        let mut rng = stream_rng(scenario.seed, stream_id(STREAM_ORACLE, 0, k));
        let radius = max_offset * rand::Rng::random::<f64>(&mut rng);
        let rx: Point3 = scenario.rx_true + sample_location_error(&ErrorModel::fixed_magnitude(radius), &mut rng)?;
        let gains = cascaded_gains_between(scenario.tx_true, rx, geom, lam, scenario.los_blocked)?;

        let exhaustive = exhaustive_onebit(&gains)?.config;
        let warm = greedy_start(&gains, GreedyInit::Warm)?;
        let greedy = greedy_onebit_search(&gains, &warm, 1000)?.config;
        let tposj = tposj_configure(
            &build_fresnel_map(scenario.tx_true, rx, geom, lam)?,
            &TposjParams::new(lam / 2.0, rule),
        )?;
        let continuous = continuous_conjugate(&gains);
        let random = random_configuration(geom.len(), &mut rng);

        let best = effective_channel(&gains, &exhaustive)?.norm();
        let schemes: [(&'static str, &RisConfiguration); 6] = [
            ("exhaustive", &exhaustive),
            ("greedy", &greedy),
            ("warm-start", &warm),
            ("tposj", &tposj),
            ("continuous", &continuous),
            ("random", &random),
        ];
        for (name, config) in schemes {
            let h: Complex64 = effective_channel(&gains, config)?;
            rows.push(OracleRow {
                instance: k,
                n: geom.len(),
                scheme: name,
                abs_h: h.norm(),
                se: spectral_efficiency(h, scenario.transmit_power, scenario.noise_power),
                ratio_to_exhaustive: if best > 0.0 { h.norm() / best } else { 0.0 },
            });
        }
    }
    Ok(rows)
}
