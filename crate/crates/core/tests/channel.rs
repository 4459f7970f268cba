use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ris_locbf::beamforming::*;
use ris_locbf::channel::*;
use ris_locbf::geometry::*;

/// Output of `tests/oracle/nominal_se.py` (40-digit arithmetic).
const NOMINAL_SE_REFERENCE: f64 = 11.573_905_480_945_037;

fn nominal_geometry(scenario: &Scenario) -> RisGeometry {
    let frame = PlaneFrame::bisector(Vec3::ZERO, scenario.tx_true, scenario.rx_true).unwrap();
    RisGeometry::new(frame, 80, 80, scenario.wavelength() / 2.0).unwrap()
}

/// Independent straight-line evaluation of the nominal link with plain
/// arrays: no library geometry, bucketing or channel code.
fn straight_line_nominal_se() -> f64 {
    let lam = 299_792_458.0 / 28e9;
    let tx = [0.0, 12.0, 0.0];
    let rx = [5.0, 0.0, 0.0];
    let norm = |a: [f64; 3]| (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let sub = |a: [f64; 3], b: [f64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    // normal bisects the directions to tx (+y) and rx (+x)
    let r = 0.5f64.sqrt();
    let u = [r, -r, 0.0];
    let v = [0.0, 0.0, -1.0];
    let los = norm(sub(tx, rx));
    let (mut re, mut im) = (0.0, 0.0);
    for i in 0..80 {
        for j in 0..80 {
            let a = (i as f64 - 39.5) * lam / 2.0;
            let b = (j as f64 - 39.5) * lam / 2.0;
            let q = [a * u[0] + b * v[0], a * u[1] + b * v[1], a * u[2] + b * v[2]];
            let d1 = norm(sub(tx, q));
            let d2 = norm(sub(q, rx));
            let zone = (2.0 * (d1 + d2 - los) / lam).floor() as i64 + 1;
            let sign = if zone % 2 == 1 { 1.0 } else { -1.0 };
            let amp = sign * lam * lam / (16.0 * PI * PI * d1 * d2);
            let phase = -2.0 * PI * (d1 + d2) / lam;
            re += amp * phase.cos();
            im += amp * phase.sin();
        }
    }
    (1.0 + (re * re + im * im) / 1e-12).log2()
}

fn nominal_tposj_se(xi_wavelengths: f64) -> f64 {
    let s = Scenario::nominal();
    let geom = nominal_geometry(&s);
    let lam = s.wavelength();
    let map = build_fresnel_map(s.tx_true, s.rx_presumed, &geom, lam).unwrap();
    let cfg = tposj_configure(&map, &TposjParams::new(xi_wavelengths * lam, BucketingRule::ZoneParity)).unwrap();
    let h = effective_channel(&cascaded_gains(&s, &geom).unwrap(), &cfg).unwrap();
    spectral_efficiency(h, s.transmit_power, s.noise_power)
}

#[test]
fn nominal_spectral_efficiency_matches_straight_line_oracle() {
    let oracle = straight_line_nominal_se();
    let se = nominal_tposj_se(0.5);
    assert!(((se - oracle) / oracle).abs() < 1e-9, "{se} vs {oracle}");
    assert!(((se - NOMINAL_SE_REFERENCE) / NOMINAL_SE_REFERENCE).abs() < 1e-9, "{se}");
}

#[test]
fn reciprocity_preserves_magnitudes_and_excess_paths() {
    let s = Scenario::nominal();
    let geom = nominal_geometry(&s);
    let lam = s.wavelength();
    let fwd = cascaded_gains_between(s.tx_true, s.rx_true, &geom, lam, true).unwrap();
    let rev = cascaded_gains_between(s.rx_true, s.tx_true, &geom, lam, true).unwrap();
    for (a, b) in fwd.gains().iter().zip(rev.gains()) {
        assert!((a.norm() - b.norm()).abs() <= 1e-15 * a.norm());
    }
    let m1 = build_fresnel_map(s.tx_true, s.rx_true, &geom, lam).unwrap();
    let m2 = build_fresnel_map(s.rx_true, s.tx_true, &geom, lam).unwrap();
    for (a, b) in m1.excess_paths().iter().zip(m2.excess_paths()) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn cascaded_gain_magnitudes_follow_the_product_law() {
    let s = Scenario {
        los_blocked: false,
        ..Scenario::nominal()
    };
    let geom = nominal_geometry(&s);
    let lam = s.wavelength();
    let g = cascaded_gains(&s, &geom).unwrap();
    for (c, q) in g.gains().iter().zip(element_positions(&geom)) {
        let (d1, d2) = (s.tx_true.distance(&q), q.distance(&s.rx_true));
        let expected = lam * lam / (16.0 * PI * PI * d1 * d2);
        assert!((c.norm() - expected).abs() <= 1e-14 * expected);
        let phase_gap = (c.arg() + 2.0 * PI * (d1 + d2) / lam).rem_euclid(2.0 * PI);
        assert!(phase_gap.min(2.0 * PI - phase_gap) < 1e-9);
    }
    assert!((g.direct().norm() - lam / (4.0 * PI * 13.0)).abs() < 1e-18);
}

#[test]
fn absorbing_everything_leaves_only_the_direct_path() {
    let s = Scenario::nominal();
    let geom = nominal_geometry(&s);
    let g = cascaded_gains(&s, &geom).unwrap();
    let cfg = RisConfiguration::new(vec![ElementMode::Absorb; g.len()], vec![0.0; g.len()], PhaseModel::OneBit).unwrap();
    assert_eq!(effective_channel(&g, &cfg).unwrap(), Complex64::new(0.0, 0.0));
}

#[test]
fn single_reflecting_element_passes_its_gain() {
    let g = CascadedGains::from_gains(vec![
        Complex64::new(0.3, 0.1),
        Complex64::new(-0.2, 0.5),
        Complex64::new(0.7, -0.4),
    ]);
    let cfg = RisConfiguration::new(
        vec![ElementMode::Absorb, ElementMode::Reflect, ElementMode::Absorb],
        vec![PI, 0.0, PI],
        PhaseModel::OneBit,
    )
    .unwrap();
    assert_eq!(effective_channel(&g, &cfg).unwrap(), Complex64::new(-0.2, 0.5));
}

fn random_gains(seed: u64, n: usize, direct: bool) -> CascadedGains {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gains = (0..n)
        .map(|_| Complex64::from_polar(rng.random_range(0.01..1.0), rng.random_range(-PI..PI)))
        .collect();
    let g = CascadedGains::from_gains(gains);
    if direct {
        g.with_direct(Complex64::from_polar(rng.random_range(0.01..1.0), rng.random_range(-PI..PI)))
    } else {
        g
    }
}

proptest! {
    #[test]
    fn effective_channel_obeys_the_triangle_bound(seed in any::<u64>(), n in 1usize..200, direct in any::<bool>(), cfg_seed in any::<u64>()) {
        let g = random_gains(seed, n, direct);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg_seed);
        let modes = (0..n).map(|_| if rng.random::<bool>() { ElementMode::Reflect } else { ElementMode::Absorb }).collect();
        let phases = (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        let cfg = RisConfiguration::new(modes, phases, PhaseModel::Continuous).unwrap();
        let h = effective_channel(&g, &cfg).unwrap();
        let bound = g.direct().norm() + g.magnitude_sum();
        prop_assert!(h.norm() <= bound * (1.0 + 1e-12));
        let ideal = effective_channel(&g, &continuous_conjugate(&g)).unwrap();
        prop_assert!((ideal.norm() - bound).abs() <= 1e-12 * bound);
    }

    #[test]
    fn spectral_efficiency_is_strictly_monotone(a in 0.0f64..1e-3, b in 0.0f64..1e-3, p in 1e-3f64..10.0) {
        prop_assume!(a != b);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let se_lo = spectral_efficiency(Complex64::new(lo, 0.0), p, 1e-12);
        let se_hi = spectral_efficiency(Complex64::new(0.0, hi), p, 1e-12);
        prop_assert!(se_lo >= 0.0);
        prop_assert!(se_hi > se_lo || (hi - lo) / hi < 1e-12);
    }
}
