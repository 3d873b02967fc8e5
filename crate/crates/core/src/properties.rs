//! Randomized invariants across the public API.

use proptest::prelude::*;

use crate::continuum::{self, Boundary, ContinuumModel, Grid1D, WaveFunctionSet};
use crate::discrete::{app_step, gapp_step, smooth};
use crate::energy::{
    parse_model_file, total_energy, write_model_file, Assignment, EnergyModel, PairTable, SoftAssignmentSet,
};
use crate::ldpc::{GappDecoder, LdpcCode};

/// A model over `domains` with all pairs `i < j` coupled, energies from `vals`.
fn build(domains: &[usize], vals: &[f64], hbar: f64) -> EnergyModel {
    let mut it = vals.iter().copied().cycle();
    let unary = domains
        .iter()
        .map(|&d| (0..d).map(|_| it.next().unwrap()).collect())
        .collect();
    let mut m = EnergyModel::new(unary, hbar);
    for i in 0..domains.len() {
        for j in i + 1..domains.len() {
            let t = PairTable::from_fn(domains[i], domains[j], |_, _| it.next().unwrap());
            m.set_pair(i, j, t).unwrap();
        }
    }
    m
}

fn beliefs(domains: &[usize], raw: &[f64]) -> SoftAssignmentSet {
    let mut it = raw.iter().copied().cycle();
    SoftAssignmentSet::from_tables(
        domains
            .iter()
            .map(|&d| (0..d).map(|_| it.next().unwrap()).collect())
            .collect(),
    )
    .unwrap()
}

fn case() -> impl Strategy<Value = (Vec<usize>, Vec<f64>, f64, Vec<f64>)> {
    (
        prop::collection::vec(1usize..4, 1..6),
        prop::collection::vec(0.0f64..3.0, 1..40),
        0.2f64..3.0,
        prop::collection::vec(0.01f64..1.0, 1..20),
    )
}

fn assert_close(a: &SoftAssignmentSet, b: &SoftAssignmentSet, tol: f64) -> Result<(), TestCaseError> {
    prop_assert!(a.max_l1_distance(b) <= tol, "distance {}", a.max_l1_distance(b));
    Ok(())
}

proptest! {
    #[test]
    fn gapp_outputs_are_distributions((d, v, hbar, r) in case(), alpha in 0.0f64..3.0, beta in 0.0f64..=1.0) {
        let m = build(&d, &v, hbar);
        let out = gapp_step(&m, &beliefs(&d, &r), alpha, beta).unwrap();
        let (err, nonneg) = out.normalization_error();
        prop_assert!(err <= 1e-12 && nonneg);
    }

    #[test]
    fn unary_shift_cancels((d, v, hbar, r) in case(), shift in -5.0f64..5.0, pick in 0usize..6) {
        let m = build(&d, &v, hbar);
        let psi = beliefs(&d, &r);
        let mut shifted = m.clone();
        let i = pick % d.len();
        shifted.unary_mut(i).iter_mut().for_each(|e| *e += shift);
        assert_close(&app_step(&m, &psi).unwrap(), &app_step(&shifted, &psi).unwrap(), 1e-12)?;
    }

    #[test]
    fn energy_and_hbar_scale_together((d, v, hbar, r) in case(), k in 0.1f64..10.0) {
        let m = build(&d, &v, hbar);
        let scaled: Vec<f64> = v.iter().map(|e| e * k).collect();
        let ms = build(&d, &scaled, hbar * k);
        let psi = beliefs(&d, &r);
        assert_close(&app_step(&m, &psi).unwrap(), &app_step(&ms, &psi).unwrap(), 1e-12)?;
    }

    #[test]
    fn smoothing_contracts_toward_uniform(raw in prop::collection::vec(0.0f64..1.0, 1..8), beta in 0.0f64..=1.0) {
        let total: f64 = raw.iter().sum::<f64>() + 1e-9;
        let psi: Vec<f64> = raw.iter().map(|x| (x + 1e-9 / raw.len() as f64) / total).collect();
        let u = 1.0 / psi.len() as f64;
        let linf = |p: &[f64]| p.iter().map(|x| (x - u).abs()).fold(0.0, f64::max);
        let out = smooth(&psi, beta, psi.len());
        prop_assert!((linf(&out) - (1.0 - beta) * linf(&psi)).abs() <= 1e-12);
    }

    #[test]
    fn pair_orientation_does_not_matter((d, v, hbar, _r) in case(), seed in 0u64..1000) {
        let m = build(&d, &v, hbar);
        let mut flipped = EnergyModel::new((0..d.len()).map(|i| m.unary(i).to_vec()).collect(), hbar);
        for ((i, j), t) in m.pairs() {
            flipped.set_pair(j, i, t.transposed()).unwrap();
        }
        let a = Assignment::new(d.iter().enumerate().map(|(k, &n)| (seed as usize / (k + 1)) % n).collect());
        prop_assert_eq!(total_energy(&m, &a).unwrap(), total_energy(&flipped, &a).unwrap());
    }

    #[test]
    fn model_file_round_trips((d, v, hbar, _r) in case()) {
        let m = build(&d, &v, hbar);
        prop_assert_eq!(parse_model_file(&write_model_file(&m)).unwrap(), m);
    }

    #[test]
    fn parameter_identity((d, v, hbar, r) in case()) {
        let m = build(&d, &v, hbar);
        let psi = beliefs(&d, &r);
        prop_assert_eq!(app_step(&m, &psi).unwrap(), gapp_step(&m, &psi, 1.0, 0.0).unwrap());
    }

    #[test]
    fn continuum_step_keeps_unit_norm(c in 0.0f64..2.0, g in -0.3f64..0.3, seed in 0u64..100) {
        let grid = Grid1D::new(-6.0, 6.0, 96, Boundary::Truncated).unwrap();
        let model = ContinuumModel::new(grid.clone(), 1.0, vec![1.0, 2.0]).unwrap()
            .with_unary(0, |x| 0.5 * (x - c) * (x - c)).unwrap()
            .with_unary(1, |x| 0.3 * x * x).unwrap()
            .with_pair(0, 1, |x, y| g * x * y).unwrap();
        let bump = |s: f64| grid.sample(|x| (-(x - s).powi(2)).exp() + 1e-3);
        let psi = WaveFunctionSet::new(&grid, vec![bump(seed as f64 / 50.0), bump(-1.0)], 0.02).unwrap();
        let next = continuum::step(&model, &psi, 0.02).unwrap();
        let (err, nonneg) = next.normalization_error(&grid);
        prop_assert!(err <= 1e-12 && nonneg);
    }

    #[test]
    fn gapp_decoder_posteriors_normalized(llrs in prop::collection::vec(-30.0f64..30.0, 7), alpha in 0.0f64..3.0, beta in 0.0f64..=1.0) {
        let code = LdpcCode::parse_alist(include_str!("../data/hamming74_dv2.alist")).unwrap();
        let dec = GappDecoder::new(&code, alpha, beta, 1.0).unwrap();
        let mut psi = dec.channel_posteriors(&llrs);
        for _ in 0..5 {
            psi = dec.iterate(&llrs, &psi);
            for p in &psi {
                prop_assert!(p[0] >= 0.0 && p[1] >= 0.0 && (p[0] + p[1] - 1.0).abs() <= 1e-12);
            }
        }
    }
}
