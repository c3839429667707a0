mod common;

use common::*;
use num_complex::Complex64;
use timebin::compiler::parse_circuit;
use timebin::primitives::LossTable;
use timebin::shor::{
    build_circuit, classify_sample, extract_order, run_shor, sample_outcomes, Amplitudes, Factoring, QftMode,
    SampleOutcome, ShorConfig, ShorOptions,
};
use timebin::state::Polarization;

fn config() -> ShorConfig {
    ShorConfig::fifteen_base_two()
}

fn encoding_of(residue: u64) -> u64 {
    // (f1, f0) for residues 1, 2, 4, 8
    match residue {
        1 => 0b10,
        2 => 0b00,
        4 => 0b11,
        8 => 0b01,
        _ => unreachable!(),
    }
}

#[test]
fn stage_states_match_the_printed_superpositions() {
    let cfg = config();
    let run = run_shor(&cfg, &ShorOptions::default()).unwrap();
    let frame = run.after_init.frame();
    let init = ket_state(&INIT_KETS, &INIT_ORDER, cfg.layout(), frame);
    let modexp = ket_state(&MODEXP_KETS, &MODEXP_ORDER, cfg.layout(), frame);
    assert!(overlap_sqr(&run.after_init, &init) >= 1.0 - 1e-9);
    assert!(overlap_sqr(&run.after_modexp, &modexp) >= 1.0 - 1e-9);
}

#[test]
fn printed_modexp_state_pairs_each_argument_with_its_residue() {
    let cfg = config();
    let frame = cfg.frame(12.5).unwrap();
    let modexp = ket_state(&MODEXP_KETS, &MODEXP_ORDER, cfg.layout(), frame);
    let residues = residues_2_mod_15();
    for (x, &r) in residues.iter().enumerate() {
        let bin = cfg.bin_of(x as u64, encoding_of(r));
        assert!((modexp.amp(bin, Polarization::H).norm_sqr() - 0.125).abs() < 1e-12, "x = {x}");
    }
}

#[test]
fn compiled_marginal_equals_the_analytic_transform() {
    let cfg = config();
    let run = run_shor(&cfg, &ShorOptions::default()).unwrap();
    let amp = Complex64::new(1.0 / 8f64.sqrt(), 0.0);
    let terms: Vec<_> = residues_2_mod_15()
        .iter()
        .enumerate()
        .map(|(x, &r)| (x, encoding_of(r) as usize, amp))
        .collect();
    let want = analytic_qft_marginal(&terms, 3);
    for (y, (a, b)) in run.marginal.iter().zip(&want).enumerate() {
        assert!((a - b).abs() < 1e-9, "y = {y}: {a} vs {b}");
    }
}

/// Closed-form envelope CDF, peak at `t0`, 1/e² full width `t`.
fn envelope_cdf(x: f64, t0: f64, t: f64) -> f64 {
    if x < t0 {
        0.5 * (4.0 * (x - t0) / t).exp()
    } else {
        1.0 - 0.5 * (-4.0 * (x - t0) / t).exp()
    }
}

#[test]
fn wave_packet_marginal_equals_the_transform_of_the_shaped_state() {
    let cfg = config();
    let opts = ShorOptions {
        amplitudes: Amplitudes::wave_packet(),
        ..ShorOptions::default()
    };
    let run = run_shor(&cfg, &opts).unwrap();
    let (width, t0) = (12.5, 16.0 * 12.5);
    let residues = residues_2_mod_15();
    let terms: Vec<_> = (0..8)
        .map(|x| {
            let b = cfg.bin_of(x as u64, encoding_of(1)) as f64;
            let w = envelope_cdf((b + 1.0) * width, t0, 148.0) - envelope_cdf(b * width, t0, 148.0);
            (x, encoding_of(residues[x]) as usize, Complex64::new(w.sqrt(), 0.0))
        })
        .collect();
    let want = analytic_qft_marginal(&terms, 3);
    for (y, (a, b)) in run.marginal.iter().zip(&want).enumerate() {
        assert!((a - b).abs() < 1e-9, "y = {y}: {a} vs {b}");
    }
    let odd: f64 = run.marginal.iter().skip(1).step_by(2).sum();
    assert!(odd < 0.05, "odd share {odd}");
}

#[test]
fn transform_modes_agree() {
    for amplitudes in [Amplitudes::Uniform, Amplitudes::wave_packet()] {
        let go = |qft| {
            run_shor(
                &config(),
                &ShorOptions {
                    qft,
                    amplitudes,
                    ..ShorOptions::default()
                },
            )
            .unwrap()
            .marginal
        };
        let (a, b) = (go(QftMode::Compiled), go(QftMode::Classical));
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-9);
        }
    }
}

#[test]
fn lossy_run_survival_is_the_transmission_product() {
    let lossy = run_shor(
        &config(),
        &ShorOptions {
            loss: Some(LossTable::default()),
            ..ShorOptions::default()
        },
    )
    .unwrap();
    let db: f64 = lossy.schedule.primitives().iter().map(|p| p.loss_db).sum();
    let want = 10f64.powf(-db / 10.0);
    assert!((lossy.survival - want).abs() < 1e-12 * want);
    let lossless = run_shor(&config(), &ShorOptions::default()).unwrap();
    for (a, b) in lossy.marginal.iter().zip(&lossless.marginal) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn sampled_outcomes_succeed_half_the_time() {
    let run = run_shor(&config(), &ShorOptions::default()).unwrap();
    let samples = sample_outcomes(&run.marginal, 10_000, 11).unwrap();
    let wins = samples
        .iter()
        .filter(|&&y| classify_sample(y, 3, 2, 15).unwrap() == SampleOutcome::Order(4))
        .count();
    let frac = wins as f64 / samples.len() as f64;
    assert!((frac - 0.5).abs() <= 0.02, "{frac}");
}

#[test]
fn every_informative_sample_factors_fifteen() {
    for y in [2, 6] {
        let r = extract_order(&[y], 3, 2, 15).unwrap();
        assert_eq!(r.order, 4);
        assert_eq!(r.factoring, Factoring::Found { p: 3, q: 5 });
    }
}

#[test]
fn circuit_file_matches_the_built_circuit() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../circuits/shor15.circ");
    let parsed = parse_circuit(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(parsed, build_circuit(&config(), true).unwrap().circuit);
}
