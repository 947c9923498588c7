use super::*;
use crate::dna::complement_reverse;
use crate::library::{generate_library, LibraryParams};
use crate::synthsim::{generate_pore_model, molecule_sequence, render_squiggle, SquiggleParams};

struct Fixture {
    library: MotifLibrary,
    layout: BlockLayout,
    pore: PoreModel,
    model: CallerModel,
}

fn fixture() -> Fixture {
    let library = generate_library(&LibraryParams::default(), 5).unwrap();
    let layout = BlockLayout::default();
    let pore = generate_pore_model(6, 5).unwrap();
    let model = CallerModel::new(&library, &layout, &pore).unwrap();
    Fixture {
        library,
        layout,
        pore,
        model,
    }
}

fn chosen(i: u64) -> Vec<MotifId> {
    (0..9)
        .map(|s| ((i * 7 + s * 3 + s * s) % 8) as MotifId)
        .collect()
}

fn call(fx: &Fixture, seq: &[u8], noise: f64, seed: u64) -> (MotifCall, Emissions<f64>) {
    let params = SquiggleParams {
        dwell_mean: 10.0,
        noise_std: noise,
    };
    let sq = render_squiggle(seq, &fx.pore, &params, seed, seed).unwrap();
    match call_squiggle(
        seed,
        &sq.samples,
        &fx.model,
        noise,
        &CallerParams::default(),
    ) {
        CallOutcome::Called { call, emissions } => (call, emissions),
        CallOutcome::Unmappable => panic!("read {seed} unmappable"),
    }
}

#[test]
fn noiseless_squiggle_decodes_exactly() {
    let fx = fixture();
    for i in 0..10 {
        let truth = chosen(i);
        let seq = molecule_sequence(&truth, &fx.library, &fx.layout);
        let (c, em) = call(&fx, &seq, 0.0, i);
        assert_eq!(c.orientation, Orientation::Forward);
        let slots = c.to_slot_calls(&fx.layout);
        assert_eq!(
            slots.calls,
            truth.iter().map(|&m| Some(m)).collect::<Vec<_>>()
        );
        assert!(
            c.tokens.iter().all(|t| t.confidence >= 0.99),
            "{:?}",
            c.tokens
        );
        assert_eq!(em.n_windows(), 19);
        em.check_distribution(1e-9).unwrap();
        // token order alternates spacer, motif
        let alpha = fx.model.alphabet;
        for (t, tok) in c.tokens.iter().enumerate() {
            assert_eq!(alpha.is_spacer(tok.token), t % 2 == 0);
        }
        // spans tile the squiggle
        assert_eq!(c.tokens[0].span.0, 0);
        for w in c.tokens.windows(2) {
            assert_eq!(w[0].span.1, w[1].span.0);
        }
    }
}

#[test]
fn reverse_reads_are_detected_and_mapped_to_forward_slots() {
    let fx = fixture();
    let truth = chosen(3);
    let seq = complement_reverse(&molecule_sequence(&truth, &fx.library, &fx.layout));
    let (c, _) = call(&fx, &seq, 2.0, 77);
    assert_eq!(c.orientation, Orientation::Reverse);
    assert_eq!(
        c.to_slot_calls(&fx.layout).calls,
        truth.iter().map(|&m| Some(m)).collect::<Vec<_>>()
    );
    // the first token in read order is the last forward spacer
    assert_eq!(c.tokens[0].token, fx.model.alphabet.spacer(9));
    assert_eq!(c.tokens[1].slot, Some(8));
}

#[test]
fn noisy_reads_mostly_correct_and_rows_normalised() {
    let fx = fixture();
    let mut correct = 0;
    for i in 0..20 {
        let truth = chosen(i);
        let seq = molecule_sequence(&truth, &fx.library, &fx.layout);
        let (c, em) = call(&fx, &seq, 2.0, 100 + i);
        em.check_distribution(1e-9).unwrap();
        let calls = c.to_slot_calls(&fx.layout).calls;
        correct += calls
            .iter()
            .zip(&truth)
            .filter(|(c, t)| **c == Some(**t))
            .count();
        assert!(c.tokens.iter().all(|t| (0.0..=1.0).contains(&t.confidence)));
    }
    assert!(correct >= 20 * 9 - 2, "{correct}");
}

#[test]
fn too_few_events_is_unmappable() {
    let fx = fixture();
    let events = eventize(&[80.0; 100], 1.0);
    assert_eq!(
        viterbi_call(0, &events, &fx.model, 2.0, &CallerParams::default()),
        CallOutcome::Unmappable
    );
    let short: Vec<f32> = (0..200).map(|i| 60.0 + 40.0 * ((i % 2) as f32)).collect();
    let outcome = call_squiggle(1, &short, &fx.model, 2.0, &CallerParams::default());
    assert_eq!(outcome, CallOutcome::Unmappable);
}

fn synthetic_call(confidences: &[f64]) -> MotifCall {
    let tokens: Vec<CalledToken> = confidences
        .iter()
        .enumerate()
        .map(|(i, &p)| CalledToken {
            token: i % 8,
            slot: Some(i),
            confidence: p,
            score_gap: confidence_gap(p, DEFAULT_CONFIDENCE_SCALE),
            span: (i as u64 * 10, i as u64 * 10 + 10),
        })
        .collect();
    let mut call = MotifCall {
        read_id: 9,
        orientation: Orientation::Forward,
        tokens,
        read_q: 0.0,
        path_score: 0.0,
    };
    call.read_q = call.mean_motif_q();
    call
}

#[test]
fn filter_keeps_confident_reads() {
    let call = synthetic_call(&[0.99; 8]);
    match filter_call(&call, 11.0, 0.85) {
        Filtered::Retained(out, stats) => {
            assert_eq!(out, call);
            assert_eq!(stats.tokens_kept, 8);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn filter_rejects_uncertain_reads() {
    let call = synthetic_call(&[0.5; 8]);
    match filter_call(&call, 11.0, 0.85) {
        Filtered::Rejected(stats) => assert_eq!(stats.tokens_kept, 0),
        other => panic!("{other:?}"),
    }
    // even without a token threshold the mean quality 3.01 is too low
    assert!(filter_call(&call, 11.0, 0.0).retained().is_none());
}

#[test]
fn filter_mixed_tokens() {
    // Q(0.9) = 10 < 11 after dropping the 0.8 tokens
    let call = synthetic_call(&[0.9, 0.8, 0.9, 0.8]);
    let out = filter_call(&call, 11.0, 0.85);
    assert!(out.retained().is_none());
    match filter_call(&call, 10.0, 0.85) {
        Filtered::Retained(out, stats) => {
            assert_eq!(
                stats,
                FilterStats {
                    tokens_in: 4,
                    tokens_kept: 2
                }
            );
            assert!((out.read_q - 10.0).abs() < 1e-9);
            assert!(out.tokens.iter().all(|t| t.confidence == 0.9));
        }
        other => panic!("{other:?}"),
    }
    // 0.999 and 0.9 survivors average Q 20
    let call = synthetic_call(&[0.999, 0.8, 0.9]);
    let kept = filter_call(&call, 11.0, 0.85);
    assert!((kept.retained().unwrap().read_q - 20.0).abs() < 1e-9);
}

#[test]
fn filter_never_adds_tokens_or_lowers_confidence() {
    let call = synthetic_call(&[0.95, 0.6, 0.99, 0.86, 0.2, 0.999]);
    let mean =
        |c: &MotifCall| c.tokens.iter().map(|t| t.confidence).sum::<f64>() / c.tokens.len() as f64;
    let out = filter_call(&call, 0.0, 0.85);
    let out = out.retained().unwrap();
    assert!(out.tokens.len() <= call.tokens.len());
    assert!(mean(out) >= mean(&call));
}

fn candidates(scores: &[(u64, f64)]) -> Vec<BootstrapCandidate<u64>> {
    scores
        .iter()
        .map(|&(read_id, match_fraction)| BootstrapCandidate {
            read_id,
            match_fraction,
            labels: read_id,
        })
        .collect()
}

#[test]
fn bootstrap_takes_top_fraction() {
    let c = candidates(&(0..10).map(|i| (i, i as f64 / 10.0)).collect::<Vec<_>>());
    let top: Vec<u64> = label_bootstrap(&c, 0.3).iter().map(|c| c.read_id).collect();
    assert_eq!(top, vec![9, 8, 7]);
    assert_eq!(label_bootstrap(&c, 1.0).len(), 10);
    assert!(label_bootstrap::<u64>(&[], 0.3).is_empty());
}

#[test]
fn bootstrap_ties_break_by_read_id() {
    let c = candidates(&[(5, 0.9), (3, 0.5), (1, 0.5), (4, 0.5), (2, 0.1)]);
    let top: Vec<u64> = label_bootstrap(&c, 0.4).iter().map(|c| c.read_id).collect();
    assert_eq!(top, vec![5, 1]);
}

#[test]
fn calibration_recovers_generating_scale() {
    use rand::Rng;
    let mut rng = crate::rng::rng_from(4);
    let true_scale = 3.0;
    let samples: Vec<(f64, bool)> = (0..20_000)
        .map(|_| {
            let gap: f64 = rng.random_range(0.0..15.0);
            let ok = rng.random::<f64>() < logistic(gap / true_scale);
            (gap, ok)
        })
        .collect();
    let s = calibrate_confidence_scale(&samples);
    assert!((s - true_scale).abs() < 0.3, "{s}");
    let p = logistic(2.5 / s);
    assert!((confidence_gap(p, s) - 2.5).abs() < 1e-9);
}
