use std::collections::HashMap;

use crate::scalar::Real;

use super::{ctc_forward, Emissions};

/// Output of [`greedy_decode`].
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyDecode<T> {
    pub tokens: Vec<usize>,
    /// Per token: the largest window probability inside its merged run.
    pub confidences: Vec<T>,
    /// Per token: half-open window range of its merged run.
    pub spans: Vec<(usize, usize)>,
}

/// Per-window argmax, then collapse. Ties go to the lower token index, so the
/// blank (last index) only wins outright.
pub fn greedy_decode<T: Real>(emissions: &Emissions<T>) -> GreedyDecode<T> {
    let blank = emissions.blank();
    let mut out: GreedyDecode<T> = GreedyDecode {
        tokens: Vec::new(),
        confidences: Vec::new(),
        spans: Vec::new(),
    };
    let mut prev: Option<usize> = None;
    for (t, row) in emissions.rows().enumerate() {
        let (best, p) =
            row.iter().copied().enumerate().fold(
                (0, row[0]),
                |acc, (k, x)| if x > acc.1 { (k, x) } else { acc },
            );
        if prev == Some(best) {
            if best != blank {
                let last = out.tokens.len() - 1;
                out.confidences[last] = out.confidences[last].max(p);
                out.spans[last].1 = t + 1;
            }
        } else if best != blank {
            out.tokens.push(best);
            out.confidences.push(p);
            out.spans.push((t, t + 1));
        }
        prev = Some(best);
    }
    out
}

/// Output of [`beam_decode`].
#[derive(Clone, Debug, PartialEq)]
pub struct BeamDecode<T> {
    pub tokens: Vec<usize>,
    /// Log-probability mass the beam accumulated for `tokens`.
    pub log_prob: T,
}

#[derive(Clone, Copy)]
struct Score<T> {
    blank: T,
    non_blank: T,
}

impl<T: Real> Score<T> {
    fn empty() -> Self {
        Self {
            blank: T::neg_infinity(),
            non_blank: T::neg_infinity(),
        }
    }

    fn total(&self) -> T {
        T::log_add(self.blank, self.non_blank)
    }
}

/// Prefix beam search with widths `1..=width`, returning the surviving prefix
/// with the highest exact CTC probability across all of them.
///
/// A single prefix beam search is not monotone in its width (a wider beam can
/// displace the prefix a narrower one would have kept), so the result is taken
/// over every narrower width as well; `log_prob` is then non-decreasing in `width`.
pub fn beam_decode<T: Real>(emissions: &Emissions<T>, width: usize) -> BeamDecode<T> {
    let log_em = emissions.ln();
    (1..=width.max(1))
        .map(|w| prefix_beam_search(&log_em, w))
        .fold(None, |best: Option<BeamDecode<T>>, cand| match best {
            Some(b) if b.log_prob >= cand.log_prob => Some(b),
            _ => Some(cand),
        })
        .expect("at least one width")
}

/// Prefix beam search keeping the `width` most probable label prefixes per window.
///
/// Each prefix tracks the probability of paths ending in a blank and ending in
/// a label separately, so that a repeated label is merged unless a blank
/// separates it from the previous copy.
fn prefix_beam_search<T: Real>(log_em: &Emissions<T>, width: usize) -> BeamDecode<T> {
    let blank = log_em.blank();
    let mut beams: Vec<(Vec<usize>, Score<T>)> = vec![(
        Vec::new(),
        Score {
            blank: T::zero(),
            non_blank: T::neg_infinity(),
        },
    )];
    for lp in log_em.rows() {
        let mut next: HashMap<Vec<usize>, Score<T>> =
            HashMap::with_capacity(beams.len() * lp.len());
        for (prefix, score) in &beams {
            let total = score.total();
            let entry = next.entry(prefix.clone()).or_insert_with(Score::empty);
            entry.blank = T::log_add(entry.blank, total + lp[blank]);
            for (k, &lpk) in lp.iter().enumerate() {
                if k == blank || lpk == T::neg_infinity() {
                    continue;
                }
                if prefix.last() == Some(&k) {
                    let same = next.get_mut(prefix).expect("inserted above");
                    same.non_blank = T::log_add(same.non_blank, score.non_blank + lpk);
                    let mut ext = prefix.clone();
                    ext.push(k);
                    let e = next.entry(ext).or_insert_with(Score::empty);
                    e.non_blank = T::log_add(e.non_blank, score.blank + lpk);
                } else {
                    let mut ext = prefix.clone();
                    ext.push(k);
                    let e = next.entry(ext).or_insert_with(Score::empty);
                    e.non_blank = T::log_add(e.non_blank, total + lpk);
                }
            }
        }
        let mut ranked: Vec<(Vec<usize>, Score<T>)> = next.into_iter().collect();
        ranked.sort_by(|a, b| {
            b.1.total()
                .partial_cmp(&a.1.total())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.0.cmp(&b.0))
        });
        ranked.truncate(width);
        beams = ranked;
    }
    // rescore the surviving prefixes by their exact CTC probability
    beams
        .into_iter()
        .map(|(tokens, score)| {
            let exact = ctc_forward(log_em, &tokens).map_or(score.total(), |loss| -loss);
            BeamDecode {
                tokens,
                log_prob: exact,
            }
        })
        .fold(None, |best: Option<BeamDecode<T>>, cand| match best {
            Some(b) if b.log_prob >= cand.log_prob => Some(b),
            _ => Some(cand),
        })
        .expect("beam never empties")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctc::{collapse, ctc_forward};
    use crate::rng::SimRng;
    use rand::{Rng, SeedableRng};
    use std::collections::BTreeMap;

    const PHI: usize = 3;

    fn onehot_rows(path: &[usize], v: usize, p: f64) -> Emissions<f64> {
        let rows: Vec<Vec<f64>> = path
            .iter()
            .map(|&k| {
                (0..v)
                    .map(|j| {
                        if j == k {
                            p
                        } else {
                            (1.0 - p) / (v - 1) as f64
                        }
                    })
                    .collect()
            })
            .collect();
        Emissions::from_rows(&rows).unwrap()
    }

    fn random_probs(rng: &mut SimRng, n: usize, v: usize) -> Emissions<f64> {
        let logits = Emissions::new(
            n,
            v,
            (0..n * v).map(|_| rng.random_range(-2.0..2.0)).collect(),
        )
        .unwrap();
        Emissions::log_softmax(&logits).exp()
    }

    /// Exact most probable collapsed sequence by summing over every path.
    fn brute_force_best(p: &Emissions<f64>) -> (Vec<usize>, f64) {
        let (n, v) = (p.n_windows(), p.n_tokens());
        let mut mass: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        let mut path = vec![0usize; n];
        for code in 0..v.pow(n as u32) {
            let mut c = code;
            for slot in path.iter_mut() {
                *slot = c % v;
                c /= v;
            }
            let pr: f64 = path.iter().enumerate().map(|(t, &k)| p.get(t, k)).product();
            *mass.entry(collapse(&path, v - 1)).or_default() += pr;
        }
        mass.into_iter()
            .fold((Vec::new(), f64::NEG_INFINITY), |best, (s, m)| {
                if m > best.1 {
                    (s, m)
                } else {
                    best
                }
            })
    }

    #[test]
    fn greedy_collapses_argmax_path() {
        let e = onehot_rows(&[0, PHI, 1, 1], 4, 0.9);
        let d = greedy_decode(&e);
        assert_eq!(d.tokens, vec![0, 1]);
        assert_eq!(d.spans, vec![(0, 1), (2, 4)]);
        assert!(d.confidences.iter().all(|&c| (c - 0.9).abs() < 1e-12));
        assert!(greedy_decode(&onehot_rows(&[PHI, PHI], 4, 0.9))
            .tokens
            .is_empty());
    }

    #[test]
    fn greedy_ties_prefer_lower_index() {
        let e = Emissions::from_rows(&[vec![0.4, 0.4, 0.2], vec![0.2, 0.4, 0.4]]).unwrap();
        assert_eq!(greedy_decode(&e).tokens, vec![0, 1]);
        // a tie with the blank keeps the label
        let e = Emissions::from_rows(&[vec![0.1, 0.45, 0.45]]).unwrap();
        assert_eq!(greedy_decode(&e).tokens, vec![1]);
    }

    #[test]
    fn greedy_confidence_is_run_maximum() {
        let e = Emissions::from_rows(&[
            vec![0.6, 0.1, 0.3],
            vec![0.9, 0.05, 0.05],
            vec![0.1, 0.1, 0.8],
        ])
        .unwrap();
        let d = greedy_decode(&e);
        assert_eq!(d.tokens, vec![0]);
        assert_eq!(d.confidences, vec![0.9]);
    }

    #[test]
    fn beam_matches_greedy_on_dominant_path() {
        let e = onehot_rows(&[0, 0, PHI, 0, 2, PHI, 1, 1, PHI], 4, 0.995);
        let g = greedy_decode(&e).tokens;
        for w in [1, 2, 5, 16] {
            assert_eq!(beam_decode(&e, w).tokens, g);
        }
    }

    #[test]
    fn width_one_follows_greedy_on_worked_example() {
        // [A, φ, A, A, φ, G, G] with A=0, G=2
        let e = onehot_rows(&[0, PHI, 0, 0, PHI, 2, 2], 4, 0.7);
        assert_eq!(beam_decode(&e, 1).tokens, vec![0, 0, 2]);
        assert_eq!(greedy_decode(&e).tokens, vec![0, 0, 2]);
    }

    #[test]
    fn wide_beam_finds_exact_best_sequence() {
        let mut rng = SimRng::seed_from_u64(31);
        for _ in 0..60 {
            let n = rng.random_range(1..=6);
            let v = rng.random_range(2..=3);
            let p = random_probs(&mut rng, n, v);
            let (best, mass) = brute_force_best(&p);
            let b = beam_decode(&p, 64);
            assert_eq!(b.tokens, best);
            assert!((b.log_prob.exp() - mass).abs() < 1e-12);
        }
    }

    #[test]
    fn beam_log_prob_is_monotone_in_width() {
        let mut rng = SimRng::seed_from_u64(32);
        for _ in 0..100 {
            let n = rng.random_range(1..=10);
            let v = rng.random_range(2..=5);
            let p = random_probs(&mut rng, n, v);
            let mut last = f64::NEG_INFINITY;
            for w in 1..=12 {
                let b = beam_decode(&p, w);
                assert!(b.log_prob >= last - 1e-12, "width {w}");
                last = b.log_prob;
            }
        }
    }

    #[test]
    fn beam_mass_never_exceeds_exact_probability() {
        let mut rng = SimRng::seed_from_u64(33);
        for _ in 0..50 {
            let p = random_probs(&mut rng, 7, 4);
            let b = beam_decode(&p, 3);
            let exact = -ctc_forward(&p.ln(), &b.tokens).unwrap();
            assert!(b.log_prob <= exact + 1e-12);
        }
    }
}
