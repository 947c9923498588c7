//! Brute-force oracle suites runnable outside the test harness.

use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::codec::{choose, subset_rank, subset_unrank, SymbolRank};
use crate::ctc::{collapse, ctc_forward, ctc_gradient, Emissions};
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Outcome of one oracle suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub name: String,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl OracleReport {
    fn new(name: &str, cases: usize, max_error: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            cases,
            max_error,
            tolerance,
            passed: max_error <= tolerance,
        }
    }
}

/// Probability mass of every path in `V^T` that collapses to `target`.
pub fn enumerate_ctc(probs: &Emissions<f64>, target: &[usize]) -> f64 {
    let (n, v) = (probs.n_windows(), probs.n_tokens());
    let mut path = vec![0usize; n];
    let mut total = 0.0;
    for code in 0..v.pow(n as u32) {
        let mut c = code;
        for slot in path.iter_mut() {
            *slot = c % v;
            c /= v;
        }
        if collapse(&path, v - 1) == target {
            total += path
                .iter()
                .enumerate()
                .map(|(t, &k)| probs.get(t, k))
                .product::<f64>();
        }
    }
    total
}

fn random_log_probs(rng: &mut SimRng, n: usize, v: usize) -> Emissions<f64> {
    let data = (0..n * v).map(|_| rng.random_range(-2.0..2.0)).collect();
    Emissions::log_softmax(&Emissions::new(n, v, data).expect("shape matches data"))
}

/// CTC forward probability against exhaustive path enumeration (`T ≤ 8`, `V ≤ 4`).
pub fn ctc_enumeration(instances: usize, seed: u64) -> Result<OracleReport> {
    let mut rng = SimRng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let n = rng.random_range(1..=8);
        let v = rng.random_range(2..=4);
        let lp = random_log_probs(&mut rng, n, v);
        let len = rng.random_range(0..=n.min(4));
        let target: Vec<usize> = (0..len).map(|_| rng.random_range(0..v - 1)).collect();
        let brute = enumerate_ctc(&lp.exp(), &target);
        let p = match ctc_forward(&lp, &target) {
            Ok(loss) => (-loss).exp(),
            Err(Error::CtcInfeasible { .. }) => 0.0,
            Err(e) => return Err(e),
        };
        worst = worst.max((p - brute).abs());
    }
    Ok(OracleReport::new(
        "ctc-enumeration",
        instances,
        worst,
        1e-10,
    ))
}

/// Analytic CTC gradient with respect to logits against central differences.
/// The error of an instance is `‖g − fd‖₂ / ‖g‖₂`.
pub fn ctc_gradient_check(instances: usize, seed: u64, tolerance: f64) -> Result<OracleReport> {
    let mut rng = SimRng::seed_from_u64(seed);
    let eps = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let n = rng.random_range(2..=8);
        let v = rng.random_range(2..=5);
        let logits = Emissions::new(
            n,
            v,
            (0..n * v).map(|_| rng.random_range(-2.0..2.0)).collect(),
        )?;
        let len = rng.random_range(1..=n.div_ceil(2));
        let target: Vec<usize> = (0..len).map(|_| rng.random_range(0..v - 1)).collect();
        let (_, g) = match ctc_gradient(&Emissions::log_softmax(&logits), &target) {
            Ok(x) => x,
            Err(Error::CtcInfeasible { .. }) => continue,
            Err(e) => return Err(e),
        };
        let loss_at = |l: &Emissions<f64>| ctc_forward(&Emissions::log_softmax(l), &target);
        let (mut num, mut den) = (0.0f64, 0.0f64);
        for i in 0..n * v {
            let mut plus = logits.clone();
            let mut minus = logits.clone();
            plus.row_mut(i / v)[i % v] += eps;
            minus.row_mut(i / v)[i % v] -= eps;
            let fd = (loss_at(&plus)? - loss_at(&minus)?) / (2.0 * eps);
            num += (fd - g.as_slice()[i]).powi(2);
            den += g.as_slice()[i].powi(2);
        }
        worst = worst.max((num / den.max(f64::MIN_POSITIVE)).sqrt());
    }
    Ok(OracleReport::new(
        "ctc-gradient",
        instances,
        worst,
        tolerance,
    ))
}

/// `subset_unrank` walks every k-subset of `0..m` in lexicographic order and
/// `subset_rank` inverts it, for all `1 ≤ k ≤ m ≤ max_m`.
pub fn subset_rank_bijection(max_m: usize) -> Result<OracleReport> {
    let mut cases = 0;
    let mut mismatches = 0usize;
    for m in 1..=max_m {
        for k in 1..=m {
            let mut expected: Vec<Vec<u32>> = (0u32..1 << m)
                .filter(|mask| mask.count_ones() as usize == k)
                .map(|mask| (0..m as u32).filter(|b| mask >> b & 1 == 1).collect())
                .collect();
            expected.sort();
            if expected.len() as u64 != choose(m, k)? {
                mismatches += 1;
            }
            for (r, want) in expected.iter().enumerate() {
                cases += 1;
                let s = subset_unrank(SymbolRank(r as u64), m, k)?;
                if s.ids() != want.as_slice() || subset_rank(&s, m, k)?.0 != r as u64 {
                    mismatches += 1;
                }
            }
        }
    }
    Ok(OracleReport::new(
        "subset-rank-bijection",
        cases,
        mismatches as f64,
        0.0,
    ))
}

/// Every suite at its default size.
pub fn run_all(seed: u64) -> Result<Vec<OracleReport>> {
    Ok(vec![
        ctc_enumeration(100, seed)?,
        ctc_gradient_check(100, seed, 1e-5)?,
        subset_rank_bijection(10)?,
    ])
}
