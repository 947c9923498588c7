use crate::error::{Error, Result};
use crate::scalar::{log_sum_exp, Real};

use super::Emissions;

/// Fewest windows that can emit `target`: one per label plus a mandatory blank
/// between each pair of equal neighbours.
pub fn min_windows(target: &[usize]) -> usize {
    target.len() + target.windows(2).filter(|w| w[0] == w[1]).count()
}

fn check_target<T: Real>(log_probs: &Emissions<T>, target: &[usize]) -> Result<()> {
    let blank = log_probs.blank();
    if let Some(&bad) = target.iter().find(|&&k| k >= blank) {
        return Err(Error::InvalidParameter(format!(
            "target token {bad} is the blank or outside the alphabet"
        )));
    }
    if log_probs.n_windows() < min_windows(target) {
        return Err(Error::CtcInfeasible {
            target_len: target.len(),
            windows: log_probs.n_windows(),
        });
    }
    Ok(())
}

/// Blank-interleaved target `φ y₁ φ y₂ … y_L φ`.
fn extend(target: &[usize], blank: usize) -> Vec<usize> {
    let mut ext = Vec::with_capacity(2 * target.len() + 1);
    ext.push(blank);
    for &k in target {
        ext.push(k);
        ext.push(blank);
    }
    ext
}

/// Whether state `s` may be entered from `s − 2` (skipping a blank).
fn can_skip(ext: &[usize], s: usize, blank: usize) -> bool {
    s >= 2 && ext[s] != blank && ext[s] != ext[s - 2]
}

/// Forward variables `α_t(s)` in log space, `T × (2L+1)` row-major.
fn alphas<T: Real>(lp: &Emissions<T>, ext: &[usize]) -> Vec<T> {
    let (n, s_len, blank) = (lp.n_windows(), ext.len(), lp.blank());
    let ninf = T::neg_infinity();
    let mut a = vec![ninf; n * s_len];
    a[0] = lp.get(0, ext[0]);
    if s_len > 1 {
        a[1] = lp.get(0, ext[1]);
    }
    for t in 1..n {
        let (prev, cur) = a.split_at_mut(t * s_len);
        let prev = &prev[(t - 1) * s_len..];
        for s in 0..s_len {
            let mut acc = prev[s];
            if s >= 1 {
                acc = T::log_add(acc, prev[s - 1]);
            }
            if can_skip(ext, s, blank) {
                acc = T::log_add(acc, prev[s - 2]);
            }
            cur[s] = if acc == ninf {
                ninf
            } else {
                acc + lp.get(t, ext[s])
            };
        }
    }
    a
}

/// Backward variables `β_t(s)` in log space (including the emission at `t`).
fn betas<T: Real>(lp: &Emissions<T>, ext: &[usize]) -> Vec<T> {
    let (n, s_len, blank) = (lp.n_windows(), ext.len(), lp.blank());
    let ninf = T::neg_infinity();
    let mut b = vec![ninf; n * s_len];
    let last = (n - 1) * s_len;
    b[last + s_len - 1] = lp.get(n - 1, ext[s_len - 1]);
    if s_len > 1 {
        b[last + s_len - 2] = lp.get(n - 1, ext[s_len - 2]);
    }
    for t in (0..n - 1).rev() {
        let (cur, next) = b.split_at_mut((t + 1) * s_len);
        let cur = &mut cur[t * s_len..];
        for s in 0..s_len {
            let mut acc = next[s];
            if s + 1 < s_len {
                acc = T::log_add(acc, next[s + 1]);
            }
            if s + 2 < s_len && can_skip(ext, s + 2, blank) {
                acc = T::log_add(acc, next[s + 2]);
            }
            cur[s] = if acc == ninf {
                ninf
            } else {
                acc + lp.get(t, ext[s])
            };
        }
    }
    b
}

fn log_likelihood<T: Real>(lp: &Emissions<T>, ext: &[usize], alpha: &[T]) -> T {
    let s_len = ext.len();
    let last = &alpha[(lp.n_windows() - 1) * s_len..];
    if s_len > 1 {
        T::log_add(last[s_len - 1], last[s_len - 2])
    } else {
        last[0]
    }
}

/// `−ln Σ_{π ∈ B(target)} Π_t P(π_t)` for log-probability emissions.
pub fn ctc_forward<T: Real>(log_probs: &Emissions<T>, target: &[usize]) -> Result<T> {
    check_target(log_probs, target)?;
    let ext = extend(target, log_probs.blank());
    let alpha = alphas(log_probs, &ext);
    let ll = log_likelihood(log_probs, &ext, &alpha);
    if ll == T::neg_infinity() {
        return Err(Error::CtcInfeasible {
            target_len: target.len(),
            windows: log_probs.n_windows(),
        });
    }
    Ok(-ll)
}

/// Loss and its gradient with respect to the pre-softmax logits, assuming
/// `log_probs` is the row-wise log-softmax of those logits:
/// `∂L/∂u_t(k) = y_t(k) − Σ_{s: l'_s = k} α_t(s)β_t(s) / (y_t(k)·P)`.
pub fn ctc_gradient<T: Real>(
    log_probs: &Emissions<T>,
    target: &[usize],
) -> Result<(T, Emissions<T>)> {
    let loss = ctc_forward(log_probs, target)?;
    let ext = extend(target, log_probs.blank());
    let alpha = alphas(log_probs, &ext);
    let beta = betas(log_probs, &ext);
    let (n, v, s_len) = (log_probs.n_windows(), log_probs.n_tokens(), ext.len());
    let log_p = -loss;
    let mut grad = vec![T::zero(); n * v];
    let mut per_token: Vec<Vec<T>> = vec![Vec::new(); v];
    for t in 0..n {
        for bucket in per_token.iter_mut() {
            bucket.clear();
        }
        for s in 0..s_len {
            let ab = alpha[t * s_len + s] + beta[t * s_len + s];
            if ab != T::neg_infinity() {
                per_token[ext[s]].push(ab);
            }
        }
        for k in 0..v {
            let lp = log_probs.get(t, k);
            let occupancy = if per_token[k].is_empty() {
                T::zero()
            } else {
                (log_sum_exp(&per_token[k]) - lp - log_p).exp()
            };
            grad[t * v + k] = lp.exp() - occupancy;
        }
    }
    Ok((loss, Emissions::new(n, v, grad)?))
}
