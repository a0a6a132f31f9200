//! Factored categorical policy: independent softmax heads over slices of
//! the actor output.

use rand::Rng;

use crate::error::{Error, Result};

fn check(total: usize, heads: &[usize]) -> Result<()> {
    let sum: usize = heads.iter().sum();
    if sum != total {
        return Err(Error::ShapeMismatch { expected: sum, got: total });
    }
    Ok(())
}

/// Softmax applied separately to each head's slice of `logits`.
pub fn head_probabilities(logits: &[f64], heads: &[usize]) -> Result<Vec<f64>> {
    check(logits.len(), heads)?;
    let mut out = Vec::with_capacity(logits.len());
    let mut offset = 0;
    for &size in heads {
        let slice = &logits[offset..offset + size];
        let peak = slice.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = slice.iter().map(|z| (z - peak).exp()).collect();
        let total: f64 = exps.iter().sum();
        out.extend(exps.into_iter().map(|e| e / total));
        offset += size;
    }
    Ok(out)
}

/// Sum of per-head log-probabilities of `action`.
pub fn log_prob(probs: &[f64], heads: &[usize], action: &[usize]) -> Result<f64> {
    check(probs.len(), heads)?;
    if action.len() != heads.len() {
        return Err(Error::ShapeMismatch { expected: heads.len(), got: action.len() });
    }
    let mut total = 0.0;
    let mut offset = 0;
    for (&size, &a) in heads.iter().zip(action) {
        if a >= size {
            return Err(Error::invalid(format!("action index {a} outside head of size {size}")));
        }
        total += probs[offset + a].max(f64::MIN_POSITIVE).ln();
        offset += size;
    }
    Ok(total)
}

/// Sum of per-head entropies.
pub fn entropy(probs: &[f64], heads: &[usize]) -> Result<f64> {
    check(probs.len(), heads)?;
    Ok(probs.iter().filter(|&&p| p > 0.0).map(|p| -p * p.ln()).sum())
}

/// Argmax per head; ties go to the lowest index.
pub fn greedy(probs: &[f64], heads: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(heads.len());
    let mut offset = 0;
    for &size in heads {
        let slice = &probs[offset..offset + size];
        let mut best = 0;
        for (k, &p) in slice.iter().enumerate() {
            if p > slice[best] {
                best = k;
            }
        }
        out.push(best);
        offset += size;
    }
    out
}

/// Draws one index per head; always in range even for degenerate inputs.
pub fn sample<R: Rng>(probs: &[f64], heads: &[usize], rng: &mut R) -> Vec<usize> {
    let mut out = Vec::with_capacity(heads.len());
    let mut offset = 0;
    for &size in heads {
        let slice = &probs[offset..offset + size];
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut pick = size - 1;
        for (k, &p) in slice.iter().enumerate() {
            acc += p;
            if u < acc {
                pick = k;
                break;
            }
        }
        out.push(pick);
        offset += size;
    }
    out
}

/// Gradient of `-advantage * log pi(action) - sum_h entropy[h] * H_h` with
/// respect to the logits; an empty `entropy` means no bonus.
pub fn policy_logit_gradient(
    probs: &[f64],
    heads: &[usize],
    action: &[usize],
    advantage: f64,
    entropy: &[f64],
) -> Result<Vec<f64>> {
    check(probs.len(), heads)?;
    if action.len() != heads.len() {
        return Err(Error::ShapeMismatch { expected: heads.len(), got: action.len() });
    }
    if !entropy.is_empty() && entropy.len() != heads.len() {
        return Err(Error::ShapeMismatch { expected: heads.len(), got: entropy.len() });
    }
    let mut grad = vec![0.0; probs.len()];
    let mut offset = 0;
    for (h, (&size, &a)) in heads.iter().zip(action).enumerate() {
        let p = &probs[offset..offset + size];
        let g = &mut grad[offset..offset + size];
        let entropy_coef = entropy.get(h).copied().unwrap_or(0.0);
        for k in 0..size {
            g[k] = advantage * p[k];
        }
        g[a] -= advantage;
        if entropy_coef != 0.0 {
            let h: f64 = p.iter().filter(|&&x| x > 0.0).map(|x| -x * x.ln()).sum();
            for k in 0..size {
                if p[k] > 0.0 {
                    g[k] += entropy_coef * p[k] * (p[k].ln() + h);
                }
            }
        }
        offset += size;
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const HEADS: [usize; 4] = [3, 3, 11, 11];

    #[test]
    fn zero_logits_are_uniform() {
        let p = head_probabilities(&[0.0; 28], &HEADS).unwrap();
        assert!(p[..6].iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
        assert!(p[6..].iter().all(|&x| (x - 1.0 / 11.0).abs() < 1e-15));
        assert!(head_probabilities(&[0.0; 27], &HEADS).is_err());
    }

    #[test]
    fn factored_log_prob_sums_heads() {
        let logits: Vec<f64> = (0..28).map(|k| (k as f64 * 0.37).sin()).collect();
        let p = head_probabilities(&logits, &HEADS).unwrap();
        let action = [2, 0, 7, 10];
        let joint = log_prob(&p, &HEADS, &action).unwrap();
        let parts = p[2].ln() + p[3].ln() + p[6 + 7].ln() + p[17 + 10].ln();
        assert!((joint - parts).abs() < 1e-12);
        assert!(log_prob(&p, &HEADS, &[3, 0, 0, 0]).is_err());
    }

    #[test]
    fn two_action_gradient_is_symmetric() {
        // uniform over two actions, advantage 1, action 0 taken:
        // d(-log p0)/dz = p - e0 = (-0.5, 0.5)
        let g = policy_logit_gradient(&[0.5, 0.5], &[2], &[0], 1.0, &[]).unwrap();
        assert_eq!(g, vec![-0.5, 0.5]);
        let zero = policy_logit_gradient(&[0.2, 0.8], &[2], &[1], 0.0, &[]).unwrap();
        assert_eq!(zero, vec![0.0, 0.0]);
    }

    #[test]
    fn greedy_ties_and_sampling_range() {
        assert_eq!(greedy(&[0.5, 0.5, 0.25, 0.75], &[2, 2]), vec![0, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let weird = [0.0, 0.0, 0.0, 0.3, 0.3, 0.3];
        for _ in 0..100 {
            let a = sample(&weird, &[3, 3], &mut rng);
            assert!(a[0] < 3 && a[1] < 3);
        }
    }

    #[test]
    fn entropy_of_uniform() {
        let e = entropy(&[0.25; 4], &[4]).unwrap();
        assert!((e - 4f64.ln()).abs() < 1e-12);
    }
}
