use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BinarySvmModel, SvmError, SvmParams};

/// Kernel rows computed on demand with a bounded FIFO cache. Only affects
/// speed; results are identical with or without hits.
struct RowCache<'a> {
    samples: &'a [(Vec<f64>, f64)],
    params: &'a SvmParams,
    rows: std::collections::HashMap<usize, Vec<f64>>,
    order: std::collections::VecDeque<usize>,
    capacity: usize,
}

impl<'a> RowCache<'a> {
    fn new(samples: &'a [(Vec<f64>, f64)], params: &'a SvmParams) -> Self {
        let n = samples.len().max(1);
        // Bound cache memory to roughly 32 MB of f64 rows.
        let capacity = (4_000_000 / n).max(16).min(n);
        RowCache {
            samples,
            params,
            rows: std::collections::HashMap::new(),
            order: std::collections::VecDeque::new(),
            capacity,
        }
    }

    fn row(&mut self, i: usize) -> &[f64] {
        if !self.rows.contains_key(&i) {
            if self.order.len() >= self.capacity {
                if let Some(evict) = self.order.pop_front() {
                    self.rows.remove(&evict);
                }
            }
            let xi = &self.samples[i].0;
            let row: Vec<f64> = self
                .samples
                .iter()
                .map(|(xj, _)| self.params.kernel.eval(xi, xj))
                .collect();
            self.rows.insert(i, row);
            self.order.push_back(i);
        }
        &self.rows[&i]
    }
}

/// Trains a soft-margin binary SVM with simplified sequential minimal
/// optimization: sweep all indices, fix KKT violations against a randomly
/// chosen partner (seeded, so training is deterministic), stop after
/// `max_passes` consecutive sweeps without an update or at the sweep cap.
/// The bias is recomputed at the end from the unbounded support vectors,
/// falling back to the midpoint of the interval the bound ones allow.
pub fn smo_train(
    samples: &[(Vec<f64>, f64)],
    params: &SvmParams,
    seed: u64,
) -> Result<BinarySvmModel, SvmError> {
    params.validate();
    validate_samples(samples)?;
    let n = samples.len();
    let dimension = samples[0].0.len();
    let c = params.c;
    let tol = params.kkt_tolerance;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut alphas = vec![0.0f64; n];
    let mut bias = 0.0f64;
    // f[i] = Σ_j α_j y_j K(x_j, x_i), maintained incrementally.
    let mut f = vec![0.0f64; n];
    let diag: Vec<f64> = samples
        .iter()
        .map(|(x, _)| params.kernel.eval(x, x))
        .collect();
    let mut cache = RowCache::new(samples, params);

    let mut quiet_sweeps = 0usize;
    let mut sweeps = 0usize;
    while quiet_sweeps < params.max_passes && sweeps < params.max_iterations {
        sweeps += 1;
        let mut changed = 0usize;
        for i in 0..n {
            let yi = samples[i].1;
            let e_i = f[i] + bias - yi;
            let r = e_i * yi;
            let violates = (r < -tol && alphas[i] < c) || (r > tol && alphas[i] > 0.0);
            if !violates {
                continue;
            }
            // Random partner; resample until distinct.
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            if optimize_pair(
                i, j, samples, params, &diag, &mut cache, &mut alphas, &mut bias, &mut f,
            ) {
                changed += 1;
            }
        }
        if changed == 0 {
            quiet_sweeps += 1;
        } else {
            quiet_sweeps = 0;
        }
    }
    let converged = quiet_sweeps >= params.max_passes;

    let bias = recompute_bias(samples, &alphas, &f, c);
    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for (idx, alpha) in alphas.iter().enumerate() {
        if *alpha > 1e-12 {
            support_vectors.push(samples[idx].0.clone());
            coefficients.push(alpha * samples[idx].1);
        }
    }
    Ok(BinarySvmModel {
        support_vectors,
        coefficients,
        bias,
        params: *params,
        dimension,
        converged,
    })
}

fn validate_samples(samples: &[(Vec<f64>, f64)]) -> Result<(), SvmError> {
    let mut has_pos = false;
    let mut has_neg = false;
    let dim = samples.first().map(|(x, _)| x.len()).unwrap_or(0);
    for (idx, (x, y)) in samples.iter().enumerate() {
        if x.len() != dim {
            return Err(SvmError::DimensionMismatch {
                expected: dim,
                got: x.len(),
            });
        }
        if let Some(bad) = x.iter().position(|v| !v.is_finite()) {
            return Err(SvmError::NonFiniteFeature {
                sample: idx,
                index: bad,
            });
        }
        if *y == 1.0 {
            has_pos = true;
        } else if *y == -1.0 {
            has_neg = true;
        } else {
            return Err(SvmError::InvalidLabel {
                sample: idx,
                label: *y,
            });
        }
    }
    if !(has_pos && has_neg) {
        return Err(SvmError::SingleClassInput);
    }
    Ok(())
}

/// Analytic two-variable step. Returns true when the pair moved.
#[allow(clippy::too_many_arguments)]
fn optimize_pair(
    i: usize,
    j: usize,
    samples: &[(Vec<f64>, f64)],
    params: &SvmParams,
    diag: &[f64],
    cache: &mut RowCache,
    alphas: &mut [f64],
    bias: &mut f64,
    f: &mut [f64],
) -> bool {
    if i == j {
        return false;
    }
    let c = params.c;
    let (yi, yj) = (samples[i].1, samples[j].1);
    let (ai_old, aj_old) = (alphas[i], alphas[j]);
    let e_i = f[i] + *bias - yi;
    let e_j = f[j] + *bias - yj;

    let (low, high) = if yi != yj {
        ((aj_old - ai_old).max(0.0), (c + aj_old - ai_old).min(c))
    } else {
        ((ai_old + aj_old - c).max(0.0), (ai_old + aj_old).min(c))
    };
    if low >= high {
        return false;
    }

    let k_ij = params.kernel.eval(&samples[i].0, &samples[j].0);
    let eta = diag[i] + diag[j] - 2.0 * k_ij;

    let aj_new = if eta > 0.0 {
        (aj_old + yj * (e_i - e_j) / eta).clamp(low, high)
    } else {
        // Degenerate curvature: evaluate the objective change at both
        // clip ends and keep the better one.
        let gain = |aj: f64| {
            let dj = aj - aj_old;
            let di = -yi * yj * dj;
            di + dj
                - di * yi * f[i]
                - dj * yj * f[j]
                - 0.5 * (di * di * diag[i] + dj * dj * diag[j])
                - di * dj * yi * yj * k_ij
        };
        if gain(low) > gain(high) {
            low
        } else {
            high
        }
    };
    if (aj_new - aj_old).abs() < 1e-12 {
        return false;
    }
    // Snap to the box so accumulated rounding never leaks outside it.
    let snap = |v: f64| {
        if v < 1e-10 {
            0.0
        } else if v > c - 1e-10 {
            c
        } else {
            v
        }
    };
    let aj_new = snap(aj_new);
    let ai_new = snap(ai_old + yi * yj * (aj_old - aj_new));
    alphas[i] = ai_new;
    alphas[j] = aj_new;

    let di = ai_new - ai_old;
    let dj = aj_new - aj_old;
    let b1 = *bias - e_i - yi * di * diag[i] - yj * dj * k_ij;
    let b2 = *bias - e_j - yi * di * k_ij - yj * dj * diag[j];
    *bias = if ai_new > 0.0 && ai_new < c {
        b1
    } else if aj_new > 0.0 && aj_new < c {
        b2
    } else {
        (b1 + b2) / 2.0
    };

    let row_i = cache.row(i).to_vec();
    let row_j = cache.row(j);
    for k in 0..f.len() {
        f[k] += yi * di * row_i[k] + yj * dj * row_j[k];
    }
    true
}

/// Bias per the KKT conditions on the final alphas: the mean of y − f over
/// free support vectors when any exist, else the midpoint of the interval
/// the bound variables admit.
fn recompute_bias(samples: &[(Vec<f64>, f64)], alphas: &[f64], f: &[f64], c: f64) -> f64 {
    let eps = 1e-9;
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    for (idx, alpha) in alphas.iter().enumerate() {
        if *alpha > eps && *alpha < c - eps {
            free_sum += samples[idx].1 - f[idx];
            free_count += 1;
        }
    }
    if free_count > 0 {
        return free_sum / free_count as f64;
    }
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for (idx, alpha) in alphas.iter().enumerate() {
        let y = samples[idx].1;
        let g = f[idx];
        let at_zero = *alpha <= eps;
        let bound = y - g;
        // α = 0 requires y(f + b) ≥ 1; α = C requires y(f + b) ≤ 1.
        if (at_zero && y > 0.0) || (!at_zero && y < 0.0) {
            lower = lower.max(bound);
        } else {
            upper = upper.min(bound);
        }
    }
    match (lower.is_finite(), upper.is_finite()) {
        (true, true) => (lower + upper) / 2.0,
        (true, false) => lower,
        (false, true) => upper,
        (false, false) => 0.0,
    }
}
