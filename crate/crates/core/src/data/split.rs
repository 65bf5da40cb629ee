use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{AttackMapping, ClassLabel, DataError, RawRecord};

/// Splits items into `parts` sublists whose sizes differ by at most one.
/// Without a seed the split is contiguous in input order; with a seed the
/// items are shuffled deterministically first. Parts are disjoint and cover
/// the input.
pub fn split_rounds<T: Clone>(
    items: &[T],
    parts: usize,
    seed: Option<u64>,
) -> Result<Vec<Vec<T>>, DataError> {
    if parts == 0 || items.is_empty() || parts > items.len() {
        return Err(DataError::BadSplit {
            len: items.len(),
            parts,
        });
    }
    let mut pool: Vec<T> = items.to_vec();
    if let Some(seed) = seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        pool.shuffle(&mut rng);
    }
    let base = pool.len() / parts;
    let extra = pool.len() % parts;
    let mut out = Vec::with_capacity(parts);
    let mut cursor = 0usize;
    for part in 0..parts {
        let size = base + usize::from(part < extra);
        out.push(pool[cursor..cursor + size].to_vec());
        cursor += size;
    }
    debug_assert_eq!(cursor, pool.len());
    Ok(out)
}

/// Draws a class-proportional subsample of `size` records, deterministic
/// under `seed`. Per-class quotas come from largest-remainder allocation so
/// rare classes keep representation; classes short on records yield what
/// they have and the shortfall moves to the largest classes.
pub fn stratified_subsample(
    records: &[RawRecord],
    mapping: &AttackMapping,
    size: usize,
    seed: u64,
) -> Result<Vec<RawRecord>, DataError> {
    if size == 0 || size > records.len() {
        return Err(DataError::BadSubsample {
            requested: size,
            available: records.len(),
        });
    }
    // Group record indices by mapped class, preserving file order.
    let mut groups: Vec<(ClassLabel, Vec<usize>)> = Vec::new();
    for (idx, record) in records.iter().enumerate() {
        let class = mapping.map(&record.label)?;
        match groups.iter_mut().find(|(c, _)| *c == class) {
            Some((_, indices)) => indices.push(idx),
            None => groups.push((class, vec![idx])),
        }
    }
    groups.sort_by_key(|(c, _)| *c);

    let total = records.len() as f64;
    let mut quotas: Vec<usize> = groups
        .iter()
        .map(|(_, idxs)| ((idxs.len() as f64 / total) * size as f64).floor() as usize)
        .collect();
    // Largest remainders take the leftover slots.
    let mut remainders: Vec<(usize, f64)> = groups
        .iter()
        .enumerate()
        .map(|(i, (_, idxs))| {
            let exact = (idxs.len() as f64 / total) * size as f64;
            (i, exact - exact.floor())
        })
        .collect();
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut assigned: usize = quotas.iter().sum();
    for (i, _) in remainders.iter().cycle() {
        if assigned == size {
            break;
        }
        if quotas[*i] < groups[*i].1.len() {
            quotas[*i] += 1;
            assigned += 1;
        } else if quotas.iter().zip(&groups).all(|(q, (_, g))| *q >= g.len()) {
            break;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = Vec::with_capacity(size);
    for ((_, indices), quota) in groups.iter().zip(&quotas) {
        let mut shuffled = indices.clone();
        shuffled.shuffle(&mut rng);
        picked.extend(shuffled.into_iter().take(*quota));
    }
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| records[i].clone()).collect())
}
