//! Shared test support: independent oracles the implementation is checked
//! against. Nothing here may call into the code paths under test.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use netsoinn::svm::{Kernel, SvmParams};

// ---------------------------------------------------------------------------
// Brute-force SVM dual solver
//
// Enumerates every active-set pattern (each alpha at 0, at C, or free),
// solves the stationarity system for the free variables plus the equality
// multiplier, keeps feasible candidates and returns the best objective.
// Exact up to linear-solve arithmetic for the instance sizes used in tests.

fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut sum = b[row];
        for k in (row + 1)..n {
            sum -= a[row][k] * x[k];
        }
        x[row] = sum / a[row][row];
    }
    Some(x)
}

fn gram(samples: &[(Vec<f64>, f64)], kernel: &Kernel) -> Vec<Vec<f64>> {
    let n = samples.len();
    let mut q = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            q[i][j] = samples[i].1 * samples[j].1 * kernel.eval(&samples[i].0, &samples[j].0);
        }
    }
    q
}

fn objective(q: &[Vec<f64>], alphas: &[f64]) -> f64 {
    let n = alphas.len();
    let mut linear = 0.0;
    let mut quad = 0.0;
    for i in 0..n {
        linear += alphas[i];
        for j in 0..n {
            quad += alphas[i] * alphas[j] * q[i][j];
        }
    }
    linear - 0.5 * quad
}

/// Maximizes the dual by exhaustive active-set enumeration. Returns the
/// optimal alphas and the objective value.
pub fn brute_force_dual(samples: &[(Vec<f64>, f64)], params: &SvmParams) -> (Vec<f64>, f64) {
    let n = samples.len();
    assert!(n <= 8, "oracle is exponential; keep instances tiny");
    let c = params.c;
    let q = gram(samples, &params.kernel);
    let tol = 1e-9;

    let mut best_alphas = vec![0.0; n];
    let mut best_obj = f64::NEG_INFINITY;
    // Pattern digit per sample: 0 = alpha 0, 1 = alpha C, 2 = free.
    let patterns = 3usize.pow(n as u32);
    for pattern in 0..patterns {
        let mut digits = Vec::with_capacity(n);
        let mut rest = pattern;
        for _ in 0..n {
            digits.push(rest % 3);
            rest /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| digits[i] == 2).collect();
        let mut alphas: Vec<f64> = digits
            .iter()
            .map(|&d| if d == 1 { c } else { 0.0 })
            .collect();

        if free.is_empty() {
            let balance: f64 = (0..n).map(|i| samples[i].1 * alphas[i]).sum();
            if balance.abs() > tol {
                continue;
            }
        } else {
            // Stationarity rows for the free variables plus the equality
            // constraint; unknowns are the free alphas and the multiplier.
            let m = free.len();
            let mut a = vec![vec![0.0; m + 1]; m + 1];
            let mut b = vec![0.0; m + 1];
            for (row, &i) in free.iter().enumerate() {
                for (col, &j) in free.iter().enumerate() {
                    a[row][col] = q[i][j];
                }
                a[row][m] = samples[i].1;
                let mut rhs = 1.0;
                for j in 0..n {
                    if digits[j] == 1 {
                        rhs -= q[i][j] * c;
                    }
                }
                b[row] = rhs;
            }
            for (col, &j) in free.iter().enumerate() {
                a[m][col] = samples[j].1;
            }
            let mut rhs = 0.0;
            for j in 0..n {
                if digits[j] == 1 {
                    rhs -= samples[j].1 * c;
                }
            }
            b[m] = rhs;
            let Some(solution) = solve_linear(a, b) else {
                continue;
            };
            let mut ok = true;
            for (idx, &i) in free.iter().enumerate() {
                let v = solution[idx];
                if !(v >= -tol && v <= c + tol) {
                    ok = false;
                    break;
                }
                alphas[i] = v.clamp(0.0, c);
            }
            if !ok {
                continue;
            }
            let balance: f64 = (0..n).map(|i| samples[i].1 * alphas[i]).sum();
            if balance.abs() > 1e-6 {
                continue;
            }
        }
        let obj = objective(&q, &alphas);
        if obj > best_obj {
            best_obj = obj;
            best_alphas = alphas;
        }
    }
    (best_alphas, best_obj)
}

/// Decision function built straight from oracle alphas (bias from the KKT
/// conditions), for prediction cross-checks.
pub fn oracle_decision(
    samples: &[(Vec<f64>, f64)],
    alphas: &[f64],
    params: &SvmParams,
    x: &[f64],
) -> f64 {
    let n = samples.len();
    let f = |point: &[f64]| -> f64 {
        (0..n)
            .map(|i| alphas[i] * samples[i].1 * params.kernel.eval(&samples[i].0, point))
            .sum()
    };
    let eps = 1e-7;
    let mut bias_sum = 0.0;
    let mut bias_count = 0usize;
    for i in 0..n {
        if alphas[i] > eps && alphas[i] < params.c - eps {
            bias_sum += samples[i].1 - f(&samples[i].0);
            bias_count += 1;
        }
    }
    let bias = if bias_count > 0 {
        bias_sum / bias_count as f64
    } else {
        let mut lower = f64::NEG_INFINITY;
        let mut upper = f64::INFINITY;
        for i in 0..n {
            let y = samples[i].1;
            let bound = y - f(&samples[i].0);
            let at_zero = alphas[i] <= eps;
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
    };
    f(x) + bias
}

// ---------------------------------------------------------------------------
// Baseline topology learner
//
// Re-implements the streaming clusterer without the win-cap rule, for the
// equivalence check at win_cap = 0. Written independently: index loops,
// separate data layout, same arithmetic as specified.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineEvent {
    Created(u64),
    Win(u64),
}

pub struct BaselineSoinn {
    pub age_max: u32,
    pub lambda: u64,
    pub divisor: f64,
    pub nodes: BTreeMap<u64, (Vec<f64>, u64)>,
    pub edges: BTreeMap<(u64, u64), u32>,
    pub inputs: u64,
    next: u64,
}

impl BaselineSoinn {
    pub fn new(age_max: u32, lambda: u64, divisor: f64) -> Self {
        BaselineSoinn {
            age_max,
            lambda,
            divisor,
            nodes: BTreeMap::new(),
            edges: BTreeMap::new(),
            inputs: 0,
            next: 0,
        }
    }

    fn sqdist(a: &[f64], b: &[f64]) -> f64 {
        let mut sum = 0.0;
        for i in 0..a.len() {
            let d = a[i] - b[i];
            sum += d * d;
        }
        sum
    }

    fn key(a: u64, b: u64) -> (u64, u64) {
        if a < b {
            (a, b)
        } else {
            (b, a)
        }
    }

    fn neighbors(&self, id: u64) -> Vec<u64> {
        let mut out = Vec::new();
        for (a, b) in self.edges.keys() {
            if *a == id {
                out.push(*b);
            } else if *b == id {
                out.push(*a);
            }
        }
        out
    }

    fn threshold(&self, id: u64) -> f64 {
        let weight = &self.nodes[&id].0;
        let neighbors = self.neighbors(id);
        if neighbors.is_empty() {
            let mut min = f64::INFINITY;
            for (other, (w, _)) in &self.nodes {
                if *other != id {
                    min = min.min(Self::sqdist(weight, w));
                }
            }
            min
        } else {
            let mut max = 0.0f64;
            for n in neighbors {
                max = max.max(Self::sqdist(weight, &self.nodes[&n].0));
            }
            max
        }
    }

    pub fn process(&mut self, x: &[f64]) -> BaselineEvent {
        self.inputs += 1;
        if self.nodes.len() < 2 {
            let id = self.next;
            self.next += 1;
            self.nodes.insert(id, (x.to_vec(), 0));
            return BaselineEvent::Created(id);
        }
        let mut s1 = u64::MAX;
        let mut s2 = u64::MAX;
        let mut d1 = f64::INFINITY;
        let mut d2 = f64::INFINITY;
        for (id, (w, _)) in &self.nodes {
            let d = Self::sqdist(x, w);
            if d < d1 {
                s2 = s1;
                d2 = d1;
                s1 = *id;
                d1 = d;
            } else if d < d2 {
                s2 = *id;
                d2 = d;
            }
        }
        if d1 > self.threshold(s1) || d2 > self.threshold(s2) {
            let id = self.next;
            self.next += 1;
            self.nodes.insert(id, (x.to_vec(), 0));
            return BaselineEvent::Created(id);
        }
        // No win-cap rule: the first winner always receives the win.
        let u = s1;
        let pair = Self::key(s1, s2);
        self.edges.insert(pair, 0);
        let incident: Vec<(u64, u64)> = self
            .edges
            .keys()
            .filter(|k| (k.0 == u || k.1 == u) && **k != pair)
            .cloned()
            .collect();
        for k in incident {
            let age = self.edges.get_mut(&k).unwrap();
            *age += 1;
            if *age > self.age_max {
                self.edges.remove(&k);
            }
        }
        let entry = self.nodes.get_mut(&u).unwrap();
        entry.1 += 1;
        let wins = entry.1;
        let rate = 1.0 / wins as f64;
        for i in 0..entry.0.len() {
            entry.0[i] += rate * (x[i] - entry.0[i]);
        }
        let nrate = 1.0 / (self.divisor * wins as f64);
        for n in self.neighbors(u) {
            let w = &mut self.nodes.get_mut(&n).unwrap().0;
            for i in 0..w.len() {
                w[i] += nrate * (x[i] - w[i]);
            }
        }
        if self.inputs % self.lambda == 0 {
            self.cleanup();
        }
        BaselineEvent::Win(u)
    }

    pub fn cleanup(&mut self) {
        self.edges.retain(|_, age| *age <= self.age_max);
        let mut connected = BTreeSet::new();
        for (a, b) in self.edges.keys() {
            connected.insert(*a);
            connected.insert(*b);
        }
        let isolated: Vec<u64> = self
            .nodes
            .keys()
            .filter(|id| !connected.contains(id))
            .cloned()
            .collect();
        let keep = 2usize.saturating_sub(connected.len());
        let mut removable = isolated;
        if keep > 0 && !removable.is_empty() {
            let mut ranked = removable.clone();
            ranked.sort_by_key(|id| (std::cmp::Reverse(self.nodes[id].1), *id));
            let kept: BTreeSet<u64> = ranked.into_iter().take(keep).collect();
            removable.retain(|id| !kept.contains(id));
        }
        for id in removable {
            self.nodes.remove(&id);
        }
    }
}

// ---------------------------------------------------------------------------
// Union-find, for cross-checking connected-component counts.

pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let root = self.find(self.parent[i]);
            self.parent[i] = root;
        }
        self.parent[i]
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra] = rb;
        }
    }

    pub fn components(&mut self) -> usize {
        let n = self.parent.len();
        let mut roots = BTreeSet::new();
        for i in 0..n {
            let r = self.find(i);
            roots.insert(r);
        }
        roots.len()
    }
}
