//! Independent oracles and generators shared by the integration tests.
//! Nothing here calls into the optimizers; objectives are recomputed from
//! their definitions.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twolevel::dataset::BinaryDataset;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_bits(rng: &mut ChaCha8Rng, n: usize, d: usize, p: f64) -> Vec<Vec<u8>> {
    (0..n)
        .map(|_| (0..d).map(|_| u8::from(rng.gen_bool(p))).collect())
        .collect()
}

pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize) -> BinaryDataset {
    let x = random_bits(rng, n, d, 0.5);
    let y: Vec<u8> = (0..n).map(|_| u8::from(rng.gen_bool(0.5))).collect();
    BinaryDataset::from_binary_features(&x, &y, None).unwrap()
}

/// Random clause matrix (R clauses over `width` columns), pad included.
pub fn random_clauses(rng: &mut ChaCha8Rng, r: usize, width: usize, p: f64) -> Vec<Vec<bool>> {
    (0..r)
        .map(|_| (0..width).map(|_| rng.gen_bool(p)).collect())
        .collect()
}

fn hits(row: &[u8], clause: &[bool]) -> u64 {
    row.iter()
        .zip(clause)
        .filter(|(&a, &w)| a == 1 && w)
        .count() as u64
}

/// CNF objective by brute force over every feasible ideal assignment.
///
/// Positives must have every clause output 1 and pay the hinge per clause.
/// Each negative chooses a non-empty set Z of clauses forced to 0 (all
/// others don't care) and pays the selected-true count on each clause in Z.
pub fn brute_objective(
    rows: &[&[u8]],
    labels: &[u8],
    clauses: &[Vec<bool>],
    theta: f64,
    pad_cost: f64,
) -> f64 {
    let r = clauses.len();
    let mut loss = 0u64;
    for (row, &y) in rows.iter().zip(labels) {
        let s: Vec<u64> = clauses.iter().map(|c| hits(row, c)).collect();
        if y == 1 {
            loss += s.iter().map(|&v| u64::from(v == 0)).sum::<u64>();
        } else {
            let best = (1u32..(1 << r))
                .map(|mask| {
                    (0..r)
                        .filter(|k| mask & (1 << k) != 0)
                        .map(|k| s[k])
                        .sum::<u64>()
                })
                .min()
                .unwrap();
            loss += best;
        }
    }
    let selected: usize = clauses
        .iter()
        .map(|c| c[1..].iter().filter(|&&b| b).count())
        .sum();
    let pads = clauses.iter().filter(|c| c[0]).count();
    loss as f64
        + theta * selected as f64
        + if pads == 0 {
            0.0
        } else {
            pad_cost * pads as f64
        }
}

/// One-clause objective at a binary selection.
pub fn clause_objective(
    rows: &[Vec<u8>],
    target: &[u8],
    w: &[bool],
    theta: f64,
    pad_cost: f64,
) -> f64 {
    let refs: Vec<&[u8]> = rows.iter().map(|r| r.as_slice()).collect();
    brute_objective(&refs, target, &[w.to_vec()], theta, pad_cost)
}

/// Minimum one-clause objective over all 2^width selections.
pub fn brute_clause_min(rows: &[Vec<u8>], target: &[u8], theta: f64, pad_cost: f64) -> f64 {
    let width = rows[0].len();
    (0u32..(1 << width))
        .map(|mask| {
            let w: Vec<bool> = (0..width).map(|j| mask & (1 << j) != 0).collect();
            if w[0] && pad_cost.is_infinite() {
                return f64::INFINITY;
            }
            clause_objective(rows, target, &w, theta, pad_cost)
        })
        .fold(f64::INFINITY, f64::min)
}

/// CNF prediction straight from the definition.
pub fn eval_cnf(row: &[u8], clauses: &[Vec<bool>]) -> u8 {
    u8::from(clauses.iter().all(|c| hits(row, c) > 0))
}

/// DNF prediction straight from the definition. A disabled clause (pad
/// selected) contributes nothing; an enabled clause fires when every
/// selected literal is true.
pub fn eval_dnf(row: &[u8], clauses: &[Vec<bool>]) -> u8 {
    u8::from(clauses.iter().any(|c| {
        !c[0]
            && c.iter()
                .enumerate()
                .skip(1)
                .all(|(j, &w)| !w || row[j] == 1)
    }))
}

/// A DNF term as (feature index, required value) literals.
pub type Term = Vec<(usize, u8)>;

/// Two random terms of 2 to 3 literals over distinct features.
pub fn planted_terms(rng: &mut ChaCha8Rng, d: usize) -> Vec<Term> {
    (0..2)
        .map(|_| {
            let len = rng.gen_range(2..=3).min(d);
            let mut feats: Vec<usize> = Vec::new();
            while feats.len() < len {
                let f = rng.gen_range(0..d);
                if !feats.contains(&f) {
                    feats.push(f);
                }
            }
            feats
                .into_iter()
                .map(|f| (f, u8::from(rng.gen_bool(0.5))))
                .collect()
        })
        .collect()
}

pub fn label_dnf(x: &[Vec<u8>], terms: &[Term]) -> Vec<u8> {
    x.iter()
        .map(|row| u8::from(terms.iter().any(|t| t.iter().all(|&(f, v)| row[f] == v))))
        .collect()
}

pub fn error_rate(pred: &[u8], truth: &[u8]) -> f64 {
    let wrong = pred.iter().zip(truth).filter(|(a, b)| a != b).count();
    wrong as f64 / truth.len() as f64
}
