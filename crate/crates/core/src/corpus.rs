//! A seeded collection of structured operators on several spaces, used for
//! property checks across many shapes at once.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::num::{re, Scalar};
use crate::operator::OperatorRep;
use crate::space::SpaceModel;
use crate::vector::SparseVector;
use crate::weight::Weight;

pub const DEFAULT_SEED: u64 = 2024;

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub operator: OperatorRep,
    pub space: SpaceModel,
}

fn spaces() -> [SpaceModel; 4] {
    [
        SpaceModel::all_sequences(),
        SpaceModel::null_coordinatewise(),
        SpaceModel::bounded_normed(),
        SpaceModel::null_normed(),
    ]
}

fn scalar(rng: &mut ChaCha8Rng, scale: f64) -> Scalar {
    Scalar::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

pub fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> SparseVector {
    SparseVector::from_pairs((1..=dim).map(|k| (k, scalar(rng, 1.0)))).unwrap()
}

/// `rank` random terms `<f_r, x> y_r` supported on `1..=dim`.
pub fn random_finite_rank(rng: &mut ChaCha8Rng, rank: usize, dim: usize) -> OperatorRep {
    let range = (0..rank).map(|_| random_vector(rng, dim)).collect();
    let functionals = (0..rank).map(|_| random_vector(rng, dim)).collect();
    OperatorRep::FiniteRank { functionals, range }
}

pub fn random_dense_block(rng: &mut ChaCha8Rng, dim: usize) -> OperatorRep {
    let rows: Vec<Vec<Scalar>> = (0..dim).map(|_| (0..dim).map(|_| scalar(rng, 1.0)).collect()).collect();
    OperatorRep::from_matrix(&rows)
}

fn random_weight(rng: &mut ChaCha8Rng) -> Weight {
    match rng.gen_range(0..4) {
        0 => Weight::geometric(rng.gen_range(0.2..2.0), rng.gen_range(0.1..0.95)),
        1 => Weight::power(rng.gen_range(0.2..2.0), -rng.gen_range(0.5..2.0)),
        2 => Weight::real_constant(rng.gen_range(-1.5..1.5)),
        _ => {
            let head: Vec<Scalar> = (0..rng.gen_range(2..6)).map(|_| scalar(rng, 1.0)).collect();
            Weight::table(head, re(rng.gen_range(-0.9..0.9)))
        }
    }
}

fn entry(name: String, operator: OperatorRep, space: SpaceModel) -> CorpusEntry {
    CorpusEntry { name, operator, space }
}

/// Twelve operators of each shape (diagonal, shift, finite rank, sum), six
/// products and four named examples, spread over four spaces.
pub fn generate(seed: u64) -> Vec<CorpusEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spaces = spaces();
    let mut out = Vec::new();
    for i in 0..12 {
        let space = spaces[i % spaces.len()].clone();
        let w = random_weight(&mut rng);
        out.push(entry(format!("diagonal-{i}"), OperatorRep::diagonal(w), space));
    }
    for i in 0..12 {
        let space = spaces[i % spaces.len()].clone();
        let w = Weight::geometric(rng.gen_range(0.2..1.5), rng.gen_range(0.2..1.0));
        let offset = if i % 2 == 0 { -1 } else { 1 };
        out.push(entry(format!("shift-{i}"), OperatorRep::weighted_shift(offset, w), space));
    }
    for i in 0..12 {
        let space = spaces[i % spaces.len()].clone();
        let rank = rng.gen_range(1..=3);
        let dim = rng.gen_range(2..=6);
        out.push(entry(format!("finite-rank-{i}"), random_finite_rank(&mut rng, rank, dim), space));
    }
    for i in 0..12 {
        let space = spaces[i % spaces.len()].clone();
        let d = OperatorRep::diagonal(random_weight(&mut rng));
        let other = match i % 3 {
            0 => random_finite_rank(&mut rng, 1, 4),
            1 => OperatorRep::weighted_shift(-1, Weight::geometric(rng.gen_range(0.2..1.0), 0.5)),
            _ => OperatorRep::diagonal(random_weight(&mut rng)),
        };
        out.push(entry(format!("sum-{i}"), OperatorRep::sum(vec![d, other]), space));
    }
    for i in 0..6 {
        let space = spaces[i % spaces.len()].clone();
        let a = OperatorRep::diagonal(random_weight(&mut rng));
        let b = random_finite_rank(&mut rng, 2, 4);
        out.push(entry(format!("product-{i}"), OperatorRep::product(vec![a, b]), space));
    }
    out.push(entry("self-power-shift".into(), OperatorRep::self_power_shift(), SpaceModel::bounded_coordinatewise()));
    out.push(entry("forward-shift-null".into(), OperatorRep::forward_shift(), SpaceModel::null_coordinatewise()));
    out.push(entry("left-shift-all".into(), OperatorRep::left_shift(), SpaceModel::all_sequences()));
    out.push(entry("identity-all".into(), OperatorRep::identity(), SpaceModel::all_sequences()));
    out
}

/// Nine spectral parameters: inside, on and outside typical spectra.
pub fn lambda_grid() -> Vec<Scalar> {
    vec![
        re(-2.0),
        re(-0.5),
        re(0.25),
        re(0.5),
        re(1.0),
        re(3.0),
        Scalar::new(0.5, 0.5),
        Scalar::new(0.0, -1.0),
        Scalar::new(-1.5, 2.0),
    ]
}

pub fn probes(seed: u64, count: usize) -> Vec<SparseVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut x = SparseVector::zero();
            for _ in 0..rng.gen_range(1..=5) {
                x.add_at(rng.gen_range(1..=12), scalar(&mut rng, 2.0));
            }
            x
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_seeded_and_large() {
        let a = generate(DEFAULT_SEED);
        assert!(a.len() >= 50);
        let b = generate(DEFAULT_SEED);
        assert!(a.iter().zip(&b).all(|(x, y)| x.operator == y.operator && x.name == y.name));
        assert_ne!(generate(1)[0].operator, a[0].operator);
        assert_eq!(lambda_grid().len(), 9);
    }
}
