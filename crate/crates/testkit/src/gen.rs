//! Deterministic dataset generators.

use std::io::Write;
use std::path::Path;

use cfkit::datamodel::RatingTriple;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn user_code(u: usize) -> String {
    format!("u{u:04}")
}

fn item_code(i: usize) -> String {
    format!("i{i:04}")
}

/// Fully rated grid with a deterministic value pattern in 1..=5.
pub fn grid_triples(num_users: usize, num_items: usize) -> Vec<RatingTriple> {
    let mut triples = Vec::with_capacity(num_users * num_items);
    for u in 0..num_users {
        for i in 0..num_items {
            let value = 1.0 + ((u * 7 + i * 3) % 5) as f64;
            triples.push(RatingTriple::new(user_code(u), item_code(i), value));
        }
    }
    triples
}

/// Sparse random ratings with integer values 1..=5.
pub fn toy_triples(
    num_users: usize,
    num_items: usize,
    density: f64,
    seed: u64,
) -> Vec<RatingTriple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triples = Vec::new();
    for u in 0..num_users {
        for i in 0..num_items {
            if rng.random::<f64>() < density {
                let value = rng.random_range(1..=5) as f64;
                triples.push(RatingTriple::new(user_code(u), item_code(i), value));
            }
        }
    }
    // Random sparsity can leave a user or item entirely unrated, which a
    // ratings file cannot express; pin one corner rating per entity.
    for u in 0..num_users {
        if !triples.iter().any(|t| t.user_code == user_code(u)) {
            triples.push(RatingTriple::new(user_code(u), item_code(0), 3.0));
        }
    }
    for i in 0..num_items {
        if !triples.iter().any(|t| t.item_code == item_code(i)) {
            triples.push(RatingTriple::new(user_code(0), item_code(i), 3.0));
        }
    }
    triples
}

/// Sparse random ratings with continuous values in [1, 5]; useful where
/// exact value ties would make ordering assertions fragile.
pub fn toy_triples_continuous(
    num_users: usize,
    num_items: usize,
    density: f64,
    seed: u64,
) -> Vec<RatingTriple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triples = Vec::new();
    for u in 0..num_users {
        for i in 0..num_items {
            if rng.random::<f64>() < density {
                let value = 1.0 + 4.0 * rng.random::<f64>();
                triples.push(RatingTriple::new(user_code(u), item_code(i), value));
            }
        }
    }
    triples
}

/// Star-rating dataset with user/item structure: each user rates
/// `ratings_per_user` distinct items, values follow per-entity biases plus
/// noise, rounded into 1..=5. Mimics the shape of a MovieLens-style export.
pub fn synthetic_ratings(
    num_users: usize,
    num_items: usize,
    ratings_per_user: usize,
    seed: u64,
) -> Vec<RatingTriple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let user_bias: Vec<f64> = (0..num_users).map(|_| rng.random_range(-1.0..1.0)).collect();
    let item_bias: Vec<f64> = (0..num_items).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut triples = Vec::with_capacity(num_users * ratings_per_user);
    for u in 0..num_users {
        let items = rand::seq::index::sample(&mut rng, num_items, ratings_per_user);
        for i in items {
            let raw = 3.0 + user_bias[u] + item_bias[i] + rng.random_range(-0.75..0.75);
            let value = raw.round().clamp(1.0, 5.0);
            triples.push(RatingTriple::new(user_code(u), item_code(i), value));
        }
    }
    triples
}

/// Writes triples as a ratings text file. With `timestamps`, each line gets
/// a fourth field the loader is expected to skip.
pub fn write_ratings_file(
    path: impl AsRef<Path>,
    triples: &[RatingTriple],
    separator: &str,
    timestamps: bool,
) -> std::io::Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    for (n, t) in triples.iter().enumerate() {
        if timestamps {
            writeln!(
                file,
                "{}{sep}{}{sep}{}{sep}{}",
                t.user_code,
                t.item_code,
                t.value,
                978_000_000 + n,
                sep = separator
            )?;
        } else {
            writeln!(
                file,
                "{}{sep}{}{sep}{}",
                t.user_code,
                t.item_code,
                t.value,
                sep = separator
            )?;
        }
    }
    file.flush()
}
