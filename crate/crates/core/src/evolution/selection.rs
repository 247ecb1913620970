//! Survivor selection over the merged parent and child pool.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use super::config::Selection;
use crate::expr::Individual;

/// Index of the first individual with minimal fitness.
pub fn best_index(pool: &[Individual]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, ind) in pool.iter().enumerate() {
        if best.is_none_or(|b| ind.fitness < pool[b].fitness) {
            best = Some(i);
        }
    }
    best
}

/// Picks `size` survivors from `parents ∪ children`.
///
/// The first survivor is always the best individual of the pool.
pub fn select<R: Rng + ?Sized>(
    parents: Vec<Individual>,
    children: Vec<Individual>,
    size: usize,
    scheme: Selection,
    rng: &mut R,
) -> Vec<Individual> {
    let mut pool = parents;
    pool.extend(children);
    if pool.is_empty() || size == 0 {
        return Vec::new();
    }
    let elite = best_index(&pool).expect("pool is non-empty");
    let mut picks = Vec::with_capacity(size);
    picks.push(elite);
    match scheme {
        Selection::Tournament => {
            while picks.len() < size {
                picks.push(tournament(&pool, rng));
            }
        }
        Selection::Roulette => {
            let weights: Vec<f64> =
                pool.iter().map(|i| if i.fitness.is_finite() { 1.0 / (1.0 + i.fitness) } else { 0.0 }).collect();
            match WeightedIndex::new(&weights) {
                Ok(dist) => {
                    while picks.len() < size {
                        picks.push(dist.sample(rng));
                    }
                }
                Err(_) => {
                    while picks.len() < size {
                        picks.push(rng.gen_range(0..pool.len()));
                    }
                }
            }
        }
        Selection::ElitistReplacement => {
            let mut order: Vec<usize> = (0..pool.len()).collect();
            order.sort_by(|&a, &b| pool[a].fitness.total_cmp(&pool[b].fitness));
            picks = order.into_iter().take(size).collect();
            while picks.len() < size {
                picks.push(elite);
            }
        }
    }
    picks.into_iter().map(|i| pool[i].clone()).collect()
}

/// Size-2 tournament between two distinct pool members; ties go to the first drawn.
fn tournament<R: Rng + ?Sized>(pool: &[Individual], rng: &mut R) -> usize {
    if pool.len() == 1 {
        return 0;
    }
    let a = rng.gen_range(0..pool.len());
    let mut b = rng.gen_range(0..pool.len() - 1);
    if b >= a {
        b += 1;
    }
    if pool[b].fitness < pool[a].fitness {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Term;
    use crate::transforms::TransformId;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn with_fitness(f: f64, tag: i32) -> Individual {
        Individual {
            terms: vec![Term::new(vec![tag], TransformId::Id)],
            weights: vec![1.0],
            intercept: 0.0,
            fitness: f,
        }
    }

    const SCHEMES: [Selection; 3] = [Selection::Tournament, Selection::Roulette, Selection::ElitistReplacement];

    #[test]
    fn elite_always_survives() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for scheme in SCHEMES {
            let parents: Vec<Individual> = (0..10).map(|i| with_fitness(f64::INFINITY, i)).collect();
            let mut children = parents.clone();
            children[7] = with_fitness(0.0, 99);
            let out = select(parents, children, 10, scheme, &mut rng);
            assert_eq!(out.len(), 10);
            assert!(out.iter().any(|i| i.fitness == 0.0), "{scheme:?}");
        }
    }

    #[test]
    fn output_drawn_from_pool() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let parents: Vec<Individual> = (0..6).map(|i| with_fitness(i as f64, i)).collect();
        for scheme in SCHEMES {
            let out = select(parents.clone(), parents.clone(), 6, scheme, &mut rng);
            assert!(out.iter().all(|o| parents.contains(o)));
        }
    }

    #[test]
    fn tournament_prefers_lower_fitness() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pool = vec![with_fitness(2.0, 0), with_fitness(1.0, 1)];
        for _ in 0..50 {
            assert_eq!(tournament(&pool, &mut rng), 1);
        }
    }

    #[test]
    fn elitist_replacement_truncates() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let parents: Vec<Individual> = (0..4).map(|i| with_fitness(i as f64, i)).collect();
        let children: Vec<Individual> = (4..8).map(|i| with_fitness(i as f64 - 3.5, i)).collect();
        let out = select(parents, children, 4, Selection::ElitistReplacement, &mut rng);
        let f: Vec<f64> = out.iter().map(|i| i.fitness).collect();
        assert_eq!(f, vec![0.0, 0.5, 1.0, 1.5]);
    }
}
