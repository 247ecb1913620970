//! Random creation and the six mutation operators.

use rand::seq::SliceRandom;
use rand::Rng;

use super::config::{EvolutionConfig, MutationOp, STRENGTH_CAP};
use super::Evaluator;
use crate::expr::{Individual, Term};
use crate::transforms::TransformId;

/// The eligible set is empty for this individual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no mutation operator is eligible for an expression of {len} terms")]
pub struct NoEligibleMutation {
    pub len: usize,
}

/// Uniform draw from `[lb, ub]` excluding 0. `[lb, ub]` must contain a nonzero value.
fn nonzero_strength<R: Rng + ?Sized>(cfg: &EvolutionConfig, rng: &mut R) -> i32 {
    loop {
        let k = rng.gen_range(cfg.lb..=cfg.ub);
        if k != 0 {
            return k;
        }
    }
}

/// A term with strengths uniform in `[lb, ub]`, not all zero, and a uniform function.
pub fn random_term<R: Rng + ?Sized>(d: usize, cfg: &EvolutionConfig, rng: &mut R) -> Term {
    let strengths = loop {
        let s: Vec<i32> = (0..d).map(|_| rng.gen_range(cfg.lb..=cfg.ub)).collect();
        if s.iter().any(|&k| k != 0) {
            break s;
        }
    };
    let func = *cfg.funcs.ids().choose(rng).expect("function set is non-empty");
    Term::new(strengths, func)
}

/// Between 1 and `n_terms` random terms, unfitted.
pub fn random_terms<R: Rng + ?Sized>(d: usize, cfg: &EvolutionConfig, rng: &mut R) -> Vec<Term> {
    let count = rng.gen_range(1..=cfg.n_terms);
    (0..count).map(|_| random_term(d, cfg, rng)).collect()
}

/// A fitted random individual.
pub fn random_individual<R: Rng + ?Sized>(
    d: usize,
    cfg: &EvolutionConfig,
    eval: &Evaluator,
    rng: &mut R,
) -> Individual {
    eval.fit(random_terms(d, cfg, rng))
}

pub fn mutate_drop<R: Rng + ?Sized>(terms: &[Term], rng: &mut R) -> Vec<Term> {
    let mut out = terms.to_vec();
    out.remove(rng.gen_range(0..out.len()));
    out
}

pub fn mutate_add<R: Rng + ?Sized>(terms: &[Term], cfg: &EvolutionConfig, rng: &mut R) -> Vec<Term> {
    let mut out = terms.to_vec();
    out.push(random_term(terms[0].dim(), cfg, rng));
    out
}

pub fn mutate_replace_interaction<R: Rng + ?Sized>(terms: &[Term], cfg: &EvolutionConfig, rng: &mut R) -> Vec<Term> {
    let mut out = terms.to_vec();
    let t = rng.gen_range(0..out.len());
    let s = &mut out[t].strengths;
    let v = rng.gen_range(0..s.len());
    s[v] = rng.gen_range(cfg.lb..=cfg.ub);
    if s.iter().all(|&k| k == 0) {
        s[v] = nonzero_strength(cfg, rng);
    }
    out
}

/// Combines `target + sign * source` element-wise, clamped to the strength cap.
///
/// An all-zero result gets one random entry re-drawn as nonzero.
pub fn interact<R: Rng + ?Sized>(
    target: &[i32],
    source: &[i32],
    sign: i32,
    cfg: &EvolutionConfig,
    rng: &mut R,
) -> Vec<i32> {
    let mut s: Vec<i32> =
        target.iter().zip(source).map(|(&a, &b)| (a + sign * b).clamp(-STRENGTH_CAP, STRENGTH_CAP)).collect();
    if s.iter().all(|&k| k == 0) {
        let v = rng.gen_range(0..s.len());
        s[v] = nonzero_strength(cfg, rng);
    }
    s
}

/// Replaces a random term's strengths by its interaction with another
/// term of the same expression. A single term pairs with itself.
pub fn mutate_interact<R: Rng + ?Sized>(terms: &[Term], sign: i32, cfg: &EvolutionConfig, rng: &mut R) -> Vec<Term> {
    let mut out = terms.to_vec();
    let t = rng.gen_range(0..out.len());
    let src = if out.len() == 1 {
        t
    } else {
        let j = rng.gen_range(0..out.len() - 1);
        if j >= t {
            j + 1
        } else {
            j
        }
    };
    out[t].strengths = interact(&terms[t].strengths, &terms[src].strengths, sign, cfg, rng);
    out
}

pub fn mutate_replace_transform<R: Rng + ?Sized>(terms: &[Term], cfg: &EvolutionConfig, rng: &mut R) -> Vec<Term> {
    let mut out = terms.to_vec();
    let t = rng.gen_range(0..out.len());
    let current = out[t].func;
    let choices: Vec<TransformId> = cfg.funcs.ids().iter().copied().filter(|&f| f != current).collect();
    if let Some(&f) = choices.choose(rng) {
        out[t].func = f;
    }
    out
}

/// Operators of `cfg.mutation_set` applicable to an expression of `len` terms.
pub fn eligible(len: usize, cfg: &EvolutionConfig) -> Vec<MutationOp> {
    cfg.mutation_set
        .iter()
        .copied()
        .filter(|op| match op {
            MutationOp::Drop => len >= cfg.min_drop,
            MutationOp::Add => len <= cfg.max_add,
            MutationOp::ReplaceTransformation => cfg.funcs.len() >= 2,
            _ => true,
        })
        .collect()
}

/// Uniform choice over the eligible operators.
pub fn choose_op<R: Rng + ?Sized>(len: usize, cfg: &EvolutionConfig, rng: &mut R) -> Option<MutationOp> {
    eligible(len, cfg).choose(rng).copied()
}

/// Applies `op` to the terms without refitting.
pub fn apply_op<R: Rng + ?Sized>(op: MutationOp, terms: &[Term], cfg: &EvolutionConfig, rng: &mut R) -> Vec<Term> {
    match op {
        MutationOp::Drop => mutate_drop(terms, rng),
        MutationOp::Add => mutate_add(terms, cfg, rng),
        MutationOp::ReplaceInteraction => mutate_replace_interaction(terms, cfg, rng),
        MutationOp::PositiveInteraction => mutate_interact(terms, 1, cfg, rng),
        MutationOp::NegativeInteraction => mutate_interact(terms, -1, cfg, rng),
        MutationOp::ReplaceTransformation => mutate_replace_transform(terms, cfg, rng),
    }
}

/// Picks an eligible operator uniformly, applies it and refits.
pub fn mutate<R: Rng + ?Sized>(
    ind: &Individual,
    cfg: &EvolutionConfig,
    eval: &Evaluator,
    rng: &mut R,
) -> Result<(Individual, MutationOp), NoEligibleMutation> {
    let op = choose_op(ind.len(), cfg, rng).ok_or(NoEligibleMutation { len: ind.len() })?;
    Ok((eval.fit(apply_op(op, &ind.terms, cfg, rng)), op))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::config::parse_mutation_set;
    use crate::fitting::FitConfig;
    use crate::transforms::TransformSet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use TransformId::*;

    fn cfg() -> EvolutionConfig {
        EvolutionConfig::default()
    }

    fn terms(specs: &[(&[i32], TransformId)]) -> Vec<Term> {
        specs.iter().map(|(s, f)| Term::new(s.to_vec(), *f)).collect()
    }

    /// Pearson chi-square statistic against uniform expected counts.
    fn chi_square(counts: &[usize]) -> f64 {
        let total: usize = counts.iter().sum();
        let e = total as f64 / counts.len() as f64;
        counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum()
    }

    #[test]
    fn degenerate_range_forces_term() {
        let mut c = cfg();
        c.lb = 1;
        c.ub = 1;
        c.funcs = TransformSet::new(vec![Id]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            assert_eq!(random_term(2, &c, &mut rng), Term::new(vec![1, 1], Id));
        }
    }

    #[test]
    fn strengths_uniform_over_nonzero() {
        let c = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut counts = [0usize; 7];
        for _ in 0..10_000 {
            let k = random_term(1, &c, &mut rng).strengths[0];
            counts[(k + 3) as usize] += 1;
        }
        assert_eq!(counts[3], 0);
        let nonzero: Vec<usize> = counts.iter().copied().filter(|&c| c > 0).collect();
        assert_eq!(nonzero.len(), 6);
        let e: f64 = 10_000.0 / 6.0;
        let sd = (e * (1.0 - 1.0 / 6.0)).sqrt();
        for c in nonzero {
            assert!((c as f64 - e).abs() < 3.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn funcs_drawn_uniformly() {
        let mut c = cfg();
        c.funcs = TransformSet::new(vec![Sin, Log]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sins = (0..10_000).filter(|_| random_term(3, &c, &mut rng).func == Sin).count();
        assert!((sins as f64 - 5000.0).abs() < 3.0 * 50.0, "{sins}");
    }

    #[test]
    fn term_counts_uniform() {
        let mut c = cfg();
        c.n_terms = 15;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut counts = [0usize; 15];
        for _ in 0..10_000 {
            let n = random_terms(2, &c, &mut rng).len();
            assert!((1..=15).contains(&n));
            counts[n - 1] += 1;
        }
        // 14 degrees of freedom; 36.12 is the 0.001 upper quantile.
        assert!(chi_square(&counts) < 36.12, "{counts:?}");

        c.n_terms = 1;
        assert!((0..100).all(|_| random_terms(2, &c, &mut rng).len() == 1));
    }

    #[test]
    fn drop_and_add_change_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = terms(&[(&[1, 0], Id), (&[0, 1], Sin), (&[1, 1], Cos)]);
        let mut removed = [0usize; 3];
        for _ in 0..3000 {
            let out = mutate_drop(&t, &mut rng);
            assert_eq!(out.len(), 2);
            let gone = t.iter().position(|x| !out.contains(x)).unwrap();
            removed[gone] += 1;
        }
        assert!(removed.iter().all(|&c| (c as f64 - 1000.0).abs() < 150.0), "{removed:?}");
        assert_eq!(mutate_drop(&t[..2], &mut rng).len(), 1);
        assert_eq!(mutate_add(&t[..1], &cfg(), &mut rng).len(), 2);
    }

    #[test]
    fn eligibility_boundaries() {
        let mut c = cfg();
        c.max_add = 10;
        assert!(!eligible(1, &c).contains(&MutationOp::Drop));
        assert!(eligible(2, &c).contains(&MutationOp::Drop));
        assert!(eligible(10, &c).contains(&MutationOp::Add));
        assert!(!eligible(11, &c).contains(&MutationOp::Add));
        assert!(!eligible(15, &c).contains(&MutationOp::Add));
        c.mutation_set = parse_mutation_set("drop").unwrap();
        assert!(eligible(1, &c).is_empty());
        c.funcs = TransformSet::new(vec![Sin]).unwrap();
        c.mutation_set = parse_mutation_set("replace_transformation").unwrap();
        assert!(eligible(3, &c).is_empty());
    }

    #[test]
    fn replace_interaction_examples() {
        let mut c = cfg();
        c.lb = 2;
        c.ub = 2;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert_eq!(mutate_replace_interaction(&terms(&[(&[1], Id)]), &c, &mut rng)[0].strengths, vec![2]);

        let c = cfg();
        let t = terms(&[(&[2, 1], Sin), (&[1, 1], Log)]);
        for _ in 0..200 {
            let out = mutate_replace_interaction(&t, &c, &mut rng);
            let changed: Vec<usize> = (0..2).filter(|&i| out[i] != t[i]).collect();
            assert!(changed.len() <= 1);
            for i in changed {
                assert_eq!(out[i].func, t[i].func);
                let diffs = out[i].strengths.iter().zip(&t[i].strengths).filter(|(a, b)| a != b).count();
                assert_eq!(diffs, 1);
                assert!(out[i].strengths.iter().any(|&k| k != 0));
            }
        }
    }

    #[test]
    fn interaction_examples() {
        let c = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(interact(&[2, 1], &[-1, 3], 1, &c, &mut rng), vec![1, 4]);
        assert_eq!(interact(&[1, 1], &[1, 0], -1, &c, &mut rng), vec![0, 1]);
        let zeroed = interact(&[2, 1], &[2, 1], -1, &c, &mut rng);
        assert_eq!(zeroed.iter().filter(|&&k| k != 0).count(), 1);
        assert_eq!(interact(&[6, -7], &[5, -3], 1, &c, &mut rng), vec![8, -8]);

        let t = terms(&[(&[2, 1], Sin), (&[-1, 3], Log)]);
        for _ in 0..100 {
            let out = mutate_interact(&t, 1, &c, &mut rng);
            assert!(
                out == terms(&[(&[1, 4], Sin), (&[-1, 3], Log)]) || out == terms(&[(&[2, 1], Sin), (&[1, 4], Log)])
            );
        }
        let single = mutate_interact(&terms(&[(&[1, 2], Cos)]), 1, &c, &mut rng);
        assert_eq!(single, terms(&[(&[2, 4], Cos)]));
    }

    #[test]
    fn replace_transform_examples() {
        let mut c = cfg();
        c.funcs = TransformSet::new(vec![Sin, Log]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let out = mutate_replace_transform(&terms(&[(&[1, 2], Sin)]), &c, &mut rng);
        assert_eq!(out, terms(&[(&[1, 2], Log)]));

        let c = cfg();
        let t = terms(&[(&[2, 1], Sin), (&[-1, 3], Log)]);
        let mut seen_cos = false;
        for _ in 0..500 {
            let out = mutate_replace_transform(&t, &c, &mut rng);
            assert!(out.iter().zip(&t).all(|(a, b)| a.strengths == b.strengths));
            seen_cos |= out[0].func == Cos && out[1].func == Log;
        }
        assert!(seen_cos);
    }

    #[test]
    fn operator_choice_uniform_over_eligible() {
        let c = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut counts = [0usize; 6];
        for _ in 0..10_000 {
            let op = choose_op(1, &c, &mut rng).unwrap();
            counts[MutationOp::ALL.iter().position(|&o| o == op).unwrap()] += 1;
        }
        assert_eq!(counts[0], 0);
        // 4 degrees of freedom; 18.47 is the 0.001 upper quantile.
        assert!(chi_square(&counts[1..]) < 18.47, "{counts:?}");
    }

    #[test]
    fn mutate_returns_fitted() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![0.5 + i as f64 * 0.1, 1.0 + i as f64 * 0.05]).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0] * r[1]).collect();
        let eval = Evaluator::new(&rows, &y, FitConfig::ols());
        let c = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut ind = random_individual(2, &c, &eval, &mut rng);
        for _ in 0..200 {
            let (next, _) = mutate(&ind, &c, &eval, &mut rng).unwrap();
            assert_eq!(next.weights.len(), next.terms.len());
            assert!(!next.fitness.is_nan());
            assert!((1..=c.max_add + 1).contains(&next.len()));
            ind = next;
        }

        let mut only_drop = cfg();
        only_drop.mutation_set = parse_mutation_set("drop").unwrap();
        let one = eval.fit(terms(&[(&[1, 1], Id)]));
        assert_eq!(mutate(&one, &only_drop, &eval, &mut rng).unwrap_err(), NoEligibleMutation { len: 1 });
    }
}
