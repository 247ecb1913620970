use proptest::prelude::*;

use itea::expr::{Individual, Term};
use itea::transforms::{apply, TransformId};

const FUNCS: [TransformId; 7] = [
    TransformId::Id,
    TransformId::Sin,
    TransformId::Cos,
    TransformId::Tanh,
    TransformId::SqrtAbs,
    TransformId::Log,
    TransformId::Exp,
];

fn fitted(terms: Vec<Term>, weights: Vec<f64>, intercept: f64) -> Individual {
    Individual { terms, weights, intercept, fitness: 0.0 }
}

proptest! {
    #[test]
    fn permuting_variables_and_strengths_together_preserves_predictions(
        k in prop::collection::vec(-3i32..=3, 3),
        f in 0usize..7,
        w in -5.0f64..5.0,
        x in prop::collection::vec(0.5f64..2.0, 3),
    ) {
        let perm = [2usize, 0, 1];
        let ind = fitted(vec![Term::new(k.clone(), FUNCS[f])], vec![w], 1.0);
        let permuted = fitted(vec![Term::new(perm.iter().map(|&p| k[p]).collect(), FUNCS[f])], vec![w], 1.0);
        let px: Vec<f64> = perm.iter().map(|&p| x[p]).collect();
        let a = ind.predict_row(&x, true).unwrap();
        let b = permuted.predict_row(&px, true).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn zero_strengths_evaluate_the_transform_at_one(
        f in 0usize..7,
        x in prop::collection::vec(-10.0f64..10.0, 4),
    ) {
        let t = Term::new(vec![0; 4], FUNCS[f]);
        prop_assert_eq!(t.eval(&x).unwrap(), apply(FUNCS[f], 1.0).unwrap());
    }
}
