use super::*;
use approx::assert_abs_diff_eq;

fn gauss() -> Family<f64> {
    Family::gaussian(1.0).unwrap()
}

fn grid2(f: impl Fn(f64, f64) -> f64, lo: f64, hi: f64, step: f64) -> f64 {
    let n = ((hi - lo) / step).round() as usize;
    let mut best = f64::INFINITY;
    for a in 0..=n {
        for b in 0..=n {
            best = best.min(f(lo + a as f64 * step, lo + b as f64 * step));
        }
    }
    best
}

#[test]
fn unconstrained_two_arms() {
    let s = Structure::unconstrained(2).unwrap();
    let r = s.alt_min(&gauss(), &[1.0, 0.0], &[1.0, 1.0], 0, 1).unwrap();
    assert_eq!(r.lambda, vec![0.5, 0.5]);
    assert_abs_diff_eq!(r.value, 0.25, epsilon = 1e-15);
    let oracle = grid2(
        |a, b| if b >= a { 0.5 * (1.0 - a).powi(2) + 0.5 * b * b } else { f64::INFINITY },
        -1.0,
        2.0,
        1e-3,
    );
    assert_abs_diff_eq!(r.value, oracle, epsilon = 1e-6);
}

#[test]
fn best_response_three_arms() {
    let s = Structure::unconstrained(3).unwrap();
    let (r, k) = s.best_response_neg(&gauss(), &[1.0, 0.5, 0.0], &[1.0; 3], 0).unwrap();
    assert_eq!(k, 1);
    assert_eq!(r.lambda, vec![0.75, 0.75, 0.0]);
    // Per-cell closed form w_j w_k (mu_j - mu_k)^2 / (2 (w_j + w_k)).
    assert_abs_diff_eq!(r.value, 0.0625, epsilon = 1e-15);
    let c2 = s.alt_min(&gauss(), &[1.0, 0.5, 0.0], &[1.0; 3], 0, 2).unwrap();
    assert_abs_diff_eq!(c2.value, 0.25, epsilon = 1e-15);
}

#[test]
fn equal_arms_are_already_alternative() {
    for kind in [StructureKind::Unconstrained, StructureKind::Unimodal, StructureKind::Lipschitz { l: 1.0 }] {
        let s = Structure::new(kind, 2).unwrap();
        let (r, _) = s.best_response_neg(&gauss(), &[0.3, 0.3], &[2.0, 5.0], 0).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-12);
    }
}

#[test]
fn single_arm_has_empty_alternative() {
    let s = Structure::unconstrained(1).unwrap();
    assert_eq!(
        s.best_response_neg(&gauss(), &[0.3], &[1.0], 0).unwrap_err(),
        BanditError::AllCellsInfeasible { j: 0 }
    );
}

#[test]
fn linear_one_dimensional_example() {
    let s = Structure::new(StructureKind::Linear { arms: vec![vec![1.0], vec![2.0]] }, 2).unwrap();
    let (r, k) = s.best_response_neg(&gauss(), &[1.0, 2.0], &[1.0, 1.0], 1).unwrap();
    assert_eq!(k, 0);
    // Oracle: 1-d grid over eta with eta <= 0 forced by lambda^1 >= lambda^2.
    let mut oracle = f64::INFINITY;
    for i in 0..=400_000 {
        let eta = -2.0 + i as f64 * 1e-5;
        if eta >= 2.0 * eta {
            oracle = oracle.min(0.5 * (1.0 - eta).powi(2) + 0.5 * (2.0 - 2.0 * eta).powi(2));
        }
    }
    assert_abs_diff_eq!(r.value, oracle, epsilon = 1e-6);
    assert_abs_diff_eq!(r.value, 2.5, epsilon = 1e-12);
}

#[test]
fn linear_rejects_bernoulli() {
    let s = Structure::new(StructureKind::Linear { arms: vec![vec![1.0], vec![2.0]] }, 2).unwrap();
    assert!(s.alt_min(&Family::Bernoulli, &[0.2, 0.4], &[1.0, 1.0], 1, 0).is_err());
}

#[test]
fn membership_examples() {
    let uni = Structure::<f64>::new(StructureKind::Unimodal, 3).unwrap();
    assert!(uni.membership(&[0.0, 1.0, 0.0], 0.0));
    assert!(!uni.membership(&[1.0, 0.0, 1.0], 0.0));
    let sp = Structure::new(StructureKind::Sparse { s: 1, gamma: 0.3 }, 3).unwrap();
    assert!(sp.membership(&[0.8, 0.3, 0.3], 0.0));
    assert!(!sp.membership(&[0.8, 0.4, 0.3], 0.0));
    assert!(!sp.membership(&[0.8, 0.2, 0.3], 0.0));
    let cat = Structure::new(StructureKind::Categorised { categories: vec![0, 1, 1, 1] }, 4).unwrap();
    assert!(cat.membership(&[2.0, 1.0, 0.96, 0.0], 0.0));
    assert!(cat.membership(&[0.5, 1.0, 0.96, 0.6], 0.0));
    assert!(!cat.membership(&[0.7, 1.0, 0.96, 0.6], 0.0));
    let lip = Structure::new(StructureKind::Lipschitz { l: 0.5 }, 3).unwrap();
    assert!(lip.membership(&[0.0, 0.5, 0.2], 0.0));
    assert!(!lip.membership(&[0.0, 0.7, 0.2], 0.0));
    let lin = Structure::new(StructureKind::Linear { arms: vec![vec![1.0], vec![2.0], vec![3.0]] }, 3).unwrap();
    assert!(lin.membership(&[0.5, 1.0, 1.5], 1e-12));
    assert!(!lin.membership(&[0.5, 1.0, 1.7], 1e-3));
}

#[test]
fn construction_errors() {
    assert!(Structure::<f64>::new(StructureKind::Sparse { s: 0, gamma: 0.0 }, 3).is_err());
    assert!(Structure::<f64>::new(StructureKind::Sparse { s: 4, gamma: 0.0 }, 3).is_err());
    assert!(Structure::<f64>::new(StructureKind::Lipschitz { l: 0.0 }, 3).is_err());
    assert!(Structure::<f64>::new(StructureKind::Categorised { categories: vec![0, 2] }, 2).is_err());
    assert!(Structure::<f64>::new(StructureKind::Linear { arms: vec![vec![1.0, 0.0], vec![0.0]] }, 2).is_err());
    assert!(Structure::unconstrained(2).unwrap().with_bounds(1.0, 0.0).is_err());
}

#[test]
fn alt_min_argument_errors() {
    let s = Structure::unconstrained(3).unwrap();
    let g = gauss();
    assert!(matches!(
        s.alt_min(&g, &[0.0, 1.0], &[1.0; 3], 0, 1),
        Err(BanditError::DimensionMismatch { .. })
    ));
    assert!(s.alt_min(&g, &[0.0, 1.0, 0.5], &[1.0; 3], 1, 1).is_err());
    assert!(s.alt_min(&g, &[0.0, 1.0, 0.5], &[1.0, -1.0, 1.0], 1, 0).is_err());
    assert!(s.alt_min(&Family::Bernoulli, &[0.0, 1.5, 0.5], &[1.0; 3], 1, 0).is_err());
}

#[test]
fn default_boxes() {
    let s = Structure::unconstrained(2).unwrap();
    assert_eq!(s.box_for(&gauss(), &[0.0, 1.0]), (-5.0, 6.0));
    assert_eq!(s.box_for(&Family::Bernoulli, &[0.2, 0.4]), (1e-6, 1.0 - 1e-6));
    let s = s.with_bounds(-1.0, 2.0).unwrap();
    assert_eq!(s.box_for(&gauss(), &[0.0, 1.0]), (-1.0, 2.0));
}

#[test]
fn sparse_cases() {
    let s = Structure::new(StructureKind::Sparse { s: 1, gamma: 0.3 }, 3).unwrap();
    let mu = [0.8, 0.3, 0.3];
    // Challenger 2 must rise to the best arm's level or the best arm must fall to gamma.
    let r = s.alt_min(&gauss(), &mu, &[1.0, 1.0, 1.0], 0, 1).unwrap();
    // Either way arm 0 drops to gamma: 0.5^2 / 2.
    assert_abs_diff_eq!(r.value, 0.125, epsilon = 1e-12);
    assert!(s.membership(&r.lambda, 1e-12));
    // With s = 1 the pair cannot both leave gamma, so weight does not help arm 0.
    let r = s.alt_min(&gauss(), &mu, &[100.0, 1.0, 1.0], 0, 1).unwrap();
    assert_abs_diff_eq!(r.value, 100.0 * 0.125, epsilon = 1e-12);

    let s2 = Structure::new(StructureKind::Sparse { s: 2, gamma: 0.0 }, 4).unwrap();
    let mu = [3.0, 2.0, 0.0, 0.0];
    let r = s2.alt_min(&gauss(), &mu, &[1.0; 4], 0, 1).unwrap();
    assert_eq!(r.lambda, vec![2.5, 2.5, 0.0, 0.0]);
}

#[test]
fn categorised_cross_and_same_category() {
    let s = Structure::new(StructureKind::Categorised { categories: vec![0, 1, 1, 1] }, 4).unwrap();
    let mu = [2.0, 1.0, 0.96, 0.0];
    let g = gauss();
    for k in 1..4 {
        let r = s.alt_min(&g, &mu, &[1.0; 4], 0, k).unwrap();
        assert!(s.membership(&r.lambda, 1e-9));
        assert!(r.lambda[k] >= r.lambda[0] - 1e-12);
        // Oracle: scan the level in both orientations.
        let mut oracle = f64::INFINITY;
        for i in 0..=20_000 {
            let l = i as f64 * 1e-4;
            let sq = |x: f64| 0.5 * x * x;
            // category 1 on top: arm 0 at most l, every other arm at least l.
            let flipped = sq((2.0 - l).max(0.0)) + mu[1..].iter().map(|&m| sq((l - m).max(0.0))).sum::<f64>();
            // category 0 on top: arms 0 and k meet at l, the rest stay at most l.
            let forced = sq(2.0 - l)
                + sq(l - mu[k])
                + (1..4).filter(|&i| i != k).map(|i| sq((mu[i] - l).max(0.0))).sum::<f64>();
            oracle = oracle.min(flipped).min(forced);
        }
        assert_abs_diff_eq!(r.value, oracle, epsilon = 1e-6);
    }
}

#[test]
fn categorised_same_category_pair_is_pooled() {
    let s = Structure::new(StructureKind::Categorised { categories: vec![0, 0, 1] }, 3).unwrap();
    let r = s.alt_min(&gauss(), &[2.0, 1.0, 0.0], &[1.0; 3], 0, 1).unwrap();
    assert_eq!(r.lambda, vec![1.5, 1.5, 0.0]);
    assert_abs_diff_eq!(r.value, 0.25, epsilon = 1e-15);
}

#[test]
fn unimodal_example_matches_pooled_solution() {
    let s = Structure::<f64>::new(StructureKind::Unimodal, 5).unwrap();
    let mu = [0.2, 0.4, 0.9, 0.7, 0.1];
    let r = s.alt_min(&gauss(), &mu, &[1.0; 5], 2, 3).unwrap();
    // Arms 3 and 4 (1-based) pool at 0.8 with a peak at either.
    assert_abs_diff_eq!(r.lambda[2], 0.8, epsilon = 1e-12);
    assert_abs_diff_eq!(r.lambda[3], 0.8, epsilon = 1e-12);
    assert_abs_diff_eq!(r.value, 0.01, epsilon = 1e-12);
    assert!(s.membership(&r.lambda, 1e-12));
}

#[test]
fn unimodal_far_challenger() {
    let s = Structure::<f64>::new(StructureKind::Unimodal, 5).unwrap();
    let mu = [0.2, 0.4, 0.9, 0.7, 0.1];
    let r = s.alt_min(&gauss(), &mu, &[1.0; 5], 2, 0).unwrap();
    assert!(s.membership(&r.lambda, 1e-12));
    assert!(r.lambda[0] >= r.lambda[2] - 1e-12);
    // Raising arm 1 to the peak forces arm 2 up to it as well.
    assert_abs_diff_eq!(r.lambda[0], r.lambda[1], epsilon = 1e-12);
    assert_abs_diff_eq!(r.lambda[1], r.lambda[2], epsilon = 1e-12);
}

#[test]
fn lipschitz_gaussian_is_projection() {
    let s = Structure::new(StructureKind::Lipschitz { l: 0.3 }, 3).unwrap();
    let r = s.alt_min(&gauss(), &[1.0, 0.8, 0.5], &[1.0; 3], 0, 1).unwrap();
    assert!(s.membership(&r.lambda, 1e-9));
    assert!(r.lambda[1] >= r.lambda[0] - 1e-9);
    // Pooling arms 1 and 2 at 0.9 would break the constraint towards arm 3, so
    // all three move: a = b + 0.3 with a = 13/15.
    assert_abs_diff_eq!(r.lambda[0], 13.0 / 15.0, epsilon = 1e-9);
    assert_abs_diff_eq!(r.lambda[1], 13.0 / 15.0, epsilon = 1e-9);
    assert_abs_diff_eq!(r.lambda[2], 13.0 / 15.0 - 0.3, epsilon = 1e-9);
}

#[test]
fn lipschitz_bernoulli_converges() {
    let s = Structure::new(StructureKind::Lipschitz { l: 0.1 }, 4).unwrap();
    let b = Family::Bernoulli;
    let mu = [0.7, 0.65, 0.5, 0.45];
    let w = [10.0, 5.0, 2.0, 1.0];
    let r = s.alt_min(&b, &mu, &w, 0, 2).unwrap();
    assert!(s.membership(&r.lambda, 1e-9));
    assert!(r.lambda[2] >= r.lambda[0] - 1e-9);
    // Local optimality: no feasible random perturbation improves the objective.
    let mut rng = 12345u64;
    for _ in 0..2000 {
        let mut cand = r.lambda.clone();
        for c in cand.iter_mut() {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            *c += ((rng >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 1e-3;
        }
        if s.membership(&cand, 0.0) && cand[2] >= cand[0] {
            assert!(objective(&b, &mu, &w, &cand) >= r.value - 1e-9);
        }
    }
}

#[test]
fn zero_value_at_feasible_points() {
    let g = gauss();
    let mu = [0.2, 0.4, 0.9, 0.7, 0.1];
    let w = [1.0, 2.0, 0.5, 1.0, 3.0];
    let kinds = vec![
        StructureKind::Unconstrained,
        StructureKind::Unimodal,
        StructureKind::Lipschitz { l: 0.6 },
        StructureKind::Categorised { categories: vec![1, 1, 0, 0, 1] },
        StructureKind::Sparse { s: 5, gamma: 0.0 },
    ];
    for kind in kinds {
        let s = Structure::new(kind, 5).unwrap();
        assert!(s.membership(&mu, 1e-12), "{}", s.name());
        let r = s.alt_min(&g, &mu, &w, 0, 2).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-12);
    }
}

#[test]
fn zero_weights_are_neutral() {
    let s = Structure::unconstrained(3).unwrap();
    let r = s.alt_min(&gauss(), &[1.0, 0.0, 0.5], &[0.0, 2.0, 1.0], 0, 1).unwrap();
    assert_eq!(r.lambda, vec![0.0, 0.0, 0.5]);
    assert_eq!(r.value, 0.0);
}

#[test]
fn common_level_exact_root() {
    // Only fixed items: weighted mean.
    let v = common_level(&[(1.0, 1.0), (0.0, 3.0)], &[], &[], -10.0, 10.0);
    assert_abs_diff_eq!(v, 0.25, epsilon = 1e-15);
    // An upper item above the fixed mean gets attached.
    let v = common_level(&[(0.0, 1.0)], &[(1.0, 1.0)], &[], -10.0, 10.0);
    assert_abs_diff_eq!(v, 0.5, epsilon = 1e-15);
    // An upper item below the level stays free.
    let v = common_level(&[(0.0, 1.0)], &[(-1.0, 5.0)], &[], -10.0, 10.0);
    assert_abs_diff_eq!(v, 0.0, epsilon = 1e-15);
    // Lower items above the level stay free.
    let v = common_level(&[(0.0, 1.0)], &[], &[(2.0, 5.0), (-2.0, 1.0)], -10.0, 10.0);
    assert_abs_diff_eq!(v, -1.0, epsilon = 1e-15);
}
