use gaitlab_core::classifiers::mlp::{train_with_history, MlpParams};
use gaitlab_core::classifiers::svm::{smo_solve, PolynomialKernel};
use gaitlab_core::classifiers::tree::Node;
use gaitlab_core::classifiers::{train, ClassifierKind, ClassifierSpec, Mlp, TrainedClassifier, TrainingSet};
use gaitlab_core::eval::{cross_validate, make_folds, CvOptions, FoldMode};
use gaitlab_core::linalg::{argmax, Matrix};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Three unit-variance blobs whose centres sit 10σ apart.
fn blobs(n: usize, dim: usize, seed: u64) -> (Matrix, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centres = [[0.0, 0.0], [10.0, 0.0], [5.0, 8.66]];
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let c = i % 3;
        let row: Vec<f64> = (0..dim)
            .map(|d| centres[c].get(d).copied().unwrap_or(0.0) + rng.sample::<f64, _>(StandardNormal))
            .collect();
        rows.push(row);
        y.push(c);
    }
    (Matrix::from_rows(&rows).unwrap(), y)
}

fn cv_accuracy(kind: ClassifierKind, x: &Matrix, y: &[usize]) -> f64 {
    let plan = make_folds(y, None, 10, FoldMode::Segment, 1).unwrap();
    cross_validate(x, y, 3, &kind.default_spec(), &plan, &CvOptions::default()).unwrap().accuracy
}

#[test]
fn all_six_separate_blobs_and_fail_on_permuted_labels() {
    let (x, y) = blobs(500, 4, 11);
    let mut permuted = y.clone();
    permuted.shuffle(&mut ChaCha8Rng::seed_from_u64(12));
    for kind in ClassifierKind::ALL {
        let acc = cv_accuracy(kind, &x, &y);
        assert!(acc >= 0.99, "{kind}: {acc}");
        let chance = cv_accuracy(kind, &x, &permuted);
        assert!(chance <= 1.0 / 3.0 + 0.10, "{kind} on permuted labels: {chance}");
    }
}

#[test]
fn mlp_backprop_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let base = Mlp::random(5, 4, 3, 0);
    let params: Vec<f64> = base.parameters().iter().map(|_| rng.random_range(-1.0..1.0)).collect();
    let net = base.with_parameters(&params);
    for _ in 0..5 {
        let x: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut target = vec![0.0; 3];
        target[rng.random_range(0..3)] = 1.0;
        let (gh, go) = net.gradient(&x, &target);
        let analytic: Vec<f64> = gh.as_slice().iter().chain(go.as_slice()).copied().collect();
        let h = 1e-6;
        for (i, g) in analytic.iter().enumerate() {
            let mut plus = params.clone();
            let mut minus = params.clone();
            plus[i] += h;
            minus[i] -= h;
            let fd = (net.with_parameters(&plus).loss(&x, &target) - net.with_parameters(&minus).loss(&x, &target))
                / (2.0 * h);
            let rel = (g - fd).abs() / g.abs().max(fd.abs()).max(1e-7);
            assert!(rel <= 1e-4, "param {i}: backprop {g:e}, finite difference {fd:e}");
        }
    }
}

/// Dense dual QP solved by accelerated projected gradient. The projection
/// onto {0 ≤ α ≤ C, yᵀα = 0} is exact: bisection on the multiplier of the
/// equality constraint.
fn qp_oracle(q: &Matrix, y: &[f64], c: f64) -> Vec<f64> {
    let n = y.len();
    let project = |v: &[f64]| -> Vec<f64> {
        let at = |lam: f64| -> (Vec<f64>, f64) {
            let a: Vec<f64> = v.iter().zip(y).map(|(vi, yi)| (vi - lam * yi).clamp(0.0, c)).collect();
            let s = a.iter().zip(y).map(|(ai, yi)| ai * yi).sum();
            (a, s)
        };
        let bound = v.iter().map(|x| x.abs()).fold(0.0, f64::max) + c + 1.0;
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if at(mid).1 > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(0.5 * (lo + hi)).0
    };
    let lipschitz = q.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt();
    let step = 1.0 / lipschitz;
    let mut alpha = vec![0.0; n];
    let mut z = alpha.clone();
    let mut t = 1.0f64;
    for iter in 0..200_000 {
        let grad: Vec<f64> = (0..n).map(|i| (0..n).map(|j| q[(i, j)] * z[j]).sum::<f64>() - 1.0).collect();
        let next = project(&z.iter().zip(&grad).map(|(zi, gi)| zi - step * gi).collect::<Vec<_>>());
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = next.iter().zip(&alpha).map(|(a1, a0)| a1 + (t - 1.0) / t_next * (a1 - a0)).collect();
        alpha = next;
        if iter % 500 == 0 {
            // Stationarity of the projected gradient step at α itself.
            let g: Vec<f64> = (0..n).map(|i| (0..n).map(|j| q[(i, j)] * alpha[j]).sum::<f64>() - 1.0).collect();
            let p = project(&alpha.iter().zip(&g).map(|(a, gi)| a - step * gi).collect::<Vec<_>>());
            if p.iter().zip(&alpha).all(|(a1, a0)| (a1 - a0).abs() < 1e-13) {
                break;
            }
        }
        t = t_next;
    }
    alpha
}

/// ρ from the free variables, or the midpoint of the feasible interval.
fn rho_of(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let eps = 1e-8;
    let free: Vec<f64> =
        (0..y.len()).filter(|&i| alpha[i] > eps && alpha[i] < c - eps).map(|i| y[i] * grad[i]).collect();
    if !free.is_empty() {
        return free.iter().sum::<f64>() / free.len() as f64;
    }
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..y.len() {
        let yg = y[i] * grad[i];
        let at_upper = alpha[i] >= c - eps;
        if (at_upper && y[i] < 0.0) || (!at_upper && y[i] > 0.0) {
            ub = ub.min(yg);
        } else {
            lb = lb.max(yg);
        }
    }
    0.5 * (ub + lb)
}

fn random_binary_problem(rng: &mut ChaCha8Rng) -> (Matrix, Vec<f64>, f64) {
    let n = rng.random_range(4..=20);
    let d = rng.random_range(1..=3);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let label = if i % 2 == 0 { 1.0 } else { -1.0 };
        let row: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0) + 0.3 * label).collect();
        rows.push(row);
        y.push(label);
    }
    let c = [0.5, 1.0, 10.0][rng.random_range(0..3)];
    (Matrix::from_rows(&rows).unwrap(), y, c)
}

#[test]
fn smo_matches_dense_qp_and_satisfies_kkt() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let kernel = PolynomialKernel { degree: 3 };
    for _ in 0..25 {
        let (x, y, c) = random_binary_problem(&mut rng);
        let n = y.len();
        let k = kernel.gram(&x);
        let mut q = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                q[(i, j)] = y[i] * y[j] * k[(i, j)];
            }
        }
        let tol = 1e-3;
        let sol = smo_solve(&k, &y, c, tol, 10_000_000);
        assert!(sol.converged);

        // Box constraints, equality constraint and the KKT gap.
        assert!(sol.alpha.iter().all(|&a| (0.0..=c).contains(&a)));
        assert!(sol.alpha.iter().zip(&y).map(|(a, yi)| a * yi).sum::<f64>().abs() < 1e-9);
        let grad: Vec<f64> = (0..n).map(|i| (0..n).map(|j| q[(i, j)] * sol.alpha[j]).sum::<f64>() - 1.0).collect();
        let (mut m_up, mut m_low) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..n {
            let v = -y[i] * grad[i];
            let in_up = (y[i] > 0.0 && sol.alpha[i] < c) || (y[i] < 0.0 && sol.alpha[i] > 0.0);
            let in_low = (y[i] > 0.0 && sol.alpha[i] > 0.0) || (y[i] < 0.0 && sol.alpha[i] < c);
            if in_up {
                m_up = m_up.max(v);
            }
            if in_low {
                m_low = m_low.min(v);
            }
        }
        assert!(m_up - m_low < tol, "KKT gap {}", m_up - m_low);

        // The decision function is compared at a tight stopping tolerance: at
        // 1e-3 the dual is only that close to optimal and cubic kernel values
        // on C = 10 problems amplify the residual past 1e-3.
        let sol = smo_solve(&k, &y, c, 1e-7, 10_000_000);
        assert!(sol.converged);
        let oracle = qp_oracle(&q, &y, c);
        let oracle_grad: Vec<f64> = (0..n).map(|i| (0..n).map(|j| q[(i, j)] * oracle[j]).sum::<f64>() - 1.0).collect();
        let oracle_rho = rho_of(&oracle, &oracle_grad, &y, c);
        for _ in 0..20 {
            let probe: Vec<f64> = (0..x.cols()).map(|_| rng.random_range(-1.5..1.5)).collect();
            let f = |alpha: &[f64], rho: f64| -> f64 {
                (0..n).map(|i| alpha[i] * y[i] * kernel.eval(x.row(i), &probe)).sum::<f64>() - rho
            };
            let (got, want) = (f(&sol.alpha, sol.rho), f(&oracle, oracle_rho));
            assert!((got - want).abs() <= 1e-3, "n={n} C={c}: smo {got}, oracle {want}");
        }
    }
}

#[test]
fn svm_separates_xor() {
    let x = Matrix::from_rows(&[[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]]).unwrap();
    let y = [0, 0, 1, 1];
    let m = train(&ClassifierKind::Svm.default_spec(), &x, &y, 2, 0).unwrap();
    for (i, &label) in y.iter().enumerate() {
        assert_eq!(m.predict(x.row(i)).unwrap(), label);
    }
}

#[test]
fn retraining_is_deterministic() {
    let (x, y) = blobs(90, 3, 5);
    for kind in ClassifierKind::ALL {
        let spec = match kind.default_spec() {
            ClassifierSpec::Mlp { learning_rate, momentum, .. } => {
                ClassifierSpec::Mlp { learning_rate, momentum, epochs: 20, hidden_units: None }
            }
            other => other,
        };
        let a = train(&spec, &x, &y, 3, 42).unwrap();
        let b = train(&spec, &x, &y, 3, 42).unwrap();
        assert_eq!(a, b, "{kind}");
        for i in 0..x.rows() {
            assert_eq!(a.predict_scores(x.row(i)).unwrap(), b.predict_scores(x.row(i)).unwrap());
        }
        if matches!(kind, ClassifierKind::Mlp | ClassifierKind::RandomForest) {
            assert_ne!(a, train(&spec, &x, &y, 3, 43).unwrap(), "{kind} ignores its seed");
        }
    }
}

#[test]
fn j48_single_threshold_is_a_stump() {
    let xs = [-3.0, -2.5, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0];
    let x = Matrix::from_rows(&xs.iter().map(|v| [*v]).collect::<Vec<_>>()).unwrap();
    let y: Vec<usize> = xs.iter().map(|&v| usize::from(v >= 0.0)).collect();
    let model = train(&ClassifierKind::J48.default_spec(), &x, &y, 2, 0).unwrap();
    let TrainedClassifier::J48(tree) = &model else { unreachable!() };
    assert_eq!(tree.root.depth(), 1);
    for (i, &label) in y.iter().enumerate() {
        assert_eq!(model.predict(x.row(i)).unwrap(), label);
    }
}

fn check_splits_have_gain(node: &Node) {
    node.for_each_split(&mut |counts: &[f64], left: &[f64], right: &[f64]| {
        let h = |c: &[f64]| {
            let n: f64 = c.iter().sum();
            c.iter().filter(|&&v| v > 0.0).map(|&v| -(v / n) * (v / n).log2()).sum::<f64>()
        };
        let n: f64 = counts.iter().sum();
        let (nl, nr): (f64, f64) = (left.iter().sum(), right.iter().sum());
        let gain = h(counts) - nl / n * h(left) - nr / n * h(right);
        assert!(gain > 1e-12, "split with gain {gain}");
    });
}

#[test]
fn trees_never_split_on_zero_gain_and_leaves_take_the_majority() {
    let (x, y) = blobs(150, 3, 8);
    let mut noisy = y.clone();
    noisy.shuffle(&mut ChaCha8Rng::seed_from_u64(9));
    for labels in [&y, &noisy] {
        match train(&ClassifierKind::J48.default_spec(), &x, labels, 3, 0).unwrap() {
            TrainedClassifier::J48(t) => {
                check_splits_have_gain(&t.root);
                check_leaves_take_the_majority(&t.root);
            }
            _ => unreachable!(),
        }
        match train(&ClassifierSpec::RandomForest { trees: 10, features_per_split: None }, &x, labels, 3, 0).unwrap() {
            TrainedClassifier::RandomForest(f) => {
                for t in &f.trees {
                    check_splits_have_gain(t);
                    check_leaves_take_the_majority(t);
                }
            }
            _ => unreachable!(),
        }
    }
}

fn argmax_counts(counts: &[usize]) -> usize {
    argmax(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>())
}

fn check_leaves_take_the_majority(node: &Node) {
    match node {
        Node::Leaf { class, counts } => assert_eq!(*class, argmax(counts)),
        Node::Split { left, right, .. } => {
            check_leaves_take_the_majority(left);
            check_leaves_take_the_majority(right);
        }
    }
}

#[test]
fn knn_examples() {
    let x = Matrix::from_rows(&[[0.0], [0.1], [0.3], [5.0], [6.0], [7.0]]).unwrap();
    let y = [1, 0, 0, 1, 1, 1];
    let k1 = train(&ClassifierSpec::Knn { k: 1 }, &x, &y, 2, 0).unwrap();
    for (row, &label) in x.iter_rows().zip(&y) {
        assert_eq!(k1.predict(row).unwrap(), label);
    }
    // Neighbours of 0.12 are 0.1 (B), 0.0 (A), 0.3 (B).
    let k3 = train(&ClassifierSpec::Knn { k: 3 }, &x, &[1, 0, 0, 1, 1, 1], 2, 0).unwrap();
    assert_eq!(k3.predict(&[0.12]).unwrap(), 0);
    let flipped = train(&ClassifierSpec::Knn { k: 3 }, &x, &[0, 1, 1, 0, 0, 0], 2, 0).unwrap();
    assert_eq!(flipped.predict(&[0.12]).unwrap(), 1);
}

#[test]
fn forest_follows_the_tree_majority() {
    let (x, y) = blobs(120, 2, 13);
    let model = train(&ClassifierSpec::RandomForest { trees: 15, features_per_split: None }, &x, &y, 3, 4).unwrap();
    let TrainedClassifier::RandomForest(f) = &model else { unreachable!() };
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..50 {
        let p = [rng.random_range(-3.0..13.0), rng.random_range(-3.0..11.0)];
        let mut votes = [0usize; 3];
        for t in &f.trees {
            votes[t.predict(&p)] += 1;
        }
        let best = votes.iter().max().unwrap();
        if votes.iter().filter(|&&v| v == *best).count() == 1 {
            assert_eq!(model.predict(&p).unwrap(), argmax_counts(&votes));
        }
    }
}

#[test]
fn logistic_predicts_the_most_probable_class() {
    let (x, y) = blobs(90, 2, 15);
    let m = train(&ClassifierKind::Logistic.default_spec(), &x, &y, 3, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..30 {
        let p = [rng.random_range(-3.0..13.0), rng.random_range(-3.0..11.0)];
        let scores = m.predict_scores(&p).unwrap();
        assert!(scores.iter().all(|s| s.is_finite() && (0.0..=1.0).contains(s)));
        assert_eq!(m.predict(&p).unwrap(), argmax(&scores));
    }
}

#[test]
fn mlp_loss_does_not_rise_early_on_separable_data() {
    let (x, y) = blobs(150, 2, 17);
    let params = MlpParams { learning_rate: 0.3, momentum: 0.2, epochs: 10, hidden_units: None };
    // Standardize so the sigmoid units start in their linear range.
    let s = gaitlab_core::features::Standardization::fit(&x).unwrap();
    let z = s.apply(&x).unwrap();
    let data_z = TrainingSet::new(&z, &y, 3).unwrap();
    let (_, history) = train_with_history(&data_z, &params, 1);
    for pair in history.windows(2) {
        assert!(pair[1] <= pair[0], "{history:?}");
    }
}

#[test]
fn invalid_training_data_is_rejected() {
    let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [3.0]]).unwrap();
    for kind in ClassifierKind::ALL {
        assert!(train(&kind.default_spec(), &x, &[1, 1, 1, 1], 2, 0).is_err());
        let mut bad = x.clone();
        bad[(1, 0)] = f64::INFINITY;
        assert!(train(&kind.default_spec(), &bad, &[0, 1, 0, 1], 2, 0).is_err());
    }
}
