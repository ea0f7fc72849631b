use neim_core::mlp::{train, Mlp, MlpConfig, WeightedDataset};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn central_difference(net: &Mlp<f64>, data: &WeightedDataset<f64>, h: f64) -> Vec<f64> {
    let n = net.num_params();
    (0..n)
        .map(|k| {
            let mut plus = net.clone();
            *plus.params_mut().nth(k).unwrap() += h;
            let mut minus = net.clone();
            *minus.params_mut().nth(k).unwrap() -= h;
            (plus.loss(data).unwrap() - minus.loss(data).unwrap()) / (2.0 * h)
        })
        .collect()
}

fn random_dataset(rng: &mut ChaCha8Rng, dim: usize, count: usize) -> WeightedDataset<f64> {
    let inputs = (0..count).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let targets = (0..count).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let weights = (0..count).map(|_| rng.gen_range(0.1..2.0)).collect();
    WeightedDataset::new(inputs, targets, weights).unwrap()
}

fn max_relative_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-6))
        .fold(0.0, f64::max)
}

#[test]
fn backprop_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 25 {
        let dim = rng.gen_range(1..=3);
        let depth = rng.gen_range(1..=2);
        let hidden: Vec<usize> = (0..depth).map(|_| rng.gen_range(1..=4)).collect();
        let cfg = MlpConfig::<f64>::new(dim, &hidden, 1, rng.gen());
        let net = Mlp::init(&cfg).unwrap();
        if net.num_params() > 50 {
            continue;
        }
        let data = random_dataset(&mut rng, dim, 4);
        let (_, grads) = net.loss_and_grad(&data).unwrap();
        let analytic: Vec<f64> = grads.params().copied().collect();
        let numeric = central_difference(&net, &data, 1e-6);
        let gap = max_relative_gap(&analytic, &numeric);
        assert!(gap <= 1e-4, "sizes {:?}: relative gap {gap:e}", net.layer_sizes());
        checked += 1;
    }
}

#[test]
fn fits_five_points_of_a_smooth_map() {
    let xs = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let inputs: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
    let targets: Vec<Vec<f64>> = xs.iter().map(|&x: &f64| vec![0.5 * (2.0 * x).sin()]).collect();
    let data = WeightedDataset::new(inputs, targets, vec![1.0; 5]).unwrap();
    let cfg = MlpConfig::new(1, &[10], 20000, 3);
    let out = train(&Mlp::init(&cfg).unwrap(), &data, &cfg).unwrap();
    assert!(out.final_loss < 1e-4, "final loss {:e}", out.final_loss);
    assert_eq!(out.loss_history.len(), 20000);
    assert!(out.loss_history.iter().all(|l| l.is_finite()));
}

#[test]
fn training_is_deterministic_per_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let data = random_dataset(&mut rng, 2, 6);
    let cfg = MlpConfig::new(2, &[3], 200, 9);
    let a = train(&Mlp::init(&cfg).unwrap(), &data, &cfg).unwrap();
    let b = train(&Mlp::init(&cfg).unwrap(), &data, &cfg).unwrap();
    assert_eq!(a.net, b.net);
    assert_eq!(a.loss_history, b.loss_history);
}

#[test]
fn single_precision_network_trains() {
    let data = WeightedDataset::<f32>::new(vec![vec![0.0], vec![1.0]], vec![vec![0.5], vec![-0.5]], vec![1.0, 1.0]).unwrap();
    let cfg = MlpConfig::<f32>::new(1, &[4], 2000, 1);
    let out = train(&Mlp::init(&cfg).unwrap(), &data, &cfg).unwrap();
    assert!(out.final_loss < out.loss_history[0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gradient_is_consistent_for_random_nets(seed in any::<u64>(), dim in 1usize..3, width in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = MlpConfig::<f64>::new(dim, &[width], 1, seed);
        let net = Mlp::init(&cfg).unwrap();
        let data = random_dataset(&mut rng, dim, 3);
        let (loss, grads) = net.loss_and_grad(&data).unwrap();
        prop_assert!((loss - net.loss(&data).unwrap()).abs() <= 1e-12 * loss.max(1.0));
        let analytic: Vec<f64> = grads.params().copied().collect();
        prop_assert!(max_relative_gap(&analytic, &central_difference(&net, &data, 1e-6)) <= 1e-4);
    }

    #[test]
    fn loss_is_nonnegative_and_zero_weight_samples_are_ignored(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = MlpConfig::<f64>::new(2, &[3], 1, seed);
        let net = Mlp::init(&cfg).unwrap();
        let data = random_dataset(&mut rng, 2, 3);
        let loss = net.loss(&data).unwrap();
        prop_assert!(loss >= 0.0);
        let mut inputs = vec![vec![0.0; 2]; 3];
        let mut targets = vec![vec![0.0; 2]; 3];
        let mut weights = vec![0.0; 3];
        inputs[0] = vec![0.3, -0.2];
        targets[0] = vec![1.0, 1.0];
        weights[0] = 1.0;
        let single = WeightedDataset::new(vec![inputs[0].clone()], vec![targets[0].clone()], vec![1.0]).unwrap();
        let padded = WeightedDataset::new(inputs, targets, weights).unwrap();
        prop_assert_eq!(net.loss(&single).unwrap(), net.loss(&padded).unwrap());
    }
}
