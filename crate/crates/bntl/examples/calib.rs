use bntl::generate::sample_predictive;
use bntl::ingest::split_train_test;
use bntl::types::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let coupled = BntlModel::new(0.75, InterarrivalModel::CoupledPyp { theta: 1.0 }).unwrap();
    for seed in 400..450u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tr = sample_predictive(&coupled, 2000, &mut rng).unwrap();
        let (train, _) = split_train_test(&tr.ends, 0.5).unwrap();
        print!("{}:{} ", seed, train.num_vertices());
    }
    println!();
}
