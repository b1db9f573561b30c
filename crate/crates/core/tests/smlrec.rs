use rand::Rng;
use tensorforge::field::{Field, PrimeField};
use tensorforge::linalg::{rank, Matrix};
use tensorforge::poly::Tensor;
use tensorforge::rng::from_seed;
use tensorforge::smlrec::{tensor_rank, SmlConfig};

fn random_factors(f: &PrimeField, shape: &[usize], k: usize, rng: &mut impl Rng) -> Vec<Vec<Vec<u64>>> {
    (0..k).map(|_| shape.iter().map(|&w| f.random_vec(w, rng)).collect()).collect()
}

#[test]
fn matrix_rank_matches_elimination() {
    let f = PrimeField::new(10007).unwrap();
    let mut rng = from_seed(21);
    for _ in 0..8 {
        let (a, b) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let k = rng.gen_range(1..=3);
        let t = Tensor::rank_one_sum(vec![a, b], random_factors(&f, &[a, b], k, &mut rng));
        let m = Matrix::from_rows((0..a).map(|i| (0..b).map(|j| t.entry(&f, &[i, j])).collect()).collect()).unwrap();
        let want = rank(&f, &m);
        if want == 0 {
            continue;
        }
        let got = tensor_rank(&f, &t, 4, &SmlConfig::default(), &mut rng).unwrap();
        assert_eq!(got.rank, want);
    }
}

#[test]
fn planted_three_way_tensor() {
    let f = PrimeField::default();
    let mut rng = from_seed(22);
    let shape = [3, 3, 3];
    let t = Tensor::rank_one_sum(shape.to_vec(), random_factors(&f, &shape, 2, &mut rng));
    let r = tensor_rank(&f, &t, 3, &SmlConfig::default(), &mut rng).unwrap();
    assert_eq!(r.rank, 2);
    let back = r.decomposition.to_tensor(shape.to_vec());
    assert!(back.equals(&f, &t).unwrap());
}
