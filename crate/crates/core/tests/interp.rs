use rand::seq::index::sample;
use rand::Rng;
use tensorforge::field::{Field, PrimeField};
use tensorforge::interp::{berlekamp_welch, sparse_interpolate, SparseConfig};
use tensorforge::oracle::BlackBoxOracle;
use tensorforge::poly::SparsePoly;
use tensorforge::rng::from_seed;
use tensorforge::upoly;

#[test]
fn welch_corrects_planted_errors() {
    let f = PrimeField::new(10007).unwrap();
    let mut rng = from_seed(3);
    for _ in 0..40 {
        let d = rng.gen_range(0..6);
        let e = rng.gen_range(0..4);
        let m = d + 2 * e + 2 + rng.gen_range(0..3);
        let p = f.random_vec(d + 1, &mut rng);
        let xs: Vec<u64> = (1..=m as u64).collect();
        let mut ys: Vec<u64> = xs.iter().map(|x| upoly::eval(&f, &p, x)).collect();
        for i in sample(&mut rng, m, e) {
            ys[i] = f.add(&ys[i], &f.random_nonzero(&mut rng));
        }
        let q = berlekamp_welch(&f, &xs, &ys, d, e).unwrap();
        for x in 0..30u64 {
            assert_eq!(upoly::eval(&f, &q, &x), upoly::eval(&f, &p, &x));
        }
    }
}

#[test]
fn sparse_recovers_random_polynomials() {
    let f = PrimeField::default();
    let mut rng = from_seed(4);
    for _ in 0..5 {
        let n = 5;
        let terms = (0..6).map(|_| ((0..n).map(|_| rng.gen_range(0..3u32)).collect::<Vec<_>>(), f.random_nonzero(&mut rng))).collect();
        let p = SparsePoly::from_terms(&f, n, terms);
        let o = BlackBoxOracle::from_poly(f, p.clone());
        let q = sparse_interpolate(&o, 2 * n, 6, &SparseConfig::default(), &mut rng).unwrap();
        assert_eq!(q, p);
    }
}
