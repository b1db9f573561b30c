use proptest::prelude::*;
use rand::Rng;
use tensorforge::field::{ExtField, Field, PrimeField};
use tensorforge::interp::interpolate_univariate;
use tensorforge::oracle::BlackBoxOracle;
use tensorforge::pit::{is_zero, PitConfig, Verdict};
use tensorforge::poly::{CircuitKind, DepthThreeCircuit, LinearForm, MulGate};
use tensorforge::rng::from_seed;
use tensorforge::upoly;

fn axioms<F: Field>(f: &F, a: &F::Elem, b: &F::Elem, c: &F::Elem) {
    assert_eq!(f.mul(&f.mul(a, b), c), f.mul(a, &f.mul(b, c)));
    assert_eq!(f.mul(a, &f.add(b, c)), f.add(&f.mul(a, b), &f.mul(a, c)));
    if !f.is_zero(a) {
        assert_eq!(f.mul(a, &f.inv(a).unwrap()), f.one());
    }
}

proptest! {
    #[test]
    fn field_axioms(seed: u64) {
        let mut rng = from_seed(seed);
        let p = PrimeField::default();
        let (a, b, c) = (p.random(&mut rng), p.random(&mut rng), p.random(&mut rng));
        axioms(&p, &a, &b, &c);
        let e = ExtField::with_degree(PrimeField::new(5).unwrap(), 3).unwrap();
        let (a, b, c) = (e.random(&mut rng), e.random(&mut rng), e.random(&mut rng));
        axioms(&e, &a, &b, &c);
        let (x, y) = (rng.gen_range(0..5u64), rng.gen_range(0..5u64));
        let base = e.base();
        prop_assert_eq!(e.embed(base.mul(&x, &y)), e.mul(&e.embed(x), &e.embed(y)));
        prop_assert_eq!(e.embed(base.add(&x, &y)), e.add(&e.embed(x), &e.embed(y)));
    }

    #[test]
    fn interpolation_inverts_evaluation(seed: u64, d in 0usize..12) {
        let f = PrimeField::default();
        let mut rng = from_seed(seed);
        let p = f.random_vec(d + 1, &mut rng);
        let xs: Vec<u64> = (0..=d as u64).map(|i| i * 7 + 3).collect();
        let ys: Vec<u64> = xs.iter().map(|x| upoly::eval(&f, &p, x)).collect();
        let q = interpolate_univariate(&f, &xs, &ys).unwrap();
        for x in 0..20u64 {
            prop_assert_eq!(upoly::eval(&f, &q, &x), upoly::eval(&f, &p, &x));
        }
    }

    #[test]
    fn expansion_and_witnesses(seed: u64) {
        let f = PrimeField::new(1_000_003).unwrap();
        let mut rng = from_seed(seed);
        let n = rng.gen_range(1..5);
        let gates = (0..rng.gen_range(1..4))
            .map(|_| MulGate { forms: (0..rng.gen_range(1..4)).map(|_| LinearForm { coeffs: f.random_vec(n, &mut rng), constant: f.random(&mut rng) }).collect() })
            .collect();
        let c = DepthThreeCircuit::from_mul_gates(n, CircuitKind::General, gates);
        let p = c.to_poly(&f);
        for _ in 0..20 {
            let x = f.random_vec(n, &mut rng);
            prop_assert_eq!(p.eval(&f, &x), c.eval(&f, &x));
        }
        if let Verdict::NonZero(w) = is_zero(&BlackBoxOracle::from_circuit(f, c.clone()), &PitConfig::default(), &mut rng) {
            prop_assert!(!f.is_zero(&c.eval(&f, &w)));
        }
    }
}
