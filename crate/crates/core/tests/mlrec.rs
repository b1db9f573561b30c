use rand::seq::SliceRandom;
use tensorforge::field::{Field, PrimeField};
use tensorforge::mlrec::{delta_rank, reconstruct_ml_lowrank, MlConfig};
use tensorforge::oracle::BlackBoxOracle;
use tensorforge::poly::{CircuitKind, DepthThreeCircuit, LinearForm, MulGate};
use tensorforge::rng::from_seed;

fn form(f: &PrimeField, n: usize, vars: &[usize], rng: &mut impl rand::Rng) -> LinearForm<u64> {
    let mut l = LinearForm::constant_form(f, n, f.random(rng));
    for &v in vars {
        l.coeffs[v] = f.random_nonzero(rng);
    }
    l
}

#[test]
fn two_gate_plants_are_learned() {
    let f = PrimeField::default();
    let mut rng = from_seed(31);
    let n = 10;
    for _ in 0..5 {
        let gates: Vec<MulGate<u64>> = (0..2)
            .map(|_| {
                let mut vars: Vec<usize> = (0..n).collect();
                vars.shuffle(&mut rng);
                MulGate { forms: vars[..6].chunks(2).map(|c| form(&f, n, c, &mut rng)).collect() }
            })
            .collect();
        let c = DepthThreeCircuit::from_mul_gates(n, CircuitKind::Multilinear, gates);
        let got = reconstruct_ml_lowrank(&BlackBoxOracle::from_circuit(f, c.clone()), 2, &MlConfig::default(), &mut rng).unwrap();
        assert!(got.fan_in() <= 2);
        assert!(got.is_multilinear(&f));
        for _ in 0..10 {
            let x = f.random_vec(n, &mut rng);
            assert_eq!(got.eval(&f, &x), c.eval(&f, &x));
        }
    }
}

#[test]
fn distance_of_gate_to_itself() {
    let f = PrimeField::new(101).unwrap();
    let mut rng = from_seed(32);
    let g = MulGate { forms: vec![form(&f, 4, &[0, 1], &mut rng), form(&f, 4, &[2], &mut rng)] };
    assert_eq!(delta_rank(&f, &[g.clone()], &[g]), 0);
}
