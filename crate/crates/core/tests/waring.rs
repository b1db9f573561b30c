use tensorforge::field::{Field, PrimeField};
use tensorforge::oracle::BlackBoxOracle;
use tensorforge::poly::{CircuitKind, DepthThreeCircuit, Gate, LinearForm, PowerGate};
use tensorforge::rng::from_seed;
use tensorforge::waring::{reconstruct_waring, symmetric_rank, WaringConfig};

fn plant(f: &PrimeField, n: usize, d: usize, k: usize, seed: u64) -> DepthThreeCircuit<u64> {
    let mut rng = from_seed(seed);
    let gates = (0..k).map(|_| Gate::Power(PowerGate { form: LinearForm::homogeneous(f.random_vec(n, &mut rng), 0), power: d })).collect();
    DepthThreeCircuit::new(n, CircuitKind::Power, gates)
}

#[test]
fn recovers_planted_power_sums() {
    let f = PrimeField::default();
    let mut rng = from_seed(11);
    for (s, (n, d, k)) in [(3, 4, 2), (5, 3, 3), (4, 6, 2), (2, 5, 1)].into_iter().enumerate() {
        let c = plant(&f, n, d, k, s as u64);
        let o = BlackBoxOracle::from_circuit(f, c.clone());
        let dec = reconstruct_waring(&o, d, k, &WaringConfig::default(), &mut rng).unwrap();
        assert!(dec.fan_in() <= k);
        let got = dec.to_circuit();
        for _ in 0..10 {
            let x = f.random_vec(n, &mut rng);
            assert_eq!(got.eval(&f, &x), c.eval(&f, &x));
        }
    }
}

#[test]
fn rank_of_a_single_power_is_one() {
    let f = PrimeField::new(101).unwrap();
    let c = plant(&f, 3, 3, 1, 5);
    let r = symmetric_rank(&BlackBoxOracle::from_circuit(f, c), 3, 3, &WaringConfig::default(), &mut from_seed(1)).unwrap();
    assert_eq!(r.rank, 1);
}
