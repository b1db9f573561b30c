use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tensorforge::field::{Field, PrimeField};
use tensorforge::poly::SparsePoly;
use tensorforge::syssolve::{brute_force, solve_system, PolySystem};
use tensorforge::Error;

fn random_eq(f: &PrimeField, n: usize, d: usize, rng: &mut dyn RngCore) -> SparsePoly<u64> {
    let mut p = SparsePoly::zero(n);
    let terms = rng.gen_range(1..=4);
    for _ in 0..terms {
        let deg = rng.gen_range(0..=d);
        let mut m = vec![0u32; n];
        for _ in 0..deg {
            m[rng.gen_range(0..n)] += 1;
        }
        p.add_term(f, m, f.random_nonzero(rng));
    }
    p
}

/// Random system; half the time shifted so that a random point is a root.
fn random_system(rng: &mut ChaCha8Rng) -> PolySystem {
    let f = PrimeField::new(if rng.gen_bool(0.5) { 11 } else { 13 }).unwrap();
    let n = rng.gen_range(1..=3);
    let d = rng.gen_range(1..=3);
    let m = rng.gen_range(1..=5);
    let plant = rng.gen_bool(0.5);
    let x = f.random_vec(n, rng);
    let eqs = (0..m)
        .map(|_| {
            let e = random_eq(&f, n, d, rng);
            if plant {
                let c = e.eval(&f, &x);
                e.sub(&f, &SparsePoly::constant(&f, n, c))
            } else {
                e
            }
        })
        .collect();
    PolySystem::anonymous(f, n, eqs).unwrap()
}

#[test]
fn agrees_with_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for i in 0..120 {
        let sys = random_system(&mut rng);
        let truth = brute_force(&sys).unwrap();
        match solve_system(&sys, false, &mut rng) {
            Ok(s) => {
                assert!(s.check(&sys), "system {i}: bad solution");
                assert!(!truth.is_empty());
            }
            Err(Error::NoSolution) => assert!(truth.is_empty(), "system {i}: missed {:?}", truth[0]),
            Err(e) => panic!("system {i}: {e}"),
        }
    }
}
