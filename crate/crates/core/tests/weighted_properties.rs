use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use zerosum_core::davenport::davenport_formula;
use zerosum_core::selftest::random_instance;
use zerosum_core::weighted::{solve, verify_certificate, Certificate, Instance, SolveOptions, Statement};
use zerosum_core::AbelianGroup;

fn d(inst: &Instance) -> usize {
    davenport_formula(&inst.group).unwrap()
}

#[test]
fn fuzzed_certificates_verify() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut fallback = 0;
    for _ in 0..10_000 {
        let inst = random_instance(&mut rng);
        let cert = solve(&inst, d(&inst), &SolveOptions::default())
            .unwrap_or_else(|e| panic!("{}: {e}", inst.to_json()));
        assert!(cert.verified);
        let again = Certificate::from_json(&cert.to_json_pretty()).unwrap();
        assert!(
            verify_certificate(&inst, d(&inst), &again).verified,
            "{}",
            inst.to_json()
        );
        if cert.solve_path == zerosum_core::weighted::SolvePath::Fallback {
            fallback += 1;
        }
    }
    assert_eq!(fallback, 0);
}

#[test]
fn unit_weight_corollary_gives_gao() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut seen = 0;
    while seen < 500 {
        let mut inst = random_instance(&mut rng);
        if inst.statement != Statement::Corollary {
            continue;
        }
        inst.w = vec![1; inst.w.len()];
        let g = &inst.group;
        let cert = solve(&inst, d(&inst), &SolveOptions::default()).unwrap();
        let picked: Vec<_> = cert
            .selection
            .image()
            .iter()
            .map(|&j| inst.x[j - 1].clone())
            .collect();
        assert_eq!(picked.len(), g.order());
        assert_eq!(g.sum(&picked).unwrap(), g.zero());
        seen += 1;
    }
}

#[test]
fn translated_corollary_value_is_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut seen = 0;
    while seen < 500 {
        let inst = random_instance(&mut rng);
        if inst.statement != Statement::Corollary {
            continue;
        }
        let g = &inst.group;
        let xm = inst.x.last().unwrap();
        let cert = solve(&inst, d(&inst), &SolveOptions::default()).unwrap();
        let mut total = g.zero();
        for &(i, j) in cert.selection.pairs() {
            let shifted = g.sub(&inst.x[j - 1], xm).unwrap();
            total = g
                .add(&total, &g.scalar_mul(inst.w[i - 1], &shifted).unwrap())
                .unwrap();
        }
        assert_eq!(total, g.zero());
        seen += 1;
    }
}

#[test]
fn solving_is_deterministic() {
    let mut a = ChaCha8Rng::seed_from_u64(3);
    let mut b = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let (i, j) = (random_instance(&mut a), random_instance(&mut b));
        let ci = solve(&i, d(&i), &SolveOptions::default()).unwrap();
        let cj = solve(&j, d(&j), &SolveOptions::default()).unwrap();
        assert_eq!(ci.to_json_pretty(), cj.to_json_pretty());
    }
}

proptest! {
    #[test]
    fn instance_json_round_trip(
        orders in prop::collection::vec(1i64..7, 0..3),
        len in 0usize..9,
        seed in any::<u64>(),
        ell in 1usize..6,
        w in prop::collection::vec(-1000i64..1000, 0..9),
        statement in prop_oneof![Just(Statement::Theorem1), Just(Statement::Corollary), Just(Statement::Word1)],
    ) {
        use rand::Rng;
        let g = AbelianGroup::canonicalize(&orders).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = (0..len).map(|_| g.unrank(rng.gen_range(0..g.order()))).collect();
        let inst = Instance::new(g, x, w, ell, statement);
        let text = inst.to_json();
        let back = Instance::from_json(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(back.digest(), inst.digest());
    }
}
