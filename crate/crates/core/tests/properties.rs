use nalgebra::DMatrix;
use num_rational::Rational64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ndsd::equivalence::{dense_word_trace, inequivalence_witness, trace_magnitude, word_trace_profile, PauliSet};
use ndsd::instruments::{
    bell_ensemble, ndsd_success, sample_separable_instrument, theorem1_bound, Adaptivity, Ensemble, COMPLETENESS_TOL,
};
use ndsd::linalg::{apply, labels, partial_trace, schmidt_coefficients, Operator, StateVector, Tensor, C64};
use ndsd::protocol::{
    append_resource, average_cost, brute_force_optimal_cost, build_strategy, kraft_sum, optimal_prefix_lengths,
    parity_measure, project_parity, run_strategy, uniform_probs, Parties, StrategyMode,
};
use ndsd::states::{
    bell_state, expectation_sign, multi_bell_family, multi_bell_table, pair_generators, pauli_mul, PauliString, Phase,
    Sign, SignTable,
};

fn pauli(n: usize) -> impl Strategy<Value = PauliString> {
    (prop::collection::vec(any::<bool>(), n), prop::collection::vec(any::<bool>(), n), 0u8..4)
        .prop_map(|(xs, zs, k)| PauliString::new(xs, zs, Phase::from_power(k as i64)).unwrap())
}

fn hermitian_pauli(n: usize) -> impl Strategy<Value = PauliString> {
    pauli(n).prop_map(|p| {
        let k = p.phase().power() & 2;
        p.with_phase(Phase::from_power(k as i64))
    })
}

fn state(labels_: &'static [&'static str]) -> impl Strategy<Value = StateVector> {
    any::<u64>().prop_map(move |seed| StateVector::random(labels(labels_), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap())
}

/// `cos θ 1 + i sin θ (n·σ)` on one qubit.
fn local_unitary(theta: f64, phi: f64, label: &str) -> Operator {
    let (nx, ny, nz) = (phi.cos() * 0.6, phi.sin() * 0.6, 0.8);
    let (c, s) = (C64::new(theta.cos(), 0.0), C64::new(0.0, theta.sin()));
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[c + s * nz, s * C64::new(nx, -ny), s * C64::new(nx, ny), c - s * nz],
    );
    Operator::new(m, vec![label.to_string()]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pauli_product_matches_dense(p in pauli(3), q in pauli(3)) {
        let prod = pauli_mul(&p, &q).unwrap().to_matrix();
        let dense = p.to_matrix() * q.to_matrix();
        prop_assert!((prod - dense).camax() < 1e-12);
    }

    #[test]
    fn pauli_product_is_associative(p in pauli(3), q in pauli(3), r in pauli(3)) {
        let left = pauli_mul(&pauli_mul(&p, &q).unwrap(), &r).unwrap();
        let right = pauli_mul(&p, &pauli_mul(&q, &r).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn pauli_trace_is_zero_or_full(p in pauli(3)) {
        let t = p.to_matrix().trace().norm();
        prop_assert!((t - trace_magnitude(&p) as f64).abs() < 1e-12);
        prop_assert!(trace_magnitude(&p) == 0 || trace_magnitude(&p) == 8);
    }

    #[test]
    fn commutation_matches_dense(p in pauli(2), q in pauli(2)) {
        let (a, b) = (p.to_matrix(), q.to_matrix());
        let comm = (&a * &b - &b * &a).camax() < 1e-12;
        prop_assert_eq!(comm, p.commutes_with(&q));
    }

    #[test]
    fn pauli_string_round_trips(p in pauli(4)) {
        let back: PauliString = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn tensor_norm_and_marginals(a in state(&["A", "B"]), b in state(&["C"])) {
        let ab = a.tensor(&b).unwrap();
        prop_assert!((ab.norm_sqr() - 1.0).abs() < 1e-12);
        let rho = ab.density();
        for keep in [labels(&["A"]), labels(&["C", "A"]), labels(&["B", "C"])] {
            prop_assert!(partial_trace(&rho, &keep).unwrap().validate().is_ok());
        }
        let xi = schmidt_coefficients(&ab, &labels(&["A"])).unwrap();
        prop_assert!((xi.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        let c = partial_trace(&rho, &labels(&["C"])).unwrap();
        prop_assert!((c.matrix() - b.density().matrix()).camax() < 1e-12);
    }

    #[test]
    fn parity_circuit_equals_projector(psi in state(&["A", "B"]), g in hermitian_pauli(2)) {
        prop_assume!(!g.is_identity_operator());
        let ab = labels(&["A", "B"]);
        let with = append_resource(&psi, "A'", "B'").unwrap();
        let circuit = parity_measure(&with, &g, &ab, &labels(&["A"]), ("A'", "B'")).unwrap();
        let direct = project_parity(&psi, &g, &ab).unwrap();
        for (x, y) in circuit.iter().zip(&direct) {
            prop_assert_eq!(x.sign, y.sign);
            prop_assert!((x.probability - y.probability).abs() < 1e-9);
            if y.probability > 1e-9 {
                let diff = x.post_state.amplitudes().iter().zip(y.post_state.amplitudes()).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
                prop_assert!(diff < 1e-9);
            }
        }
    }

    #[test]
    fn three_qubit_parity_with_split_support(psi in state(&["A1", "A2", "B1"]), g in hermitian_pauli(3)) {
        let reg = labels(&["A1", "A2", "B1"]);
        let with = append_resource(&psi, "A'", "B'").unwrap();
        let circuit = parity_measure(&with, &g, &reg, &labels(&["A1", "A2"]), ("A'", "B'")).unwrap();
        let direct = project_parity(&psi, &g, &reg).unwrap();
        for (x, y) in circuit.iter().zip(&direct) {
            prop_assert!((x.probability - y.probability).abs() < 1e-9);
        }
    }

    #[test]
    fn bell_states_are_not_disturbed(j in 0u8..4, g in prop::sample::select(vec!["ZZ", "XX", "YY", "-XX"])) {
        let phi = bell_state(j, "A", "B").unwrap();
        let g: PauliString = g.parse().unwrap();
        let out = parity_measure(&append_resource(&phi, "A'", "B'").unwrap(), &g, &labels(&["A", "B"]), &labels(&["A"]), ("A'", "B'")).unwrap();
        let taken = out.iter().find(|o| o.probability > 1.0 - 1e-9);
        prop_assert!(taken.is_some());
        let taken = taken.unwrap();
        prop_assert_eq!(taken.sign, expectation_sign(&phi, &g).unwrap());
        prop_assert!((taken.post_state.inner(&phi).unwrap().norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn success_probabilities_are_ordered(mask in 1u8..16, seed in any::<u64>(), outcomes in 1usize..4, one_way in any::<bool>()) {
        let ks: Vec<u8> = (0..4).filter(|j| mask >> j & 1 == 1).collect();
        let ens = bell_ensemble(&ks).unwrap();
        let ad = if one_way { Adaptivity::OneWay } else { Adaptivity::Product };
        let inst = sample_separable_instrument(&ens, outcomes, ad, seed).unwrap();
        prop_assert!(inst.completeness_residual().unwrap() < COMPLETENESS_TOL);
        let rep = ndsd_success(&ens, &inst).unwrap();
        prop_assert!(rep.ndsd >= -1e-12);
        prop_assert!(rep.ndsd <= rep.conventional + 1e-12);
        prop_assert!(rep.conventional <= 1.0 + 1e-12);
        prop_assert!(rep.ndsd <= 1.0 / ks.len() as f64 + 1e-6);
        for z in 0..ks.len() {
            let total: f64 = rep.diagnostics.iter().filter(|d| d.state == z).map(|d| d.probability).sum();
            prop_assert!((total - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn schmidt_bound_is_local_unitary_invariant(t1 in 0.0..6.3f64, p1 in 0.0..6.3f64, t2 in 0.0..6.3f64, p2 in 0.0..6.3f64, mask in 3u8..16) {
        let ks: Vec<u8> = (0..4).filter(|j| mask >> j & 1 == 1).collect();
        let ens = bell_ensemble(&ks).unwrap();
        let (ua, ub) = (local_unitary(t1, p1, "A"), local_unitary(t2, p2, "B"));
        let rotated: Vec<StateVector> = ens.states().iter().map(|s| apply(&ub, &apply(&ua, s).unwrap()).unwrap()).collect();
        let rotated = Ensemble::uniform(rotated, labels(&["A"]), labels(&["B"])).unwrap();
        let (a, b) = (theorem1_bound(&ens).unwrap().value, theorem1_bound(&rotated).unwrap().value);
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn word_traces_survive_pauli_conjugation(set in prop::collection::hash_set(0u8..16, 2..5), q in pauli(2)) {
        let elements: Vec<PauliString> = set
            .iter()
            .map(|&c| PauliString::new(vec![c & 1 == 1, c & 4 == 4], vec![c & 2 == 2, c & 8 == 8], Phase::ONE).unwrap())
            .collect();
        let s = PauliSet::new(elements).unwrap();
        let conj = s.conjugated(&q).unwrap();
        let a = word_trace_profile(&s, 3).unwrap();
        let b = word_trace_profile(&conj, 3).unwrap();
        prop_assert!(a.entries.iter().zip(&b.entries).all(|(x, y)| x.trace == y.trace));
        prop_assert!(inequivalence_witness(&s, &conj, 3).unwrap().is_none());
    }

    #[test]
    fn witnesses_hold_up_densely(sa in prop::collection::hash_set(0u8..16, 3), sb in prop::collection::hash_set(0u8..16, 3)) {
        let build = |set: &std::collections::HashSet<u8>| {
            let mut v: Vec<u8> = set.iter().copied().collect();
            v.sort();
            PauliSet::new(v.iter().map(|&c| PauliString::new(vec![c & 1 == 1, c & 4 == 4], vec![c & 2 == 2, c & 8 == 8], Phase::ONE).unwrap()).collect()).unwrap()
        };
        let (a, b) = (build(&sa), build(&sb));
        if let Some(w) = inequivalence_witness(&a, &b, 3).unwrap() {
            let (da, db) = (dense_word_trace(&a, &w.word), dense_word_trace(&b, &w.word));
            prop_assert!((da - db).abs() > 1.0);
        }
    }
}

fn table_from(rows: &[Vec<bool>]) -> SignTable {
    let cols = rows[0].len();
    SignTable {
        register: labels(&["Q"]),
        states: (0..rows.len()).map(|i| vec![i as u8]).collect(),
        generators: vec![PauliString::identity(1); cols],
        entries: rows.iter().map(|r| r.iter().map(|&b| if b { Sign::Minus } else { Sign::Plus }).collect()).collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dp_matches_brute_force(rows in prop::collection::hash_set(prop::collection::vec(any::<bool>(), 5), 2..7), weights in prop::collection::vec(1i64..5, 6)) {
        let rows: Vec<Vec<bool>> = rows.into_iter().collect();
        let table = table_from(&rows);
        let w = &weights[..rows.len()];
        let total: i64 = w.iter().sum();
        let probs: Vec<Rational64> = w.iter().map(|&x| Rational64::new(x, total)).collect();
        let tree = build_strategy(&table, &probs, StrategyMode::Optimal).unwrap();
        prop_assert!(tree.is_valid());
        prop_assert_eq!(average_cost(&tree), brute_force_optimal_cost(&table, &probs).unwrap());
        let greedy = build_strategy(&table, &probs, StrategyMode::Greedy).unwrap();
        prop_assert!(greedy.is_valid());
        prop_assert!(average_cost(&greedy) >= average_cost(&tree));
    }

    #[test]
    fn prefix_lengths_lower_bound_uniform_trees(rows in prop::collection::hash_set(prop::collection::vec(any::<bool>(), 6), 1..20)) {
        let rows: Vec<Vec<bool>> = rows.into_iter().collect();
        let m = rows.len();
        let tree = build_strategy(&table_from(&rows), &uniform_probs(m), StrategyMode::Optimal).unwrap();
        let lengths = optimal_prefix_lengths(m).unwrap();
        let floor = Rational64::new(lengths.iter().sum::<u32>() as i64, m as i64);
        prop_assert!(average_cost(&tree) >= floor);
    }

    #[test]
    fn strategy_runs_cost_their_depth(subset in prop::collection::hash_set(prop::collection::vec(0u8..4, 2), 2..8)) {
        let ids: Vec<Vec<u8>> = subset.into_iter().collect();
        let family = multi_bell_family(&ids).unwrap();
        let table = multi_bell_table(&ids).unwrap();
        prop_assert_eq!(&table.generators, &pair_generators(2));
        let tree = build_strategy(&table, &uniform_probs(ids.len()), StrategyMode::Optimal).unwrap();
        let parties = Parties::bipartite(&labels(&["A1", "A2"]), &labels(&["B1", "B2"]));
        let depths = tree.depths();
        let mut total = 0;
        for (z, s) in family.iter().enumerate() {
            let run = run_strategy(&tree, &parties, &s.state).unwrap();
            prop_assert_eq!(run.guess, z);
            prop_assert_eq!(run.ebits, depths[z]);
            prop_assert_eq!(run.readings.len() as u32, run.ebits);
            prop_assert!((run.fidelity - 1.0).abs() < 1e-9);
            total += run.ebits;
        }
        prop_assert_eq!(Rational64::new(total as i64, ids.len() as i64), average_cost(&tree));
    }
}

#[test]
fn kraft_sum_is_exactly_one() {
    for m in 1..=300 {
        assert_eq!(kraft_sum(&optimal_prefix_lengths(m).unwrap()), Rational64::from_integer(1), "m = {m}");
    }
}
