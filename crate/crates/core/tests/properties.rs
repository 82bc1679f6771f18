mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qedpec::clifford::{build_ghz_logical_circuit, commutes_with_all, LayeredCircuit};
use qedpec::code::{trivial_syndrome_probability, StabilizerCode, Syndrome};
use qedpec::compiler::{branch_count, compile_propagated, propagate_faults, CompileOptions, DegreeSeries, PecTable};
use qedpec::noise::{block_faults, NoiseSpec};
use qedpec::sampler::FaultSet;
use qedpec::PauliString;

fn pauli(n: usize) -> impl Strategy<Value = PauliString> {
    (prop::collection::vec(any::<bool>(), n), prop::collection::vec(any::<bool>(), n)).prop_map(move |(x, z)| {
        let mut p = PauliString::identity(n);
        for q in 0..n {
            p.set_x_bit(q, x[q]);
            p.set_z_bit(q, z[q]);
        }
        p
    })
}

fn symplectic(a: &PauliString, b: &PauliString) -> bool {
    (0..a.n_qubits()).filter(|&q| (a.x_bit(q) & b.z_bit(q)) ^ (a.z_bit(q) & b.x_bit(q))).count() % 2 == 0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn product_is_a_group(n in 1usize..140, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = common::random_pauli(&mut rng, n);
        let b = common::random_pauli(&mut rng, n);
        let c = common::random_pauli(&mut rng, n);
        let ab = a.multiply(&b).unwrap();
        prop_assert_eq!(ab.multiply(&c).unwrap(), a.multiply(&b.multiply(&c).unwrap()).unwrap());
        prop_assert_eq!(&ab, &b.multiply(&a).unwrap());
        prop_assert!(a.multiply(&a).unwrap().is_identity());
        prop_assert_eq!(a.commutes(&b).unwrap(), symplectic(&a, &b));
        let text = a.to_string();
        prop_assert_eq!(text.parse::<PauliString>().unwrap(), a);
    }

    #[test]
    fn dense_index_round_trips(a in pauli(7)) {
        prop_assert_eq!(PauliString::from_dense_index(7, a.dense_index()), a);
    }

    #[test]
    fn conjugation_preserves_commutation(seed in any::<u64>(), n in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = (0..4).map(|_| common::random_layer(&mut rng, n)).collect();
        let c = LayeredCircuit::single_block(n, layers).unwrap();
        let a = common::random_pauli(&mut rng, n);
        let b = common::random_pauli(&mut rng, n);
        let ua = c.conjugate_forward(&a, 0, 4).unwrap();
        let ub = c.conjugate_forward(&b, 0, 4).unwrap();
        prop_assert_eq!(ua.commutes(&ub).unwrap(), a.commutes(&b).unwrap());
        prop_assert_eq!(c.conjugate_forward(&a.multiply(&b).unwrap(), 0, 4).unwrap(), ua.multiply(&ub).unwrap());
        prop_assert!(!ua.is_identity());
        let back = LayeredCircuit::from_text(&c.to_text()).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn propagation_matches_direct_conjugation(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let block = common::random_block(&mut rng, 12);
        let n = block.circuit.width();
        let code = StabilizerCode::iceberg(n).unwrap();
        let props = propagate_faults(&block.circuit, 0, &block.faults, &code).unwrap();
        let depth = block.circuit.layers().len();
        for (f, p) in block.faults.faults.iter().zip(&props) {
            let direct = block.circuit.conjugate_forward(&f.pauli, f.layer, depth).unwrap();
            prop_assert_eq!(&p.pauli, &direct);
            prop_assert_eq!(p.mask.is_trivial(), common::iceberg_trivial(&direct));
            prop_assert_eq!(p.weight, f.weight);
        }
    }

    #[test]
    fn reciprocal_inverts(c in prop::collection::vec(-0.3f64..0.3, 1..6)) {
        let mut coeffs = vec![1.0];
        coeffs.extend(c);
        let s = DegreeSeries::from_coeffs(coeffs);
        let order = s.order();
        let r = s.reciprocal().unwrap();
        let one = s.mul_truncated(&r, order);
        for d in 0..=order {
            let want = if d == 0 { 1.0 } else { 0.0 };
            prop_assert!((one.coeff(d) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_syndrome_probability_matches_enumeration(
        faults in prop::collection::vec((0u64..4, 0.0f64..0.5), 0..12)
    ) {
        let m = faults.len();
        let mut brute = 0.0;
        for subset in 0u32..(1 << m) {
            let mut mask = 0;
            let mut prob = 1.0;
            for (i, &(s, w)) in faults.iter().enumerate() {
                if subset >> i & 1 == 1 {
                    mask ^= s;
                    prob *= w;
                } else {
                    prob *= 1.0 - w;
                }
            }
            if mask == 0 {
                brute += prob;
            }
        }
        let fast = trivial_syndrome_probability(faults.iter().map(|&(s, w)| (Syndrome(s), w)), 2);
        prop_assert!((fast - brute).abs() < 1e-12);
    }

    #[test]
    fn faultset_empty_probability(weights in prop::collection::vec(1e-6f64..0.3, 1..40)) {
        let n = 4;
        let m = weights.len();
        let set = FaultSet::new(vec![PauliString::identity(n); m], vec![0; m], weights.clone());
        let want: f64 = weights.iter().map(|w| 1.0 - w).product();
        prop_assert!((set.p_none() - want).abs() < 1e-12);
    }

    #[test]
    fn faultset_marginals(seed in any::<u64>()) {
        let weights = [0.02, 0.1, 0.3, 0.05];
        let set = FaultSet::new(vec![PauliString::identity(4); 4], vec![0; 4], weights.to_vec());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hits = [0u32; 4];
        let mut out = Vec::new();
        let shots = 20_000;
        for _ in 0..shots {
            out.clear();
            set.sample(&mut rng, &mut out);
            for &i in &out {
                hits[i] += 1;
            }
        }
        for (i, w) in weights.iter().enumerate() {
            let f = hits[i] as f64 / shots as f64;
            let se = (w * (1.0 - w) / shots as f64).sqrt();
            prop_assert!((f - w).abs() < 5.0 * se, "fault {}: {} vs {}", i, f, w);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn logical_circuit_preserves_code(n in (2usize..40).prop_map(|h| 2 * h), t in 1usize..6) {
        let bench = build_ghz_logical_circuit(n, t).unwrap();
        let c = &bench.circuit;
        let depth = c.layers().len();
        for g in bench.code.generators() {
            let image = c.conjugate_forward(g, 0, depth).unwrap();
            prop_assert!(commutes_with_all(&image, bench.code.generators()));
            prop_assert_eq!(&image, g);
        }
        prop_assert_eq!(c.num_blocks(), (n - 3).div_ceil(t));
    }

    #[test]
    fn tables_are_well_formed(n in (2usize..20).prop_map(|h| 2 * h), t in 1usize..4, order in 1usize..3) {
        let bench = build_ghz_logical_circuit(n, t).unwrap();
        let spec = NoiseSpec::standard();
        let faults = block_faults(&bench.circuit, 0, &spec).unwrap();
        let props = propagate_faults(&bench.circuit, 0, &faults, &bench.code).unwrap();
        let b = compile_propagated(0, &props, n, &CompileOptions::with_order(order)).unwrap();
        prop_assert_eq!(b.reduced.branches_visited, branch_count(props.len(), order));
        let table = &b.table;
        let total: f64 = table.entries.iter().map(|e| e.prob).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let l1: f64 = b.inverse.iter().map(|(_, s)| s.eval().abs()).sum();
        prop_assert!((table.gamma - l1).abs() < 1e-9 * l1);
        prop_assert!(table.gamma >= 1.0);
        for e in &table.entries {
            prop_assert!(bench.code.syndrome(&e.pauli).unwrap().is_trivial());
            prop_assert!((table.gamma * e.prob * e.sign as f64 - b.inverse.coefficient(&e.pauli)).abs() < 1e-12);
        }
        let back = PecTable::from_text(&table.to_text()).unwrap();
        prop_assert_eq!(back.entries.len(), table.entries.len());
        prop_assert!((back.gamma - table.gamma).abs() <= 1e-15 * table.gamma);
        prop_assert!(b.p_success() > 1.0 - b.total_weight - 1e-12);
    }
}
